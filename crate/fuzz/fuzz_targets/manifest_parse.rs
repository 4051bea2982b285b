#![no_main]

use libfuzzer_sys::fuzz_target;
use logchaos::report::{manifest_from_json, manifest_to_json};

// Any JSON that deserializes into a manifest must serialize back and
// re-parse to the same value.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(manifest) = manifest_from_json(text) else {
        return;
    };
    let encoded = manifest_to_json(&manifest).expect("serializing a parsed manifest");
    let reparsed = manifest_from_json(&encoded).expect("round-trip parse");
    let reencoded = manifest_to_json(&reparsed).expect("second serialization");
    assert_eq!(encoded, reencoded, "manifest round-trip changed the value");
});
