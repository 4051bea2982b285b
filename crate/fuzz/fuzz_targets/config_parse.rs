#![no_main]

use libfuzzer_sys::fuzz_target;
use logchaos::config::{parse_config_str, ProbeKind};

// Parsing arbitrary bytes must never panic, and any config that parses must
// survive every job builder (returning an error is fine; crashing is not).
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = parse_config_str(text) else {
        return;
    };
    let _ = cfg.estimate_job(None);
    let _ = cfg.sweep_job(Some(1));
    let _ = cfg.toolbox_job(None);
    for kind in [
        ProbeKind::Negm,
        ProbeKind::Lemma1,
        ProbeKind::Lemma2,
        ProbeKind::Prefreeze,
    ] {
        let _ = cfg.probe_job(kind, None);
    }
});
