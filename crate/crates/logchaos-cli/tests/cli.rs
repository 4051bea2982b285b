//! End-to-end tests of the CLI binary: output schemas, exit codes,
//! determinism, and the manifest-reproducibility invariant.

use logchaos::estimators::fit_exponent;
use logchaos::report::{fit_from_csv, manifest_from_json, parse_float, series_from_csv};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logchaos"))
}

fn run_ok(args: &[&str], cwd: &Path) -> Output {
    let out = bin()
        .args(args)
        .current_dir(cwd)
        .env_remove("LOGCHAOS_THREADS")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str], cwd: &Path, expected_code: i32) -> String {
    let out = bin()
        .args(args)
        .current_dir(cwd)
        .env_remove("LOGCHAOS_THREADS")
        .output()
        .expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(expected_code),
        "command {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

const SMALL_ESTIMATE: &str = r#"
[model]
beta2 = 0.4
q = 2.0
d = 1

[ladder]
eps = [0.25, 0.125, 0.0625]

[run]
estimator = "annealed_naive"
replicas = 300
seed = 11
"#;

#[test]
fn theory_table_branches_and_specials() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "theory",
            "--q",
            "2",
            "--d",
            "1",
            "--beta2-max",
            "3",
            "--step",
            "0.33333333333333333",
            "--out",
            "t",
            "--deterministic",
        ],
        tmp.path(),
    );
    let csv = read(&tmp.path().join("t"), "theory.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "beta2,regime,eta_q,teta_q,hat_eta_q,f1,f2,f3,c_star"
    );
    // beta2 = 0: zero exponents, inf / nan specials.
    let row0: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((row0[2], row0[3], row0[6], row0[8]), ("0", "0", "inf", "nan"));
    // beta2 = 2/3 is the annealed boundary for q=2, d=1: f1 = f2 = teta.
    let row2: Vec<&str> = lines[3].split(',').collect();
    let teta = parse_float(row2[3]).unwrap();
    let f1 = parse_float(row2[5]).unwrap();
    let f2 = parse_float(row2[6]).unwrap();
    assert!((teta + 2.0 / 3.0).abs() < 1e-12, "teta {teta}");
    assert!((f1 - teta).abs() < 1e-12);
    assert!((f2 - teta).abs() < 1e-12);
    // All frozen rows share teta = -1.
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "frozen" {
            assert_eq!(parse_float(f[3]).unwrap(), -1.0);
        }
    }
    // The manifest exists and is strict JSON.
    let manifest = manifest_from_json(&read(&tmp.path().join("t"), "manifest.json")).unwrap();
    assert!(manifest.command.starts_with("theory"));
    assert_eq!(manifest.wall_clock_seconds, 0.0);
}

#[test]
fn estimate_round_trips_and_zero_beta_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[model]\nbeta2 = 0.0\nq = 2.0\nd = 1\n\
                  [ladder]\neps = [0.25, 0.125, 0.0625]\n\
                  [run]\nestimator = \"annealed_naive\"\nreplicas = 200\n";
    std::fs::write(tmp.path().join("zero.toml"), config).unwrap();
    run_ok(
        &[
            "estimate",
            "--config",
            "zero.toml",
            "--out",
            "z",
            "--deterministic",
        ],
        tmp.path(),
    );
    let out = tmp.path().join("z");
    let series = series_from_csv(&read(&out, "series.csv")).unwrap();
    // Each rung is exactly (1-q) d log 2 = -log 2.
    for rung in &series.rungs {
        assert!(
            (rung.log_estimate - (-std::f64::consts::LN_2)).abs() < 1e-12,
            "rung {}",
            rung.log_estimate
        );
    }
    let summary = fit_from_csv(&read(&out, "fit.csv")).unwrap();
    assert!(summary.slope.abs() < 1e-10, "slope {}", summary.slope);
    assert_eq!(summary.theory_value, 0.0);

    // Round-trip invariant: refitting the parsed series reproduces the
    // summary columns exactly.
    let refit = fit_exponent(&series).unwrap();
    assert!((refit.slope - summary.slope).abs() <= 1e-12);
    assert!((refit.slope_stderr - summary.slope_stderr).abs() <= 1e-12);
    assert!((refit.r_squared - summary.r_squared).abs() <= 1e-12);
}

#[test]
fn estimate_is_deterministic_and_seed_sensitive() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("est.toml"), SMALL_ESTIMATE).unwrap();
    run_ok(
        &["estimate", "--config", "est.toml", "--out", "a", "--deterministic"],
        tmp.path(),
    );
    run_ok(
        &["estimate", "--config", "est.toml", "--out", "b", "--deterministic"],
        tmp.path(),
    );
    for name in ["series.csv", "fit.csv", "manifest.json"] {
        assert_eq!(
            read(&tmp.path().join("a"), name),
            read(&tmp.path().join("b"), name),
            "{name} differs between identical runs"
        );
    }
    // A different seed changes the series.
    run_ok(
        &[
            "estimate",
            "--config",
            "est.toml",
            "--seed",
            "12",
            "--out",
            "c",
            "--deterministic",
        ],
        tmp.path(),
    );
    assert_ne!(
        read(&tmp.path().join("a"), "series.csv"),
        read(&tmp.path().join("c"), "series.csv")
    );
}

#[test]
fn manifest_alone_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("est.toml"), SMALL_ESTIMATE).unwrap();
    run_ok(
        &[
            "estimate",
            "--config",
            "est.toml",
            "--seed",
            "77",
            "--out",
            "orig",
            "--deterministic",
        ],
        tmp.path(),
    );
    let manifest =
        manifest_from_json(&read(&tmp.path().join("orig"), "manifest.json")).unwrap();
    assert_eq!(manifest.seed, 77);
    assert_eq!(manifest.config_text, SMALL_ESTIMATE);
    assert_eq!(manifest.per_rung_jitter.len(), 3);

    // Re-run purely from manifest contents.
    std::fs::write(tmp.path().join("from_manifest.toml"), &manifest.config_text).unwrap();
    run_ok(
        &[
            "estimate",
            "--config",
            "from_manifest.toml",
            "--seed",
            "77",
            "--out",
            "redo",
            "--deterministic",
        ],
        tmp.path(),
    );
    for name in ["series.csv", "fit.csv"] {
        assert_eq!(
            read(&tmp.path().join("orig"), name),
            read(&tmp.path().join("redo"), name),
            "{name} not reproduced from manifest"
        );
    }
}

#[test]
fn sweep_theory_only_matches_theory_command() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[model]\nq = 2.0\nd = 1\n[run]\nreplicas = 0\n\
                  [sweep]\nbeta2_grid = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]\n";
    std::fs::write(tmp.path().join("sw.toml"), config).unwrap();
    run_ok(
        &["sweep", "--config", "sw.toml", "--out", "sw", "--deterministic"],
        tmp.path(),
    );
    run_ok(
        &[
            "theory",
            "--q",
            "2",
            "--d",
            "1",
            "--beta2-max",
            "3",
            "--step",
            "0.5",
            "--out",
            "th",
            "--deterministic",
        ],
        tmp.path(),
    );
    assert_eq!(
        read(&tmp.path().join("sw"), "theory.csv"),
        read(&tmp.path().join("th"), "theory.csv")
    );
}

#[test]
fn sampling_sweep_emits_per_row_series() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[model]\nq = 2.0\nd = 1\n\
                  [ladder]\neps = [0.25, 0.125, 0.0625]\n\
                  [run]\nestimator = \"quenched\"\nreplicas = 200\nseed = 5\n\
                  [sweep]\nbeta2_grid = [0.0, 0.4]\n";
    std::fs::write(tmp.path().join("sw.toml"), config).unwrap();
    run_ok(
        &["sweep", "--config", "sw.toml", "--out", "sw", "--deterministic"],
        tmp.path(),
    );
    let out = tmp.path().join("sw");
    let sweep = read(&out, "sweep.csv");
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("beta2,q,d,method,regime,"));
    // Row files parse and refit to the sweep row values.
    for (i, line) in lines[1..].iter().enumerate() {
        let series = series_from_csv(&read(&out, &format!("series_{i:02}.csv"))).unwrap();
        let refit = fit_exponent(&series).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        let slope = parse_float(fields[5]).unwrap();
        assert!((refit.slope - slope).abs() <= 1e-12);
    }
}

#[test]
fn validation_failures_exit_2_with_named_keys() {
    let tmp = tempfile::tempdir().unwrap();
    // Missing config flag.
    let err = run_err(&["estimate"], tmp.path(), 2);
    assert!(err.contains("--config"), "{err}");
    // Duplicate ladder rung named in the message.
    let config = "[model]\nbeta2 = 0.4\nq = 2.0\nd = 1\n\
                  [ladder]\neps = [0.25, 0.25]\n\
                  [run]\nestimator = \"quenched\"\nreplicas = 200\n";
    std::fs::write(tmp.path().join("dup.toml"), config).unwrap();
    let err = run_err(
        &["estimate", "--config", "dup.toml", "--out", "x"],
        tmp.path(),
        2,
    );
    assert!(err.contains("rung"), "{err}");
    // Unknown key named.
    std::fs::write(tmp.path().join("bad.toml"), "[model]\nbogus = 1\n").unwrap();
    let err = run_err(
        &["estimate", "--config", "bad.toml", "--out", "x"],
        tmp.path(),
        2,
    );
    assert!(err.contains("bogus"), "{err}");
    // Probe missing its parameter.
    std::fs::write(
        tmp.path().join("noprobe.toml"),
        "[model]\nbeta2 = 0.5\nq = 2.0\nd = 1\n[run]\nreplicas = 200\n",
    )
    .unwrap();
    let err = run_err(
        &["probe", "lemma1", "--config", "noprobe.toml", "--out", "x"],
        tmp.path(),
        2,
    );
    assert!(err.contains("probe.s"), "{err}");
}

#[test]
fn thread_env_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["theory", "--out", "t"])
        .current_dir(tmp.path())
        .env("LOGCHAOS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["theory", "--out", "t", "--deterministic"])
        .current_dir(tmp.path())
        .env("LOGCHAOS_THREADS", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest = manifest_from_json(&read(&tmp.path().join("t"), "manifest.json")).unwrap();
    assert_eq!(manifest.threads, 4);
}

#[test]
fn toolbox_runs_clean_and_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[run]\nseed = 3\n[toolbox]\ninstances = 12\nn_samples = 1500\n";
    std::fs::write(tmp.path().join("tb.toml"), config).unwrap();
    run_ok(
        &[
            "toolbox",
            "kahane",
            "--config",
            "tb.toml",
            "--out",
            "k1",
            "--deterministic",
        ],
        tmp.path(),
    );
    run_ok(
        &[
            "toolbox",
            "kahane",
            "--config",
            "tb.toml",
            "--out",
            "k2",
            "--deterministic",
        ],
        tmp.path(),
    );
    let a = read(&tmp.path().join("k1"), "kahane.json");
    assert_eq!(a, read(&tmp.path().join("k2"), "kahane.json"));
    let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed["violations"], 0);
    assert_eq!(parsed["instances"], 12);

    run_ok(
        &[
            "toolbox",
            "slepian",
            "--config",
            "tb.toml",
            "--out",
            "s1",
            "--deterministic",
        ],
        tmp.path(),
    );
    let s = read(&tmp.path().join("s1"), "slepian.json");
    let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(parsed["violations"], 0);
}

#[test]
fn probe_outputs_have_the_series_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[model]\nbeta2 = 0.0\nq = 2.0\nd = 1\n\
                  [ladder]\neps = [0.25, 0.125, 0.0625]\n\
                  [run]\nreplicas = 200\n[probe]\nq_neg = 1.0\n";
    std::fs::write(tmp.path().join("pr.toml"), config).unwrap();
    run_ok(
        &[
            "probe",
            "negm",
            "--config",
            "pr.toml",
            "--out",
            "p",
            "--deterministic",
        ],
        tmp.path(),
    );
    let series = series_from_csv(&read(&tmp.path().join("p"), "series.csv")).unwrap();
    assert_eq!(series.method.as_str(), "negative_moment");
    // At beta = 0 the mass is exactly 2^d, so every rung log-estimate is
    // -q_neg * d * log 2.
    for rung in &series.rungs {
        assert!((rung.log_estimate + std::f64::consts::LN_2).abs() < 1e-12);
    }
    let summary = fit_from_csv(&read(&tmp.path().join("p"), "fit.csv")).unwrap();
    assert!(summary.slope.abs() < 1e-10);
}
