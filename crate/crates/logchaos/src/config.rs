//! Config-file parsing and validation for the CLI.
//!
//! The format is plain UTF-8 TOML with nested sections. Unknown keys are
//! rejected with messages naming the offending key, and every semantic
//! check names the section.key it applies to. One config file can drive any
//! subcommand; each job builder picks the sections it needs and validates
//! the combination.

use crate::error::{Error, Result};
use crate::estimators::{MethodTag, RunConfig, TiltPolicy, UPolicy};
use crate::theory::ModelParams;
use serde::Deserialize;
use std::path::Path;

/// Parsed config file. Every section is optional at parse time; job
/// builders enforce per-command requirements.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub toolbox: ToolboxSection,
}

/// `[model]`: the triple `(beta2, q, d)`. `beta2` may be omitted for
/// sweeps (which carry their own grid).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub beta2: Option<f64>,
    pub q: f64,
    pub d: u32,
}

/// `[ladder]`: explicit cutoff rungs; defaults to the per-dimension ladder.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub eps: Option<Vec<f64>>,
    pub max_points: Option<usize>,
}

/// `[run]`: estimator selection and sampling parameters.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// One of `quenched`, `annealed_naive`, `annealed_tilted`,
    /// `participation`.
    pub estimator: Option<String>,
    /// Replicas per rung; `0` turns a sweep into theory-only mode.
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
    /// `"none"`, `"auto"`, or a number in `[0, 1]`.
    pub tilt: Option<TiltValue>,
    /// `"uniform_grid"` or `"fixed_center"`.
    pub u_policy: Option<String>,
    /// Kernel offset; defaults per dimension (0 for d=1, ln 4 for d=2).
    pub g_const: Option<f64>,
}

/// A tilt setting is either a named policy or a fixed strength.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TiltValue {
    Named(String),
    Fixed(f64),
}

/// `[sweep]`: the beta2 grid for phase-diagram tables.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub beta2_grid: Vec<f64>,
}

/// `[probe]`: parameters for the lemma probes; each probe reads only its
/// own keys.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    /// negm: positive moment order (defaults to `model.q`).
    pub q_neg: Option<f64>,
    /// lemma1: singularity strength (required).
    pub s: Option<f64>,
    /// lemma1: moment order in (0, 1] (default 1).
    pub t: Option<f64>,
    /// lemma2: lower-exponent parameter (default 0.5).
    pub c_exp: Option<f64>,
    /// prefreeze: moment orders to compare (required).
    pub q_list: Option<Vec<f64>>,
}

/// `[toolbox]`: comparison-inequality suite sizes.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolboxSection {
    pub instances: Option<usize>,
    pub n_samples: Option<usize>,
}

/// Which probe subcommand is running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Negm,
    Lemma1,
    Lemma2,
    Prefreeze,
}

impl ProbeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeKind::Negm => "negm",
            ProbeKind::Lemma1 => "lemma1",
            ProbeKind::Lemma2 => "lemma2",
            ProbeKind::Prefreeze => "prefreeze",
        }
    }
}

/// Fully validated single-estimate job.
#[derive(Debug, Clone)]
pub struct EstimateJob {
    pub cfg: RunConfig,
    pub method: MethodTag,
}

/// Fully validated sweep job. With `replicas = 0` the sweep degenerates to
/// a theory-only table and no estimator is required.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub q: f64,
    pub d: u32,
    pub beta2_grid: Vec<f64>,
    pub method: Option<MethodTag>,
    pub theory_only: bool,
    template: Option<RunConfig>,
}

impl SweepJob {
    /// Instantiates the run config for one grid point. All rows share the
    /// master seed, so the same field samples drive every `beta2` (common
    /// random numbers across the sweep).
    pub fn run_config_for(&self, beta2: f64) -> Result<RunConfig> {
        let template = self.template.as_ref().ok_or_else(|| {
            Error::Config("theory-only sweep has no run configuration".into())
        })?;
        let mut cfg = template.clone();
        cfg.params = ModelParams::new(beta2, self.q, self.d)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully validated probe job.
#[derive(Debug, Clone)]
pub enum ProbeJob {
    Negm { cfg: RunConfig, q_neg: f64 },
    Lemma1 { cfg: RunConfig, s: f64, t: f64 },
    Lemma2 { cfg: RunConfig, c_exp: f64 },
    Prefreeze { cfg: RunConfig, q_list: Vec<f64> },
}

impl ProbeJob {
    pub fn cfg(&self) -> &RunConfig {
        match self {
            ProbeJob::Negm { cfg, .. }
            | ProbeJob::Lemma1 { cfg, .. }
            | ProbeJob::Lemma2 { cfg, .. }
            | ProbeJob::Prefreeze { cfg, .. } => cfg,
        }
    }
}

/// Fully validated toolbox job.
#[derive(Debug, Clone)]
pub struct ToolboxJob {
    pub instances: usize,
    pub n_samples: usize,
    pub seed: u64,
}

/// Default suite size for the toolbox subcommands.
pub const DEFAULT_TOOLBOX_INSTANCES: usize = 200;
/// Default Monte Carlo samples per toolbox instance.
pub const DEFAULT_TOOLBOX_SAMPLES: usize = 40_000;

/// Parses a config document from text.
pub fn parse_config_str(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
}

/// Loads and parses a config file, returning the parsed form together with
/// the raw text (echoed verbatim into run manifests).
pub fn load_config(path: &Path) -> Result<(ConfigFile, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| {
        Error::Config(format!("config {} is not valid UTF-8", path.display()))
    })?;
    let parsed = parse_config_str(&text)?;
    Ok((parsed, text))
}

fn parse_estimator(s: &str) -> Result<MethodTag> {
    let tag = MethodTag::parse(s)
        .map_err(|_| bad_estimator(s))?;
    match tag {
        MethodTag::Quenched
        | MethodTag::AnnealedNaive
        | MethodTag::AnnealedTilted
        | MethodTag::Participation => Ok(tag),
        _ => Err(bad_estimator(s)),
    }
}

fn bad_estimator(s: &str) -> Error {
    Error::Config(format!(
        "run.estimator must be one of quenched, annealed_naive, annealed_tilted, \
         participation; got '{s}'"
    ))
}

fn resolve_tilt(v: &Option<TiltValue>) -> Result<TiltPolicy> {
    match v {
        None => Ok(TiltPolicy::None),
        Some(TiltValue::Named(s)) => match s.as_str() {
            "none" => Ok(TiltPolicy::None),
            "auto" => Ok(TiltPolicy::Auto),
            other => Err(Error::Config(format!(
                "run.tilt must be \"none\", \"auto\", or a number in [0, 1]; got \"{other}\""
            ))),
        },
        Some(TiltValue::Fixed(c)) => Ok(TiltPolicy::Fixed(*c)),
    }
}

fn resolve_u_policy(v: &Option<String>) -> Result<UPolicy> {
    match v.as_deref() {
        None | Some("uniform_grid") => Ok(UPolicy::UniformGrid),
        Some("fixed_center") => Ok(UPolicy::FixedCenter),
        Some(other) => Err(Error::Config(format!(
            "run.u_policy must be \"uniform_grid\" or \"fixed_center\"; got \"{other}\""
        ))),
    }
}

impl ConfigFile {
    fn model(&self) -> Result<&ModelSection> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config("missing [model] section".into()))
    }

    fn model_beta2(&self) -> Result<f64> {
        self.model()?.beta2.ok_or_else(|| {
            Error::Config("model.beta2 is required for this command".into())
        })
    }

    /// Assembles and validates a `RunConfig` for the given `beta2`.
    fn build_run_config(&self, beta2: f64, seed_override: Option<u64>) -> Result<RunConfig> {
        let m = self.model()?;
        let params = ModelParams::new(beta2, m.q, m.d)?;
        let mut cfg = RunConfig::new(params);
        if let Some(eps) = &self.ladder.eps {
            cfg.eps_values = eps.clone();
        }
        if let Some(mp) = self.ladder.max_points {
            cfg.max_points = mp;
        }
        if let Some(r) = self.run.replicas {
            cfg.replicas = usize::try_from(r)
                .map_err(|_| Error::Config(format!("run.replicas {r} does not fit usize")))?;
        }
        if let Some(s) = self.run.seed {
            cfg.master_seed = s;
        }
        if let Some(s) = seed_override {
            cfg.master_seed = s;
        }
        cfg.tilt = resolve_tilt(&self.run.tilt)?;
        cfg.u_policy = resolve_u_policy(&self.run.u_policy)?;
        cfg.g_const = self.run.g_const;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Job builder for `estimate`.
    pub fn estimate_job(&self, seed_override: Option<u64>) -> Result<EstimateJob> {
        let method = parse_estimator(self.run.estimator.as_deref().ok_or_else(|| {
            Error::Config("run.estimator is required for estimate".into())
        })?)?;
        let cfg = self.build_run_config(self.model_beta2()?, seed_override)?;
        Ok(EstimateJob { cfg, method })
    }

    /// Job builder for `sweep`.
    pub fn sweep_job(&self, seed_override: Option<u64>) -> Result<SweepJob> {
        let m = self.model()?;
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
        if sweep.beta2_grid.is_empty() {
            return Err(Error::Config("sweep.beta2_grid must be non-empty".into()));
        }
        for (i, &b) in sweep.beta2_grid.iter().enumerate() {
            if !b.is_finite() || b < 0.0 {
                return Err(Error::Config(format!(
                    "sweep.beta2_grid[{i}] must be finite and >= 0, got {b}"
                )));
            }
        }
        let theory_only = self.run.replicas == Some(0);
        let (method, template) = if theory_only {
            (None, None)
        } else {
            let method = parse_estimator(self.run.estimator.as_deref().ok_or_else(|| {
                Error::Config("run.estimator is required for a sampling sweep".into())
            })?)?;
            // Validate the template against the first grid point.
            let template = self.build_run_config(sweep.beta2_grid[0], seed_override)?;
            (Some(method), Some(template))
        };
        Ok(SweepJob {
            q: m.q,
            d: m.d,
            beta2_grid: sweep.beta2_grid.clone(),
            method,
            theory_only,
            template,
        })
    }

    /// Job builder for `probe <kind>`.
    pub fn probe_job(&self, kind: ProbeKind, seed_override: Option<u64>) -> Result<ProbeJob> {
        let cfg = self.build_run_config(self.model_beta2()?, seed_override)?;
        match kind {
            ProbeKind::Negm => {
                let q_neg = self.probe.q_neg.unwrap_or(cfg.params.q);
                Ok(ProbeJob::Negm { cfg, q_neg })
            }
            ProbeKind::Lemma1 => {
                let s = self.probe.s.ok_or_else(|| {
                    Error::Config("probe.s is required for lemma1".into())
                })?;
                let t = self.probe.t.unwrap_or(1.0);
                Ok(ProbeJob::Lemma1 { cfg, s, t })
            }
            ProbeKind::Lemma2 => {
                let c_exp = self.probe.c_exp.unwrap_or(0.5);
                Ok(ProbeJob::Lemma2 { cfg, c_exp })
            }
            ProbeKind::Prefreeze => {
                let q_list = self.probe.q_list.clone().ok_or_else(|| {
                    Error::Config("probe.q_list is required for prefreeze".into())
                })?;
                Ok(ProbeJob::Prefreeze { cfg, q_list })
            }
        }
    }

    /// Job builder for `toolbox`. Works with an entirely empty config.
    pub fn toolbox_job(&self, seed_override: Option<u64>) -> Result<ToolboxJob> {
        let instances = self
            .toolbox
            .instances
            .unwrap_or(DEFAULT_TOOLBOX_INSTANCES);
        let n_samples = self.toolbox.n_samples.unwrap_or(DEFAULT_TOOLBOX_SAMPLES);
        if instances == 0 {
            return Err(Error::Config("toolbox.instances must be >= 1".into()));
        }
        if n_samples < 2 {
            return Err(Error::Config("toolbox.n_samples must be >= 2".into()));
        }
        let seed = seed_override.or(self.run.seed).unwrap_or(0);
        Ok(ToolboxJob {
            instances,
            n_samples,
            seed,
        })
    }
}

/// Builds the `beta2` grid `0, step, 2 step, ... <= max` for theory tables.
pub fn beta2_range_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(max.is_finite() && max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta2 range maximum must be finite and > 0, got {max}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta2 range step must be finite and > 0, got {step}"
        )));
    }
    let count = (max / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(Error::ResourceLimit(format!(
            "beta2 range has {count} points; cap is 100000"
        )));
    }
    Ok((0..=count).map(|k| k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL_ESTIMATE: &str = r#"
[model]
beta2 = 1.0
q = 2.0
d = 1

[ladder]
eps = [0.0625, 0.03125]
max_points = 4096

[run]
estimator = "annealed_tilted"
replicas = 500
seed = 7
tilt = "auto"
u_policy = "uniform_grid"
"#;

    #[test]
    fn full_estimate_config_parses() {
        let cfg = parse_config_str(FULL_ESTIMATE).unwrap();
        let job = cfg.estimate_job(None).unwrap();
        assert_eq!(job.method, MethodTag::AnnealedTilted);
        assert_eq!(job.cfg.params.beta2, 1.0);
        assert_eq!(job.cfg.eps_values, vec![0.0625, 0.03125]);
        assert_eq!(job.cfg.max_points, 4096);
        assert_eq!(job.cfg.replicas, 500);
        assert_eq!(job.cfg.master_seed, 7);
        assert_eq!(job.cfg.tilt, TiltPolicy::Auto);
        // Seed override wins.
        let job2 = cfg.estimate_job(Some(99)).unwrap();
        assert_eq!(job2.cfg.master_seed, 99);
    }

    #[test]
    fn minimal_estimate_gets_defaults() {
        let cfg = parse_config_str(
            "[model]\nbeta2 = 0.4\nq = 2.0\nd = 1\n[run]\nestimator = \"quenched\"\n",
        )
        .unwrap();
        let job = cfg.estimate_job(None).unwrap();
        assert_eq!(job.cfg.eps_values, crate::estimators::default_ladder(1));
        assert_eq!(job.cfg.replicas, 20_000);
        assert_eq!(job.cfg.master_seed, 0);
        assert_eq!(job.cfg.tilt, TiltPolicy::None);
        assert!(job.cfg.g_const.is_none());
    }

    #[test]
    fn unknown_and_missing_keys_are_named() {
        let err = parse_config_str("[model]\nbeta2 = 1.0\nq = 2.0\nd = 1\nbogus = 3\n")
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_config_str("[model]\nbeta2 = 1.0\nd = 1\n").unwrap_err();
        assert!(err.to_string().contains('q'), "{err}");
        let err = parse_config_str("[run]\nreplcas = 10\n").unwrap_err();
        assert!(err.to_string().contains("replcas"), "{err}");
    }

    #[test]
    fn estimator_and_tilt_validation() {
        let base = "[model]\nbeta2 = 1.0\nq = 2.0\nd = 1\n";
        let cfg =
            parse_config_str(&format!("{base}[run]\nestimator = \"lemma1\"\n")).unwrap();
        let err = cfg.estimate_job(None).unwrap_err();
        assert!(err.to_string().contains("run.estimator"), "{err}");

        let cfg = parse_config_str(&format!(
            "{base}[run]\nestimator = \"quenched\"\ntilt = \"sideways\"\n"
        ))
        .unwrap();
        let err = cfg.estimate_job(None).unwrap_err();
        assert!(err.to_string().contains("run.tilt"), "{err}");

        let cfg = parse_config_str(&format!(
            "{base}[run]\nestimator = \"annealed_tilted\"\ntilt = 1.5\n"
        ))
        .unwrap();
        assert!(cfg.estimate_job(None).is_err());

        let cfg = parse_config_str(&format!(
            "{base}[run]\nestimator = \"annealed_tilted\"\ntilt = 0.75\n"
        ))
        .unwrap();
        assert_eq!(
            cfg.estimate_job(None).unwrap().cfg.tilt,
            TiltPolicy::Fixed(0.75)
        );

        let cfg = parse_config_str(&format!(
            "{base}[run]\nestimator = \"quenched\"\nu_policy = \"diagonal\"\n"
        ))
        .unwrap();
        let err = cfg.estimate_job(None).unwrap_err();
        assert!(err.to_string().contains("u_policy"), "{err}");
    }

    #[test]
    fn estimate_requires_model_and_beta2() {
        let cfg = parse_config_str("[run]\nestimator = \"quenched\"\n").unwrap();
        let err = cfg.estimate_job(None).unwrap_err();
        assert!(err.to_string().contains("[model]"), "{err}");

        let cfg = parse_config_str(
            "[model]\nq = 2.0\nd = 1\n[run]\nestimator = \"quenched\"\n",
        )
        .unwrap();
        let err = cfg.estimate_job(None).unwrap_err();
        assert!(err.to_string().contains("model.beta2"), "{err}");
    }

    #[test]
    fn sweep_jobs_validate_the_grid() {
        let base = "[model]\nq = 2.0\nd = 1\n[run]\nestimator = \"quenched\"\nreplicas = 200\n";
        let cfg = parse_config_str(&format!(
            "{base}[sweep]\nbeta2_grid = [0.0, 0.4, 1.0]\n"
        ))
        .unwrap();
        let job = cfg.sweep_job(Some(3)).unwrap();
        assert!(!job.theory_only);
        assert_eq!(job.method, Some(MethodTag::Quenched));
        let row = job.run_config_for(1.0).unwrap();
        assert_eq!(row.params.beta2, 1.0);
        assert_eq!(row.master_seed, 3);

        let cfg =
            parse_config_str(&format!("{base}[sweep]\nbeta2_grid = []\n")).unwrap();
        let err = cfg.sweep_job(None).unwrap_err();
        assert!(err.to_string().contains("beta2_grid"), "{err}");

        let cfg = parse_config_str(&format!(
            "{base}[sweep]\nbeta2_grid = [0.4, -1.0]\n"
        ))
        .unwrap();
        let err = cfg.sweep_job(None).unwrap_err();
        assert!(err.to_string().contains("beta2_grid[1]"), "{err}");

        // Theory-only: replicas = 0, no estimator needed.
        let cfg = parse_config_str(
            "[model]\nq = 2.0\nd = 1\n[run]\nreplicas = 0\n[sweep]\nbeta2_grid = [0.0, 2.5]\n",
        )
        .unwrap();
        let job = cfg.sweep_job(None).unwrap();
        assert!(job.theory_only);
        assert!(job.method.is_none());
        assert!(job.run_config_for(0.4).is_err());
    }

    #[test]
    fn probe_jobs_pick_their_keys() {
        let base = "[model]\nbeta2 = 0.5\nq = 2.0\nd = 1\n[run]\nreplicas = 200\n";
        let cfg = parse_config_str(base).unwrap();
        match cfg.probe_job(ProbeKind::Negm, None).unwrap() {
            ProbeJob::Negm { q_neg, .. } => assert_eq!(q_neg, 2.0),
            other => panic!("wrong job {other:?}"),
        }
        let err = cfg.probe_job(ProbeKind::Lemma1, None).unwrap_err();
        assert!(err.to_string().contains("probe.s"), "{err}");
        let err = cfg.probe_job(ProbeKind::Prefreeze, None).unwrap_err();
        assert!(err.to_string().contains("probe.q_list"), "{err}");

        let cfg = parse_config_str(&format!(
            "{base}[probe]\ns = 1.5\nq_neg = 0.5\nc_exp = 1.0\nq_list = [3.0, 4.0]\n"
        ))
        .unwrap();
        match cfg.probe_job(ProbeKind::Lemma1, None).unwrap() {
            ProbeJob::Lemma1 { s, t, .. } => {
                assert_eq!(s, 1.5);
                assert_eq!(t, 1.0);
            }
            other => panic!("wrong job {other:?}"),
        }
        match cfg.probe_job(ProbeKind::Lemma2, None).unwrap() {
            ProbeJob::Lemma2 { c_exp, .. } => assert_eq!(c_exp, 1.0),
            other => panic!("wrong job {other:?}"),
        }
        match cfg.probe_job(ProbeKind::Negm, None).unwrap() {
            ProbeJob::Negm { q_neg, .. } => assert_eq!(q_neg, 0.5),
            other => panic!("wrong job {other:?}"),
        }
        match cfg.probe_job(ProbeKind::Prefreeze, None).unwrap() {
            ProbeJob::Prefreeze { q_list, .. } => assert_eq!(q_list, vec![3.0, 4.0]),
            other => panic!("wrong job {other:?}"),
        }
    }

    #[test]
    fn toolbox_defaults_and_overrides() {
        let cfg = parse_config_str("").unwrap();
        let job = cfg.toolbox_job(None).unwrap();
        assert_eq!(job.instances, DEFAULT_TOOLBOX_INSTANCES);
        assert_eq!(job.n_samples, DEFAULT_TOOLBOX_SAMPLES);
        assert_eq!(job.seed, 0);

        let cfg = parse_config_str(
            "[run]\nseed = 5\n[toolbox]\ninstances = 10\nn_samples = 1000\n",
        )
        .unwrap();
        let job = cfg.toolbox_job(None).unwrap();
        assert_eq!((job.instances, job.n_samples, job.seed), (10, 1000, 5));
        assert_eq!(cfg.toolbox_job(Some(9)).unwrap().seed, 9);

        let cfg = parse_config_str("[toolbox]\ninstances = 0\n").unwrap();
        assert!(cfg.toolbox_job(None).is_err());
    }

    #[test]
    fn duplicate_eps_ladder_names_the_rung() {
        let cfg = parse_config_str(
            "[model]\nbeta2 = 0.4\nq = 2.0\nd = 1\n[ladder]\neps = [0.25, 0.25]\n\
             [run]\nestimator = \"quenched\"\nreplicas = 200\n",
        )
        .unwrap();
        let err = cfg.estimate_job(None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("rung"), "{err}");
    }

    #[test]
    fn beta2_grid_helper() {
        let g = beta2_range_grid(1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(beta2_range_grid(0.0, 0.1).is_err());
        assert!(beta2_range_grid(1.0, 0.0).is_err());
        assert!(beta2_range_grid(1e9, 1e-3).is_err());
    }

    #[test]
    fn non_utf8_config_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, [0xffu8, 0xfe, 0x00]).unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains("UTF-8"), "{err}");
        assert!(load_config(&dir.path().join("missing.toml")).is_err());
    }
}
