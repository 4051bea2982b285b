//! Command-line driver: theory tables, ladder estimates, beta^2 sweeps,
//! lemma probes, and the comparison-inequality suites.
//!
//! Every invocation writes its outputs into one run directory (`--out`)
//! together with a JSON manifest sufficient to reproduce the run
//! bit-exactly. Exit codes: 0 success, 2 validation error, 3 resource
//! limit, 4 numerical failure.

use clap::{Args, Parser, Subcommand};
use logchaos::config::{
    beta2_range_grid, load_config, ConfigFile, EstimateJob, ProbeJob, ProbeKind, SweepJob,
};
use logchaos::error::{Error, Result};
use logchaos::estimators::{
    estimate_annealed_naive, estimate_annealed_tilted, estimate_participation,
    estimate_quenched, fit_exponent, EpsLadder, EstimateSeries, MethodTag, RunConfig,
};
use logchaos::fit::LineFit;
use logchaos::probes::{
    lemma1_drift, lemma1_probe, lemma2_ladder, lemma2_probe, negative_moment_probe,
    prefreezing_probe,
};
use logchaos::report::{
    fit_to_csv, fmt_float, jitter_records, manifest_to_json, series_to_csv, sweep_to_csv,
    theory_table_csv, JitterRecord, RunManifest, SweepRow, SEED_SCHEME,
};
use logchaos::theory::{
    annealed_exponent, classify_regime, participation_exponent, quenched_exponent, ModelParams,
};
use logchaos::toolbox::{run_kahane_suite, run_slepian_suite};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "logchaos",
    version,
    about = "Log-correlated Gaussian fields: multifractal exponent estimation and phase-diagram tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the sampling subcommands.
#[derive(Args, Clone)]
struct Common {
    /// TOML config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed from the config).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Zero wall-clock fields in the manifest so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent formulas for fixed (q, d) over a beta^2 grid.
    Theory {
        /// Moment order (> 1).
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Dimension (1 or 2).
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Upper end of the beta^2 grid.
        #[arg(long, default_value_t = 3.0)]
        beta2_max: f64,
        /// Grid step.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Output directory (created if missing).
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// Zero wall-clock fields in the manifest.
        #[arg(long)]
        deterministic: bool,
    },
    /// One estimator over the cutoff ladder, from a config file.
    Estimate {
        #[command(flatten)]
        common: Common,
    },
    /// One row per beta^2 grid point (phase-diagram table).
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Lemma-level diagnostic probes.
    Probe {
        #[command(subcommand)]
        which: ProbeCommand,
    },
    /// Comparison-inequality suites (Kahane / Slepian).
    Toolbox {
        #[command(subcommand)]
        which: ToolboxCommand,
    },
}

#[derive(Subcommand)]
enum ProbeCommand {
    /// Negative moments of the normalized mass stay bounded.
    Negm {
        #[command(flatten)]
        common: Common,
    },
    /// Singular-integral moment growth against its drift bound.
    Lemma1 {
        #[command(flatten)]
        common: Common,
    },
    /// Box sup-increment exponential moments stay sub-polynomial.
    Lemma2 {
        #[command(flatten)]
        common: Common,
    },
    /// Participation-exponent q-independence in the intermediate window.
    Prefreeze {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ToolboxCommand {
    /// Randomized Kahane convexity-inequality suite.
    Kahane {
        #[command(flatten)]
        common: Common,
    },
    /// Randomized Slepian-inequality suite.
    Slepian {
        #[command(flatten)]
        common: Common,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

/// Reads and validates `LOGCHAOS_THREADS` (the only environment variable
/// consulted). The deterministic kernel currently always runs one worker;
/// larger values are accepted and recorded.
fn thread_count() -> Result<usize> {
    match std::env::var("LOGCHAOS_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::Config(
            "LOGCHAOS_THREADS is not valid UTF-8".into(),
        )),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                Error::Config(format!(
                    "LOGCHAOS_THREADS must be a positive integer, got '{s}'"
                ))
            }),
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = thread_count()?;
    match cli.command {
        Command::Theory {
            q,
            d,
            beta2_max,
            step,
            out,
            deterministic,
        } => cmd_theory(q, d, beta2_max, step, &out, deterministic, threads),
        Command::Estimate { common } => cmd_estimate(&common, threads),
        Command::Sweep { common } => cmd_sweep(&common, threads),
        Command::Probe { which } => match which {
            ProbeCommand::Negm { common } => cmd_probe(&common, ProbeKind::Negm, threads),
            ProbeCommand::Lemma1 { common } => cmd_probe(&common, ProbeKind::Lemma1, threads),
            ProbeCommand::Lemma2 { common } => cmd_probe(&common, ProbeKind::Lemma2, threads),
            ProbeCommand::Prefreeze { common } => {
                cmd_probe(&common, ProbeKind::Prefreeze, threads)
            }
        },
        Command::Toolbox { which } => match which {
            ToolboxCommand::Kahane { common } => cmd_toolbox(&common, "kahane", threads),
            ToolboxCommand::Slepian { common } => cmd_toolbox(&common, "slepian", threads),
        },
    }
}

/// Loads the config named by `--config`, requiring it for commands that
/// cannot run without one.
fn load_required_config(common: &Common, command: &str) -> Result<(ConfigFile, String)> {
    let path = common.config.as_ref().ok_or_else(|| {
        Error::Config(format!("--config PATH is required for {command}"))
    })?;
    load_config(path)
}

struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(
        mut self,
        command: String,
        config_text: String,
        seed: u64,
        deterministic: bool,
        threads: usize,
        per_rung_jitter: Vec<JitterRecord>,
        warnings: Vec<String>,
        started: Instant,
    ) -> Result<()> {
        let wall = if deterministic {
            0.0
        } else {
            started.elapsed().as_secs_f64()
        };
        let mut outputs = self.written.clone();
        outputs.push("manifest.json".to_string());
        let manifest = RunManifest {
            library_version: logchaos::VERSION.to_string(),
            command,
            config_text,
            seed,
            seed_scheme: SEED_SCHEME.to_string(),
            deterministic,
            threads,
            outputs,
            per_rung_jitter,
            warnings,
            wall_clock_seconds: wall,
        };
        let json = manifest_to_json(&manifest)?;
        self.write("manifest.json", &json)?;
        let listed: Vec<String> = self
            .written
            .iter()
            .map(|n| self.dir.join(n).display().to_string())
            .collect();
        println!("wrote: {}", listed.join(", "));
        Ok(())
    }
}

/// Theory target for a fitted slope, per estimator.
fn theory_for(method: MethodTag, params: &ModelParams) -> f64 {
    match method {
        MethodTag::AnnealedNaive | MethodTag::AnnealedTilted => annealed_exponent(params),
        MethodTag::Quenched => quenched_exponent(params),
        MethodTag::Participation => participation_exponent(params),
        MethodTag::NegativeMoment | MethodTag::Lemma2 => 0.0,
        MethodTag::Lemma1 => 0.0,
    }
}

fn run_estimator(
    method: MethodTag,
    cfg: &RunConfig,
    ladder: &EpsLadder,
) -> Result<EstimateSeries> {
    match method {
        MethodTag::Quenched => estimate_quenched(cfg, ladder),
        MethodTag::AnnealedNaive => estimate_annealed_naive(cfg, ladder),
        MethodTag::AnnealedTilted => estimate_annealed_tilted(cfg, ladder),
        MethodTag::Participation => estimate_participation(cfg, ladder),
        other => Err(Error::InvalidParameter(format!(
            "'{}' is a probe method, not an estimator",
            other.as_str()
        ))),
    }
}

fn print_fit(label: &str, fit: &LineFit, theory: f64) {
    println!(
        "{label}: slope={} stderr={} r2={} theory={} abs_error={}",
        fmt_float(fit.slope),
        fmt_float(fit.slope_stderr),
        fmt_float(fit.r_squared),
        fmt_float(theory),
        fmt_float((fit.slope - theory).abs()),
    );
}

fn cmd_theory(
    q: f64,
    d: u32,
    beta2_max: f64,
    step: f64,
    out: &Path,
    deterministic: bool,
    threads: usize,
) -> Result<()> {
    let started = Instant::now();
    let grid = beta2_range_grid(beta2_max, step)?;
    let csv = theory_table_csv(q, d, &grid)?;
    let mut dir = OutDir::create(out)?;
    dir.write("theory.csv", &csv)?;
    println!("theory table: q={q} d={d} rows={}", grid.len());
    dir.finish(
        format!("theory --q {q} --d {d} --beta2-max {beta2_max} --step {step}"),
        String::new(),
        0,
        deterministic,
        threads,
        Vec::new(),
        Vec::new(),
        started,
    )
}

fn cmd_estimate(common: &Common, threads: usize) -> Result<()> {
    let started = Instant::now();
    let (config, config_text) = load_required_config(common, "estimate")?;
    let EstimateJob { cfg, method } = config.estimate_job(common.seed)?;
    let ladder = EpsLadder::from_config(&cfg)?;
    let series = run_estimator(method, &cfg, &ladder)?;
    let fit = fit_exponent(&series)?;
    let theory = theory_for(method, &cfg.params);

    let mut dir = OutDir::create(&common.out)?;
    dir.write("series.csv", &series_to_csv(&series)?)?;
    dir.write("fit.csv", &fit_to_csv(&fit, theory)?)?;
    println!(
        "estimate: method={} beta2={} q={} d={}",
        method.as_str(),
        fmt_float(cfg.params.beta2),
        fmt_float(cfg.params.q),
        cfg.params.d
    );
    print_fit("fit", &fit, theory);
    for w in &series.warnings {
        println!("warning: {w}");
    }
    dir.finish(
        "estimate".into(),
        config_text,
        cfg.master_seed,
        common.deterministic,
        threads,
        jitter_records(&series),
        series.warnings.clone(),
        started,
    )
}

fn cmd_sweep(common: &Common, threads: usize) -> Result<()> {
    let started = Instant::now();
    let (config, config_text) = load_required_config(common, "sweep")?;
    let job: SweepJob = config.sweep_job(common.seed)?;
    let mut dir = OutDir::create(&common.out)?;

    if job.theory_only {
        let csv = theory_table_csv(job.q, job.d, &job.beta2_grid)?;
        dir.write("theory.csv", &csv)?;
        println!(
            "sweep (theory-only): q={} d={} rows={}",
            fmt_float(job.q),
            job.d,
            job.beta2_grid.len()
        );
        return dir.finish(
            "sweep".into(),
            config_text,
            0,
            common.deterministic,
            threads,
            Vec::new(),
            Vec::new(),
            started,
        );
    }

    let method = job.method.expect("sampling sweep always has a method");
    // The ladder depends only on (d, eps, g), not on beta2: build it once
    // from the first grid point and share it across rows.
    let first_cfg = job.run_config_for(job.beta2_grid[0])?;
    let ladder = EpsLadder::from_config(&first_cfg)?;

    let mut rows = Vec::with_capacity(job.beta2_grid.len());
    let mut warnings = Vec::new();
    let mut jitters = Vec::new();
    for (i, &beta2) in job.beta2_grid.iter().enumerate() {
        let cfg = job.run_config_for(beta2)?;
        let series = run_estimator(method, &cfg, &ladder)?;
        let fit = fit_exponent(&series)?;
        let theory = theory_for(method, &cfg.params);
        dir.write(&format!("series_{i:02}.csv"), &series_to_csv(&series)?)?;
        if i == 0 {
            jitters = jitter_records(&series);
        }
        for w in &series.warnings {
            warnings.push(format!("beta2={}: {w}", fmt_float(beta2)));
        }
        rows.push(SweepRow {
            beta2,
            q: cfg.params.q,
            d: cfg.params.d,
            method,
            regime: classify_regime(&cfg.params).label,
            fit,
            theory_value: theory,
        });
    }
    dir.write("sweep.csv", &sweep_to_csv(&rows)?)?;
    println!(
        "sweep: method={} q={} d={} rows={}",
        method.as_str(),
        fmt_float(job.q),
        job.d,
        rows.len()
    );
    for row in &rows {
        print_fit(
            &format!("beta2={}", fmt_float(row.beta2)),
            &row.fit,
            row.theory_value,
        );
    }
    for w in &warnings {
        println!("warning: {w}");
    }
    dir.finish(
        "sweep".into(),
        config_text,
        first_cfg.master_seed,
        common.deterministic,
        threads,
        jitters,
        warnings,
        started,
    )
}

fn cmd_probe(common: &Common, kind: ProbeKind, threads: usize) -> Result<()> {
    let started = Instant::now();
    let command = format!("probe {}", kind.as_str());
    let (config, config_text) = load_required_config(common, &command)?;
    let job = config.probe_job(kind, common.seed)?;
    let seed = job.cfg().master_seed;
    let mut dir = OutDir::create(&common.out)?;

    match job {
        ProbeJob::Negm { cfg, q_neg } => {
            let ladder = EpsLadder::from_config(&cfg)?;
            let series = negative_moment_probe(&cfg, &ladder, q_neg)?;
            let fit = fit_exponent(&series)?;
            dir.write("series.csv", &series_to_csv(&series)?)?;
            dir.write("fit.csv", &fit_to_csv(&fit, 0.0)?)?;
            println!(
                "probe negm: beta2={} q_neg={}",
                fmt_float(cfg.params.beta2),
                fmt_float(q_neg)
            );
            print_fit("fit", &fit, 0.0);
            dir.finish(
                command,
                config_text,
                seed,
                common.deterministic,
                threads,
                jitter_records(&series),
                series.warnings.clone(),
                started,
            )
        }
        ProbeJob::Lemma1 { cfg, s, t } => {
            let ladder = EpsLadder::from_config(&cfg)?;
            let (series, l) = lemma1_probe(&cfg, &ladder, s, t)?;
            debug_assert_eq!(l, lemma1_drift(&cfg.params, s, t));
            let fit = fit_exponent(&series)?;
            // Bounded when the drift is negative; otherwise the one-sided
            // growth bound -l*t is the reference value.
            let theory = if l > 0.0 { -l * t } else { 0.0 };
            dir.write("series.csv", &series_to_csv(&series)?)?;
            dir.write("fit.csv", &fit_to_csv(&fit, theory)?)?;
            println!(
                "probe lemma1: s={} t={} drift={}",
                fmt_float(s),
                fmt_float(t),
                fmt_float(l)
            );
            print_fit("fit", &fit, theory);
            dir.finish(
                command,
                config_text,
                seed,
                common.deterministic,
                threads,
                jitter_records(&series),
                series.warnings.clone(),
                started,
            )
        }
        ProbeJob::Lemma2 { cfg, c_exp } => {
            let ladder = lemma2_ladder(&cfg)?;
            let series = lemma2_probe(&cfg, &ladder, c_exp)?;
            let fit = fit_exponent(&series)?;
            dir.write("series.csv", &series_to_csv(&series)?)?;
            dir.write("fit.csv", &fit_to_csv(&fit, 0.0)?)?;
            println!("probe lemma2: c_exp={}", fmt_float(c_exp));
            print_fit("fit", &fit, 0.0);
            dir.finish(
                command,
                config_text,
                seed,
                common.deterministic,
                threads,
                jitter_records(&series),
                series.warnings.clone(),
                started,
            )
        }
        ProbeJob::Prefreeze { cfg, q_list } => {
            let ladder = EpsLadder::from_config(&cfg)?;
            let results = prefreezing_probe(&cfg, &ladder, &q_list)?;
            let mut rows = Vec::with_capacity(results.len());
            let mut warnings = Vec::new();
            let mut jitters = Vec::new();
            println!(
                "probe prefreeze: beta2={} q_list={:?}",
                fmt_float(cfg.params.beta2),
                q_list
            );
            for (i, (q, series, fit)) in results.iter().enumerate() {
                dir.write(&format!("series_{i:02}.csv"), &series_to_csv(series)?)?;
                if i == 0 {
                    jitters = jitter_records(series);
                }
                for w in &series.warnings {
                    warnings.push(format!("q={}: {w}", fmt_float(*q)));
                }
                let theory = participation_exponent(&series.params);
                rows.push(SweepRow {
                    beta2: cfg.params.beta2,
                    q: *q,
                    d: cfg.params.d,
                    method: MethodTag::Participation,
                    regime: classify_regime(&series.params).label,
                    fit: fit.clone(),
                    theory_value: theory,
                });
                print_fit(&format!("q={}", fmt_float(*q)), fit, theory);
            }
            dir.write("prefreeze.csv", &sweep_to_csv(&rows)?)?;
            dir.finish(
                command,
                config_text,
                seed,
                common.deterministic,
                threads,
                jitters,
                warnings,
                started,
            )
        }
    }
}

fn cmd_toolbox(common: &Common, which: &str, threads: usize) -> Result<()> {
    let started = Instant::now();
    let (config, config_text) = match &common.config {
        Some(path) => load_config(path)?,
        None => (ConfigFile::default(), String::new()),
    };
    let job = config.toolbox_job(common.seed)?;
    let report = match which {
        "kahane" => run_kahane_suite(job.instances, job.n_samples, job.seed)?,
        _ => run_slepian_suite(job.instances, job.n_samples, job.seed)?,
    };
    let mut dir = OutDir::create(&common.out)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("suite serialization failed: {e}")))?;
    dir.write(&format!("{which}.json"), &format!("{json}\n"))?;
    println!(
        "toolbox {which}: instances={} n_samples={} violations={} worst_margin_sigmas={} \
         oracle_checked={} max_oracle_sigmas={}",
        report.instances,
        report.n_samples,
        report.violations,
        fmt_float(report.worst_margin_sigmas),
        report.oracle_checked,
        fmt_float(report.max_oracle_sigmas)
    );
    let result = if report.violations == 0 { Ok(()) } else {
        Err(Error::Numerical(format!(
            "{} comparison-inequality violations beyond 3 sigma (see {which}.json)",
            report.violations
        )))
    };
    dir.finish(
        format!("toolbox {which}"),
        config_text,
        job.seed,
        common.deterministic,
        threads,
        Vec::new(),
        Vec::new(),
        started,
    )?;
    result
}
