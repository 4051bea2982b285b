//! Monte Carlo drivers over eps ladders: naive and tilted annealed
//! estimators, the quenched estimator, the participation estimator, and the
//! slope extraction that turns a ladder series into an exponent.
//!
//! All drivers share one sampling engine: standard normals are generated
//! per replica from its own counter-derived ChaCha8 stream, packed into
//! fixed-width column blocks, and pushed through the Cholesky factor with
//! one matrix-matrix product per block. The block width is a constant, so a
//! given `RunConfig` always produces the same floating-point operations in
//! the same order — series are bit-reproducible. Reductions run in replica
//! order for the same reason.
//!
//! The tilted estimator applies the exact discrete Cameron-Martin identity:
//! replica `j` draws a tilt location `u_j` (from a dedicated RNG stream so
//! the field stream is untouched), shifts the field by `lambda K[., u_j]`,
//! and weights the functional by `exp(-lambda X'(u_j) + lambda^2
//! K[u_j,u_j]/2)`. With `c = 0` the shift and the weight vanish identically
//! and the tilted driver is bit-identical to the naive one.

use crate::error::{Error, Result};
use crate::field::{build_covariance, CovarianceSpec, GridSpec, SamplerState, DEFAULT_MAX_POINTS};
use crate::fit::{log_corrected_fit, weighted_line_fit, CorrectedFit, LineFit};
use crate::measure;
use crate::seeds::{replica_rng, subtask_seed};
use crate::stats;
use crate::theory::{classify_regime, tilt_parameter, ModelParams, RegimeLabel};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Fixed sampling block width (columns per matrix-matrix product). A
/// constant so that identical configurations execute identical
/// floating-point programs regardless of replica count.
pub const SAMPLE_CHUNK: usize = 128;

/// Minimum replicas per rung for any reported standard error.
pub const MIN_REPLICAS: usize = 100;

/// Heavy-tail warning threshold on the excess kurtosis of the summands.
pub const KURTOSIS_WARN_THRESHOLD: f64 = 100.0;

/// Low-ESS warning threshold as a fraction of the replica count.
pub const ESS_WARN_FRACTION: f64 = 0.01;

/// How the tilt strength is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TiltPolicy {
    /// No tilting (naive / quenched estimators).
    None,
    /// Fixed tilt fraction `c` in `[0, 1]`.
    Fixed(f64),
    /// `c = c0(beta^2, q, d)` from the theory module.
    Auto,
}

/// How the tilt location `u` is chosen per replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UPolicy {
    /// Uniform over grid points (matches the integral over locations).
    UniformGrid,
    /// Always the grid point nearest the origin.
    FixedCenter,
}

/// Which estimator produced a series (also the CSV `method` tag).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodTag {
    AnnealedNaive,
    AnnealedTilted,
    Quenched,
    Participation,
    NegativeMoment,
    Lemma1,
    Lemma2,
}

impl MethodTag {
    /// Stable string used in CSV output and config files.
    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::AnnealedNaive => "annealed_naive",
            MethodTag::AnnealedTilted => "annealed_tilted",
            MethodTag::Quenched => "quenched",
            MethodTag::Participation => "participation",
            MethodTag::NegativeMoment => "negative_moment",
            MethodTag::Lemma1 => "lemma1",
            MethodTag::Lemma2 => "lemma2",
        }
    }

    /// Parse the stable string form.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "annealed_naive" => MethodTag::AnnealedNaive,
            "annealed_tilted" => MethodTag::AnnealedTilted,
            "quenched" => MethodTag::Quenched,
            "participation" => MethodTag::Participation,
            "negative_moment" => MethodTag::NegativeMoment,
            "lemma1" => MethodTag::Lemma1,
            "lemma2" => MethodTag::Lemma2,
            other => {
                return Err(Error::Config(format!("unknown estimator method '{other}'")));
            }
        })
    }
}

/// Full description of one ladder run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// Model parameters `(beta^2, q, d)`.
    pub params: ModelParams,
    /// Ladder cutoffs, strictly decreasing in `(0, 1]`.
    pub eps_values: Vec<f64>,
    /// Replicas per rung (>= 100 for any reported stderr).
    pub replicas: usize,
    /// Master seed; everything else derives from it deterministically.
    pub master_seed: u64,
    /// Tilt strength policy.
    pub tilt: TiltPolicy,
    /// Tilt location policy.
    pub u_policy: UPolicy,
    /// Kernel constant; `None` picks the per-dimension default
    /// (0 in d=1, `ln 4` in d=2, where the bare kernel is indefinite).
    pub g_const: Option<f64>,
    /// Hard cap on grid points per rung (memory guard).
    pub max_points: usize,
}

impl RunConfig {
    /// A config with library defaults for everything but the parameters.
    pub fn new(params: ModelParams) -> Self {
        let eps_values = default_ladder(params.d);
        RunConfig {
            params,
            eps_values,
            replicas: 20_000,
            master_seed: 0,
            tilt: TiltPolicy::None,
            u_policy: UPolicy::UniformGrid,
            g_const: None,
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    /// The kernel constant actually used (resolving the per-`d` default).
    pub fn resolved_g_const(&self) -> f64 {
        self.g_const
            .unwrap_or(if self.params.d == 2 { 4.0f64.ln() } else { 0.0 })
    }

    /// Validate everything that does not require building grids.
    pub fn validate(&self) -> Result<()> {
        validate_ladder_eps(&self.eps_values)?;
        if self.replicas < MIN_REPLICAS {
            return Err(Error::InvalidParameter(format!(
                "replicas per rung must be >= {MIN_REPLICAS} for a meaningful stderr, got {}",
                self.replicas
            )));
        }
        if let TiltPolicy::Fixed(c) = self.tilt {
            if !(c.is_finite() && (0.0..=1.0).contains(&c)) {
                return Err(Error::InvalidParameter(format!(
                    "tilt fraction c must lie in [0, 1], got {c}"
                )));
            }
        }
        if let Some(g) = self.g_const {
            if !g.is_finite() {
                return Err(Error::InvalidParameter("g_const must be finite".into()));
            }
        }
        Ok(())
    }

    /// Resolve the tilt fraction `c`, or error when the policy is `None`.
    pub fn resolved_tilt_c(&self) -> Result<f64> {
        match self.tilt {
            TiltPolicy::None => Err(Error::InvalidParameter(
                "this estimator requires a tilt policy (fixed c or auto)".into(),
            )),
            TiltPolicy::Fixed(c) => Ok(c),
            TiltPolicy::Auto => tilt_parameter(&self.params),
        }
    }
}

/// Default ladder: `eps = 2^-4 .. 2^-9` in d=1; capped at `2^-5` in d=2
/// (the dense factorization there is `(4/eps)^2` points per rung).
pub fn default_ladder(d: u32) -> Vec<f64> {
    let kmax = if d == 2 { 5 } else { 9 };
    (4..=kmax).map(|k| 2f64.powi(-k)).collect()
}

/// Validate a ladder eps list: non-empty, in `(0, 1]`, strictly decreasing.
pub fn validate_ladder_eps(eps_values: &[f64]) -> Result<()> {
    if eps_values.is_empty() {
        return Err(Error::InvalidParameter("ladder has no rungs".into()));
    }
    for (k, &e) in eps_values.iter().enumerate() {
        if !(e.is_finite() && e > 0.0 && e <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ladder rung {k} has eps = {e}, outside (0, 1]"
            )));
        }
        if k > 0 && eps_values[k - 1] <= e {
            return Err(Error::InvalidParameter(format!(
                "ladder eps values must be strictly decreasing: rung {k} (eps = {e}) \
                 is not below rung {} (eps = {})",
                k - 1,
                eps_values[k - 1]
            )));
        }
    }
    Ok(())
}

/// Grid side length for cutoff `eps`: the smallest `n` with `2/n <= eps/2`.
pub fn n_per_side_for(eps: f64) -> usize {
    (4.0 / eps).ceil() as usize
}

/// A built ladder: one immutable sampler state per rung.
#[derive(Debug)]
pub struct EpsLadder {
    states: Vec<SamplerState>,
}

impl EpsLadder {
    /// Build every rung from a config (validates first). This is the
    /// expensive step — `O(n^3)` dense factorization per rung — so callers
    /// build once and share across estimators.
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.resolved_g_const();
        let mut states = Vec::with_capacity(cfg.eps_values.len());
        for (k, &eps) in cfg.eps_values.iter().enumerate() {
            let n = n_per_side_for(eps);
            let grid = GridSpec::build_capped(cfg.params.d, n, cfg.max_points).map_err(|e| {
                Error::ResourceLimit(format!("ladder rung {k} (eps = {eps}): {e}"))
            })?;
            let spec = CovarianceSpec::new(eps)?.with_g_const(g);
            states.push(build_covariance(grid, &spec)?);
        }
        Ok(EpsLadder { states })
    }

    /// Wrap pre-built states (diagnostic grids, e.g. relaxed spacing).
    /// States must be ordered by strictly decreasing eps.
    pub fn from_states(states: Vec<SamplerState>) -> Result<Self> {
        let eps: Vec<f64> = states.iter().map(|s| s.eps()).collect();
        validate_ladder_eps(&eps)?;
        Ok(EpsLadder { states })
    }

    /// Rung states, largest eps first.
    pub fn states(&self) -> &[SamplerState] {
        &self.states
    }

    /// The eps value of each rung.
    pub fn eps_values(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.eps()).collect()
    }

    fn check_matches(&self, cfg: &RunConfig) -> Result<()> {
        let eps = self.eps_values();
        if eps.len() != cfg.eps_values.len()
            || eps
                .iter()
                .zip(&cfg.eps_values)
                .any(|(a, b)| (a - b).abs() > 1e-15 * b)
        {
            return Err(Error::InvalidParameter(
                "ladder does not match the config's eps values".into(),
            ));
        }
        Ok(())
    }
}

/// One rung of an estimate series.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RungEstimate {
    /// Cutoff eps of this rung.
    pub eps: f64,
    /// The rung estimate in log scale (see the method for what it is).
    pub log_estimate: f64,
    /// Standard error of `log_estimate`.
    pub stderr: f64,
    /// Replicas used.
    pub n_replicas: usize,
    /// Effective sample size `(sum w)^2 / sum w^2` of the positive summands
    /// (for mean-of-logs estimators this equals `n_replicas`).
    pub ess: f64,
    /// Excess kurtosis of the summands (heavy-tail diagnostic).
    pub excess_kurtosis: f64,
    /// Kurtosis above [`KURTOSIS_WARN_THRESHOLD`].
    pub heavy_tail_warning: bool,
    /// ESS below [`ESS_WARN_FRACTION`] of the replicas.
    pub low_ess_warning: bool,
    /// Median of the per-replica log functionals (quenched diagnostic).
    pub median_log: Option<f64>,
    /// Diagonal jitter used by this rung's factorization.
    pub jitter: f64,
}

/// A full ladder series from one estimator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateSeries {
    /// Which estimator produced it.
    pub method: MethodTag,
    /// Model parameters of the run.
    pub params: ModelParams,
    /// Per-rung estimates, largest eps first.
    pub rungs: Vec<RungEstimate>,
    /// Human-readable warnings (heavy tails, ESS collapse).
    pub warnings: Vec<String>,
}

impl EstimateSeries {
    /// `log eps` per rung (the fit abscissa).
    pub fn log_eps(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.eps.ln()).collect()
    }
}

/// Weighted least-squares slope of `log_estimate` against `log eps`:
/// the exponent estimate for this series. Needs >= 3 rungs.
pub fn fit_exponent(series: &EstimateSeries) -> Result<LineFit> {
    let x = series.log_eps();
    let y: Vec<f64> = series.rungs.iter().map(|r| r.log_estimate).collect();
    let sigma: Vec<f64> = series.rungs.iter().map(|r| r.stderr).collect();
    weighted_line_fit(&x, &y, &sigma).map_err(|e| match e {
        Error::InvalidParameter(msg) if msg.contains("share x") => {
            Error::InvalidParameter(format!("degenerate eps ladder: {msg}"))
        }
        other => other,
    })
}

/// Like [`fit_exponent`] but with one multiplicative `log(1/eps)` correction
/// term (see [`crate::fit::log_corrected_fit`]). Desk-scale ladders stop far
/// from the `eps -> 0` limit and the theory's bounds carry explicit log
/// factors, so the pure-power slope sits systematically shallow of the
/// asymptotic exponent; the corrected slope removes the leading transient.
/// The validation suite gates slope criteria on this fit and records the
/// pure-power slope next to it.
pub fn fit_exponent_corrected(series: &EstimateSeries) -> Result<CorrectedFit> {
    let x = series.log_eps();
    let y: Vec<f64> = series.rungs.iter().map(|r| r.log_estimate).collect();
    let sigma: Vec<f64> = series.rungs.iter().map(|r| r.stderr).collect();
    log_corrected_fit(&x, &y, &sigma)
}

/// Internal: run the sampling engine on one rung and hand each replica's
/// field values (post mean shift, if any) plus the replica's tilt root to
/// `f`; returns per-replica exponents `t_j = f(X_j, u_j) + log_weight_j` in
/// replica order.
///
/// `tilt_c = None` runs the plain engine and passes `None` as the root.
/// `Some(c)` draws `u` per replica from a dedicated RNG stream, shifts by
/// `lambda K[., u]` with `lambda = beta q c`, adds the exact Cameron-Martin
/// log weight, and passes `Some(u)` so root-decomposed functionals can
/// evaluate at the tilt location.
pub(crate) fn rung_exponents<F>(
    state: &SamplerState,
    rung: usize,
    cfg: &RunConfig,
    tilt_c: Option<f64>,
    mut f: F,
) -> Vec<f64>
where
    F: FnMut(&[f64], Option<usize>) -> f64,
{
    let n = state.n_points();
    let replicas = cfg.replicas;
    let lambda = tilt_c.map(|c| cfg.params.beta() * cfg.params.q * c);
    // Locations come from their own seed domain so that the field stream
    // (and hence the c = 0 estimate) is identical with and without tilting.
    let u_master = subtask_seed(cfg.master_seed, 0xF1E1D);

    let mut z = DMatrix::<f64>::zeros(n, SAMPLE_CHUNK);
    let mut x = DMatrix::<f64>::zeros(n, SAMPLE_CHUNK);
    let mut us: Vec<usize> = Vec::with_capacity(SAMPLE_CHUNK);
    let mut out = Vec::with_capacity(replicas);

    let mut start = 0usize;
    while start < replicas {
        let width = SAMPLE_CHUNK.min(replicas - start);
        us.clear();
        {
            let zs = z.as_mut_slice();
            for c in 0..width {
                let r = (start + c) as u64;
                if lambda.is_some() {
                    let u = match cfg.u_policy {
                        UPolicy::UniformGrid => {
                            replica_rng(u_master, rung, r).gen_range(0..n)
                        }
                        UPolicy::FixedCenter => state.grid().center_index(),
                    };
                    us.push(u);
                }
                let mut rng = replica_rng(cfg.master_seed, rung, r);
                for v in &mut zs[c * n..(c + 1) * n] {
                    *v = rng.sample(StandardNormal);
                }
            }
        }
        x.columns_mut(0, width)
            .gemm(1.0, state.factor(), &z.columns(0, width), 0.0);
        {
            let xs = x.as_mut_slice();
            for c in 0..width {
                let col = &mut xs[c * n..(c + 1) * n];
                let mut log_weight = 0.0;
                let mut root = None;
                if let Some(lam) = lambda {
                    let u = us[c];
                    for (i, v) in col.iter_mut().enumerate() {
                        *v += lam * state.cov(i, u);
                    }
                    log_weight = -lam * col[u] + 0.5 * lam * lam * state.cov(u, u);
                    root = Some(u);
                }
                out.push(f(col, root) + log_weight);
            }
        }
        start += width;
    }
    out
}

/// Reduce per-replica exponents as `log` of the sample mean of `exp`,
/// with the delta-method stderr and IS diagnostics.
pub(crate) fn reduce_log_mean(
    eps: f64,
    jitter: f64,
    exponents: &[f64],
    replicas: usize,
) -> RungEstimate {
    let s = stats::log_mean_summary(exponents);
    let heavy = s.excess_kurtosis > KURTOSIS_WARN_THRESHOLD;
    let low = s.ess < ESS_WARN_FRACTION * replicas as f64;
    RungEstimate {
        eps,
        log_estimate: s.log_mean,
        stderr: s.stderr_log,
        n_replicas: replicas,
        ess: s.ess,
        excess_kurtosis: s.excess_kurtosis,
        heavy_tail_warning: heavy,
        low_ess_warning: low,
        median_log: None,
        jitter,
    }
}

pub(crate) fn collect_warnings(method: MethodTag, rungs: &[RungEstimate]) -> Vec<String> {
    let mut w = Vec::new();
    for (k, r) in rungs.iter().enumerate() {
        if r.heavy_tail_warning {
            w.push(format!(
                "{}: rung {k} (eps = {:.6e}): summand excess kurtosis {:.1} exceeds {} — \
                 heavy-tailed, rare events dominate this mean",
                method.as_str(),
                r.eps,
                r.excess_kurtosis,
                KURTOSIS_WARN_THRESHOLD
            ));
        }
        if r.low_ess_warning {
            w.push(format!(
                "{}: rung {k} (eps = {:.6e}): effective sample size {:.1} below {}% of {} \
                 replicas — estimate untrustworthy",
                method.as_str(),
                r.eps,
                r.ess,
                100.0 * ESS_WARN_FRACTION,
                r.n_replicas
            ));
        }
    }
    w
}

/// Naive annealed estimator: per rung, `log` of the sample mean of
/// `exp(log_moment_ratio)`. Requires `tilt: None`.
///
/// Outside the high-temperature regime the series carries a rare-event
/// advisory (see [`rare_event_advisory`]) on top of the per-rung empirical
/// diagnostics.
pub fn estimate_annealed_naive(cfg: &RunConfig, ladder: &EpsLadder) -> Result<EstimateSeries> {
    cfg.validate()?;
    ladder.check_matches(cfg)?;
    if cfg.tilt != TiltPolicy::None {
        return Err(Error::InvalidParameter(
            "the naive annealed estimator requires tilt policy 'none'".into(),
        ));
    }
    let (beta, q) = (cfg.params.beta(), cfg.params.q);
    let mut rungs = Vec::with_capacity(ladder.states.len());
    for (k, state) in ladder.states.iter().enumerate() {
        let t = rung_exponents(state, k, cfg, None, |x, _| {
            measure::log_moment_ratio_values(x, state, beta, q)
        });
        rungs.push(reduce_log_mean(state.eps(), state.jitter(), &t, cfg.replicas));
    }
    let mut warnings = collect_warnings(MethodTag::AnnealedNaive, &rungs);
    warnings.extend(rare_event_advisory(&cfg.params, &rungs));
    Ok(EstimateSeries {
        method: MethodTag::AnnealedNaive,
        params: cfg.params,
        rungs,
        warnings,
    })
}

/// Regime-driven advisory for the naive annealed estimator. In the
/// Intermediate and Frozen regimes, `E[Z(q beta)/Z(beta)^q]` is dominated by
/// field configurations whose probability is polynomially small in `eps` —
/// plain Monte Carlo at practical replica counts essentially never draws
/// them. The failure is silent: because the dominating events are absent
/// from the sample, the summands that *were* drawn can look perfectly
/// healthy (moderate kurtosis, high ESS) while the mean is under-covered.
/// The thresholded empirical warnings cannot catch this by construction, so
/// the advisory is driven by the regime classification and applies at every
/// rung, the smallest included.
pub fn rare_event_advisory(params: &ModelParams, rungs: &[RungEstimate]) -> Option<String> {
    if params.beta2 == 0.0 {
        return None;
    }
    let regime = classify_regime(params);
    if regime.label == RegimeLabel::HighTemp {
        return None;
    }
    let smallest = rungs.last()?;
    Some(format!(
        "annealed_naive: (beta^2 = {}, q = {}, d = {}) lies in the {} regime: the target \
         expectation is dominated by rare events that {} plain-MC replicas do not reach, \
         so every rung down to eps = {:.6e} is untrustworthy even where its empirical \
         kurtosis/ESS look healthy; use the tilted estimator",
        params.beta2,
        params.q,
        params.d,
        regime.label.as_str(),
        smallest.n_replicas,
        smallest.eps
    ))
}

/// Tilted annealed estimator: per rung and replica, draw a root `u`, sample
/// the Cameron-Martin-shifted field, and average the root-decomposed
/// integrand `exp(log_rooted_moment_ratio + log_is_weight)`.
///
/// Writing `Z(q beta)` as a sum over cells and pairing the drawn root with
/// the tilt location makes the identity exact for the same grid-level
/// expectation the naive estimator targets, while the root factor
/// `e^{q beta X(u)}` cancels the bulk of the weight's `e^{-lambda X(u)}`:
/// the combined exponent fluctuates like `(1 - c) q beta X(u)`. Tilting the
/// *unrooted* ratio instead leaves the weight and the functional to
/// fluctuate independently whenever the field's peak is away from `u`,
/// which destroys the effective sample size precisely in the intermediate
/// regime the tilt is meant for.
///
/// At `c = 0` the shift and weight vanish and every root is exchangeable,
/// so the root average is available in closed form — it is the plain
/// moment ratio — and the estimator reduces to the naive one exactly.
/// Requires a tilt policy; at `beta^2 = 0` only a fixed `c` is accepted
/// (the strength `lambda = beta q c` vanishes and each rung is the
/// deterministic flat-measure value), since the auto policy's `c0` is
/// undefined there.
pub fn estimate_annealed_tilted(cfg: &RunConfig, ladder: &EpsLadder) -> Result<EstimateSeries> {
    cfg.validate()?;
    ladder.check_matches(cfg)?;
    if cfg.params.beta2 == 0.0 && cfg.tilt == TiltPolicy::Auto {
        return Err(Error::InvalidParameter(
            "auto tilt is undefined at beta^2 = 0 (nothing to tilt); use a fixed c".into(),
        ));
    }
    let c = cfg.resolved_tilt_c()?;
    let (beta, q) = (cfg.params.beta(), cfg.params.q);
    let mut rungs = Vec::with_capacity(ladder.states.len());
    for (k, state) in ladder.states.iter().enumerate() {
        let t = if c == 0.0 {
            // Rao-Blackwellized over the root (exact at lambda = 0).
            rung_exponents(state, k, cfg, Some(c), |x, _| {
                measure::log_moment_ratio_values(x, state, beta, q)
            })
        } else {
            rung_exponents(state, k, cfg, Some(c), |x, u| {
                let u = u.expect("tilted driver supplies a root");
                measure::log_rooted_moment_ratio_values(x, state, beta, q, u)
            })
        };
        rungs.push(reduce_log_mean(state.eps(), state.jitter(), &t, cfg.replicas));
    }
    let warnings = collect_warnings(MethodTag::AnnealedTilted, &rungs);
    Ok(EstimateSeries {
        method: MethodTag::AnnealedTilted,
        params: cfg.params,
        rungs,
        warnings,
    })
}

/// Quenched estimator: per rung, the sample mean of `log_moment_ratio`
/// (mean of logs), with the standard error of that mean and the sample
/// median stored as a robustness diagnostic. Requires `tilt: None`.
pub fn estimate_quenched(cfg: &RunConfig, ladder: &EpsLadder) -> Result<EstimateSeries> {
    cfg.validate()?;
    ladder.check_matches(cfg)?;
    if cfg.tilt != TiltPolicy::None {
        return Err(Error::InvalidParameter(
            "the quenched estimator requires tilt policy 'none'".into(),
        ));
    }
    let (beta, q) = (cfg.params.beta(), cfg.params.q);
    let mut rungs = Vec::with_capacity(ladder.states.len());
    for (k, state) in ladder.states.iter().enumerate() {
        let t = rung_exponents(state, k, cfg, None, |x, _| {
            measure::log_moment_ratio_values(x, state, beta, q)
        });
        let kurt = stats::excess_kurtosis(&t);
        rungs.push(RungEstimate {
            eps: state.eps(),
            log_estimate: stats::mean(&t),
            stderr: stats::stderr_of_mean(&t),
            n_replicas: cfg.replicas,
            ess: cfg.replicas as f64,
            excess_kurtosis: kurt,
            heavy_tail_warning: kurt > KURTOSIS_WARN_THRESHOLD,
            low_ess_warning: false,
            median_log: Some(stats::median(&t)),
            jitter: state.jitter(),
        });
    }
    let warnings = collect_warnings(MethodTag::Quenched, &rungs);
    Ok(EstimateSeries {
        method: MethodTag::Quenched,
        params: cfg.params,
        rungs,
        warnings,
    })
}

/// Participation estimator: per rung, `log` of the sample mean of
/// `exp(participation_sum)` — the mean Gibbs collision probability whose
/// slope is the participation exponent. Tilted importance sampling is
/// allowed (set a tilt policy); as in [`estimate_annealed_tilted`], the
/// tilted path averages the root-decomposed integrand `N w_u^q` at the tilt
/// root `u` (an exact identity), and `c = 0` reduces to the plain
/// functional.
pub fn estimate_participation(cfg: &RunConfig, ladder: &EpsLadder) -> Result<EstimateSeries> {
    cfg.validate()?;
    ladder.check_matches(cfg)?;
    let tilt_c = match cfg.tilt {
        TiltPolicy::None => None,
        _ => Some(cfg.resolved_tilt_c()?),
    };
    let (beta, q) = (cfg.params.beta(), cfg.params.q);
    let mut rungs = Vec::with_capacity(ladder.states.len());
    for (k, state) in ladder.states.iter().enumerate() {
        let t = if matches!(tilt_c, Some(c) if c != 0.0) {
            rung_exponents(state, k, cfg, tilt_c, |x, u| {
                let u = u.expect("tilted driver supplies a root");
                measure::rooted_participation_values(x, beta, q, u)
            })
        } else {
            rung_exponents(state, k, cfg, tilt_c, |x, _| {
                measure::participation_sum_values(x, beta, q)
            })
        };
        rungs.push(reduce_log_mean(state.eps(), state.jitter(), &t, cfg.replicas));
    }
    let warnings = collect_warnings(MethodTag::Participation, &rungs);
    Ok(EstimateSeries {
        method: MethodTag::Participation,
        params: cfg.params,
        rungs,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny_cfg(beta2: f64, q: f64, tilt: TiltPolicy) -> RunConfig {
        let params = ModelParams::new(beta2, q, 1).unwrap();
        RunConfig {
            eps_values: vec![0.25, 0.125, 0.0625],
            replicas: 400,
            master_seed: 7,
            tilt,
            ..RunConfig::new(params)
        }
    }

    #[test]
    fn ladder_validation_errors() {
        assert!(validate_ladder_eps(&[]).is_err());
        assert!(validate_ladder_eps(&[0.5, 0.5, 0.25]).unwrap_err().to_string().contains("rung 1"));
        assert!(validate_ladder_eps(&[0.25, 0.5]).is_err());
        assert!(validate_ladder_eps(&[1.5, 0.5, 0.25]).is_err());
        assert!(validate_ladder_eps(&[0.5, 0.25, 0.125]).is_ok());

        // Replica floor.
        let mut cfg = tiny_cfg(0.4, 2.0, TiltPolicy::None);
        cfg.replicas = 10;
        assert!(cfg.validate().is_err());

        // Resource cap surfaces as a resource error naming the rung.
        let mut cfg = tiny_cfg(0.4, 2.0, TiltPolicy::None);
        cfg.max_points = 32;
        let err = EpsLadder::from_config(&cfg).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)), "{err}");
    }

    #[test]
    fn default_ladders() {
        assert_eq!(default_ladder(1).len(), 6);
        assert_eq!(default_ladder(1)[0], 0.0625);
        assert_eq!(default_ladder(1)[5], 2f64.powi(-9));
        assert_eq!(default_ladder(2), vec![0.0625, 0.03125]);
        assert_eq!(n_per_side_for(2f64.powi(-9)), 2048);
    }

    #[test]
    fn zero_coupling_is_exact_for_all_estimators() {
        let cfg = tiny_cfg(0.0, 2.0, TiltPolicy::None);
        let ladder = EpsLadder::from_config(&cfg).unwrap();
        let expected = -(2.0f64.ln()); // (1-q) d log 2 with q=2, d=1.

        for series in [
            estimate_annealed_naive(&cfg, &ladder).unwrap(),
            estimate_quenched(&cfg, &ladder).unwrap(),
        ] {
            for r in &series.rungs {
                assert_abs_diff_eq!(r.log_estimate, expected, epsilon = 1e-12);
                // Exactly 0 for the log-mean path; the mean-of-logs path can
                // pick up accumulation rounding of identical summands.
                assert!(r.stderr <= 1e-15, "stderr {} at beta = 0", r.stderr);
            }
            let fit = fit_exponent(&series).unwrap();
            assert!(fit.slope.abs() < 1e-10, "slope {}", fit.slope);
        }

        // Participation at beta = 0: exp(log_estimate) = N^(1-q), so the
        // slope equals d(q-1) exactly (N = 4/eps per rung).
        let series = estimate_participation(&cfg, &ladder).unwrap();
        let fit = fit_exponent(&series).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-10);

        // Tilting at beta = 0 is refused.
        let cfg_t = tiny_cfg(0.0, 2.0, TiltPolicy::Auto);
        assert!(estimate_annealed_tilted(&cfg_t, &ladder).is_err());
    }

    #[test]
    fn tilt_policy_preconditions() {
        let cfg = tiny_cfg(1.0, 2.0, TiltPolicy::Fixed(0.5));
        let ladder = EpsLadder::from_config(&cfg).unwrap();
        assert!(estimate_annealed_naive(&cfg, &ladder).is_err());
        assert!(estimate_quenched(&cfg, &ladder).is_err());

        let cfg_none = tiny_cfg(1.0, 2.0, TiltPolicy::None);
        assert!(estimate_annealed_tilted(&cfg_none, &ladder).is_err());

        let mut bad = tiny_cfg(1.0, 2.0, TiltPolicy::Fixed(1.5));
        bad.replicas = 100;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn series_are_bit_deterministic() {
        let cfg = tiny_cfg(0.5, 2.0, TiltPolicy::None);
        let ladder = EpsLadder::from_config(&cfg).unwrap();
        let a = estimate_annealed_naive(&cfg, &ladder).unwrap();
        let b = estimate_annealed_naive(&cfg, &ladder).unwrap();
        for (ra, rb) in a.rungs.iter().zip(&b.rungs) {
            assert_eq!(ra.log_estimate.to_bits(), rb.log_estimate.to_bits());
            assert_eq!(ra.stderr.to_bits(), rb.stderr.to_bits());
        }
        // A different seed moves the numbers.
        let mut cfg2 = cfg.clone();
        cfg2.master_seed = 8;
        let c = estimate_annealed_naive(&cfg2, &ladder).unwrap();
        assert_ne!(a.rungs[0].log_estimate.to_bits(), c.rungs[0].log_estimate.to_bits());
    }

    #[test]
    fn zero_tilt_reduces_to_naive_bit_exactly() {
        let cfg_naive = tiny_cfg(0.8, 2.0, TiltPolicy::None);
        let cfg_zero = tiny_cfg(0.8, 2.0, TiltPolicy::Fixed(0.0));
        let ladder = EpsLadder::from_config(&cfg_naive).unwrap();
        let a = estimate_annealed_naive(&cfg_naive, &ladder).unwrap();
        let b = estimate_annealed_tilted(&cfg_zero, &ladder).unwrap();
        for (ra, rb) in a.rungs.iter().zip(&b.rungs) {
            assert_eq!(
                ra.log_estimate.to_bits(),
                rb.log_estimate.to_bits(),
                "c = 0 tilt must be the naive estimator, bit for bit"
            );
            assert_eq!(ra.ess.to_bits(), rb.ess.to_bits());
        }
    }

    #[test]
    fn tilted_and_naive_agree_within_error() {
        // Exact IS identity: both estimate the same grid-level expectation.
        let mut cfg_naive = tiny_cfg(1.0, 2.0, TiltPolicy::None);
        cfg_naive.replicas = 4000;
        cfg_naive.eps_values = vec![0.25];
        let ladder = EpsLadder::from_config(&cfg_naive).unwrap();
        let mut cfg_tilt = cfg_naive.clone();
        cfg_tilt.tilt = TiltPolicy::Auto;
        cfg_tilt.master_seed = 1234; // independent draws
        let a = estimate_annealed_naive(&cfg_naive, &ladder).unwrap();
        let b = estimate_annealed_tilted(&cfg_tilt, &ladder).unwrap();
        let (ra, rb) = (&a.rungs[0], &b.rungs[0]);
        let diff = (ra.log_estimate - rb.log_estimate).abs();
        let comb = ra.stderr.hypot(rb.stderr);
        assert!(diff <= 3.0 * comb, "naive {} vs tilted {} (3 sigma = {})",
            ra.log_estimate, rb.log_estimate, 3.0 * comb);
        // ESS lies in (0, n].
        assert!(rb.ess > 0.0 && rb.ess <= cfg_naive.replicas as f64);
    }

    #[test]
    fn quenched_reports_median_diagnostic() {
        let cfg = tiny_cfg(0.5, 2.0, TiltPolicy::None);
        let ladder = EpsLadder::from_config(&cfg).unwrap();
        let series = estimate_quenched(&cfg, &ladder).unwrap();
        for r in &series.rungs {
            let med = r.median_log.expect("quenched stores the median");
            // Median and mean are close for these mildly skewed logs.
            assert!((med - r.log_estimate).abs() < 1.0);
            assert!(r.stderr.is_finite() && r.stderr > 0.0);
        }
    }

    #[test]
    fn method_tags_round_trip() {
        for m in [
            MethodTag::AnnealedNaive,
            MethodTag::AnnealedTilted,
            MethodTag::Quenched,
            MethodTag::Participation,
            MethodTag::NegativeMoment,
            MethodTag::Lemma1,
            MethodTag::Lemma2,
        ] {
            assert_eq!(MethodTag::parse(m.as_str()).unwrap(), m);
        }
        assert!(MethodTag::parse("bogus").is_err());
    }
}
