//! Property-test harness for the Gaussian comparison inequalities that
//! underpin the interpolation arguments: Kahane's convexity inequality for
//! entrywise-ordered covariances and Slepian's lemma for equal-variance
//! pairs, plus a small-dimension quadrature oracle.
//!
//! Both sides of each inequality are estimated with common random numbers
//! (one shared standard-normal vector pushed through the two factors), so
//! the reported margin is a paired estimate whose stderr is exactly the
//! stderr of the mean paired difference. Equal matrices therefore give a
//! margin of exactly zero.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::seeds;
use crate::stats;
use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Largest matrix size the random pair generator accepts.
pub const MAX_PAIR_DIM: usize = 6;

/// Attempts before `random_ordered_cov_pair` gives up shrinking the
/// perturbation.
const GENERATION_RETRY_CAP: usize = 60;

/// Relative tolerance for symmetry / ordering / diagonal checks.
const PAIR_TOL: f64 = 1e-12;

/// Overall variance scale of randomly generated pairs. Keeps the
/// exponential functionals' sampling distributions inside CLT range at
/// suite sample sizes — with unit-or-larger variances the lognormal tails
/// make the sample stderr a serious underestimate, which would poison both
/// the violation flags and the quadrature cross-check.
pub const PAIR_VARIANCE_SCALE: f64 = 0.4;

/// A pair of same-size positive-definite covariance matrices with
/// `sigma_x <= sigma_y` entrywise; `equal_diag` additionally pins the
/// diagonals to match (the Slepian hypothesis).
#[derive(Debug, Clone)]
pub struct OrderedCovPair {
    sigma_x: DMatrix<f64>,
    sigma_y: DMatrix<f64>,
    equal_diag: bool,
    factor_x: DMatrix<f64>,
    factor_y: DMatrix<f64>,
}

impl OrderedCovPair {
    /// Validates the ordering/positivity invariants and precomputes both
    /// Cholesky factors.
    pub fn new(sigma_x: DMatrix<f64>, sigma_y: DMatrix<f64>, equal_diag: bool) -> Result<Self> {
        let n = sigma_x.nrows();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "covariance pair must have at least one row".into(),
            ));
        }
        if sigma_x.ncols() != n || sigma_y.nrows() != n || sigma_y.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "covariance pair must be square matrices of equal size, got {} x {} and {} x {}",
                sigma_x.nrows(),
                sigma_x.ncols(),
                sigma_y.nrows(),
                sigma_y.ncols()
            )));
        }
        let scale = sigma_y
            .iter()
            .chain(sigma_x.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let tol = PAIR_TOL * scale;
        for m in [&sigma_x, &sigma_y] {
            for i in 0..n {
                for j in (i + 1)..n {
                    if (m[(i, j)] - m[(j, i)]).abs() > tol {
                        return Err(Error::InvalidParameter(format!(
                            "covariance matrix is not symmetric at entry ({i}, {j})"
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if sigma_x[(i, j)] > sigma_y[(i, j)] + tol {
                    return Err(Error::InvalidParameter(format!(
                        "entrywise ordering violated at ({i}, {j}): sigma_x = {} > sigma_y = {}",
                        sigma_x[(i, j)],
                        sigma_y[(i, j)]
                    )));
                }
            }
        }
        if equal_diag {
            for i in 0..n {
                if (sigma_x[(i, i)] - sigma_y[(i, i)]).abs() > tol {
                    return Err(Error::InvalidParameter(format!(
                        "equal_diag requires matching diagonals, but entry {i} differs: {} vs {}",
                        sigma_x[(i, i)],
                        sigma_y[(i, i)]
                    )));
                }
            }
        }
        let factor_x = Cholesky::new(sigma_x.clone())
            .ok_or_else(|| {
                Error::InvalidParameter("sigma_x is not positive definite".into())
            })?
            .unpack();
        let factor_y = Cholesky::new(sigma_y.clone())
            .ok_or_else(|| {
                Error::InvalidParameter("sigma_y is not positive definite".into())
            })?
            .unpack();
        Ok(Self {
            sigma_x,
            sigma_y,
            equal_diag,
            factor_x,
            factor_y,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma_x.nrows()
    }

    pub fn sigma_x(&self) -> &DMatrix<f64> {
        &self.sigma_x
    }

    pub fn sigma_y(&self) -> &DMatrix<f64> {
        &self.sigma_y
    }

    pub fn equal_diag(&self) -> bool {
        self.equal_diag
    }

    /// Pushes one shared standard-normal vector through both factors.
    fn coupled_sample(&self, rng: &mut impl Rng, z: &mut [f64], x: &mut [f64], y: &mut [f64]) {
        let n = self.dim();
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..n {
            let mut ax = 0.0;
            let mut ay = 0.0;
            for (j, &zj) in z.iter().enumerate().take(i + 1) {
                ax += self.factor_x[(i, j)] * zj;
                ay += self.factor_y[(i, j)] * zj;
            }
            x[i] = ax;
            y[i] = ay;
        }
    }
}

/// Draws a random ordered covariance pair: `sigma_y = A Aᵀ + D` with a
/// positive diagonal boost, then `sigma_x = sigma_y − E` for a random
/// entrywise-nonnegative symmetric perturbation `E` (zero diagonal when
/// `equal_diag`), shrinking `E` geometrically until `sigma_x` factors.
pub fn random_ordered_cov_pair(
    n: usize,
    equal_diag: bool,
    rng: &mut impl Rng,
) -> Result<OrderedCovPair> {
    if n == 0 || n > MAX_PAIR_DIM {
        return Err(Error::InvalidParameter(format!(
            "pair dimension must lie in 1..={MAX_PAIR_DIM}, got {n}"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for v in a.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *v = g * scale;
    }
    let mut sigma_y = &a * a.transpose();
    for i in 0..n {
        sigma_y[(i, i)] += rng.gen_range(0.5..1.5);
    }
    sigma_y *= PAIR_VARIANCE_SCALE;

    let mut e = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if i == j {
                if !equal_diag {
                    e[(i, i)] = rng.gen_range(0.0..0.3) * sigma_y[(i, i)];
                }
            } else {
                let cap = 0.3 * sigma_y[(i, i)].min(sigma_y[(j, j)]);
                let v = rng.gen_range(0.0..cap);
                e[(i, j)] = v;
                e[(j, i)] = v;
            }
        }
    }

    let mut shrink = 1.0;
    for _ in 0..GENERATION_RETRY_CAP {
        let sigma_x = &sigma_y - &e * shrink;
        if Cholesky::new(sigma_x.clone()).is_some() {
            return OrderedCovPair::new(sigma_x, sigma_y, equal_diag);
        }
        shrink *= 0.5;
    }
    Err(Error::Numerical(format!(
        "ordered pair generation failed after {GENERATION_RETRY_CAP} shrink attempts"
    )))
}

/// The functional applied to the weighted normalized-exponential sum
/// `S = Σ p_i exp(Z_i − Var Z_i / 2)`, `S > 0` almost surely.
///
/// Three convex shapes plus the concave powers used with the reversed
/// inequality direction. `Exp` requires a nonpositive scale: positive
/// scales make `E[exp(scale · S)]` infinite for lognormal sums, so a Monte
/// Carlo estimate of the inequality would be meaningless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FunctionalTag {
    /// `F(s) = s^p`, convex for `p >= 1`.
    Power(f64),
    /// `F(s) = s^{-q}`, convex on `s > 0` for `q > 0`.
    NegPower(f64),
    /// `F(s) = exp(scale * s)`, convex; `scale <= 0` required (see above).
    Exp(f64),
    /// `F(s) = s^t` with `t` in `(0, 1)`: concave, so the expected
    /// inequality direction is reversed.
    ConcavePower(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexFunctional {
    tag: FunctionalTag,
    weights: Vec<f64>,
}

impl ConvexFunctional {
    pub fn new(tag: FunctionalTag, weights: Vec<f64>) -> Result<Self> {
        match tag {
            FunctionalTag::Power(p) => {
                if !(p.is_finite() && p >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Power exponent must be finite and >= 1 for convexity, got {p}"
                    )));
                }
            }
            FunctionalTag::NegPower(q) => {
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "NegPower exponent must be finite and > 0, got {q}"
                    )));
                }
            }
            FunctionalTag::Exp(scale) => {
                if !(scale.is_finite() && scale <= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Exp scale must be finite and <= 0 (positive scales have \
                         divergent expectations for lognormal sums), got {scale}"
                    )));
                }
            }
            FunctionalTag::ConcavePower(t) => {
                if !(t.is_finite() && t > 0.0 && t < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "ConcavePower exponent must lie strictly in (0, 1), got {t}"
                    )));
                }
            }
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "functional weights must be non-empty".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "functional weights must be finite and nonnegative".into(),
            ));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidParameter(
                "at least one functional weight must be positive".into(),
            ));
        }
        Ok(Self { tag, weights })
    }

    pub fn tag(&self) -> FunctionalTag {
        self.tag
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when the functional is concave, flipping the expected
    /// inequality direction in `kahane_check`.
    pub fn reversed(&self) -> bool {
        matches!(self.tag, FunctionalTag::ConcavePower(_))
    }

    /// Short label for reports, e.g. `power(2)`.
    pub fn label(&self) -> String {
        match self.tag {
            FunctionalTag::Power(p) => format!("power({p})"),
            FunctionalTag::NegPower(q) => format!("neg_power({q})"),
            FunctionalTag::Exp(s) => format!("exp({s})"),
            FunctionalTag::ConcavePower(t) => format!("concave_power({t})"),
        }
    }

    /// Evaluates `F(Σ p_i exp(z_i − var_i / 2))`.
    pub fn eval(&self, z: &[f64], variances: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.weights.len());
        debug_assert_eq!(variances.len(), self.weights.len());
        let s: f64 = self
            .weights
            .iter()
            .zip(z.iter().zip(variances.iter()))
            .map(|(w, (zi, vi))| w * (zi - 0.5 * vi).exp())
            .sum();
        match self.tag {
            FunctionalTag::Power(p) => s.powf(p),
            FunctionalTag::NegPower(q) => s.powf(-q),
            FunctionalTag::Exp(scale) => (scale * s).exp(),
            FunctionalTag::ConcavePower(t) => s.powf(t),
        }
    }
}

/// Paired Monte Carlo comparison of the two sides of an inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// X-side estimate (smaller covariances).
    pub lhs: f64,
    /// Y-side estimate (larger covariances).
    pub rhs: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    /// `rhs − lhs`, estimated from paired differences.
    pub margin: f64,
    /// Stderr of the mean paired difference (exactly the stderr of
    /// `margin` under common random numbers).
    pub margin_stderr: f64,
    /// Expected inequality direction is flipped (concave functional).
    pub reversed: bool,
    /// The margin crossed zero by more than three paired stderrs in the
    /// forbidden direction.
    pub violation: bool,
    pub n_samples: usize,
}

fn paired_report(fx: &[f64], fy: &[f64], reversed: bool) -> ComparisonReport {
    let n = fx.len();
    let diffs: Vec<f64> = fy.iter().zip(fx.iter()).map(|(a, b)| a - b).collect();
    let margin = stats::mean(&diffs);
    let margin_stderr = stats::stderr_of_mean(&diffs);
    let oriented = if reversed { -margin } else { margin };
    ComparisonReport {
        lhs: stats::mean(fx),
        rhs: stats::mean(fy),
        lhs_stderr: stats::stderr_of_mean(fx),
        rhs_stderr: stats::stderr_of_mean(fy),
        margin,
        margin_stderr,
        reversed,
        violation: oriented < -3.0 * margin_stderr,
        n_samples: n,
    }
}

fn check_n_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples for a stderr, got {n_samples}"
        )));
    }
    Ok(())
}

/// Monte Carlo check of Kahane's convexity inequality
/// `E[F(Σ p_i e^{X_i − Var X_i / 2})] <= E[F(Σ p_i e^{Y_i − Var Y_i / 2})]`
/// for a convex functional (reversed for a concave one). Both sides share
/// the same standard-normal draws.
pub fn kahane_check(
    pair: &OrderedCovPair,
    f: &ConvexFunctional,
    n_samples: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    check_n_samples(n_samples)?;
    let n = pair.dim();
    if f.weights().len() != n {
        return Err(Error::InvalidParameter(format!(
            "functional has {} weights but the pair has dimension {n}",
            f.weights().len()
        )));
    }
    let var_x: Vec<f64> = (0..n).map(|i| pair.sigma_x[(i, i)]).collect();
    let var_y: Vec<f64> = (0..n).map(|i| pair.sigma_y[(i, i)]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut fx = Vec::with_capacity(n_samples);
    let mut fy = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        pair.coupled_sample(&mut rng, &mut z, &mut x, &mut y);
        fx.push(f.eval(&x, &var_x));
        fy.push(f.eval(&y, &var_y));
    }
    Ok(paired_report(&fx, &fy, f.reversed()))
}

/// Monte Carlo check of Slepian's lemma
/// `P(sup X_i < x) <= P(sup Y_i < x)` for an equal-diagonal ordered pair.
pub fn slepian_check(
    pair: &OrderedCovPair,
    threshold: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    check_n_samples(n_samples)?;
    if !pair.equal_diag() {
        return Err(Error::InvalidParameter(
            "slepian_check requires an equal-diagonal pair (equal variances)".into(),
        ));
    }
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite, got {threshold}"
        )));
    }
    let n = pair.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let below = |v: &[f64]| -> f64 {
        if v.iter().all(|&vi| vi < threshold) {
            1.0
        } else {
            0.0
        }
    };
    let mut fx = Vec::with_capacity(n_samples);
    let mut fy = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        pair.coupled_sample(&mut rng, &mut z, &mut x, &mut y);
        fx.push(below(&x));
        fy.push(below(&y));
    }
    Ok(paired_report(&fx, &fy, false))
}

/// Functional shapes the quadrature oracle understands.
#[derive(Debug, Clone)]
pub enum OracleFunctional<'a> {
    /// The Kahane functional on the weighted normalized-exponential sum.
    Convex(&'a ConvexFunctional),
    /// The Slepian indicator `1{ all Z_i < x }`.
    SupBelow(f64),
}

/// Quadrature ground truth for `E[functional(Z)]`, `Z ~ N(0, cov)`, `cov`
/// at most 3 x 3. Smooth functionals go through tensor Gauss-Hermite at
/// the given order; the Slepian indicator goes through the exact normal
/// CDF (`order` is ignored there), since Gauss-Hermite converges only
/// polynomially on discontinuities.
pub fn brute_force_expectation(
    cov: &DMatrix<f64>,
    functional: &OracleFunctional<'_>,
    order: usize,
) -> Result<f64> {
    match functional {
        OracleFunctional::Convex(f) => {
            if f.weights().len() != cov.nrows() {
                return Err(Error::InvalidParameter(format!(
                    "functional has {} weights but the covariance has dimension {}",
                    f.weights().len(),
                    cov.nrows()
                )));
            }
            let variances: Vec<f64> = (0..cov.nrows()).map(|i| cov[(i, i)]).collect();
            quadrature::expect_gauss_hermite(cov, order, |z| f.eval(z, &variances))
        }
        OracleFunctional::SupBelow(x) => quadrature::sup_below_prob(cov, *x),
    }
}

/// Gauss-Hermite order used for smooth (Kahane) oracle cross-checks.
pub const KAHANE_ORACLE_ORDER: usize = 48;

/// Gauss-Hermite order used for indicator (Slepian) oracle cross-checks.
/// Indicators converge only polynomially, so this is the cap.
pub const SLEPIAN_ORACLE_ORDER: usize = 64;

/// One instance inside a randomized suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    /// Matrix dimension of the pair.
    pub n: usize,
    /// Human-readable functional / threshold label.
    pub functional: String,
    /// Quadrature ground truth per side when `n <= 3`; `None` above that.
    pub oracle_lhs: Option<f64>,
    pub oracle_rhs: Option<f64>,
    /// Worst `|MC − oracle|` over the two sides in stderr units.
    pub oracle_sigmas: Option<f64>,
    #[serde(flatten)]
    pub report: ComparisonReport,
}

/// Cross-checks both sides of a comparison against the quadrature oracle.
/// Returns `(oracle_lhs, oracle_rhs, worst deviation in stderr units)`.
fn oracle_cross_check(
    pair: &OrderedCovPair,
    functional: &OracleFunctional<'_>,
    report: &ComparisonReport,
    order: usize,
) -> Result<(f64, f64, f64)> {
    let oracle_lhs = brute_force_expectation(&pair.sigma_x, functional, order)?;
    let oracle_rhs = brute_force_expectation(&pair.sigma_y, functional, order)?;
    let sigmas = [
        (report.lhs, oracle_lhs, report.lhs_stderr),
        (report.rhs, oracle_rhs, report.rhs_stderr),
    ]
    .iter()
    .map(|&(mc, oracle, stderr)| {
        let diff = (mc - oracle).abs();
        if stderr > 0.0 {
            diff / stderr
        } else if diff <= 1e-6 {
            // Saturated indicator: every sample on one side (stderr 0)
            // while the exact probability is within rounding of 0 or 1.
            0.0
        } else {
            f64::INFINITY
        }
    })
    .fold(0.0, f64::max);
    Ok((oracle_lhs, oracle_rhs, sigmas))
}

/// Aggregate violation report for a randomized suite, serialized to JSON
/// for the test suite and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    /// "kahane" or "slepian".
    pub suite: String,
    pub instances: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub violations: usize,
    /// Most adverse oriented margin in stderr units across instances with
    /// a positive stderr (positive = comfortably on the expected side).
    pub worst_margin_sigmas: f64,
    /// Instances cross-checked against the quadrature oracle (`n <= 3`).
    pub oracle_checked: usize,
    /// Max `oracle_sigmas` over the checked instances (0 if none).
    pub max_oracle_sigmas: f64,
    pub reports: Vec<InstanceReport>,
}

impl SuiteReport {
    fn assemble(
        suite: &str,
        n_samples: usize,
        seed: u64,
        reports: Vec<InstanceReport>,
    ) -> Self {
        let violations = reports.iter().filter(|r| r.report.violation).count();
        let worst = reports
            .iter()
            .filter(|r| r.report.margin_stderr > 0.0)
            .map(|r| {
                let oriented = if r.report.reversed {
                    -r.report.margin
                } else {
                    r.report.margin
                };
                oriented / r.report.margin_stderr
            })
            .fold(f64::INFINITY, f64::min);
        let oracle_checked = reports.iter().filter(|r| r.oracle_sigmas.is_some()).count();
        let max_oracle_sigmas = reports
            .iter()
            .filter_map(|r| r.oracle_sigmas)
            .fold(0.0, f64::max);
        Self {
            suite: suite.to_string(),
            instances: reports.len(),
            n_samples,
            seed,
            violations,
            worst_margin_sigmas: worst,
            oracle_checked,
            max_oracle_sigmas,
            reports,
        }
    }
}

/// Runs `instances` random Kahane checks with `F` alternating between
/// `Power(2)` and `NegPower(1)`, dimensions drawn from `1..=5`.
pub fn run_kahane_suite(instances: usize, n_samples: usize, seed: u64) -> Result<SuiteReport> {
    check_n_samples(n_samples)?;
    let mut reports = Vec::with_capacity(instances);
    for i in 0..instances {
        let mut rng = seeds::replica_rng(seed, 0, i as u64);
        let n = rng.gen_range(1..=5usize);
        let equal_diag = rng.gen_bool(0.25);
        let pair = random_ordered_cov_pair(n, equal_diag, &mut rng)?;
        let tag = if i % 2 == 0 {
            FunctionalTag::Power(2.0)
        } else {
            FunctionalTag::NegPower(1.0)
        };
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let f = ConvexFunctional::new(tag, weights)?;
        let check_seed = seeds::subtask_seed(seed, 0x4B00 + i as u64);
        let report = kahane_check(&pair, &f, n_samples, check_seed)?;
        let (oracle_lhs, oracle_rhs, oracle_sigmas) = if n <= quadrature::MAX_ORACLE_DIM {
            let (l, r, s) = oracle_cross_check(
                &pair,
                &OracleFunctional::Convex(&f),
                &report,
                KAHANE_ORACLE_ORDER,
            )?;
            (Some(l), Some(r), Some(s))
        } else {
            (None, None, None)
        };
        reports.push(InstanceReport {
            index: i,
            n,
            functional: f.label(),
            oracle_lhs,
            oracle_rhs,
            oracle_sigmas,
            report,
        });
    }
    Ok(SuiteReport::assemble("kahane", n_samples, seed, reports))
}

/// Runs `instances` random Slepian checks on equal-diagonal pairs with
/// dimensions in `2..=5` and thresholds spread over the bulk of the sup
/// distribution.
pub fn run_slepian_suite(instances: usize, n_samples: usize, seed: u64) -> Result<SuiteReport> {
    check_n_samples(n_samples)?;
    let mut reports = Vec::with_capacity(instances);
    for i in 0..instances {
        let mut rng = seeds::replica_rng(seed, 1, i as u64);
        let n = rng.gen_range(2..=5usize);
        let pair = random_ordered_cov_pair(n, true, &mut rng)?;
        let threshold = rng.gen_range(-1.0..2.5);
        let check_seed = seeds::subtask_seed(seed, 0x5E00 + i as u64);
        let report = slepian_check(&pair, threshold, n_samples, check_seed)?;
        let (oracle_lhs, oracle_rhs, oracle_sigmas) = if n <= quadrature::MAX_ORACLE_DIM {
            let (l, r, s) = oracle_cross_check(
                &pair,
                &OracleFunctional::SupBelow(threshold),
                &report,
                SLEPIAN_ORACLE_ORDER,
            )?;
            (Some(l), Some(r), Some(s))
        } else {
            (None, None, None)
        };
        reports.push(InstanceReport {
            index: i,
            n,
            functional: format!("sup<{threshold:.3}"),
            oracle_lhs,
            oracle_rhs,
            oracle_sigmas,
            report,
        });
    }
    Ok(SuiteReport::assemble("slepian", n_samples, seed, reports))
}
