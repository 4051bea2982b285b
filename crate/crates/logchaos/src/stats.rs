//! Log-scale reductions for Monte Carlo estimators.
//!
//! Every estimator in this crate averages positive summands of the form
//! `exp(t_j)` where the exponents `t_j` can reach hundreds (the moment-ratio
//! functionals scale like `beta2 q^2 log(1/eps)`), so plain arithmetic
//! overflows. All reductions here shift by the maximum exponent first and
//! report the result in natural-log scale:
//!
//! * `log_mean` — log of the sample mean of `exp(t_j)`;
//! * `stderr_log` — delta-method standard error of `log_mean`, i.e.
//!   `sd(exp t)/ (sqrt(n) * mean(exp t))`, which is invariant under the shift;
//! * `ess` — effective number of summands `(sum w)^2 / sum w^2`, the standard
//!   importance-sampling degeneracy diagnostic applied to the positive
//!   summands themselves;
//! * `excess_kurtosis` — shift-invariant tail diagnostic of the summands.

/// `log(sum_j exp(x_j))` computed with the usual max shift. Returns `-inf`
/// for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        // Empty input or all -inf (zero mass): the sum is exp(m) either way.
        return m;
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + sum.ln()
}

/// Summary of `mean_j exp(t_j)` over the exponents `t_j`, in log scale.
#[derive(Clone, Copy, Debug)]
pub struct LogMeanSummary {
    /// `log( (1/n) sum_j exp(t_j) )`.
    pub log_mean: f64,
    /// Delta-method standard error of `log_mean`.
    pub stderr_log: f64,
    /// Effective sample size `(sum w)^2 / sum w^2` of the summands.
    pub ess: f64,
    /// Sample excess kurtosis of the summands (0 for a constant sample).
    pub excess_kurtosis: f64,
}

/// Reduce exponents `t_j` to the log-scale mean summary. The reduction is a
/// fixed left-to-right pass, so results are bit-stable for a given input
/// order. A constant input reduces exactly: `log_mean = t`, `stderr = 0`,
/// `ess = n`.
pub fn log_mean_summary(exponents: &[f64]) -> LogMeanSummary {
    let n = exponents.len();
    assert!(n > 0, "log_mean_summary needs at least one summand");
    let nf = n as f64;
    let m = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return LogMeanSummary {
            log_mean: m,
            stderr_log: 0.0,
            ess: nf,
            excess_kurtosis: 0.0,
        };
    }
    // Shifted positive summands w_j = exp(t_j - m) in (0, 1].
    let w: Vec<f64> = exponents.iter().map(|&t| (t - m).exp()).collect();
    let sum_w: f64 = w.iter().sum();
    let sum_w2: f64 = w.iter().map(|&x| x * x).sum();
    let mean_w = sum_w / nf;

    // Central moments of the shifted summands. The shift multiplies all
    // summands by the same constant, so every ratio below is unchanged.
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in &w {
        let c = x - mean_w;
        let c2 = c * c;
        m2 += c2;
        m4 += c2 * c2;
    }
    m2 /= nf;
    m4 /= nf;

    let sample_var = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
    let stderr_log = (sample_var / nf).sqrt() / mean_w;
    let ess = if sum_w2 > 0.0 { sum_w * sum_w / sum_w2 } else { nf };
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };

    LogMeanSummary {
        log_mean: m + mean_w.ln(),
        stderr_log,
        ess,
        excess_kurtosis,
    }
}

/// Excess kurtosis `m4/m2^2 - 3` (0 for constant or near-constant input).
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mu = mean(xs);
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let c2 = (x - mu) * (x - mu);
        m2 += c2;
        m4 += c2 * c2;
    }
    m2 /= n;
    m4 /= n;
    if m2 > 0.0 {
        m4 / (m2 * m2) - 3.0
    } else {
        0.0
    }
}

/// Plain mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (0 for fewer than two points). Corrected
/// two-pass form: the `(sum d)^2/n` term cancels the rounding of the mean,
/// so near-constant samples do not report spurious spread.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let mut sum_d = 0.0;
    let mut sum_d2 = 0.0;
    for &x in xs {
        let d = x - mu;
        sum_d += d;
        sum_d2 += d * d;
    }
    let nf = n as f64;
    ((sum_d2 - sum_d * sum_d / nf) / (nf - 1.0)).max(0.0)
}

/// Standard error of the mean, `sd / sqrt(n)`.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (sample_variance(xs) / xs.len() as f64).sqrt()
}

/// Sample median (average of the middle pair for even n). Sorts a copy.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty slice");
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median: NaN in sample"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_sum_exp_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_abs_diff_eq!(log_sum_exp(&[3.5]), 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(log_sum_exp(&[0.0, 0.0]), 2.0_f64.ln(), epsilon = 1e-15);
        // No overflow far outside the representable range of exp.
        assert_abs_diff_eq!(
            log_sum_exp(&[1000.0, 1000.0]),
            1000.0 + 2.0_f64.ln(),
            epsilon = 1e-12
        );
        // Dominant-term limit.
        assert_abs_diff_eq!(log_sum_exp(&[0.0, -800.0]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_sample_reduces_exactly() {
        let s = log_mean_summary(&[-4.25; 17]);
        assert_eq!(s.log_mean, -4.25);
        assert_eq!(s.stderr_log, 0.0);
        assert_eq!(s.ess, 17.0);
        assert_eq!(s.excess_kurtosis, 0.0);
    }

    #[test]
    fn two_point_sample_matches_hand_values() {
        // Summands 1 and 3: mean 2, sd sqrt(2), ess 16/10, kurtosis -2.
        let s = log_mean_summary(&[0.0, 3.0_f64.ln()]);
        assert_abs_diff_eq!(s.log_mean, 2.0_f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.stderr_log, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.ess, 1.6, epsilon = 1e-15);
        assert_abs_diff_eq!(s.excess_kurtosis, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn shift_invariance_of_diagnostics() {
        let base = [0.3, -1.2, 2.4, 0.0, 1.1];
        let shifted: Vec<f64> = base.iter().map(|x| x + 500.0).collect();
        let a = log_mean_summary(&base);
        let b = log_mean_summary(&shifted);
        assert_abs_diff_eq!(b.log_mean - a.log_mean, 500.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.stderr_log, b.stderr_log, epsilon = 1e-12);
        assert_abs_diff_eq!(a.ess, b.ess, epsilon = 1e-12);
        assert_abs_diff_eq!(a.excess_kurtosis, b.excess_kurtosis, epsilon = 1e-9);
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn mean_and_variance() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(mean(&xs), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sample_variance(&xs), 5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stderr_of_mean(&xs), (5.0 / 12.0_f64).sqrt(), epsilon = 1e-15);
    }
}
