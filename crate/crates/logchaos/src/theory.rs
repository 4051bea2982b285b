//! Closed-form scaling exponents and regime classification.
//!
//! For the Gibbs partition function `Z_eps(beta)` of a log-correlated field on
//! `[-1,1]^d`, the moment ratio `Z_eps(q beta)/Z_eps(beta)^q` decays like a
//! power of the cutoff `eps`. Two exponents matter:
//!
//! * the quenched exponent `eta_q` (pathwise rate),
//!
//!   ```text
//!   eta_q(beta2) = -beta2 q^2/2 + beta2 q/2            0      <= beta2 <= 2d/q^2
//!                = d - sqrt(2d) |beta| q + beta2 q/2    2d/q^2 <= beta2 <= 2d
//!                = -d(q - 1)                            beta2  >= 2d
//!   ```
//!
//! * the annealed exponent `teta_q` (rate of the expectation, dominated by
//!   rare localized configurations),
//!
//!   ```text
//!   teta_q(beta2) = -beta2 q^2/2 + beta2 q/2            0           <= beta2 < 2d/(2q-1)
//!                 = (2d - beta2)^2/(8 beta2) - d(q-1)   2d/(2q-1)   <= beta2 < 2d
//!                 = -d(q - 1)                           beta2       >= 2d
//!   ```
//!
//! The participation exponent (rate of the expected participation sum, i.e.
//! the probability that `q` independent Gibbs samples land in the same cell)
//! is `hat_eta_q = teta_q + d(q-1)`; it vanishes identically in the frozen
//! regime and is `q`-independent in the intermediate one ("pre-freezing").
//!
//! Branch boundaries are assigned to the higher-`beta2` branch. Continuity at
//! the boundaries makes the assignment value-irrelevant, but the regime label
//! itself must be deterministic.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Model parameters: inverse-temperature squared `beta2 = beta^2 >= 0`,
/// moment order `q > 1`, and dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Squared inverse temperature `beta^2 >= 0`.
    pub beta2: f64,
    /// Moment order, any real `q > 1`.
    pub q: f64,
    /// Dimension of the box `[-1,1]^d`.
    pub d: u32,
}

impl ModelParams {
    /// Validate and build. `beta2` must be finite and non-negative, `q`
    /// finite and strictly above 1. Field synthesis is budgeted for
    /// `d` in {1, 2}; enable the `relaxed-dim` feature to evaluate the
    /// closed-form exponents in any dimension `d >= 1`.
    pub fn new(beta2: f64, q: f64, d: u32) -> Result<Self> {
        if !beta2.is_finite() || beta2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta2 must be finite and >= 0, got {beta2}"
            )));
        }
        if !q.is_finite() || q <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "q must be finite and > 1, got {q}"
            )));
        }
        #[cfg(not(feature = "relaxed-dim"))]
        if !(d == 1 || d == 2) {
            return Err(Error::InvalidParameter(format!(
                "d must be 1 or 2, got {d}"
            )));
        }
        #[cfg(feature = "relaxed-dim")]
        if d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        Ok(ModelParams { beta2, q, d })
    }

    /// Dimension as a float, for use in the formulas.
    pub fn dim(&self) -> f64 {
        f64::from(self.d)
    }

    /// `beta = sqrt(beta2)` (non-negative root; the exponents depend on
    /// `|beta|` only).
    pub fn beta(&self) -> f64 {
        self.beta2.sqrt()
    }
}

/// Phase labels for the annealed exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    /// `beta2 < 2d/(2q-1)`: the expectation is carried by typical samples.
    HighTemp,
    /// `2d/(2q-1) <= beta2 < 2d`: rare localized configurations dominate the
    /// expectation while typical samples still look high-temperature.
    Intermediate,
    /// `beta2 >= 2d`: the Gibbs measure localizes; exponents freeze.
    Frozen,
}

impl RegimeLabel {
    /// Stable lowercase label used in CSV output.
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::HighTemp => "high_temp",
            RegimeLabel::Intermediate => "intermediate",
            RegimeLabel::Frozen => "frozen",
        }
    }
}

/// Regime classification together with the two `beta2` boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    /// Which of the three branches `beta2` falls in.
    pub label: RegimeLabel,
    /// Pre-freezing boundary `2d/(2q-1)`.
    pub boundary_pre: f64,
    /// Freezing boundary `2d`.
    pub boundary_freeze: f64,
}

/// Classify `beta2` against the annealed branch boundaries `2d/(2q-1)` and
/// `2d`. Boundary points belong to the higher-`beta2` branch.
pub fn classify_regime(p: &ModelParams) -> Regime {
    let boundary_pre = 2.0 * p.dim() / (2.0 * p.q - 1.0);
    let boundary_freeze = 2.0 * p.dim();
    let label = if p.beta2 < boundary_pre {
        RegimeLabel::HighTemp
    } else if p.beta2 < boundary_freeze {
        RegimeLabel::Intermediate
    } else {
        RegimeLabel::Frozen
    };
    Regime {
        label,
        boundary_pre,
        boundary_freeze,
    }
}

/// High-temperature branch `f1(beta2) = -beta2 q^2/2 + beta2 q/2`, shared by
/// the quenched and annealed exponents.
pub fn branch_high_temp(beta2: f64, q: f64) -> f64 {
    -beta2 * q * q / 2.0 + beta2 * q / 2.0
}

/// Intermediate annealed branch `f2(beta2) = (2d - beta2)^2/(8 beta2) - d(q-1)`.
/// Returns `+inf` at `beta2 = 0`.
pub fn branch_intermediate(beta2: f64, q: f64, d: f64) -> f64 {
    let num = 2.0 * d - beta2;
    num * num / (8.0 * beta2) - d * (q - 1.0)
}

/// Frozen branch `f3 = -d(q-1)`, independent of `beta2`.
pub fn branch_frozen(q: f64, d: f64) -> f64 {
    -d * (q - 1.0)
}

/// Annealed exponent `teta_q`: decay rate of `E[Z_eps(q beta)/Z_eps(beta)^q]`.
pub fn annealed_exponent(p: &ModelParams) -> f64 {
    let d = p.dim();
    match classify_regime(p).label {
        RegimeLabel::HighTemp => branch_high_temp(p.beta2, p.q),
        RegimeLabel::Intermediate => branch_intermediate(p.beta2, p.q, d),
        RegimeLabel::Frozen => branch_frozen(p.q, d),
    }
}

/// Quenched exponent `eta_q`: pathwise decay rate of the same ratio. Branch
/// boundaries sit at `2d/q^2` and `2d` (note: not the annealed boundaries).
pub fn quenched_exponent(p: &ModelParams) -> f64 {
    let d = p.dim();
    let boundary_mid = 2.0 * d / (p.q * p.q);
    if p.beta2 < boundary_mid {
        branch_high_temp(p.beta2, p.q)
    } else if p.beta2 < 2.0 * d {
        d - (2.0 * d).sqrt() * p.beta() * p.q + p.beta2 * p.q / 2.0
    } else {
        branch_frozen(p.q, d)
    }
}

/// Participation exponent `hat_eta_q = teta_q + d(q-1)`: decay rate of the
/// expected participation sum. Identically 0 in the frozen regime and
/// `q`-independent in the intermediate regime (pre-freezing). Note the frozen
/// value 0 is the conventional continuation of the formula; desk-scale runs
/// there only see slow drifts.
pub fn participation_exponent(p: &ModelParams) -> f64 {
    annealed_exponent(p) + p.dim() * (p.q - 1.0)
}

/// Optimal tilt strength parameter `c0 = (1/q)(1/2 + d/beta2)`, clipped to 1:
/// beyond `c = 1` pushing the tilt harder only hurts, so the tilt saturates.
/// Equals 1 exactly in the high-temperature regime. Undefined at `beta2 = 0`
/// (no tilt is needed or possible there).
pub fn tilt_parameter(p: &ModelParams) -> Result<f64> {
    if p.beta2 <= 0.0 {
        return Err(Error::InvalidParameter(
            "tilt parameter is undefined at beta2 = 0 (nothing to tilt)".into(),
        ));
    }
    let c0 = (0.5 + p.dim() / p.beta2) / p.q;
    Ok(c0.min(1.0))
}

/// Log-`eps` coefficient of the tilted change-of-measure prefactor,
/// `-(beta2 q^2/2) [1 - (1-c)^2] + beta2 q/2`.
///
/// At `c = 1` this is the high-temperature branch of the annealed exponent;
/// at the optimal `c0` (intermediate regime) it equals the intermediate
/// branch exactly — an algebraic identity the test suite pins at 1e-12.
pub fn tilt_prefactor_exponent(beta2: f64, q: f64, c: f64) -> f64 {
    let omc = 1.0 - c;
    -(beta2 * q * q / 2.0) * (1.0 - omc * omc) + beta2 * q / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(beta2: f64, q: f64, d: u32) -> ModelParams {
        ModelParams::new(beta2, q, d).unwrap()
    }

    #[test]
    fn params_validate_domains() {
        assert!(ModelParams::new(f64::NAN, 2.0, 1).is_err());
        assert!(ModelParams::new(-0.1, 2.0, 1).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1).is_err());
        assert!(ModelParams::new(1.0, 0.5, 1).is_err());
        assert!(ModelParams::new(1.0, 2.0, 0).is_err());
        #[cfg(not(feature = "relaxed-dim"))]
        assert!(ModelParams::new(1.0, 2.0, 3).is_err());
        assert!(ModelParams::new(0.0, 1.5, 2).is_ok());
    }

    #[test]
    fn regime_examples() {
        let r = classify_regime(&p(0.4, 2.0, 1));
        assert_eq!(r.label, RegimeLabel::HighTemp);
        assert_abs_diff_eq!(r.boundary_pre, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.boundary_freeze, 2.0, epsilon = 1e-15);

        assert_eq!(classify_regime(&p(1.0, 2.0, 1)).label, RegimeLabel::Intermediate);
        // Boundary points belong to the higher-beta2 branch.
        assert_eq!(classify_regime(&p(2.0, 2.0, 1)).label, RegimeLabel::Frozen);
        assert_eq!(
            classify_regime(&p(2.0 / 3.0, 2.0, 1)).label,
            RegimeLabel::Intermediate
        );
        assert_eq!(classify_regime(&p(4.0, 1.5, 2)).label, RegimeLabel::Frozen);
    }

    #[test]
    fn annealed_examples() {
        // beta2 = 2d: frozen value -d(q-1).
        assert_abs_diff_eq!(annealed_exponent(&p(2.0, 2.0, 1)), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(annealed_exponent(&p(4.0, 3.0, 2)), -4.0, epsilon = 1e-15);
        // Zero coupling.
        assert_eq!(annealed_exponent(&p(0.0, 3.0, 1)), 0.0);
        // Intermediate window: (2 - 1)^2 / 8 - 1 = -7/8.
        assert_abs_diff_eq!(annealed_exponent(&p(1.0, 2.0, 1)), -0.875, epsilon = 1e-15);
        // Branch agreement at the pre-freezing boundary 2d/(2q-1) = 2/3.
        let b = 2.0 / 3.0;
        assert_abs_diff_eq!(branch_high_temp(b, 2.0), -b, epsilon = 1e-15);
        assert_abs_diff_eq!(branch_intermediate(b, 2.0, 1.0), -b, epsilon = 1e-13);
    }

    #[test]
    fn quenched_examples() {
        assert_abs_diff_eq!(quenched_exponent(&p(0.4, 2.0, 1)), -0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(quenched_exponent(&p(2.0, 2.0, 1)), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(quenched_exponent(&p(4.0, 2.5, 2)), -3.0, epsilon = 1e-15);
        // Middle branch at (1, 2, 1): 1 - sqrt(2)*2 + 1 = 2 - 2 sqrt(2).
        assert_abs_diff_eq!(
            quenched_exponent(&p(1.0, 2.0, 1)),
            2.0 - 2.0 * std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn participation_examples() {
        // Frozen regime: identically 0.
        assert_eq!(participation_exponent(&p(2.0, 2.0, 1)), 0.0);
        assert_eq!(participation_exponent(&p(3.7, 4.0, 1)), 0.0);
        // beta2 = 0: d(q-1).
        assert_abs_diff_eq!(participation_exponent(&p(0.0, 2.0, 1)), 1.0, epsilon = 1e-15);
        // Intermediate: (2d - beta2)^2 / (8 beta2).
        assert_abs_diff_eq!(participation_exponent(&p(1.0, 2.0, 1)), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn tilt_parameter_examples() {
        assert_abs_diff_eq!(tilt_parameter(&p(1.0, 2.0, 1)).unwrap(), 0.75, epsilon = 1e-15);
        // Clipped from 1.25 in the high-temperature regime.
        assert_eq!(tilt_parameter(&p(0.5, 2.0, 1)).unwrap(), 1.0);
        // At the freezing boundary: 1/q.
        assert_abs_diff_eq!(tilt_parameter(&p(2.0, 2.0, 1)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tilt_parameter(&p(4.0, 3.0, 2)).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(tilt_parameter(&p(0.0, 2.0, 1)).is_err());
    }

    #[test]
    fn prefactor_exponent_examples() {
        // c = 1 collapses to the high-temperature branch.
        assert_abs_diff_eq!(
            tilt_prefactor_exponent(0.7, 2.5, 1.0),
            branch_high_temp(0.7, 2.5),
            epsilon = 1e-15
        );
        // c = 0: no tilt, bracket vanishes.
        assert_abs_diff_eq!(tilt_prefactor_exponent(1.0, 2.0, 0.0), 1.0, epsilon = 1e-15);
        // At the optimal tilt: -2 (1 - 1/16) + 1 = -7/8.
        assert_abs_diff_eq!(tilt_prefactor_exponent(1.0, 2.0, 0.75), -0.875, epsilon = 1e-15);
    }

    /// Grid of (q, d) pairs used by the continuity and identity suites; 25
    /// values of q times both supported dimensions.
    fn qd_grid() -> Vec<(f64, u32)> {
        let mut grid = Vec::new();
        for i in 0..25 {
            let q = 1.05 + 0.2 * i as f64; // 1.05 .. 5.85
            grid.push((q, 1));
            grid.push((q, 2));
        }
        grid
    }

    #[test]
    fn annealed_continuity_at_both_boundaries() {
        for (q, d) in qd_grid() {
            let df = f64::from(d);
            let b_pre = 2.0 * df / (2.0 * q - 1.0);
            let gap1 = branch_high_temp(b_pre, q) - branch_intermediate(b_pre, q, df);
            assert!(
                gap1.abs() <= 1e-12,
                "annealed discontinuity {gap1:.2e} at pre boundary, q={q}, d={d}"
            );
            let b_freeze = 2.0 * df;
            let gap2 = branch_intermediate(b_freeze, q, df) - branch_frozen(q, df);
            assert!(
                gap2.abs() <= 1e-12,
                "annealed discontinuity {gap2:.2e} at freeze boundary, q={q}, d={d}"
            );
        }
    }

    #[test]
    fn quenched_continuity_at_both_boundaries() {
        for (q, d) in qd_grid() {
            let df = f64::from(d);
            let mid = |b2: f64| df - (2.0 * df).sqrt() * b2.sqrt() * q + b2 * q / 2.0;
            let b1 = 2.0 * df / (q * q);
            let gap1 = branch_high_temp(b1, q) - mid(b1);
            assert!(
                gap1.abs() <= 1e-12,
                "quenched discontinuity {gap1:.2e} at 2d/q^2, q={q}, d={d}"
            );
            let b2 = 2.0 * df;
            let gap2 = mid(b2) - branch_frozen(q, df);
            assert!(
                gap2.abs() <= 1e-12,
                "quenched discontinuity {gap2:.2e} at 2d, q={q}, d={d}"
            );
        }
    }

    #[test]
    fn prefactor_identity_in_intermediate_regime() {
        for (q, d) in qd_grid() {
            let df = f64::from(d);
            let b_pre = 2.0 * df / (2.0 * q - 1.0);
            // Sweep the open intermediate window.
            for k in 0..20 {
                let beta2 = b_pre + (2.0 * df - b_pre) * (k as f64 + 0.5) / 20.0;
                let params = p(beta2, q, d);
                assert_eq!(classify_regime(&params).label, RegimeLabel::Intermediate);
                let c0 = tilt_parameter(&params).unwrap();
                let gap = tilt_prefactor_exponent(beta2, q, c0) - annealed_exponent(&params);
                assert!(
                    gap.abs() <= 1e-12,
                    "prefactor identity off by {gap:.2e} at beta2={beta2}, q={q}, d={d}"
                );
            }
        }
    }

    #[test]
    fn annealed_below_quenched() {
        for (q, d) in qd_grid() {
            for k in 0..=60 {
                let beta2 = 3.0 * f64::from(d) * k as f64 / 60.0;
                let params = p(beta2, q, d);
                let gap = annealed_exponent(&params) - quenched_exponent(&params);
                assert!(
                    gap <= 1e-12,
                    "annealed > quenched by {gap:.2e} at beta2={beta2}, q={q}, d={d}"
                );
            }
        }
    }

    #[test]
    fn annealed_monotone_on_subfrozen_window() {
        for (q, d) in qd_grid() {
            let mut prev = f64::INFINITY;
            for k in 0..=400 {
                let beta2 = 2.0 * f64::from(d) * k as f64 / 400.0;
                let v = annealed_exponent(&p(beta2, q, d));
                assert!(
                    v <= prev + 1e-12,
                    "annealed exponent increased at beta2={beta2}, q={q}, d={d}"
                );
                prev = v;
            }
        }
    }

    #[test]
    fn participation_minus_annealed_is_exact() {
        for (q, d) in qd_grid() {
            for k in 0..=30 {
                let beta2 = 3.0 * f64::from(d) * k as f64 / 30.0;
                let params = p(beta2, q, d);
                let gap =
                    participation_exponent(&params) - annealed_exponent(&params) - f64::from(d) * (q - 1.0);
                assert!(gap.abs() <= 1e-12, "offset identity off by {gap:.2e}");
            }
        }
    }

    #[test]
    fn tilt_parameter_is_one_in_high_temp() {
        for (q, d) in qd_grid() {
            let b_pre = 2.0 * f64::from(d) / (2.0 * q - 1.0);
            for k in 1..10 {
                let beta2 = b_pre * k as f64 / 10.0;
                let params = p(beta2, q, d);
                assert_eq!(classify_regime(&params).label, RegimeLabel::HighTemp);
                assert_eq!(tilt_parameter(&params).unwrap(), 1.0);
            }
        }
    }
}
