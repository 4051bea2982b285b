//! Gibbs/GMC functionals of a sampled field, all in natural-log scale.
//!
//! The continuum objects are the partition function
//! `Z_eps(beta) = integral of exp(beta X_eps(x)) over [-1,1]^d`, the
//! normalized GMC mass `M = integral of exp(beta X - beta^2 Var/2)`, the
//! moment ratio `Z(q beta)/Z(beta)^q`, the participation sum
//! `sum_i w_i^q` of Gibbs weights, and singular integrals against
//! `(|x-u| + eps)^{-s}`. On a fixed-`eps` grid we adopt the midpoint sum as
//! the definition (the grid resolves the kernel scale by construction) and
//! evaluate everything through log-sum-exp: the exponents grow like
//! `beta^2 q^2 log(1/eps)` and would overflow plain doubles.
//!
//! Every function here is a pure, deterministic function of
//! `(field values, state, parameters)`.

use crate::error::{Error, Result};
use crate::field::{FieldSample, SamplerState};
use crate::stats::log_sum_exp;
use serde::{Deserialize, Serialize};

/// Which functional a [`LogFunctionalValue`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalKind {
    /// `log Z_eps(beta)`.
    LogPartition,
    /// `log M_{beta,eps}` (expectation-normalized mass).
    LogGmcMass,
    /// `log [Z(q beta) / Z(beta)^q]`.
    LogMomentRatio,
    /// `log integral exp(beta X - beta^2 Var/2) (|x-u|+eps)^{-s}`.
    LogSingularIntegral,
    /// `log sum_i w_i^q` of Gibbs weights.
    LogParticipation,
}

/// A functional value in natural-log scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFunctionalValue {
    /// The value, `log` of the underlying positive functional.
    pub value: f64,
    /// Which functional it is.
    pub kind: FunctionalKind,
}

fn check_len(values: &[f64], state: &SamplerState) {
    assert_eq!(
        values.len(),
        state.n_points(),
        "field sample does not match the sampler grid"
    );
}

/// `log h^d`, the log volume element of the midpoint rule.
fn log_cell_volume(state: &SamplerState) -> f64 {
    state.grid().dim() as f64 * state.grid().spacing().ln()
}

/// Slice core of [`log_partition`].
pub fn log_partition_values(values: &[f64], state: &SamplerState, beta: f64) -> f64 {
    check_len(values, state);
    let exps: Vec<f64> = values.iter().map(|&x| beta * x).collect();
    log_sum_exp(&exps) + log_cell_volume(state)
}

/// `log Z_eps(beta) = log sum_i h^d exp(beta X(r_i))`.
pub fn log_partition(field: &FieldSample, state: &SamplerState, beta: f64) -> LogFunctionalValue {
    LogFunctionalValue {
        value: log_partition_values(&field.values, state, beta),
        kind: FunctionalKind::LogPartition,
    }
}

/// Slice core of [`log_gmc_mass`].
pub fn log_gmc_mass_values(values: &[f64], state: &SamplerState, beta: f64) -> f64 {
    check_len(values, state);
    let half_b2 = 0.5 * beta * beta;
    let exps: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &x)| beta * x - half_b2 * state.variance(i))
        .collect();
    log_sum_exp(&exps) + log_cell_volume(state)
}

/// `log M = log sum_i h^d exp(beta X(r_i) - beta^2 Var(X(r_i))/2)`. The mean
/// of `exp` of this over field samples is exactly `2^d` (each summand is an
/// expectation-normalized lognormal times the cell volume).
pub fn log_gmc_mass(field: &FieldSample, state: &SamplerState, beta: f64) -> LogFunctionalValue {
    LogFunctionalValue {
        value: log_gmc_mass_values(&field.values, state, beta),
        kind: FunctionalKind::LogGmcMass,
    }
}

/// Slice core of [`log_moment_ratio`].
pub fn log_moment_ratio_values(values: &[f64], state: &SamplerState, beta: f64, q: f64) -> f64 {
    log_partition_values(values, state, q * beta) - q * log_partition_values(values, state, beta)
}

/// `log [Z_eps(q beta) / Z_eps(beta)^q]`, the moment-ratio functional whose
/// `eps` scaling defines the quenched and annealed exponents. Shift-invariant
/// in the field (adding a constant to `X` cancels).
pub fn log_moment_ratio(
    field: &FieldSample,
    state: &SamplerState,
    beta: f64,
    q: f64,
) -> LogFunctionalValue {
    LogFunctionalValue {
        value: log_moment_ratio_values(&field.values, state, beta, q),
        kind: FunctionalKind::LogMomentRatio,
    }
}

/// Slice core of [`participation_sum`].
pub fn participation_sum_values(values: &[f64], beta: f64, q: f64) -> f64 {
    let scaled: Vec<f64> = values.iter().map(|&x| beta * x).collect();
    let log_z = log_sum_exp(&scaled);
    let scaled_q: Vec<f64> = values.iter().map(|&x| q * beta * x).collect();
    log_sum_exp(&scaled_q) - q * log_z
}

/// `log sum_i w_i^q` where `w_i = exp(beta X_i)/sum_j exp(beta X_j)` are the
/// Gibbs weights of the grid cells: the log probability that `q` independent
/// Gibbs samples land in the same cell (for integer `q`). Always `<= 0`;
/// equals `(1-q) log N` iff the field is constant. The cell volume cancels,
/// so no state is needed.
pub fn participation_sum(field: &FieldSample, beta: f64, q: f64) -> LogFunctionalValue {
    LogFunctionalValue {
        value: participation_sum_values(&field.values, beta, q),
        kind: FunctionalKind::LogParticipation,
    }
}

/// Root-decomposed moment-ratio integrand: `log [ |D| e^{q beta X(u)} /
/// Z_eps(beta)^q ]` with `|D| = (n h)^d` the domain volume.
///
/// Writing the numerator of the moment ratio as a sum over grid cells,
/// `Z(q beta) = sum_u h^d e^{q beta X(u)}`, gives
/// `Z(q beta)/Z(beta)^q = avg_u [ |D| e^{q beta X(u)} / Z(beta)^q ]`
/// exactly, so the mean of `exp` of this value over a uniformly drawn root
/// `u` (and over field samples) equals the mean of
/// `exp(log_moment_ratio)`. Pinning the root is what lets a Cameron-Martin
/// tilt *at `u`* cancel the integrand's leading exponential: the combined
/// `exp(q beta X(u) + log_is_weight)` fluctuates like
/// `(1 - c) q beta X(u)` instead of two independent exponentials.
pub fn log_rooted_moment_ratio_values(
    values: &[f64],
    state: &SamplerState,
    beta: f64,
    q: f64,
    u_index: usize,
) -> f64 {
    check_len(values, state);
    let log_domain = (values.len() as f64).ln() + log_cell_volume(state);
    log_domain + q * beta * values[u_index] - q * log_partition_values(values, state, beta)
}

/// Root-decomposed participation integrand: `log [ N w_u^q ]` with `w_u` the
/// Gibbs weight of cell `u` and `N` the number of cells. The average over a
/// uniform root `u` recovers `exp(participation_sum)` exactly, mirroring
/// [`log_rooted_moment_ratio_values`].
pub fn rooted_participation_values(values: &[f64], beta: f64, q: f64, u_index: usize) -> f64 {
    let scaled: Vec<f64> = values.iter().map(|&x| beta * x).collect();
    let log_z = log_sum_exp(&scaled);
    (values.len() as f64).ln() + q * (beta * values[u_index] - log_z)
}

/// Slice core of [`log_singular_integral`].
pub fn log_singular_integral_values(
    values: &[f64],
    state: &SamplerState,
    beta: f64,
    s: f64,
    u_index: usize,
) -> f64 {
    check_len(values, state);
    assert!(s >= 0.0, "singular exponent s must be >= 0");
    assert!(u_index < state.n_points(), "u_index out of range");
    let half_b2 = 0.5 * beta * beta;
    let eps = state.eps();
    let grid = state.grid();
    let exps: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            beta * x - half_b2 * state.variance(i) - s * (grid.distance(i, u_index) + eps).ln()
        })
        .collect();
    log_sum_exp(&exps) + log_cell_volume(state)
}

/// `log sum_i h^d exp(beta X_i - beta^2 Var_i / 2) (|r_i - u| + eps)^{-s}`:
/// the GMC mass weighted by a singular kernel centred at grid point `u`. At
/// `i = u` the distance is 0 and the weight is `eps^{-s}` — finite thanks to
/// the cutoff, retained exactly. With `s = 0` this is bit-identical to
/// [`log_gmc_mass`].
pub fn log_singular_integral(
    field: &FieldSample,
    state: &SamplerState,
    beta: f64,
    s: f64,
    u_index: usize,
) -> LogFunctionalValue {
    LogFunctionalValue {
        value: log_singular_integral_values(&field.values, state, beta, s, u_index),
        kind: FunctionalKind::LogSingularIntegral,
    }
}

/// Slice core of [`sup_increment`]. `values` must come from `state`'s grid.
pub fn sup_increment_values(
    values: &[f64],
    state: &SamplerState,
    box_width: f64,
) -> Result<f64> {
    check_len(values, state);
    let grid = state.grid();
    let h = grid.spacing();
    if !(box_width > h) {
        return Err(Error::InvalidParameter(format!(
            "box_width {box_width} must exceed the fine grid spacing {h}"
        )));
    }
    let ratio = box_width / h;
    let m = ratio.round();
    if (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "box width {box_width} is not an integer multiple of the spacing {h}"
        )));
    }
    let m = m as usize;
    if m % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "boxes of {m} cells have no center grid point; use an odd cells-per-box count"
        )));
    }
    let n = grid.n_per_side();
    if n % m != 0 {
        return Err(Error::InvalidParameter(format!(
            "{m}-cell boxes do not tile a {n}-per-side grid"
        )));
    }
    let boxes = n / m;
    let half = (m - 1) / 2;
    let mut sup = 0.0f64;
    match grid.dim() {
        1 => {
            for b in 0..boxes {
                let center = values[b * m + half];
                for i in b * m..(b + 1) * m {
                    sup = sup.max((values[i] - center).abs());
                }
            }
        }
        _ => {
            for by in 0..boxes {
                for bx in 0..boxes {
                    let center = values[(by * m + half) * n + bx * m + half];
                    for iy in by * m..(by + 1) * m {
                        for ix in bx * m..(bx + 1) * m {
                            sup = sup.max((values[iy * n + ix] - center).abs());
                        }
                    }
                }
            }
        }
    }
    Ok(sup)
}

/// Maximum over boxes of width `box_width` (tiling `[-1,1]^d`) of the largest
/// absolute deviation of fine-grid values from the value at the box-center
/// grid point: the discrete `sup_i sup_{v in B_i} |X(v) - X(r_i)|` statistic.
/// The box width must be an odd multiple of the fine spacing that tiles the
/// grid, so each box has an exact center point.
pub fn sup_increment(field: &FieldSample, state: &SamplerState, box_width: f64) -> Result<f64> {
    sup_increment_values(&field.values, state, box_width)
}
