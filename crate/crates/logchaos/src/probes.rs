//! Diagnostic probes for the supporting lemmas: negative moments of the GMC
//! mass, singular-integral moment growth, sup-increment tightness, and
//! pre-freezing q-independence of the participation exponent.
//!
//! Each probe produces an [`EstimateSeries`] with the same ladder/fit
//! machinery as the main estimators; the *claims* under test are slope
//! statements (bounded quantities have slope ~ 0, growth bounds are
//! one-sided with explicit log-factor allowances).

use crate::error::{Error, Result};
use crate::estimators::{
    collect_warnings, estimate_participation, fit_exponent, reduce_log_mean, rung_exponents,
    EpsLadder, EstimateSeries, MethodTag, RunConfig, TiltPolicy,
};
use crate::field::{build_covariance, CovarianceSpec, GridSpec};
use crate::fit::LineFit;
use crate::measure;
use crate::theory::{classify_regime, ModelParams, RegimeLabel};

/// Negative-moment probe: per rung, `log` of the sample mean of
/// `exp(-q_neg * log_gmc_mass)`, i.e. the `-q_neg`-th moment of the
/// normalized mass. The lemma asserts this is bounded by a constant
/// independent of eps for `beta^2 < 2d`, so the fitted slope should be ~ 0.
///
/// `q_neg` is the (positive) moment order and is unrelated to the model's
/// moment ratio order `cfg.params.q`.
pub fn negative_moment_probe(
    cfg: &RunConfig,
    ladder: &EpsLadder,
    q_neg: f64,
) -> Result<EstimateSeries> {
    cfg.validate()?;
    if !(q_neg.is_finite() && q_neg > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "negative-moment order must be positive, got {q_neg}"
        )));
    }
    let two_d = 2.0 * cfg.params.d as f64;
    if cfg.params.beta2 >= two_d {
        return Err(Error::InvalidParameter(format!(
            "negative-moment probe requires beta^2 < 2d = {two_d} (subcritical mass), got {}",
            cfg.params.beta2
        )));
    }
    if cfg.tilt != TiltPolicy::None {
        return Err(Error::InvalidParameter(
            "the negative-moment probe samples untilted fields (left tail, not right)".into(),
        ));
    }
    let beta = cfg.params.beta();
    let mut rungs = Vec::new();
    for (k, state) in ladder.states().iter().enumerate() {
        let t = rung_exponents(state, k, cfg, None, |x, _| {
            -q_neg * measure::log_gmc_mass_values(x, state, beta)
        });
        rungs.push(reduce_log_mean(state.eps(), state.jitter(), &t, cfg.replicas));
    }
    let warnings = collect_warnings(MethodTag::NegativeMoment, &rungs);
    Ok(EstimateSeries {
        method: MethodTag::NegativeMoment,
        params: cfg.params,
        rungs,
        warnings,
    })
}

/// The drift exponent `l = s - d + (beta^2/2)(t - 1)` of the
/// singular-integral moment. Sign determines which bound applies:
/// `l < 0` gives a uniform bound (slope ~ 0), `l >= 0` gives growth at most
/// `eps^{-l t}` times a log factor (slope >= -l t - margin).
pub fn lemma1_drift(params: &ModelParams, s: f64, t: f64) -> f64 {
    s - params.d as f64 + 0.5 * params.beta2 * (t - 1.0)
}

/// Singular-integral probe: per rung, `log` of the sample mean of
/// `exp(t * log_singular_integral(beta, s, u = grid center))`. Returns the
/// series and the drift `l`.
pub fn lemma1_probe(
    cfg: &RunConfig,
    ladder: &EpsLadder,
    s: f64,
    t: f64,
) -> Result<(EstimateSeries, f64)> {
    cfg.validate()?;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "singular exponent s must be positive, got {s}"
        )));
    }
    if !(t.is_finite() && t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "moment order t must lie in (0, 1], got {t}"
        )));
    }
    if cfg.tilt != TiltPolicy::None {
        return Err(Error::InvalidParameter(
            "the singular-integral probe samples untilted fields".into(),
        ));
    }
    let beta = cfg.params.beta();
    let mut rungs = Vec::new();
    for (k, state) in ladder.states().iter().enumerate() {
        let u = state.grid().center_index();
        let tt = rung_exponents(state, k, cfg, None, |x, _| {
            t * measure::log_singular_integral_values(x, state, beta, s, u)
        });
        rungs.push(reduce_log_mean(state.eps(), state.jitter(), &tt, cfg.replicas));
    }
    let warnings = collect_warnings(MethodTag::Lemma1, &rungs);
    Ok((
        EstimateSeries {
            method: MethodTag::Lemma1,
            params: cfg.params,
            rungs,
            warnings,
        },
        lemma1_drift(&cfg.params, s, t),
    ))
}

/// Cells per box side for the sup-increment ladder: boxes of width ~ eps
/// need an odd cell count so each box has a center grid point.
pub const LEMMA2_CELLS_PER_BOX: usize = 3;

/// Build the fine ladder for [`lemma2_probe`]: per rung, a grid with
/// spacing `<= eps/3` whose side is a multiple of 3, so boxes of
/// `box_width = 3 * spacing ~ eps` tile it exactly with a center point each.
pub fn lemma2_ladder(cfg: &RunConfig) -> Result<EpsLadder> {
    cfg.validate()?;
    let g = cfg.resolved_g_const();
    let m = LEMMA2_CELLS_PER_BOX;
    let mut states = Vec::new();
    for (k, &eps) in cfg.eps_values.iter().enumerate() {
        // n = 3 * ceil(2/eps): spacing 2/n <= eps/3, divisible by the box.
        let n = m * (2.0 / eps).ceil() as usize;
        let grid = GridSpec::build_capped(cfg.params.d, n, cfg.max_points)
            .map_err(|e| Error::ResourceLimit(format!("lemma2 rung {k} (eps = {eps}): {e}")))?;
        let spec = CovarianceSpec::new(eps)?.with_g_const(g);
        states.push(build_covariance(grid, &spec)?);
    }
    EpsLadder::from_states(states)
}

/// Sup-increment probe: per rung (on the fine ladder from
/// [`lemma2_ladder`]), `log` of the sample mean of
/// `exp(c_exp * sup_increment)` with `box_width = 3 * spacing ~ eps`. The
/// lemma asserts sub-polynomial growth in `1/eps`, so the fitted slope
/// magnitude should stay below any fixed `kappa` margin.
pub fn lemma2_probe(cfg: &RunConfig, ladder: &EpsLadder, c_exp: f64) -> Result<EstimateSeries> {
    cfg.validate()?;
    if !(c_exp.is_finite() && c_exp >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent multiplier c_exp must be >= 0, got {c_exp}"
        )));
    }
    if cfg.tilt != TiltPolicy::None {
        return Err(Error::InvalidParameter(
            "the sup-increment probe samples untilted fields".into(),
        ));
    }
    let mut rungs = Vec::new();
    for (k, state) in ladder.states().iter().enumerate() {
        let box_width = LEMMA2_CELLS_PER_BOX as f64 * state.grid().spacing();
        // Fail loudly on misaligned grids before burning replicas.
        measure::sup_increment_values(&vec![0.0; state.n_points()], state, box_width)?;
        let t = rung_exponents(state, k, cfg, None, |x, _| {
            c_exp
                * measure::sup_increment_values(x, state, box_width)
                    .expect("alignment checked above")
        });
        rungs.push(reduce_log_mean(state.eps(), state.jitter(), &t, cfg.replicas));
    }
    let warnings = collect_warnings(MethodTag::Lemma2, &rungs);
    Ok(EstimateSeries {
        method: MethodTag::Lemma2,
        params: cfg.params,
        rungs,
        warnings,
    })
}

/// Pre-freezing probe: for each `q` in `q_list`, fit the participation
/// exponent at the config's `(beta^2, d)`. In the Intermediate regime the
/// theory predicts all slopes equal `(2d - beta^2)^2 / (8 beta^2)`,
/// independent of `q` — the returned per-q fits make that testable.
///
/// Every `q` must place `(beta^2, q, d)` in the Intermediate regime.
pub fn prefreezing_probe(
    cfg: &RunConfig,
    ladder: &EpsLadder,
    q_list: &[f64],
) -> Result<Vec<(f64, EstimateSeries, LineFit)>> {
    cfg.validate()?;
    if q_list.is_empty() {
        return Err(Error::InvalidParameter("prefreezing probe needs at least one q".into()));
    }
    let mut out = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let params = ModelParams::new(cfg.params.beta2, q, cfg.params.d)?;
        let regime = classify_regime(&params);
        if regime.label != RegimeLabel::Intermediate {
            return Err(Error::InvalidParameter(format!(
                "pre-freezing requires the Intermediate regime; (beta^2 = {}, q = {q}, d = {}) \
                 is {} (window [{}, {}))",
                params.beta2,
                params.d,
                regime.label.as_str(),
                regime.boundary_pre,
                regime.boundary_freeze
            )));
        }
        let mut cfg_q = cfg.clone();
        cfg_q.params = params;
        let series = estimate_participation(&cfg_q, ladder)?;
        let fit = fit_exponent(&series)?;
        out.push((q, series, fit));
    }
    Ok(out)
}
