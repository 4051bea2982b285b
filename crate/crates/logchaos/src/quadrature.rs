//! Quadrature oracles for small multivariate normal expectations, used as
//! independent ground truth for the comparison inequality harness.
//!
//! Two families:
//!
//! * Tensor Gauss-Hermite for smooth functionals. Nodes and weights come
//!   from the Golub-Welsch construction: the eigenvalues of the symmetric
//!   Jacobi matrix of the (physicists') Hermite polynomials are the nodes,
//!   and `sqrt(pi) * (first eigenvector component)^2` are the weights for
//!   the weight function `exp(-x^2)`. `E[g(Z)]` for `Z ~ N(0, cov)` is
//!   evaluated by the change of variables `Z = L sqrt(2) x` over a tensor
//!   grid. Converges geometrically for analytic `g`, only polynomially for
//!   indicators.
//!
//! * Normal CDFs up to dimension three for indicator events
//!   `P(all Z_i < b_i)`: the error function in 1-d, Plackett's identity
//!   (`dPhi2/drho` is the bivariate density) integrated by Gauss-Legendre
//!   in 2-d, and a conditioning integral over the first coordinate in 3-d.
//!   All accurate to ~1e-12 at moderate correlations — unlike
//!   Gauss-Hermite these are valid oracles for Monte Carlo indicator
//!   estimates at any sample size.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

/// Maximum tensor dimension for the oracle.
pub const MAX_ORACLE_DIM: usize = 3;

/// Maximum quadrature order per axis.
pub const MAX_ORACLE_ORDER: usize = 64;

/// Gauss-Hermite nodes and weights of the given order for the weight
/// function `exp(-x^2)` (so `sum w_i = sqrt(pi)`). Nodes ascend.
pub fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 || order > MAX_ORACLE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "quadrature order must lie in 1..={MAX_ORACLE_ORDER}, got {order}"
        )));
    }
    // Jacobi matrix: zero diagonal, off-diagonal b_k = sqrt(k/2).
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let first = eig.eigenvectors[(0, i)];
            (node, sqrt_pi * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// `E[f(Z)]` for `Z ~ N(0, cov)` by tensor Gauss-Hermite quadrature,
/// `cov` at most 3 x 3 and positive definite. Exact ground truth for smooth
/// `f`; for indicators the error decays only polynomially in the order, so
/// callers comparing against Monte Carlo should keep the MC stderr above
/// the quadrature bias.
pub fn expect_gauss_hermite<F>(cov: &DMatrix<f64>, order: usize, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = cov.nrows();
    if n == 0 || n > MAX_ORACLE_DIM || cov.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "oracle covariance must be square with 1..={MAX_ORACLE_DIM} rows, got {n} x {}",
            cov.ncols()
        )));
    }
    let chol = Cholesky::new(cov.clone()).ok_or_else(|| {
        Error::Numerical("oracle covariance is not positive definite".into())
    })?;
    let l = chol.unpack();
    let (nodes, weights) = gauss_hermite(order)?;
    let norm = std::f64::consts::PI.powf(-(n as f64) / 2.0);
    let sqrt2 = std::f64::consts::SQRT_2;

    let mut idx = vec![0usize; n];
    let mut z = vec![0.0f64; n];
    let mut total = 0.0;
    loop {
        // z = L * (sqrt(2) * x[idx]); n <= 3, unrolled small matvec.
        for i in 0..n {
            let mut acc = 0.0;
            for (j, &ij) in idx.iter().enumerate().take(i + 1) {
                acc += l[(i, j)] * sqrt2 * nodes[ij];
            }
            z[i] = acc;
        }
        let w: f64 = idx.iter().map(|&i| weights[i]).product();
        total += w * f(&z);

        // Advance the multi-index.
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(norm * total);
            }
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Closed-form bivariate orthant probability
/// `P(Z_1 < 0, Z_2 < 0) = 1/4 + arcsin(rho) / (2 pi)` for unit-variance
/// correlated normals.
pub fn orthant_prob_bivariate(rho: f64) -> f64 {
    0.25 + rho.asin() / (2.0 * std::f64::consts::PI)
}

/// Arguments beyond this are saturated before evaluating normal CDFs —
/// `Phi` is exactly 0/1 in doubles far earlier, and the clamp keeps
/// intermediate `inf - inf` out of the bivariate density.
const CDF_ARG_CLAMP: f64 = 40.0;

/// Gauss-Legendre order used inside the bivariate / trivariate CDFs.
const CDF_GL_ORDER: usize = 48;

/// Standard normal CDF (double precision via the complementary error
/// function, accurate in both tails).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gauss-Legendre nodes on `[-1, 1]` and weights summing to 2, by the
/// Golub-Welsch construction (Jacobi off-diagonal `k / sqrt(4k^2 - 1)`).
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 || order > MAX_ORACLE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "quadrature order must lie in 1..={MAX_ORACLE_ORDER}, got {order}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let first = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// Standardized bivariate normal density at `(h, k)` with correlation `r`.
fn bivariate_normal_pdf(h: f64, k: f64, r: f64) -> f64 {
    let omr2 = 1.0 - r * r;
    (-(h * h - 2.0 * r * h * k + k * k) / (2.0 * omr2)).exp()
        / (2.0 * std::f64::consts::PI * omr2.sqrt())
}

/// Standardized bivariate normal CDF `P(Z_1 < h, Z_2 < k)` with
/// correlation `rho`, via Plackett's identity: the derivative of the CDF
/// in `rho` is the bivariate density, so integrate it from the independent
/// case with Gauss-Legendre. Accurate to ~1e-12 for `|rho| <= 0.95`.
pub fn bivariate_normal_cdf(h: f64, k: f64, rho: f64) -> Result<f64> {
    if h.is_nan() || k.is_nan() {
        return Err(Error::InvalidParameter("CDF arguments must not be NaN".into()));
    }
    if !(rho.is_finite() && rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "correlation must lie in [-1, 1], got {rho}"
        )));
    }
    let h = h.clamp(-CDF_ARG_CLAMP, CDF_ARG_CLAMP);
    let k = k.clamp(-CDF_ARG_CLAMP, CDF_ARG_CLAMP);
    // Degenerate correlations: comonotone / antithetic pairs.
    if rho == 1.0 {
        return Ok(normal_cdf(h.min(k)));
    }
    if rho == -1.0 {
        return Ok((normal_cdf(h) + normal_cdf(k) - 1.0).max(0.0));
    }
    let (nodes, weights) = gauss_legendre(CDF_GL_ORDER)?;
    let half = rho / 2.0;
    let correction: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            let r = half * (x + 1.0);
            w * half * bivariate_normal_pdf(h, k, r)
        })
        .sum();
    Ok(normal_cdf(h) * normal_cdf(k) + correction)
}

/// Standardized trivariate normal CDF `P(Z_i < b_i, i = 1..3)` for the
/// correlation triple `(r12, r13, r23)`, by conditioning on the first
/// coordinate: `Phi3 = Int phi(x) Phi2(h(x), k(x); rho_c) dx` over
/// `x < b_1`, evaluated with composite Gauss-Legendre panels.
pub fn trivariate_normal_cdf(b: [f64; 3], r12: f64, r13: f64, r23: f64) -> Result<f64> {
    for r in [r12, r13, r23] {
        if !(r.is_finite() && r.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "trivariate correlations must lie strictly inside (-1, 1), got {r}"
            )));
        }
    }
    if b.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("CDF arguments must not be NaN".into()));
    }
    let b1 = b[0].clamp(-CDF_ARG_CLAMP, CDF_ARG_CLAMP);
    let s12 = (1.0 - r12 * r12).sqrt();
    let s13 = (1.0 - r13 * r13).sqrt();
    // Conditional correlation of (Z_2, Z_3) given Z_1; clamp away rounding
    // excursions outside [-1, 1] for nearly singular triples.
    let rho_c = ((r23 - r12 * r13) / (s12 * s13)).clamp(-1.0, 1.0);

    let hi = b1.min(8.5);
    let lo = -8.5;
    if hi <= lo {
        return Ok(0.0);
    }
    let (nodes, weights) = gauss_legendre(CDF_GL_ORDER)?;
    let panels = ((hi - lo) / 2.0).ceil() as usize;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let mid = a + width / 2.0;
        let scale = width / 2.0;
        for (&x, &w) in nodes.iter().zip(&weights) {
            let t = mid + scale * x;
            let h = (b[1] - r12 * t) / s12;
            let k = (b[2] - r13 * t) / s13;
            total += w * scale * normal_pdf(t) * bivariate_normal_cdf(h, k, rho_c)?;
        }
    }
    Ok(total)
}

/// `P(all Z_i < x)` for `Z ~ N(0, cov)` with `cov` positive definite and at
/// most 3 x 3 — the exact oracle for Slepian-type indicator events.
pub fn sup_below_prob(cov: &DMatrix<f64>, x: f64) -> Result<f64> {
    let n = cov.nrows();
    if n == 0 || n > MAX_ORACLE_DIM || cov.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "oracle covariance must be square with 1..={MAX_ORACLE_DIM} rows, got {n} x {}",
            cov.ncols()
        )));
    }
    if Cholesky::new(cov.clone()).is_none() {
        return Err(Error::Numerical(
            "oracle covariance is not positive definite".into(),
        ));
    }
    let sd: Vec<f64> = (0..n).map(|i| cov[(i, i)].sqrt()).collect();
    let b: Vec<f64> = (0..n).map(|i| x / sd[i]).collect();
    let rho = |i: usize, j: usize| cov[(i, j)] / (sd[i] * sd[j]);
    match n {
        1 => Ok(normal_cdf(b[0])),
        2 => bivariate_normal_cdf(b[0], b[1], rho(0, 1)),
        _ => trivariate_normal_cdf([b[0], b[1], b[2]], rho(0, 1), rho(0, 2), rho(1, 2)),
    }
}
