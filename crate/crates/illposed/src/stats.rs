//! χ² density, tail probabilities, Δχ² thresholds and least-squares
//! curvature/covariance.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::{gamma_ur, ln_gamma};

fn check_dof(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    Ok(())
}

/// χ² probability density with `n` degrees of freedom.
pub fn chi2_pdf(z: f64, n: u32) -> Result<f64> {
    check_dof(n)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("chi2 density needs z >= 0, got {z}")));
    }
    let half = 0.5 * n as f64;
    if z == 0.0 {
        return Ok(match n {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        });
    }
    let log = (half - 1.0) * z.ln() - 0.5 * z - ln_gamma(half) - half * std::f64::consts::LN_2;
    Ok(log.exp())
}

/// Upper-tail probability P(χ²_n ≥ chi2).
pub fn p_value(chi2: f64, n: u32) -> Result<f64> {
    check_dof(n)?;
    if !(chi2 >= 0.0) {
        return Err(Error::Domain(format!("chi2 must be >= 0, got {chi2}")));
    }
    if chi2 == 0.0 {
        return Ok(1.0);
    }
    if chi2.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(0.5 * n as f64, 0.5 * chi2).clamp(0.0, 1.0))
}

/// Δχ² enclosing `cl_percent` probability for `m` jointly estimated
/// parameters.
pub fn delta_chi2(cl_percent: f64, m: u32) -> Result<f64> {
    check_dof(m)?;
    if !(cl_percent > 0.0 && cl_percent < 100.0) {
        return Err(Error::Domain(format!("confidence level {cl_percent} not in (0, 100)")));
    }
    let target = 1.0 - cl_percent / 100.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while p_value(hi, m)? > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p_value(mid, m)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Curvature matrix, covariance and parameter errors of a least-squares fit.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub alpha: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    pub sigmas: Vec<f64>,
}

/// α_jk = Σ_i J_ij J_ik / σ_i², V = α⁻¹.
pub fn ls_curvature_covariance(jacobian: &DMatrix<f64>, sigma: &[f64]) -> Result<Curvature> {
    let (n, p) = jacobian.shape();
    if sigma.len() != n {
        return Err(Error::Input(format!("{} errors for {} points", sigma.len(), n)));
    }
    if sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Input("measurement errors must be positive".into()));
    }
    let mut weighted = jacobian.clone();
    for (i, s) in sigma.iter().enumerate() {
        weighted.row_mut(i).scale_mut(1.0 / s);
    }
    let svd = weighted.clone().svd(false, true);
    let smax = svd.singular_values.max();
    let (kmin, smin) = svd.singular_values.argmin();
    if p == 0 || n < p || smin <= 1e-12 * smax {
        let dir = svd
            .v_t
            .as_ref()
            .map(|vt| vt.row(kmin).iter().copied().collect::<Vec<_>>())
            .unwrap_or_default();
        return Err(Error::Numerical(format!("jacobian is rank deficient along {dir:?}")));
    }
    let alpha = weighted.transpose() * &weighted;
    let covariance = alpha
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("curvature matrix not invertible".into()))?;
    let sigmas = (0..p).map(|j| covariance[(j, j)].sqrt()).collect();
    Ok(Curvature { alpha, covariance, sigmas })
}

/// Explicit χ² of a model against data, used to cross-check the curvature.
pub fn chi2_of(residuals: &DVector<f64>, sigma: &[f64]) -> f64 {
    residuals
        .iter()
        .zip(sigma)
        .map(|(r, s)| (r / s).powi(2))
        .sum()
}
