//! Neumann Green's function of the unit disc and its eigenfunctions.

use crate::specfun::{bessel_j, bessel_jprime_zeros};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Orthonormal boundary harmonics: j = 1 → sin(lθ)/√π, j = 2 → cos(lθ)/√π.
pub fn boundary_harmonic(l: u32, j: u8, theta: f64) -> f64 {
    let a = l as f64 * theta;
    let s = if j == 1 { a.sin() } else { a.cos() };
    s / PI.sqrt()
}

/// Signed labelling of the same harmonics: i > 0 → sin(|i|θ), i < 0 → cos(|i|θ).
pub fn signed_harmonic(i: i32, theta: f64) -> f64 {
    boundary_harmonic(i.unsigned_abs(), if i > 0 { 1 } else { 2 }, theta)
}

/// Eigenfunctions C_lm J_l(j*_lm r) u_l^j(θ) of the Neumann Laplacian on the
/// disc and the singular values of the map from the disc to the boundary.
#[derive(Debug, Clone)]
pub struct DiscEigenbasis {
    pub max_l: u32,
    pub max_m: usize,
    /// zeros[l-1][m-1] = j*_lm.
    pub zeros: Vec<Vec<f64>>,
    pub normalization: Vec<Vec<f64>>,
    /// |C_lm J_l(j*_lm)| / j*_lm².
    pub singular_values: Vec<Vec<f64>>,
    /// Sign of J_l(j*_lm), carried separately so the singular values stay positive.
    pub signs: Vec<Vec<f64>>,
}

impl DiscEigenbasis {
    pub fn new(max_l: u32, max_m: usize) -> Result<Self> {
        if max_l == 0 || max_m == 0 {
            return Err(Error::Parameter("eigenbasis needs max_l, max_m >= 1".into()));
        }
        let mut b = DiscEigenbasis {
            max_l,
            max_m,
            zeros: Vec::new(),
            normalization: Vec::new(),
            singular_values: Vec::new(),
            signs: Vec::new(),
        };
        for l in 1..=max_l {
            let z = bessel_jprime_zeros(l, max_m).zeros;
            let lf = l as f64;
            let mut c = Vec::with_capacity(max_m);
            let mut s = Vec::with_capacity(max_m);
            let mut sg = Vec::with_capacity(max_m);
            for &x in &z {
                let jl = bessel_j(l, x);
                let norm = (2.0 / (1.0 - lf * lf / (x * x))).sqrt() / jl.abs();
                c.push(norm);
                s.push(norm * jl.abs() / (x * x));
                sg.push(jl.signum());
            }
            b.zeros.push(z);
            b.normalization.push(c);
            b.singular_values.push(s);
            b.signs.push(sg);
        }
        Ok(b)
    }

    pub fn zero(&self, l: u32, m: usize) -> f64 {
        self.zeros[l as usize - 1][m - 1]
    }

    pub fn eigenvalue(&self, l: u32, m: usize) -> f64 {
        self.zero(l, m).powi(2)
    }

    /// Signed boundary coefficient C_lm J_l(j*_lm)/λ_lm.
    pub fn signed_singular_value(&self, l: u32, m: usize) -> f64 {
        self.signs[l as usize - 1][m - 1] * self.singular_values[l as usize - 1][m - 1]
    }

    pub fn check(&self, l: u32, m: usize) -> Result<()> {
        if l == 0 || l > self.max_l || m == 0 || m > self.max_m {
            return Err(Error::Parameter(format!(
                "mode ({l},{m}) outside basis ({}, {})",
                self.max_l, self.max_m
            )));
        }
        Ok(())
    }
}

/// v_lm^j(r, θ).
pub fn disc_eigenfunction(l: u32, m: usize, j: u8, r: f64, theta: f64, basis: &DiscEigenbasis) -> Result<f64> {
    basis.check(l, m)?;
    let li = l as usize - 1;
    Ok(basis.normalization[li][m - 1] * bessel_j(l, basis.zeros[li][m - 1] * r) * boundary_harmonic(l, j, theta))
}

/// Closed-form Neumann function of the unit disc.
pub fn green_neumann_disc(r: f64, theta: f64, rp: f64, thetap: f64) -> Result<f64> {
    let c = (theta - thetap).cos();
    let d1 = r * r + rp * rp - 2.0 * r * rp * c;
    let d2 = 1.0 + r * r * rp * rp - 2.0 * r * rp * c;
    if d1 <= 1e-28 {
        return Err(Error::Domain(format!(
            "Green's function is singular at coincident points ({r}, {theta})"
        )));
    }
    Ok(-(d1.ln() + d2.ln()) / (4.0 * PI))
}

/// Boundary values in closed form: −(1/π) ln(2 sin(Δ/2)).
pub fn boundary_green_closed(delta: f64) -> Result<f64> {
    let s = (0.5 * delta).sin().abs();
    if s < 1e-14 {
        return Err(Error::Domain("boundary Green's function is singular at Δ = 0".into()));
    }
    Ok(-(2.0 * s).ln() / PI)
}

/// Σ_{l≤L} Σ_j (1/l) u_l^j(θ) u_l^j(θ′) = (1/π) Σ cos(lΔ)/l, plus the leading
/// term of the tail Σ_{l>L} obtained by summation by parts,
/// Re[e^{i(L+1)Δ} / ((L+1)(1 − e^{iΔ}))]. The plain partial sum converges
/// only like 1/(L sin(Δ/2)).
pub fn boundary_green_series(delta: f64, l_max: u32) -> f64 {
    let mut s = 0.0;
    for l in 1..=l_max {
        s += (l as f64 * delta).cos() / l as f64;
    }
    let denom_re = 1.0 - delta.cos();
    let denom_im = -delta.sin();
    let d2 = denom_re * denom_re + denom_im * denom_im;
    if d2 > 1e-300 {
        let a = (l_max + 1) as f64 * delta;
        let (nr, ni) = (a.cos(), a.sin());
        // Real part of (nr + i ni) / (denom_re + i denom_im).
        s += (nr * denom_re + ni * denom_im) / d2 / (l_max + 1) as f64;
    }
    s / PI
}

/// Σ_{m≤M} 2/(j*_lm² − l²), which tends to 1/l.
pub fn green_sum_identity(l: u32, m_max: usize) -> f64 {
    let lf = l as f64;
    bessel_jprime_zeros(l, m_max)
        .zeros
        .iter()
        .map(|z| 2.0 / (z * z - lf * lf))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonics_are_normalized() {
        assert!((boundary_harmonic(2, 2, 0.0) - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert_eq!(signed_harmonic(3, 0.3), boundary_harmonic(3, 1, 0.3));
        assert_eq!(signed_harmonic(-3, 0.3), boundary_harmonic(3, 2, 0.3));
    }

    #[test]
    fn singular_values_positive_and_decreasing() {
        let b = DiscEigenbasis::new(6, 5).unwrap();
        for row in &b.singular_values {
            assert!(row.iter().all(|&s| s > 0.0));
            assert!(row.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn closed_form_matches_diagonal_limit_on_boundary() {
        let g = green_neumann_disc(1.0, 0.0, 1.0, PI).unwrap();
        assert!((g + 2f64.ln() / PI).abs() < 1e-14);
        assert!(green_neumann_disc(0.3, 0.2, 0.3, 0.2).is_err());
    }
}
