//! Reconstruction from a single excitation: the source term
//! Y = ∇ln σ·∇φ is expanded in disc eigenfunctions and truncated.

use super::dataset::ElectrodeDataset;
use super::green::{boundary_harmonic, green_neumann_disc, DiscEigenbasis};
use crate::specfun::{bessel_j, DiscQuadrature};
use crate::{par, Error, Result};
use std::f64::consts::PI;

/// Trapezoid projections (2π/N) Σ_e f(θ_e) u_l^j(θ_e) for j = 1, 2.
fn project_pair(values: &[f64], angles: &[f64], l: u32) -> [f64; 2] {
    let h = 2.0 * PI / angles.len() as f64;
    let mut out = [0.0; 2];
    for (v, &t) in values.iter().zip(angles) {
        out[0] += v * boundary_harmonic(l, 1, t);
        out[1] += v * boundary_harmonic(l, 2, t);
    }
    [out[0] * h, out[1] * h]
}

fn excitation(dataset: &ElectrodeDataset, k: usize) -> Result<&super::dataset::Excitation> {
    dataset.excitations.get(k).ok_or_else(|| {
        Error::Parameter(format!(
            "excitation {k} requested, dataset has {}",
            dataset.excitations.len()
        ))
    })
}

/// Harmonic extension of the Neumann data:
/// ψ = ⟨φ⟩ + Σ_l Σ_j (1/l) I_l^j r^l u_l^j(θ).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPart {
    pub mean: f64,
    /// current[l-1] = [I_l^1, I_l^2].
    pub current: Vec<[f64; 2]>,
}

impl HarmonicPart {
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        let mut s = self.mean;
        let mut rl = 1.0;
        for (k, c) in self.current.iter().enumerate() {
            let l = k as u32 + 1;
            rl *= r;
            s += rl / l as f64 * (c[0] * boundary_harmonic(l, 1, theta) + c[1] * boundary_harmonic(l, 2, theta));
        }
        s
    }
}

pub fn harmonic_part(dataset: &ElectrodeDataset, k: usize, l_max: u32) -> Result<HarmonicPart> {
    let ex = excitation(dataset, k)?;
    let angles = &dataset.electrode_angles;
    let mean = ex.potential.iter().sum::<f64>() / ex.potential.len() as f64;
    let current = (1..=l_max).map(|l| project_pair(&ex.current, angles, l)).collect();
    Ok(HarmonicPart { mean, current })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct YTerm {
    l: u32,
    j: u8,
    zero: f64,
    amplitude: f64,
}

/// Truncated eigenfunction expansion of Y.
#[derive(Debug, Clone, PartialEq)]
pub struct YReconstruction {
    pub l_max: u32,
    pub m_max: usize,
    terms: Vec<YTerm>,
}

impl YReconstruction {
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * bessel_j(t.l, t.zero * r) * boundary_harmonic(t.l, t.j, theta))
            .sum()
    }

    pub fn sample(&self, quad: &DiscQuadrature) -> Vec<f64> {
        par::map_range(quad.len(), |k| self.eval(quad.r[k], quad.theta[k]))
    }

    /// Values on the ring of radius r at `n` equally spaced angles.
    pub fn ring(&self, r: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                (t, self.eval(r, t))
            })
            .collect()
    }
}

/// Y_reg = Σ_{l≤L} Σ_{m≤M} Σ_j (φ_l^j − I_l^j/l)/σ_lm v_lm^j.
pub fn single_recon_y(
    dataset: &ElectrodeDataset,
    k: usize,
    basis: &DiscEigenbasis,
    l_max: u32,
    m_max: usize,
) -> Result<YReconstruction> {
    if l_max == 0 || m_max == 0 {
        return Err(Error::Parameter("truncation limits must be >= 1".into()));
    }
    basis.check(l_max, m_max)?;
    let ex = excitation(dataset, k)?;
    let angles = &dataset.electrode_angles;
    let mut terms = Vec::new();
    for l in 1..=l_max {
        let phi = project_pair(&ex.potential, angles, l);
        let cur = project_pair(&ex.current, angles, l);
        for m in 1..=m_max {
            let li = l as usize - 1;
            let s = basis.signed_singular_value(l, m);
            for j in 0..2 {
                let data = phi[j] - cur[j] / l as f64;
                terms.push(YTerm {
                    l,
                    j: j as u8 + 1,
                    zero: basis.zeros[li][m - 1],
                    amplitude: data / s * basis.normalization[li][m - 1],
                });
            }
        }
    }
    Ok(YReconstruction { l_max, m_max, terms })
}

/// φ_reg(x) = ψ(x) + Σ_k w_k G_N(x, x_k) Y(x_k) at polar points (r, θ).
/// An evaluation point that hits a quadrature node is moved by half an
/// angular cell.
pub fn single_recon_phi(
    y_samples: &[f64],
    psi: &HarmonicPart,
    quad: &DiscQuadrature,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    if y_samples.len() != quad.len() {
        return Err(Error::Input(format!(
            "{} samples for {} quadrature points",
            y_samples.len(),
            quad.len()
        )));
    }
    let per_ring = quad.r.iter().filter(|&&r| r == quad.r[0]).count().max(1);
    let half_cell = PI / per_ring as f64;
    par::map_slice(points, |&(r, theta)| {
        let mut t = theta;
        let hits = |t: f64| {
            (0..quad.len()).any(|k| {
                let d2 = r * r + quad.r[k] * quad.r[k] - 2.0 * r * quad.r[k] * (t - quad.theta[k]).cos();
                d2 <= 1e-24
            })
        };
        if hits(t) {
            log::warn!("evaluation point ({r}, {theta}) coincides with a quadrature node; shifting by half a cell");
            t += half_cell;
        }
        let mut s = psi.eval(r, t);
        for k in 0..quad.len() {
            if y_samples[k] != 0.0 {
                s += quad.weights[k] * green_neumann_disc(r, t, quad.r[k], quad.theta[k])? * y_samples[k];
            }
        }
        Ok(s)
    })
    .into_iter()
    .collect()
}
