//! Second-kind Fredholm equations u(x) − λ ∫ K(x,t) u(t) dt = f(x) on a
//! quadrature grid.

use crate::quad::{composite_gauss_legendre, Rule};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Condition estimates above this flag a characteristic value.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Kernel samples K(x_i, t_j) on a quadrature grid.
#[derive(Debug, Clone)]
pub struct SampledKernel {
    pub values: DMatrix<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SampledKernel {
    /// Sample `k` on a composite Gauss-Legendre grid of [a, b].
    pub fn from_fn<F: Fn(f64, f64) -> f64>(k: F, a: f64, b: f64, order: usize, panels: usize) -> Self {
        let Rule { nodes, weights } = composite_gauss_legendre(order, panels, a, b);
        let n = nodes.len();
        let values = DMatrix::from_fn(n, n, |i, j| k(nodes[i], nodes[j]));
        Self { values, nodes, weights }
    }

    pub fn new(values: DMatrix<f64>, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if values.shape() != (n, n) || weights.len() != n {
            return Err(Error::Input(format!(
                "kernel {:?} does not match a grid of {} nodes",
                values.shape(),
                n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("kernel has non-finite entries".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Input("quadrature weights must be positive".into()));
        }
        Ok(Self { values, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// (K W v)_i = Σ_j K_ij w_j v_j.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.values[(i, j)] * self.weights[j] * v[j]).sum())
            .collect()
    }

    /// Iterated kernel K⁽²⁾(x,t) = ∫ K(x,s) K(s,t) ds by quadrature.
    pub fn iterated(&self) -> DMatrix<f64> {
        let n = self.len();
        let kw = DMatrix::from_fn(n, n, |i, j| self.values[(i, j)] * self.weights[j]);
        kw * &self.values
    }
}

fn check_len(f: &[f64], n: usize) -> Result<()> {
    if f.len() != n {
        return Err(Error::Input(format!("right-hand side has {} samples, grid has {n}", f.len())));
    }
    Ok(())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve (I − λ K W) u = f.
pub fn nystrom_solve(kernel: &SampledKernel, f: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = kernel.len();
    check_len(f, n)?;
    if lambda == 0.0 {
        return Ok(f.to_vec());
    }
    let sys = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - lambda * kernel.values[(i, j)] * kernel.weights[j]
    });
    let sv = sys.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > CONDITION_LIMIT {
        return Err(Error::Characteristic {
            lambda,
            detail: format!("condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:e}"),
        });
    }
    let u = sys
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(f))
        .ok_or_else(|| Error::Characteristic { lambda, detail: "singular system".into() })?;
    let u: Vec<f64> = u.iter().copied().collect();
    let ku = kernel.apply(&u);
    let res = u
        .iter()
        .zip(&ku)
        .zip(f)
        .map(|((u, k), f)| (u - lambda * k - f).abs())
        .fold(0.0, f64::max);
    let scale = sup_norm(f).max(f64::MIN_POSITIVE);
    if res > 1e-10 * scale {
        // One step of iterative refinement.
        let r: Vec<f64> = u.iter().zip(&ku).zip(f).map(|((u, k), f)| f - (u - lambda * k)).collect();
        let du = sys
            .lu()
            .solve(&DVector::from_vec(r))
            .ok_or_else(|| Error::Characteristic { lambda, detail: "singular system".into() })?;
        return Ok(u.iter().zip(du.iter()).map(|(a, b)| a + b).collect());
    }
    Ok(u)
}

/// Solve u = f + λ ∫ Σ_i a_i(x) b_i(t) u(t) dt through the p×p system for
/// c_i = ∫ b_i u.
pub fn degenerate_solve(
    a_parts: &[Vec<f64>],
    b_parts: &[Vec<f64>],
    weights: &[f64],
    f: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    let p = a_parts.len();
    let n = weights.len();
    if p == 0 || b_parts.len() != p {
        return Err(Error::Input("need p >= 1 matching a/b parts".into()));
    }
    check_len(f, n)?;
    if a_parts.iter().chain(b_parts).any(|v| v.len() != n) {
        return Err(Error::Input("kernel parts must be sampled on the quadrature grid".into()));
    }
    let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).zip(weights).map(|((a, b), w)| a * b * w).sum() };
    let sys = DMatrix::from_fn(p, p, |m, i| {
        let d = if m == i { 1.0 } else { 0.0 };
        d - lambda * dot(&b_parts[m], &a_parts[i])
    });
    let rhs = DVector::from_fn(p, |m, _| dot(&b_parts[m], f));
    let sv = sys.singular_values();
    if sv.min() <= 1e-14 * sv.max().max(1.0) {
        return Err(Error::Characteristic { lambda, detail: "reduced system is singular".into() });
    }
    let c = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Characteristic { lambda, detail: "reduced system is singular".into() })?;
    let mut u = f.to_vec();
    for (i, a) in a_parts.iter().enumerate() {
        for (ui, ai) in u.iter_mut().zip(a) {
            *ui += lambda * ai * c[i];
        }
    }
    Ok(u)
}

/// Partial Neumann sum and its convergence state.
#[derive(Debug, Clone)]
pub struct NeumannResult {
    pub u: Vec<f64>,
    pub converged: bool,
    /// Sup norms of the individual terms λ^k (KW)^k f.
    pub term_norms: Vec<f64>,
}

/// u_N = Σ_{k<N} λ^k (KW)^k f.
pub fn neumann_series_solve(kernel: &SampledKernel, f: &[f64], lambda: f64, n_terms: usize) -> Result<NeumannResult> {
    check_len(f, kernel.len())?;
    if n_terms == 0 {
        return Err(Error::Parameter("need at least one term".into()));
    }
    let mut term = f.to_vec();
    let mut u = f.to_vec();
    let mut norms = vec![sup_norm(&term)];
    for _ in 1..n_terms {
        term = kernel.apply(&term).into_iter().map(|v| lambda * v).collect();
        for (ui, ti) in u.iter_mut().zip(&term) {
            *ui += ti;
        }
        norms.push(sup_norm(&term));
        if norms.last().is_some_and(|v| !v.is_finite()) {
            break;
        }
    }
    let ratios: Vec<f64> = norms
        .windows(2)
        .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect();
    let tail = &ratios[ratios.len().saturating_sub(5)..];
    let converged = norms.iter().all(|v| v.is_finite()) && tail.iter().all(|&r| r < 1.0);
    Ok(NeumannResult { u, converged, term_norms: norms })
}

/// Characteristic values λ_i (reciprocals of operator eigenvalues) and
/// eigenfunctions orthonormal under the quadrature weights.
#[derive(Debug, Clone)]
pub struct SymmetricEigensystem {
    pub characteristic_values: Vec<f64>,
    /// Columns are φ_i on the grid.
    pub eigenfunctions: DMatrix<f64>,
    pub weights: Vec<f64>,
}

/// Eigen-decomposition of a symmetric sampled kernel; operator eigenvalues
/// below 1e-12 of the largest are dropped.
pub fn symmetric_eigensystem(kernel: &SampledKernel) -> Result<SymmetricEigensystem> {
    let n = kernel.len();
    let asym = (&kernel.values - kernel.values.transpose()).abs().max();
    if asym > 1e-12 * kernel.values.abs().max().max(1.0) {
        return Err(Error::Input(format!("kernel is not symmetric (max defect {asym:e})")));
    }
    let sw: Vec<f64> = kernel.weights.iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| sw[i] * kernel.values[(i, j)] * sw[j]);
    let eig = m.symmetric_eigen();
    let kmax = eig.eigenvalues.abs().max();
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() > 1e-12 * kmax).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let phi = DMatrix::from_fn(n, idx.len(), |i, c| eig.eigenvectors[(i, idx[c])] / sw[i]);
    Ok(SymmetricEigensystem {
        characteristic_values: idx.iter().map(|&i| 1.0 / eig.eigenvalues[i]).collect(),
        eigenfunctions: phi,
        weights: kernel.weights.clone(),
    })
}

impl SymmetricEigensystem {
    fn check_pole(&self, lambda: f64) -> Result<()> {
        for &li in &self.characteristic_values {
            if (lambda - li).abs() <= 1e-8 * li.abs() {
                return Err(Error::Characteristic {
                    lambda,
                    detail: format!("pole at characteristic value {li}"),
                });
            }
        }
        Ok(())
    }

    /// Components (φ_i, f) and the sup norm of the unexpanded remainder.
    pub fn expand(&self, f: &[f64]) -> (Vec<f64>, f64) {
        let comps: Vec<f64> = (0..self.characteristic_values.len())
            .map(|i| {
                self.eigenfunctions
                    .column(i)
                    .iter()
                    .zip(f)
                    .zip(&self.weights)
                    .map(|((p, v), w)| p * v * w)
                    .sum()
            })
            .collect();
        let mut rest = f.to_vec();
        for (i, c) in comps.iter().enumerate() {
            for (r, p) in rest.iter_mut().zip(self.eigenfunctions.column(i).iter()) {
                *r -= c * p;
            }
        }
        (comps, sup_norm(&rest))
    }
}

/// Resolvent kernel 𝒦(x,t;λ) = K + λ Σ φ_i(x)φ_i(t) / (λ_i(λ_i − λ)).
pub fn resolvent_symmetric(eig: &SymmetricEigensystem, base: &SampledKernel, lambda: f64) -> Result<SampledKernel> {
    eig.check_pole(lambda)?;
    let n = base.len();
    let mut values = base.values.clone();
    for (i, &li) in eig.characteristic_values.iter().enumerate() {
        let c = lambda / (li * (li - lambda));
        let phi = eig.eigenfunctions.column(i);
        for r in 0..n {
            for s in 0..n {
                values[(r, s)] += c * phi[r] * phi[s];
            }
        }
    }
    Ok(SampledKernel { values, nodes: base.nodes.clone(), weights: base.weights.clone() })
}

/// u = f + λ ∫ 𝒦 f.
pub fn resolvent_apply(resolvent: &SampledKernel, f: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_len(f, resolvent.len())?;
    Ok(f.iter().zip(resolvent.apply(f)).map(|(a, b)| a + lambda * b).collect())
}

/// Solution of the eigen-expansion u = f + λ Σ f_i/(λ_i − λ) φ_i, with the
/// sup norm of the part of f outside the stored modes.
pub fn symmetric_eigensolution(eig: &SymmetricEigensystem, f: &[f64], lambda: f64) -> Result<(Vec<f64>, f64)> {
    check_len(f, eig.weights.len())?;
    eig.check_pole(lambda)?;
    let (comps, residual) = eig.expand(f);
    let mut u = f.to_vec();
    for (i, (&li, &fi)) in eig.characteristic_values.iter().zip(&comps).enumerate() {
        let c = lambda * fi / (li - lambda);
        for (ui, p) in u.iter_mut().zip(eig.eigenfunctions.column(i).iter()) {
            *ui += c * p;
        }
    }
    Ok((u, residual))
}
