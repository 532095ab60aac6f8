//! SVD filters for discretized first-kind problems and rules for picking
//! the regularization parameter.
//!
//! An operator is given by kernel samples `K[i][j]` on an image grid `x_i`
//! and an object grid `t_j`, together with quadrature weights on both
//! grids: `(A f)(x_i) = Σ_j K_ij w_j f(t_j)`, with inner products
//! `(g, h)_Y = Σ_i ω_i g_i h_i` and `(f, h)_X = Σ_j w_j f_j h_j`.

use crate::{par, Error, Result};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Singular values below this fraction of σ₁ are treated as null space.
pub const NULL_CUTOFF: f64 = 1e-12;
const BRACKET_LO: f64 = 1e-14;
const BRACKET_HI: f64 = 1e6;
const BISECTION_STEPS: usize = 200;
const BISECTION_RTOL: f64 = 1e-6;

/// Discrete singular system of a weighted sampled kernel.
#[derive(Debug, Clone)]
pub struct SvdSystem {
    /// Retained singular values, nonincreasing and positive.
    pub singular_values: Vec<f64>,
    /// Columns are u_j sampled on the image grid.
    pub left_modes: DMatrix<f64>,
    /// Columns are v_j sampled on the object grid.
    pub right_modes: DMatrix<f64>,
    pub image_weights: Vec<f64>,
    pub object_weights: Vec<f64>,
    pub image_null_dim: usize,
    pub object_null_dim: usize,
}

/// Mode components of a data vector plus the part orthogonal to all modes.
#[derive(Debug, Clone)]
pub struct Projection {
    pub components: Vec<f64>,
    pub perp_norm_sq: f64,
}

/// A filtered solution with its diagnostics.
#[derive(Debug, Clone)]
pub struct RegularizedSolution {
    pub coefficients: Vec<f64>,
    pub field_values: Vec<f64>,
    pub lambda: f64,
    pub discrepancy: f64,
    pub energy: f64,
    pub filter: Vec<f64>,
}

fn check_weights(w: &[f64], what: &str) -> Result<()> {
    if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Input(format!("{what} weights must be positive and finite")));
    }
    Ok(())
}

/// Singular system of the operator defined by `kernel` and the two weight
/// vectors.
pub fn svd_of_kernel(
    kernel: &DMatrix<f64>,
    image_weights: &[f64],
    object_weights: &[f64],
) -> Result<SvdSystem> {
    let (m, n) = kernel.shape();
    if image_weights.len() != m || object_weights.len() != n {
        return Err(Error::Input(format!(
            "kernel is {m}x{n} but weights have lengths {} and {}",
            image_weights.len(),
            object_weights.len()
        )));
    }
    if kernel.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("kernel has non-finite entries".into()));
    }
    check_weights(image_weights, "image")?;
    check_weights(object_weights, "object")?;

    let si: Vec<f64> = image_weights.iter().map(|w| w.sqrt()).collect();
    let so: Vec<f64> = object_weights.iter().map(|w| w.sqrt()).collect();
    let scaled = DMatrix::from_fn(m, n, |i, j| si[i] * kernel[(i, j)] * so[j]);
    let svd = scaled.svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = order.first().map(|&k| svd.singular_values[k]).unwrap_or(0.0);
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&k| smax > 0.0 && svd.singular_values[k] >= NULL_CUTOFF * smax)
        .collect();
    let r = kept.len();
    let left = DMatrix::from_fn(m, r, |i, c| u[(i, kept[c])] / si[i]);
    let right = DMatrix::from_fn(n, r, |j, c| vt[(kept[c], j)] / so[j]);
    Ok(SvdSystem {
        singular_values: kept.iter().map(|&k| svd.singular_values[k]).collect(),
        left_modes: left,
        right_modes: right,
        image_weights: image_weights.to_vec(),
        object_weights: object_weights.to_vec(),
        image_null_dim: m - r,
        object_null_dim: n - r,
    })
}

impl SvdSystem {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn image_len(&self) -> usize {
        self.image_weights.len()
    }

    pub fn object_len(&self) -> usize {
        self.object_weights.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Weighted image norm ‖g‖_Y.
    pub fn image_norm(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(&self.image_weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Components (g, u_j)_Y and the squared norm of the rest of g.
    pub fn project(&self, g: &[f64]) -> Result<Projection> {
        if g.len() != self.image_len() {
            return Err(Error::Input(format!(
                "data has {} samples, image grid has {}",
                g.len(),
                self.image_len()
            )));
        }
        let comps: Vec<f64> = (0..self.rank())
            .map(|j| {
                self.left_modes
                    .column(j)
                    .iter()
                    .zip(g)
                    .zip(&self.image_weights)
                    .map(|((u, v), w)| u * v * w)
                    .sum()
            })
            .collect();
        let mut perp = g.to_vec();
        for (j, c) in comps.iter().enumerate() {
            for (p, u) in perp.iter_mut().zip(self.left_modes.column(j).iter()) {
                *p -= c * u;
            }
        }
        let perp_norm_sq = perp
            .iter()
            .zip(&self.image_weights)
            .map(|(v, w)| w * v * v)
            .sum();
        Ok(Projection { components: comps, perp_norm_sq })
    }

    /// Σ_j c_j v_j on the object grid.
    pub fn synthesize(&self, coefficients: &[f64]) -> Vec<f64> {
        let n = self.object_len();
        let mut f = vec![0.0; n];
        for (j, &c) in coefficients.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (fi, v) in f.iter_mut().zip(self.right_modes.column(j).iter()) {
                *fi += c * v;
            }
        }
        f
    }

    /// Build a solution from per-mode values U(σ_j²) of a window.
    fn filtered(&self, proj: &Projection, lambda: f64, window: impl Fn(usize, f64) -> f64) -> RegularizedSolution {
        let mut coefficients = Vec::with_capacity(self.rank());
        let mut filter = Vec::with_capacity(self.rank());
        let mut disc_sq = proj.perp_norm_sq;
        let mut energy_sq = 0.0;
        for (j, (&s, &c)) in self.singular_values.iter().zip(&proj.components).enumerate() {
            let u = window(j, s * s);
            let coef = s * u * c;
            let w = s * s * u;
            coefficients.push(coef);
            filter.push(w);
            disc_sq += ((1.0 - w) * c).powi(2);
            energy_sq += coef * coef;
        }
        let field_values = self.synthesize(&coefficients);
        RegularizedSolution {
            coefficients,
            field_values,
            lambda,
            discrepancy: disc_sq.max(0.0).sqrt(),
            energy: energy_sq.sqrt(),
            filter,
        }
    }
}

/// Minimal-norm least-squares solution f⁺.
pub fn generalized_solve(svd: &SvdSystem, g: &[f64]) -> Result<RegularizedSolution> {
    let proj = svd.project(g)?;
    Ok(svd.filtered(&proj, 0.0, |_, mu| 1.0 / mu))
}

/// One row of the Picard table.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardRow {
    pub sigma: f64,
    pub component: f64,
    pub ratio: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    pub rows: Vec<PicardRow>,
    /// First mode whose ratio |(g,u_j)|/σ_j exceeds the threshold.
    pub first_exceeding: Option<usize>,
}

/// Per-mode ratios |(g,u_j)|/σ_j with the running sum of their squares.
pub fn picard_diagnostics(svd: &SvdSystem, g: &[f64], threshold: f64) -> Result<PicardReport> {
    let proj = svd.project(g)?;
    let mut cumulative = 0.0;
    let mut first_exceeding = None;
    let rows = svd
        .singular_values
        .iter()
        .zip(&proj.components)
        .enumerate()
        .map(|(j, (&s, &c))| {
            let ratio = c.abs() / s;
            cumulative += ratio * ratio;
            if first_exceeding.is_none() && ratio > threshold {
                first_exceeding = Some(j);
            }
            PicardRow { sigma: s, component: c.abs(), ratio, cumulative }
        })
        .collect();
    Ok(PicardReport { rows, first_exceeding })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "lambda must be positive and finite, got {lambda}; use generalized_solve for lambda = 0"
        )));
    }
    Ok(())
}

/// Tikhonov solution with filter σ²/(σ²+λ).
pub fn tikhonov_solve(svd: &SvdSystem, g: &[f64], lambda: f64) -> Result<RegularizedSolution> {
    check_lambda(lambda)?;
    let proj = svd.project(g)?;
    Ok(svd.filtered(&proj, lambda, |_, mu| 1.0 / (mu + lambda)))
}

/// Tikhonov solution from the normal equations (A*A + λI) f = A*g,
/// bypassing the SVD. Returns the solution samples and a condition
/// estimate of the symmetric system matrix.
pub fn tikhonov_direct_solve(
    kernel: &DMatrix<f64>,
    image_weights: &[f64],
    object_weights: &[f64],
    g: &[f64],
    lambda: f64,
) -> Result<(Vec<f64>, f64)> {
    check_lambda(lambda)?;
    let (m, n) = kernel.shape();
    if image_weights.len() != m || object_weights.len() != n || g.len() != m {
        return Err(Error::Input("dimension mismatch in direct Tikhonov solve".into()));
    }
    check_weights(image_weights, "image")?;
    check_weights(object_weights, "object")?;
    // Symmetric form: (W K^T Ω K W + λ W) f = W K^T Ω g.
    let wk = DMatrix::from_fn(m, n, |i, j| image_weights[i].sqrt() * kernel[(i, j)] * object_weights[j]);
    let mut sys = wk.transpose() * &wk;
    for j in 0..n {
        sys[(j, j)] += lambda * object_weights[j];
    }
    let rhs = nalgebra::DVector::from_fn(n, |j, _| {
        object_weights[j] * (0..m).map(|i| kernel[(i, j)] * image_weights[i] * g[i]).sum::<f64>()
    });
    let chol = sys
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("normal-equation matrix not positive definite".into()))?;
    let l = chol.l();
    let diag: Vec<f64> = (0..n).map(|j| l[(j, j)]).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = (dmax / dmin).powi(2);
    let f = chol.solve(&rhs);
    Ok((f.iter().copied().collect(), cond))
}

/// Truncation rule for TSVD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep modes with σ² ≥ λ.
    Lambda(f64),
    /// Keep the first J modes.
    Count(usize),
}

/// Truncated SVD solution.
pub fn tsvd_solve(svd: &SvdSystem, g: &[f64], truncation: Truncation) -> Result<RegularizedSolution> {
    match truncation {
        Truncation::Lambda(lambda) => {
            if !(lambda >= 0.0) {
                return Err(Error::Parameter(format!("cutoff must be >= 0, got {lambda}")));
            }
            spectral_window_solve(svd, g, &SpectralWindow::step(lambda))
        }
        Truncation::Count(count) => {
            let proj = svd.project(g)?;
            let lambda = if count == 0 {
                f64::INFINITY
            } else if count >= svd.rank() {
                0.0
            } else {
                svd.singular_values[count - 1].powi(2)
            };
            Ok(svd.filtered(&proj, lambda, |j, mu| if j < count { 1.0 / mu } else { 0.0 }))
        }
    }
}

/// Window shapes U_λ(μ).
#[derive(Clone)]
pub enum WindowKind {
    /// U(μ) = 1/(μ+λ).
    Tikhonov,
    /// U(μ) = 1/μ for μ ≥ λ, 0 below.
    Step,
    /// U(μ) = 1/μ everywhere.
    Unregularized,
    /// Arbitrary U(μ) for the stored λ.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowKind::Tikhonov => write!(f, "Tikhonov"),
            WindowKind::Step => write!(f, "Step"),
            WindowKind::Unregularized => write!(f, "Unregularized"),
            WindowKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A spectral regularizer R_λ = U_λ(A*A) A*.
#[derive(Debug, Clone)]
pub struct SpectralWindow {
    pub kind: WindowKind,
    pub lambda: f64,
}

impl SpectralWindow {
    pub fn tikhonov(lambda: f64) -> Self {
        Self { kind: WindowKind::Tikhonov, lambda }
    }

    pub fn step(lambda: f64) -> Self {
        Self { kind: WindowKind::Step, lambda }
    }

    pub fn unregularized() -> Self {
        Self { kind: WindowKind::Unregularized, lambda: 0.0 }
    }

    pub fn custom<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(lambda: f64, u: F) -> Self {
        Self { kind: WindowKind::Custom(Arc::new(u)), lambda }
    }

    /// U_λ(μ).
    pub fn eval(&self, mu: f64) -> f64 {
        match &self.kind {
            WindowKind::Tikhonov => 1.0 / (mu + self.lambda),
            WindowKind::Step => {
                if mu >= self.lambda {
                    1.0 / mu
                } else {
                    0.0
                }
            }
            WindowKind::Unregularized => 1.0 / mu,
            WindowKind::Custom(u) => u(mu, self.lambda),
        }
    }

    /// W_λ(μ) = μ U_λ(μ).
    pub fn filter(&self, mu: f64) -> f64 {
        mu * self.eval(mu)
    }
}

/// Solution with coefficients σ_j U_λ(σ_j²) (g, u_j).
pub fn spectral_window_solve(
    svd: &SvdSystem,
    g: &[f64],
    window: &SpectralWindow,
) -> Result<RegularizedSolution> {
    for &s in &svd.singular_values {
        let w = window.filter(s * s);
        if !(-1e-12..=1.0 + 1e-12).contains(&w) || !w.is_finite() {
            return Err(Error::Parameter(format!(
                "window filter {w} outside [0, 1] at sigma = {s}"
            )));
        }
    }
    let proj = svd.project(g)?;
    Ok(svd.filtered(&proj, window.lambda, |_, mu| window.eval(mu)))
}

/// Strategy for choosing λ.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaStrategy {
    Discrepancy { epsilon: f64 },
    Energy { bound: f64 },
    Miller { epsilon: f64, bound: f64 },
    LCurve { grid: Vec<f64> },
}

/// Chosen λ with the Tikhonov diagnostics at that λ.
#[derive(Debug, Clone)]
pub struct LambdaChoice {
    pub lambda: f64,
    pub discrepancy: f64,
    pub energy: f64,
    pub iterations: usize,
    /// Discrete curvature per grid point (L-curve only).
    pub curvature: Vec<f64>,
}

fn tikhonov_norms(svd: &SvdSystem, proj: &Projection, lambda: f64) -> (f64, f64) {
    let mut d = proj.perp_norm_sq;
    let mut e = 0.0;
    for (&s, &c) in svd.singular_values.iter().zip(&proj.components) {
        let mu = s * s;
        d += (lambda / (mu + lambda) * c).powi(2);
        e += (s / (mu + lambda) * c).powi(2);
    }
    (d.max(0.0).sqrt(), e.sqrt())
}

/// Bisection in log λ for an increasing function `h` hitting `target`.
fn log_bisect<F: Fn(f64) -> f64>(h: F, target: f64, lo: f64, hi: f64) -> Result<(f64, usize)> {
    let (hlo, hhi) = (h(lo), h(hi));
    let tol = BISECTION_RTOL * target.abs().max(f64::MIN_POSITIVE);
    if target < hlo - tol || target > hhi + tol {
        return Err(Error::Unattainable { target, lo: hlo, hi: hhi });
    }
    if (target - hlo).abs() <= tol {
        return Ok((lo, 0));
    }
    if (target - hhi).abs() <= tol {
        return Ok((hi, 0));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for it in 1..=BISECTION_STEPS {
        let m = 0.5 * (a + b);
        let v = h(m.exp());
        if (v - target).abs() <= tol {
            return Ok((m.exp(), it));
        }
        if v < target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(((0.5 * (a + b)).exp(), BISECTION_STEPS))
}

/// Pick λ for Tikhonov regularization.
pub fn choose_lambda(svd: &SvdSystem, g: &[f64], strategy: &LambdaStrategy) -> Result<LambdaChoice> {
    let proj = svd.project(g)?;
    let s1sq = svd.sigma_max().powi(2);
    let (lo, hi) = (BRACKET_LO * s1sq, BRACKET_HI * s1sq);
    let finish = |lambda: f64, iterations: usize, curvature: Vec<f64>| {
        let (d, e) = tikhonov_norms(svd, &proj, lambda);
        LambdaChoice { lambda, discrepancy: d, energy: e, iterations, curvature }
    };
    match strategy {
        LambdaStrategy::Discrepancy { epsilon } => {
            if !(*epsilon > 0.0) {
                return Err(Error::Parameter("discrepancy needs epsilon > 0".into()));
            }
            if s1sq == 0.0 {
                return Err(Error::Numerical("operator has no nonzero singular values".into()));
            }
            let (l, it) = log_bisect(|l| tikhonov_norms(svd, &proj, l).0, *epsilon, lo, hi)?;
            Ok(finish(l, it, vec![]))
        }
        LambdaStrategy::Energy { bound } => {
            if !(*bound > 0.0) {
                return Err(Error::Parameter("energy rule needs E > 0".into()));
            }
            if s1sq == 0.0 {
                return Err(Error::Numerical("operator has no nonzero singular values".into()));
            }
            // Energy decreases with λ, so bisect on its negative.
            let (l, it) = log_bisect(|l| -tikhonov_norms(svd, &proj, l).1, -*bound, lo, hi).map_err(
                |e| match e {
                    Error::Unattainable { target, lo, hi } => {
                        Error::Unattainable { target: -target, lo: -hi, hi: -lo }
                    }
                    other => other,
                },
            )?;
            Ok(finish(l, it, vec![]))
        }
        LambdaStrategy::Miller { epsilon, bound } => {
            if !(*epsilon > 0.0 && *bound > 0.0) {
                return Err(Error::Parameter("Miller rule needs epsilon > 0 and E > 0".into()));
            }
            Ok(finish((epsilon / bound).powi(2), 0, vec![]))
        }
        LambdaStrategy::LCurve { grid } => {
            let (index, curvature) = lcurve_corner(svd, &proj, grid)?;
            let mut sorted = grid.clone();
            sorted.sort_by(f64::total_cmp);
            Ok(finish(sorted[index], 0, curvature))
        }
    }
}

/// Signed three-point curvature of a polyline; NaN at endpoints and at
/// degenerate triples.
pub fn discrete_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![f64::NAN; n];
    for i in 1..n.saturating_sub(1) {
        let (ax, ay) = (x[i] - x[i - 1], y[i] - y[i - 1]);
        let (bx, by) = (x[i + 1] - x[i], y[i + 1] - y[i]);
        let (cx, cy) = (x[i + 1] - x[i - 1], y[i + 1] - y[i - 1]);
        let denom = (ax.hypot(ay)) * (bx.hypot(by)) * (cx.hypot(cy));
        if denom > 0.0 && denom.is_finite() {
            k[i] = 2.0 * (ax * by - ay * bx) / denom;
        }
    }
    k
}

fn lcurve_corner(svd: &SvdSystem, proj: &Projection, grid: &[f64]) -> Result<(usize, Vec<f64>)> {
    if grid.len() < 8 || grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Parameter("L-curve needs at least 8 positive lambda values".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (xs, ys): (Vec<f64>, Vec<f64>) = sorted
        .iter()
        .map(|&l| {
            let (d, e) = tikhonov_norms(svd, proj, l);
            (d.ln(), e.ln())
        })
        .unzip();
    let k = discrete_curvature(&xs, &ys);
    let mut best: Option<usize> = None;
    for (i, &v) in k.iter().enumerate() {
        if v.is_finite() && v > 0.0 && best.is_none_or(|b| v > k[b]) {
            best = Some(i);
        }
    }
    match best {
        Some(i) => Ok((i, k)),
        None => Err(Error::Numerical("no corner: L-curve has no positive curvature".into())),
    }
}

/// One row of a λ sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub discrepancy: f64,
    pub energy: f64,
    pub solution: Vec<f64>,
}

/// Tikhonov solutions over a grid of λ, ordered by λ.
pub fn lambda_sweep(svd: &SvdSystem, g: &[f64], grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Parameter("lambda grid is empty".into()));
    }
    for &l in grid {
        check_lambda(l)?;
    }
    let proj = svd.project(g)?;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(par::map_slice(&sorted, |&lambda| {
        let s = svd.filtered(&proj, lambda, |_, mu| 1.0 / (mu + lambda));
        SweepRow {
            lambda,
            discrepancy: s.discrepancy,
            energy: s.energy,
            solution: s.field_values,
        }
    }))
}

/// Logarithmically spaced grid with `n` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Apply the discretized operator: (A f)(x_i) = Σ_j K_ij w_j f_j.
pub fn apply_operator(kernel: &DMatrix<f64>, object_weights: &[f64], f: &[f64]) -> Vec<f64> {
    (0..kernel.nrows())
        .map(|i| {
            (0..kernel.ncols())
                .map(|j| kernel[(i, j)] * object_weights[j] * f[j])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_system(s: &[f64]) -> SvdSystem {
        let n = s.len();
        let k = DMatrix::from_fn(n, n, |i, j| if i == j { s[i] } else { 0.0 });
        svd_of_kernel(&k, &vec![1.0; n], &vec![1.0; n]).unwrap()
    }

    #[test]
    fn tsvd_threshold_counts_modes() {
        let svd = diag_system(&[2.0, 1.0, 0.1]);
        let sol = tsvd_solve(&svd, &[1.0, 1.0, 1.0], Truncation::Lambda(0.5)).unwrap();
        let kept = sol.coefficients.iter().filter(|c| **c != 0.0).count();
        assert_eq!(kept, 2);
    }

    #[test]
    fn lambda_must_be_positive() {
        let svd = diag_system(&[1.0]);
        assert!(tikhonov_solve(&svd, &[1.0], 0.0).is_err());
        assert!(tikhonov_solve(&svd, &[1.0], -1.0).is_err());
    }

    #[test]
    fn zero_kernel_gives_empty_system() {
        let k = DMatrix::zeros(3, 2);
        let svd = svd_of_kernel(&k, &[1.0; 3], &[1.0; 2]).unwrap();
        assert_eq!(svd.rank(), 0);
        assert_eq!(svd.object_null_dim, 2);
        assert_eq!(svd.image_null_dim, 3);
    }

    #[test]
    fn curvature_of_a_left_turn_is_positive() {
        let k = discrete_curvature(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]);
        assert!(k[1] > 0.0);
    }
}
