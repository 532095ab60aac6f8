//! The functional χ²_L + μ χ²_R over spectral functions, assembled once per
//! (dataset, model, corridor) and then evaluated for many condensate values.
//!
//! With M the χ²_R metric, M = L Lᵀ, and B the Γ_L-weighted dispersion
//! matrix, the minimiser is f = f_exp + L⁻ᵀ y where y solves the Tikhonov
//! problem for G = B L⁻ᵀ. The SVD of G is computed once, after which
//! χ²_R(μ) and χ²_L(μ) are sums over singular components.

use super::corridor::ErrorCorridor;
use super::data::{chi_exp2, quadratic_form, residual_metric, SpectralDataset};
use super::qcd::{dispersion_kernel, qcd_prediction_tilde_f, ChannelModel, Condensates, TailConfig};
use crate::fredholm::{nystrom_solve, SampledKernel};
use crate::quad::gauss_legendre_on;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

const MAX_NODES: usize = 1024;
const NODE_RTOL: f64 = 1e-6;
const MU_FLOOR: f64 = 1e-20;
const MU_CEIL: f64 = 1e6;
const CALIBRATION_RTOL: f64 = 1e-4;

/// Γ_L quadrature with the corridor weights folded in.
#[derive(Debug, Clone)]
struct Nodes {
    z: Vec<f64>,
    /// √(ω_k w_L(z_k) / |Γ_L|).
    sqrt_w: Vec<f64>,
    /// (1/π) K(z_k, s_j) h_j.
    dispersion: DMatrix<f64>,
}

fn build_nodes(n: usize, dataset: &SpectralDataset, model: &ChannelModel, corridor: &ErrorCorridor) -> Result<Nodes> {
    let rule = gauss_legendre_on(n, corridor.s_lo, corridor.s_hi);
    let len = corridor.length();
    let mut sqrt_w = Vec::with_capacity(n);
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        sqrt_w.push((w * corridor.weight(z, model)? / len).sqrt());
    }
    let h = &dataset.widths;
    let dispersion = DMatrix::from_fn(n, dataset.len(), |k, j| {
        dispersion_kernel(model.channel, rule.nodes[k], dataset.s[j]) * h[j] / PI
    });
    Ok(Nodes { z: rule.nodes, sqrt_w, dispersion })
}

/// F̃ at the nodes as base + Σ_d O_d · slope_d.
#[derive(Debug, Clone)]
struct AffinePrediction {
    base: Vec<f64>,
    slopes: Vec<(u32, Vec<f64>)>,
}

fn affine_prediction(z: &[f64], model: &ChannelModel, tail: &TailConfig) -> Result<AffinePrediction> {
    let eval = |o: &Condensates| -> Result<Vec<f64>> {
        z.iter().map(|&s| qcd_prediction_tilde_f(s, o, model, tail)).collect()
    };
    let base = eval(&Condensates::new())?;
    let mut slopes = Vec::new();
    for &d in &model.dims {
        let unit: Condensates = [(d, 1.0)].into_iter().collect();
        let v = eval(&unit)?;
        slopes.push((d, v.iter().zip(&base).map(|(a, b)| a - b).collect()));
    }
    Ok(AffinePrediction { base, slopes })
}

fn chi_l_at(nodes: &Nodes, pred: &[f64], f: &[f64]) -> f64 {
    let af = &nodes.dispersion * DVector::from_column_slice(f);
    nodes
        .sqrt_w
        .iter()
        .zip(pred)
        .zip(af.iter())
        .map(|((w, p), a)| (w * (p - a)).powi(2))
        .sum()
}

/// Outcome of the μ calibration for one set of condensates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub mu: f64,
    pub chi_r: f64,
    pub chi_l: f64,
    /// False when even the weakest data pull keeps χ²_R below χ²_exp; μ is
    /// then the bracket floor.
    pub active: bool,
    pub iterations: usize,
}

/// Singular components of the theory residual for one set of condensates.
#[derive(Debug, Clone)]
struct Components {
    c: Vec<f64>,
    perp_sq: f64,
}

#[derive(Debug, Clone)]
pub struct CondensateProblem {
    pub model: ChannelModel,
    pub corridor: ErrorCorridor,
    pub tail: TailConfig,
    dataset: SpectralDataset,
    nodes: Nodes,
    prediction: AffinePrediction,
    metric: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    chi_exp: f64,
    g_u: DMatrix<f64>,
    g_sv: Vec<f64>,
    g_v: DMatrix<f64>,
}

impl CondensateProblem {
    /// Assemble with the continuum starting at the upper data edge.
    pub fn new(dataset: &SpectralDataset, model: &ChannelModel, corridor: &ErrorCorridor) -> Result<Self> {
        let tail = TailConfig { s_max: dataset.upper_edge(), z_cut: None };
        Self::with_tail(dataset, model, corridor, tail)
    }

    pub fn with_tail(
        dataset: &SpectralDataset,
        model: &ChannelModel,
        corridor: &ErrorCorridor,
        tail: TailConfig,
    ) -> Result<Self> {
        dataset.validate()?;
        model.validate()?;
        corridor.validate()?;

        // Refine Γ_L until χ²_L of the data against the bare prediction settles.
        let mut n = corridor.nodes;
        let mut nodes = build_nodes(n, dataset, model, corridor)?;
        let mut prediction = affine_prediction(&nodes.z, model, &tail)?;
        let mut last = chi_l_at(&nodes, &prediction.base, &dataset.values);
        while n < MAX_NODES {
            let m = 2 * n;
            let finer = build_nodes(m, dataset, model, corridor)?;
            let finer_pred = affine_prediction(&finer.z, model, &tail)?;
            let v = chi_l_at(&finer, &finer_pred.base, &dataset.values);
            let settled = (v - last).abs() <= NODE_RTOL * v.abs().max(f64::MIN_POSITIVE);
            nodes = finer;
            prediction = finer_pred;
            n = m;
            last = v;
            if settled {
                break;
            }
        }
        if n > corridor.nodes {
            log::debug!("Γ_L quadrature refined from {} to {n} nodes", corridor.nodes);
        }

        let metric = residual_metric(dataset)?;
        let chol = metric
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Data("χ²_R metric is not positive definite".into()))?;
        let chol_l = chol.l();
        let chi_exp = chi_exp2(&dataset.covariance)?;
        log::debug!(
            "prefactors: 1/|Γ_exp| = {:.4e}, 1/|Γ_L| = {:.4e}, |Γ_exp|/(π²|Γ_L|) = {:.4e}",
            1.0 / dataset.span(),
            1.0 / corridor.length(),
            dataset.span() / (PI * PI * corridor.length())
        );

        let b = weighted(&nodes);
        // G = B L⁻ᵀ, i.e. Gᵀ = L⁻¹ Bᵀ.
        let gt = chol_l
            .solve_lower_triangular(&b.transpose())
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let g = gt.transpose();
        let svd = g.svd(true, true);
        let u = svd.u.ok_or_else(|| Error::Numerical("SVD without left vectors".into()))?;
        let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD without right vectors".into()))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let smax = svd.singular_values[order[0]];
        if !(smax > 0.0) {
            return Err(Error::Numerical("dispersion operator vanishes on Γ_L".into()));
        }
        let kept: Vec<usize> = order.into_iter().filter(|&k| svd.singular_values[k] > 1e-14 * smax).collect();
        let g_u = DMatrix::from_fn(u.nrows(), kept.len(), |i, c| u[(i, kept[c])]);
        let g_v = DMatrix::from_fn(vt.ncols(), kept.len(), |j, c| vt[(kept[c], j)]);
        let g_sv = kept.iter().map(|&k| svd.singular_values[k]).collect();

        Ok(Self {
            model: model.clone(),
            corridor: *corridor,
            tail,
            dataset: dataset.clone(),
            nodes,
            prediction,
            metric,
            chol_l,
            chi_exp,
            g_u,
            g_sv,
            g_v,
        })
    }

    pub fn dataset(&self) -> &SpectralDataset {
        &self.dataset
    }

    pub fn chi_exp(&self) -> f64 {
        self.chi_exp
    }

    /// Γ_L nodes actually used.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes.z
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.g_sv
    }

    /// F̃_QCD at the Γ_L nodes.
    pub fn tilde_f(&self, o: &Condensates) -> Result<Vec<f64>> {
        let mut out = self.prediction.base.clone();
        for (&d, &v) in o {
            let slope = self
                .prediction
                .slopes
                .iter()
                .find(|(dd, _)| *dd == d)
                .ok_or_else(|| Error::Parameter(format!("dimension {d} is not part of the model")))?;
            for (o, s) in out.iter_mut().zip(&slope.1) {
                *o += v * s;
            }
        }
        Ok(out)
    }

    pub fn chi_l(&self, f: &[f64], o: &Condensates) -> Result<f64> {
        self.check_len(f)?;
        Ok(chi_l_at(&self.nodes, &self.tilde_f(o)?, f))
    }

    pub fn chi_r(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        let d: Vec<f64> = f.iter().zip(&self.dataset.values).map(|(a, b)| a - b).collect();
        Ok(quadratic_form(&self.metric, &d))
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.dataset.len() {
            return Err(Error::Input(format!("{} samples for {} bins", f.len(), self.dataset.len())));
        }
        Ok(())
    }

    /// √W F̃ − B f_exp.
    fn theory_residual(&self, o: &Condensates) -> Result<DVector<f64>> {
        let pred = self.tilde_f(o)?;
        let af = &self.nodes.dispersion * DVector::from_column_slice(&self.dataset.values);
        Ok(DVector::from_iterator(
            pred.len(),
            self.nodes.sqrt_w.iter().zip(&pred).zip(af.iter()).map(|((w, p), a)| w * (p - a)),
        ))
    }

    fn components(&self, o: &Condensates) -> Result<Components> {
        let rr = self.theory_residual(o)?;
        let c = self.g_u.tr_mul(&rr);
        let perp = &rr - &self.g_u * &c;
        Ok(Components { c: c.iter().copied().collect(), perp_sq: perp.norm_squared() })
    }

    fn chi_pair(&self, comp: &Components, mu: f64) -> (f64, f64) {
        let mut r = 0.0;
        let mut l = comp.perp_sq;
        for (&s, &c) in self.g_sv.iter().zip(&comp.c) {
            let d = s * s + mu;
            r += (s * c / d).powi(2);
            l += (mu * c / d).powi(2);
        }
        (r, l)
    }

    /// Minimiser of χ²_L + μ χ²_R at fixed condensates.
    pub fn solve(&self, mu: f64, o: &Condensates) -> Result<Vec<f64>> {
        if !(mu > 0.0) {
            return Err(Error::Parameter(format!("μ = {mu} must be positive")));
        }
        let comp = self.components(o)?;
        let coeffs = DVector::from_iterator(
            self.g_sv.len(),
            self.g_sv.iter().zip(&comp.c).map(|(&s, &c)| s * c / (s * s + mu)),
        );
        let y = &self.g_v * coeffs;
        let delta = self
            .chol_l
            .tr_solve_lower_triangular(&y)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        Ok(self.dataset.values.iter().zip(delta.iter()).map(|(a, b)| a + b).collect())
    }

    /// The same minimiser from the second-kind equation
    /// f = f_exp + λ b + λ K₂ f, λ = 1/μ, by Nyström. Poorly conditioned for
    /// small μ; meant as a cross-check.
    pub fn solve_nystrom(&self, mu: f64, o: &Condensates) -> Result<Vec<f64>> {
        if !(mu > 0.0) {
            return Err(Error::Parameter(format!("μ = {mu} must be positive")));
        }
        let b = weighted(&self.nodes);
        let metric_inv = |m: DMatrix<f64>| -> Result<DMatrix<f64>> {
            let x = self
                .chol_l
                .solve_lower_triangular(&m)
                .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
            self.chol_l
                .tr_solve_lower_triangular(&x)
                .ok_or_else(|| Error::Numerical("triangular solve failed".into()))
        };
        let pred = self.tilde_f(o)?;
        let wp = DVector::from_iterator(pred.len(), self.nodes.sqrt_w.iter().zip(&pred).map(|(w, p)| w * p));
        let rhs = metric_inv(DMatrix::from_column_slice(b.ncols(), 1, b.tr_mul(&wp).as_slice()))?;
        let btb = metric_inv(b.tr_mul(&b))?;
        let h = &self.dataset.widths;
        let n = self.dataset.len();
        let k2 = DMatrix::from_fn(n, n, |i, j| -btb[(i, j)] / h[j]);
        let kernel = SampledKernel::new(k2, self.dataset.s.clone(), h.clone())?;
        let lambda = 1.0 / mu;
        let g: Vec<f64> = self.dataset.values.iter().zip(rhs.iter()).map(|(f, r)| f + lambda * r).collect();
        nystrom_solve(&kernel, &g, lambda)
    }

    /// Bracket of μ searched by the calibration.
    pub fn mu_bracket(&self) -> (f64, f64) {
        let s1 = self.g_sv[0] * self.g_sv[0];
        (MU_FLOOR * s1, MU_CEIL * s1)
    }

    /// χ²_R and χ²_L of the minimiser at μ without forming it.
    pub fn chi_at(&self, mu: f64, o: &Condensates) -> Result<(f64, f64)> {
        Ok(self.chi_pair(&self.components(o)?, mu))
    }

    /// μ with χ²_R[f(μ)] = χ²_exp, by bisection in log μ.
    pub fn calibrate(&self, o: &Condensates) -> Result<Calibration> {
        let comp = self.components(o)?;
        let target = self.chi_exp;
        let (lo, hi) = self.mu_bracket();
        let (r_lo, l_lo) = self.chi_pair(&comp, lo);
        if r_lo <= target {
            return Ok(Calibration { mu: lo, chi_r: r_lo, chi_l: l_lo, active: false, iterations: 0 });
        }
        let (r_hi, _) = self.chi_pair(&comp, hi);
        if r_hi > target {
            return Err(Error::Unattainable { target, lo: r_hi, hi: r_lo });
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for it in 1..=200 {
            let m = 0.5 * (a + b);
            let mu = m.exp();
            let (r, l) = self.chi_pair(&comp, mu);
            if (r - target).abs() < CALIBRATION_RTOL * target {
                return Ok(Calibration { mu, chi_r: r, chi_l: l, active: true, iterations: it });
            }
            if r > target {
                a = m;
            } else {
                b = m;
            }
        }
        Err(Error::Numerical("μ calibration did not converge".into()))
    }

    /// Calibrated solution for one set of condensates.
    pub fn calibrated_solution(&self, o: &Condensates) -> Result<(Calibration, Vec<f64>)> {
        let cal = self.calibrate(o)?;
        Ok((cal, self.solve(cal.mu, o)?))
    }
}

/// B = diag(√W) · dispersion.
fn weighted(nodes: &Nodes) -> DMatrix<f64> {
    let mut b = nodes.dispersion.clone();
    for (k, w) in nodes.sqrt_w.iter().enumerate() {
        b.row_mut(k).scale_mut(*w);
    }
    b
}

/// χ²_L of `f` with Γ_L quadrature doubled from the corridor's node count
/// until the value changes by less than 1e-6 relative.
pub fn chi_l2(
    f: &[f64],
    o: &Condensates,
    model: &ChannelModel,
    corridor: &ErrorCorridor,
    dataset: &SpectralDataset,
) -> Result<f64> {
    if f.len() != dataset.len() {
        return Err(Error::Input(format!("{} samples for {} bins", f.len(), dataset.len())));
    }
    let tail = TailConfig { s_max: dataset.upper_edge(), z_cut: None };
    let value = |n: usize| -> Result<f64> {
        let nodes = build_nodes(n, dataset, model, corridor)?;
        let pred: Vec<f64> =
            nodes.z.iter().map(|&s| qcd_prediction_tilde_f(s, o, model, &tail)).collect::<Result<_>>()?;
        Ok(chi_l_at(&nodes, &pred, f))
    };
    let mut n = corridor.nodes;
    let mut last = value(n)?;
    while n < MAX_NODES {
        n *= 2;
        let v = value(n)?;
        if (v - last).abs() <= NODE_RTOL * v.abs().max(f64::MIN_POSITIVE) {
            return Ok(v);
        }
        last = v;
    }
    Ok(last)
}

/// Minimiser of χ²_L + μ χ²_R (one-off convenience).
pub fn solve_regularized_f(
    mu: f64,
    o: &Condensates,
    dataset: &SpectralDataset,
    model: &ChannelModel,
    corridor: &ErrorCorridor,
) -> Result<Vec<f64>> {
    CondensateProblem::new(dataset, model, corridor)?.solve(mu, o)
}

pub fn calibrate_mu(
    o: &Condensates,
    dataset: &SpectralDataset,
    model: &ChannelModel,
    corridor: &ErrorCorridor,
) -> Result<Calibration> {
    CondensateProblem::new(dataset, model, corridor)?.calibrate(o)
}
