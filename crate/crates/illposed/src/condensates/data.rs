//! Binned spectral data with covariance, and the χ² norms built from it.

use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, Dyn};

/// Relative diagonal jitter added before inverting a covariance.
pub const COVARIANCE_JITTER: f64 = 1e-12;

/// Spectral function samples on a bin grid with their covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDataset {
    /// Bin centres (GeV²), strictly increasing.
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub covariance: DMatrix<f64>,
    /// Bin widths h_i.
    pub widths: Vec<f64>,
}

/// Edges at midpoints between centres, outer bins mirrored about their centres.
fn widths_from_centres(s: &[f64]) -> Result<Vec<f64>> {
    let n = s.len();
    if n < 2 {
        return Err(Error::Data("bin widths need at least two centres; pass them explicitly".into()));
    }
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(s[0] - 0.5 * (s[1] - s[0]));
    for w in s.windows(2) {
        edges.push(0.5 * (w[0] + w[1]));
    }
    edges.push(s[n - 1] + 0.5 * (s[n - 1] - s[n - 2]));
    Ok(edges.windows(2).map(|e| e[1] - e[0]).collect())
}

impl SpectralDataset {
    pub fn new(s: Vec<f64>, values: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let widths = widths_from_centres(&s)?;
        Self::with_widths(s, values, covariance, widths)
    }

    pub fn with_widths(s: Vec<f64>, values: Vec<f64>, covariance: DMatrix<f64>, widths: Vec<f64>) -> Result<Self> {
        let d = Self { s, values, covariance, widths };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.s.len();
        if n == 0 {
            return Err(Error::Data("empty spectral dataset".into()));
        }
        if self.values.len() != n || self.widths.len() != n || self.covariance.shape() != (n, n) {
            return Err(Error::Data(format!(
                "{n} bins, {} values, covariance {:?}",
                self.values.len(),
                self.covariance.shape()
            )));
        }
        if self.widths.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Data("bin widths must be positive".into()));
        }
        if self.s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("bin centres must be strictly increasing".into()));
        }
        if !(self.lower_edge() > 0.0) {
            return Err(Error::Data(format!("data must start above s = 0, lower edge {}", self.lower_edge())));
        }
        if self.values.iter().chain(self.covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite entries in dataset".into()));
        }
        let scale = self.covariance.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (self.covariance[(i, j)] - self.covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Data(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let trace = self.covariance.trace();
        let min_ev = self.covariance.clone().symmetric_eigenvalues().min();
        if min_ev < -1e-10 * trace {
            return Err(Error::Data(format!("covariance has eigenvalue {min_ev:e} (trace {trace:e})")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn bin_widths(&self) -> Vec<f64> {
        self.widths.clone()
    }

    pub fn lower_edge(&self) -> f64 {
        self.s[0] - 0.5 * self.widths[0]
    }

    pub fn upper_edge(&self) -> f64 {
        let n = self.s.len();
        self.s[n - 1] + 0.5 * self.widths[n - 1]
    }

    /// |Γ_exp| = s_max − s_0.
    pub fn span(&self) -> f64 {
        self.widths.iter().sum()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.covariance.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

/// Cholesky factor of V + jitter·tr(V)/N·I.
fn jittered_cholesky(v: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let n = v.nrows();
    let jitter = COVARIANCE_JITTER * v.trace() / n as f64;
    let mut m = v.clone();
    for i in 0..n {
        m[(i, i)] += jitter;
    }
    m.cholesky().ok_or_else(|| Error::Data("covariance is singular after jitter".into()))
}

pub fn inverse_covariance(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = jittered_cholesky(v)?.inverse();
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("covariance inverse is not finite".into()));
    }
    Ok(inv)
}

/// χ²_exp = (1/N) Σ_ij √(V_ii V_jj) V⁻¹_ij.
pub fn chi_exp2(v: &DMatrix<f64>) -> Result<f64> {
    let n = v.nrows();
    if n == 0 || v.ncols() != n {
        return Err(Error::Data("covariance must be square and nonempty".into()));
    }
    let inv = inverse_covariance(v)?;
    let d: Vec<f64> = v.diagonal().iter().map(|x| x.max(0.0).sqrt()).collect();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += d[i] * d[j] * inv[(i, j)];
        }
    }
    Ok(sum / n as f64)
}

/// Quadratic form M of χ²_R[f] = (f − f_exp)ᵀ M (f − f_exp) with
/// M_ij = √(h_i h_j) V⁻¹_ij / |Γ_exp|.
pub fn residual_metric(dataset: &SpectralDataset) -> Result<DMatrix<f64>> {
    let inv = inverse_covariance(&dataset.covariance)?;
    let h = dataset.bin_widths();
    let span = dataset.span();
    let n = dataset.len();
    Ok(DMatrix::from_fn(n, n, |i, j| (h[i] * h[j]).sqrt() * inv[(i, j)] / span))
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, d: &[f64]) -> f64 {
    let n = d.len();
    let mut sum = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * d[j];
        }
        sum += d[i] * row;
    }
    sum
}

/// χ²_R of a candidate spectral function against the data.
pub fn chi_r2(f: &[f64], dataset: &SpectralDataset) -> Result<f64> {
    if f.len() != dataset.len() {
        return Err(Error::Input(format!("{} samples for {} bins", f.len(), dataset.len())));
    }
    let m = residual_metric(dataset)?;
    let d: Vec<f64> = f.iter().zip(&dataset.values).map(|(a, b)| a - b).collect();
    Ok(quadratic_form(&m, &d))
}

/// Constants of the τ-decay normalization of spectral functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstants {
    pub s_ew: f64,
    pub v_ud: f64,
    pub b_e: f64,
    pub m_tau: f64,
}

impl Default for NormalizationConstants {
    fn default() -> Self {
        Self { s_ew: 1.0198, v_ud: 0.9746, b_e: 0.17810, m_tau: 1.777 }
    }
}

impl NormalizationConstants {
    /// Multiplier taking dR/(ds) at `s` to the spectral function.
    pub fn factor(&self, s: f64) -> Result<f64> {
        let m2 = self.m_tau * self.m_tau;
        if !(s > 0.0 && s < m2) {
            return Err(Error::Domain(format!("s = {s} outside the kinematic range (0, {m2})")));
        }
        let x = s / m2;
        let kinematic = (1.0 - x).powi(2) * (1.0 + 2.0 * x);
        Ok(m2 / (6.0 * self.v_ud * self.v_ud * self.s_ew * self.b_e) / kinematic)
    }
}

/// v₁ or a₁ from the normalized invariant-mass distribution dR/ds.
pub fn spectral_normalization(s: &[f64], dr_ds: &[f64], c: &NormalizationConstants) -> Result<Vec<f64>> {
    if s.len() != dr_ds.len() {
        return Err(Error::Input("s and dR/ds differ in length".into()));
    }
    s.iter().zip(dr_ds).map(|(&s, &r)| Ok(r * c.factor(s)?)).collect()
}

/// Inverse of [`spectral_normalization`].
pub fn spectral_denormalization(s: &[f64], spectral: &[f64], c: &NormalizationConstants) -> Result<Vec<f64>> {
    if s.len() != spectral.len() {
        return Err(Error::Input("s and spectral values differ in length".into()));
    }
    s.iter().zip(spectral).map(|(&s, &v)| Ok(v / c.factor(s)?)).collect()
}
