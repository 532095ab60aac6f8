//! Pseudo-data: a resonance-plus-continuum spectral function pulled onto
//! the OPE prediction, sampled on a bin grid with correlated noise.

use super::corridor::ErrorCorridor;
use super::data::SpectralDataset;
use super::qcd::{dispersion_kernel, qcd_prediction_tilde_f, Channel, ChannelModel, Condensates, TailConfig};
use crate::quad::gauss_legendre_on;
use crate::regcore::{svd_of_kernel, tikhonov_solve};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const LAMBDA_FLOOR: f64 = 1e-40;

/// Breit-Wigner shape normalised to 1 at its peak.
fn breit_wigner(s: f64, m2: f64, width: f64) -> f64 {
    let g2 = m2 * width * width;
    g2 / ((s - m2).powi(2) + g2)
}

fn continuum(s: f64, threshold: f64) -> f64 {
    0.5 * (1.0 + ((s - threshold) / 0.3).tanh())
}

/// Starting shape per channel before it is matched to the prediction.
pub fn ansatz(channel: Channel, s: f64) -> f64 {
    let vector = 0.6 * breit_wigner(s, 0.6, 0.15) + continuum(s, 1.6);
    let axial = 0.7 * breit_wigner(s, 1.5, 0.4) + continuum(s, 2.0);
    match channel {
        Channel::VMinusA => (1.6 * breit_wigner(s, 0.6, 0.15) - 0.9 * breit_wigner(s, 1.5, 0.6)) / (2.0 * PI),
        Channel::V => vector / (4.0 * PI),
        Channel::A => axial / (4.0 * PI),
        Channel::VPlusA => (vector + axial) / (4.0 * PI),
    }
}

fn default_bins() -> usize {
    125
}
fn default_s_lo() -> f64 {
    0.05
}
fn default_s_hi() -> f64 {
    3.15
}
fn default_correlation() -> f64 {
    0.3
}
fn default_target() -> f64 {
    1.0
}

/// Settings of the pseudo-data generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub truth: Condensates,
    /// Relative noise level, σ_i = level·|f_i|.
    pub noise: f64,
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_s_lo")]
    pub s_lo: f64,
    #[serde(default = "default_s_hi")]
    pub s_hi: f64,
    /// Correlation of neighbouring bins.
    #[serde(default = "default_correlation")]
    pub correlation: f64,
    /// χ²_L of the noise-free spectral function against the prediction.
    #[serde(default = "default_target")]
    pub target_chi_l: f64,
}

impl SynthSpec {
    pub fn new(truth: Condensates, noise: f64, seed: u64) -> Self {
        Self {
            truth,
            noise,
            seed,
            bins: default_bins(),
            s_lo: default_s_lo(),
            s_hi: default_s_hi(),
            correlation: default_correlation(),
            target_chi_l: default_target(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: SpectralDataset,
    /// Noise-free spectral function at the bin centres.
    pub truth: Vec<f64>,
}

/// Build pseudo-data consistent with the prediction for `spec.truth`.
///
/// The ansatz is corrected by the Tikhonov solution of the dispersion
/// equation whose residual on Γ_L gives χ²_L = `target_chi_l`, so the
/// spectral function stays smooth and agrees with theory within the
/// corridor. Gaussian noise with tridiagonal correlation is then added.
pub fn synth_dataset(spec: &SynthSpec, model: &ChannelModel, corridor: &ErrorCorridor) -> Result<SynthOutput> {
    model.validate()?;
    corridor.validate()?;
    if !(spec.noise >= 0.0) || !(spec.target_chi_l > 0.0) {
        return Err(Error::Parameter("noise must be ≥ 0 and the χ²_L target positive".into()));
    }
    if spec.bins < 2 || !(spec.s_lo > 0.0 && spec.s_hi > spec.s_lo) {
        return Err(Error::Parameter("grid needs ≥ 2 bins on 0 < s_lo < s_hi".into()));
    }
    if !(spec.correlation.abs() < 0.5) {
        return Err(Error::Parameter("neighbour correlation must lie in (−0.5, 0.5)".into()));
    }
    let n = spec.bins;
    let h = (spec.s_hi - spec.s_lo) / n as f64;
    let s: Vec<f64> = (0..n).map(|i| spec.s_lo + (i as f64 + 0.5) * h).collect();
    let widths = vec![h; n];

    let rule = gauss_legendre_on(corridor.nodes, corridor.s_lo, corridor.s_hi);
    let len = corridor.length();
    let image_weights: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&z, &w)| Ok(w * corridor.weight(z, model)? / len))
        .collect::<Result<_>>()?;
    let kernel = DMatrix::from_fn(rule.len(), n, |k, j| dispersion_kernel(model.channel, rule.nodes[k], s[j]) / PI);
    let tail = TailConfig { s_max: spec.s_hi, z_cut: None };
    let prediction: Vec<f64> =
        rule.nodes.iter().map(|&z| qcd_prediction_tilde_f(z, &spec.truth, model, &tail)).collect::<Result<_>>()?;

    let f0: Vec<f64> = s.iter().map(|&x| ansatz(model.channel, x)).collect();
    let k0 = &kernel * DVector::from_iterator(n, f0.iter().zip(&widths).map(|(f, h)| f * h));
    let residual: Vec<f64> = prediction.iter().zip(k0.iter()).map(|(p, a)| p - a).collect();
    let svd = svd_of_kernel(&kernel, &image_weights, &widths)?;
    let epsilon = spec.target_chi_l.sqrt();
    let initial = svd.image_norm(&residual);
    let truth = if initial <= epsilon {
        f0
    } else {
        // Discrepancy rule over a wider bracket than the generic one: strongly
        // weighted corridors need λ far below σ_1².
        let s1 = svd.sigma_max().powi(2);
        let (mut lo, mut hi) = ((LAMBDA_FLOOR * s1).ln(), s1.ln());
        if tikhonov_solve(&svd, &residual, lo.exp())?.discrepancy > epsilon {
            return Err(Error::Numerical(format!("cannot bring χ²_L down to {}", spec.target_chi_l)));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tikhonov_solve(&svd, &residual, mid.exp())?.discrepancy > epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let corr = tikhonov_solve(&svd, &residual, lo.exp())?;
        f0.iter().zip(&corr.field_values).map(|(a, b)| a + b).collect()
    };

    let sigma: Vec<f64> = truth.iter().map(|f| spec.noise * f.abs() + 1e-12).collect();
    let covariance = DMatrix::from_fn(n, n, |i, j| {
        let c = match i.abs_diff(j) {
            0 => 1.0,
            1 => spec.correlation,
            _ => 0.0,
        };
        c * sigma[i] * sigma[j]
    });
    let chol = covariance
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("pseudo-data covariance is not positive definite".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
    let noise = chol.l() * z;
    let values: Vec<f64> = truth.iter().zip(noise.iter()).map(|(f, e)| f + e).collect();
    let dataset = SpectralDataset::with_widths(s, values, covariance, widths)?;
    Ok(SynthOutput { dataset, truth })
}
