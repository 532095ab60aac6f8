//! Electrode data: point electrodes on the unit circle, one current pattern
//! and one set of measured potentials per excitation.

use super::fem::{fem_forward_many, ConductivityField};
use super::green::signed_harmonic;
use super::mesh::DiscMesh;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const CONSERVATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    /// Injected current density sampled at the electrodes.
    pub current: Vec<f64>,
    /// Measured potentials at the electrodes, zero mean.
    pub potential: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeDataset {
    pub electrode_angles: Vec<f64>,
    pub excitations: Vec<Excitation>,
}

/// N equally spaced electrode angles starting at θ = 0.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|e| 2.0 * PI * e as f64 / n as f64).collect()
}

/// Largest harmonic resolvable by trapezoid projections over `n` electrodes.
pub fn harmonic_cap(n_electrodes: usize) -> u32 {
    (n_electrodes / 2).saturating_sub(1) as u32
}

/// Current patterns sin(mθ), cos(mθ) for m = 1..=max_m, as signed indices
/// (+m for sine, −m for cosine).
pub fn trig_patterns(max_m: u32) -> Vec<i32> {
    (1..=max_m as i32).flat_map(|m| [m, -m]).collect()
}

/// Unit-amplitude current of a signed pattern index.
pub fn pattern_current(pattern: i32, theta: f64) -> f64 {
    signed_harmonic(pattern, theta) * PI.sqrt()
}

/// Trapezoid projection (2π/N) Σ_e f(θ_e) u_i(θ_e) over uniform electrodes.
pub fn project_signed(values: &[f64], angles: &[f64], i: i32) -> f64 {
    let h = 2.0 * PI / angles.len() as f64;
    values
        .iter()
        .zip(angles)
        .map(|(v, &t)| v * signed_harmonic(i, t))
        .sum::<f64>()
        * h
}

fn zero_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

impl ElectrodeDataset {
    /// Validate and gauge-fix the potentials.
    pub fn new(electrode_angles: Vec<f64>, mut excitations: Vec<Excitation>) -> Result<Self> {
        for ex in &mut excitations {
            zero_mean(&mut ex.potential);
        }
        let d = ElectrodeDataset { electrode_angles, excitations };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.electrode_angles.len();
        if n < 3 {
            return Err(Error::Data("need at least three electrodes".into()));
        }
        if self.excitations.is_empty() {
            return Err(Error::Data("dataset has no excitations".into()));
        }
        let pitch = 2.0 * PI / n as f64;
        for (e, &t) in self.electrode_angles.iter().enumerate() {
            let expected = self.electrode_angles[0] + pitch * e as f64;
            if (t - expected).abs() > 1e-9 {
                return Err(Error::Data(format!("electrode {e} is not uniformly spaced")));
            }
        }
        for (k, ex) in self.excitations.iter().enumerate() {
            if ex.current.len() != n || ex.potential.len() != n {
                return Err(Error::Data(format!(
                    "excitation {k} has {} currents and {} potentials for {n} electrodes",
                    ex.current.len(),
                    ex.potential.len()
                )));
            }
            let net: f64 = ex.current.iter().sum();
            let scale = ex.current.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
            if net.abs() > CONSERVATION_TOL * scale {
                return Err(Error::Compatibility { imbalance: net });
            }
            if ex.current.iter().chain(&ex.potential).any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("excitation {k} has non-finite values")));
            }
        }
        Ok(())
    }

    pub fn electrode_count(&self) -> usize {
        self.electrode_angles.len()
    }

    /// Rotate all data by `shift` electrode pitches (electrode e reads what
    /// electrode e − shift read before).
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.electrode_count();
        let rot = |v: &Vec<f64>| (0..n).map(|e| v[(e + n - shift % n) % n]).collect::<Vec<_>>();
        ElectrodeDataset {
            electrode_angles: self.electrode_angles.clone(),
            excitations: self
                .excitations
                .iter()
                .map(|ex| Excitation { current: rot(&ex.current), potential: rot(&ex.potential) })
                .collect(),
        }
    }

    /// Add Gaussian noise to the potentials with standard deviation
    /// `level` × (rms of that excitation's potentials).
    pub fn with_noise(&self, level: f64, seed: u64) -> Result<Self> {
        if !(level >= 0.0) {
            return Err(Error::Parameter(format!("noise level must be >= 0, got {level}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for ex in &mut out.excitations {
            let rms = (ex.potential.iter().map(|v| v * v).sum::<f64>() / ex.potential.len() as f64).sqrt();
            if level > 0.0 && rms > 0.0 {
                let dist = Normal::new(0.0, level * rms).map_err(|e| Error::Parameter(e.to_string()))?;
                for v in &mut ex.potential {
                    *v += dist.sample(&mut rng);
                }
            }
            zero_mean(&mut ex.potential);
        }
        Ok(out)
    }
}

/// Simulate electrode data with the finite element forward solver. The
/// current density of each pattern is applied along the whole boundary and
/// the potential is read off at the electrodes.
pub fn simulate_dataset(
    mesh: &DiscMesh,
    sigma: &ConductivityField,
    n_electrodes: usize,
    patterns: &[i32],
) -> Result<ElectrodeDataset> {
    if patterns.is_empty() {
        return Err(Error::Parameter("no current patterns".into()));
    }
    if patterns.iter().any(|&p| p == 0 || p.unsigned_abs() as usize * 2 >= n_electrodes) {
        return Err(Error::Parameter(format!(
            "pattern harmonics must lie in 1..{} for {n_electrodes} electrodes",
            n_electrodes.div_ceil(2)
        )));
    }
    let angles = uniform_angles(n_electrodes);
    let b_angles = mesh.boundary_angles();
    let currents: Vec<Vec<f64>> = patterns
        .iter()
        .map(|&p| b_angles.iter().map(|&t| pattern_current(p, t)).collect())
        .collect();
    let sols = fem_forward_many(mesh, sigma, &currents)?;
    let excitations = patterns
        .iter()
        .zip(sols)
        .map(|(&p, s)| Excitation {
            current: angles.iter().map(|&t| pattern_current(p, t)).collect(),
            potential: angles.iter().map(|&t| mesh.boundary_value(&s.potential, t)).collect(),
        })
        .collect();
    ElectrodeDataset::new(angles, excitations)
}

/// Exact data for the unit background: current cos(mθ) gives the boundary
/// potential cos(mθ)/m, and likewise for sine.
pub fn homogeneous_dataset(n_electrodes: usize, patterns: &[i32]) -> Result<ElectrodeDataset> {
    let angles = uniform_angles(n_electrodes);
    let excitations = patterns
        .iter()
        .map(|&p| Excitation {
            current: angles.iter().map(|&t| pattern_current(p, t)).collect(),
            potential: angles
                .iter()
                .map(|&t| pattern_current(p, t) / p.unsigned_abs() as f64)
                .collect(),
        })
        .collect();
    ElectrodeDataset::new(angles, excitations)
}
