//! Linearized reconstruction of ln σ from many excitations.
//!
//! For test harmonic u_i and excitation j the boundary data
//! ⟨φ_j − φ0_j, u_i⟩ equal −∫ ∇φ0^i·∇φ0_j ln σ dA, where φ0 is the
//! potential in the unit background.

use super::dataset::{harmonic_cap, project_signed, ElectrodeDataset};
use crate::regcore::{svd_of_kernel, tsvd_solve, SvdSystem, Truncation};
use crate::specfun::DiscQuadrature;
use crate::{par, Error, Result};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// ∇φ0^i·∇φ0^jj with φ0^i = r^|i| u_i / |i| (i > 0 sine, i < 0 cosine).
pub fn linear_kernel_disc(i: i32, jj: i32, r: f64, theta: f64) -> Result<f64> {
    if i == 0 || jj == 0 {
        return Err(Error::Parameter("harmonic indices must be nonzero".into()));
    }
    let (a, b) = (i.unsigned_abs() as i32, jj.unsigned_abs() as i32);
    let pre = r.powi(a + b - 2) / PI;
    let angular = if (i > 0) == (jj > 0) {
        (((a - b) as f64) * theta).cos()
    } else if i > 0 {
        (((a - b) as f64) * theta).sin()
    } else {
        (((b - a) as f64) * theta).sin()
    };
    Ok(pre * angular)
}

/// Where the background potential φ0 comes from.
#[derive(Debug, Clone, Default)]
pub enum Phi0Mode {
    /// Closed form for the unit background.
    #[default]
    Analytic,
    /// A measurement on the unperturbed medium with the same currents.
    MeasuredReference(ElectrodeDataset),
}

/// Sampled linear system δφ = K ln σ.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    /// Rows are (test harmonic, excitation) pairs; columns are grid points.
    pub kernel: DMatrix<f64>,
    pub data: Vec<f64>,
    pub test_harmonics: Vec<i32>,
    pub grid_weights: Vec<f64>,
    rows: Vec<(i32, usize)>,
    content: Vec<Vec<(i32, f64)>>,
}

/// Signed test harmonics ±1..±n.
fn test_set(n: u32) -> Vec<i32> {
    (1..=n as i32).flat_map(|m| [m, -m]).collect()
}

pub fn linear_system(
    dataset: &ElectrodeDataset,
    grid: &DiscQuadrature,
    n_test: Option<u32>,
    phi0: &Phi0Mode,
) -> Result<LinearSystem> {
    dataset.validate()?;
    let n_el = dataset.electrode_count();
    let cap = harmonic_cap(n_el);
    let n_test = n_test.unwrap_or(cap);
    if n_test == 0 || n_test > cap {
        return Err(Error::Parameter(format!(
            "test harmonic count must lie in 1..={cap} for {n_el} electrodes, got {n_test}"
        )));
    }
    if let Phi0Mode::MeasuredReference(reference) = phi0 {
        reference.validate()?;
        if reference.electrode_count() != n_el || reference.excitations.len() != dataset.excitations.len() {
            return Err(Error::Data(format!(
                "reference has {} electrodes and {} excitations, data has {} and {}",
                reference.electrode_count(),
                reference.excitations.len(),
                n_el,
                dataset.excitations.len()
            )));
        }
    }
    let angles = &dataset.electrode_angles;
    let tests = test_set(n_test);
    let all = test_set(cap);

    // Harmonic content of each excitation current.
    let content: Vec<Vec<(i32, f64)>> = dataset
        .excitations
        .iter()
        .map(|ex| {
            all.iter()
                .map(|&l| (l, project_signed(&ex.current, angles, l)))
                .filter(|(_, c)| c.abs() > 1e-12)
                .collect()
        })
        .collect();

    let mut data = Vec::with_capacity(tests.len() * content.len());
    let mut rows: Vec<(i32, usize)> = Vec::with_capacity(data.capacity());
    for &i in &tests {
        for (j, ex) in dataset.excitations.iter().enumerate() {
            let measured = project_signed(&ex.potential, angles, i);
            let background = match phi0 {
                Phi0Mode::Analytic => {
                    // ⟨φ0_j, u_i⟩ = I_i^j / |i|.
                    content[j]
                        .iter()
                        .find(|(l, _)| *l == i)
                        .map_or(0.0, |(_, c)| c / i.unsigned_abs() as f64)
                }
                Phi0Mode::MeasuredReference(reference) => {
                    project_signed(&reference.excitations[j].potential, angles, i)
                }
            };
            data.push(measured - background);
            rows.push((i, j));
        }
    }

    let n_grid = grid.len();
    let mut system = LinearSystem {
        kernel: DMatrix::zeros(0, 0),
        data,
        test_harmonics: tests,
        grid_weights: grid.weights.clone(),
        rows,
        content,
    };
    let columns = par::map_range(n_grid, |k| system.kernel_column(grid.r[k], grid.theta[k]));
    system.kernel = DMatrix::from_fn(system.rows.len(), n_grid, |row, k| columns[k][row]);
    Ok(system)
}

impl LinearSystem {
    /// Kernel rows −∇φ0^i·∇φ0_j evaluated at an arbitrary point.
    pub fn kernel_column(&self, r: f64, theta: f64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|&(i, j)| {
                -self.content[j]
                    .iter()
                    .map(|&(l, c)| c * linear_kernel_disc(i, l, r, theta).unwrap_or(0.0))
                    .sum::<f64>()
            })
            .collect()
    }

    /// Copy with Gaussian errors of standard deviation `level` × rms(δφ)
    /// added to the right-hand side.
    pub fn with_noise(&self, level: f64, seed: u64) -> Result<Self> {
        if !(level >= 0.0) {
            return Err(Error::Parameter(format!("noise level must be >= 0, got {level}")));
        }
        let mut out = self.clone();
        let rms = (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt();
        if level > 0.0 && rms > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dist = Normal::new(0.0, level * rms).map_err(|e| Error::Parameter(e.to_string()))?;
            for v in &mut out.data {
                *v += dist.sample(&mut rng);
            }
        }
        Ok(out)
    }

    /// Singular system with unit image weights and quadrature object weights.
    pub fn svd(&self) -> Result<SvdSystem> {
        svd_of_kernel(&self.kernel, &vec![1.0; self.data.len()], &self.grid_weights)
    }
}

/// Reconstructed conductivity on the grid points.
#[derive(Debug, Clone)]
pub struct LinearReconstruction {
    pub ln_sigma: Vec<f64>,
    pub sigma: Vec<f64>,
    pub lambda: f64,
    pub modes_used: usize,
    pub singular_values: Vec<f64>,
    /// |(δφ, u_j)| for each singular mode.
    pub components: Vec<f64>,
    /// ln σ(x) = Σ_i a_i K_i(x); the solution lies in the range of the adjoint.
    adjoint_coefficients: Vec<f64>,
}

impl LinearReconstruction {
    /// ln σ at an arbitrary point of the disc. Only the quadrature nodes
    /// constrain the solution; between sparse radial nodes and near r = 1
    /// the expansion can be far off.
    pub fn ln_sigma_at(&self, system: &LinearSystem, x: f64, y: f64) -> f64 {
        let col = system.kernel_column(x.hypot(y), y.atan2(x));
        col.iter().zip(&self.adjoint_coefficients).map(|(k, a)| k * a).sum()
    }

    /// ln σ on a square raster over the disc.
    pub fn raster(&self, system: &LinearSystem, n: usize) -> Raster {
        Raster::from_fn(n, |x, y| self.ln_sigma_at(system, x, y))
    }
}

/// Solve for ln σ by TSVD with cutoff σ_j² ≥ λ.
pub fn linearized_reconstruct(
    dataset: &ElectrodeDataset,
    grid: &DiscQuadrature,
    lambda: f64,
    phi0: &Phi0Mode,
    n_test: Option<u32>,
) -> Result<LinearReconstruction> {
    let system = linear_system(dataset, grid, n_test, phi0)?;
    let svd = system.svd()?;
    reconstruct_with(&system, &svd, lambda)
}

/// Cutoff from the crossing of data components and singular values, never
/// below `floor`. Model error of noise-free data decays with the singular
/// values and only crosses them at the end of the spectrum, so the floor
/// keeps the noise-free case regularized.
pub fn crossing_lambda(system: &LinearSystem, svd: &SvdSystem, floor: f64) -> Result<f64> {
    let comps = svd.project(&system.data)?.components;
    Ok(super::crossing::cutoff_from_crossing(&svd.singular_values, &comps).max(floor))
}

/// TSVD solve on a prepared system and its singular system.
pub fn reconstruct_with(system: &LinearSystem, svd: &SvdSystem, lambda: f64) -> Result<LinearReconstruction> {
    let sol = tsvd_solve(svd, &system.data, Truncation::Lambda(lambda))?;
    let comps = svd.project(&system.data)?.components;
    let modes_used = sol.filter.iter().filter(|&&w| w > 0.0).count();
    let mut adjoint = vec![0.0; system.data.len()];
    for (j, (&c, &s)) in sol.coefficients.iter().zip(&svd.singular_values).enumerate() {
        if c != 0.0 {
            for (a, u) in adjoint.iter_mut().zip(svd.left_modes.column(j).iter()) {
                *a += c / s * u;
            }
        }
    }
    Ok(LinearReconstruction {
        adjoint_coefficients: adjoint,
        sigma: sol.field_values.iter().map(|v| v.exp()).collect(),
        ln_sigma: sol.field_values,
        lambda,
        modes_used,
        singular_values: svd.singular_values.clone(),
        components: comps.iter().map(|c| c.abs()).collect(),
    })
}

/// A local extremum of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Points whose value is the largest (or smallest) within `radius` and whose
/// magnitude is at least `rel_threshold` of the largest magnitude. Sorted by
/// decreasing magnitude.
pub fn find_extrema(points: &[(f64, f64)], values: &[f64], radius: f64, rel_threshold: f64) -> Vec<Extremum> {
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return Vec::new();
    }
    let r2 = radius * radius;
    let mut out: Vec<Extremum> = (0..points.len())
        .filter(|&k| values[k].abs() >= rel_threshold * top)
        .filter(|&k| {
            let (x, y) = points[k];
            let v = values[k];
            (0..points.len()).all(|q| {
                let d2 = (points[q].0 - x).powi(2) + (points[q].1 - y).powi(2);
                if q == k || d2 > r2 {
                    return true;
                }
                if v > 0.0 { values[q] <= v } else { values[q] >= v }
            })
        })
        .map(|k| Extremum { x: points[k].0, y: points[k].1, value: values[k] })
        .collect();
    out.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()));
    out
}

/// Samples on an n×n raster of [−1, 1]², NaN outside the unit disc.
#[derive(Debug, Clone)]
pub struct Raster {
    pub n: usize,
    pub values: Vec<f64>,
}

impl Raster {
    pub fn coord(n: usize, k: usize) -> f64 {
        -1.0 + 2.0 * k as f64 / (n - 1) as f64
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync + Send>(n: usize, f: F) -> Self {
        let values = par::map_range(n * n, |k| {
            let (x, y) = (Self::coord(n, k % n), Self::coord(n, k / n));
            if x * x + y * y <= 1.0 { f(x, y) } else { f64::NAN }
        });
        Raster { n, values }
    }

    /// Local extrema over a window of `radius`, as in [`find_extrema`].
    pub fn extrema(&self, radius: f64, rel_threshold: f64) -> Vec<Extremum> {
        let n = self.n;
        let top = self.values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
        if top == 0.0 {
            return Vec::new();
        }
        let h = 2.0 / (n - 1) as f64;
        let w = (radius / h).ceil() as isize;
        let mut out = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let v = self.values[iy * n + ix];
                if !v.is_finite() || v.abs() < rel_threshold * top {
                    continue;
                }
                let mut ok = true;
                'scan: for dy in -w..=w {
                    for dx in -w..=w {
                        let (qx, qy) = (ix as isize + dx, iy as isize + dy);
                        if (dx == 0 && dy == 0) || qx < 0 || qy < 0 || qx >= n as isize || qy >= n as isize {
                            continue;
                        }
                        if ((dx * dx + dy * dy) as f64) * h * h > radius * radius {
                            continue;
                        }
                        let q = self.values[qy as usize * n + qx as usize];
                        if q.is_finite() && (if v > 0.0 { q > v } else { q < v }) {
                            ok = false;
                            break 'scan;
                        }
                    }
                }
                if ok {
                    out.push(Extremum { x: Self::coord(n, ix), y: Self::coord(n, iy), value: v });
                }
            }
        }
        out.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()));
        out
    }
}

/// Cartesian coordinates of the grid points.
pub fn grid_points(grid: &DiscQuadrature) -> Vec<(f64, f64)> {
    (0..grid.len()).map(|k| grid.xy(k)).collect()
}
