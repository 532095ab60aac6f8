//! Per-command JSON configuration. Every field has a default mirroring the
//! library defaults, so `{}` is a valid config for each command except
//! eit-recon, which needs a dataset path.

use illposed::condensates::{
    Axis, Channel, ChannelModel, Condensates, ErrorCorridor, ParameterGrid, SynthSpec,
    V_MINUS_A_INTERVAL,
};
use illposed::eit::{Bump, DEFAULT_L, DEFAULT_LAMBDA, DEFAULT_M, DEFAULT_QUADRATURE};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Where the reg-sweep problem comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegProblem {
    /// K(x, t) = min(x, t) on a uniform midpoint grid of [0, 1] with
    /// f(t) = t(1 − t) and Gaussian noise relative to rms(g).
    MinKernel { points: usize, noise: f64 },
    /// Square kernel CSV, its grid sidecar (node, weight) and a data CSV
    /// with column g.
    Files {
        kernel: PathBuf,
        grid: PathBuf,
        data: PathBuf,
    },
}

impl Default for RegProblem {
    fn default() -> Self {
        RegProblem::MinKernel {
            points: 64,
            noise: 0.01,
        }
    }
}

fn default_lambda_lo() -> f64 {
    1e-10
}
fn default_lambda_hi() -> f64 {
    1e-1
}
fn default_lambda_points() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegSweepConfig {
    #[serde(default)]
    pub problem: RegProblem,
    #[serde(default = "default_lambda_lo")]
    pub lambda_lo: f64,
    #[serde(default = "default_lambda_hi")]
    pub lambda_hi: f64,
    #[serde(default = "default_lambda_points")]
    pub lambda_points: usize,
    /// Data error norm for the discrepancy and Miller rules. The demo
    /// problem defaults to the norm of the noise it added.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Energy bound for the energy and Miller rules. The demo problem
    /// defaults to the norm of its true solution.
    #[serde(default)]
    pub energy_bound: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RegSweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Homogeneous,
    HighInclusion,
    LowInclusion,
    ThreeInclusions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConductivitySpec {
    Preset {
        name: Preset,
    },
    /// σ = 1 + Σ a·exp[b((x − x̄)² + (y − ȳ)²)²].
    Bumps {
        bumps: Vec<Bump>,
    },
    /// Nodal values (x, y, value) on the configured mesh.
    Field {
        path: PathBuf,
    },
}

impl Default for ConductivitySpec {
    fn default() -> Self {
        ConductivitySpec::Preset {
            name: Preset::Homogeneous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Rings { rings: usize },
    Triangles { target: usize },
    Files { nodes: PathBuf, triangles: PathBuf },
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec::Triangles { target: 5000 }
    }
}

fn default_electrodes() -> usize {
    32
}
fn default_max_harmonic() -> u32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EitForwardConfig {
    #[serde(default)]
    pub conductivity: ConductivitySpec,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default = "default_electrodes")]
    pub electrodes: usize,
    /// Patterns sin(mθ), cos(mθ) for m = 1..=max_harmonic.
    #[serde(default = "default_max_harmonic")]
    pub max_harmonic: u32,
    /// Gaussian potential noise relative to rms per excitation.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EitForwardConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

fn default_raster() -> usize {
    65
}
fn default_recon_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_quadrature() -> [usize; 2] {
    [DEFAULT_QUADRATURE.0, DEFAULT_QUADRATURE.1]
}
/// Linear mode needs many radii: the solution is only determined at the nodes.
fn default_linear_quadrature() -> [usize; 2] {
    [24, 64]
}
fn default_l() -> u32 {
    DEFAULT_L
}
fn default_m() -> usize {
    DEFAULT_M
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SingleField {
    #[default]
    Y,
    Phi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReconMode {
    Linear {
        /// TSVD cutoff σ_j² ≥ λ.
        #[serde(default = "default_recon_lambda")]
        lambda: f64,
        /// Take λ from the singular value vs component crossing, with
        /// `lambda` as the floor.
        #[serde(default)]
        crossing: bool,
        #[serde(default)]
        n_test: Option<u32>,
        #[serde(default = "default_linear_quadrature")]
        quadrature: [usize; 2],
        /// Measurement on the unperturbed medium used as φ0.
        #[serde(default)]
        reference: Option<PathBuf>,
        /// Extra reconstructions with noise added to δφ at these levels.
        #[serde(default)]
        noise_levels: Vec<f64>,
    },
    Single {
        #[serde(default)]
        excitation: usize,
        #[serde(default = "default_l")]
        l_max: u32,
        #[serde(default = "default_m")]
        m_max: usize,
        #[serde(default)]
        field: SingleField,
        #[serde(default = "default_quadrature")]
        quadrature: [usize; 2],
    },
}

impl Default for ReconMode {
    fn default() -> Self {
        serde_json::from_str(r#"{"mode":"linear"}"#).expect("defaults deserialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EitReconConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub recon: ReconMode,
    /// Single mode writes an n×n raster of [−1, 1]²; linear mode writes
    /// the quadrature nodes.
    #[serde(default = "default_raster")]
    pub raster: usize,
    #[serde(default)]
    pub seed: u64,
}

fn truth() -> Condensates {
    Condensates::from([(6, -6.8e-3), (8, 3.2e-3)])
}

fn default_model() -> ChannelModel {
    ChannelModel::new(Channel::VMinusA, &[6, 8]).expect("valid default model")
}

fn default_corridor() -> ErrorCorridor {
    let (lo, hi) = V_MINUS_A_INTERVAL;
    ErrorCorridor::power(10, 5.7e-3, lo, hi).expect("valid default corridor")
}

fn default_grid() -> ParameterGrid {
    ParameterGrid::two(
        Axis {
            dim: 6,
            lo: -14e-3,
            hi: 0.0,
            points: 57,
        },
        Axis {
            dim: 8,
            lo: -20e-3,
            hi: 25e-3,
            points: 61,
        },
    )
}

fn default_synth() -> SynthSpec {
    SynthSpec::new(truth(), 0.03, 21)
}

/// Externally tagged ({"synth": {...}} or {"files": {...}}): condensate maps
/// have integer keys, which internally tagged enums cannot read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralSource {
    Synth(SynthSpec),
    /// Values CSV (s, f_exp[, width]) and dense covariance CSV.
    Files {
        values: PathBuf,
        covariance: PathBuf,
    },
}

impl Default for SpectralSource {
    fn default() -> Self {
        SpectralSource::Synth(default_synth())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondFitConfig {
    #[serde(default = "default_model")]
    pub model: ChannelModel,
    #[serde(default = "default_corridor")]
    pub corridor: ErrorCorridor,
    #[serde(default = "default_grid")]
    pub grid: ParameterGrid,
    #[serde(default)]
    pub data: SpectralSource,
    /// Upper cut of the continuum tail; automatic when absent.
    #[serde(default)]
    pub z_cut: Option<f64>,
}

impl Default for CondFitConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondSynthConfig {
    #[serde(default = "default_model")]
    pub model: ChannelModel,
    #[serde(default = "default_corridor")]
    pub corridor: ErrorCorridor,
    #[serde(default = "default_synth")]
    pub synth: SynthSpec,
}

impl Default for CondSynthConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}
