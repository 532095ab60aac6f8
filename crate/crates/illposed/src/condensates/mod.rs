//! Condensate extraction by the functional method: a spectral function is
//! fitted to data and, through a dispersion relation, to the OPE prediction
//! on a space-like interval; the residual χ²_L is scanned over condensates.

pub mod corridor;
pub mod data;
pub mod fit;
pub mod problem;
pub mod qcd;
pub mod synth;

pub use corridor::{CorridorForm, ErrorCorridor};
pub use data::{
    chi_exp2, chi_r2, inverse_covariance, COVARIANCE_JITTER, residual_metric, spectral_denormalization, spectral_normalization,
    NormalizationConstants, SpectralDataset,
};
pub use fit::{
    fit_condensates, Axis, CondensateFit, Contour, CorrelationLine, Interval, MuMode, ParameterGrid, SurfacePoint,
};
pub use problem::{calibrate_mu, chi_l2, solve_regularized_f, Calibration, CondensateProblem};
pub use qcd::{
    adler_d, alpha_s, dispersion_kernel, f_qcd_timelike, ope_f, qcd_prediction_tilde_f, tail_integral, Channel,
    ChannelModel, Condensates, Coupling, Order, TailConfig, ADLER_K, BETA, C6_TILDE, F_PI, LAMBDA_MSBAR,
};
pub use synth::{ansatz, synth_dataset, SynthOutput, SynthSpec};

/// Default space-like interval for V−A fits (GeV²).
pub const V_MINUS_A_INTERVAL: (f64, f64) = (-150.0, -1.0);
/// Default space-like interval for A fits (GeV²).
pub const AXIAL_INTERVAL: (f64, f64) = (-3.5, -0.4);
