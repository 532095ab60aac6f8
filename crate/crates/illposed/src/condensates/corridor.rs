//! Error corridor of the theory prediction on the space-like interval.

use super::qcd::{ChannelModel, Channel, ADLER_K};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Shape of σ_L(s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorridorForm {
    /// First omitted condensate: O_max / (−s)^{d/2}.
    Power { dim: u32, o_max: f64 },
    /// Last known term of the Adler series, K_3 a³/(4π²) per Adler function.
    PerturbativeK3,
    /// Both of the above added in quadrature.
    Combined { dim: u32, o_max: f64 },
}

fn default_nodes() -> usize {
    64
}

/// σ_L on Γ_L = [s_lo, s_hi] with s_lo < s_hi < 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorCorridor {
    pub form: CorridorForm,
    pub s_lo: f64,
    pub s_hi: f64,
    /// Gauss-Legendre nodes on Γ_L before any refinement.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

impl ErrorCorridor {
    pub fn power(dim: u32, o_max: f64, s_lo: f64, s_hi: f64) -> Result<Self> {
        let c = Self { form: CorridorForm::Power { dim, o_max }, s_lo, s_hi, nodes: 64 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_lo < self.s_hi && self.s_hi < 0.0) {
            return Err(Error::Parameter(format!(
                "interval [{}, {}] must satisfy s_lo < s_hi < 0",
                self.s_lo, self.s_hi
            )));
        }
        if self.nodes < 2 {
            return Err(Error::Parameter("corridor needs at least two quadrature nodes".into()));
        }
        match self.form {
            CorridorForm::Power { o_max, .. } | CorridorForm::Combined { o_max, .. } if !(o_max > 0.0) => {
                Err(Error::Parameter("corridor bound must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// |Γ_L|.
    pub fn length(&self) -> f64 {
        self.s_hi - self.s_lo
    }

    /// Same corridor with σ_L multiplied by `c`.
    pub fn widened(&self, c: f64) -> Self {
        let mut out = *self;
        out.form = match self.form {
            CorridorForm::Power { dim, o_max } => CorridorForm::Power { dim, o_max: o_max * c },
            CorridorForm::Combined { dim, o_max } => CorridorForm::Combined { dim, o_max: o_max * c },
            f => f,
        };
        out
    }

    pub fn sigma(&self, s: f64, model: &ChannelModel) -> Result<f64> {
        let power = |dim: u32, o_max: f64| o_max / (-s).powi(dim as i32 / 2);
        let perturbative = || -> Result<f64> {
            let m = match model.channel {
                Channel::VMinusA => {
                    return Err(Error::Parameter("V-A has no perturbative corridor".into()));
                }
                Channel::VPlusA => 2.0,
                _ => 1.0,
            };
            let a = model.coupling(-s)?;
            Ok(m * ADLER_K[3] * a.powi(3) / (4.0 * PI * PI))
        };
        let sigma = match self.form {
            CorridorForm::Power { dim, o_max } => power(dim, o_max),
            CorridorForm::PerturbativeK3 => perturbative()?,
            CorridorForm::Combined { dim, o_max } => power(dim, o_max).hypot(perturbative()?),
        };
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Parameter(format!("corridor width {sigma} at s = {s} is not positive")));
        }
        Ok(sigma)
    }

    /// w_L(s) = 1/σ_L(s)².
    pub fn weight(&self, s: f64, model: &ChannelModel) -> Result<f64> {
        Ok(self.sigma(s, model)?.powi(-2))
    }
}
