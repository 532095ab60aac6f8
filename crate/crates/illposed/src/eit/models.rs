//! Smooth bump conductivities on a unit background.

use super::fem::ConductivityField;
use super::mesh::DiscMesh;
use crate::Result;
use serde::{Deserialize, Serialize};

/// a·exp[b((x − x̄)² + (y − ȳ)²)²]; b < 0 gives a localized bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub sharpness: f64,
    pub x: f64,
    pub y: f64,
}

impl Bump {
    pub fn new(amplitude: f64, sharpness: f64, x: f64, y: f64) -> Self {
        Self { amplitude, sharpness, x, y }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d2 = (x - self.x).powi(2) + (y - self.y).powi(2);
        self.amplitude * (self.sharpness * d2 * d2).exp()
    }
}

/// σ = 1 + Σ bumps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BumpConductivity {
    pub bumps: Vec<Bump>,
}

impl BumpConductivity {
    pub fn homogeneous() -> Self {
        Self::default()
    }

    /// Conductive inclusion at (0, 0.4).
    pub fn high_inclusion() -> Self {
        Self { bumps: vec![Bump::new(1.0, -1500.0, 0.0, 0.4)] }
    }

    /// Resistive inclusion at (0.5, 0).
    pub fn low_inclusion() -> Self {
        Self { bumps: vec![Bump::new(-0.5, -1000.0, 0.5, 0.0)] }
    }

    /// Two conductive and one resistive inclusion.
    pub fn three_inclusions() -> Self {
        Self {
            bumps: vec![
                Bump::new(1.0, -1500.0, 0.0, 0.4),
                Bump::new(-0.5, -2500.0, 0.5, -0.2),
                Bump::new(2.0, -1000.0, -0.3, -0.2),
            ],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        1.0 + self.bumps.iter().map(|b| b.eval(x, y)).sum::<f64>()
    }

    pub fn on_mesh(&self, mesh: &DiscMesh) -> Result<ConductivityField> {
        ConductivityField::from_fn(mesh, |x, y| self.eval(x, y))
    }
}
