//! Regularization of linear ill-posed problems.
//!
//! The crate is organised bottom-up: [`quad`] and [`specfun`] supply
//! quadrature and Bessel functions, [`regcore`] holds the SVD filters and
//! parameter choice rules, [`fredholm`] solves second-kind equations, and
//! the two applications live in [`eit`] (impedance tomography on the unit
//! disc) and [`condensates`] (OPE condensate fits to spectral functions).
//! [`stats`] provides the χ² machinery used to turn fit surfaces into
//! confidence regions.

pub mod condensates;
pub mod eit;
pub mod error;
pub mod fredholm;
pub mod io;
pub mod par;
pub mod quad;
pub mod regcore;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
