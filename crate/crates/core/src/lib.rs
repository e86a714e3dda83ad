//! Heat kernels of fractional powers of flat-torus Laplacians, their
//! small-time expansions, and the spectral zeta machinery behind them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asym;
pub mod cli;
pub mod error;
pub mod fit;
pub mod halfpower;
pub mod heat;
pub mod models;
pub mod power;
pub mod quad;
pub mod specfun;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
pub use models::SpectralModel;
pub use power::{PowerKind, RationalPower};
