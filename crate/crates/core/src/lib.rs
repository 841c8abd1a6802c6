//! Finite-difference laboratory for the Williams-Yamagata-Flierl (WYF)
//! vortex equation with a linear background shear flow, and its
//! Zakharov-Kuznetsov (ZK) limit.
//!
//! The numerical core is generic over the scalar type ([`Scalar`] is
//! implemented for `f32` and `f64`); the aliases at the crate root pin the
//! double-precision types used by the driver, the CLI and the tests.

pub mod arakawa;
pub mod diagnostics;
pub mod driver;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod scalar;
pub mod stencil;
pub mod timestep;
pub mod wyf;
pub mod zk;

pub use arakawa::JacobianScheme;
pub use error::{Error, Result};
pub use grid::{sample_gaussian, YBoundary};
pub use scalar::Scalar;

/// Double-precision grid.
pub type Grid = grid::Grid2D<f64>;
/// Double-precision field.
pub type Field = grid::Field2D<f64>;
/// Single-precision grid.
pub type Grid32 = grid::Grid2D<f32>;
/// Single-precision field.
pub type Field32 = grid::Field2D<f32>;
