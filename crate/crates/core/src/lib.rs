//! Ray-based forward and adjoint operators for photoacoustic tomography in
//! heterogeneous media.
//!
//! Rays are traced from each sensor through a gridded sound-speed map
//! ([`ray_kernel`]), their spreading is measured by the Jacobian `q`
//! ([`amplitude`], or the interface method in [`dim`]), and homogeneous
//! Green's kernels ([`greens`]) are glued along the rays to form the
//! operators in [`operators`]. A finite-difference wave solver
//! ([`oracle`]) serves as the reference.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod cli;
pub mod dim;
pub mod error;
pub mod greens;
pub mod io;
pub mod medium;
pub mod metrics;
pub mod operators;
pub mod oracle;
pub mod ray_kernel;

pub use error::{DomainExit, Error, Result};
pub use medium::{CartesianGrid2D, Medium, MediumModel, ScalarField2D, Vec2};
pub use operators::{HgConfig, PressureTimeSeries, SensorArray, TimeWindow};
