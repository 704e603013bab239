//! H(div)-conforming finite elements for the unsteady incompressible
//! p-Navier–Stokes equations.
//!
//! The velocity lives in the lowest-order Brezzi–Douglas–Marini space with
//! strongly imposed normal traces, the pressure is piecewise constant, the
//! power-law viscous term is discretized with a lifting-based discrete
//! gradient and the convective term carries an upwind jump stabilization.
//! Time integration is implicit Euler with a Picard iteration per step.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the command-line
//! drivers and everything touching the filesystem live in the `hdivflow`
//! companion crate.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod basis;
pub mod dense;
mod error;
pub mod forms;
pub mod lifting;
pub mod math;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod sparse;

pub use error::{Error, Result};
pub use forms::FluxParams;
pub use mesh::{BoundaryTag, SimplicialMesh};
pub use spaces::{PressureField, PressureSpace, VelocityField, VelocitySpace};
