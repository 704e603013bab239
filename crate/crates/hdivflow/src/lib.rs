//! File formats and batch drivers for [`hdivflow_core`]: plain-text meshes,
//! checkpoints, legacy VTK output, CSV tables, JSON run configuration and
//! the command-line front end.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod driver;
mod error;
pub mod mesh_io;
pub mod tables;
pub mod vtk;

pub use error::{Error, Result};
pub use hdivflow_core as fem;
