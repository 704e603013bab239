use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh quality: {0}")]
    MeshQuality(String),

    #[error("unsupported quadrature order {order} (supported: 0..={max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("point ({x}, {y}) lies outside element {element}")]
    PointOutside { element: usize, x: f64, y: f64 },

    #[error("singular local matrix on element {0}")]
    SingularLocalMatrix(usize),

    #[error("factorization failed: zero pivot at unknown {index} ({block} block)")]
    Singular { index: usize, block: &'static str },

    #[error("no boundary condition for face {face}")]
    MissingBoundaryCondition { face: usize },

    #[error("Picard iteration did not converge in {} iterations (last increment {:e})",
        .history.len(), .history.last().copied().unwrap_or(f64::NAN))]
    PicardNonConvergence { history: Vec<f64> },

    #[error("time step {step}: {source}")]
    Step { step: usize, source: Box<Error> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("run nu={nu}, r={r}, h={h}: {source}")]
    Run {
        nu: f64,
        r: f64,
        h: f64,
        source: Box<Error>,
    },
}
