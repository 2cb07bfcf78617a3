//! Open anisotropic Rabi and Dicke models: steady states, entanglement,
//! Gaussian dynamics and coherent feedback.

pub mod delay;
pub mod error;
pub mod expm;
pub mod feedback;
pub mod gaussian;
pub mod lindblad;
pub mod matrix;
pub mod measures;
pub mod models;
pub mod operators;
pub mod rwa;
pub mod space;
pub mod sparse;
pub mod state;

pub use error::{Error, Result};
pub use matrix::{CMatrix, C64};
pub use space::{Factor, HilbertSpec};
pub use state::{DensityMatrix, KetState};
