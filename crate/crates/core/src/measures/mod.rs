//! State diagnostics: parity sectors, entanglement, photon statistics,
//! Wigner functions and fidelities.

pub mod fidelity;
pub mod negativity;
pub mod parity;
pub mod photon;
pub mod wigner;

pub use fidelity::{fidelity_pure, uhlmann_fidelity};
pub use negativity::{log_negativity_discrete, partial_transpose, Subsystem};
pub use parity::{max_within_parity_coherence, parity_decompose, ParityDecomposition};
pub use photon::{photon_statistics, PhotonStatistics};
pub use wigner::{wigner, wigner_maxima, wigner_maxima_with, wigner_point, WignerGrid, WignerMaximum};
