//! Spatial correlations of bipartite quantum dynamics.
//!
//! A channel on S = AB is mapped to its Choi–Jamiołkowski state on
//! A, B, A', B'; the normalised mutual information of that state across
//! AA'|BB' quantifies how far the channel is from a product E_A ⊗ E_B.

pub mod channels;
pub mod correlation;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lindblad;
pub mod models;
pub mod oracles;
pub mod random;
pub mod selftest;
pub mod tolerance;

pub use channels::{choi_state, Channel, ChoiState};
pub use correlation::{i_bar, CorrelationReport};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix};
