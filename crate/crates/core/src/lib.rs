//! Entanglement of small two-dimensional lattice states: topological
//! entanglement entropy estimators, edge entanglement Hamiltonians, local
//! Gibbs fits, recovery maps, entanglement spectra and matrix product states.

pub mod edgeham;
pub mod entropy;
pub mod error;
pub mod gibbsfit;
pub mod lattice;
pub mod mps;
pub mod qla;
pub mod recovery;
pub mod specmatch;
pub mod states;

pub use error::{Error, Result};
