//! Dense quantum linear algebra: layouts, states, partial traces, matrix
//! functions and information measures.

mod layout;
pub mod linalg;
mod measures;
pub mod random;
mod state;

pub use layout::SubsystemLayout;
pub use linalg::{eigh, eigvalsh, kron, CMatrix, CVector, C64};
pub use measures::{
    entropy_of_spectrum, fidelity, matrix_fn, matrix_log, relative_entropy, renyi_entropy,
    renyi_of_spectrum, trace_distance, trace_norm_distance, uhlmann_align, von_neumann_entropy,
    UhlmannAlignment,
};
pub use state::{
    embed_matrix, partial_trace, DensityOperator, HermitianOperator, LogFloor, PureStateVector,
    QuantumState, Spectrum, UnnormalizedPositiveOperator, HERMITIAN_TOL, MAX_DENSITY_DIM,
    MAX_VECTOR_DIM, NORM_TOL, PSD_TOL, SUPPORT_TOL, ZERO_EIGENVALUE,
};
