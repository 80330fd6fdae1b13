//! Finite-dimensional complex linear algebra for multipartite pure and mixed
//! states.

mod density;
mod layout;
mod schmidt;
mod spectral;
mod state;
mod tensor;

pub use density::{partial_trace, reduced_state, DensityMatrix};
pub use layout::{apply_local, embed_operator, expectation, is_hermitian, Layout};
pub use schmidt::{schmidt_decompose, schmidt_reconstruct, Bipartition, SchmidtTerm};
pub use spectral::{
    evolve, spectral_decompose, spectral_decompose_with, SpectralDecomposition, DEGENERACY_TOL,
};
pub use state::StateVector;
pub use tensor::{kron, tensor_product, tensor_product_with_limit, Tensor, DEFAULT_MAX_DIM};

/// Norm tolerance for validated state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity tolerance accepted for operators supplied by callers.
pub const HERMITIAN_TOL: f64 = 1e-10;
