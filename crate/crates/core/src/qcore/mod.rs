//! Complex dense linear algebra and quantum-state primitives.

mod eigen;
mod matrix;
mod state;

pub use eigen::{hermitian_eigenvalues, MAX_EIGEN_DIM};
pub use matrix::{tensor_product, ComplexMatrix, C64};
pub(crate) use state::trace_of_product as state_trace_of_product;
pub use state::{
    fidelity_pure, pure_to_density, pure_trace_distance, trace_distance, DensityMatrix, Povm,
    ProductState, PureState,
};

/// Tolerance used for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance used for normalization and trace checks.
pub const NORM_TOL: f64 = 1e-10;
