//! Cell discretisation of `L^2(K, mu)` and the operators acting on it.

pub mod function;
pub mod identities;
pub mod norm;
pub mod operator;
pub mod sparse;

pub use function::{halton_points, inner_product, sample_to_cells, CellFunction, SampleRule};
pub use identities::{
    covariance_bound, covariance_residual, isometry_residual, projection_residual,
    transfer_residual,
};
pub use norm::{weighted_norm, NormOptions};
pub use operator::{
    continuum_residual, operator_norm, CellOperator, CellQuadrature, Discretization, Sparsity,
    QUADRATURE_SUB_DEPTH,
};
pub use sparse::Csr;
