//! The Hilbert bimodule `X = C(K)` over `A = C(K)` at cell resolution and
//! the reconstruction of multiplication operators from theta operators.

pub mod module;
pub mod partition;
pub mod reconstruction;

pub use module::{
    a_valued_inner, bimodule_actions, cograph_inverse, cograph_iso, left_action, right_action,
    theta_apply, theta_operator, CographFunction,
};
pub use partition::{
    build_bump_partition, build_bump_partition_with, AdmissibleSymbol, BumpPartition,
    DEFAULT_DELTA, DEFAULT_MIN_SIZE, VANISHING_TOL,
};
pub use reconstruction::{
    covariant_rep_check, reconstructed_operator, reconstruction_vectors, trial_function,
    verify_operator_reconstruction, verify_theta_reconstruction, CovariantReport, Residual,
    TRIAL_TERMS,
};
