//! Affine iterated function systems: branches, the expanding map they
//! invert, branch sets, the open set condition and self-similarity checks.

pub mod affine;
pub mod branch;
pub mod checks;
pub mod file;
pub mod osc;
pub mod system;

pub use affine::{contraction_bounds, AffineContraction};
pub use branch::{
    branch_coincidence_set, branch_coincidence_set_with, branch_index_set, branch_value_set,
    is_finite_branch, AffinePiece, BranchIndexSet, BranchSets,
};
pub use checks::{
    grid_spacing, require_attractor_is_box, self_similarity_defect, verify_inverse_branches,
    ATTRACTOR_CHECK_RESOLUTION,
};
pub use file::{export_system, load_system, parse_system};
pub use osc::{check_open_set_condition, OscVerdict, OscViolation};
pub use system::{ExpandingMap, IfsSystem, NamedMap, PiecewisePiece};
