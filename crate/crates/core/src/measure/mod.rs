//! The self-similar measure three ways: exact cylinder masses, the
//! Markov-operator fixed point and chaos-game sampling.

pub mod cells;
pub mod chaos;
pub mod masses;

pub use cells::{cell_boxes, cell_centers, cells, index_label, word_images, CylinderCell, Word};
pub use chaos::{chaos_game, chaos_integral, locate, DEFAULT_BURN_IN, STREAMS};
pub use masses::{
    exact_cell_masses, markov_fixpoint, markov_fixpoint_from, markov_step,
    measure_separation_estimate, self_similarity_residual, CellMeasure, MeasureKind,
};
