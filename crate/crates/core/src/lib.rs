//! Numerical laboratory for affine iterated function systems, their
//! self-similar measures and the operators they induce on `L^2`.

pub mod bimodule;
pub mod budget;
pub mod catalog;
pub mod cli_report;
pub mod error;
pub mod geometry;
pub mod ifs_core;
pub mod l2_operators;
pub mod measure;
pub mod symbols;
pub mod table;

pub use error::{Error, Result};
