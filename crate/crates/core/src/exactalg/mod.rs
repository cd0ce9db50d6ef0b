//! Exact scalars, matrices and the normal forms behind every homology computation.

mod field;
mod howell;
mod matrix;
mod module;
mod ring;
mod snf;

pub use matrix::IntMatrix;
pub use module::{kernel, module_from_relations, row_span_contains, solve_linear, ModuleDescription};
pub use ring::{BaseDpRing, Coefficient, ModulusEffect, PdStructure, RingKind};
pub use snf::smith_normal_form;
pub use howell::howell_form;

pub(crate) use ring::{factorial, residue_u64};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactAlgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("operation requires {expected}, got {got}")]
    WrongRing { expected: &'static str, got: String },
}
