//! Truncated divided power envelopes of a polynomial chart, their fiber powers, and the
//! cosimplicial structure maps between fiber powers.
//!
//! A chart P = A[x₁..x_d] with J = (f₁..f_e) is accepted when the f_i have unit leading
//! coefficients and pairwise coprime leading monomials (grlex). Then the f_i are a regular
//! sequence, P is free over A[f] on the standard monomials, and the envelope is free over A on
//! x^α T^{[K]} with α standard and T_i ↦ f_i. Fiber level ν adjoins ν·d weight-one variables
//! ξ_{s,j} = x_j^{(0)} − x_j^{(s)}.

mod carrier;
mod maps;
pub mod poly;
mod presentation;

use thiserror::Error;

use crate::exactalg::ExactAlgError;
use crate::pdpoly::SyntaxError;

pub use carrier::{Carrier, CarrierElement, Exponents};
pub use maps::{alternating_coface_sum, codegeneracy_maps, coface_maps, slot_map, CarrierMap};
pub use poly::Poly;
pub use presentation::{build_envelope, fiber_power_envelope, AlgebraPresentation, CosimplicialLevel, EnvelopePresentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvelopeError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("unknown symbol '{name}' at column {column}")]
    UnknownSymbol { name: String, column: usize },
    #[error("ideal generators fail the J/J² basis hypothesis: {0}")]
    BasisHypothesis(String),
    #[error("inhomogeneous ideal generators need a weight cutoff")]
    MissingWeightCutoff,
    #[error("relations and ideal generators disagree: {0}")]
    RelationMismatch(String),
    #[error("unsupported presentation: {0}")]
    Unsupported(String),
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("element is not in the divided power ideal")]
    NotInPdIdeal,
    #[error("not a divided power map: {0}")]
    NotPdMap(String),
    #[error(transparent)]
    Ring(#[from] ExactAlgError),
}
