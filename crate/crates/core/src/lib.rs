//! Exact crystalline cohomology of affine algebras over divided power base rings.
//!
//! Computations run through truncated divided power envelopes of a polynomial chart,
//! their Čech-Alexander and de Rham complexes, and exact linear algebra over ℤ, ℚ and ℤ/N.

pub mod exactalg;
pub mod homcx;
pub mod derham;
pub mod envelope;
pub mod pdpoly;
pub mod crystal;
pub mod cechcomp;
