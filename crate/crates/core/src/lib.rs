//! Finite, exact models of commutator maps `S -> TS - ST` on operator
//! ideals over l2, with the spectral and series tools used to study their
//! orbits.

pub mod certificate;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod operators;
pub mod sampling;
pub mod series;
pub mod spectral;

pub use error::{LabError, Result};
