//! Exact lattice, cone and fan computations for toric flips and flops.
//!
//! The crate is organised bottom-up: [`lattice`] provides integer linear
//! algebra, [`cone`] rational polyhedral cones, [`semigroup`] Hilbert bases
//! and membership, [`fan`] fans and refinements, [`flip`] wall relations and
//! flip fans, [`criteria`] the normality and reducedness decision procedures
//! with their brute-force oracles, [`torus`] fiber products of tori, and
//! [`fixtures`] named example relations.

pub mod cone;
pub mod criteria;
pub mod error;
pub mod fan;
pub mod fixtures;
pub mod flip;
pub mod lattice;
pub mod semigroup;
pub mod torus;

pub use error::{Error, Result};
