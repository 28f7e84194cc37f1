//! Computational universal algebra over finite signatures.
//!
//! The crate builds absolutely free and equationally presented free
//! algebras, the algebra of step functions `HM(X)` with exact rational
//! measure, and exhaustive checkers for the diagrams relating them: the
//! naturality of the constant embedding, the canonical homomorphism
//! `h: F(HM(X)) → HM(F(X))`, and the factorization through an HM-valued
//! retract that makes `F(e)` injective.

pub mod error;
pub mod signature;
pub mod term;
pub mod rewrite;
pub mod step;
pub mod hm;
pub mod embedding;
pub mod topology;
pub mod report;

pub use error::{Error, Result};
