//! Exact algebra for smooth functions of noncommuting variables over triangular
//! real Lie algebras: structure constants, PBW normal forms, adapted systems of
//! representations, matrix-valued seminorms, functional calculi and local sections.

pub mod calculus;
pub mod catalog;
pub mod cli;
pub mod demo;
pub mod flag;
pub mod lie;
pub mod linalg;
pub mod ncfunc;
pub mod pbw;
pub mod poly;
pub mod reps;
pub mod scalar;
pub mod seminorm_lab;
pub mod sheaf;

pub use lie::{LieAlgebra, LieError, Subspace};
pub use scalar::{Field, Scalar};
