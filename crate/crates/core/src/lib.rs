//! Exact computations with deformed enveloping algebras, their quotients by
//! character ideals, linear Poisson structures, Kontsevich graphs and
//! reduction algebras, for Lie algebras given by rational structure constants.

pub mod algebra;
pub mod cascade;
pub mod corpus;
pub mod enveloping;
pub mod graphs;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod quantization;
pub mod rational;
pub mod reduction;
pub mod workbench;

pub use algebra::{CentralExtension, LieAlgebra, StructureTensor, SubalgebraSetup, ValidationReport};
pub use error::{Error, Result};
pub use poly::{EpsPolynomial, Monomial, Polynomial, TPolynomial};
pub use rational::Rational;
