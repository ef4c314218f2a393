//! Supersymmetric quantum mechanics on a computer: superpotentials and
//! their partner Hamiltonians, Mielnik-type one-parameter families,
//! dressed ladder operators, and the integrals of motion of planar
//! Hamiltonians assembled from them.
//!
//! Conventions: ħ = 1, `H = -½∂² + V`, first-order factors
//! `A = (∂ + W)/√2`, `A† = (-∂ + W)/√2`.

pub mod band;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod grid;
pub mod operator;
pub mod painleve;
pub mod quadrature;
pub mod schrodinger;
pub mod stencil;
pub mod superint;
pub mod susy;
pub mod systems;

pub use error::{Error, Result};
pub use expr::Expr;
pub use grid::{Grid, GridFunction};
pub use operator::{DiffOperator, OperatorChain};
