//! Two models of the real Grassmannian, and what they buy you.
//!
//! A `d`-dimensional subspace of `R^n` is represented either projectively, by
//! its Plücker vector of maximal minors, or affinely, by the orthogonal
//! projection matrix onto it. This crate converts exactly between the two and
//! builds on them:
//!
//! - [`plucker`]: Plücker vectors, relation residuals, cocircuit matrices.
//! - [`projector`]: projection matrices, conversions, the duality `P -> Id - P`.
//! - [`sgrass`]: the squared Grassmannian and its membership tests.
//! - [`dpp`]: projection determinantal point processes, exact and sampled.
//! - [`likelihood`]: maximum-likelihood fitting of the squared and positive models.
//! - [`moment`]: the moment map onto the hypersimplex.
//! - [`graphcut`]: cut spaces of graphs, spanning forests, effective resistance.
//!
//! Everything algebraic is generic over [`Scalar`], implemented for exact
//! rationals ([`Rational`]) and for `f64`/`f32`. The aliases below fix the
//! two regimes used in practice.

pub mod dpp;
pub mod error;
pub mod graphcut;
pub mod io;
pub mod likelihood;
pub mod moment;
pub mod numkit;
pub mod plucker;
pub mod projector;
pub mod sgrass;
pub mod subset;

pub use error::{Error, Result};
pub use numkit::{Matrix, Rational, Scalar, Tolerance};
pub use plucker::{Basis, PluckerVector};
pub use projector::ProjectionMatrix;
pub use sgrass::SquaredPlucker;
pub use subset::{SubsetIndex, SubsetMap};

pub type ExactMatrix = Matrix<Rational>;
pub type ExactBasis = Basis<Rational>;
pub type ExactPlucker = PluckerVector<Rational>;
pub type ExactProjection = ProjectionMatrix<Rational>;
pub type ExactSquaredPlucker = SquaredPlucker<Rational>;

pub type FloatMatrix = Matrix<f64>;
pub type FloatBasis = Basis<f64>;
pub type FloatPlucker = PluckerVector<f64>;
pub type FloatProjection = ProjectionMatrix<f64>;
pub type FloatSquaredPlucker = SquaredPlucker<f64>;
