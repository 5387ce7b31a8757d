//! Scalars and small dense matrices in two regimes: exact rationals and floats.

mod linalg;
mod matrix;
mod scalar;

pub use linalg::symmetric_spectrum;
pub use matrix::Matrix;
pub use scalar::{rational_from_f64, Rational, Scalar, Tolerance};
