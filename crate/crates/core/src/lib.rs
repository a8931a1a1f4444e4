//! Fourier analysis of subsets of F_q^d: exact finite-field arithmetic, fast transforms,
//! L^p spectral norms and empirical Salem exponents, a zoo of example sets, additive
//! and geometric counters, character sums, and a sweep harness.

pub mod charsums;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod gf;
pub mod harness;
pub mod lattice;
pub mod numeric;
pub mod spectrum;

pub use error::{Error, Result};
pub use gf::{Field, FieldElement};
pub use lattice::{Ambient, PointSet, SetFile};
pub use spectrum::{fourier_transform, lp_norm, salem_exponent, FourierTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
