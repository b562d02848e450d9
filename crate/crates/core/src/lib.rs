//! Numerical laboratory for the easy-plane chiral magnet energy
//! `E_σ(m) = D(m) + σ²(A(m) + H̃(m))` on unit vector fields over the plane.
//!
//! The library is generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix it to `f64`, which all tolerances assume.

pub mod analytic;
pub mod competitor;
pub mod energy;
pub mod error;
pub mod field;
pub mod fit;
pub mod minimizer;
pub mod reduce;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Director64 = field::Director<f64>;
pub type Grid64 = field::GridSpec<f64>;
pub type Field64 = field::Field<f64>;
pub type Mobius64 = field::MobiusParams<f64>;
