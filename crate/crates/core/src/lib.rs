//! Simulation and numerical-verification toolkit for stationary random fields
//! on the integer lattice `Z^d`.
//!
//! The crate provides:
//!
//! * multi-index / rectangle arithmetic and the `2^d` quadrant-corner algebra
//!   ([`lattice`]),
//! * evaluators, inverses and empirical Luxemburg norms for the Young-function
//!   family `Phi_d(x) = x^2 (log(1+x))^(d-1)` and its relatives ([`orlicz`]),
//! * a reproducible counter-based i.i.d. innovation lattice with a quenched
//!   past/future seed split ([`innovations`]),
//! * linear, Volterra and i.i.d.-difference field models with exact conditional
//!   expectations and projection operators ([`fields`]),
//! * partial sums, random centering and normalized path sampling ([`sums`]),
//! * dyadic diagnostics for projective summability conditions ([`conditions`]),
//! * a quenched Monte-Carlo harness testing normalized centered-sum paths
//!   against the Brownian-sheet limit ([`quenched`], [`sheet`]),
//! * a numerical check of a Rosenthal-type moment inequality for
//!   ortho-martingale difference fields ([`rosenthal`]).
//!
//! All scalar math is generic over the floating type via [`Real`]; concrete
//! `f64` aliases are exported at the crate root.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

pub mod conditions;
pub mod error;
pub mod fields;
pub mod innovations;
pub mod lattice;
pub mod numeric;
pub mod orlicz;
pub mod quenched;
pub mod rosenthal;
pub mod sheet;
pub mod stats;
pub mod sums;

pub use error::Error;

/// Scalar type the numeric core is generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum<Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or intermediate.
    #[inline]
    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value representable in scalar type")
    }

    /// Conversion from a lattice count.
    #[inline]
    fn cast_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize value representable in scalar type")
    }

    /// Conversion from a signed lattice quantity.
    #[inline]
    fn cast_i64(n: i64) -> Self {
        Self::from_i64(n).expect("i64 value representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub type YoungFamily64 = orlicz::YoungFamily<f64>;
pub type NormEstimate64 = orlicz::NormEstimate<f64>;
pub type InnovationSpec64 = innovations::InnovationSpec<f64>;
pub type FieldModel64 = fields::FieldModel<f64>;
pub type SigmaReport64 = fields::SigmaReport<f64>;
pub type PathSample64 = sums::PathSample<f64>;
pub type SeriesDiagnostic64 = conditions::SeriesDiagnostic<f64>;
pub type QuenchedConfig64 = quenched::QuenchedConfig<f64>;
pub type QuenchedEnsemble64 = quenched::QuenchedEnsemble<f64>;
pub type RosenthalReport64 = rosenthal::RosenthalReport<f64>;
