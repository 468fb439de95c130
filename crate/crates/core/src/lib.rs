//! Semigroup actions on finite metric spaces and their lifts to spaces of
//! probability measures.
//!
//! Everything that touches a measure is exact rational arithmetic ([`Q`]).
//! The crate decides proximality and strong proximality of finitely
//! generated actions with replayable witness words, implements measure
//! pushforward and the barycenter map on grid-discretized measure spaces,
//! and checks the equivalences between base and lifted dynamics as
//! executable properties.
//!
//! Words are always applied left to right: the word `[a, b]` acts as
//! generator `a` followed by generator `b`.

#![allow(clippy::needless_range_loop)]

pub mod actions;
pub mod affine;
mod error;
pub mod lift;
pub mod linalg;
pub mod proximality;
pub mod sample;
pub mod spaces;

pub use error::{Error, Result};

use num::{BigInt, BigRational};

/// Exact rational scalar used for every weight, distance and coefficient.
pub type Q = BigRational;

/// Shorthand for the rational `num / den`.
///
/// Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}
