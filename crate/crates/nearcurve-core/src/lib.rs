//! Numerical laboratory for counting shifted rational points near planar curves.
//!
//! Given a curve y = f(x) on an interval and a shift θ = (θ₁, θ₂), the central
//! object is the number of pairs (p₁, q) with Q < q ≤ 2Q whose shifted rational
//! point ((p₁+θ₁)/q, ·) lands in a window J and whose scaled ordinate
//! q·f((p₁+θ₁)/q) sits within δ of the integer lattice translated by θ₂. The
//! crate counts those points two independent ways, majorizes the count with a
//! Fejér kernel, probes the dual lattice bodies that control the count from
//! below, measures how well the points cover J, and classifies the associated
//! approximation series.
//!
//! The crate is `no_std`-compatible (disable the default `std` feature; float
//! transcendentals then come from `libm`). IO, the CLI, and parallel scans live
//! in the companion crate `nearcurve-cli`.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod boxdim;
pub mod bounds;
pub mod counting;
pub mod covering;
pub mod curve;
pub mod kernel;
pub mod lattice;
pub mod num;
pub mod psi;

mod error;
mod fx;

pub use error::{Error, Result};
pub use num::{dist_to_nearest_int, Interval};
