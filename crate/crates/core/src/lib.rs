//! Bloch-band and Zak-basis simulation of Cooper-pair boxes and transmons
//! with switchable inductive and 4π-periodic shunts.
//!
//! Energies are in units of `E_J` and times in units of `1/E_J` (ħ = 1).

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod error;
pub mod evolution;
pub mod fluxonium;
pub mod fourpi;
pub mod linalg;
pub mod params;
pub mod zak;

pub use error::{Error, Result};
pub use params::{CircuitParams, ShuntKind};
pub use zak::{BlochPoint, ZakField, ZakGrid};
