//! Unit conversions at the configuration boundary.
//!
//! Internally every Hamiltonian coefficient is an angular frequency in
//! rad/µs and every time is in µs. User-facing values are ordinary
//! frequencies in MHz (or kHz), i.e. the quantity usually quoted as `x/2π`.

pub use std::f64::consts::{PI, TAU as TWO_PI};

/// Ordinary frequency in MHz to angular frequency in rad/µs.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f
}

/// Ordinary frequency in kHz to angular frequency in rad/µs.
#[inline]
pub fn khz(f: f64) -> f64 {
    TWO_PI * f * 1e-3
}

/// Angular frequency in rad/µs back to MHz.
#[inline]
pub fn to_mhz(w: f64) -> f64 {
    w / TWO_PI
}

/// Nanoseconds to microseconds.
#[inline]
pub fn ns(t: f64) -> f64 {
    t * 1e-3
}
