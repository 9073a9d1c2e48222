//! Numerical core for Toeplitz and Fredholm determinant identities.
//!
//! Everything here is `no_std` with `alloc`: Laurent-series arithmetic and
//! Wiener-Hopf factors ([`series`]), truncated Toeplitz/Hankel operators and
//! the Borodin-Okounkov kernel ([`operators`]), tilted charts and their
//! oblique Fredholm determinants ([`tilt`]), bialternants and Jacobi-Trudi
//! sums ([`symfun`]), time flows of exponential symbols ([`flows`]) and the
//! Airy-scale kernels ([`airy`]).
#![no_std]

extern crate alloc;

pub mod airy;
pub mod diff;
mod error;
pub mod flows;
pub mod linalg;
pub mod operators;
pub mod quad;
pub mod series;
pub mod symfun;
pub mod tilt;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Shorthand for a real number as a complex value.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
