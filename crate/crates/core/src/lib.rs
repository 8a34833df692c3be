//! Weierstrass curves: numerical semigroups, canonical bases, FS determinants
//! and mu-functions, Riemann theta, periods, Abel maps and Jacobi inversion.

pub mod curve;
pub mod error;
pub mod fs_mu;
pub mod inversion;
pub mod periods;
pub mod quadrature;
pub mod samples;
pub mod semigroup;
pub mod theta;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
