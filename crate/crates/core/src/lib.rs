//! Small-matrix toolkit for exceptional points of complex-symmetric pencils
//! `H(λ) = H0 + λ·H1`.
//!
//! An exceptional point of order N (EPN) is a parameter value where N
//! eigenvalues *and* their eigenvectors coalesce into a single Jordan block.
//! This crate constructs 3×3 families with an EP3 at λ = 0 in closed form,
//! tracks eigenvalue branches through the complex λ-plane, measures monodromy
//! permutations, fits the fractional-power splitting laws near a branch
//! point, locates EPs of user-supplied families by Newton/Gauss-Newton
//! iteration, and classifies the chiral (left/right helix) phase structure of
//! the three levels surrounding an EP3.
//!
//! All numerics are generic over the underlying real scalar via [`Real`];
//! the `*64` aliases at the crate root pin `f64`, which is what the test
//! suite and the CLI use.

// index loops over fixed 2×2/3×3 shapes read better than iterator chains
#![allow(clippy::needless_range_loop)]

pub mod chirality;
pub mod cmatrix;
pub mod continuation;
pub mod epsearch;
mod error;
pub mod model;
pub mod puiseux;

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::{Error, Result};

/// Real scalar the crate is generic over: `f32` or `f64` in practice.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}
impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand used throughout: `T::from_f64` with the panic folded in.
/// Conversion of an honest `f64` constant into `T` cannot fail for the
/// float types this crate targets.
pub(crate) fn rl<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant conversion")
}

/// Complex constant from `f64` parts.
pub(crate) fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(rl(re), rl(im))
}

/// Flush signed zeros (`-0.0` → `+0.0`) before a branch-sensitive root.
/// Complex division routinely leaves a `-0.0` imaginary part on negative
/// real results, which would silently select `arg = -π` instead of the
/// principal `+π` branch.
pub(crate) fn branch_clean<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.re + T::zero(), z.im + T::zero())
}

pub use cmatrix::{CSymMatrix, CVec, CubicCoeffs, EigenSet};
pub use model::{EP3Reference, Family, GenericFamilyParams, SpecialFamilyParams, TunableFamily};

/// Concrete double-precision aliases.
pub type C64 = Complex<f64>;
pub type CVec64 = CVec<f64>;
pub type CSymMatrix64 = CSymMatrix<f64>;
pub type CubicCoeffs64 = CubicCoeffs<f64>;
pub type EigenSet64 = EigenSet<f64>;
pub type Family64 = Family<f64>;
