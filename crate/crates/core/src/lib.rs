//! Exact-arithmetic counting of modular-group orbit points around the axis of
//! a hyperbolic conjugacy class, together with the spectral main term, the
//! Huber-transform special functions, and the experiment drivers that compare
//! the two sides.
//!
//! The crate is organized bottom-up:
//!
//! - [`exactnum`]: rationals, elements of a real quadratic field, exact 2x2
//!   matrix algebra, Moebius action and hyperbolic distance functionals.
//! - [`forms`]: indefinite binary quadratic forms, Pell fundamental solutions,
//!   the form/matrix correspondence, reduction cycles and the diagonalizing
//!   frame of a class.
//! - [`counting`]: canonical orbit representatives, exact entry radii, the
//!   counting functions and their brute-force oracle.
//! - [`huber`]: Legendre/hypergeometric evaluation on the imaginary axis, the
//!   transform of the trapezoid test functions by independent routes, and the
//!   coefficient functions used by the main term.
//! - [`experiments`]: error-exponent fits, exact mean-square integrals, Hecke
//!   tables and the sandwich/convention audits.

pub mod counting;
pub mod exactnum;
pub mod experiments;
pub mod forms;
pub mod huber;

pub use exactnum::{BigRat, HPoint, IMat2, QMat2, QuadRat};
