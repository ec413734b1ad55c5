//! One-dimensional numerical kernels: adaptive quadrature, bracketing
//! root finding and golden-section minimisation.
//!
//! All routines take fallible closures so that nested evaluations (an
//! integrand that itself integrates) can surface their own errors.

mod golden;
mod quad;
mod root;

pub use golden::{golden_section_min, Minimum};
pub use quad::{adaptive_simpson, QuadratureError};
pub use root::{bisect, expand_until, RootError};
