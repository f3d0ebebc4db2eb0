//! Special functions and quadrature primitives shared by every propagation
//! and scattering module. All operations are pure and reentrant.

pub mod bessel;
pub mod gamma;
pub mod quadrature;

pub use bessel::{bessel_j, j0, j1, j2};
pub use gamma::{gamma_fn, ln_gamma, scaled_incomplete_gamma, upper_incomplete_gamma, GammaArgs};
pub use quadrature::{
    adaptive, gauss_legendre, integrate_radial, integrate_radial_oscillatory, QuadratureSpec,
};
