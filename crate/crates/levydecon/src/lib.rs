//! Recovery of the Lévy density of the integrator measure of an infinitely
//! divisible moving-average random field from gridded observations.
//!
//! A field `X(t) = ∫ f(t-x) Λ(dx)` driven by a stationary independently
//! scattered pure-jump measure `Λ` has a Lévy density `v1` related to the
//! integrator density `v0` by a scaled-kernel integral equation. This crate
//! estimates `u·v1` from low-frequency lattice observations of `X` and
//! inverts the integral equation by Fourier analysis on the multiplicative
//! group `ℝ∖{0}` with a spectral cutoff as regularization.
//!
//! Module map:
//! - [`logfourier`] — grids, the multiplicative-group transform and its
//!   inverse, the weight isometry, Sobolev-weight diagnostics.
//! - [`multiplier`] — the symbol the scaled-kernel operator diagonalizes to,
//!   solvability checks, lower-bound certificates.
//! - [`levy_model`] — kernel and density catalog, triplet pushforward,
//!   characteristic exponents, special functions.
//! - [`simulate`] — exact compound-Poisson shot-noise simulation of the field.
//! - [`estimate`] — empirical characteristic function, truncated-Fourier
//!   density estimator, regularized plug-in inversion, error metrics.
//! - [`studyctl`] — experiment configuration, seeded replication, summaries.

pub mod estimate;
pub mod levy_model;
pub mod logfourier;
pub mod multiplier;
mod quad;
pub mod simulate;
pub mod studyctl;

pub use num_complex::Complex64;
