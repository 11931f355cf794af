//! Numerical engine for paracontrolled analysis of Volterra equations of
//! convolution type on a uniform periodic grid.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`]: sampled functions, L^p norms, shifts, dilation, vector fields;
//! * [`spectral`]: dyadic partition of unity, Littlewood-Paley blocks via FFT,
//!   Besov norms, and empirical regularity estimation;
//! * [`paracalc`]: Bony paraproducts, the resonant term, FFT convolution, the
//!   commutators Gamma and R_phi, and the linearization remainder S_sigma;
//! * [`kernels`]: step, fractional, and cutoff kernel constructors plus
//!   kernel-quality reports;
//! * [`special`]: Gamma-backed fractional Bessel J_nu, its zeros, and the
//!   Mittag-Leffler function (test oracle);
//! * [`roughpath`]: convolutional rough paths: smooth lifts, stochastic series
//!   constructions with truncation schedules and Cauchy diagnostics, and the
//!   ill-posedness probe;
//! * [`solver`]: Young, jumps-variant, and paracontrolled fixed-point solvers,
//!   the scaling/localization driver, and the continuity probe;
//! * [`models`]: application drivers (delay RDE, fractional SDE, Levy SDE,
//!   moving average) and independent path samplers used as oracles;
//! * [`acceptance`]: the property-based acceptance suite shared by the test
//!   target and the CLI.
//!
//! Everything lives on a periodic grid of N samples over [0, L); objects of
//! interest are required to be supported in [0, L/2] so that periodic
//! convolution agrees with convolution on the line over the window of
//! interest.

pub mod acceptance;
pub mod error;
pub mod fft;
pub mod grid;
pub mod kernels;
pub mod models;
pub mod paracalc;
pub mod roughpath;
pub mod rng;
pub mod solver;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridFunction, GridSpec, VectorField};
pub use spectral::{BesovParams, DyadicPartition};
