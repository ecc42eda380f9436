//! Stochastic simulation of the spatially extended degenerate optical
//! parametric oscillator in the Q representation.
//!
//! * [`lattice`]: parameters, periodic grid, field containers, unitary DFT.
//! * [`linear`]: threshold, dispersion relation, homogeneous states, squeezing
//!   directions and linearized variances.
//! * [`engine`]: split-step Langevin integrator with the positivity guard.
//! * [`observables`]: mode normalization, Q-moment accumulation, reordering
//!   to normal order, quadrature and twin-beam variances.
//! * [`config`] and [`ensemble`]: run configuration, presets, ensemble runs
//!   and output files.

pub mod config;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod lattice;
pub mod linear;
pub mod observables;

pub use error::{Error, Result};
pub use lattice::{build_grid, FieldState, Grid, InitKind, Params, Spectral};
