//! wavesplit — directed-wave diagnostics for 1+1-dimensional hyperbolic
//! systems on a periodic grid emulating the infinite line.
//!
//! The crate simulates three model systems (ideal string, weakly
//! inhomogeneous hyperbolic, dissipative acoustic), splits their states into
//! directed modes with the associated projection operators, and solves the
//! inverse problem: from a noisy single-point measurement record, detect
//! directed components, reconstruct waveforms, estimate arrival times, and
//! localize the source.

pub mod cli;
pub mod diagnose;
pub mod error;
pub mod grid_ops;
pub mod observe;
pub mod projectors;
pub mod spline;
pub mod propagate;
pub(crate) mod spectral;

pub use error::{Category, Error, Result};
