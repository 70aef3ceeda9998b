//! Variational Galerkin machinery for stochastic evolution equations driven by
//! Wiener noise and Levy jump noise.
//!
//! The library discretizes equations of the form
//!
//! ```text
//! dX = A(t, X) dt + B(t, X) dW + small-jump compensated term + large-jump term
//! ```
//!
//! on a Gelfand triple `V ⊂ H ⊂ V*`, projects them onto the span of the first
//! `n` basis modes, and provides:
//!
//! * orthonormal spectral bases for the unit interval (Dirichlet) and the
//!   2-torus ([`spaces`]),
//! * Wiener increments, compensated Poisson small-jump increments and
//!   large-jump schedules with an exact atomic-measure isometry check
//!   ([`noise`]),
//! * concrete operator suites — Burgers-type advection-reaction, p-Laplacian,
//!   and 2-d incompressible Navier–Stokes — together with their declared
//!   structural constants ([`operators`]),
//! * numerical probes for hemicontinuity, local monotonicity, coercivity,
//!   growth and the noise-intensity side conditions ([`conditions`]),
//! * path solvers (small-jump and interlaced large-jump), Monte-Carlo moment
//!   estimation, mesh-refinement convergence studies and shared-noise
//!   stability checks ([`solver`]),
//! * a TOML experiment-configuration layer shared with the CLI ([`config`]).
//!
//! Ensemble loops run in parallel via rayon when the default `parallel`
//! feature is enabled; a sequential driver is always available and produces
//! bitwise-identical results (per-trajectory counter-based RNG streams,
//! fixed-order pairwise reduction).

pub mod conditions;
pub mod config;
pub mod error;
pub mod noise;
pub mod operators;
pub mod rng;
pub mod sampler;
pub mod solver;
pub mod spaces;

pub use error::SpdeError;
pub use noise::LevyNoiseSpec;
pub use operators::OperatorSuite;
pub use spaces::{SpatialDiscretization, StateVector};

/// Crate version stamp echoed into output provenance files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
