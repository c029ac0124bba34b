//! Downlink coverage probability and area power consumption (APC) planning
//! for randomly deployed cellular networks.
//!
//! Base stations form a homogeneous Poisson point process; a fraction can be
//! put to sleep, the survivors raise transmit power and optionally use
//! partial frequency reuse to keep a coverage target. This crate provides:
//!
//! - [`model`]: radio / power-consumption / constraint parameter types and
//!   the APC objective,
//! - [`coverage`]: the exact coverage probability, its `alpha = 4` closed
//!   form, four tractable surrogates, and the monomial/posynomial coverage
//!   thresholds they induce,
//! - [`optimizer`]: closed-form and candidate-enumeration minimizers of APC
//!   over active density, transmit power and frequency-reuse factor, plus
//!   bisection refinement and brute-force grid oracles,
//! - [`mcsim`]: a Monte-Carlo point-process simulator used to validate the
//!   analytic coverage expressions,
//! - [`numerics`]: the quadrature and special-function kernels the rest of
//!   the crate is built on.
//!
//! All internal math is in linear SI units: watts for powers, `km^-2` for
//! densities. dB/dBm conversion helpers live in [`model`] and are meant for
//! I/O boundaries only.

pub mod coverage;
pub mod mcsim;
pub mod model;
pub mod numerics;
pub mod optimizer;

pub use coverage::{CoverageError, CoverageSpec, PosyCoeffs, SurrogateKind};
pub use mcsim::{SimConfig, SimError, SimResult};
pub use model::{Constraints, ModelError, PowerModel, RadioEnv, Topology};
pub use optimizer::{CaseLabel, OptError, Provenance, Residuals, Solution};
