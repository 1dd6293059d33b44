//! Numerical laboratory for semimartingale-driven stochastic fluid models.
//!
//! The crate samples driving semimartingales `S_t = (t, W^1, ..., W^K)`,
//! performs Stratonovich calculus against them, and integrates stochastic
//! transport equations on the doubly periodic 2-torus with pseudo-spectral
//! space discretization and Heun (stochastic predictor-corrector) time
//! stepping:
//!
//! - incompressible stochastic Euler flow with transport noise, in both
//!   vorticity and velocity form, with the two-part semimartingale pressure
//!   `dp = P0 dt + sum_k Pk o dW^k` recovered diagnostically;
//! - stochastic rotating shallow water in vector-invariant (curl) form;
//! - scalar and density advection along the stochastic flow, plus particle
//!   characteristics for pathwise invariance checks.

pub mod advection;
pub mod error;
mod fft;
pub mod fields;
pub mod noise_basis;
pub mod paths;
pub mod salt_euler;
pub mod salt_rsw;
pub mod stratonovich;
mod rng;

pub use error::{Error, Result};
