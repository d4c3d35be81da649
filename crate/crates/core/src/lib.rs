//! Filter-based solvers for statistical linear inverse problems `y = A u + η`.
//!
//! The crate treats an ill-posed linear inverse problem as the observation of an
//! artificial static dynamical system and runs three filters over it: the Kalman
//! filter, 3DVAR (covariance frozen at `(γ²/α) Σ₀`) and a variant of 3DVAR with
//! a step-dependent regularization schedule `αₙ`.
//!
//! Every operator used here commutes with the prior covariance, so all filters
//! act mode-by-mode on a shared eigenbasis. For the PDE model problem that basis
//! is the 2D Neumann cosine basis on a square; see [`spectral`].
//!
//! Module map:
//! - [`spectral`]: cosine transforms, diagonal operators, fractional powers.
//! - [`problem`]: truth sampling, synthetic data for both data models, noise calibration.
//! - [`filters`]: the three filter iterations and their closed-form counterparts.
//! - [`analysis`]: parameter rules, predicted rates, bias/variance estimation, slope fits.
//! - [`experiments`]: the end-to-end studies driven by the CLI and the acceptance suite.

pub mod analysis;
pub mod diagonal;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod par;
pub mod problem;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
