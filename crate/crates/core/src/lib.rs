//! Bilinear liftings of controlled Itô SDEs and continuous-time filters on them.
//!
//! - [`sde`]: system model, seeded Brownian increments, Euler–Maruyama paths.
//! - [`lifting`]: observable dictionaries, Itô-generator projection onto a
//!   monomial span (Koopman lift), Carleman embeddings, truncation residuals.
//! - [`filtering`]: the generalized Riccati filter on a bilinear lift and the
//!   generic second-order nonlinear filter used to cross-check it.
//! - [`paper`]: the two-state polynomial benchmark with its hard-coded
//!   eigenfunction lift.
//! - [`harness`]: configuration, Monte Carlo runs, metrics and CSV output.

pub mod error;
pub mod filtering;
pub mod harness;
pub mod lifting;
pub mod paper;
pub mod sde;

pub use error::{Error, Result};
