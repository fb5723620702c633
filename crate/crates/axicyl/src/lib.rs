//! Meridian-plane solver for axisymmetric incompressible flow in a finite
//! cylinder, together with a verification bench for the regularity
//! functionals and inequalities that govern such flows.
//!
//! The flow in {r < R, |z| < a} is evolved in reduced variables — the swirl
//! u = r·v_φ and Γ = ω_φ/r — with the meridian velocity recovered from a
//! stream-function solve each stage. All volume integrals use the r dr dz
//! measure with the constant angular factor dropped on both sides of every
//! inequality.

// Validation guards are written as `!(x > 0.0)` on purpose: the negated form
// rejects NaN, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod bench;
pub mod cli;
pub mod diagnostics;
pub mod io;
pub mod plot;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod field;
pub mod forcing;
pub mod geometry;

pub use error::{Error, Result};

/// Entry point used by the binary: parses the command line, runs the chosen
/// subcommand and maps errors onto stable exit codes.
pub fn cli_main() -> i32 {
    cli::execute()
}
