//! Explicit finite-volume solver for one-dimensional water/air flow in a
//! porous medium, together with its vanishing air-viscosity limit (a
//! Richards-type equation with an obstacle constraint at saturation).
//!
//! The crate is organised bottom-up:
//!
//! - [`physics`]: constitutive closures `k_w`, `k_a`, `p_c` and the
//!   viscosity ratio.
//! - [`transforms`]: saturation integrals (`g`, `zeta`, `Q`, `R`, `psi`)
//!   and their tables.
//! - [`solver`]: grid, sources, fluxes and time stepping of both schemes.
//! - [`diagnostics`]: discrete energy and translate functionals and the
//!   viscosity sweep.
//! - [`config`], [`experiment`], [`output`], [`cli`]: experiment plumbing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod output;
pub mod physics;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};
