//! Pseudo-spectral solver for the damped 3D tropical climate model on a
//! periodic cube, with energy-budget and Besov-criterion diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criterion;
pub mod error;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod inequality_lab;
pub mod ledger;
pub mod littlewood_paley;
pub mod norms;
pub mod operators;

pub use error::{Error, Result};
pub use field::{project_leray, Phase, PhysicalField, SpectralField, State};
pub use grid::Grid;
pub use operators::{ModelParams, Terms};
