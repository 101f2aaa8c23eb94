//! Finite-difference simulation of the Allen-Cahn equation with the
//! double-obstacle constraint and its Yosida regularization, together with
//! the measure-theoretic diagnostics used to check that the zero level set
//! moves by mean curvature: diffuse energy and discrepancy measures, the
//! backward-heat-kernel (Huisken) functional, density ratios, the energy
//! dissipation identity and the Brakke functional.
//!
//! The crate is organized as a library with one thin command-line binary;
//! the `examples/` directory has one runnable example per major capability.

pub mod cli;
pub mod config;
pub mod grid;
pub mod initial;
pub mod mcf;
pub mod measures;
pub mod potential;
pub mod quadrature;
pub mod solver;

pub use grid::{Grid, ScalarField};
pub use potential::{ObstacleParam, ProfileParam};
pub use solver::{PhaseState, Scheme, SolverConfig};
