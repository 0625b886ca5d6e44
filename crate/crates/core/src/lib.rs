//! Conformal capacity of generalized condensers by a boundary integral
//! equation with the generalized Neumann kernel.
//!
//! The pipeline is: [`geometry`] discretizes the boundary, [`nkernel`] builds
//! the Nyström operators, [`bie`] solves the integral equation for each
//! right-hand side, [`condenser`] assembles the constants and the capacity,
//! and [`field`] evaluates the potential inside the field.

pub mod bie;
pub mod cli;
pub mod condenser;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod gmres;
pub mod nkernel;
pub mod spectral;

pub use num_complex::Complex64 as C64;

pub use bie::{solve_gnk, BieSolution, SolveMode, SolverOptions};
pub use condenser::{
    capacity, classify, prepare, run, two_circle_capacity, CaseInfo, CondenserGeometry,
    CondenserProblem, ConstantsSolution, Prepared, RunOutput,
};
pub use error::{Error, ErrorKind, Result};
pub use field::{grid, harmonic_measure, harmonic_measures, FieldGrid, Mask, PotentialField};
pub use geometry::{discretize, BoundaryComponent, Discretization, Orientation, Role};
pub use nkernel::{DiagonalRule, RHCoefficient, Storage};

/// Rounds to 15 significant digits and prints the shortest form that
/// reads back to the rounded value.
pub fn format_sig(v: f64) -> String {
    format!("{:?}", round_sig(v))
}

pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.14e}").parse().unwrap_or(v)
}
