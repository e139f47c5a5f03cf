//! Morse-Sturm systems with a timelike Jacobi field in a Lorentzian vector
//! space: focal and pseudo-focal instants, Galerkin discretisation of the
//! index form, and the index theorems that relate them.

pub mod cli;
pub mod curve;
pub mod error;
pub mod generators;
pub mod index_form;
pub mod jacobi;
pub mod linalg;
pub mod problem;
pub mod pseudo;
pub mod scan;

pub use curve::{CurveSpec, MatrixCurve, VectorCurve};
pub use error::{Error, Result};
pub use linalg::{Inertia, MetricForm, SubspaceBasis};
pub use problem::{MorseSturmProblem, Regime, Tolerances, YKind};
