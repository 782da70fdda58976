//! Zeroth-order optimization with a bi-fidelity line search.
//!
//! The crate is organised around a small number of pieces:
//!
//! * [`objective`], [`ledger`], [`trace`] and [`rng`] hold the shared domain
//!   types: black-box objectives, high/low-fidelity pairs, evaluation
//!   accounting in equivalent high-fidelity calls, and seeded run traces.
//! * [`subspace`] samples Haar projections and forms finite-difference
//!   gradient estimates inside a random subspace.
//! * [`linesearch`] builds the one-dimensional bi-fidelity surrogate and runs
//!   Armijo backtracking on it, plus the single-fidelity searches.
//! * [`optimizers`] contains BF-SSD and the eight baseline engines.
//! * [`problems`] provides benchmark problems and bi-fidelity pair recipes.
//! * [`bench`] and [`config`] drive seeded multi-trial experiments and emit
//!   CSV tables and SVG convergence plots.

pub mod bench;
pub mod config;
pub mod error;
pub mod ledger;
pub mod linesearch;
pub mod objective;
pub mod optimizers;
pub mod problems;
pub mod rng;
pub mod subspace;
pub mod trace;

pub use error::{Error, Result};
pub use ledger::{counted_eval, EvaluationLedger, Fidelity};
pub use objective::{BiFidelityProblem, FnObjective, Objective, ObjectiveHandle};
pub use optimizers::{run, Method, OptimizerConfig, RunOutcome};
pub use rng::RngStream;
pub use trace::{Checkpoint, RunTrace};

/// Dense column vector used for every decision variable in the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense column-major matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
