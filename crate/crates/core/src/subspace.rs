//! Random subspaces and finite-difference gradient estimates.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{counted_eval, EvaluationLedger, Fidelity};
use crate::objective::BiFidelityProblem;
use crate::{Matrix, Vector};

/// A `D x ℓ` matrix with Haar-distributed column space and `PᵀP = (D/ℓ) I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    entries: Matrix,
}

impl ProjectionMatrix {
    /// Draws a Gaussian `D x ℓ` matrix, orthonormalizes it by QR with the
    /// diagonal of `R` made positive, and scales by `sqrt(D/ℓ)`.
    pub fn sample<R: Rng + ?Sized>(dim: usize, subdim: usize, rng: &mut R) -> Result<Self> {
        if subdim == 0 || subdim > dim {
            return Err(Error::config(format!(
                "subspace dimension must lie in 1..={dim}, got {subdim}"
            )));
        }
        let gaussian = Matrix::from_fn(dim, subdim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = gaussian.qr();
        let r = qr.r();
        let mut q = qr.q();
        let scale = (dim as f64 / subdim as f64).sqrt();
        for (j, mut col) in q.column_iter_mut().enumerate() {
            let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
            col *= sign * scale;
        }
        Ok(ProjectionMatrix { entries: q })
    }

    /// Wraps an explicit matrix without checking the scaling identity.
    pub fn from_entries(entries: Matrix) -> Self {
        ProjectionMatrix { entries }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn subdim(&self) -> usize {
        self.entries.ncols()
    }

    /// Largest entrywise deviation of `PᵀP` from `(D/ℓ) I`.
    pub fn scaling_defect(&self) -> f64 {
        let gram = self.entries.transpose() * &self.entries;
        let target = self.dim() as f64 / self.subdim() as f64;
        let mut worst: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expect = if i == j { target } else { 0.0 };
                worst = worst.max((gram[(i, j)] - expect).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceScheme {
    /// `(f(x + Δp) − f(x)) / Δ`, one probe per column.
    #[default]
    Forward,
    /// `(f(x + Δp) − f(x − Δp)) / 2Δ`, two probes per column.
    Central,
}

/// Finite-difference increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Increment {
    /// `Δ = scale * max(1, ‖x‖)`.
    Relative(f64),
    Absolute(f64),
}

impl Default for Increment {
    fn default() -> Self {
        Increment::Relative(1e-6)
    }
}

impl Increment {
    pub fn at(&self, x: &Vector) -> f64 {
        match *self {
            Increment::Relative(s) => s * x.norm().max(1.0),
            Increment::Absolute(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    /// Directional differences along each column, length `ℓ`.
    pub projected: Vector,
    /// `P * projected`.
    pub lifted: Vector,
    /// `lifted / ‖lifted‖`, or zero when the estimate vanishes.
    pub direction: Vector,
    pub magnitude: f64,
}

impl GradientEstimate {
    pub fn from_projected(p: &ProjectionMatrix, projected: Vector) -> Self {
        let lifted = p.entries() * &projected;
        Self::from_lifted(projected, lifted)
    }

    fn from_lifted(projected: Vector, lifted: Vector) -> Self {
        let magnitude = lifted.norm();
        let direction = if magnitude > 0.0 {
            &lifted / magnitude
        } else {
            Vector::zeros(lifted.len())
        };
        GradientEstimate {
            projected,
            lifted,
            direction,
            magnitude,
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.magnitude == 0.0
    }
}

/// Finite-difference derivatives of the HF objective along the columns of `p`.
///
/// `fx` must be the already-counted `f^HF(x)`. Costs `ℓ` HF calls with the
/// forward scheme and `2ℓ` with the central one.
pub fn estimate_gradient(
    problem: &BiFidelityProblem,
    ledger: &mut EvaluationLedger,
    x: &Vector,
    fx: f64,
    p: &ProjectionMatrix,
    delta: f64,
    scheme: DifferenceScheme,
) -> Result<GradientEstimate> {
    if !(delta > 0.0) {
        return Err(Error::contract(format!("increment must be positive, got {delta}")));
    }
    let mut projected = Vector::zeros(p.subdim());
    let mut probe = x.clone();
    for (i, col) in p.entries().column_iter().enumerate() {
        probe.copy_from(x);
        probe.axpy(delta, &col, 1.0);
        let plus = counted_eval(problem, ledger, Fidelity::High, &probe)?;
        projected[i] = match scheme {
            DifferenceScheme::Forward => (plus - fx) / delta,
            DifferenceScheme::Central => {
                probe.copy_from(x);
                probe.axpy(-delta, &col, 1.0);
                let minus = counted_eval(problem, ledger, Fidelity::High, &probe)?;
                (plus - minus) / (2.0 * delta)
            }
        };
    }
    Ok(GradientEstimate::from_projected(p, projected))
}
