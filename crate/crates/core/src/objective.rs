//! Black-box objectives and high/low-fidelity pairs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Vector;

/// A deterministic map from `R^D` to `R`.
///
/// Implementations must be pure: the same input yields a bit-identical output,
/// and concurrent evaluation from several runs must be safe.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Vector) -> f64;
}

pub type ObjectiveHandle = Arc<dyn Objective>;

/// Analytic gradient, only used as a test oracle.
pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }

    pub fn handle(dim: usize, f: F) -> ObjectiveHandle
    where
        F: 'static,
    {
        Arc::new(Self::new(dim, f))
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> f64 {
        (self.f)(x)
    }
}

/// `scale * inner(x)`; used to build exactly proportional pairs.
pub struct Scaled {
    pub inner: ObjectiveHandle,
    pub scale: f64,
}

impl Objective for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.scale * self.inner.eval(x)
    }
}

/// A high-fidelity objective paired with a cheaper low-fidelity one.
#[derive(Clone)]
pub struct BiFidelityProblem {
    name: String,
    hf: ObjectiveHandle,
    lf: ObjectiveHandle,
    lf_cost_ratio: f64,
    analytic_gradient: Option<GradientFn>,
    known_optimum: Option<f64>,
    smoothness: Option<f64>,
    initial_point: Vector,
}

impl BiFidelityProblem {
    /// `lf_cost_ratio` is the cost of one LF call in units of one HF call.
    pub fn new(
        name: impl Into<String>,
        hf: ObjectiveHandle,
        lf: ObjectiveHandle,
        lf_cost_ratio: f64,
    ) -> Result<Self> {
        if hf.dim() == 0 {
            return Err(Error::config("objective dimension must be positive"));
        }
        if hf.dim() != lf.dim() {
            return Err(Error::config(format!(
                "HF dimension {} differs from LF dimension {}",
                hf.dim(),
                lf.dim()
            )));
        }
        if !(lf_cost_ratio > 0.0 && lf_cost_ratio <= 1.0) {
            return Err(Error::config(format!(
                "lf_cost_ratio must lie in (0, 1], got {lf_cost_ratio}"
            )));
        }
        let dim = hf.dim();
        Ok(BiFidelityProblem {
            name: name.into(),
            hf,
            lf,
            lf_cost_ratio,
            analytic_gradient: None,
            known_optimum: None,
            smoothness: None,
            initial_point: Vector::zeros(dim),
        })
    }

    pub fn with_gradient(mut self, gradient: GradientFn) -> Self {
        self.analytic_gradient = Some(gradient);
        self
    }

    pub fn with_known_optimum(mut self, value: f64) -> Self {
        self.known_optimum = Some(value);
        self
    }

    /// Lipschitz constant of the HF gradient, used to resolve default fixed steps.
    pub fn with_smoothness(mut self, lipschitz: f64) -> Self {
        self.smoothness = Some(lipschitz);
        self
    }

    pub fn with_initial_point(mut self, x0: Vector) -> Result<Self> {
        if x0.len() != self.dim() {
            return Err(Error::config(format!(
                "initial point has length {}, expected {}",
                x0.len(),
                self.dim()
            )));
        }
        self.initial_point = x0;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.hf.dim()
    }

    pub fn hf(&self) -> &ObjectiveHandle {
        &self.hf
    }

    pub fn lf(&self) -> &ObjectiveHandle {
        &self.lf
    }

    pub fn lf_cost_ratio(&self) -> f64 {
        self.lf_cost_ratio
    }

    pub fn analytic_gradient(&self) -> Option<&GradientFn> {
        self.analytic_gradient.as_ref()
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn initial_point(&self) -> &Vector {
        &self.initial_point
    }
}

impl fmt::Debug for BiFidelityProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BiFidelityProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("lf_cost_ratio", &self.lf_cost_ratio)
            .field("known_optimum", &self.known_optimum)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}
