//! Finite sums with a fixed mini-batch as the low-fidelity model.

use std::sync::Arc;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::objective::{BiFidelityProblem, Objective, ObjectiveHandle};
use crate::rng::RngStream;
use crate::{Matrix, Vector};

/// Mean of a list of component objectives.
pub struct MeanOf {
    parts: Vec<ObjectiveHandle>,
    dim: usize,
}

impl Objective for MeanOf {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.parts.iter().map(|f| f.eval(x)).sum::<f64>() / self.parts.len() as f64
    }
}

/// HF averages all components, LF a subset of size `r` drawn once from `rng`.
pub fn make_subsampled_pair(
    components: Vec<ObjectiveHandle>,
    r: usize,
    rng: RngStream,
) -> Result<BiFidelityProblem> {
    let n = components.len();
    if n == 0 {
        return Err(Error::config("need at least one component"));
    }
    if r == 0 || r > n {
        return Err(Error::config(format!("subset size must lie in 1..={n}, got {r}")));
    }
    let dim = components[0].dim();
    if components.iter().any(|c| c.dim() != dim) {
        return Err(Error::config("components disagree on dimension"));
    }
    let mut subset = sample(&mut rng.rng(), n, r).into_vec();
    subset.sort_unstable();
    let lf = MeanOf {
        parts: subset.iter().map(|&i| components[i].clone()).collect(),
        dim,
    };
    let hf = MeanOf {
        parts: components,
        dim,
    };
    BiFidelityProblem::new(
        format!("subsampled(n={n}, r={r})"),
        Arc::new(hf),
        Arc::new(lf),
        r as f64 / n as f64,
    )
}

/// `½(⟨z, x⟩ − y)²`.
pub struct SquaredResidual {
    pub features: Vector,
    pub target: f64,
}

impl Objective for SquaredResidual {
    fn dim(&self) -> usize {
        self.features.len()
    }

    fn eval(&self, x: &Vector) -> f64 {
        let r = self.features.dot(x) - self.target;
        0.5 * r * r
    }
}

/// One least-squares component per row of `z`.
pub fn least_squares_components(z: &Matrix, y: &Vector) -> Vec<ObjectiveHandle> {
    z.row_iter()
        .zip(y.iter())
        .map(|(row, &t)| {
            Arc::new(SquaredResidual {
                features: row.transpose(),
                target: t,
            }) as ObjectiveHandle
        })
        .collect()
}
