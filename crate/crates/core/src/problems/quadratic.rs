//! Quadratic objectives with a truncated-spectrum low-fidelity model.

use std::sync::Arc;

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::objective::{BiFidelityProblem, Objective};
use crate::{Matrix, Vector};

/// `½⟨x, A x⟩ + ⟨x, a⟩`.
pub struct Quadratic {
    pub hessian: Matrix,
    pub linear: Vector,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn eval(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + x.dot(&self.linear)
    }
}

#[derive(Debug, Clone)]
pub struct LowRankQuadraticPair {
    pub problem: BiFidelityProblem,
    /// `λ_{r+1}(A)`; zero when `r` reaches the rank.
    pub tail_eigenvalue: f64,
}

impl LowRankQuadraticPair {
    /// Bound on the Lipschitz constant of `f^HF − f^LF` over the ball of
    /// radius `radius`.
    pub fn w_bound(&self, radius: f64) -> f64 {
        self.tail_eigenvalue * radius
    }
}

/// HF uses `A`, LF its best rank-`r` approximation. Cost ratio `r / D`.
pub fn make_lowrank_quadratic_pair(
    a: &Matrix,
    linear: &Vector,
    rank: usize,
) -> Result<LowRankQuadraticPair> {
    let d = linear.len();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::config("Hessian shape does not match the linear term"));
    }
    if rank == 0 || rank > d {
        return Err(Error::config(format!("rank must lie in 1..={d}, got {rank}")));
    }
    let eig = SymmetricEigen::new(a.clone());
    if eig.eigenvalues.iter().any(|&v| v < -1e-10) {
        return Err(Error::config("Hessian must be positive semidefinite"));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut truncated = Matrix::zeros(d, d);
    for &i in &order[..rank] {
        let v = eig.eigenvectors.column(i);
        truncated += v * v.transpose() * eig.eigenvalues[i];
    }
    let tail_eigenvalue = order.get(rank).map_or(0.0, |&i| eig.eigenvalues[i].max(0.0));
    let top = eig.eigenvalues[order[0]].max(0.0);

    let hf = Quadratic {
        hessian: a.clone(),
        linear: linear.clone(),
    };
    let lf = Quadratic {
        hessian: truncated,
        linear: linear.clone(),
    };
    let (h, g) = (a.clone(), linear.clone());
    let mut problem = BiFidelityProblem::new(
        format!("lowrank_quadratic(D={d}, r={rank})"),
        Arc::new(hf),
        Arc::new(lf),
        rank as f64 / d as f64,
    )?
    .with_gradient(Arc::new(move |x: &Vector| &h * x + &g))
    .with_smoothness(top);
    if let Some(chol) = Cholesky::new(a.clone()) {
        let sol = chol.solve(linear);
        problem = problem.with_known_optimum(-0.5 * linear.dot(&sol));
    }
    Ok(LowRankQuadraticPair {
        problem,
        tail_eigenvalue,
    })
}
