//! Nesterov's worst-case smooth convex quadratic.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::objective::{BiFidelityProblem, Objective};
use crate::Vector;

/// `f(x) = L((x₁² + Σ(xᵢ − xᵢ₊₁)² + x_r²)/8 − x₁/4) + L r / (8(r+1))`.
///
/// Only the first `r` coordinates matter. The minimum value is 0 and the
/// gradient is `L`-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstFunction {
    pub dim: usize,
    pub r: usize,
    pub smoothness: f64,
}

impl WorstFunction {
    pub fn new(dim: usize, r: usize, smoothness: f64) -> Result<Self> {
        if r == 0 || r >= dim {
            return Err(Error::config(format!(
                "intrinsic dimension must satisfy 1 <= r < D, got r={r}, D={dim}"
            )));
        }
        if !(smoothness > 0.0) {
            return Err(Error::config(format!("L must be positive, got {smoothness}")));
        }
        Ok(WorstFunction { dim, r, smoothness })
    }

    pub fn constant(&self) -> f64 {
        let r = self.r as f64;
        self.smoothness * r / (8.0 * (r + 1.0))
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let (r, l) = (self.r, self.smoothness);
        let mut g = Vector::zeros(self.dim);
        for i in 0..r {
            let left = if i == 0 { 0.0 } else { x[i - 1] };
            let right = if i + 1 == r { 0.0 } else { x[i + 1] };
            g[i] = l / 4.0 * (2.0 * x[i] - left - right);
        }
        g[0] -= l / 4.0;
        g
    }

    /// `xᵢ = 1 − i/(r+1)` for `i ≤ r`, zero beyond.
    pub fn minimizer(&self) -> Vector {
        let r = self.r as f64;
        Vector::from_fn(self.dim, |i, _| {
            if i < self.r {
                1.0 - (i + 1) as f64 / (r + 1.0)
            } else {
                0.0
            }
        })
    }
}

impl Objective for WorstFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> f64 {
        let head = &x.as_slice()[..self.r];
        let mut quad = head[0] * head[0] + head[self.r - 1] * head[self.r - 1];
        for w in head.windows(2) {
            let d = w[0] - w[1];
            quad += d * d;
        }
        self.smoothness * (quad / 8.0 - head[0] / 4.0) + self.constant()
    }
}

/// HF with intrinsic dimension `r_high`, LF with `r_low`, cost ratio
/// `r_low / r_high`.
pub fn make_worst_pair(
    dim: usize,
    r_high: usize,
    r_low: usize,
    smoothness: f64,
) -> Result<BiFidelityProblem> {
    if r_low >= r_high {
        return Err(Error::config(format!(
            "LF intrinsic dimension {r_low} must be below the HF one {r_high}"
        )));
    }
    let hf = WorstFunction::new(dim, r_high, smoothness)?;
    let lf = WorstFunction::new(dim, r_low, smoothness)?;
    Ok(BiFidelityProblem::new(
        format!("worst(D={dim}, r_H={r_high}, r_L={r_low}, L={smoothness})"),
        Arc::new(hf),
        Arc::new(lf),
        r_low as f64 / r_high as f64,
    )?
    .with_gradient(Arc::new(move |x: &Vector| hf.gradient(x)))
    .with_known_optimum(0.0)
    .with_smoothness(smoothness))
}
