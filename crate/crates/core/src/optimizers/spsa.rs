//! Simultaneous perturbation stochastic approximation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

use super::RunState;

/// Gains `a_k = a/(A + k + 1)^α` and `c_k = c/(k + 1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpsaGains {
    pub a: f64,
    pub stability: f64,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
}

impl Default for SpsaGains {
    fn default() -> Self {
        SpsaGains {
            a: 0.2,
            stability: 3000.0,
            alpha: 0.602,
            c: 0.01,
            gamma: 0.101,
        }
    }
}

impl SpsaGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.c > 0.0 && self.stability >= 0.0) {
            return Err(Error::config("SPSA gains a and c must be positive, A non-negative"));
        }
        if !(self.alpha > 0.0 && self.gamma > 0.0) {
            return Err(Error::config("SPSA exponents must be positive"));
        }
        Ok(())
    }

    pub fn step(&self, k: u64) -> f64 {
        self.a / (self.stability + k as f64 + 1.0).powf(self.alpha)
    }

    pub fn perturbation(&self, k: u64) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

/// Two perturbed HF calls per iteration plus one at the new iterate.
pub(super) fn spsa(state: &mut RunState<'_>) -> Result<()> {
    let gains = state.cfg.spsa;
    let dim = state.problem.dim();
    while state.budget_left() {
        let (ak, ck) = (gains.step(state.k), gains.perturbation(state.k));
        let delta = Vector::from_fn(dim, |_, _| if state.rng.random::<bool>() { 1.0 } else { -1.0 });
        let plus = state.eval_hf(&(&state.x + &delta * ck))?;
        let minus = state.eval_hf(&(&state.x - &delta * ck))?;
        // δ⁻¹ = δ for Rademacher entries
        let g = &delta * ((plus - minus) / (2.0 * ck));
        let x_new = &state.x - &g * ak;
        state.step_to(x_new, ak, g.norm())?;
    }
    Ok(())
}
