//! Full-gradient and coordinate baselines on finite differences.

use crate::error::Result;
use crate::subspace::DifferenceScheme;
use crate::Vector;

use super::{NagMomentum, RunState};

/// Finite-difference gradient along every coordinate: `D` HF calls (forward)
/// or `2D` (central).
pub(super) fn fd_gradient(state: &mut RunState<'_>, x: &Vector, fx: f64) -> Result<Vector> {
    let delta = state.cfg.increment.at(x);
    let mut g = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + delta;
        let plus = state.eval_hf(&probe)?;
        g[i] = match state.cfg.scheme {
            DifferenceScheme::Forward => (plus - fx) / delta,
            DifferenceScheme::Central => {
                probe[i] = x[i] - delta;
                let minus = state.eval_hf(&probe)?;
                (plus - minus) / (2.0 * delta)
            }
        };
        probe[i] = x[i];
    }
    Ok(g)
}

pub(super) fn gd(state: &mut RunState<'_>) -> Result<()> {
    let eta = state.cfg.resolved_fixed_step(state.problem)?;
    while state.budget_left() {
        let base = state.base_value()?;
        let x = state.x.clone();
        let g = fd_gradient(state, &x, base)?;
        state.step_to(&x - &g * eta, eta, g.norm())?;
    }
    Ok(())
}

/// Nesterov momentum in the form `v ← μ v + ĝ`, `x ← x − η(ĝ + μ v)`.
pub(super) fn nag(state: &mut RunState<'_>) -> Result<()> {
    let eta = state.cfg.resolved_fixed_step(state.problem)?;
    let mut velocity = Vector::zeros(state.problem.dim());
    while state.budget_left() {
        let mu = match state.cfg.nag {
            NagMomentum::Constant(m) => m,
            NagMomentum::Decaying => {
                let k = state.k as f64 + 1.0;
                ((k - 1.0) / (k + 2.0)).max(0.0)
            }
        };
        let base = state.base_value()?;
        let x = state.x.clone();
        let g = fd_gradient(state, &x, base)?;
        velocity = &velocity * mu + &g;
        let x_new = &x - (&g + &velocity * mu) * eta;
        state.step_to(x_new, eta, g.norm())?;
    }
    Ok(())
}

/// Cyclic coordinate descent; each coordinate update is one iteration costing
/// one probe and one evaluation of the new point.
pub(super) fn cd(state: &mut RunState<'_>) -> Result<()> {
    let eta = state.cfg.resolved_fixed_step(state.problem)?;
    let dim = state.problem.dim();
    while state.budget_left() {
        let i = (state.k % dim as u64) as usize;
        let base = state.base_value()?;
        let delta = state.delta();
        let mut probe = state.x.clone();
        probe[i] += delta;
        let plus = state.eval_hf(&probe)?;
        let partial = match state.cfg.scheme {
            DifferenceScheme::Forward => (plus - base) / delta,
            DifferenceScheme::Central => {
                probe[i] = state.x[i] - delta;
                let minus = state.eval_hf(&probe)?;
                (plus - minus) / (2.0 * delta)
            }
        };
        let mut x_new = state.x.clone();
        x_new[i] -= eta * partial;
        state.step_to(x_new, eta, partial.abs())?;
    }
    Ok(())
}
