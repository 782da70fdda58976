//! Stochastic subspace descent variants.

use crate::error::{Error, Result};
use crate::ledger::{counted_eval, EvaluationLedger, Fidelity};
use crate::linesearch::{bf_backtracking, build_surrogate, hf_backtracking, Exhaustion, Surrogate1D};
use crate::objective::BiFidelityProblem;
use crate::subspace::{estimate_gradient, GradientEstimate, ProjectionMatrix};
use crate::Vector;

use super::{HfRay, Lift, OptimizerConfig, RunState};

const RESAMPLES: usize = 3;

impl RunState<'_> {
    fn sample(&mut self, subdim: usize) -> Result<ProjectionMatrix> {
        ProjectionMatrix::sample(self.problem.dim(), subdim, &mut self.rng)
    }

    fn estimate(&mut self, p: &ProjectionMatrix, base: f64) -> Result<GradientEstimate> {
        let delta = self.delta();
        let x = self.x.clone();
        estimate_gradient(self.problem, &mut self.ledger, &x, base, p, delta, self.cfg.scheme)
    }

    /// Samples a subspace and estimates the gradient in it, resampling a few
    /// times on a vanishing estimate. `None` means the run should stop.
    fn subspace_estimate(&mut self, subdim: usize) -> Result<Option<(ProjectionMatrix, GradientEstimate)>> {
        let base = self.base_value()?;
        for _ in 0..=RESAMPLES {
            let p = self.sample(subdim)?;
            let est = self.estimate(&p, base)?;
            if !est.is_stationary() {
                return Ok(Some((p, est)));
            }
            if !self.budget_left() {
                break;
            }
        }
        self.terminated_early = true;
        Ok(None)
    }

    fn lift(&self, est: &GradientEstimate, subdim: usize) -> Vector {
        match self.cfg.lift {
            Lift::Orthonormal => &est.lifted * (subdim as f64 / self.problem.dim() as f64),
            Lift::Scaled => est.lifted.clone(),
        }
    }
}

/// FS-SSD (`subdim = ℓ`) and GS (`subdim = 1`): `x ← x − η ṽ`.
pub(super) fn fixed_step(state: &mut RunState<'_>, subdim: usize) -> Result<()> {
    let eta = state.cfg.resolved_fixed_step(state.problem)?;
    while state.budget_left() {
        let Some((_, est)) = state.subspace_estimate(subdim)? else {
            break;
        };
        let v = state.lift(&est, subdim);
        let x_new = &state.x - &v * eta;
        state.step_to(x_new, eta, v.norm())?;
    }
    Ok(())
}

/// Armijo backtracking on HF along the chosen ray; the accepted trial value is
/// reused as the new iterate's value.
pub(super) fn hf_ssd(state: &mut RunState<'_>) -> Result<()> {
    let subdim = state.cfg.subdim;
    let ls = state.cfg.linesearch;
    let beta = ls.beta_for(subdim, state.problem.dim());
    while state.budget_left() {
        let Some((_, est)) = state.subspace_estimate(subdim)? else {
            break;
        };
        let v = state.lift(&est, subdim);
        let magnitude = v.norm();
        let scale = ls.decrease_mode.scale(magnitude);
        let d = match state.cfg.hf_ray {
            HfRay::Normalized => -&est.direction,
            HfRay::Lifted => -&v,
        };
        let x = state.x.clone();
        let bt = hf_backtracking(
            state.problem,
            &mut state.ledger,
            &x,
            &d,
            state.fx,
            scale,
            &ls,
            beta,
            state.cfg.resolved_exhaustion(),
        )?;
        let x_new = if bt.step > 0.0 { &x + &d * bt.step } else { x };
        state.accept(x_new, bt.value, bt.step, magnitude);
    }
    Ok(())
}

/// BF-SSD: HF probes in a random subspace, a bi-fidelity surrogate along the
/// normalized estimate and LF-only backtracking.
pub(super) fn bf_ssd(state: &mut RunState<'_>) -> Result<()> {
    let subdim = state.cfg.subdim;
    let ls = state.cfg.linesearch;
    let beta = ls.beta_for(subdim, state.problem.dim());
    while state.budget_left() {
        let Some((_, est)) = state.subspace_estimate(subdim)? else {
            break;
        };
        let magnitude = state.lift(&est, subdim).norm();
        let d = -&est.direction;
        let x = state.x.clone();
        let surrogate = build_surrogate(
            state.problem,
            &mut state.ledger,
            &x,
            &d,
            state.cfg.knots,
            ls.alpha_max,
            state.fx,
            state.cfg.rho,
        )?;
        let bt = bf_backtracking(
            &surrogate,
            state.problem,
            &ls,
            beta,
            &mut state.ledger,
            state.fx,
            ls.decrease_mode.scale(magnitude),
        )?;
        let step = match state.cfg.resolved_exhaustion() {
            Exhaustion::Reject if !bt.accepted => 0.0,
            _ => bt.step,
        };
        state.step_to(&x + &d * step, step, magnitude)?;
    }
    Ok(())
}

/// VR-SSD with a gradient memory `h`.
///
/// With `u = QQᵀ∇f` from the probes, the step direction is
/// `h + (D/ℓ)(u − QQᵀh)` and the memory absorbs `u − QQᵀh`.
pub(super) fn vr_memory(state: &mut RunState<'_>) -> Result<()> {
    let subdim = state.cfg.subdim;
    let d = state.problem.dim();
    let eta = state.cfg.resolved_fixed_step(state.problem)?;
    let shrink = subdim as f64 / d as f64;
    let mut memory = Vector::zeros(d);
    while state.budget_left() {
        let base = state.base_value()?;
        let p = state.sample(subdim)?;
        let est = state.estimate(&p, base)?;
        let projected_memory = p.entries() * (p.entries().tr_mul(&memory)) * shrink;
        let correction = &est.lifted * shrink - projected_memory;
        let g = &memory + &correction / shrink;
        memory += &correction;
        let x_new = &state.x - &g * eta;
        state.step_to(x_new, eta, g.norm())?;
    }
    Ok(())
}

/// VR-SSD on the snapshot template: a full finite-difference gradient `μ` at
/// an anchor, then inner steps along `P Pᵀ(ĝ(x) − ĝ(x̄)) + μ`.
pub(super) fn vr_snapshot(state: &mut RunState<'_>, epoch: Option<usize>) -> Result<()> {
    let subdim = state.cfg.subdim;
    let d = state.problem.dim();
    let eta = state.cfg.resolved_fixed_step(state.problem)?;
    let epoch = epoch.unwrap_or(d.div_ceil(subdim));
    'outer: while state.budget_left() {
        let anchor = state.x.clone();
        let f_anchor = state.base_value()?;
        let mu = super::full::fd_gradient(state, &anchor, f_anchor)?;
        for _ in 0..epoch {
            if !state.budget_left() {
                break 'outer;
            }
            let base = state.base_value()?;
            let p = state.sample(subdim)?;
            let at_x = state.estimate(&p, base)?;
            let delta = state.delta();
            let at_anchor = estimate_gradient(
                state.problem,
                &mut state.ledger,
                &anchor,
                f_anchor,
                &p,
                delta,
                state.cfg.scheme,
            )?;
            let v = p.entries() * (&at_x.projected - &at_anchor.projected) + &mu;
            let x_new = &state.x - &v * eta;
            state.step_to(x_new, eta, v.norm())?;
        }
    }
    Ok(())
}

/// The surrogate a BF-SSD iteration from `x` builds, for inspection.
///
/// Draws the subspace from the same stream as `run` with this seed, so at the
/// initial point it matches the first iteration of that run.
pub fn first_surrogate(
    problem: &BiFidelityProblem,
    cfg: &OptimizerConfig,
    x: &Vector,
    seed: u64,
) -> Result<Surrogate1D> {
    cfg.validate(problem.dim())?;
    if x.len() != problem.dim() {
        return Err(Error::config(format!(
            "point has {} entries, problem dimension is {}",
            x.len(),
            problem.dim()
        )));
    }
    let mut ledger = EvaluationLedger::for_problem(problem);
    let mut rng = crate::rng::RngStream::new(seed).rng();
    let fx = counted_eval(problem, &mut ledger, Fidelity::High, x)?;
    let p = ProjectionMatrix::sample(problem.dim(), cfg.subdim, &mut rng)?;
    let est = estimate_gradient(problem, &mut ledger, x, fx, &p, cfg.increment.at(x), cfg.scheme)?;
    if est.is_stationary() {
        return Err(Error::contract("gradient estimate vanishes at this point"));
    }
    build_surrogate(
        problem,
        &mut ledger,
        x,
        &-&est.direction,
        cfg.knots,
        cfg.linesearch.alpha_max,
        fx,
        cfg.rho,
    )
}
