//! Line searches along a ray `x + α d`, `α ∈ [0, α_max]`.
//!
//! The bi-fidelity search builds a [`Surrogate1D`] from a few HF knots and
//! backtracks on it using LF calls only. The single-fidelity searches pay one
//! HF call per trial step.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{counted_eval, EvaluationLedger, Fidelity};
use crate::objective::BiFidelityProblem;
use crate::Vector;

/// Which magnitude enters the Armijo decrease term `β α s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecreaseMode {
    /// `s = ‖ṽ‖²`.
    #[default]
    SquaredMagnitude,
    /// `s = ‖ṽ‖`, the first-order decrease along a unit direction.
    Magnitude,
}

impl DecreaseMode {
    pub fn scale(&self, magnitude: f64) -> f64 {
        match self {
            DecreaseMode::SquaredMagnitude => magnitude * magnitude,
            DecreaseMode::Magnitude => magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineSearchConfig {
    /// Armijo constant; `None` resolves to `ℓ / 2D` inside subspace methods.
    pub beta: Option<f64>,
    pub shrink: f64,
    pub alpha_max: f64,
    pub max_shrinks: u32,
    pub decrease_mode: DecreaseMode,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            beta: None,
            shrink: 0.9,
            alpha_max: 2.0,
            max_shrinks: 20,
            decrease_mode: DecreaseMode::SquaredMagnitude,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta <= 0.5) {
                return Err(Error::config(format!("beta must lie in (0, 0.5], got {beta}")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::config(format!(
                "shrink factor must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        if !(self.alpha_max > 0.0 && self.alpha_max.is_finite()) {
            return Err(Error::config(format!(
                "alpha_max must be positive, got {}",
                self.alpha_max
            )));
        }
        if self.max_shrinks == 0 {
            return Err(Error::config("max_shrinks must be at least 1"));
        }
        Ok(())
    }

    pub fn beta_for(&self, subdim: usize, dim: usize) -> f64 {
        self.beta.unwrap_or(subdim as f64 / (2.0 * dim as f64))
    }

    /// Trial steps `α_max, c α_max, ..., c^M α_max`.
    pub fn trial_steps(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.max_shrinks).map(move |m| self.alpha_max * self.shrink.powi(m as i32))
    }
}

/// How the LF scale factor `ρ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoPolicy {
    /// `f^HF(x) / f^LF(x)`, falling back to 0 when the LF value is negligible.
    #[default]
    HfLfRatio,
    Fixed(f64),
}

impl RhoPolicy {
    pub fn resolve(&self, hf: f64, lf: f64) -> f64 {
        match *self {
            RhoPolicy::Fixed(rho) => rho,
            RhoPolicy::HfLfRatio => {
                if lf.abs() < 1e-12 * hf.abs().max(1.0) {
                    0.0
                } else {
                    hf / lf
                }
            }
        }
    }
}

/// `φ̃(α) = ρ f^LF(x + α d) + ψ̃(α)` with `ψ̃` interpolating HF/LF residuals at
/// equispaced knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate1D {
    rho: f64,
    knots: Vec<(f64, f64)>,
    knot_hf: Vec<f64>,
    base_point: Vector,
    direction: Vector,
    alpha_max: f64,
}

impl Surrogate1D {
    /// Assembles a surrogate from precomputed knot data.
    ///
    /// `knots` holds `(α̃_j, ψ_j)` and `knot_hf` the HF values at the same
    /// steps.
    pub fn from_parts(
        rho: f64,
        knots: Vec<(f64, f64)>,
        knot_hf: Vec<f64>,
        base_point: Vector,
        direction: Vector,
    ) -> Result<Self> {
        if knots.len() < 2 || knots.len() != knot_hf.len() {
            return Err(Error::contract("surrogate needs at least two knots with HF values"));
        }
        if knots[0].0 != 0.0 || knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::contract("knot steps must start at 0 and increase"));
        }
        if base_point.len() != direction.len() {
            return Err(Error::contract("base point and direction differ in length"));
        }
        let alpha_max = knots[knots.len() - 1].0;
        Ok(Surrogate1D {
            rho,
            knots,
            knot_hf,
            base_point,
            direction,
            alpha_max,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn knot_hf(&self) -> &[f64] {
        &self.knot_hf
    }

    pub fn base_point(&self) -> &Vector {
        &self.base_point
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn point_at(&self, alpha: f64) -> Vector {
        ray_point(&self.base_point, &self.direction, alpha)
    }

    /// Piecewise-linear interpolant of the `ψ_j`.
    pub fn correction(&self, alpha: f64) -> f64 {
        let j = self
            .knots
            .partition_point(|&(a, _)| a < alpha)
            .clamp(1, self.knots.len() - 1);
        let (a0, psi0) = self.knots[j - 1];
        let (a1, psi1) = self.knots[j];
        let h = a1 - a0;
        let t = alpha - a0;
        (h - t) / h * psi0 + t / h * psi1
    }

    fn knot_index(&self, alpha: f64) -> Option<usize> {
        self.knots.iter().position(|&(a, _)| a == alpha)
    }
}

fn ray_point(x: &Vector, d: &Vector, alpha: f64) -> Vector {
    let mut y = x.clone();
    y.axpy(alpha, d, 1.0);
    y
}

/// Samples HF at `n_k` equispaced knots on `(0, α_max]` along `x + α d` and
/// fits the surrogate.
///
/// Costs `n_k` HF calls and `n_k + 1` LF calls; `hf_at_x` is reused for the
/// knot at zero.
#[allow(clippy::too_many_arguments)]
pub fn build_surrogate(
    problem: &BiFidelityProblem,
    ledger: &mut EvaluationLedger,
    x: &Vector,
    direction: &Vector,
    n_k: usize,
    alpha_max: f64,
    hf_at_x: f64,
    rho_policy: RhoPolicy,
) -> Result<Surrogate1D> {
    if n_k == 0 {
        return Err(Error::contract("surrogate needs at least one HF knot"));
    }
    if !(alpha_max > 0.0) {
        return Err(Error::contract(format!("alpha_max must be positive, got {alpha_max}")));
    }
    let lf_at_x = counted_eval(problem, ledger, Fidelity::Low, x)?;
    let rho = rho_policy.resolve(hf_at_x, lf_at_x);
    let mut knots = Vec::with_capacity(n_k + 1);
    let mut knot_hf = Vec::with_capacity(n_k + 1);
    knots.push((0.0, hf_at_x - rho * lf_at_x));
    knot_hf.push(hf_at_x);
    for j in 1..=n_k {
        let alpha = if j == n_k {
            alpha_max
        } else {
            alpha_max * j as f64 / n_k as f64
        };
        let y = ray_point(x, direction, alpha);
        let hf = counted_eval(problem, ledger, Fidelity::High, &y)?;
        let lf = counted_eval(problem, ledger, Fidelity::Low, &y)?;
        knots.push((alpha, hf - rho * lf));
        knot_hf.push(hf);
    }
    Ok(Surrogate1D {
        rho,
        knots,
        knot_hf,
        base_point: x.clone(),
        direction: direction.clone(),
        alpha_max,
    })
}

/// Surrogate value at `alpha`; free at a knot, one LF call elsewhere.
pub fn eval_surrogate(
    s: &Surrogate1D,
    problem: &BiFidelityProblem,
    ledger: &mut EvaluationLedger,
    alpha: f64,
) -> Result<f64> {
    if !(0.0..=s.alpha_max).contains(&alpha) {
        return Err(Error::contract(format!(
            "step {alpha} outside the surrogate range [0, {}]",
            s.alpha_max
        )));
    }
    if let Some(j) = s.knot_index(alpha) {
        return Ok(s.knot_hf[j]);
    }
    let lf = counted_eval(problem, ledger, Fidelity::Low, &s.point_at(alpha))?;
    Ok(s.rho * lf + s.correction(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtrack {
    pub step: f64,
    pub shrinks: u32,
    /// Whether the returned step satisfied the decrease test.
    pub accepted: bool,
    /// Objective (or surrogate) value at the returned step.
    pub value: f64,
}

/// Armijo backtracking on the surrogate. Never calls HF.
///
/// Returns the first of `α_max, c α_max, ...` with
/// `φ̃(α) ≤ hf_at_x − β α decrease_scale`, or `c^M α_max` if none passes.
pub fn bf_backtracking(
    s: &Surrogate1D,
    problem: &BiFidelityProblem,
    cfg: &LineSearchConfig,
    beta: f64,
    ledger: &mut EvaluationLedger,
    hf_at_x: f64,
    decrease_scale: f64,
) -> Result<Backtrack> {
    let search = LineSearchConfig {
        alpha_max: s.alpha_max,
        ..*cfg
    };
    let mut last = None;
    for (m, alpha) in search.trial_steps().enumerate() {
        let value = eval_surrogate(s, problem, ledger, alpha)?;
        let outcome = Backtrack {
            step: alpha,
            shrinks: m as u32,
            accepted: value <= hf_at_x - beta * alpha * decrease_scale,
            value,
        };
        if outcome.accepted {
            return Ok(outcome);
        }
        last = Some(outcome);
    }
    Ok(last.expect("at least one trial step"))
}

/// What [`hf_backtracking`] does when no trial step passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exhaustion {
    /// Return step 0 and stay put, keeping the iteration monotone.
    #[default]
    Reject,
    /// Return the smallest trial step anyway.
    TakeSmallest,
}

/// Armijo backtracking on the true HF objective along `x + α d`.
///
/// Costs `shrinks + 1` HF calls.
#[allow(clippy::too_many_arguments)]
pub fn hf_backtracking(
    problem: &BiFidelityProblem,
    ledger: &mut EvaluationLedger,
    x: &Vector,
    direction: &Vector,
    hf_at_x: f64,
    decrease_scale: f64,
    cfg: &LineSearchConfig,
    beta: f64,
    exhaustion: Exhaustion,
) -> Result<Backtrack> {
    let mut last = None;
    for (m, alpha) in cfg.trial_steps().enumerate() {
        let value = counted_eval(problem, ledger, Fidelity::High, &ray_point(x, direction, alpha))?;
        let outcome = Backtrack {
            step: alpha,
            shrinks: m as u32,
            accepted: value <= hf_at_x - beta * alpha * decrease_scale,
            value,
        };
        if outcome.accepted {
            return Ok(outcome);
        }
        last = Some(outcome);
    }
    let last = last.expect("at least one trial step");
    Ok(match exhaustion {
        Exhaustion::TakeSmallest => last,
        Exhaustion::Reject => Backtrack {
            step: 0.0,
            value: hf_at_x,
            ..last
        },
    })
}

/// Golden-section minimization of `α ↦ f^HF(x + α d)` on `[0, α_max]`.
///
/// Stops at bracket width `1e-8 α_max`; every probe is a counted HF call. On a
/// non-unimodal profile the result is some local minimizer.
pub fn exact_line_search(
    problem: &BiFidelityProblem,
    ledger: &mut EvaluationLedger,
    x: &Vector,
    direction: &Vector,
    alpha_max: f64,
) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let tol = 1e-8 * alpha_max;
    let mut phi = |a: f64| counted_eval(problem, ledger, Fidelity::High, &ray_point(x, direction, a));
    let (mut lo, mut hi) = (0.0, alpha_max);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = phi(a)?;
    let mut fb = phi(b)?;
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = phi(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = phi(b)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub alpha: f64,
    pub surrogate: f64,
    pub hf: f64,
    pub lf: f64,
}

/// Tabulates surrogate, HF and LF on `points` equispaced steps of `[0, α_max]`.
///
/// This is a diagnostic; its calls go to a scratch ledger and are not charged.
pub fn surrogate_profile(
    s: &Surrogate1D,
    problem: &BiFidelityProblem,
    points: usize,
) -> Result<Vec<ProfileSample>> {
    let mut scratch = EvaluationLedger::for_problem(problem);
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let alpha = s.alpha_max * i as f64 / (n - 1) as f64;
            let y = s.point_at(alpha);
            Ok(ProfileSample {
                alpha,
                surrogate: eval_surrogate(s, problem, &mut scratch, alpha)?,
                hf: counted_eval(problem, &mut scratch, Fidelity::High, &y)?,
                lf: counted_eval(problem, &mut scratch, Fidelity::Low, &y)?,
            })
        })
        .collect()
}

/// Writes `alpha,surrogate,hf,lf,is_knot` rows.
pub fn write_profile_csv<W: Write>(
    s: &Surrogate1D,
    samples: &[ProfileSample],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(["alpha", "surrogate", "hf", "lf", "is_knot"]).map_err(io)?;
    for p in samples {
        w.write_record([
            p.alpha.to_string(),
            p.surrogate.to_string(),
            p.hf.to_string(),
            p.lf.to_string(),
            s.knot_index(p.alpha).is_some().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
