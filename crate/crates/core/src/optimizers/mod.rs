//! Optimization engines sharing one budgeted run loop.
//!
//! Every engine evaluates the starting point first, then iterates while the
//! ledger's equivalent HF spend is below the budget. Each new iterate's HF
//! value is checkpointed into the run trace.

mod full;
mod spsa;
mod ssd;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{counted_eval, EvaluationLedger, Fidelity};
use crate::linesearch::{Exhaustion, LineSearchConfig, RhoPolicy};
use crate::objective::BiFidelityProblem;
use crate::subspace::{DifferenceScheme, Increment};
use crate::trace::RunTrace;
use crate::Vector;

pub use spsa::SpsaGains;
pub use ssd::first_surrogate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gd,
    Nag,
    Cd,
    FsSsd,
    Spsa,
    Gs,
    HfSsd,
    BfSsd,
    VrSsd,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Gd,
        Method::Nag,
        Method::Cd,
        Method::FsSsd,
        Method::Spsa,
        Method::Gs,
        Method::HfSsd,
        Method::BfSsd,
        Method::VrSsd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Gd => "GD",
            Method::Nag => "NAG",
            Method::Cd => "CD",
            Method::FsSsd => "FS-SSD",
            Method::Spsa => "SPSA",
            Method::Gs => "GS",
            Method::HfSsd => "HF-SSD",
            Method::BfSsd => "BF-SSD",
            Method::VrSsd => "VR-SSD",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Method::Gd => "gradient descent on forward-difference gradients",
            Method::Nag => "Nesterov momentum on forward-difference gradients",
            Method::Cd => "cyclic coordinate descent",
            Method::FsSsd => "subspace descent with a fixed step",
            Method::Spsa => "simultaneous perturbation stochastic approximation",
            Method::Gs => "one-dimensional random-direction search",
            Method::HfSsd => "subspace descent with HF Armijo backtracking",
            Method::BfSsd => "subspace descent with bi-fidelity surrogate backtracking",
            Method::VrSsd => "variance-reduced subspace descent",
        }
    }

    /// Whether the method makes LF calls.
    pub fn uses_lf(&self) -> bool {
        matches!(self, Method::BfSsd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = |x: &str| x.to_ascii_lowercase().replace(['-', '_'], "");
        Method::ALL
            .into_iter()
            .find(|m| key(m.name()) == key(s))
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::config(format!(
                    "unknown method `{s}`; valid methods are {}",
                    names.join(", ")
                ))
            })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How a subspace estimate `P g` is turned into the vector `ṽ` used for steps
/// and decrease tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lift {
    /// `ṽ = (ℓ/D) P g`, the orthogonal projection of the gradient onto the
    /// sampled subspace.
    #[default]
    Orthonormal,
    /// `ṽ = P g`, an unbiased gradient estimate.
    Scaled,
}

/// Ray searched by HF-SSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HfRay {
    /// `x − α ṽ/‖ṽ‖`, the same ray as BF-SSD.
    #[default]
    Normalized,
    /// `x − α ṽ`.
    Lifted,
}

/// Momentum coefficient schedule for NAG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NagMomentum {
    Constant(f64),
    /// `(k − 1)/(k + 2)` at iteration `k ≥ 1`.
    Decaying,
}

impl Default for NagMomentum {
    fn default() -> Self {
        NagMomentum::Constant(0.9)
    }
}

/// Gradient estimator inside VR-SSD.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VrEstimator {
    /// Keeps a running gradient memory `h`; each step corrects `h` inside the
    /// sampled subspace and moves along `h + (D/ℓ) QQᵀ(∇f − h)`.
    #[default]
    Memory,
    /// Epochs with a full finite-difference snapshot at an anchor point.
    /// Epoch length defaults to `⌈D/ℓ⌉` inner steps.
    Snapshot { epoch: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Subspace dimension `ℓ`.
    pub subdim: usize,
    /// Step for fixed-step methods. Defaults to `1/L` for GD, NAG and CD and
    /// to `ℓ/(L D)` for the subspace methods.
    pub fixed_step: Option<f64>,
    pub linesearch: LineSearchConfig,
    /// HF knots per surrogate, `n_k`.
    pub knots: usize,
    pub rho: RhoPolicy,
    pub increment: Increment,
    pub scheme: DifferenceScheme,
    pub budget: f64,
    pub spsa: SpsaGains,
    pub vr: VrEstimator,
    pub lift: Lift,
    pub hf_ray: HfRay,
    /// What to do when no trial step passes the decrease test. Defaults to
    /// rejecting the step for HF-SSD and to taking the smallest trial step
    /// for BF-SSD.
    pub exhaustion: Option<Exhaustion>,
    pub nag: NagMomentum,
    /// Reuse the known `f^HF(x_k)` as the finite-difference base instead of
    /// paying for it again each iteration.
    pub reuse_base: bool,
    /// HF calls charged before the run starts.
    pub preload: u64,
    pub max_iterations: Option<u64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::BfSsd,
            subdim: 20,
            fixed_step: None,
            linesearch: LineSearchConfig::default(),
            knots: 1,
            rho: RhoPolicy::default(),
            increment: Increment::default(),
            scheme: DifferenceScheme::default(),
            budget: 30_000.0,
            spsa: SpsaGains::default(),
            vr: VrEstimator::default(),
            lift: Lift::default(),
            hf_ray: HfRay::default(),
            exhaustion: None,
            nag: NagMomentum::default(),
            reuse_base: true,
            preload: 0,
            max_iterations: None,
        }
    }
}

impl OptimizerConfig {
    pub fn for_method(method: Method) -> Self {
        OptimizerConfig {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.budget >= 0.0) {
            return Err(Error::config(format!("budget must be non-negative, got {}", self.budget)));
        }
        let subspace = matches!(
            self.method,
            Method::FsSsd | Method::HfSsd | Method::BfSsd | Method::VrSsd
        );
        if self.subdim == 0 || (subspace && self.subdim > dim) {
            return Err(Error::config(format!(
                "subdim must lie in 1..={dim}, got {}",
                self.subdim
            )));
        }
        if self.knots == 0 {
            return Err(Error::config("knots must be at least 1"));
        }
        if let Some(step) = self.fixed_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::config(format!("fixed_step must be positive, got {step}")));
            }
        }
        if let VrEstimator::Snapshot { epoch: Some(0) } = self.vr {
            return Err(Error::config("VR epoch length must be positive"));
        }
        if let NagMomentum::Constant(m) = self.nag {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::config(format!("NAG momentum must lie in [0, 1), got {m}")));
            }
        }
        self.spsa.validate()?;
        self.linesearch.validate()
    }

    /// Stable short hash of the serialized config.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        let mut h = DefaultHasher::new();
        text.hash(&mut h);
        format!("{:016x}", h.finish())
    }

    fn resolved_exhaustion(&self) -> Exhaustion {
        self.exhaustion.unwrap_or(match self.method {
            Method::BfSsd => Exhaustion::TakeSmallest,
            _ => Exhaustion::Reject,
        })
    }

    fn resolved_fixed_step(&self, problem: &BiFidelityProblem) -> Result<f64> {
        if let Some(step) = self.fixed_step {
            return Ok(step);
        }
        let l = problem.smoothness().ok_or_else(|| {
            Error::config(format!(
                "{} needs fixed_step or a problem with a known smoothness constant",
                self.method
            ))
        })?;
        let d = problem.dim() as f64;
        Ok(match self.method {
            Method::Gd | Method::Nag | Method::Cd => 1.0 / l,
            _ => self.subdim as f64 / (l * d),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: u64,
    pub step: f64,
    /// `‖ṽ_k‖` (or the gradient-estimate norm for non-subspace methods).
    pub magnitude: f64,
    pub hf_value: f64,
    /// HF calls made during this iteration.
    pub hf_spent: u64,
    pub lf_spent: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub iterations: Vec<IterationRecord>,
    pub ledger: EvaluationLedger,
    pub final_point: Vector,
    pub final_value: f64,
    /// Set when the run stopped on a vanishing gradient estimate.
    pub terminated_early: bool,
}

/// Runs `cfg.method` on `problem` from its initial point.
pub fn run(problem: &BiFidelityProblem, cfg: &OptimizerConfig, seed: u64) -> Result<RunOutcome> {
    cfg.validate(problem.dim())?;
    let mut state = RunState::start(problem, cfg, seed)?;
    if state.budget_left() {
        match cfg.method {
            Method::Gd => full::gd(&mut state)?,
            Method::Nag => full::nag(&mut state)?,
            Method::Cd => full::cd(&mut state)?,
            Method::Spsa => spsa::spsa(&mut state)?,
            Method::FsSsd => ssd::fixed_step(&mut state, cfg.subdim)?,
            Method::Gs => ssd::fixed_step(&mut state, 1)?,
            Method::HfSsd => ssd::hf_ssd(&mut state)?,
            Method::BfSsd => ssd::bf_ssd(&mut state)?,
            Method::VrSsd => match cfg.vr {
                VrEstimator::Memory => ssd::vr_memory(&mut state)?,
                VrEstimator::Snapshot { epoch } => ssd::vr_snapshot(&mut state, epoch)?,
            },
        }
    }
    Ok(state.finish())
}

/// Mutable per-run state shared by the engines.
pub(crate) struct RunState<'a> {
    problem: &'a BiFidelityProblem,
    cfg: &'a OptimizerConfig,
    rng: rand_chacha::ChaCha8Rng,
    ledger: EvaluationLedger,
    trace: RunTrace,
    iterations: Vec<IterationRecord>,
    x: Vector,
    fx: f64,
    k: u64,
    mark: (u64, u64),
    terminated_early: bool,
}

impl<'a> RunState<'a> {
    fn start(problem: &'a BiFidelityProblem, cfg: &'a OptimizerConfig, seed: u64) -> Result<Self> {
        let mut ledger = EvaluationLedger::with_preload(problem.lf_cost_ratio(), cfg.preload);
        let mut trace = RunTrace::new(cfg.method.name(), seed, cfg.digest());
        let x = problem.initial_point().clone();
        let fx = counted_eval(problem, &mut ledger, Fidelity::High, &x)?;
        trace.record_checkpoint(&ledger, fx);
        let mark = (ledger.hf_calls(), ledger.lf_calls());
        Ok(RunState {
            problem,
            cfg,
            rng: crate::rng::RngStream::new(seed).rng(),
            ledger,
            trace,
            iterations: Vec::new(),
            x,
            fx,
            k: 0,
            mark,
            terminated_early: false,
        })
    }

    fn budget_left(&self) -> bool {
        self.ledger.equivalent_hf() < self.cfg.budget
            && self.cfg.max_iterations.is_none_or(|m| self.k < m)
    }

    fn eval_hf(&mut self, x: &Vector) -> Result<f64> {
        counted_eval(self.problem, &mut self.ledger, Fidelity::High, x)
    }

    /// `f^HF(x_k)` for use as a finite-difference base, re-evaluated when
    /// reuse is off.
    fn base_value(&mut self) -> Result<f64> {
        if self.cfg.reuse_base {
            Ok(self.fx)
        } else {
            let x = self.x.clone();
            self.eval_hf(&x)
        }
    }

    fn delta(&self) -> f64 {
        self.cfg.increment.at(&self.x)
    }

    /// Moves to `x_new` with known HF value and closes the iteration.
    fn accept(&mut self, x_new: Vector, f_new: f64, step: f64, magnitude: f64) {
        self.x = x_new;
        self.fx = f_new;
        self.trace.record_checkpoint(&self.ledger, f_new);
        let now = (self.ledger.hf_calls(), self.ledger.lf_calls());
        self.iterations.push(IterationRecord {
            k: self.k,
            step,
            magnitude,
            hf_value: f_new,
            hf_spent: now.0 - self.mark.0,
            lf_spent: now.1 - self.mark.1,
        });
        self.mark = now;
        self.k += 1;
    }

    /// Evaluates `x_new` and moves there.
    fn step_to(&mut self, x_new: Vector, step: f64, magnitude: f64) -> Result<()> {
        let f_new = self.eval_hf(&x_new)?;
        self.accept(x_new, f_new, step, magnitude);
        Ok(())
    }

    fn finish(self) -> RunOutcome {
        RunOutcome {
            trace: self.trace,
            iterations: self.iterations,
            ledger: self.ledger,
            final_point: self.x,
            final_value: self.fx,
            terminated_early: self.terminated_early,
        }
    }
}
