//! Evaluation accounting in equivalent high-fidelity calls.

use std::fmt;

use crate::error::{Error, Result};
use crate::objective::BiFidelityProblem;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fidelity {
    High,
    Low,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fidelity::High => f.write_str("HF"),
            Fidelity::Low => f.write_str("LF"),
        }
    }
}

/// Monotone HF/LF call counters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationLedger {
    hf_calls: u64,
    lf_calls: u64,
    lf_cost_ratio: f64,
}

impl EvaluationLedger {
    pub fn new(lf_cost_ratio: f64) -> Self {
        EvaluationLedger {
            hf_calls: 0,
            lf_calls: 0,
            lf_cost_ratio,
        }
    }

    /// Starts the run with HF evaluations already spent elsewhere, e.g. on
    /// fitting the LF model.
    pub fn with_preload(lf_cost_ratio: f64, hf_calls: u64) -> Self {
        EvaluationLedger {
            hf_calls,
            ..Self::new(lf_cost_ratio)
        }
    }

    pub fn for_problem(problem: &BiFidelityProblem) -> Self {
        Self::new(problem.lf_cost_ratio())
    }

    pub fn hf_calls(&self) -> u64 {
        self.hf_calls
    }

    pub fn lf_calls(&self) -> u64 {
        self.lf_calls
    }

    pub fn lf_cost_ratio(&self) -> f64 {
        self.lf_cost_ratio
    }

    /// `hf_calls + lf_calls * lf_cost_ratio`, recomputed from the counters.
    pub fn equivalent_hf(&self) -> f64 {
        self.hf_calls as f64 + self.lf_calls as f64 * self.lf_cost_ratio
    }

    pub fn record(&mut self, fidelity: Fidelity) {
        match fidelity {
            Fidelity::High => self.hf_calls += 1,
            Fidelity::Low => self.lf_calls += 1,
        }
    }
}

/// Evaluates the requested fidelity at `x` and charges exactly one call.
///
/// A non-finite result aborts the run; the error names the offending point.
pub fn counted_eval(
    problem: &BiFidelityProblem,
    ledger: &mut EvaluationLedger,
    fidelity: Fidelity,
    x: &Vector,
) -> Result<f64> {
    let objective = match fidelity {
        Fidelity::High => problem.hf(),
        Fidelity::Low => problem.lf(),
    };
    let value = objective.eval(x);
    ledger.record(fidelity);
    if !value.is_finite() {
        return Err(Error::NonFinite {
            fidelity,
            value,
            point: describe_point(x),
        });
    }
    Ok(value)
}

pub(crate) fn describe_point(x: &Vector) -> String {
    let head: Vec<String> = x.iter().take(4).map(|v| format!("{v:.6e}")).collect();
    let ellipsis = if x.len() > 4 { ", ..." } else { "" };
    format!(
        "x = [{}{}] (dim {}, norm {:.6e})",
        head.join(", "),
        ellipsis,
        x.len(),
        x.norm()
    )
}
