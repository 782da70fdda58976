//! Per-run convergence traces.

use crate::ledger::EvaluationLedger;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub equiv_hf: f64,
    pub best_value: f64,
}

/// Running minimum of observed HF values against cumulative spend.
///
/// Checkpoints are strictly increasing in `equiv_hf` and non-increasing in
/// `best_value`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    checkpoints: Vec<Checkpoint>,
    seed: u64,
    method_name: String,
    config_digest: String,
}

impl RunTrace {
    pub fn new(method_name: impl Into<String>, seed: u64, config_digest: impl Into<String>) -> Self {
        RunTrace {
            checkpoints: Vec::new(),
            seed,
            method_name: method_name.into(),
            config_digest: config_digest.into(),
        }
    }

    /// Rebuilds a trace from raw checkpoints, e.g. read back from CSV.
    ///
    /// The invariants are re-established: spends that do not increase are
    /// merged and the best value is replaced by the running minimum.
    pub fn from_checkpoints(
        method_name: impl Into<String>,
        seed: u64,
        checkpoints: impl IntoIterator<Item = Checkpoint>,
    ) -> Self {
        let mut trace = RunTrace::new(method_name, seed, "");
        for c in checkpoints {
            trace.push(c.equiv_hf, c.best_value);
        }
        trace
    }

    /// Appends `(ledger.equivalent_hf(), min(best, observed))`.
    pub fn record_checkpoint(&mut self, ledger: &EvaluationLedger, observed_hf_value: f64) {
        self.push(ledger.equivalent_hf(), observed_hf_value);
    }

    fn push(&mut self, equiv_hf: f64, observed: f64) {
        match self.checkpoints.last_mut() {
            None => self.checkpoints.push(Checkpoint {
                equiv_hf,
                best_value: observed,
            }),
            Some(last) => {
                let best_value = last.best_value.min(observed);
                if equiv_hf > last.equiv_hf {
                    self.checkpoints.push(Checkpoint {
                        equiv_hf,
                        best_value,
                    });
                } else {
                    last.best_value = best_value;
                }
            }
        }
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn method_name(&self) -> &str {
        &self.method_name
    }

    pub fn config_digest(&self) -> &str {
        &self.config_digest
    }

    /// Best value found over the whole run.
    pub fn best(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.best_value)
    }

    /// Best value after spending at most `spend` equivalent HF calls.
    ///
    /// Last observation carried forward. A spend below the first checkpoint
    /// reads the initial value.
    pub fn best_at(&self, spend: f64) -> Option<f64> {
        let first = self.checkpoints.first()?;
        let idx = self.checkpoints.partition_point(|c| c.equiv_hf <= spend);
        if idx == 0 {
            Some(first.best_value)
        } else {
            Some(self.checkpoints[idx - 1].best_value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::Fidelity;

    fn ledger_at(hf: u64) -> EvaluationLedger {
        let mut l = EvaluationLedger::new(0.5);
        for _ in 0..hf {
            l.record(Fidelity::High);
        }
        l
    }

    #[test]
    fn running_minimum_keeps_previous_best() {
        let mut t = RunTrace::new("m", 0, "");
        t.record_checkpoint(&ledger_at(1), 0.5);
        t.record_checkpoint(&ledger_at(2), 0.7);
        assert_eq!(t.checkpoints()[1].best_value, 0.5);
        t.record_checkpoint(&ledger_at(3), 0.3);
        assert_eq!(t.checkpoints()[2].best_value, 0.3);
    }

    #[test]
    fn first_checkpoint_is_initial_value() {
        let mut t = RunTrace::new("m", 0, "");
        let f0 = 20.0 * 100.0 / (8.0 * 101.0);
        t.record_checkpoint(&ledger_at(1), f0);
        assert_eq!(
            t.checkpoints(),
            &[Checkpoint {
                equiv_hf: 1.0,
                best_value: 2.4752475247524752
            }]
        );
    }

    #[test]
    fn equal_spend_merges() {
        let mut t = RunTrace::new("m", 0, "");
        let l = ledger_at(4);
        t.record_checkpoint(&l, 2.0);
        t.record_checkpoint(&l, 1.0);
        assert_eq!(t.checkpoints().len(), 1);
        assert_eq!(t.best(), Some(1.0));
    }

    #[test]
    fn best_at_is_a_step_function() {
        let t = RunTrace::from_checkpoints(
            "m",
            0,
            [
                Checkpoint { equiv_hf: 1.0, best_value: 4.0 },
                Checkpoint { equiv_hf: 5.0, best_value: 2.0 },
            ],
        );
        assert_eq!(t.best_at(0.5), Some(4.0));
        assert_eq!(t.best_at(3.0), Some(4.0));
        assert_eq!(t.best_at(5.0), Some(2.0));
        assert_eq!(t.best_at(1e9), Some(2.0));
    }
}
