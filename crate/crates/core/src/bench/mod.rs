//! Seeded multi-trial experiments, curve statistics and their CSV/SVG output.

mod output;
mod plot;

use rayon::prelude::*;

pub use output::{emit_table, summary_csv, trial_csv, write_experiment};
pub use plot::{emit_convergence_plot, PlotOptions};

use crate::error::{Error, Result};
use crate::objective::BiFidelityProblem;
use crate::optimizers::{run, OptimizerConfig};
use crate::problems::ProblemSpec;
use crate::rng::RngStream;
use crate::trace::RunTrace;

/// Child index of the experiment seed reserved for building the problem, far
/// away from the trial indices.
const PROBLEM_STREAM: u64 = u64::MAX;

/// Reporting grid used when a config does not give one.
pub fn default_grid(problem: &ProblemSpec) -> Vec<f64> {
    match problem {
        ProblemSpec::Worst { .. } => vec![100.0, 1000.0, 10000.0, 20000.0, 30000.0],
        ProblemSpec::KernelRidge { .. } => vec![50000.0],
        _ => vec![1000.0, 5000.0, 10000.0],
    }
}

/// One curve of an experiment: a label and the optimizer settings behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub label: String,
    pub config: OptimizerConfig,
}

impl MethodRun {
    /// Labels the run with the method name.
    pub fn new(config: OptimizerConfig) -> Self {
        MethodRun {
            label: config.method.name().to_string(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: ProblemSpec,
    pub runs: Vec<MethodRun>,
    pub trials: usize,
    pub seed: u64,
    /// Equivalent-HF budget applied to every run, overriding `config.budget`.
    pub budget: f64,
    pub grid: Vec<f64>,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.runs.is_empty() {
            return Err(Error::config("experiment lists no methods"));
        }
        if self.grid.is_empty() {
            return Err(Error::config("checkpoint grid is empty"));
        }
        if self.grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::config("grid values must be finite and non-negative"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("grid must be strictly increasing"));
        }
        let last = self.grid[self.grid.len() - 1];
        if !(self.budget >= last) {
            return Err(Error::config(format!(
                "budget {} is below the last grid point {last}",
                self.budget
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be positive"));
        }
        for (i, r) in self.runs.iter().enumerate() {
            if self.runs[..i].iter().any(|o| o.label == r.label) {
                return Err(Error::config(format!("duplicate run label {}", r.label)));
            }
        }
        Ok(())
    }

    /// Seed handed to the optimizer for trial `t`.
    pub fn trial_seed(&self, t: usize) -> u64 {
        RngStream::new(self.seed).child(t as u64).seed()
    }

    pub fn build_problem(&self) -> Result<BiFidelityProblem> {
        self.problem.build(RngStream::new(self.seed).child(PROBLEM_STREAM))
    }
}

/// Per-grid-point statistics of the best value across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl CurveSummary {
    /// `curves[t][i]` is trial `t` at `grid[i]`.
    pub fn from_curves(grid: &[f64], curves: &[Vec<f64>]) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::contract("cannot summarise zero trials"));
        }
        if let Some(c) = curves.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::contract(format!(
                "curve has {} points, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        let n = curves.len() as f64;
        let mut s = CurveSummary {
            grid: grid.to_vec(),
            mean: Vec::with_capacity(grid.len()),
            std: Vec::with_capacity(grid.len()),
            min: Vec::with_capacity(grid.len()),
            max: Vec::with_capacity(grid.len()),
        };
        for i in 0..grid.len() {
            let column = curves.iter().map(|c| c[i]);
            let lo = column.clone().fold(f64::INFINITY, f64::min);
            let hi = column.clone().fold(f64::NEG_INFINITY, f64::max);
            // rounding in the sum can push the mean of equal values past them
            let mean = (column.clone().sum::<f64>() / n).clamp(lo, hi);
            let var = column.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            s.mean.push(mean);
            s.std.push(var.sqrt());
            s.min.push(lo);
            s.max.push(hi);
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Mean at grid value `n`, if `n` is on the grid.
    pub fn mean_at(&self, n: f64) -> Option<f64> {
        self.grid.iter().position(|g| *g == n).map(|i| self.mean[i])
    }
}

/// Reads a trace on `grid` as a step function of spend.
pub fn resample(trace: &RunTrace, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|g| trace.best_at(*g).unwrap_or(f64::NAN))
        .collect()
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub label: String,
    pub config: OptimizerConfig,
    /// One trace per trial, in trial order.
    pub traces: Vec<RunTrace>,
    pub summary: CurveSummary,
}

impl MethodResult {
    /// Summary on an arbitrary grid, e.g. a dense one for plotting.
    pub fn summary_on(&self, grid: &[f64]) -> Result<CurveSummary> {
        let curves: Vec<_> = self.traces.iter().map(|t| resample(t, grid)).collect();
        CurveSummary::from_curves(grid, &curves)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub budget: f64,
    pub grid: Vec<f64>,
    pub methods: Vec<MethodResult>,
}

impl ExperimentResult {
    pub fn method(&self, label: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.label == label)
    }

    pub fn summaries(&self) -> Vec<(&str, &CurveSummary)> {
        self.methods
            .iter()
            .map(|m| (m.label.as_str(), &m.summary))
            .collect()
    }
}

/// Builds the problem from the spec and runs every (method, trial) pair.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let problem = spec.build_problem()?;
    run_experiment_on(&problem, spec)
}

/// Like [`run_experiment`] on an already built problem; `spec.problem` is
/// ignored.
pub fn run_experiment_on(problem: &BiFidelityProblem, spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let configs: Vec<OptimizerConfig> = spec
        .runs
        .iter()
        .map(|r| OptimizerConfig {
            budget: spec.budget,
            ..r.config.clone()
        })
        .collect();
    for (r, c) in spec.runs.iter().zip(&configs) {
        c.validate(problem.dim())
            .map_err(|e| Error::config(format!("{}: {e}", r.label)))?;
    }

    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|m| (0..spec.trials).map(move |t| (m, t)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(m, t)| {
                let seed = spec.trial_seed(t);
                run(problem, &configs[m], seed)
                    .map(|out| out.trace)
                    .map_err(|e| Error::RunAborted {
                        method: spec.runs[m].label.clone(),
                        seed,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()
    };
    let traces = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("cannot start {n} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };

    // jobs are method-major, so each chunk holds one method's trials in order
    let mut methods = Vec::with_capacity(configs.len());
    for ((r, config), chunk) in spec
        .runs
        .iter()
        .zip(configs)
        .zip(traces.chunks(spec.trials))
    {
        let curves: Vec<_> = chunk.iter().map(|t| resample(t, &spec.grid)).collect();
        methods.push(MethodResult {
            label: r.label.clone(),
            config,
            traces: chunk.to_vec(),
            summary: CurveSummary::from_curves(&spec.grid, &curves)?,
        });
    }
    Ok(ExperimentResult {
        name: spec.name.clone(),
        budget: spec.budget,
        grid: spec.grid.clone(),
        methods,
    })
}
