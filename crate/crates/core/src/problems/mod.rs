//! Benchmark problems and bi-fidelity pair recipes.

mod data;
mod kernel;
mod quadratic;
mod subsampled;
mod worst;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use data::load_regression_csv;
pub use kernel::{
    gram_spectrum, make_kernel_pair, nystrom_subset, rbf_gram, synthetic_regression,
    KernelRidgeHf, KernelRidgeLf, KernelRidgeSpec, SyntheticData,
};
pub use quadratic::{make_lowrank_quadratic_pair, LowRankQuadraticPair, Quadratic};
pub use subsampled::{least_squares_components, make_subsampled_pair, MeanOf, SquaredResidual};
pub use worst::{make_worst_pair, WorstFunction};

use crate::error::{Error, Result};
use crate::objective::{BiFidelityProblem, FnObjective, Scaled};
use crate::rng::RngStream;
use crate::{Matrix, Vector};

/// Where kernel ridge points and targets come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelData {
    Synthetic(SyntheticData),
    Csv {
        path: PathBuf,
        features: Vec<String>,
        target: String,
        #[serde(default)]
        rows: Option<usize>,
        /// Standardize each feature column to zero mean and unit variance.
        #[serde(default = "default_true")]
        standardize: bool,
    },
}

fn default_true() -> bool {
    true
}

impl Default for KernelData {
    fn default() -> Self {
        KernelData::Synthetic(SyntheticData::default())
    }
}

/// Declarative problem description, as found in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Worst {
        #[serde(default = "worst_defaults::dim")]
        dim: usize,
        #[serde(default = "worst_defaults::r_high")]
        r_high: usize,
        #[serde(default = "worst_defaults::r_low")]
        r_low: usize,
        #[serde(default = "worst_defaults::smoothness")]
        smoothness: f64,
    },
    KernelRidge {
        #[serde(default)]
        data: KernelData,
        #[serde(default = "kernel_defaults::lengthscale")]
        lengthscale: f64,
        #[serde(default = "kernel_defaults::ridge")]
        ridge: f64,
        #[serde(default = "kernel_defaults::nystrom")]
        nystrom: usize,
    },
    /// Random PSD quadratic with geometrically decaying spectrum; LF keeps the
    /// top `rank` eigenpairs.
    LowRankQuadratic {
        dim: usize,
        rank: usize,
        #[serde(default = "quad_defaults::decay")]
        decay: f64,
    },
    /// Least squares on synthetic data; LF averages a fixed subset of rows.
    SubsampledLeastSquares {
        samples: usize,
        dim: usize,
        subset: usize,
    },
    /// `½‖x‖²` started from `initial · 1`, with LF `lf_scale · HF`.
    Sphere {
        dim: usize,
        #[serde(default = "sphere_defaults::initial")]
        initial: f64,
        #[serde(default = "sphere_defaults::lf_scale")]
        lf_scale: f64,
        #[serde(default = "sphere_defaults::lf_cost_ratio")]
        lf_cost_ratio: f64,
    },
}

mod worst_defaults {
    pub fn dim() -> usize {
        1000
    }
    pub fn r_high() -> usize {
        100
    }
    pub fn r_low() -> usize {
        2
    }
    pub fn smoothness() -> f64 {
        20.0
    }
}

mod kernel_defaults {
    pub fn lengthscale() -> f64 {
        1.0
    }
    pub fn ridge() -> f64 {
        1e-3
    }
    pub fn nystrom() -> usize {
        10
    }
}

mod quad_defaults {
    pub fn decay() -> f64 {
        0.7
    }
}

mod sphere_defaults {
    pub fn initial() -> f64 {
        1.0
    }
    pub fn lf_scale() -> f64 {
        1.0 / 3.0
    }
    pub fn lf_cost_ratio() -> f64 {
        0.1
    }
}

/// Names accepted in the `kind` field, with a one-line description.
pub const PROBLEM_KINDS: &[(&str, &str)] = &[
    ("worst", "Nesterov worst-case quadratic; HF and LF differ in intrinsic dimension"),
    ("kernel_ridge", "dual kernel ridge regression with a Nyström LF"),
    ("low_rank_quadratic", "PSD quadratic with a truncated-spectrum LF"),
    ("subsampled_least_squares", "least squares with a fixed mini-batch LF"),
    ("sphere", "½‖x‖² with an exactly proportional LF"),
];

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec::Worst {
            dim: worst_defaults::dim(),
            r_high: worst_defaults::r_high(),
            r_low: worst_defaults::r_low(),
            smoothness: worst_defaults::smoothness(),
        }
    }
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Worst { .. } => "worst",
            ProblemSpec::KernelRidge { .. } => "kernel_ridge",
            ProblemSpec::LowRankQuadratic { .. } => "low_rank_quadratic",
            ProblemSpec::SubsampledLeastSquares { .. } => "subsampled_least_squares",
            ProblemSpec::Sphere { .. } => "sphere",
        }
    }

    /// Instantiates the problem. Random ingredients (data, Nyström set, LF
    /// subset) are drawn from children of `rng`.
    pub fn build(&self, rng: RngStream) -> Result<BiFidelityProblem> {
        match self {
            ProblemSpec::Worst {
                dim,
                r_high,
                r_low,
                smoothness,
            } => make_worst_pair(*dim, *r_high, *r_low, *smoothness),
            ProblemSpec::KernelRidge {
                data,
                lengthscale,
                ridge,
                nystrom,
            } => {
                let (points, targets) = match data {
                    KernelData::Synthetic(cfg) => synthetic_regression(cfg, rng.child(0))?,
                    KernelData::Csv {
                        path,
                        features,
                        target,
                        rows,
                        standardize,
                    } => {
                        let (mut pts, y) = load_regression_csv(path, features, target, *rows)?;
                        if *standardize {
                            standardize_columns(&mut pts);
                        }
                        (pts, y)
                    }
                };
                let spec = KernelRidgeSpec {
                    gram: rbf_gram(&points, *lengthscale)?,
                    targets,
                    ridge: *ridge,
                    nystrom_set: nystrom_subset(points.len(), *nystrom, rng.child(1))?,
                };
                make_kernel_pair(&spec)
            }
            ProblemSpec::LowRankQuadratic { dim, rank, decay } => {
                if !(*decay > 0.0 && *decay <= 1.0) {
                    return Err(Error::config(format!("decay must lie in (0, 1], got {decay}")));
                }
                let (a, lin) = random_quadratic(*dim, *decay, rng.child(0));
                let pair = make_lowrank_quadratic_pair(&a, &lin, *rank)?;
                Ok(pair.problem)
            }
            ProblemSpec::SubsampledLeastSquares {
                samples,
                dim,
                subset,
            } => {
                use rand::Rng;
                use rand_distr::StandardNormal;
                let mut r = rng.child(0).rng();
                let z = Matrix::from_fn(*samples, *dim, |_, _| r.sample::<f64, _>(StandardNormal));
                let truth = Vector::from_fn(*dim, |_, _| r.sample::<f64, _>(StandardNormal));
                let y = &z * truth + Vector::from_fn(*samples, |_, _| 0.1 * r.sample::<f64, _>(StandardNormal));
                make_subsampled_pair(least_squares_components(&z, &y), *subset, rng.child(1))
            }
            ProblemSpec::Sphere {
                dim,
                initial,
                lf_scale,
                lf_cost_ratio,
            } => {
                let hf = FnObjective::handle(*dim, |x: &Vector| 0.5 * x.norm_squared());
                let lf = Arc::new(Scaled {
                    inner: hf.clone(),
                    scale: *lf_scale,
                });
                BiFidelityProblem::new(format!("sphere(D={dim})"), hf, lf, *lf_cost_ratio)?
                    .with_gradient(Arc::new(|x: &Vector| x.clone()))
                    .with_known_optimum(0.0)
                    .with_smoothness(1.0)
                    .with_initial_point(Vector::from_element(*dim, *initial))
            }
        }
    }
}

pub(crate) fn standardize_columns(points: &mut [Vector]) {
    let Some(first) = points.first() else { return };
    let (n, m) = (points.len() as f64, first.len());
    for j in 0..m {
        let mean = points.iter().map(|p| p[j]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        for p in points.iter_mut() {
            p[j] = (p[j] - mean) / sd;
        }
    }
}

/// `A = Q diag(decay^i) Qᵀ` with Haar `Q`, and a Gaussian linear term.
fn random_quadratic(dim: usize, decay: f64, rng: RngStream) -> (Matrix, Vector) {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut r = rng.rng();
    let g = Matrix::from_fn(dim, dim, |_, _| r.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let spectrum = Vector::from_fn(dim, |i, _| decay.powi(i as i32));
    let a = &q * Matrix::from_diagonal(&spectrum) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let lin = Vector::from_fn(dim, |_, _| r.sample::<f64, _>(StandardNormal));
    (a, lin)
}
