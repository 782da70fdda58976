//! Dual kernel ridge regression with a Nyström low-fidelity model.

use std::sync::Arc;

use nalgebra::Cholesky;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{BiFidelityProblem, Objective};
use crate::rng::RngStream;
use crate::{Matrix, Vector};

/// Gaussian kernel matrix `exp(−‖xᵢ − xⱼ‖² / 2s²)`.
pub fn rbf_gram(points: &[Vector], lengthscale: f64) -> Result<Matrix> {
    if !(lengthscale > 0.0) {
        return Err(Error::config(format!("lengthscale must be positive, got {lengthscale}")));
    }
    let n = points.len();
    let denom = 2.0 * lengthscale * lengthscale;
    let mut k = Matrix::identity(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let v = (-(&points[i] - &points[j]).norm_squared() / denom).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Eigenvalues of a symmetric matrix in descending order.
pub fn gram_spectrum(gram: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = gram.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

#[derive(Debug, Clone)]
pub struct KernelRidgeSpec {
    pub gram: Matrix,
    pub targets: Vector,
    pub ridge: f64,
    pub nystrom_set: Vec<usize>,
}

impl KernelRidgeSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.gram.nrows();
        if d == 0 || self.gram.ncols() != d {
            return Err(Error::config("Gram matrix must be square and non-empty"));
        }
        if self.targets.len() != d {
            return Err(Error::config(format!(
                "{} targets for a {d}x{d} Gram matrix",
                self.targets.len()
            )));
        }
        if !(self.ridge > 0.0) {
            return Err(Error::config(format!("ridge must be positive, got {}", self.ridge)));
        }
        if self.nystrom_set.is_empty() || self.nystrom_set.len() > d {
            return Err(Error::config("Nyström set size must lie in 1..=D"));
        }
        if self.nystrom_set.iter().any(|&i| i >= d) {
            return Err(Error::config("Nyström index out of range"));
        }
        if (&self.gram - self.gram.transpose()).amax() > 1e-10 {
            return Err(Error::config("Gram matrix is not symmetric"));
        }
        Ok(())
    }

    /// `(K + λI)⁻¹ y`.
    pub fn optimum(&self) -> Result<Vector> {
        let d = self.gram.nrows();
        let shifted = &self.gram + Matrix::identity(d, d) * self.ridge;
        Cholesky::new(shifted)
            .map(|c| c.solve(&self.targets))
            .ok_or_else(|| Error::LinearAlgebra("K + λI is not positive definite".into()))
    }

    /// Largest eigenvalue of `K`, by power iteration.
    pub fn top_eigenvalue(&self) -> f64 {
        let d = self.gram.nrows();
        let mut v = Vector::from_element(d, 1.0 / (d as f64).sqrt());
        let mut lambda = 0.0;
        for _ in 0..500 {
            let kv = &self.gram * &v;
            let next = kv.norm();
            if next == 0.0 {
                return 0.0;
            }
            v = kv / next;
            let done = (next - lambda).abs() <= 1e-12 * next;
            lambda = next;
            if done {
                break;
            }
        }
        lambda
    }
}

/// `αᵀKα − 2⟨α, y⟩ + λ‖α‖²`.
pub struct KernelRidgeHf {
    gram: Matrix,
    targets: Vector,
    ridge: f64,
}

impl Objective for KernelRidgeHf {
    fn dim(&self) -> usize {
        self.targets.len()
    }

    fn eval(&self, alpha: &Vector) -> f64 {
        // symmetric quadratic form from the strict lower triangle
        let a = alpha.as_slice();
        let mut diag = 0.0;
        let mut off = 0.0;
        for (j, col) in self.gram.column_iter().enumerate() {
            let col = &col.as_slice()[j..];
            diag += col[0] * a[j] * a[j];
            off += a[j] * dot(&col[1..], &a[j + 1..]);
        }
        diag + 2.0 * off - 2.0 * alpha.dot(&self.targets) + self.ridge * alpha.norm_squared()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            acc[k] += a[4 * c + k] * b[4 * c + k];
        }
    }
    let mut s = acc[0] + acc[1] + acc[2] + acc[3];
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// The HF objective with `K` replaced by `K[:,S] K[S,S]⁻¹ K[S,:]`, evaluated
/// in `O(lD)` without forming the approximation.
pub struct KernelRidgeLf {
    /// Columns `K[:, s]` for `s ∈ S`.
    cross: Matrix,
    /// Inverse Cholesky factor of `K[S,S]` (plus jitter).
    whitening: Matrix,
    targets: Vector,
    ridge: f64,
}

impl KernelRidgeLf {
    pub fn new(spec: &KernelRidgeSpec) -> Result<Self> {
        let s = &spec.nystrom_set;
        let cross = spec.gram.select_columns(s);
        let block = cross.select_rows(s);
        let factor = jittered_cholesky(&block)?;
        let l = factor.l();
        let whitening = l
            .solve_lower_triangular(&Matrix::identity(s.len(), s.len()))
            .ok_or_else(|| Error::LinearAlgebra("singular Nyström factor".into()))?;
        Ok(KernelRidgeLf {
            cross,
            whitening,
            targets: spec.targets.clone(),
            ridge: spec.ridge,
        })
    }

    /// `K̃ = K[:,S] K[S,S]⁻¹ K[S,:]`, materialized for tests only.
    pub fn dense_approximation(&self) -> Matrix {
        let f = &self.cross * self.whitening.transpose();
        &f * f.transpose()
    }
}

impl Objective for KernelRidgeLf {
    fn dim(&self) -> usize {
        self.targets.len()
    }

    fn eval(&self, alpha: &Vector) -> f64 {
        let u = self.cross.tr_mul(alpha);
        let w = &self.whitening * u;
        w.norm_squared() - 2.0 * alpha.dot(&self.targets) + self.ridge * alpha.norm_squared()
    }
}

fn jittered_cholesky(block: &Matrix) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = Cholesky::new(block.clone()) {
        return Ok(c);
    }
    let n = block.nrows();
    for jitter in [1e-10, 1e-9, 1e-8, 1e-7, 1e-6] {
        if let Some(c) = Cholesky::new(block + Matrix::identity(n, n) * jitter) {
            return Ok(c);
        }
    }
    Err(Error::LinearAlgebra(
        "Nyström block is not positive definite even with jitter 1e-6".into(),
    ))
}

/// HF/LF kernel ridge pair with cost ratio `l/D`, the direct-solve optimum and
/// `L = 2(λ_max(K) + λ)`.
pub fn make_kernel_pair(spec: &KernelRidgeSpec) -> Result<BiFidelityProblem> {
    spec.validate()?;
    let d = spec.gram.nrows();
    let lf = KernelRidgeLf::new(spec)?;
    let hf = KernelRidgeHf {
        gram: spec.gram.clone(),
        targets: spec.targets.clone(),
        ridge: spec.ridge,
    };
    let opt = spec.optimum()?;
    let f_star = hf.eval(&opt);
    let smoothness = 2.0 * (spec.top_eigenvalue() + spec.ridge);
    let gram = spec.gram.clone();
    let (y, ridge) = (spec.targets.clone(), spec.ridge);
    Ok(BiFidelityProblem::new(
        format!("kernel_ridge(D={d}, l={})", spec.nystrom_set.len()),
        Arc::new(hf),
        Arc::new(lf),
        spec.nystrom_set.len() as f64 / d as f64,
    )?
    .with_gradient(Arc::new(move |a: &Vector| {
        (&gram * a) * 2.0 - &y * 2.0 + a * (2.0 * ridge)
    }))
    .with_known_optimum(f_star)
    .with_smoothness(smoothness))
}

/// Settings for the synthetic clustered regression set used in place of a
/// real dataset.
///
/// Points are Gaussian clusters in a `latent_dim`-dimensional space mapped
/// linearly into `features` dimensions, so the RBF Gram spectrum decays fast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticData {
    pub points: usize,
    pub features: usize,
    pub latent_dim: usize,
    pub clusters: usize,
    /// Spread of cluster centres in latent space.
    pub centre_scale: f64,
    /// Within-cluster standard deviation in latent space.
    pub cluster_scale: f64,
    /// Isotropic noise added after the linear map.
    pub feature_noise: f64,
    /// Target noise before standardization.
    pub noise: f64,
}

impl Default for SyntheticData {
    fn default() -> Self {
        SyntheticData {
            points: 1000,
            features: 8,
            latent_dim: 2,
            clusters: 12,
            centre_scale: 1.5,
            cluster_scale: 0.4,
            feature_noise: 0.05,
            noise: 0.1,
        }
    }
}

/// Clustered points with a smooth nonlinear target. Features and targets are
/// standardized to zero mean and unit variance.
pub fn synthetic_regression(cfg: &SyntheticData, rng: RngStream) -> Result<(Vec<Vector>, Vector)> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    if cfg.points == 0 || cfg.features == 0 || cfg.clusters == 0 || cfg.latent_dim == 0 {
        return Err(Error::config(
            "synthetic data needs points, features, latent_dim and clusters",
        ));
    }
    let mut rng = rng.rng();
    let mut normal = |s: f64| s * rng.sample::<f64, _>(StandardNormal);
    let (k, f) = (cfg.latent_dim, cfg.features);
    let centres: Vec<Vector> = (0..cfg.clusters)
        .map(|_| Vector::from_fn(k, |_, _| normal(cfg.centre_scale)))
        .collect();
    let map = Matrix::from_fn(f, k, |_, _| normal(1.0 / (k as f64).sqrt()));
    let mut points = Vec::with_capacity(cfg.points);
    let mut targets = Vector::zeros(cfg.points);
    for i in 0..cfg.points {
        let c = &centres[i % cfg.clusters];
        let z = Vector::from_fn(k, |j, _| c[j] + normal(cfg.cluster_scale));
        let p = &map * &z + Vector::from_fn(f, |_, _| normal(cfg.feature_noise));
        let t = z.sum();
        targets[i] = t.sin() + 0.5 * t + 0.3 * z[0] * z[k - 1] + normal(cfg.noise);
        points.push(p);
    }
    super::standardize_columns(&mut points);
    let mean = targets.mean();
    let sd = targets.variance().sqrt().max(f64::MIN_POSITIVE);
    targets.apply(|t| *t = (*t - mean) / sd);
    Ok((points, targets))
}

/// Draws `l` distinct inducing indices out of `d`.
pub fn nystrom_subset(d: usize, l: usize, rng: RngStream) -> Result<Vec<usize>> {
    if l == 0 || l > d {
        return Err(Error::config(format!("Nyström set size must lie in 1..={d}, got {l}")));
    }
    let mut s = sample(&mut rng.rng(), d, l).into_vec();
    s.sort_unstable();
    Ok(s)
}
