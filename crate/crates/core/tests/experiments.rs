use std::fs;
use std::path::Path;
use std::sync::Arc;

use bfssd::bench::{resample, run_experiment, write_experiment, CurveSummary, PlotOptions};
use bfssd::config::ExperimentConfig;
use bfssd::linesearch::{Exhaustion, RhoPolicy};
use bfssd::objective::Scaled;
use bfssd::problems::make_worst_pair;
use bfssd::{run, BiFidelityProblem, Checkpoint, FnObjective, Method, OptimizerConfig, RunTrace, Vector};

const CONFIG: &str = r#"
name = "roundtrip"
trials = 4
seed = 11
budget = 2000
grid = [200, 700, 1500, 2000]
methods = ["GD", "SPSA", "FS-SSD", "HF-SSD", "BF-SSD", "VR-SSD"]
[problem]
kind = "worst"
dim = 120
r_high = 30
[params]
subdim = 6
[method.BF-SSD]
knots = 2
"#;

fn read_trial(path: &Path) -> RunTrace {
    let mut r = csv::Reader::from_path(path).unwrap();
    let rows = r.deserialize::<(f64, f64)>().map(|row| {
        let (equiv_hf, best_value) = row.unwrap();
        Checkpoint { equiv_hf, best_value }
    });
    RunTrace::from_checkpoints("csv", 0, rows.collect::<Vec<_>>())
}

#[test]
fn summary_is_recomputable_from_trial_csvs() {
    let cfg = ExperimentConfig::from_toml(CONFIG, &[]).unwrap();
    let spec = cfg.experiment().unwrap();
    let result = run_experiment(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let root = write_experiment(&result, dir.path(), &PlotOptions::default()).unwrap();

    let mut summary = csv::Reader::from_path(root.join("summary.csv")).unwrap();
    let rows: Vec<(String, f64, f64, f64, f64, f64)> = summary.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6 * 4);
    for m in &spec.runs {
        let curves: Vec<Vec<f64>> = (0..spec.trials)
            .map(|t| {
                let trace = read_trial(&root.join(&m.label).join(format!("trial_{t}.csv")));
                resample(&trace, &spec.grid)
            })
            .collect();
        let again = CurveSummary::from_curves(&spec.grid, &curves).unwrap();
        for (i, n) in spec.grid.iter().enumerate() {
            let row = rows.iter().find(|r| r.0 == m.label && r.1 == *n).unwrap();
            for (a, b) in [
                (row.2, again.mean[i]),
                (row.3, again.std[i]),
                (row.4, again.min[i]),
                (row.5, again.max[i]),
            ] {
                assert!((a - b).abs() <= 1e-12, "{} N={n}: {a} vs {b}", m.label);
            }
        }
    }
}

#[test]
fn curves_never_increase_and_gd_has_no_spread() {
    let cfg = ExperimentConfig::from_toml(CONFIG, &["trials=3".into()]).unwrap();
    let result = run_experiment(&cfg.experiment().unwrap()).unwrap();
    for m in &result.methods {
        let s = &m.summary;
        for i in 0..s.len() {
            assert!(s.min[i] <= s.mean[i] && s.mean[i] <= s.max[i]);
        }
        for t in &m.traces {
            let c = resample(t, &result.grid);
            assert!(c.windows(2).all(|w| w[1] <= w[0]), "{}", m.label);
        }
    }
    assert!(result.method("GD").unwrap().summary.std.iter().all(|s| *s == 0.0));
}

#[test]
fn same_seed_reproduces_the_experiment() {
    let spec = ExperimentConfig::from_toml(CONFIG, &["trials=2".into()])
        .unwrap()
        .experiment()
        .unwrap();
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    for (x, y) in a.methods.iter().zip(&b.methods) {
        assert_eq!(x.traces, y.traces);
    }
}

/// With an exact LF (zero surrogate error) every accepted BF-SSD step passes
/// the true HF decrease test, so HF values never go up.
#[test]
fn bf_ssd_descends_when_the_surrogate_is_exact() {
    let base = make_worst_pair(150, 40, 2, 20.0).unwrap();
    let h = base.hf().clone();
    let lf = FnObjective::handle(150, move |x: &Vector| h.eval(x) / 7.0);
    let hf = Arc::new(Scaled { inner: lf.clone(), scale: 7.0 });
    let p = BiFidelityProblem::new("exact", hf, lf, 0.05).unwrap();
    for seed in 0..5 {
        let cfg = OptimizerConfig {
            subdim: 10,
            budget: 5000.0,
            exhaustion: Some(Exhaustion::Reject),
            ..OptimizerConfig::for_method(Method::BfSsd)
        };
        let out = run(&p, &cfg, seed).unwrap();
        let mut prev = p.hf().eval(p.initial_point());
        for it in &out.iterations {
            assert!(it.hf_value <= prev + 1e-12 * prev.abs(), "seed {seed}");
            prev = it.hf_value;
        }
        assert!(prev < 2.0);
    }
}

#[test]
fn shipped_worst_config_matches_its_method_list() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/worst_ell20_c09.toml");
    let cfg = ExperimentConfig::load(&path, &[]).unwrap();
    let spec = cfg.experiment().unwrap();
    let labels: Vec<_> = spec.runs.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>());
    assert!(spec.runs.iter().all(|r| r.config.subdim == 20 && r.config.linesearch.shrink == 0.9));
    assert_eq!(spec.budget, 30000.0);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("kind = \"worst\""));
}

/// Full-dimensional BF-SSD on a quadratic whose LF differs from it by a
/// `W`-Lipschitz bump: the running minimum of `‖∇f‖²` stays below
/// `2L(1+c)(f(x_0) - f*) / ((K+1) c β)` for every `K`.
#[test]
fn full_subspace_gradient_bound_holds() {
    const D: usize = 10;
    const L: f64 = 4.0;
    const W: f64 = 0.01;
    let diag = Vector::from_fn(D, |i, _| 1.0 + (L - 1.0) * i as f64 / (D - 1) as f64);
    let a = diag.clone();
    let hf = FnObjective::handle(D, move |x: &Vector| 0.5 * x.component_mul(x).dot(&a));
    let h = hf.clone();
    let lf = FnObjective::handle(D, move |x: &Vector| h.eval(x) + W * x[0].sin());
    let p = BiFidelityProblem::new("bump", hf, lf, 0.1)
        .unwrap()
        .with_initial_point(Vector::from_element(D, 1.0))
        .unwrap();
    let f0 = p.hf().eval(p.initial_point());
    for seed in 0..3 {
        let base = OptimizerConfig {
            subdim: D,
            knots: 4,
            rho: RhoPolicy::Fixed(1.0),
            budget: 1e6,
            ..OptimizerConfig::for_method(Method::BfSsd)
        };
        let c = base.linesearch.shrink;
        let beta = D as f64 / (2.0 * D as f64);
        let mut best = f64::INFINITY;
        for k in 0..40u64 {
            let cfg = OptimizerConfig { max_iterations: Some(k), ..base.clone() };
            let x = run(&p, &cfg, seed).unwrap().final_point;
            let g = x.component_mul(&diag);
            best = best.min(g.norm_squared());
            let bound = 2.0 * L * (1.0 + c) * f0 / ((k + 1) as f64 * c * beta);
            assert!(best < bound, "seed {seed} K={k}: {best} vs {bound}");
        }
        assert!(best < 1e-2 * diag.norm_squared(), "seed {seed}: {best}");
    }
}
