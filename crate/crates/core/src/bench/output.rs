use std::fs;
use std::path::{Path, PathBuf};

use super::plot::{emit_convergence_plot, PlotOptions};
use super::{CurveSummary, ExperimentResult};
use crate::error::Result;
use crate::trace::RunTrace;

/// Points on the dense grid used for plots.
const PLOT_POINTS: usize = 200;

fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Table with one row per method and `mean@N,std@N` columns in grid order,
/// four decimals. Grid values missing from a summary are left blank.
pub fn emit_table(summaries: &[(&str, &CurveSummary)], grid: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string()];
    for n in grid {
        header.push(format!("mean@{n}"));
        header.push(format!("std@{n}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (label, s) in summaries {
        let mut row = vec![label.to_string()];
        for n in grid {
            match s.grid.iter().position(|g| g == n) {
                Some(i) => {
                    row.push(format!("{:.4}", s.mean[i]));
                    row.push(format!("{:.4}", s.std[i]));
                }
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

/// Long-format `method,N,mean,std,min,max` at full precision.
pub fn summary_csv(summaries: &[(&str, &CurveSummary)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "N", "mean", "std", "min", "max"])
        .map_err(csv_err)?;
    for (label, s) in summaries {
        for i in 0..s.len() {
            w.write_record([
                label.to_string(),
                s.grid[i].to_string(),
                s.mean[i].to_string(),
                s.std[i].to_string(),
                s.min[i].to_string(),
                s.max[i].to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// Raw checkpoints of one trial as `equiv_hf,best_value`.
pub fn trial_csv(trace: &RunTrace) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["equiv_hf", "best_value"]).map_err(csv_err)?;
    for c in trace.checkpoints() {
        w.write_record([c.equiv_hf.to_string(), c.best_value.to_string()])
            .map_err(csv_err)?;
    }
    finish(w)
}

/// Directory-safe form of a run label.
fn dir_name(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

/// Writes `<out>/<name>/` with per-trial CSVs, `summary.csv`, `table.csv` and
/// `curves.svg`. Returns the experiment directory.
pub fn write_experiment(result: &ExperimentResult, out: &Path, plot: &PlotOptions) -> Result<PathBuf> {
    let dir = out.join(dir_name(&result.name));
    fs::create_dir_all(&dir)?;
    for m in &result.methods {
        let mdir = dir.join(dir_name(&m.label));
        fs::create_dir_all(&mdir)?;
        for (t, trace) in m.traces.iter().enumerate() {
            fs::write(mdir.join(format!("trial_{t}.csv")), trial_csv(trace)?)?;
        }
    }
    let summaries = result.summaries();
    fs::write(dir.join("summary.csv"), summary_csv(&summaries)?)?;
    fs::write(dir.join("table.csv"), emit_table(&summaries, &result.grid)?)?;

    let dense = dense_grid(result.budget, &result.grid);
    let dense_summaries = result
        .methods
        .iter()
        .map(|m| m.summary_on(&dense))
        .collect::<Result<Vec<_>>>()?;
    let labelled: Vec<_> = result
        .methods
        .iter()
        .map(|m| m.label.as_str())
        .zip(&dense_summaries)
        .collect();
    let opts = PlotOptions {
        title: plot.title.clone().or_else(|| Some(result.name.clone())),
        ..plot.clone()
    };
    emit_convergence_plot(&labelled, &dir.join("curves.svg"), &opts)?;
    Ok(dir)
}

/// Evenly spaced points up to `budget`, merged with the reporting grid.
fn dense_grid(budget: f64, grid: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=PLOT_POINTS)
        .map(|i| budget * i as f64 / PLOT_POINTS as f64)
        .chain(grid.iter().copied())
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}
