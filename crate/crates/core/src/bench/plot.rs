use std::path::Path;

use plotters::coord::ranged1d::{AsRangedCoord, ValueFormatter};
use plotters::prelude::*;

use super::CurveSummary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub log_y: bool,
    pub title: Option<String>,
    pub size: (u32, u32),
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            log_y: false,
            title: None,
            size: (900, 600),
        }
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

/// Mean line and min–max band per method against equivalent HF evaluations,
/// written as a standalone SVG.
pub fn emit_convergence_plot(summaries: &[(&str, &CurveSummary)], path: &Path, opts: &PlotOptions) -> Result<()> {
    if summaries.is_empty() || summaries.iter().all(|(_, s)| s.is_empty()) {
        return Err(Error::NothingToPlot);
    }
    let values = summaries
        .iter()
        .flat_map(|(_, s)| s.min.iter().chain(&s.max))
        .copied()
        .filter(|v| v.is_finite());
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return Err(Error::Plot("no finite values".into()));
    }
    let x_hi = summaries
        .iter()
        .filter_map(|(_, s)| s.grid.last())
        .fold(0.0f64, |a, b| a.max(*b))
        .max(1.0);

    let root = SVGBackend::new(path, opts.size).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    if opts.log_y {
        if lo <= 0.0 {
            return Err(Error::Plot(format!(
                "log scale needs positive values, smallest is {lo}"
            )));
        }
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo / 2.0, hi * 2.0) };
        draw(&root, summaries, opts, 0.0..x_hi, (lo..hi).log_scale())?;
    } else {
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
        draw(&root, summaries, opts, 0.0..x_hi, lo - pad..hi + pad)?;
    }
    root.present().map_err(plot_err)
}

fn draw<Y>(
    root: &DrawingArea<SVGBackend<'_>, plotters::coord::Shift>,
    summaries: &[(&str, &CurveSummary)],
    opts: &PlotOptions,
    x: std::ops::Range<f64>,
    y: Y,
) -> Result<()>
where
    Y: AsRangedCoord<Value = f64>,
    Y::CoordDescType: ValueFormatter<f64>,
{
    let mut builder = ChartBuilder::on(root);
    builder
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70);
    if let Some(t) = &opts.title {
        builder.caption(t, ("sans-serif", 22));
    }
    let mut chart = builder
        .build_cartesian_2d::<std::ops::Range<f64>, Y>(x, y)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("equivalent HF evaluations")
        .y_desc("best HF value")
        .draw()
        .map_err(plot_err)?;

    for (i, (label, s)) in summaries.iter().enumerate() {
        let colour = Palette99::pick(i);
        let band: Vec<(f64, f64)> = s
            .grid
            .iter()
            .zip(&s.max)
            .map(|(x, y)| (*x, *y))
            .chain(s.grid.iter().zip(&s.min).rev().map(|(x, y)| (*x, *y)))
            .collect();
        chart
            .draw_series(std::iter::once(Polygon::new(band, colour.mix(0.15).filled())))
            .map_err(plot_err)?;
        let line = s.grid.iter().zip(&s.mean).map(|(x, y)| (*x, *y));
        chart
            .draw_series(LineSeries::new(line, colour.stroke_width(2)))
            .map_err(plot_err)?
            .label(*label)
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], colour.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperRight)
        .draw()
        .map_err(plot_err)?;
    Ok(())
}
