//! Return curves averaged over seeds.
//!
//! Each run directory is one configuration. For every evaluation step the
//! curve holds the mean over the seeds that logged that step and a
//! population-std band around it. Each configuration gets an SVG and a CSV
//! with the exact plotted series; `returns.svg` overlays all of them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::EvalRecord;
use super::logs::read_run;
use super::metrics::{mean, population_std};
use crate::{Error, Result};

pub const CURVE_HEADER: [&str; 6] = ["global_step", "mean", "std", "lower", "upper", "n_seeds"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub global_step: u64,
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<CurvePoint>,
}

/// Seed-averaged curve over the mean returns of `per_seed`.
pub fn seed_curve(label: &str, per_seed: &[(u64, Vec<EvalRecord>)]) -> Result<Curve> {
    let mut by_step: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (_, records) in per_seed {
        for r in records {
            by_step.entry(r.global_step).or_default().push(r.mean_return);
        }
    }
    if by_step.is_empty() {
        return Err(Error::EmptyWindow(format!("no evaluation records for {label:?}")));
    }
    let points = by_step
        .into_iter()
        .map(|(global_step, values)| {
            let m = mean(&values);
            let s = population_std(&values);
            CurvePoint {
                global_step,
                mean: m,
                std: s,
                lower: m - s,
                upper: m + s,
                n_seeds: values.len(),
            }
        })
        .collect();
    Ok(Curve {
        label: label.to_string(),
        points,
    })
}

pub fn write_curve_csv(curve: &Curve, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(CURVE_HEADER)?;
    for p in &curve.points {
        writer.write_record([
            p.global_step.to_string(),
            p.mean.to_string(),
            p.std.to_string(),
            p.lower.to_string(),
            p.upper.to_string(),
            p.n_seeds.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurvePoint>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut points = Vec::new();
    for row in reader.records() {
        let row = row?;
        let f = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| Error::contract(format!("{}: bad number {:?}", path.display(), &row[i])))
        };
        points.push(CurvePoint {
            global_step: row[0]
                .parse()
                .map_err(|_| Error::contract(format!("{}: bad step {:?}", path.display(), &row[0])))?,
            mean: f(1)?,
            std: f(2)?,
            lower: f(3)?,
            upper: f(4)?,
            n_seeds: row[5]
                .parse()
                .map_err(|_| Error::contract(format!("{}: bad seed count {:?}", path.display(), &row[5])))?,
        });
    }
    Ok(points)
}

fn plot_error(e: impl std::fmt::Display) -> Error {
    Error::Plot(e.to_string())
}

fn palette(i: usize) -> RGBColor {
    const COLORS: [RGBColor; 6] = [
        RGBColor(31, 119, 180),
        RGBColor(255, 127, 14),
        RGBColor(44, 160, 44),
        RGBColor(214, 39, 40),
        RGBColor(148, 103, 189),
        RGBColor(140, 86, 75),
    ];
    COLORS[i % COLORS.len()]
}

/// Draws `curves` (mean line plus shaded band) into one SVG file.
pub fn draw_curves(curves: &[Curve], title: &str, path: &Path) -> Result<()> {
    let points = curves.iter().flat_map(|c| c.points.iter());
    let (mut x_max, mut y_min, mut y_max) = (1u64, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x_max = x_max.max(p.global_step);
        y_min = y_min.min(p.lower);
        y_max = y_max.max(p.upper);
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        return Err(Error::EmptyWindow("nothing to plot".into()));
    }
    let pad = ((y_max - y_min) * 0.05).max(1e-6);
    let root = SVGBackend::new(path, (900, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_error)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(0u64..x_max, (y_min - pad)..(y_max + pad))
        .map_err(plot_error)?;
    chart
        .configure_mesh()
        .x_desc("global step")
        .y_desc("mean episodic return")
        .draw()
        .map_err(plot_error)?;
    for (i, curve) in curves.iter().enumerate() {
        let color = palette(i);
        let mut band: Vec<(u64, f64)> = curve.points.iter().map(|p| (p.global_step, p.upper)).collect();
        band.extend(curve.points.iter().rev().map(|p| (p.global_step, p.lower)));
        chart
            .draw_series(std::iter::once(Polygon::new(band, color.mix(0.2).filled())))
            .map_err(plot_error)?;
        chart
            .draw_series(LineSeries::new(
                curve.points.iter().map(|p| (p.global_step, p.mean)),
                color.stroke_width(2),
            ))
            .map_err(plot_error)?
            .label(curve.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_error)?;
    root.present().map_err(plot_error)
}

fn file_label(dir: &Path) -> String {
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .filter(|n| !n.is_empty() && *n != "." && *n != "..")
        .unwrap_or("run");
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Files written by [`emit_plots`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotArtifacts {
    pub curves: Vec<Curve>,
    pub files: Vec<PathBuf>,
}

/// One curve per run directory, from its `metrics-seed*.csv` logs.
pub fn emit_plots(runs: &[PathBuf], out_dir: &Path) -> Result<PlotArtifacts> {
    if runs.is_empty() {
        return Err(Error::config("no run directories given"));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut curves = Vec::new();
    let mut files = Vec::new();
    let mut used: Vec<String> = Vec::new();
    for run in runs {
        let per_seed = read_run(run)?;
        let mut label = file_label(run);
        let base = label.clone();
        let mut n = 2;
        while used.contains(&label) {
            label = format!("{base}-{n}");
            n += 1;
        }
        used.push(label.clone());
        let curve = seed_curve(&label, &per_seed)?;
        let csv_path = out_dir.join(format!("{label}.csv"));
        let svg_path = out_dir.join(format!("{label}.svg"));
        write_curve_csv(&curve, &csv_path)?;
        draw_curves(std::slice::from_ref(&curve), &label, &svg_path)?;
        files.extend([csv_path, svg_path]);
        curves.push(curve);
    }
    let combined = out_dir.join("returns.svg");
    draw_curves(&curves, "mean episodic return over seeds", &combined)?;
    files.push(combined);
    Ok(PlotArtifacts { curves, files })
}
