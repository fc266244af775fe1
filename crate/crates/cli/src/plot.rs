//! SVG cost and accuracy plots from a results table.
//!
//! Cost plots, one per `(g, p)`, chart compared pairs against `n` for the
//! all-pairs baseline and for CrowDC with and without shared pivot pairs.
//! Pairs are tasks per repetition, so the curves do not depend on `t`.
//! Accuracy plots, one per `(n, r, g, p)`, chart mean Kendall tau against
//! `t` for both methods. The per-cell summary behind the plots is written
//! to `aggregated.csv`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crowdc_core::simulate::cost_formulas;
use crowdc_core::Method;
use plotters::prelude::*;
use thiserror::Error;

use crate::results::{read_results, summarize, write_summary, ResultsError, SummaryRow};

pub const AGGREGATED_FILE: &str = "aggregated.csv";

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("malformed results: {0}")]
    MalformedResults(#[from] ResultsError),
    #[error("results table has no rows")]
    EmptyResults,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("drawing: {0}")]
    Draw(String),
}

fn draw_err<E: std::fmt::Display>(e: E) -> PlotError {
    PlotError::Draw(e.to_string())
}

struct Series {
    label: &'static str,
    color: RGBColor,
    points: Vec<(f64, f64)>,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn line_chart(path: &Path, title: &str, x_desc: &str, y_desc: &str, series: &[Series]) -> Result<(), PlotError> {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (x_lo, x_hi, y_lo, y_hi) = all.fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    let (x_lo, x_hi) = padded(x_lo, x_hi);
    let (y_lo, y_hi) = padded(y_lo, y_hi);

    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc(x_desc)
        .y_desc(y_desc)
        .draw()
        .map_err(draw_err)?;
    for s in series {
        let color = s.color;
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
            .map_err(draw_err)?
            .label(s.label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart
            .draw_series(s.points.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(draw_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)?;
    Ok(())
}

fn crowdc_key(row: &SummaryRow) -> Option<(usize, usize)> {
    Some((row.g?, row.p?))
}

/// Reads `results`, writes the aggregate CSV and the plots into `out_dir`,
/// and returns the plot paths.
pub fn emit_plots(results: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let rows = read_results(File::open(results)?)?;
    if rows.is_empty() {
        return Err(PlotError::EmptyResults);
    }
    fs::create_dir_all(out_dir)?;
    let summary = summarize(&rows);
    write_summary(BufWriter::new(File::create(out_dir.join(AGGREGATED_FILE))?), &summary)?;

    let crowdc: Vec<&SummaryRow> = summary.iter().filter(|s| s.method == Method::Crowdc).collect();
    let baseline: Vec<&SummaryRow> = summary.iter().filter(|s| s.method == Method::Btl).collect();
    let mut written = Vec::new();

    // Cost: compared pairs vs n, per (g, p).
    let mut by_gp: BTreeMap<(usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    for row in &crowdc {
        let Some(key) = crowdc_key(row) else { continue };
        // Mean pairs over every (t, r) cell with this n; the count is the same in each.
        by_gp.entry(key).or_default().insert(row.n, row.unique_pairs_mean);
    }
    for ((g, p), points) in &by_gp {
        let ns: Vec<usize> = points.keys().copied().collect();
        let series = [
            Series {
                label: "BTL (all pairs)",
                color: RGBColor(31, 119, 180),
                points: ns.iter().map(|&n| (n as f64, cost_formulas(n, 1, 1, 1).baseline_total as f64)).collect(),
            },
            Series {
                label: "CrowDC (naive)",
                color: RGBColor(255, 127, 14),
                points: ns
                    .iter()
                    .filter(|&&n| n % g == 0)
                    .map(|&n| (n as f64, cost_formulas(n, *g, *p, 1).crowdc_total_naive as f64))
                    .collect(),
            },
            Series {
                label: "CrowDC (shared)",
                color: RGBColor(44, 160, 44),
                points: points.iter().map(|(&n, &pairs)| (n as f64, pairs)).collect(),
            },
        ];
        let path = out_dir.join(format!("cost_g{g}_p{p}.svg"));
        line_chart(&path, &format!("Compared pairs, g={g}, p={p}"), "n (items)", "pairs compared (x t for tasks)", &series)?;
        written.push(path);
    }

    // Accuracy: mean tau vs t, per (n, r, g, p).
    let mut by_cell: BTreeMap<(usize, u64, usize, usize), Vec<&SummaryRow>> = BTreeMap::new();
    for row in &crowdc {
        let Some((g, p)) = crowdc_key(row) else { continue };
        by_cell.entry((row.n, row.r.to_bits(), g, p)).or_default().push(row);
    }
    for ((n, r_bits, g, p), rows) in &by_cell {
        let r = f64::from_bits(*r_bits);
        let mut crowdc_points: Vec<(f64, f64)> = rows.iter().map(|s| (f64::from(s.t), s.tau_mean)).collect();
        crowdc_points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut btl_points: Vec<(f64, f64)> = baseline
            .iter()
            .filter(|s| s.n == *n && s.r.to_bits() == *r_bits)
            .map(|s| (f64::from(s.t), s.tau_mean))
            .collect();
        btl_points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let series = [
            Series {
                label: "BTL",
                color: RGBColor(31, 119, 180),
                points: btl_points,
            },
            Series {
                label: "CrowDC",
                color: RGBColor(44, 160, 44),
                points: crowdc_points,
            },
        ];
        let path = out_dir.join(format!("accuracy_n{n}_r{r}_g{g}_p{p}.svg"));
        line_chart(
            &path,
            &format!("Kendall tau, n={n}, r={r}, g={g}, p={p}"),
            "t (comparisons per pair)",
            "mean tau",
            &series,
        )?;
        written.push(path);
    }
    Ok(written)
}
