//! Runs the simulation grid and writes `results.csv`, `summary.csv` and
//! `manifest.json`.
//!
//! Work is split into units of one `(n, t, r, dataset)`: one baseline fit
//! plus every `(g, p)` CrowDC replicate on that dataset. Units run on a
//! bounded rayon pool, but each unit's output depends only on seeds derived
//! from the master seed, and units are written in coordinate order. The
//! output files are therefore identical for any worker count.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crowdc_core::crowdc::run_crowdc;
use crowdc_core::metrics::{accuracy_ratio, kendall_tau};
use crowdc_core::params::validate_worker_parameters;
use crowdc_core::simulate::{cost_formulas, run_btl_baseline, SimulatedWorkers, WorkerModel};
use crowdc_core::{dataset_items, validate_parameters, ExperimentRecord, FitConfig, Method, ParameterError, Parameters, RunParams};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::SweepConfig;
use crate::results::{summarize, write_results, write_summary, ResultRow, ResultsError};
use crate::seeds;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Results(#[from] ResultsError),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Worker threads; 0 lets rayon choose.
    pub jobs: usize,
    /// Set to stop scheduling new units; finished units are still written.
    pub cancel: Arc<AtomicBool>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            jobs: 0,
            cancel: Arc::new(AtomicBool::new(false)),
        }
    }
}

/// A grid cell that was not run, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCell {
    pub n: usize,
    pub t: u32,
    pub r: f64,
    pub g: Option<usize>,
    pub p: Option<usize>,
    pub violation: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedUnit {
    pub n: usize,
    pub t: u32,
    pub r: f64,
    pub dataset: usize,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub status: SweepStatus,
    pub master_seed: u64,
    pub units_planned: usize,
    pub units_completed: usize,
    pub records: usize,
    pub skipped: Vec<SkippedCell>,
    pub failures: Vec<FailedUnit>,
    pub interrupted: bool,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub manifest: Manifest,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
    pub rows: Vec<ResultRow>,
}

/// One `(n, t, r, dataset)` unit of work and the `(g, p)` cells run on it.
#[derive(Debug, Clone)]
struct Unit {
    n: usize,
    t: u32,
    r: f64,
    dataset: usize,
    cells: Arc<Vec<(usize, usize)>>,
}

enum UnitOutcome {
    Done(Vec<ExperimentRecord>),
    Failed(String),
    Cancelled,
}

/// The planned units and the skipped cells for a config, in write order.
fn plan(config: &SweepConfig) -> (Vec<Unit>, Vec<SkippedCell>) {
    let mut ns = config.n.clone();
    let mut ts = config.t.clone();
    let mut rs = config.r.clone();
    let mut gs = config.g.clone();
    let mut ps = config.p.clone();
    ns.sort_unstable();
    ns.dedup();
    ts.sort_unstable();
    ts.dedup();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    gs.sort_unstable();
    gs.dedup();
    ps.sort_unstable();
    ps.dedup();

    let mut units = Vec::new();
    let mut skipped = Vec::new();
    let skip = |n, t, r, g, p, e: ParameterError| SkippedCell {
        n,
        t,
        r,
        g,
        p,
        violation: e.name(),
        detail: e.to_string(),
    };
    for &n in &ns {
        for &t in &ts {
            for &r in &rs {
                let baseline_ok = if n < 3 {
                    Err(ParameterError::TooFewItems { n })
                } else {
                    validate_worker_parameters(t, r)
                };
                if let Err(e) = baseline_ok {
                    skipped.push(skip(n, t, r, None, None, e));
                    continue;
                }
                let mut cells = Vec::new();
                for &g in &gs {
                    for &p in &ps {
                        match validate_parameters(Parameters { n, t, r, g, p }) {
                            Ok(_) => cells.push((g, p)),
                            Err(e) => skipped.push(skip(n, t, r, Some(g), Some(p), e)),
                        }
                    }
                }
                let cells = Arc::new(cells);
                for dataset in 0..config.datasets_per_cell {
                    units.push(Unit {
                        n,
                        t,
                        r,
                        dataset,
                        cells: Arc::clone(&cells),
                    });
                }
            }
        }
    }
    (units, skipped)
}

/// Closed-form record count for a config: one baseline row per dataset and
/// `partitions_per_dataset` rows per valid `(g, p)` cell per dataset.
pub fn expected_record_count(config: &SweepConfig) -> (usize, usize) {
    let (units, _) = plan(config);
    let baseline = units.len();
    let crowdc = units.iter().map(|u| u.cells.len()).sum::<usize>() * config.partitions_per_dataset;
    (baseline, crowdc)
}

pub fn skipped_cells(config: &SweepConfig) -> Vec<SkippedCell> {
    plan(config).1
}

fn run_unit(unit: &Unit, config: &SweepConfig, fit: &FitConfig, cancel: &AtomicBool) -> UnitOutcome {
    if cancel.load(Ordering::SeqCst) {
        return UnitOutcome::Cancelled;
    }
    let Unit { n, t, r, dataset, .. } = *unit;
    let dataset_seed = seeds::dataset_seed(config.master_seed, n, t, r, dataset);
    let model = match WorkerModel::new(r, t, dataset_seed) {
        Ok(m) => m,
        Err(e) => return UnitOutcome::Failed(e.to_string()),
    };
    let items = dataset_items(n);
    let baseline_total = cost_formulas(n, 1, 1, t).baseline_total;

    let baseline = match run_btl_baseline(n, &model, fit) {
        Ok(b) => b,
        Err(e) => return UnitOutcome::Failed(format!("baseline: {e}")),
    };
    let baseline_tau = kendall_tau(&baseline.scores, &items).expect("baseline covers all items").tau;
    let mut records = vec![ExperimentRecord::new(
        RunParams {
            method: Method::Btl,
            n,
            t,
            r,
            g: None,
            p: None,
            dataset_seed,
            partition_seed: None,
        },
        baseline.unique_pairs_compared,
        baseline_tau,
        accuracy_ratio(baseline_tau, baseline_tau).ok(),
        baseline_total,
    )];

    for &(g, p) in unit.cells.iter() {
        for replicate in 0..config.partitions_per_dataset {
            if cancel.load(Ordering::SeqCst) {
                return UnitOutcome::Cancelled;
            }
            let partition_seed = seeds::partition_seed(dataset_seed, g, p, replicate);
            let mut workers = SimulatedWorkers::new(model);
            let result = match run_crowdc(&items, &mut workers, g, p, partition_seed, fit) {
                Ok(res) => res,
                Err(e) => return UnitOutcome::Failed(format!("crowdc g={g} p={p} replicate={replicate}: {e}")),
            };
            let tau = kendall_tau(&result.final_scores, &items).expect("final scores cover all items").tau;
            records.push(ExperimentRecord::new(
                RunParams {
                    method: Method::Crowdc,
                    n,
                    t,
                    r,
                    g: Some(g),
                    p: Some(p),
                    dataset_seed,
                    partition_seed: Some(partition_seed),
                },
                result.unique_pairs_compared,
                tau,
                accuracy_ratio(tau, baseline_tau).ok(),
                baseline_total,
            ));
        }
    }
    UnitOutcome::Done(records)
}

/// Runs every feasible cell of `config` and writes the output files into
/// `out_dir`. Infeasible cells are skipped and listed in the manifest.
/// A failed or cancelled unit makes the sweep partial; everything that did
/// finish is still written.
pub fn run_sweep(config: &SweepConfig, out_dir: &Path, options: &SweepOptions) -> Result<SweepOutcome, SweepError> {
    fs::create_dir_all(out_dir)?;
    let (units, skipped) = plan(config);
    for cell in &skipped {
        warn!(
            "skipping n={} t={} r={} g={:?} p={:?}: {}",
            cell.n, cell.t, cell.r, cell.g, cell.p, cell.detail
        );
    }
    info!("running {} units", units.len());

    let fit = config.fit_config();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(options.jobs).build()?;
    let outcomes: Vec<UnitOutcome> = pool.install(|| {
        units
            .par_iter()
            .map(|unit| run_unit(unit, config, &fit, &options.cancel))
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut completed = 0;
    let mut cancelled = false;
    for (unit, outcome) in units.iter().zip(outcomes) {
        match outcome {
            UnitOutcome::Done(records) => {
                completed += 1;
                rows.extend(records.iter().map(ResultRow::from));
            }
            UnitOutcome::Failed(error) => failures.push(FailedUnit {
                n: unit.n,
                t: unit.t,
                r: unit.r,
                dataset: unit.dataset,
                error,
            }),
            UnitOutcome::Cancelled => cancelled = true,
        }
    }

    let results_path = out_dir.join(RESULTS_FILE);
    let summary_path = out_dir.join(SUMMARY_FILE);
    write_results(BufWriter::new(File::create(&results_path)?), &rows)?;
    write_summary(BufWriter::new(File::create(&summary_path)?), &summarize(&rows))?;

    let status = if failures.is_empty() && !cancelled {
        SweepStatus::Complete
    } else {
        SweepStatus::Partial
    };
    let manifest = Manifest {
        status,
        master_seed: config.master_seed,
        units_planned: units.len(),
        units_completed: completed,
        records: rows.len(),
        skipped,
        failures,
        interrupted: cancelled,
    };
    fs::write(out_dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(SweepOutcome {
        manifest,
        results_path,
        summary_path,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_arithmetic() {
        let config = SweepConfig::default();
        let (baseline, crowdc) = expected_record_count(&config);
        assert_eq!(baseline, 4 * 5 * 2 * 20);
        // (n=50, g=5, p=12) has groups of 10 and is skipped for all 10 (t, r).
        assert_eq!(crowdc, (240 - 10) * 400);
        let skipped = skipped_cells(&config);
        assert_eq!(skipped.len(), 10);
        assert!(skipped.iter().all(|s| s.violation == "PivotCountTooLarge" && s.n == 50));
    }

    #[test]
    fn invalid_baseline_cells_are_skipped() {
        let config = SweepConfig {
            n: vec![20],
            t: vec![1],
            r: vec![0.5, 0.8],
            g: vec![2],
            p: vec![2],
            datasets_per_cell: 1,
            partitions_per_dataset: 1,
            ..SweepConfig::default()
        };
        let skipped = skipped_cells(&config);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].violation, "CorrectRateOutOfRange");
        assert_eq!(expected_record_count(&config), (1, 1));
    }
}
