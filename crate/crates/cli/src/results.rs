//! The per-run results table and its per-cell summary.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crowdc_core::simulate::cost_formulas;
use crowdc_core::{ExperimentRecord, Method, RunParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: {reason}")]
    Malformed { row: usize, reason: &'static str },
}

/// One line of `results.csv`. Baseline rows leave `g`, `p` and
/// `partition_seed` empty; CrowDC rows share `dataset_seed` with their
/// matched baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub n: usize,
    pub t: u32,
    pub r: f64,
    pub g: Option<usize>,
    pub p: Option<usize>,
    pub dataset_seed: u64,
    pub partition_seed: Option<u64>,
    pub unique_pairs: u64,
    pub total_comparisons: u64,
    pub tau: f64,
    pub accuracy_ratio: Option<f64>,
    pub reduction_ratio: f64,
}

impl From<&ExperimentRecord> for ResultRow {
    fn from(rec: &ExperimentRecord) -> Self {
        let RunParams {
            method,
            n,
            t,
            r,
            g,
            p,
            dataset_seed,
            partition_seed,
        } = rec.params;
        Self {
            method,
            n,
            t,
            r,
            g,
            p,
            dataset_seed,
            partition_seed,
            unique_pairs: rec.unique_pairs_compared,
            total_comparisons: rec.total_comparisons,
            tau: rec.kendall_tau,
            accuracy_ratio: rec.accuracy_ratio,
            reduction_ratio: rec.reduction_ratio,
        }
    }
}

impl ResultRow {
    fn check(&self, row: usize) -> Result<(), ResultsError> {
        let bad = |reason| Err(ResultsError::Malformed { row, reason });
        match self.method {
            Method::Crowdc if self.g.is_none() || self.p.is_none() || self.partition_seed.is_none() => {
                return bad("crowdc row without g, p or partition_seed");
            }
            Method::Btl if self.g.is_some() || self.p.is_some() => return bad("btl row with g or p"),
            _ => {}
        }
        if self.n < 2 || self.t == 0 {
            return bad("n or t out of range");
        }
        if !self.r.is_finite() || !self.tau.is_finite() || !self.reduction_ratio.is_finite() {
            return bad("non-finite value");
        }
        if !(-1.0..=1.0).contains(&self.tau) {
            return bad("tau outside [-1, 1]");
        }
        if self.accuracy_ratio.is_some_and(|a| !a.is_finite()) {
            return bad("non-finite accuracy ratio");
        }
        if self.unique_pairs.checked_mul(u64::from(self.t)) != Some(self.total_comparisons) {
            return bad("total_comparisons != unique_pairs * t");
        }
        Ok(())
    }
}

pub fn write_results<W: Write>(writer: W, rows: &[ResultRow]) -> Result<(), ResultsError> {
    let mut wtr = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        wtr.write_record([
            "method",
            "n",
            "t",
            "r",
            "g",
            "p",
            "dataset_seed",
            "partition_seed",
            "unique_pairs",
            "total_comparisons",
            "tau",
            "accuracy_ratio",
            "reduction_ratio",
        ])?;
    }
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>, ResultsError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for (i, row) in rdr.deserialize::<ResultRow>().enumerate() {
        let row = row?;
        row.check(i + 1)?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_results(data: &[u8]) -> Result<Vec<ResultRow>, ResultsError> {
    read_results(data)
}

/// Mean and sample standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate statistics for one `(method, n, t, r, g, p)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub n: usize,
    pub t: u32,
    pub r: f64,
    pub g: Option<usize>,
    pub p: Option<usize>,
    pub runs: usize,
    pub unique_pairs_mean: f64,
    pub total_comparisons_mean: f64,
    /// Closed-form total without reusing shared pivot pairs.
    pub naive_total_comparisons: u64,
    pub tau_mean: f64,
    pub tau_std: f64,
    pub accuracy_ratio_mean: Option<f64>,
    pub accuracy_ratio_std: Option<f64>,
    pub reduction_ratio_mean: f64,
    pub reduction_ratio_std: f64,
}

type CellKey = (Method, usize, u32, u64, Option<usize>, Option<usize>);

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<CellKey, Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        // Non-negative finite floats order like their bit patterns.
        let key = (row.method, row.n, row.t, row.r.to_bits(), row.g, row.p);
        cells.entry(key).or_default().push(row);
    }
    let mut out: Vec<SummaryRow> = cells
        .into_values()
        .map(|group| {
            let first = group[0];
            let collect = |f: &dyn Fn(&ResultRow) -> f64| group.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (tau_mean, tau_std) = mean_std(&collect(&|r| r.tau));
            let (reduction_ratio_mean, reduction_ratio_std) = mean_std(&collect(&|r| r.reduction_ratio));
            let ratios: Vec<f64> = group.iter().filter_map(|r| r.accuracy_ratio).collect();
            let (acc_mean, acc_std) = mean_std(&ratios);
            let naive_total_comparisons = match (first.g, first.p) {
                (Some(g), Some(p)) if g > 0 && first.n % g == 0 => cost_formulas(first.n, g, p, first.t).crowdc_total_naive,
                _ => cost_formulas(first.n, 1, 1, first.t).baseline_total,
            };
            SummaryRow {
                method: first.method,
                n: first.n,
                t: first.t,
                r: first.r,
                g: first.g,
                p: first.p,
                runs: group.len(),
                unique_pairs_mean: mean_std(&collect(&|r| r.unique_pairs as f64)).0,
                total_comparisons_mean: mean_std(&collect(&|r| r.total_comparisons as f64)).0,
                naive_total_comparisons,
                tau_mean,
                tau_std,
                accuracy_ratio_mean: (!ratios.is_empty()).then_some(acc_mean),
                accuracy_ratio_std: (!ratios.is_empty()).then_some(acc_std),
                reduction_ratio_mean,
                reduction_ratio_std,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.method, a.n, a.t)
            .cmp(&(b.method, b.n, b.t))
            .then(a.r.total_cmp(&b.r))
            .then((a.g, a.p).cmp(&(b.g, b.p)))
    });
    out
}

pub fn write_summary<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<(), ResultsError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: Method, tau: f64, acc: Option<f64>) -> ResultRow {
        let crowdc = method == Method::Crowdc;
        ResultRow {
            method,
            n: 100,
            t: 5,
            r: 0.8,
            g: crowdc.then_some(2),
            p: crowdc.then_some(12),
            dataset_seed: 3,
            partition_seed: crowdc.then_some(4),
            unique_pairs: if crowdc { 2594 } else { 4950 },
            total_comparisons: if crowdc { 12_970 } else { 24_750 },
            tau,
            accuracy_ratio: acc,
            reduction_ratio: if crowdc { 1.0 - 12_970.0 / 24_750.0 } else { 0.0 },
        }
    }

    #[test]
    fn csv_round_trip_keeps_empty_fields() {
        let rows = vec![row(Method::Btl, 0.9, Some(1.0)), row(Method::Crowdc, 0.8, None)];
        let mut buf = Vec::new();
        write_results(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("method,n,t,r,g,p,dataset_seed,partition_seed,unique_pairs"));
        assert!(text.lines().nth(1).unwrap().starts_with("btl,100,5,0.8,,,3,,4950"));
        assert_eq!(parse_results(&buf).unwrap(), rows);
    }

    #[test]
    fn empty_table_has_header() {
        let mut buf = Vec::new();
        write_results(&mut buf, &[]).unwrap();
        assert!(parse_results(&buf).unwrap().is_empty());
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let mut bad = row(Method::Crowdc, 0.8, None);
        bad.total_comparisons += 1;
        let mut buf = Vec::new();
        write_results(&mut buf, &[bad]).unwrap();
        assert!(matches!(parse_results(&buf), Err(ResultsError::Malformed { row: 1, .. })));
        assert!(parse_results(b"method,n\nfoo,1\n").is_err());
    }

    #[test]
    fn summary_statistics() {
        let rows = vec![
            row(Method::Crowdc, 0.8, Some(0.9)),
            row(Method::Crowdc, 0.6, Some(0.7)),
            row(Method::Btl, 0.9, Some(1.0)),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].method, Method::Btl);
        let c = &s[1];
        assert_eq!(c.runs, 2);
        assert!((c.tau_mean - 0.7).abs() < 1e-12);
        assert!((c.tau_std - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((c.accuracy_ratio_mean.unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(c.naive_total_comparisons, 13_630);
        assert_eq!(s[0].naive_total_comparisons, 24_750);
    }
}
