//! Synthetic workers, the full-comparison baseline and cost accounting.
//!
//! A simulated worker shown the pair `(d_a, d_b)` with `b > a` picks `d_b`
//! with probability `r`. Verdicts for each pair come from their own ChaCha
//! stream keyed by the pair, so the outcome of a pair depends only on the
//! dataset seed and never on which other pairs were requested alongside it.
//! Both methods therefore see identical verdicts on the pairs they share.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::btl::{self, BtlError, FitConfig};
use crate::crowdc::{unique_pairs_closed_form, ComparisonSource, SourceError};
use crate::params::{validate_worker_parameters, ParameterError};
use crate::types::{all_pairs, dataset_items, Comparison, ItemPair, ScoreFlavor, ScoreVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulateError {
    #[error("invalid worker model: {0}")]
    InvalidModel(#[from] ParameterError),
    #[error("no pairs to compare")]
    EmptyPairs,
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error(transparent)]
    Btl(#[from] BtlError),
}

/// A flat-accuracy worker population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerModel {
    correct_rate: f64,
    comparisons_per_pair: u32,
    rng_seed: u64,
}

impl WorkerModel {
    pub fn new(correct_rate: f64, comparisons_per_pair: u32, rng_seed: u64) -> Result<Self, SimulateError> {
        validate_worker_parameters(comparisons_per_pair, correct_rate)?;
        Ok(Self {
            correct_rate,
            comparisons_per_pair,
            rng_seed,
        })
    }

    pub fn correct_rate(&self) -> f64 {
        self.correct_rate
    }

    pub fn comparisons_per_pair(&self) -> u32 {
        self.comparisons_per_pair
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    fn pair_stream(&self, pair: ItemPair) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream((u64::from(pair.lo().get()) << 32) | u64::from(pair.hi().get()));
        rng
    }

    fn verdicts(&self, pairs: &[ItemPair], first_subject: u64) -> Vec<Comparison> {
        let t = self.comparisons_per_pair as usize;
        let mut out = Vec::with_capacity(pairs.len() * t);
        let mut subject = first_subject;
        for &pair in pairs {
            let mut rng = self.pair_stream(pair);
            for _ in 0..t {
                let chosen = if rng.random_bool(self.correct_rate) {
                    pair.hi()
                } else {
                    pair.lo()
                };
                out.push(
                    Comparison::new(subject.to_string(), pair.lo(), pair.hi(), chosen)
                        .expect("pair items are distinct"),
                );
                subject += 1;
            }
        }
        out
    }
}

/// `|pairs| × t` simulated verdicts; subject ids count up from 0.
pub fn generate_comparisons(pairs: &[ItemPair], model: &WorkerModel) -> Result<Vec<Comparison>, SimulateError> {
    if pairs.is_empty() {
        return Err(SimulateError::EmptyPairs);
    }
    Ok(model.verdicts(pairs, 0))
}

/// A [`ComparisonSource`] backed by a [`WorkerModel`]. Subject ids keep
/// counting across calls.
#[derive(Debug, Clone)]
pub struct SimulatedWorkers {
    model: WorkerModel,
    next_subject: u64,
}

impl SimulatedWorkers {
    pub fn new(model: WorkerModel) -> Self {
        Self { model, next_subject: 0 }
    }

    pub fn issued(&self) -> u64 {
        self.next_subject
    }
}

impl ComparisonSource for SimulatedWorkers {
    fn collect(&mut self, pairs: &[ItemPair]) -> Result<Vec<Comparison>, SourceError> {
        let out = self.model.verdicts(pairs, self.next_subject);
        self.next_subject += out.len() as u64;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    /// Normalized scores over all items.
    pub scores: ScoreVector,
    pub unique_pairs_compared: u64,
}

/// Compares every pair of the `n` items and fits one model over everything.
pub fn run_btl_baseline(n: usize, model: &WorkerModel, fit_config: &FitConfig) -> Result<BaselineRun, SimulateError> {
    if n < 2 {
        return Err(SimulateError::TooFewItems(n));
    }
    let items = dataset_items(n);
    let pairs = all_pairs(&items);
    let comparisons = generate_comparisons(&pairs, model)?;
    let scores = btl::fit_normalized(&comparisons, &items, fit_config)?.with_flavor(ScoreFlavor::Final);
    Ok(BaselineRun {
        scores,
        unique_pairs_compared: pairs.len() as u64,
    })
}

/// Closed-form task counts for one parameter cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostBreakdown {
    /// `C(n, 2)·t`
    pub baseline_total: u64,
    /// `(g·C(n/g, 2) + C(g·p, 2))·t`
    pub crowdc_total_naive: u64,
    /// Naive total less the `g·C(p, 2)·t` pivot pairs already compared in groups.
    pub crowdc_total_shared: u64,
}

impl CostBreakdown {
    pub fn shared_reduction(&self) -> f64 {
        1.0 - self.crowdc_total_shared as f64 / self.baseline_total as f64
    }

    pub fn naive_reduction(&self) -> f64 {
        1.0 - self.crowdc_total_naive as f64 / self.baseline_total as f64
    }
}

pub fn cost_formulas(n: usize, g: usize, p: usize, t: u32) -> CostBreakdown {
    let choose2 = |k: usize| (k as u64) * (k as u64).saturating_sub(1) / 2;
    let t = u64::from(t);
    let shared_pairs = unique_pairs_closed_form(n, g, p);
    CostBreakdown {
        baseline_total: choose2(n) * t,
        crowdc_total_naive: (g as u64 * choose2(n / g) + choose2(g * p)) * t,
        crowdc_total_shared: shared_pairs * t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ItemId;

    fn pair(a: u32, b: u32) -> ItemPair {
        ItemPair::new(ItemId(a), ItemId(b)).unwrap()
    }

    #[test]
    fn noiseless_workers_always_pick_better() {
        let model = WorkerModel::new(1.0, 3, 9).unwrap();
        let out = generate_comparisons(&[pair(1, 2)], &model).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|c| c.chosen() == ItemId(2)));
        let subjects: Vec<_> = out.iter().map(|c| c.subject_id().to_owned()).collect();
        assert_eq!(subjects, ["0", "1", "2"]);
    }

    #[test]
    fn rejects_bad_models_and_empty_pairs() {
        assert!(WorkerModel::new(0.5, 1, 0).is_err());
        assert!(WorkerModel::new(1.1, 1, 0).is_err());
        assert!(WorkerModel::new(0.8, 0, 0).is_err());
        let model = WorkerModel::new(0.8, 1, 0).unwrap();
        assert_eq!(generate_comparisons(&[], &model), Err(SimulateError::EmptyPairs));
    }

    #[test]
    fn deterministic_and_request_independent() {
        let model = WorkerModel::new(0.6, 5, 1234).unwrap();
        let pairs = [pair(1, 2), pair(3, 7), pair(2, 9)];
        let a = generate_comparisons(&pairs, &model).unwrap();
        let b = generate_comparisons(&pairs, &model).unwrap();
        assert_eq!(a, b);
        // The (3,7) verdicts do not depend on what else was requested.
        let alone = generate_comparisons(&[pair(7, 3)], &model).unwrap();
        let chosen = |cs: &[Comparison]| cs.iter().map(|c| c.chosen()).collect::<Vec<_>>();
        assert_eq!(chosen(&alone), chosen(&a[5..10]));
    }

    #[test]
    fn source_counts_subjects_across_calls() {
        let mut workers = SimulatedWorkers::new(WorkerModel::new(0.8, 2, 0).unwrap());
        workers.collect(&[pair(1, 2)]).unwrap();
        let second = workers.collect(&[pair(1, 3)]).unwrap();
        assert_eq!(second[0].subject_id(), "2");
        assert!(workers.collect(&[]).unwrap().is_empty());
        assert_eq!(workers.issued(), 4);
    }

    #[test]
    fn baseline_costs() {
        let model = WorkerModel::new(0.8, 1, 3).unwrap();
        let run = run_btl_baseline(2, &model, &FitConfig::default()).unwrap();
        assert_eq!(run.unique_pairs_compared, 1);
        assert_eq!(
            run_btl_baseline(1, &model, &FitConfig::default()),
            Err(SimulateError::TooFewItems(1))
        );
    }

    #[test]
    fn cost_examples() {
        let c = cost_formulas(100, 2, 12, 5);
        assert_eq!((c.baseline_total, c.crowdc_total_naive, c.crowdc_total_shared), (24_750, 13_630, 12_970));
        assert!((c.shared_reduction() - 0.475_959_595_959_596).abs() < 1e-12);
        let c = cost_formulas(6, 2, 3, 1);
        assert_eq!((c.baseline_total, c.crowdc_total_naive, c.crowdc_total_shared), (15, 21, 15));
    }

    #[test]
    fn full_pivots_reach_baseline_cost() {
        for (n, g) in [(100, 2), (100, 5), (150, 5), (200, 2)] {
            let c = cost_formulas(n, g, n / g, 1);
            assert!(c.crowdc_total_naive >= c.baseline_total);
            assert_eq!(c.crowdc_total_shared, c.baseline_total);
        }
    }
}
