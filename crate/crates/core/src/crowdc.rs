//! Divide-and-conquer ranking.
//!
//! Items are split into `g` equal groups and every pair inside a group is
//! compared. A Bradley-Terry fit per group yields within-group scores. From
//! each group, `p` pivots are taken at evenly spaced ranks of the
//! within-group order, always including the group's lowest and highest
//! item. All pivot pairs are then compared (pairs already seen inside a
//! group are reused) and fitted together to get out-of-group scores on a
//! common scale. Finally each non-pivot item is placed by linear
//! interpolation between the out-of-group scores of the two consecutive
//! pivots of its group that bracket its within-group score.

use std::collections::HashSet;
use std::error::Error as StdError;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::btl::{self, BtlError, FitConfig};
use crate::types::{all_pairs, Comparison, ItemId, ItemPair, Partition, ScoreFlavor, ScoreVector};

/// Error type a [`ComparisonSource`] may surface.
pub type SourceError = Box<dyn StdError + Send + Sync>;

#[derive(Debug, Error)]
pub enum CrowdcError {
    #[error("group count must be at least 1")]
    InvalidGroupCount,
    #[error("{n} items cannot be split into {g} equal groups")]
    IndivisibleGroupSize { n: usize, g: usize },
    #[error("pivot count {p} is outside [2, {group_size}]")]
    PivotCountOutOfRange { p: usize, group_size: usize },
    #[error("item {0} appears more than once")]
    DuplicateItem(ItemId),
    #[error("within-group scores do not match the items of group {group}")]
    ScoreCoverageMismatch { group: usize },
    #[error("out-of-group scores do not match the pivot set")]
    PivotCoverageMismatch,
    #[error("partition has no pivots selected")]
    MissingPivots,
    #[error("no pivot bracket contains the within-group score of item {0}")]
    BracketNotFound(ItemId),
    #[error(transparent)]
    Btl(#[from] BtlError),
    #[error("comparison source failed: {0}")]
    Source(SourceError),
}

/// Supplies paired comparisons for requested item pairs.
///
/// Simulated workers and recorded comparison files both implement this, as
/// does any `FnMut(&[ItemPair]) -> Result<Vec<Comparison>, SourceError>`.
pub trait ComparisonSource {
    fn collect(&mut self, pairs: &[ItemPair]) -> Result<Vec<Comparison>, SourceError>;
}

impl<F> ComparisonSource for F
where
    F: FnMut(&[ItemPair]) -> Result<Vec<Comparison>, SourceError>,
{
    fn collect(&mut self, pairs: &[ItemPair]) -> Result<Vec<Comparison>, SourceError> {
        self(pairs)
    }
}

/// 1-based ranks, within a sorted group, at which pivots are taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotOrderSet(Vec<usize>);

impl PivotOrderSet {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `ord_i = min(⌊(size − 1)(i − 1) / (p − 1)⌋ + 1, size)` for `i = 1..=p`.
pub fn pivot_orders(group_size: usize, p: usize) -> Result<PivotOrderSet, CrowdcError> {
    if p < 2 || p > group_size {
        return Err(CrowdcError::PivotCountOutOfRange { p, group_size });
    }
    let orders = (1..=p)
        .map(|i| ((group_size - 1) * (i - 1) / (p - 1) + 1).min(group_size))
        .collect();
    Ok(PivotOrderSet(orders))
}

/// Uniformly random split of `items` into `g` equal groups, fixed by `seed`.
/// Each group is listed in ascending item order.
pub fn divide(items: &[ItemId], g: usize, seed: u64) -> Result<Partition, CrowdcError> {
    if g == 0 {
        return Err(CrowdcError::InvalidGroupCount);
    }
    let n = items.len();
    if !n.is_multiple_of(g) {
        return Err(CrowdcError::IndivisibleGroupSize { n, g });
    }
    let mut seen = HashSet::with_capacity(n);
    for &item in items {
        if !seen.insert(item) {
            return Err(CrowdcError::DuplicateItem(item));
        }
    }
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let groups = shuffled
        .chunks(n / g)
        .map(|chunk| {
            let mut group = chunk.to_vec();
            group.sort_unstable();
            group
        })
        .collect();
    Ok(Partition::new(groups))
}

fn covers_exactly(scores: &ScoreVector, items: &[ItemId]) -> bool {
    scores.len() == items.len() && items.iter().all(|&i| scores.contains(i))
}

/// Picks each group's pivots from its within-group order and returns the
/// updated partition together with `D.piv_all`.
///
/// Groups are sorted ascending by within-group score, ties by item index;
/// each group's pivot list is in that ascending order.
pub fn select_pivots(
    partition: &Partition,
    within_scores: &[ScoreVector],
    p: usize,
) -> Result<(Partition, Vec<ItemId>), CrowdcError> {
    if within_scores.len() != partition.group_count() {
        return Err(CrowdcError::ScoreCoverageMismatch {
            group: within_scores.len().min(partition.group_count()),
        });
    }
    let mut pivots = Vec::with_capacity(partition.group_count());
    for (index, (group, scores)) in partition.groups().iter().zip(within_scores).enumerate() {
        if !covers_exactly(scores, group) {
            return Err(CrowdcError::ScoreCoverageMismatch { group: index });
        }
        let orders = pivot_orders(group.len(), p)?;
        let sorted = scores.ascending_order();
        pivots.push(orders.as_slice().iter().map(|&k| sorted[k - 1]).collect::<Vec<_>>());
    }
    let partition = partition.clone().with_pivots(pivots);
    let all = partition.all_pivots();
    Ok((partition, all))
}

/// Maps `in_j` from the bracket `[in_l, in_r]` onto `[out_l, out_r]`.
/// A zero-width bracket maps to the midpoint of the out-of-group scores.
pub fn interpolate(in_l: f64, in_j: f64, in_r: f64, out_l: f64, out_r: f64) -> f64 {
    if in_r == in_l {
        return (out_l + out_r) / 2.0;
    }
    out_l + (in_j - in_l) / (in_r - in_l) * (out_r - out_l)
}

/// Final scores: pivots keep their out-of-group score, every other item is
/// interpolated inside the first bracket of consecutive pivots that holds it.
pub fn conquer(
    partition: &Partition,
    within_scores: &[ScoreVector],
    out_scores: &ScoreVector,
) -> Result<ScoreVector, CrowdcError> {
    if !partition.has_pivots() {
        return Err(CrowdcError::MissingPivots);
    }
    let all_pivots = partition.all_pivots();
    if !covers_exactly(out_scores, &all_pivots) {
        return Err(CrowdcError::PivotCoverageMismatch);
    }
    if within_scores.len() != partition.group_count() {
        return Err(CrowdcError::ScoreCoverageMismatch {
            group: within_scores.len().min(partition.group_count()),
        });
    }

    let mut finals = Vec::new();
    for (index, ((group, pivots), within)) in partition
        .groups()
        .iter()
        .zip(partition.pivots())
        .zip(within_scores)
        .enumerate()
    {
        if !covers_exactly(within, group) {
            return Err(CrowdcError::ScoreCoverageMismatch { group: index });
        }
        let anchors: Vec<(ItemId, f64, f64)> = pivots
            .iter()
            .map(|&pv| {
                let s_in = within.get(pv).ok_or(CrowdcError::ScoreCoverageMismatch { group: index })?;
                let s_out = out_scores.get(pv).ok_or(CrowdcError::PivotCoverageMismatch)?;
                Ok((pv, s_in, s_out))
            })
            .collect::<Result<_, CrowdcError>>()?;

        for &item in group {
            if let Some(&(_, _, s_out)) = anchors.iter().find(|(pv, _, _)| *pv == item) {
                finals.push((item, s_out));
                continue;
            }
            let s_in = within.get(item).ok_or(CrowdcError::ScoreCoverageMismatch { group: index })?;
            let value = anchors
                .windows(2)
                .find(|w| w[0].1 <= s_in && s_in <= w[1].1)
                .map(|w| interpolate(w[0].1, s_in, w[1].1, w[0].2, w[1].2))
                .ok_or(CrowdcError::BracketNotFound(item))?;
            finals.push((item, value));
        }
    }
    Ok(ScoreVector::from_pairs(ScoreFlavor::Final, finals))
}

/// Everything a divide-and-conquer run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdcResult {
    pub partition: Partition,
    pub within_scores: Vec<ScoreVector>,
    pub out_scores: ScoreVector,
    pub final_scores: ScoreVector,
    /// Distinct unordered pairs requested from the source over both phases.
    pub unique_pairs_compared: u64,
}

/// Runs divide, per-group fits, pivot selection, the pivot fit and conquer.
///
/// Pivot pairs that lie in one group were already compared in the group
/// phase; their comparisons are reused instead of requested again.
pub fn run_crowdc<S: ComparisonSource + ?Sized>(
    items: &[ItemId],
    source: &mut S,
    g: usize,
    p: usize,
    partition_seed: u64,
    fit_config: &FitConfig,
) -> Result<CrowdcResult, CrowdcError> {
    let partition = divide(items, g, partition_seed)?;
    let group_size = items.len() / g;
    pivot_orders(group_size, p)?;

    let mut requested: HashSet<ItemPair> = HashSet::new();
    let mut group_comparisons = Vec::with_capacity(g);
    let mut within_scores = Vec::with_capacity(g);
    for group in partition.groups() {
        let pairs = all_pairs(group);
        let comparisons = source.collect(&pairs).map_err(CrowdcError::Source)?;
        requested.extend(pairs);
        let scores = btl::fit_normalized(&comparisons, group, fit_config)?;
        within_scores.push(scores.with_flavor(ScoreFlavor::WithinGroup));
        group_comparisons.push(comparisons);
    }

    let (partition, all_pivots) = select_pivots(&partition, &within_scores, p)?;

    let fresh: Vec<ItemPair> = all_pairs(&all_pivots)
        .into_iter()
        .filter(|pair| !requested.contains(pair))
        .collect();
    let mut pivot_comparisons = source.collect(&fresh).map_err(CrowdcError::Source)?;
    requested.extend(fresh);
    for (pivots, comparisons) in partition.pivots().iter().zip(&group_comparisons) {
        let pivot_set: HashSet<ItemId> = pivots.iter().copied().collect();
        pivot_comparisons.extend(
            comparisons
                .iter()
                .filter(|c| pivot_set.contains(&c.a()) && pivot_set.contains(&c.b()))
                .cloned(),
        );
    }
    let out_scores = btl::fit_normalized(&pivot_comparisons, &all_pivots, fit_config)?
        .with_flavor(ScoreFlavor::OutOfGroup);

    let final_scores = conquer(&partition, &within_scores, &out_scores)?;
    Ok(CrowdcResult {
        partition,
        within_scores,
        out_scores,
        final_scores,
        unique_pairs_compared: requested.len() as u64,
    })
}

/// `g·C(n/g, 2) + C(g·p, 2) − g·C(p, 2)`: distinct pairs a run requests.
pub fn unique_pairs_closed_form(n: usize, g: usize, p: usize) -> u64 {
    let choose2 = |k: usize| (k as u64) * (k as u64).saturating_sub(1) / 2;
    g as u64 * choose2(n / g) + choose2(g * p) - g as u64 * choose2(p)
}
