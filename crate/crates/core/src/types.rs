//! Domain types shared across the crate.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 1-based item index. The index doubles as the item's true rank: a
/// higher index means a truly better item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The items `1..=n` of a dataset, listed from truly worst to truly best.
pub fn dataset_items(n: usize) -> Vec<ItemId> {
    (1..=n as u32).map(ItemId).collect()
}

/// An unordered pair of distinct items, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemPair {
    lo: ItemId,
    hi: ItemId,
}

impl ItemPair {
    /// Returns `None` when both sides are the same item.
    pub fn new(x: ItemId, y: ItemId) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Self { lo: x, hi: y }),
            std::cmp::Ordering::Greater => Some(Self { lo: y, hi: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(self) -> ItemId {
        self.lo
    }

    pub fn hi(self) -> ItemId {
        self.hi
    }
}

/// All unordered pairs over `items`, in lexicographic order of positions.
pub fn all_pairs(items: &[ItemId]) -> Vec<ItemPair> {
    let mut pairs = Vec::with_capacity(items.len() * items.len().saturating_sub(1) / 2);
    for (i, &x) in items.iter().enumerate() {
        for &y in &items[i + 1..] {
            if let Some(pair) = ItemPair::new(x, y) {
                pairs.push(pair);
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComparisonError {
    #[error("comparison of item {0} with itself")]
    SelfComparison(ItemId),
    #[error("chosen item {chosen} is neither {a} nor {b}")]
    ChosenNotCompared { a: ItemId, b: ItemId, chosen: ItemId },
}

/// One subject's verdict on a pair of items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    subject_id: String,
    a: ItemId,
    b: ItemId,
    chosen: ItemId,
}

impl Comparison {
    pub fn new(
        subject_id: impl Into<String>,
        a: ItemId,
        b: ItemId,
        chosen: ItemId,
    ) -> Result<Self, ComparisonError> {
        if a == b {
            return Err(ComparisonError::SelfComparison(a));
        }
        if chosen != a && chosen != b {
            return Err(ComparisonError::ChosenNotCompared { a, b, chosen });
        }
        Ok(Self {
            subject_id: subject_id.into(),
            a,
            b,
            chosen,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn a(&self) -> ItemId {
        self.a
    }

    pub fn b(&self) -> ItemId {
        self.b
    }

    pub fn chosen(&self) -> ItemId {
        self.chosen
    }

    /// The item that was not chosen.
    pub fn loser(&self) -> ItemId {
        if self.chosen == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn pair(&self) -> ItemPair {
        ItemPair::new(self.a, self.b).expect("a != b by construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreFlavor {
    /// Fitted Bradley-Terry strengths on the probability simplex.
    RawBT,
    Normalized,
    WithinGroup,
    OutOfGroup,
    Final,
}

impl ScoreFlavor {
    fn is_unit_interval(self) -> bool {
        !matches!(self, ScoreFlavor::RawBT)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreInvariantError {
    #[error("score for item {0} is not finite")]
    NonFinite(ItemId),
    #[error("raw score for item {0} is not positive")]
    NonPositive(ItemId),
    #[error("raw scores sum to {0}, not 1")]
    NotOnSimplex(f64),
    #[error("score for item {0} lies outside [0, 1]")]
    OutOfUnitInterval(ItemId),
    #[error("normalized scores span [{min}, {max}] instead of [0, 1]")]
    NotMinMaxNormalized { min: f64, max: f64 },
}

/// Real-valued strengths for a set of items, tagged with how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    flavor: ScoreFlavor,
    values: BTreeMap<ItemId, f64>,
}

impl ScoreVector {
    pub fn new(flavor: ScoreFlavor, values: BTreeMap<ItemId, f64>) -> Self {
        Self { flavor, values }
    }

    pub fn from_pairs(flavor: ScoreFlavor, pairs: impl IntoIterator<Item = (ItemId, f64)>) -> Self {
        Self::new(flavor, pairs.into_iter().collect())
    }

    pub fn flavor(&self) -> ScoreFlavor {
        self.flavor
    }

    pub fn with_flavor(mut self, flavor: ScoreFlavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn get(&self, item: ItemId) -> Option<f64> {
        self.values.get(&item).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.values.contains_key(&item)
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn values(&self) -> &BTreeMap<ItemId, f64> {
        &self.values
    }

    /// Items sorted ascending by score, ties broken by ascending item index.
    pub fn ascending_order(&self) -> Vec<ItemId> {
        let mut entries: Vec<(ItemId, f64)> = self.iter().collect();
        entries.sort_by(|(ia, sa), (ib, sb)| sa.total_cmp(sb).then(ia.cmp(ib)));
        entries.into_iter().map(|(item, _)| item).collect()
    }

    /// Checks the flavor's value invariants up to `tolerance`.
    pub fn check_invariants(&self, tolerance: f64) -> Result<(), ScoreInvariantError> {
        for (item, v) in self.iter() {
            if !v.is_finite() {
                return Err(ScoreInvariantError::NonFinite(item));
            }
        }
        if self.is_empty() {
            return Ok(());
        }
        if self.flavor.is_unit_interval() {
            for (item, v) in self.iter() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(ScoreInvariantError::OutOfUnitInterval(item));
                }
            }
            let min = self.values.values().copied().fold(f64::INFINITY, f64::min);
            let max = self.values.values().copied().fold(f64::NEG_INFINITY, f64::max);
            if min.abs() > tolerance || (max - 1.0).abs() > tolerance {
                return Err(ScoreInvariantError::NotMinMaxNormalized { min, max });
            }
        } else {
            for (item, v) in self.iter() {
                if v <= 0.0 {
                    return Err(ScoreInvariantError::NonPositive(item));
                }
            }
            let sum: f64 = self.values.values().sum();
            if (sum - 1.0).abs() > tolerance {
                return Err(ScoreInvariantError::NotOnSimplex(sum));
            }
        }
        Ok(())
    }
}

/// Items split into equally sized groups, plus each group's pivots once selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<ItemId>>,
    pivots: Vec<Vec<ItemId>>,
}

impl Partition {
    /// A partition with no pivots selected yet.
    pub fn new(groups: Vec<Vec<ItemId>>) -> Self {
        let pivots = vec![Vec::new(); groups.len()];
        Self { groups, pivots }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<ItemId>] {
        &self.groups
    }

    pub fn pivots(&self) -> &[Vec<ItemId>] {
        &self.pivots
    }

    pub fn has_pivots(&self) -> bool {
        self.pivots.iter().any(|p| !p.is_empty())
    }

    pub(crate) fn with_pivots(mut self, pivots: Vec<Vec<ItemId>>) -> Self {
        debug_assert_eq!(pivots.len(), self.groups.len());
        self.pivots = pivots;
        self
    }

    /// `D.piv_all`: every group's pivots, concatenated in group order.
    pub fn all_pivots(&self) -> Vec<ItemId> {
        self.pivots.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Btl,
    Crowdc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Btl => "btl",
            Method::Crowdc => "crowdc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters identifying one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub method: Method,
    pub n: usize,
    pub t: u32,
    pub r: f64,
    /// Group and pivot counts; `None` for the baseline.
    pub g: Option<usize>,
    pub p: Option<usize>,
    pub dataset_seed: u64,
    pub partition_seed: Option<u64>,
}

/// The outcome of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub params: RunParams,
    pub unique_pairs_compared: u64,
    pub total_comparisons: u64,
    pub kendall_tau: f64,
    /// `None` when the matched baseline tau is not positive.
    pub accuracy_ratio: Option<f64>,
    pub reduction_ratio: f64,
}

impl ExperimentRecord {
    /// Derives the total and the reduction against the matched baseline's total.
    pub fn new(
        params: RunParams,
        unique_pairs_compared: u64,
        kendall_tau: f64,
        accuracy_ratio: Option<f64>,
        baseline_total_comparisons: u64,
    ) -> Self {
        let total_comparisons = unique_pairs_compared * u64::from(params.t);
        let reduction_ratio = if baseline_total_comparisons == 0 {
            0.0
        } else {
            1.0 - total_comparisons as f64 / baseline_total_comparisons as f64
        };
        Self {
            params,
            unique_pairs_compared,
            total_comparisons,
            kendall_tau,
            accuracy_ratio,
            reduction_ratio,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_rejects_self_pairs_and_foreign_winners() {
        assert_eq!(
            Comparison::new("s", ItemId(1), ItemId(1), ItemId(1)),
            Err(ComparisonError::SelfComparison(ItemId(1)))
        );
        assert!(matches!(
            Comparison::new("s", ItemId(1), ItemId(2), ItemId(3)),
            Err(ComparisonError::ChosenNotCompared { .. })
        ));
        let c = Comparison::new("s", ItemId(2), ItemId(1), ItemId(1)).unwrap();
        assert_eq!(c.loser(), ItemId(2));
        assert_eq!(c.pair().lo(), ItemId(1));
    }

    #[test]
    fn all_pairs_counts() {
        assert_eq!(all_pairs(&dataset_items(6)).len(), 15);
        assert!(all_pairs(&dataset_items(1)).is_empty());
    }

    #[test]
    fn ascending_order_breaks_ties_by_index() {
        let s = ScoreVector::from_pairs(
            ScoreFlavor::WithinGroup,
            [(ItemId(4), 0.1), (ItemId(2), 0.1), (ItemId(1), 0.0)],
        );
        assert_eq!(s.ascending_order(), vec![ItemId(1), ItemId(2), ItemId(4)]);
    }

    #[test]
    fn invariant_checks() {
        let raw = ScoreVector::from_pairs(ScoreFlavor::RawBT, [(ItemId(1), 0.25), (ItemId(2), 0.75)]);
        assert!(raw.check_invariants(1e-12).is_ok());
        let bad = raw.clone().with_flavor(ScoreFlavor::Normalized);
        assert!(bad.check_invariants(1e-12).is_err());
    }

    #[test]
    fn record_arithmetic() {
        let params = RunParams {
            method: Method::Crowdc,
            n: 100,
            t: 5,
            r: 0.8,
            g: Some(2),
            p: Some(12),
            dataset_seed: 1,
            partition_seed: Some(2),
        };
        let rec = ExperimentRecord::new(params, 2594, 0.8, Some(0.9), 24_750);
        assert_eq!(rec.total_comparisons, 12_970);
        assert!((rec.reduction_ratio - (1.0 - 12_970.0 / 24_750.0)).abs() < 1e-15);
    }
}
