//! Ranking an externally supplied comparison file.

use std::collections::{BTreeSet, HashMap};

use crowdc_core::btl::{self, BtlError};
use crowdc_core::crowdc::{run_crowdc, ComparisonSource, CrowdcError, SourceError};
use crowdc_core::{Comparison, FitConfig, ItemId, ItemPair, ScoreVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("no comparisons to rank")]
    NoComparisons,
    #[error(transparent)]
    Btl(#[from] BtlError),
    #[error(transparent)]
    Crowdc(#[from] CrowdcError),
}

/// Serves recorded comparisons for whichever pairs are requested. Pairs
/// that were never recorded yield nothing.
pub struct RecordedComparisons {
    by_pair: HashMap<ItemPair, Vec<Comparison>>,
}

impl RecordedComparisons {
    pub fn new(comparisons: &[Comparison]) -> Self {
        let mut by_pair: HashMap<ItemPair, Vec<Comparison>> = HashMap::new();
        for c in comparisons {
            by_pair.entry(c.pair()).or_default().push(c.clone());
        }
        Self { by_pair }
    }
}

impl ComparisonSource for RecordedComparisons {
    fn collect(&mut self, pairs: &[ItemPair]) -> Result<Vec<Comparison>, SourceError> {
        Ok(pairs
            .iter()
            .filter_map(|p| self.by_pair.get(p))
            .flatten()
            .cloned()
            .collect())
    }
}

/// Distinct items named in `comparisons`, ascending.
pub fn items_of(comparisons: &[Comparison]) -> Vec<ItemId> {
    let set: BTreeSet<ItemId> = comparisons.iter().flat_map(|c| [c.a(), c.b()]).collect();
    set.into_iter().collect()
}

pub fn rank_btl(comparisons: &[Comparison], fit: &FitConfig) -> Result<ScoreVector, RankError> {
    if comparisons.is_empty() {
        return Err(RankError::NoComparisons);
    }
    Ok(btl::fit_normalized(comparisons, &items_of(comparisons), fit)?)
}

pub fn rank_crowdc(
    comparisons: &[Comparison],
    g: usize,
    p: usize,
    seed: u64,
    fit: &FitConfig,
) -> Result<ScoreVector, RankError> {
    if comparisons.is_empty() {
        return Err(RankError::NoComparisons);
    }
    let items = items_of(comparisons);
    let mut source = RecordedComparisons::new(comparisons);
    Ok(run_crowdc(&items, &mut source, g, p, seed, fit)?.final_scores)
}

/// `rank,item,score` lines, best item first.
pub fn format_ranking(scores: &ScoreVector) -> String {
    let mut out = String::from("rank,item,score\n");
    for (pos, item) in scores.ascending_order().into_iter().rev().enumerate() {
        out.push_str(&format!("{},{},{}\n", pos + 1, item, scores.get(item).expect("item from scores")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmp(a: u32, b: u32, chosen: u32) -> Comparison {
        Comparison::new("w", ItemId(a), ItemId(b), ItemId(chosen)).unwrap()
    }

    #[test]
    fn recorded_source_serves_only_requested_pairs() {
        let mut src = RecordedComparisons::new(&[cmp(1, 2, 2), cmp(2, 1, 1), cmp(3, 4, 4)]);
        let pair = ItemPair::new(ItemId(2), ItemId(1)).unwrap();
        assert_eq!(src.collect(&[pair]).unwrap().len(), 2);
        let missing = ItemPair::new(ItemId(1), ItemId(4)).unwrap();
        assert!(src.collect(&[missing]).unwrap().is_empty());
    }

    #[test]
    fn btl_ranking_output() {
        let cs = [cmp(1, 2, 2), cmp(1, 2, 2), cmp(2, 3, 3), cmp(1, 3, 3), cmp(1, 2, 1)];
        let s = rank_btl(&cs, &FitConfig::default()).unwrap();
        let text = format_ranking(&s);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "rank,item,score");
        assert!(lines[1].starts_with("1,3,1"));
        assert!(lines[3].starts_with("3,1,0"));
        assert!(matches!(rank_btl(&[], &FitConfig::default()), Err(RankError::NoComparisons)));
    }

    #[test]
    fn crowdc_rejects_indivisible_items() {
        let cs = [cmp(1, 2, 2), cmp(2, 3, 3), cmp(3, 4, 4), cmp(4, 5, 5)];
        assert!(matches!(
            rank_crowdc(&cs, 2, 2, 0, &FitConfig::default()),
            Err(RankError::Crowdc(CrowdcError::IndivisibleGroupSize { n: 5, g: 2 }))
        ));
    }
}
