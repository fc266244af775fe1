//! Kendall's tau against the ground-truth order, and the accuracy ratio.

use std::collections::HashMap;

use thiserror::Error;

use crate::types::{ItemId, ScoreVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("scores and ground-truth order cover different items")]
    CoverageMismatch,
    #[error("baseline tau is not positive; ratio undefined")]
    BaselineNonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingComparison {
    pub tau: f64,
    pub concordant: u64,
    pub discordant: u64,
    /// `C(n, 2)`, the tau-a denominator.
    pub n_pairs: u64,
}

/// Tau-a between the estimated scores and `ground_truth_order` (listed from
/// worst to best). Pairs with tied estimated scores count as neither
/// concordant nor discordant but stay in the denominator.
pub fn kendall_tau(estimated: &ScoreVector, ground_truth_order: &[ItemId]) -> Result<RankingComparison, MetricsError> {
    if estimated.len() != ground_truth_order.len() {
        return Err(MetricsError::CoverageMismatch);
    }
    let mut rank: HashMap<ItemId, usize> = HashMap::with_capacity(ground_truth_order.len());
    for (pos, &item) in ground_truth_order.iter().enumerate() {
        if rank.insert(item, pos).is_some() || !estimated.contains(item) {
            return Err(MetricsError::CoverageMismatch);
        }
    }

    // Walk items in true order so that the truth always says "j above i".
    let scores: Vec<f64> = ground_truth_order
        .iter()
        .map(|&item| estimated.get(item).expect("coverage checked"))
        .collect();
    let (mut concordant, mut discordant) = (0u64, 0u64);
    for (i, &si) in scores.iter().enumerate() {
        for &sj in &scores[i + 1..] {
            if sj > si {
                concordant += 1;
            } else if sj < si {
                discordant += 1;
            }
        }
    }
    let n = scores.len() as u64;
    let n_pairs = n * n.saturating_sub(1) / 2;
    let tau = if n_pairs == 0 {
        0.0
    } else {
        (concordant as f64 - discordant as f64) / n_pairs as f64
    };
    Ok(RankingComparison {
        tau,
        concordant,
        discordant,
        n_pairs,
    })
}

pub fn accuracy_ratio(method_tau: f64, baseline_tau: f64) -> Result<f64, MetricsError> {
    if !(baseline_tau > 0.0) {
        return Err(MetricsError::BaselineNonPositive);
    }
    Ok(method_tau / baseline_tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{dataset_items, ScoreFlavor};

    fn scores(values: &[f64]) -> ScoreVector {
        ScoreVector::from_pairs(
            ScoreFlavor::Final,
            values.iter().enumerate().map(|(i, &v)| (ItemId(i as u32 + 1), v)),
        )
    }

    #[test]
    fn identity_and_reversal() {
        let truth = dataset_items(5);
        assert_eq!(kendall_tau(&scores(&[0.1, 0.2, 0.3, 0.4, 0.5]), &truth).unwrap().tau, 1.0);
        assert_eq!(kendall_tau(&scores(&[0.5, 0.4, 0.3, 0.2, 0.1]), &truth).unwrap().tau, -1.0);
    }

    #[test]
    fn one_adjacent_swap() {
        let r = kendall_tau(&scores(&[0.0, 2.0, 1.0, 3.0]), &dataset_items(4)).unwrap();
        assert_eq!((r.concordant, r.discordant, r.n_pairs), (5, 1, 6));
        assert!((r.tau - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_count_as_neither() {
        let r = kendall_tau(&scores(&[0.0, 0.0, 1.0]), &dataset_items(3)).unwrap();
        assert_eq!((r.concordant, r.discordant), (2, 0));
        assert!((r.tau - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn coverage_mismatch() {
        let s = scores(&[0.0, 1.0]);
        assert_eq!(kendall_tau(&s, &dataset_items(3)), Err(MetricsError::CoverageMismatch));
        assert_eq!(
            kendall_tau(&s, &[ItemId(1), ItemId(1)]),
            Err(MetricsError::CoverageMismatch)
        );
        assert_eq!(
            kendall_tau(&s, &[ItemId(1), ItemId(3)]),
            Err(MetricsError::CoverageMismatch)
        );
    }

    #[test]
    fn ratio() {
        assert_eq!(accuracy_ratio(0.95, 1.0), Ok(0.95));
        assert_eq!(accuracy_ratio(0.9, 0.9), Ok(1.0));
        assert_eq!(accuracy_ratio(0.9, 0.0), Err(MetricsError::BaselineNonPositive));
        assert_eq!(accuracy_ratio(0.9, -0.1), Err(MetricsError::BaselineNonPositive));
    }
}
