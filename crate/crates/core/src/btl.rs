//! Bradley-Terry strength fitting by minorization-maximization.
//!
//! Under the model, item `i` beats item `j` with probability
//! `π_i / (π_i + π_j)`. Given win counts `w_ij`, the MM iteration
//!
//! ```text
//! π_i ← W_i / Σ_{j≠i} n_ij / (π_i + π_j)
//! ```
//!
//! with `W_i = Σ_j w_ij` and `n_ij = w_ij + w_ji` increases the likelihood
//! monotonically. Each iterate is rescaled onto the probability simplex,
//! which fixes the model's scale gauge.
//!
//! Plain MM converges linearly and crawls when strengths span many orders
//! of magnitude (near-noiseless data), so the iteration is accelerated with
//! SQUAREM extrapolation. The fixed point is unchanged.
//!
//! An optional pseudo-count `epsilon` is added to every ordered pair before
//! fitting. Any positive value makes the comparison graph strongly
//! connected, so the maximizer exists and is strictly positive.

use std::collections::HashMap;

use thiserror::Error;

use crate::types::{Comparison, ItemId, ScoreFlavor, ScoreVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BtlError {
    #[error("comparison references item {0}, which is not in the item list")]
    UnknownItem(ItemId),
    #[error("item {0} appears twice in the item list")]
    DuplicateItem(ItemId),
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("comparison graph is not strongly connected")]
    DisconnectedGraph,
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NotConverged {
        last: ScoreVector,
        iterations: usize,
        last_change: f64,
    },
    #[error("cannot normalize fewer than two scores")]
    TooFewScores,
    #[error("all scores are equal")]
    DegenerateScores,
}

/// Pairwise win counts over a local index space `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinMatrix {
    items: Vec<ItemId>,
    local: HashMap<ItemId, usize>,
    wins: Vec<u64>,
    total: u64,
}

impl WinMatrix {
    /// An all-zero matrix over `items`.
    pub fn empty(items: &[ItemId]) -> Result<Self, BtlError> {
        let mut local = HashMap::with_capacity(items.len());
        for (i, &item) in items.iter().enumerate() {
            if local.insert(item, i).is_some() {
                return Err(BtlError::DuplicateItem(item));
            }
        }
        let m = items.len();
        Ok(Self {
            items: items.to_vec(),
            local,
            wins: vec![0; m * m],
            total: 0,
        })
    }

    /// Builds a matrix directly from local counts, `rows[i][j]` = wins of `i` over `j`.
    /// Diagonal entries are ignored.
    pub fn from_counts(items: &[ItemId], rows: &[Vec<u64>]) -> Result<Self, BtlError> {
        let mut matrix = Self::empty(items)?;
        let m = items.len();
        if rows.len() != m || rows.iter().any(|row| row.len() != m) {
            return Err(BtlError::InvalidConfig("count matrix shape does not match item list"));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if i != j {
                    matrix.wins[i * m + j] = w;
                    matrix.total += w;
                }
            }
        }
        Ok(matrix)
    }

    pub fn size(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn local_index(&self, item: ItemId) -> Option<usize> {
        self.local.get(&item).copied()
    }

    /// Wins of local item `i` over local item `j`.
    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.size() + j]
    }

    /// Number of comparisons ingested.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn add(&mut self, comparison: &Comparison) -> Result<(), BtlError> {
        let winner = comparison.chosen();
        let loser = comparison.loser();
        let w = self.local_index(winner).ok_or(BtlError::UnknownItem(winner))?;
        let l = self.local_index(loser).ok_or(BtlError::UnknownItem(loser))?;
        let m = self.size();
        self.wins[w * m + l] += 1;
        self.total += 1;
        Ok(())
    }

    /// Whether every item can reach every other along "beat" edges.
    pub fn is_strongly_connected(&self) -> bool {
        let m = self.size();
        if m <= 1 {
            return true;
        }
        let reach_all = |forward: bool| {
            let mut seen = vec![false; m];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..m {
                    let edge = if forward { self.wins(i, j) } else { self.wins(j, i) };
                    if !seen[j] && i != j && edge > 0 {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach_all(true) && reach_all(false)
    }
}

/// Tallies `comparisons` into a win matrix over `items`.
pub fn build_win_matrix(comparisons: &[Comparison], items: &[ItemId]) -> Result<WinMatrix, BtlError> {
    let mut matrix = WinMatrix::empty(items)?;
    for c in comparisons {
        matrix.add(c)?;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Largest allowed change of any simplex score between iterations.
    pub convergence_tolerance: f64,
    /// Pseudo-wins added in both directions for every item pair.
    pub regularization_epsilon: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            convergence_tolerance: 1e-8,
            regularization_epsilon: 0.01,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), BtlError> {
        if self.max_iterations < 1 {
            return Err(BtlError::InvalidConfig("max_iterations must be at least 1"));
        }
        if !(self.convergence_tolerance > 0.0) {
            return Err(BtlError::InvalidConfig("convergence_tolerance must be positive"));
        }
        if !(self.regularization_epsilon >= 0.0) || !self.regularization_epsilon.is_finite() {
            return Err(BtlError::InvalidConfig("regularization_epsilon must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Maximum-likelihood Bradley-Terry strengths, on the simplex.
pub fn fit(matrix: &WinMatrix, config: &FitConfig) -> Result<ScoreVector, BtlError> {
    config.validate()?;
    let m = matrix.size();
    let items = matrix.items();
    if m == 0 {
        return Ok(ScoreVector::from_pairs(ScoreFlavor::RawBT, []));
    }
    if m == 1 {
        return Ok(ScoreVector::from_pairs(ScoreFlavor::RawBT, [(items[0], 1.0)]));
    }
    let eps = config.regularization_epsilon;
    if eps == 0.0 && !matrix.is_strongly_connected() {
        return Err(BtlError::DisconnectedGraph);
    }

    let problem = MmProblem::new(matrix, eps);
    let mut pi = vec![1.0 / m as f64; m];
    let mut evaluations = 0usize;
    let mut last_change = f64::INFINITY;
    let budget = config.max_iterations;
    let tol = config.convergence_tolerance;

    // SQUAREM cycles: two MM steps, a squared extrapolation in log space,
    // one stabilizing MM step, and a fallback to the plain second step
    // whenever the extrapolated point has lower likelihood.
    while evaluations < budget {
        let first = problem.step(&pi);
        evaluations += 1;
        last_change = max_abs_diff(&first, &pi);
        if last_change < tol {
            return Ok(to_scores(items, &first));
        }
        if evaluations == budget {
            pi = first;
            break;
        }
        let second = problem.step(&first);
        evaluations += 1;
        last_change = max_abs_diff(&second, &first);
        if last_change < tol {
            return Ok(to_scores(items, &second));
        }
        if evaluations == budget {
            pi = second;
            break;
        }

        let next = extrapolate(&pi, &first, &second)
            .map(|x| {
                evaluations += 1;
                problem.step(&x)
            })
            .filter(|x| problem.log_likelihood(x) >= problem.log_likelihood(&second));
        pi = next.unwrap_or(second);
    }
    Err(BtlError::NotConverged {
        last: to_scores(items, &pi),
        iterations: evaluations,
        last_change,
    })
}

/// The regularized counts the MM map works on.
struct MmProblem {
    m: usize,
    /// `n_ij`, symmetric, zero on the diagonal.
    games: Vec<f64>,
    /// `W_i`.
    total_wins: Vec<f64>,
}

impl MmProblem {
    fn new(matrix: &WinMatrix, eps: f64) -> Self {
        let m = matrix.size();
        let mut games = vec![0.0f64; m * m];
        let mut total_wins = vec![0.0f64; m];
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let w_ij = matrix.wins(i, j) as f64 + eps;
                let w_ji = matrix.wins(j, i) as f64 + eps;
                games[i * m + j] = w_ij + w_ji;
                total_wins[i] += w_ij;
            }
        }
        Self { m, games, total_wins }
    }

    /// One MM update of every coordinate from `pi`, rescaled to the simplex.
    fn step(&self, pi: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut next: Vec<f64> = (0..m)
            .map(|i| {
                let row = &self.games[i * m..(i + 1) * m];
                let denom: f64 = row
                    .iter()
                    .zip(pi)
                    .enumerate()
                    .filter(|&(j, (&n_ij, _))| j != i && n_ij > 0.0)
                    .map(|(_, (&n_ij, &pi_j))| n_ij / (pi[i] + pi_j))
                    .sum();
                self.total_wins[i] / denom
            })
            .collect();
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= sum);
        next
    }

    /// `Σ_i W_i ln π_i − Σ_{i<j} n_ij ln(π_i + π_j)`
    fn log_likelihood(&self, pi: &[f64]) -> f64 {
        let m = self.m;
        let mut ll = 0.0;
        for i in 0..m {
            ll += self.total_wins[i] * pi[i].ln();
            for j in i + 1..m {
                let n_ij = self.games[i * m + j];
                if n_ij > 0.0 {
                    ll -= n_ij * (pi[i] + pi[j]).ln();
                }
            }
        }
        ll
    }
}

/// Squared extrapolation `x0 − 2αr + α²v` in log coordinates, with
/// `r = x1 − x0`, `v = x2 − 2x1 + x0` and steplength `α = −|r|/|v| ≤ −1`.
fn extrapolate(p0: &[f64], p1: &[f64], p2: &[f64]) -> Option<Vec<f64>> {
    let l0: Vec<f64> = p0.iter().map(|v| v.ln()).collect();
    let l1: Vec<f64> = p1.iter().map(|v| v.ln()).collect();
    let l2: Vec<f64> = p2.iter().map(|v| v.ln()).collect();
    let r: Vec<f64> = l1.iter().zip(&l0).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = (0..l0.len()).map(|i| l2[i] - 2.0 * l1[i] + l0[i]).collect();
    let r_norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(v_norm > 0.0) || !r_norm.is_finite() {
        return None;
    }
    let alpha = (-r_norm / v_norm).min(-1.0);
    let logs: Vec<f64> = (0..l0.len())
        .map(|i| l0[i] - 2.0 * alpha * r[i] + alpha * alpha * v[i])
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut x: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|e| *e /= sum);
    x.iter().all(|e| e.is_finite() && *e > 0.0).then_some(x)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn to_scores(items: &[ItemId], pi: &[f64]) -> ScoreVector {
    ScoreVector::from_pairs(ScoreFlavor::RawBT, items.iter().copied().zip(pi.iter().copied()))
}

/// Min-max maps scores onto `[0, 1]`.
pub fn normalize(scores: &ScoreVector) -> Result<ScoreVector, BtlError> {
    if scores.len() < 2 {
        return Err(BtlError::TooFewScores);
    }
    let (min, max) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(v), hi.max(v)));
    if max == min {
        return Err(BtlError::DegenerateScores);
    }
    let span = max - min;
    Ok(ScoreVector::from_pairs(
        ScoreFlavor::Normalized,
        scores.iter().map(|(item, v)| (item, (v - min) / span)),
    ))
}

/// [`normalize`], except that all-equal (or single) scores map to 0.5.
pub fn normalize_or_uniform(scores: &ScoreVector) -> ScoreVector {
    match normalize(scores) {
        Ok(s) => s,
        Err(_) => ScoreVector::from_pairs(ScoreFlavor::Normalized, scores.items().map(|i| (i, 0.5))),
    }
}

/// Builds the win matrix, fits and normalizes in one step.
pub fn fit_normalized(
    comparisons: &[Comparison],
    items: &[ItemId],
    config: &FitConfig,
) -> Result<ScoreVector, BtlError> {
    let matrix = build_win_matrix(comparisons, items)?;
    let raw = fit(&matrix, config)?;
    Ok(normalize_or_uniform(&raw))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn ids(xs: &[u32]) -> Vec<ItemId> {
        xs.iter().copied().map(ItemId).collect()
    }

    fn cmp(a: u32, b: u32, chosen: u32) -> Comparison {
        Comparison::new("s", ItemId(a), ItemId(b), ItemId(chosen)).unwrap()
    }

    fn exact() -> FitConfig {
        FitConfig {
            regularization_epsilon: 0.0,
            ..FitConfig::default()
        }
    }

    #[test]
    fn win_matrix_counts() {
        let m = build_win_matrix(&[cmp(1, 2, 1), cmp(2, 1, 1), cmp(1, 2, 2)], &ids(&[1, 2])).unwrap();
        assert_eq!((m.wins(0, 1), m.wins(1, 0)), (2, 1));
        assert_eq!((m.wins(0, 0), m.wins(1, 1)), (0, 0));
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn win_matrix_empty_and_unknown() {
        let m = build_win_matrix(&[], &ids(&[1, 2, 3])).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| m.wins(i, j) == 0)));
        assert_eq!(
            build_win_matrix(&[cmp(1, 4, 4)], &ids(&[1, 2, 3])),
            Err(BtlError::UnknownItem(ItemId(4)))
        );
        assert_eq!(
            WinMatrix::empty(&ids(&[1, 1])),
            Err(BtlError::DuplicateItem(ItemId(1)))
        );
    }

    #[test]
    fn symmetric_pair_is_even() {
        let m = WinMatrix::from_counts(&ids(&[1, 2]), &[vec![0, 1], vec![1, 0]]).unwrap();
        let s = fit(&m, &exact()).unwrap();
        assert_abs_diff_eq!(s.get(ItemId(1)).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(ItemId(2)).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn three_to_one_gives_three_quarters() {
        let m = WinMatrix::from_counts(&ids(&[1, 2]), &[vec![0, 3], vec![1, 0]]).unwrap();
        let s = fit(&m, &exact()).unwrap();
        assert_abs_diff_eq!(s.get(ItemId(1)).unwrap(), 0.75, epsilon = 1e-7);
        assert_abs_diff_eq!(s.get(ItemId(2)).unwrap(), 0.25, epsilon = 1e-7);
    }

    #[test]
    fn disconnected_without_regularization() {
        let m = WinMatrix::from_counts(&ids(&[1, 2]), &[vec![0, 3], vec![0, 0]]).unwrap();
        assert_eq!(fit(&m, &exact()), Err(BtlError::DisconnectedGraph));
        let s = fit(&m, &FitConfig::default()).unwrap();
        assert!(s.get(ItemId(1)).unwrap() > s.get(ItemId(2)).unwrap());
        assert!(s.get(ItemId(2)).unwrap() > 0.0);
    }

    #[test]
    fn not_converged_carries_iterate() {
        let m = WinMatrix::from_counts(&ids(&[1, 2, 3]), &[vec![0, 5, 1], vec![1, 0, 4], vec![2, 1, 0]]).unwrap();
        let config = FitConfig {
            max_iterations: 1,
            ..FitConfig::default()
        };
        match fit(&m, &config) {
            Err(BtlError::NotConverged { last, iterations, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(last.len(), 3);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let m = WinMatrix::empty(&ids(&[1, 2])).unwrap();
        for config in [
            FitConfig { max_iterations: 0, ..FitConfig::default() },
            FitConfig { convergence_tolerance: 0.0, ..FitConfig::default() },
            FitConfig { regularization_epsilon: -1.0, ..FitConfig::default() },
        ] {
            assert!(matches!(fit(&m, &config), Err(BtlError::InvalidConfig(_))));
        }
    }

    #[test]
    fn normalize_examples() {
        let raw = ScoreVector::from_pairs(ScoreFlavor::RawBT, [(ItemId(1), 0.25), (ItemId(2), 0.75)]);
        let n = normalize(&raw).unwrap();
        assert_eq!(n.get(ItemId(1)), Some(0.0));
        assert_eq!(n.get(ItemId(2)), Some(1.0));

        let raw = ScoreVector::from_pairs(
            ScoreFlavor::RawBT,
            [(ItemId(1), 0.2), (ItemId(2), 0.3), (ItemId(3), 0.5)],
        );
        let n = normalize(&raw).unwrap();
        assert_eq!(n.get(ItemId(1)), Some(0.0));
        assert_abs_diff_eq!(n.get(ItemId(2)).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(n.get(ItemId(3)), Some(1.0));
        assert_eq!(n.flavor(), ScoreFlavor::Normalized);
    }

    #[test]
    fn normalize_degenerate() {
        let flat = ScoreVector::from_pairs(ScoreFlavor::RawBT, [(ItemId(1), 0.5), (ItemId(2), 0.5)]);
        assert_eq!(normalize(&flat), Err(BtlError::DegenerateScores));
        let single = ScoreVector::from_pairs(ScoreFlavor::RawBT, [(ItemId(1), 1.0)]);
        assert_eq!(normalize(&single), Err(BtlError::TooFewScores));
        let u = normalize_or_uniform(&flat);
        assert!(u.iter().all(|(_, v)| v == 0.5));
    }
}
