//! Feasibility constraints on a simulation parameter cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Item count, comparisons per pair, correct rate, group count and pivot count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub n: usize,
    pub t: u32,
    pub r: f64,
    pub g: usize,
    pub p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
pub enum ParameterError {
    #[error("item count {n} is below 3")]
    TooFewItems { n: usize },
    #[error("comparisons per pair must be at least 1")]
    NoComparisons,
    #[error("correct rate {r} is outside (0.5, 1]")]
    CorrectRateOutOfRange { r: f64 },
    #[error("group count {g} must exceed 1")]
    GroupCountTooSmall { g: usize },
    #[error("group count {g} must be below n/3 = {n}/3")]
    GroupCountTooLarge { g: usize, n: usize },
    #[error("item count {n} is not divisible by group count {g}")]
    IndivisibleGroupSize { n: usize, g: usize },
    #[error("pivot count {p} is below 2")]
    PivotCountTooSmall { p: usize },
    #[error("pivot count {p} exceeds group size {group_size}")]
    PivotCountTooLarge { p: usize, group_size: usize },
}

impl ParameterError {
    /// Stable short name used in sweep logs and manifests.
    pub fn name(&self) -> &'static str {
        match self {
            ParameterError::TooFewItems { .. } => "TooFewItems",
            ParameterError::NoComparisons => "NoComparisons",
            ParameterError::CorrectRateOutOfRange { .. } => "CorrectRateOutOfRange",
            ParameterError::GroupCountTooSmall { .. } => "GroupCountTooSmall",
            ParameterError::GroupCountTooLarge { .. } => "GroupCountTooLarge",
            ParameterError::IndivisibleGroupSize { .. } => "IndivisibleGroupSize",
            ParameterError::PivotCountTooSmall { .. } => "PivotCountTooSmall",
            ParameterError::PivotCountTooLarge { .. } => "PivotCountTooLarge",
        }
    }
}

/// Checks the worker-model part of a cell, shared by both methods.
pub fn validate_worker_parameters(t: u32, r: f64) -> Result<(), ParameterError> {
    if t < 1 {
        return Err(ParameterError::NoComparisons);
    }
    if !(r > 0.5 && r <= 1.0) {
        return Err(ParameterError::CorrectRateOutOfRange { r });
    }
    Ok(())
}

/// Accepts a cell iff every constraint holds; reports the first violation
/// in the order items, worker model, groups, pivots.
pub fn validate_parameters(params: Parameters) -> Result<Parameters, ParameterError> {
    let Parameters { n, t, r, g, p } = params;
    if n < 3 {
        return Err(ParameterError::TooFewItems { n });
    }
    validate_worker_parameters(t, r)?;
    if g <= 1 {
        return Err(ParameterError::GroupCountTooSmall { g });
    }
    // g < n/3, compared without rounding.
    if 3 * g >= n {
        return Err(ParameterError::GroupCountTooLarge { g, n });
    }
    if n % g != 0 {
        return Err(ParameterError::IndivisibleGroupSize { n, g });
    }
    if p < 2 {
        return Err(ParameterError::PivotCountTooSmall { p });
    }
    let group_size = n / g;
    if p > group_size {
        return Err(ParameterError::PivotCountTooLarge { p, group_size });
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(n: usize, t: u32, r: f64, g: usize, p: usize) -> Parameters {
        Parameters { n, t, r, g, p }
    }

    #[test]
    fn accepts_headline_cell() {
        assert!(validate_parameters(cell(100, 5, 0.8, 2, 12)).is_ok());
    }

    #[test]
    fn named_violations() {
        assert_eq!(
            validate_parameters(cell(50, 1, 0.6, 1, 4)),
            Err(ParameterError::GroupCountTooSmall { g: 1 })
        );
        assert_eq!(
            validate_parameters(cell(50, 1, 0.6, 20, 2)),
            Err(ParameterError::GroupCountTooLarge { g: 20, n: 50 })
        );
        assert_eq!(
            validate_parameters(cell(2, 1, 0.6, 2, 2)),
            Err(ParameterError::TooFewItems { n: 2 })
        );
        assert_eq!(
            validate_parameters(cell(100, 0, 0.6, 2, 2)),
            Err(ParameterError::NoComparisons)
        );
        assert_eq!(
            validate_parameters(cell(100, 1, 0.5, 2, 2)).unwrap_err().name(),
            "CorrectRateOutOfRange"
        );
        assert!(validate_parameters(cell(100, 1, f64::NAN, 2, 2)).is_err());
        assert_eq!(
            validate_parameters(cell(100, 1, 0.8, 3, 4)),
            Err(ParameterError::IndivisibleGroupSize { n: 100, g: 3 })
        );
        assert_eq!(
            validate_parameters(cell(100, 1, 0.8, 2, 1)),
            Err(ParameterError::PivotCountTooSmall { p: 1 })
        );
        assert_eq!(
            validate_parameters(cell(50, 1, 0.8, 5, 12)),
            Err(ParameterError::PivotCountTooLarge { p: 12, group_size: 10 })
        );
    }

    #[test]
    fn boundaries() {
        assert!(validate_parameters(cell(100, 1, 1.0, 2, 50)).is_ok());
        // 3g == n is rejected: g must be strictly below n/3.
        assert!(validate_parameters(cell(12, 1, 1.0, 4, 2)).is_err());
        assert!(validate_parameters(cell(15, 1, 1.0, 4, 2)).is_err());
        assert!(validate_parameters(cell(16, 1, 1.0, 4, 2)).is_ok());
    }
}
