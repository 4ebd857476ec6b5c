//! Recognition: how far an observed action is from a generalized one.
//!
//! The discrepancy between an observed trajectory O and a generalized action
//! X is the weighted sum over features of the dynamic-time-warping alignment
//! cost between the feature's observed row and its goal row. Per-goal
//! strategies use a cheaper single-point discrepancy instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeatureTrajectory, ObservedTrajectory};

/// Pairwise ground costs |o_a - x_b| between one observed feature row and
/// one goal feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize, // n'
    cols: usize, // n
    cells: Vec<f64>,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, a: usize, b: usize) -> f64 {
        self.cells[a * self.cols + b]
    }
}

/// Per-feature scale factors applied inside discrepancy sums. Normalizing by
/// feature range keeps percent, meter and newton features commensurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights(Vec<f64>);

impl FeatureWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("no feature weights".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "feature weights must be positive and finite, got {weights:?}"
            )));
        }
        Ok(FeatureWeights(weights))
    }

    /// Unit weights: the raw mode, where feature units mix unscaled.
    pub fn uniform(m: usize) -> Result<Self> {
        FeatureWeights::new(vec![1.0; m])
    }

    /// Range normalization: w_i = 1 / range(feature i across the action),
    /// floored so constant features do not blow up.
    pub fn from_action(action: &FeatureTrajectory) -> Result<Self> {
        const MIN_RANGE: f64 = 1e-9;
        FeatureWeights::new(
            action
                .feature_ranges()
                .into_iter()
                .map(|r| 1.0 / r.max(MIN_RANGE))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Builds the cost matrix between an observed row and a goal row with the
/// absolute-difference ground cost.
pub fn cost_matrix(observed: &[f64], goals: &[f64]) -> Result<CostMatrix> {
    if observed.is_empty() || goals.is_empty() {
        return Err(Error::InvalidArgument(
            "cost matrix needs nonempty sequences".into(),
        ));
    }
    let rows = observed.len();
    let cols = goals.len();
    let mut cells = Vec::with_capacity(rows * cols);
    for &o in observed {
        for &x in goals {
            cells.push((o - x).abs());
        }
    }
    Ok(CostMatrix { rows, cols, cells })
}

/// Minimal cumulative cost over monotone warping paths from (0,0) to
/// (n'-1, n-1) with steps right, down and diagonal.
pub fn dtw_cost(matrix: &CostMatrix) -> f64 {
    let (rows, cols) = (matrix.rows, matrix.cols);
    // One-row rolling dynamic program.
    let mut prev = vec![0.0f64; cols];
    let mut curr = vec![0.0f64; cols];
    for b in 0..cols {
        prev[b] = matrix.cell(0, b) + if b > 0 { prev[b - 1] } else { 0.0 };
    }
    for a in 1..rows {
        curr[0] = matrix.cell(a, 0) + prev[0];
        for b in 1..cols {
            let best = prev[b].min(curr[b - 1]).min(prev[b - 1]);
            curr[b] = matrix.cell(a, b) + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[cols - 1]
}

/// Recognition discrepancy: sum over features of the weighted DTW cost
/// between the observed row and the goal row.
pub fn discrepancy(
    observed: &ObservedTrajectory,
    action: &FeatureTrajectory,
    weights: &FeatureWeights,
) -> Result<f64> {
    let m = action.m();
    if observed.m() != m {
        return Err(Error::DimensionMismatch {
            context: "discrepancy features",
            expected: m,
            actual: observed.m(),
        });
    }
    if weights.len() != m {
        return Err(Error::DimensionMismatch {
            context: "discrepancy weights",
            expected: m,
            actual: weights.len(),
        });
    }
    let mut total = 0.0;
    for i in 0..m {
        let c = cost_matrix(observed.feature_row(i), action.feature_row(i))?;
        total += weights.as_slice()[i] * dtw_cost(&c);
    }
    Ok(total)
}

/// Distance from a single feature point to one intermediate goal: the
/// weighted Euclidean norm of (p - x_j). Used as fitness by the per-goal
/// strategies, where the observation is a single feature vector.
pub fn goal_discrepancy(point: &[f64], goal: &[f64], weights: &FeatureWeights) -> Result<f64> {
    if point.len() != goal.len() {
        return Err(Error::DimensionMismatch {
            context: "goal discrepancy vectors",
            expected: goal.len(),
            actual: point.len(),
        });
    }
    if weights.len() != goal.len() {
        return Err(Error::DimensionMismatch {
            context: "goal discrepancy weights",
            expected: goal.len(),
            actual: weights.len(),
        });
    }
    let sum: f64 = point
        .iter()
        .zip(goal)
        .zip(weights.as_slice())
        .map(|((p, x), w)| {
            let d = w * (p - x);
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}
