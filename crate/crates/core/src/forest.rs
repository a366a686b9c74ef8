//! Relative forest accessibilities `Q_alpha = (I + alpha L)^{-1}` and the
//! forest distance built from them.
//!
//! Entry `q_ij` is the share of the total weight of spanning rooted forests
//! in which `i` belongs to a tree rooted at `j` (for digraphs: a tree
//! diverging from `j`). For undirected input `Q` is symmetric and doubly
//! stochastic, strictly diagonally dominant within each row, and zero exactly
//! between different components.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::KirchhoffMatrix;
use crate::lu::{norm_one, LuDecomposition};

/// Condition numbers above this are treated as numerically singular.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Row/column sums, symmetry and oracle comparisons.
    pub stochastic: f64,
    /// Threshold below which an accessibility counts as a structural zero.
    pub structural_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { stochastic: 1e-9, structural_zero: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForestError {
    #[error("alpha must be a finite positive number, got {0}")]
    InvalidAlpha(f64),
    #[error("I + alpha L is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("accessibility matrix of an undirected graph is asymmetric by {asymmetry:e}")]
    Asymmetric { asymmetry: f64 },
    #[error("the forest distance is only defined for undirected graphs")]
    DirectedDistance,
    #[error("partition does not cover vertices 0..{n} exactly once")]
    PartitionMismatch { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessibilityResult {
    alpha: f64,
    q: DMatrix<f64>,
    det_w: f64,
    directed: bool,
    condition: f64,
}

impl AccessibilityResult {
    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    /// `det(I + alpha L)`: the total weight of spanning rooted forests.
    pub fn det_w(&self) -> f64 {
        self.det_w
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// 1-norm condition number of `I + alpha L`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub(crate) fn from_parts(alpha: f64, q: DMatrix<f64>, det_w: f64, directed: bool, condition: f64) -> Self {
        Self { alpha, q, det_w, directed, condition }
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.q.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_column_sum_error(&self) -> f64 {
        self.q.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.q - self.q.transpose()).amax()
    }

    pub fn min_entry(&self) -> f64 {
        self.q.min()
    }

    /// `min_i (q_ii - max_{j != i} q_ij)`; positive means every row is strictly
    /// diagonally dominant in the sense `q_ii > q_ij`.
    pub fn diagonal_dominance_margin(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let off = (0..n).filter(|&j| j != i).map(|j| self.q[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
                self.q[(i, i)] - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Row-stochastic always; additionally symmetric and column-stochastic
    /// for undirected input.
    pub fn is_stochastic(&self, tol: f64) -> bool {
        let rows = self.min_entry() >= -tol && self.max_row_sum_error() <= tol;
        if self.directed {
            rows
        } else {
            rows && self.max_column_sum_error() <= tol && self.max_asymmetry() <= tol
        }
    }
}

pub fn forest_accessibility(l: &KirchhoffMatrix, alpha: f64) -> Result<AccessibilityResult, ForestError> {
    forest_accessibility_with(l, alpha, &Tolerances::default())
}

/// Solves `(I + alpha L) Q = I` by LU with partial pivoting.
///
/// For undirected input, residual asymmetry below `tol.stochastic` is removed
/// by averaging with the transpose; anything larger is reported as an error.
pub fn forest_accessibility_with(
    l: &KirchhoffMatrix,
    alpha: f64,
    tol: &Tolerances,
) -> Result<AccessibilityResult, ForestError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ForestError::InvalidAlpha(alpha));
    }
    let n = l.n();
    let w = DMatrix::<f64>::identity(n, n) + l.matrix() * alpha;
    let lu = LuDecomposition::new(&w);
    let mut q = lu.inverse().ok_or(ForestError::Singular { condition: f64::INFINITY })?;
    let condition = norm_one(&w) * norm_one(&q);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(ForestError::Singular { condition });
    }
    if !l.is_directed() {
        let asymmetry = (&q - q.transpose()).amax();
        if asymmetry >= tol.stochastic {
            return Err(ForestError::Asymmetric { asymmetry });
        }
        q = (&q + q.transpose()) * 0.5;
    }
    Ok(AccessibilityResult { alpha, q, det_w: lu.determinant(), directed: l.is_directed(), condition })
}

/// Forest distance `d_ij = q_ii + q_jj - q_ij - q_ji`; a metric on the
/// vertices of an undirected multigraph.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// Largest violation of `d_ik <= d_ij + d_jk` over all triples (zero or
    /// negative when the triangle inequality holds).
    pub fn max_triangle_violation(&self) -> f64 {
        let n = self.n();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max(self.d[(i, k)] - self.d[(i, j)] - self.d[(j, k)]);
                }
            }
        }
        worst
    }

    /// Identity of indiscernibles is checked as `d_ij > tol` for `i != j`.
    pub fn satisfies_metric_axioms(&self, tol: f64) -> bool {
        let n = self.n();
        let zero_diag = (0..n).all(|i| self.d[(i, i)] == 0.0);
        let positive = (0..n).all(|i| (0..n).all(|j| i == j || self.d[(i, j)] > tol));
        let symmetric = (&self.d - self.d.transpose()).amax() <= tol;
        zero_diag && positive && symmetric && self.max_triangle_violation() <= tol
    }
}

pub fn forest_distance(acc: &AccessibilityResult) -> Result<DistanceMatrix, ForestError> {
    if acc.is_directed() {
        return Err(ForestError::DirectedDistance);
    }
    let q = acc.q();
    let n = acc.n();
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (q[(i, i)] + q[(j, j)]) - (q[(i, j)] + q[(j, i)]) });
    Ok(DistanceMatrix { d })
}

/// Checks that `Q` is block diagonal over `partition` with strictly positive
/// blocks: `q_ij > structural_zero` exactly when `i` and `j` share a block.
pub fn block_structure(
    acc: &AccessibilityResult,
    partition: &[Vec<usize>],
    structural_zero: f64,
) -> Result<bool, ForestError> {
    let n = acc.n();
    let mut block_of = vec![usize::MAX; n];
    for (b, block) in partition.iter().enumerate() {
        for &v in block {
            if v >= n || block_of[v] != usize::MAX {
                return Err(ForestError::PartitionMismatch { n });
            }
            block_of[v] = b;
        }
    }
    if block_of.contains(&usize::MAX) {
        return Err(ForestError::PartitionMismatch { n });
    }
    Ok((0..n).all(|i| (0..n).all(|j| (acc.get(i, j) > structural_zero) == (block_of[i] == block_of[j]))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedMultigraph;

    fn assert_matrix(m: &DMatrix<f64>, expected: &[&[f64]], tol: f64) {
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((m[(i, j)] - v).abs() <= tol, "entry ({i},{j}) = {} expected {v}", m[(i, j)]);
            }
        }
    }

    #[test]
    fn p3_accessibility() {
        let g = WeightedMultigraph::undirected(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let acc = forest_accessibility(&g.kirchhoff(), 1.0).unwrap();
        assert_matrix(
            acc.q(),
            &[
                &[5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0],
                &[2.0 / 8.0, 4.0 / 8.0, 2.0 / 8.0],
                &[1.0 / 8.0, 2.0 / 8.0, 5.0 / 8.0],
            ],
            1e-12,
        );
        assert!((acc.det_w() - 8.0).abs() < 1e-12);
        assert!(acc.is_stochastic(1e-12));
        assert!(acc.diagonal_dominance_margin() > 0.0);

        let d = forest_distance(&acc).unwrap();
        assert_matrix(d.matrix(), &[&[0.0, 0.625, 1.0], &[0.625, 0.0, 0.625], &[1.0, 0.625, 0.0]], 1e-12);
        assert!(d.satisfies_metric_axioms(1e-9));
    }

    #[test]
    fn edgeless_graph_is_identity() {
        let g = WeightedMultigraph::undirected(4, &[]).unwrap();
        for alpha in [0.1, 1.0, 7.0] {
            let acc = forest_accessibility(&g.kirchhoff(), alpha).unwrap();
            assert_eq!(acc.q(), &DMatrix::identity(4, 4));
            assert_eq!(acc.det_w(), 1.0);
        }
    }

    #[test]
    fn single_arc_is_row_but_not_column_stochastic() {
        let g = WeightedMultigraph::directed(2, &[(0, 1, 1.0)]).unwrap();
        let acc = forest_accessibility(&g.kirchhoff(), 1.0).unwrap();
        assert_matrix(acc.q(), &[&[1.0, 0.0], &[0.5, 0.5]], 1e-12);
        assert!((acc.det_w() - 2.0).abs() < 1e-12);
        assert!(acc.max_row_sum_error() < 1e-12);
        assert!(acc.max_column_sum_error() > 0.4);
        assert_eq!(forest_distance(&acc), Err(ForestError::DirectedDistance));
    }

    #[test]
    fn single_edge_distance() {
        let g = WeightedMultigraph::undirected(2, &[(0, 1, 1.0)]).unwrap();
        let d = forest_distance(&forest_accessibility(&g.kirchhoff(), 1.0).unwrap()).unwrap();
        assert!((d.get(0, 1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_pair_distance_is_diagonal_sum() {
        let g = WeightedMultigraph::undirected(4, &[(0, 1, 1.0), (2, 3, 2.0)]).unwrap();
        let acc = forest_accessibility(&g.kirchhoff(), 1.0).unwrap();
        let d = forest_distance(&acc).unwrap();
        assert_eq!(acc.get(0, 2), 0.0);
        assert!((d.get(0, 2) - (acc.get(0, 0) + acc.get(2, 2))).abs() < 1e-15);
    }

    #[test]
    fn block_structure_examples() {
        let g = WeightedMultigraph::undirected(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let acc = forest_accessibility(&g.kirchhoff(), 1.0).unwrap();
        assert_eq!(block_structure(&acc, &g.components(), 1e-12), Ok(true));
        assert_eq!(block_structure(&acc, &[vec![0, 2], vec![1, 3]], 1e-12), Ok(false));
        assert_eq!(block_structure(&acc, &[vec![0, 1, 2, 3]], 1e-12), Ok(false));
        assert_eq!(block_structure(&acc, &[vec![0, 1], vec![2]], 1e-12), Err(ForestError::PartitionMismatch { n: 4 }));

        let p3 = WeightedMultigraph::undirected(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let acc = forest_accessibility(&p3.kirchhoff(), 1.0).unwrap();
        assert!(acc.min_entry() > 0.0);
        assert_eq!(block_structure(&acc, &p3.components(), 1e-12), Ok(true));
    }

    #[test]
    fn rejects_bad_alpha() {
        let g = WeightedMultigraph::undirected(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(forest_accessibility(&g.kirchhoff(), 0.0), Err(ForestError::InvalidAlpha(0.0)));
        assert!(forest_accessibility(&g.kirchhoff(), f64::NAN).is_err());
    }

    #[test]
    fn corrupted_input_is_singular() {
        // Not a Kirchhoff matrix: I + L is exactly singular.
        let l = KirchhoffMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]), false);
        assert!(matches!(forest_accessibility(&l, 1.0), Err(ForestError::Singular { .. })));
    }

    #[test]
    fn alpha_matches_scaled_weights() {
        let g = WeightedMultigraph::undirected(4, &[(0, 1, 0.7), (1, 2, 1.3), (2, 3, 0.2), (0, 3, 1.9), (0, 1, 0.4)])
            .unwrap();
        let alpha = 2.75;
        let a = forest_accessibility(&g.kirchhoff(), alpha).unwrap();
        let b = forest_accessibility(&g.scaled(alpha).unwrap().kirchhoff(), 1.0).unwrap();
        assert!((a.q() - b.q()).amax() <= 1e-12);
    }
}
