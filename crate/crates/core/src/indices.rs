//! Sociometric indices.
//!
//! Derivative indices come from the accessibility matrix: solitariness of a
//! member is `q_ii`, the group's dissociation is its mean, heterogeneity its
//! population variance, and provinciality compares `q_ii` with the mean.
//! Classical indices come straight from the choice digraph (normalized in- and
//! out-degrees and mutual choices).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::AccessibilityResult;
use crate::graph::WeightedMultigraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("classical indices are defined on choice digraphs; got an undirected graph")]
    Undirected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeIndices {
    pub alpha: f64,
    /// Set when computed from a digraph's (row-stochastic only) matrix.
    pub directed: bool,
    pub solitariness: Vec<f64>,
    pub dissociation: f64,
    pub heterogeneity: f64,
    pub provinciality_ratio: Vec<f64>,
    pub provinciality_diff: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMode {
    /// Parallel arcs collapse to a single choice.
    Presence,
    /// Degrees sum arc weights.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalIndices {
    pub status: Vec<f64>,
    pub effusiveness: Vec<f64>,
    pub reciprocity: Vec<f64>,
    pub density: f64,
    pub cohesion: f64,
    pub status_heterogeneity: f64,
    pub degree_mode: DegreeMode,
    /// Divisor applied to per-member counts (`n - 1`).
    pub normalization: f64,
    /// Reciprocity divided by the member's out-degree instead of `n - 1`.
    pub reciprocity_per_choice: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IndexReport {
    pub derivative: Option<DerivativeIndices>,
    pub classical: Option<ClassicalIndices>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn population_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    mean(&xs.iter().map(|x| (x - m) * (x - m)).collect::<Vec<_>>())
}

pub fn derivative_indices(acc: &AccessibilityResult) -> DerivativeIndices {
    let n = acc.n();
    let solitariness: Vec<f64> = (0..n).map(|i| acc.get(i, i)).collect();
    let dissociation = mean(&solitariness);
    DerivativeIndices {
        alpha: acc.alpha(),
        directed: acc.is_directed(),
        heterogeneity: population_variance(&solitariness),
        provinciality_ratio: solitariness.iter().map(|s| s / dissociation).collect(),
        provinciality_diff: solitariness.iter().map(|s| s - dissociation).collect(),
        solitariness,
        dissociation,
    }
}

pub fn classical_indices(g: &WeightedMultigraph, mode: DegreeMode) -> Result<ClassicalIndices, IndexError> {
    if !g.is_directed() {
        return Err(IndexError::Undirected);
    }
    let n = g.n();
    let mut weight = vec![vec![0.0f64; n]; n];
    for e in g.edges() {
        weight[e.u][e.v] += e.weight;
    }
    let chosen = |i: usize, j: usize| weight[i][j] > 0.0;
    let value = |i: usize, j: usize| match mode {
        DegreeMode::Presence => f64::from(u8::from(chosen(i, j))),
        DegreeMode::Weighted => weight[i][j],
    };
    // A lone member can make no choices; every count is then zero.
    let normalization = (n - 1).max(1) as f64;

    let status: Vec<f64> = (0..n).map(|i| (0..n).map(|j| value(j, i)).sum::<f64>() / normalization).collect();
    let effusiveness: Vec<f64> = (0..n).map(|i| (0..n).map(|j| value(i, j)).sum::<f64>() / normalization).collect();
    let mutual: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| chosen(i, j) && chosen(j, i)).count()).collect();
    let reciprocity: Vec<f64> = mutual.iter().map(|&m| m as f64 / normalization).collect();
    let reciprocity_per_choice = (0..n)
        .map(|i| {
            let out = (0..n).filter(|&j| chosen(i, j)).count();
            if out == 0 {
                0.0
            } else {
                mutual[i] as f64 / out as f64
            }
        })
        .collect();
    Ok(ClassicalIndices {
        density: mean(&status),
        cohesion: mean(&reciprocity),
        status_heterogeneity: population_variance(&status),
        status,
        effusiveness,
        reciprocity,
        degree_mode: mode,
        normalization,
        reciprocity_per_choice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::forest_accessibility;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn p3_derivative_indices() {
        let g = WeightedMultigraph::undirected(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let idx = derivative_indices(&forest_accessibility(&g.kirchhoff(), 1.0).unwrap());
        assert!(close(&idx.solitariness, &[0.625, 0.5, 0.625]));
        assert!((idx.dissociation - 7.0 / 12.0).abs() < 1e-12);
        assert!((idx.heterogeneity - 1.0 / 288.0).abs() < 1e-12);
        assert!(close(&idx.provinciality_diff, &[1.0 / 24.0, -1.0 / 12.0, 1.0 / 24.0]));
        assert!(close(&idx.provinciality_ratio, &[15.0 / 14.0, 6.0 / 7.0, 15.0 / 14.0]));
    }

    #[test]
    fn single_edge_and_edgeless() {
        let g = WeightedMultigraph::undirected(2, &[(0, 1, 1.0)]).unwrap();
        let idx = derivative_indices(&forest_accessibility(&g.kirchhoff(), 1.0).unwrap());
        assert!(close(&idx.solitariness, &[2.0 / 3.0, 2.0 / 3.0]));
        assert!(idx.heterogeneity.abs() < 1e-15);
        assert!(close(&idx.provinciality_ratio, &[1.0, 1.0]));

        let g = WeightedMultigraph::undirected(4, &[]).unwrap();
        let idx = derivative_indices(&forest_accessibility(&g.kirchhoff(), 1.0).unwrap());
        assert_eq!(idx.solitariness, vec![1.0; 4]);
        assert_eq!((idx.dissociation, idx.heterogeneity), (1.0, 0.0));
    }

    #[test]
    fn classical_example() {
        let g = WeightedMultigraph::directed(3, &[(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0)]).unwrap();
        let c = classical_indices(&g, DegreeMode::Presence).unwrap();
        assert!(close(&c.status, &[0.5, 0.5, 0.5]));
        assert!(close(&c.effusiveness, &[1.0, 0.5, 0.0]));
        assert!(close(&c.reciprocity, &[0.5, 0.5, 0.0]));
        assert!((c.density - 0.5).abs() < 1e-15);
        assert!((c.cohesion - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.status_heterogeneity, 0.0);
        assert!(close(&c.reciprocity_per_choice, &[0.5, 1.0, 0.0]));
    }

    #[test]
    fn complete_mutual_and_empty() {
        let mut arcs = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    arcs.push((i, j, 1.0));
                }
            }
        }
        let c = classical_indices(&WeightedMultigraph::directed(4, &arcs).unwrap(), DegreeMode::Presence).unwrap();
        assert_eq!(c.status, vec![1.0; 4]);
        assert_eq!(c.cohesion, 1.0);

        let c = classical_indices(&WeightedMultigraph::directed(4, &[]).unwrap(), DegreeMode::Presence).unwrap();
        assert_eq!(c.status, vec![0.0; 4]);
        assert_eq!(c.effusiveness, vec![0.0; 4]);
        assert_eq!((c.density, c.cohesion, c.status_heterogeneity), (0.0, 0.0, 0.0));
    }

    #[test]
    fn multiplicity_collapses_unless_weighted() {
        let g = WeightedMultigraph::directed(3, &[(0, 1, 1.0), (0, 1, 2.0)]).unwrap();
        let c = classical_indices(&g, DegreeMode::Presence).unwrap();
        assert!(close(&c.status, &[0.0, 0.5, 0.0]));
        let c = classical_indices(&g, DegreeMode::Weighted).unwrap();
        assert!(close(&c.status, &[0.0, 1.5, 0.0]));
    }

    #[test]
    fn undirected_rejected() {
        let g = WeightedMultigraph::undirected(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(classical_indices(&g, DegreeMode::Presence), Err(IndexError::Undirected));
    }
}
