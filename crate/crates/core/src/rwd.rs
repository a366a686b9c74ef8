//! Series expansion `Q = I + M + M^2 + ...` with `M = -alpha L`, and a
//! brute-force enumerator of routes with drains.
//!
//! A route with drains (RWD) is a walk in which, besides ordinary steps along
//! an edge to its other endpoint, an edge incident to the current vertex may be
//! used as a *drain*: it is appended without moving. The entry `(M^t)_ij`
//! equals the total weight of length-`t` RWDs from `i` to `j` with an even
//! number of drains minus that with an odd number.
//!
//! For digraphs the same identity holds when a step from `a` to `b` uses an
//! arc `b -> a` and a drain at `a` uses an arc entering `a`; read backwards,
//! these are routes from `j` to `i` that follow the arcs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{KirchhoffMatrix, WeightedMultigraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RwdError {
    #[error("route enumeration limited to {max_vertices} vertices and length {max_length} (got {n}, {t})")]
    TooLarge { n: usize, t: usize, max_vertices: usize, max_length: usize },
    #[error("vertex {vertex} is out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
}

pub const RWD_MAX_VERTICES: usize = 5;
pub const RWD_MAX_LENGTH: usize = 6;

/// Sufficient condition for the series to converge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBound {
    /// `1 / (2 a* (n - 1))`; `None` (unbounded) for a single vertex.
    pub bound: Option<f64>,
    /// Largest number of parallel records between one pair.
    pub max_multiplicity: usize,
    /// Largest single record weight.
    pub max_edge_weight: f64,
    /// Largest aggregated pair conductance.
    pub max_pair_weight: f64,
    /// Every record weight lies strictly below the bound.
    pub edges_within: bool,
    /// Every aggregated pair conductance lies strictly below the bound.
    pub aggregated_within: bool,
}

impl WeightBound {
    pub fn within(&self) -> bool {
        self.edges_within
    }
}

pub fn weight_bound(g: &WeightedMultigraph) -> WeightBound {
    let n = g.n();
    let a_star = g.max_multiplicity();
    let l = g.kirchhoff();
    let max_edge_weight = g.edges().iter().map(|e| e.weight).fold(0.0, f64::max);
    let max_pair_weight = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| -l.get(i, j))
        .fold(0.0, f64::max);
    let bound = if n < 2 {
        None
    } else if a_star == 0 {
        // No edges: any positive weight would be a new pair, take a* = 1.
        Some(1.0 / (2.0 * (n - 1) as f64))
    } else {
        Some(1.0 / (2.0 * a_star as f64 * (n - 1) as f64))
    };
    let (edges_within, aggregated_within) = match bound {
        None => (true, true),
        Some(b) => (max_edge_weight < b, max_pair_weight < b),
    };
    WeightBound { bound, max_multiplicity: a_star, max_edge_weight, max_pair_weight, edges_within, aggregated_within }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    /// `sum_{t=0..T} M^t`.
    pub sum: DMatrix<f64>,
    /// Max-row-sum norm of each term `M^t`, `t = 0..=T`.
    pub term_norms: Vec<f64>,
    /// Gershgorin bound on the spectral radius of `M`.
    pub gershgorin_radius: f64,
}

impl SeriesResult {
    /// Gershgorin radius below one guarantees convergence.
    pub fn spectrally_safe(&self) -> bool {
        self.gershgorin_radius < 1.0
    }

    /// Term norms never shrink: the divergence signature.
    pub fn terms_nondecreasing(&self) -> bool {
        self.term_norms.windows(2).all(|w| w[1] >= w[0])
    }
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn series_partial_sum(l: &KirchhoffMatrix, terms: usize) -> SeriesResult {
    series_partial_sum_scaled(l, 1.0, terms)
}

/// Partial sum with `M = -alpha L`. Computed regardless of convergence.
pub fn series_partial_sum_scaled(l: &KirchhoffMatrix, alpha: f64, terms: usize) -> SeriesResult {
    let n = l.n();
    let m = l.matrix() * (-alpha);
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut sum = power.clone();
    let mut term_norms = vec![inf_norm(&power)];
    for _ in 0..terms {
        power = &power * &m;
        sum += &power;
        term_norms.push(inf_norm(&power));
    }
    SeriesResult { sum, term_norms, gershgorin_radius: inf_norm(&m) }
}

/// Signed route weight split by drain parity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwdCount {
    pub i: usize,
    pub j: usize,
    pub length: usize,
    /// Total weight of routes with an even number of drains.
    pub even_weight: f64,
    /// Total weight of routes with an odd number of drains.
    pub odd_weight: f64,
    /// Number of distinct routes enumerated.
    pub routes: usize,
}

impl RwdCount {
    pub fn signed(&self) -> f64 {
        self.even_weight - self.odd_weight
    }
}

struct Walker<'a> {
    g: &'a WeightedMultigraph,
    target: usize,
    count: RwdCount,
}

impl Walker<'_> {
    fn extend(&mut self, at: usize, remaining: usize, weight: f64, drains: usize) {
        if remaining == 0 {
            if at == self.target {
                self.count.routes += 1;
                if drains.is_multiple_of(2) {
                    self.count.even_weight += weight;
                } else {
                    self.count.odd_weight += weight;
                }
            }
            return;
        }
        for e in self.g.edges() {
            let (step_to, drain) = if self.g.is_directed() {
                // step at -> e.u needs arc e.u -> at; drain needs an arc into `at`.
                if e.v == at {
                    (Some(e.u), true)
                } else {
                    (None, false)
                }
            } else {
                match e.other(at) {
                    Some(b) => (Some(b), true),
                    None => (None, false),
                }
            };
            if let Some(b) = step_to {
                self.extend(b, remaining - 1, weight * e.weight, drains);
            }
            if drain {
                self.extend(at, remaining - 1, weight * e.weight, drains + 1);
            }
        }
    }
}

/// Exhaustive count of length-`t` routes with drains from `i` to `j`.
pub fn enumerate_rwd(g: &WeightedMultigraph, i: usize, j: usize, t: usize) -> Result<RwdCount, RwdError> {
    let n = g.n();
    if n > RWD_MAX_VERTICES || t > RWD_MAX_LENGTH {
        return Err(RwdError::TooLarge { n, t, max_vertices: RWD_MAX_VERTICES, max_length: RWD_MAX_LENGTH });
    }
    for vertex in [i, j] {
        if vertex >= n {
            return Err(RwdError::VertexOutOfRange { vertex, n });
        }
    }
    let mut walker =
        Walker { g, target: j, count: RwdCount { i, j, length: t, even_weight: 0.0, odd_weight: 0.0, routes: 0 } };
    walker.extend(i, t, 1.0, 0);
    Ok(walker.count)
}
