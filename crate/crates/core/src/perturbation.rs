//! Rank-one update of the accessibility matrix when one edge weight grows.
//!
//! Raising the conductance between `k` and `t` by `delta` (or adding a new
//! `k`–`t` edge of that weight) changes `W = I + alpha L` by a rank-one term,
//! so `Q` changes by `h * a b^T` with
//!
//! ```text
//! a_i = q_ik - q_it,   b_j = q_jt - q_jk,   h = 1 / (d_kt + 1 / (alpha * delta))
//! ```
//!
//! and no refactorization is needed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{
    forest_accessibility_with, forest_distance, AccessibilityResult, DistanceMatrix, ForestError, Tolerances,
};
use crate::graph::{Edge, GraphError, WeightedMultigraph};

/// Default number of chained updates between full re-solves.
pub const DEFAULT_REFRESH_INTERVAL: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error("increment endpoints must differ (both {0})")]
    SameEndpoints(usize),
    #[error("increment must be a finite positive number, got {0}")]
    NonPositiveDelta(f64),
    #[error("vertex {vertex} is out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("rank-one updates are only available for undirected graphs")]
    Directed,
    #[error("distance matrix does not match the accessibility matrix size")]
    SizeMismatch,
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeIncrement {
    k: usize,
    t: usize,
    delta: f64,
}

impl EdgeIncrement {
    pub fn new(k: usize, t: usize, delta: f64) -> Result<Self, PerturbationError> {
        if k == t {
            return Err(PerturbationError::SameEndpoints(k));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(PerturbationError::NonPositiveDelta(delta));
        }
        Ok(Self { k, t, delta })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// What changed, with the factors of the rank-one term kept explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub increment: EdgeIncrement,
    pub h: f64,
    /// `q_ik - q_it` for every `i`.
    pub left: DVector<f64>,
    /// `q_jt - q_jk` for every `j`.
    pub right: DVector<f64>,
    pub delta_q: DMatrix<f64>,
    pub delta_d: DMatrix<f64>,
    /// Sign of every `delta_q` entry: -1, 0 or 1.
    pub signs: DMatrix<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub accessibility: AccessibilityResult,
    pub distance: DistanceMatrix,
    pub report: DeltaReport,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Applies one increment (in graph weight units) to an undirected result.
pub fn apply_increment(
    acc: &AccessibilityResult,
    dist: &DistanceMatrix,
    inc: &EdgeIncrement,
) -> Result<UpdateOutcome, PerturbationError> {
    if acc.is_directed() {
        return Err(PerturbationError::Directed);
    }
    let n = acc.n();
    if dist.n() != n {
        return Err(PerturbationError::SizeMismatch);
    }
    for vertex in [inc.k, inc.t] {
        if vertex >= n {
            return Err(PerturbationError::VertexOutOfRange { vertex, n });
        }
    }
    let q = acc.q();
    let (k, t) = (inc.k, inc.t);
    let scaled = acc.alpha() * inc.delta;
    let h = 1.0 / (dist.get(k, t) + 1.0 / scaled);
    let left = DVector::from_fn(n, |i, _| q[(i, k)] - q[(i, t)]);
    let right = DVector::from_fn(n, |j, _| q[(j, t)] - q[(j, k)]);
    let delta_q = &left * right.transpose() * h;
    let new_q = q + &delta_q;
    // Matrix determinant lemma: det W' = det W * (1 + alpha delta d_kt).
    let det_w = acc.det_w() * (1.0 + scaled * dist.get(k, t));
    let new_acc = AccessibilityResult::from_parts(acc.alpha(), new_q, det_w, false, acc.condition());
    let new_dist = forest_distance(&new_acc)?;
    let delta_d = new_dist.matrix() - dist.matrix();
    let signs = delta_q.map(sign);
    Ok(UpdateOutcome {
        accessibility: new_acc,
        distance: new_dist,
        report: DeltaReport { increment: *inc, h, left, right, delta_q, delta_d, signs },
    })
}

/// `delta_d_ij` in closed form from the old distances:
/// `-(d_ik - d_it + d_jt - d_jk)^2 / (4 (d_kt + 1/(alpha delta)))`.
pub fn distance_change(dist: &DistanceMatrix, inc: &EdgeIncrement, alpha: f64) -> DMatrix<f64> {
    let (k, t) = (inc.k, inc.t);
    let denom = dist.get(k, t) + 1.0 / (alpha * inc.delta);
    DMatrix::from_fn(dist.n(), dist.n(), |i, j| {
        let s = dist.get(i, k) - dist.get(i, t) + dist.get(j, t) - dist.get(j, k);
        -0.25 * s * s / denom
    })
}

/// `true` iff `delta_q` equals `h * left * right^T` entrywise within `tol`.
pub fn rank_one_certificate(report: &DeltaReport, tol: f64) -> bool {
    let outer = &report.left * report.right.transpose() * report.h;
    report.delta_q.shape() == outer.shape() && (&report.delta_q - outer).amax() <= tol
}

/// A running graph whose accessibilities are kept current by rank-one
/// updates, re-solved from scratch every `refresh_interval` increments.
#[derive(Debug, Clone)]
pub struct UpdateChain {
    graph: WeightedMultigraph,
    tolerances: Tolerances,
    accessibility: AccessibilityResult,
    distance: DistanceMatrix,
    refresh_interval: usize,
    since_refresh: usize,
}

impl UpdateChain {
    pub fn new(
        graph: WeightedMultigraph,
        alpha: f64,
        tolerances: Tolerances,
        refresh_interval: usize,
    ) -> Result<Self, PerturbationError> {
        if graph.is_directed() {
            return Err(PerturbationError::Directed);
        }
        let accessibility = forest_accessibility_with(&graph.kirchhoff(), alpha, &tolerances)?;
        let distance = forest_distance(&accessibility)?;
        Ok(Self {
            graph,
            tolerances,
            accessibility,
            distance,
            refresh_interval: refresh_interval.max(1),
            since_refresh: 0,
        })
    }

    pub fn graph(&self) -> &WeightedMultigraph {
        &self.graph
    }

    pub fn accessibility(&self) -> &AccessibilityResult {
        &self.accessibility
    }

    pub fn distance(&self) -> &DistanceMatrix {
        &self.distance
    }

    /// Applies the increment and returns its report. After every
    /// `refresh_interval` updates the state is replaced by a full solve of the
    /// accumulated graph.
    pub fn apply(&mut self, inc: &EdgeIncrement) -> Result<DeltaReport, PerturbationError> {
        let outcome = apply_increment(&self.accessibility, &self.distance, inc)?;
        self.graph = self.graph.with_edge(Edge::new(inc.k, inc.t, inc.delta))?;
        self.accessibility = outcome.accessibility;
        self.distance = outcome.distance;
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_interval {
            self.refresh()?;
        }
        Ok(outcome.report)
    }

    pub fn refresh(&mut self) -> Result<(), PerturbationError> {
        self.accessibility =
            forest_accessibility_with(&self.graph.kirchhoff(), self.accessibility.alpha(), &self.tolerances)?;
        self.distance = forest_distance(&self.accessibility)?;
        self.since_refresh = 0;
        Ok(())
    }
}
