//! Brute-force enumeration of spanning trees and spanning rooted / diverging
//! forests.
//!
//! This is the ground-truth oracle for the accessibility solver: every edge
//! subset is scanned, so it is only usable on small graphs. Cofactors here are
//! taken with nalgebra's determinant, never with the crate's own LU.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DisjointSets, WeightedMultigraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumLimits {
    pub max_vertices: usize,
    pub max_edges: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        Self { max_vertices: 10, max_edges: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("graph too large to enumerate: {n} vertices / {m} records (limits {max_vertices} / {max_edges})")]
    TooLarge { n: usize, m: usize, max_vertices: usize, max_edges: usize },
    #[error("expected an undirected graph")]
    ExpectedUndirected,
    #[error("expected a directed graph")]
    ExpectedDirected,
}

/// A spanning rooted forest (or diverging forest) of a specific graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningForest {
    /// Indices into the graph's record list, ascending.
    pub edges: Vec<usize>,
    /// Component id of every vertex.
    pub component: Vec<usize>,
    /// Root of every component, indexed by component id.
    pub roots: Vec<usize>,
    /// Product of member edge weights; 1 for the edgeless forest.
    pub weight: f64,
}

impl SpanningForest {
    pub fn root_of(&self, v: usize) -> usize {
        self.roots[self.component[v]]
    }

    /// `j` lies in the tree rooted at (diverging from) `i`.
    pub fn in_tree_rooted_at(&self, i: usize, j: usize) -> bool {
        self.root_of(j) == i
    }
}

fn check_limits(g: &WeightedMultigraph, limits: &EnumLimits) -> Result<(), EnumError> {
    let (n, m) = (g.n(), g.edges().len());
    if n > limits.max_vertices || m > limits.max_edges {
        return Err(EnumError::TooLarge { n, m, max_vertices: limits.max_vertices, max_edges: limits.max_edges });
    }
    Ok(())
}

/// Acyclic edge subset with its components, or `None` if the subset has a
/// cycle (or, for digraphs, a vertex entered twice).
struct Skeleton {
    edges: Vec<usize>,
    weight: f64,
    component: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    indegree: Vec<usize>,
}

fn skeleton(g: &WeightedMultigraph, mask: u64) -> Option<Skeleton> {
    let n = g.n();
    let mut dsu = DisjointSets::new(n);
    let mut indegree = vec![0usize; n];
    let mut edges = Vec::new();
    let mut weight = 1.0;
    for (idx, e) in g.edges().iter().enumerate() {
        if mask >> idx & 1 == 0 {
            continue;
        }
        if !dsu.union(e.u, e.v) {
            return None;
        }
        if g.is_directed() {
            indegree[e.v] += 1;
            if indegree[e.v] > 1 {
                return None;
            }
        }
        edges.push(idx);
        weight *= e.weight;
    }
    let blocks = dsu.blocks();
    let mut component = vec![0; n];
    for (c, b) in blocks.iter().enumerate() {
        for &v in b {
            component[v] = c;
        }
    }
    Some(Skeleton { edges, weight, component, blocks, indegree })
}

/// Visits every spanning rooted forest (undirected) or spanning diverging
/// forest (directed) in ascending subset order.
pub fn for_each_forest<F>(g: &WeightedMultigraph, limits: &EnumLimits, mut visit: F) -> Result<(), EnumError>
where
    F: FnMut(&SpanningForest),
{
    check_limits(g, limits)?;
    let m = g.edges().len();
    for mask in 0u64..(1u64 << m) {
        let Some(sk) = skeleton(g, mask) else { continue };
        let mut forest = SpanningForest {
            edges: sk.edges,
            component: sk.component,
            roots: sk.blocks.iter().map(|b| b[0]).collect(),
            weight: sk.weight,
        };
        if g.is_directed() {
            // In-degree <= 1 on a tree forces exactly one source per component.
            for (c, b) in sk.blocks.iter().enumerate() {
                forest.roots[c] = *b.iter().find(|&&v| sk.indegree[v] == 0).expect("tree has a source");
            }
            visit(&forest);
            continue;
        }
        // Mixed-radix counter over the root choice in every component.
        let mut choice = vec![0usize; sk.blocks.len()];
        loop {
            for (c, b) in sk.blocks.iter().enumerate() {
                forest.roots[c] = b[choice[c]];
            }
            visit(&forest);
            let mut c = 0;
            while c < choice.len() {
                choice[c] += 1;
                if choice[c] < sk.blocks[c].len() {
                    break;
                }
                choice[c] = 0;
                c += 1;
            }
            if c == choice.len() {
                break;
            }
        }
    }
    Ok(())
}

pub fn enumerate_rooted_forests(g: &WeightedMultigraph, limits: &EnumLimits) -> Result<Vec<SpanningForest>, EnumError> {
    if g.is_directed() {
        return Err(EnumError::ExpectedUndirected);
    }
    let mut out = Vec::new();
    for_each_forest(g, limits, |f| out.push(f.clone()))?;
    Ok(out)
}

pub fn enumerate_diverging_forests(
    g: &WeightedMultigraph,
    limits: &EnumLimits,
) -> Result<Vec<SpanningForest>, EnumError> {
    if !g.is_directed() {
        return Err(EnumError::ExpectedDirected);
    }
    let mut out = Vec::new();
    for_each_forest(g, limits, |f| out.push(f.clone()))?;
    Ok(out)
}

/// Weight of the selected forests; zero when nothing is selected.
pub fn weight_of_set<P>(forests: &[SpanningForest], filter: P) -> f64
where
    P: Fn(&SpanningForest) -> bool,
{
    forests.iter().filter(|f| filter(f)).map(|f| f.weight).sum()
}

/// Aggregate forest weights from one enumeration pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestCensus {
    /// Number of spanning (rooted / diverging) forests.
    pub count: usize,
    /// Total forest weight.
    pub total_weight: f64,
    /// `reach[(x, r)]`: weight of forests in which `x` lies in the tree rooted
    /// at `r`. Hence the weight of forests where `i` and `j` share a tree
    /// rooted at `i` is `reach[(j, i)]`.
    pub reach: DMatrix<f64>,
}

pub fn forest_census(g: &WeightedMultigraph, limits: &EnumLimits) -> Result<ForestCensus, EnumError> {
    let n = g.n();
    let mut census = ForestCensus { count: 0, total_weight: 0.0, reach: DMatrix::zeros(n, n) };
    for_each_forest(g, limits, |f| {
        census.count += 1;
        census.total_weight += f.weight;
        for x in 0..n {
            census.reach[(x, f.root_of(x))] += f.weight;
        }
    })?;
    Ok(census)
}

/// `q_ij` as the weight of forests in which `i` hangs in a tree rooted at `j`,
/// divided by the total forest weight.
pub fn oracle_q(g: &WeightedMultigraph, limits: &EnumLimits) -> Result<DMatrix<f64>, EnumError> {
    let census = forest_census(g, limits)?;
    Ok(census.reach / census.total_weight)
}

/// Spanning trees of an undirected graph, or for a digraph the spanning trees
/// diverging from `root`, as record-index lists with weights.
pub fn enumerate_spanning_trees(
    g: &WeightedMultigraph,
    root: Option<usize>,
    limits: &EnumLimits,
) -> Result<Vec<(Vec<usize>, f64)>, EnumError> {
    check_limits(g, limits)?;
    let n = g.n();
    let m = g.edges().len();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let Some(sk) = skeleton(g, mask) else { continue };
        if g.is_directed() {
            let r = root.expect("directed trees need a root");
            if sk.indegree[r] != 0 {
                continue;
            }
        }
        out.push((sk.edges, sk.weight));
    }
    Ok(out)
}

/// Signed cofactor of entry `(i, j)`.
pub fn cofactor(a: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let minor = a.clone().remove_row(i).remove_column(j);
    let det = if minor.nrows() == 0 { 1.0 } else { minor.determinant() };
    if (i + j).is_multiple_of(2) {
        det
    } else {
        -det
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// All cofactors of the Kirchhoff matrix against enumerated spanning-tree
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCertificate {
    pub cofactors: DMatrix<f64>,
    /// Undirected: one entry (all trees). Directed: weight of trees diverging
    /// from each vertex.
    pub tree_weights: Vec<f64>,
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn tree_cofactor_check(
    g: &WeightedMultigraph,
    limits: &EnumLimits,
    tol: f64,
) -> Result<TreeCertificate, EnumError> {
    let n = g.n();
    let l = g.kirchhoff();
    let cofactors = DMatrix::from_fn(n, n, |i, j| cofactor(l.matrix(), i, j));
    let tree_weights: Vec<f64> = if g.is_directed() {
        (0..n)
            .map(|r| enumerate_spanning_trees(g, Some(r), limits).map(|ts| ts.iter().map(|t| t.1).sum()))
            .collect::<Result<_, _>>()?
    } else {
        vec![enumerate_spanning_trees(g, None, limits)?.iter().map(|t| t.1).sum()]
    };
    let mut max_deviation: f64 = 0.0;
    let mut passed = true;
    for i in 0..n {
        let expected = if g.is_directed() { tree_weights[i] } else { tree_weights[0] };
        for j in 0..n {
            max_deviation = max_deviation.max((cofactors[(i, j)] - expected).abs());
            passed &= close(cofactors[(i, j)], expected, tol);
        }
    }
    Ok(TreeCertificate { cofactors, tree_weights, max_deviation, passed })
}

/// `det(I + L)` and all cofactors of `I + L` against enumerated forest weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestCofactorCertificate {
    pub det_w: f64,
    pub total_weight: f64,
    pub max_cofactor_deviation: f64,
    pub passed: bool,
}

pub fn forest_cofactor_check(
    g: &WeightedMultigraph,
    limits: &EnumLimits,
    tol: f64,
) -> Result<ForestCofactorCertificate, EnumError> {
    let census = forest_census(g, limits)?;
    let n = g.n();
    let w = DMatrix::<f64>::identity(n, n) + g.kirchhoff().matrix();
    let det_w = w.determinant();
    let mut passed = close(det_w, census.total_weight, tol);
    let mut max_cofactor_deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            // W^{ij} = weight of forests where i and j share a tree rooted at i.
            let expected = census.reach[(j, i)];
            let c = cofactor(&w, i, j);
            max_cofactor_deviation = max_cofactor_deviation.max((c - expected).abs());
            passed &= close(c, expected, tol);
        }
    }
    Ok(ForestCofactorCertificate { det_w, total_weight: census.total_weight, max_cofactor_deviation, passed })
}
