//! Weighted multigraphs and multidigraphs, their Kirchhoff matrices, and the
//! handful of structural predicates the accessibility properties are stated in
//! terms of (components, separating vertices, macrovertices).

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when comparing aggregated Kirchhoff entries.
pub const KIRCHHOFF_EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("record {record}: endpoint {vertex} is out of range for {n} vertices")]
    EndpointOutOfRange { record: usize, vertex: usize, n: usize },
    #[error("record {record}: weight {weight} is not strictly positive")]
    NonPositiveWeight { record: usize, weight: f64 },
    #[error("record {record}: weight {weight} is not finite")]
    NonFiniteWeight { record: usize, weight: f64 },
    #[error("record {record}: self-loop at vertex {vertex}")]
    SelfLoop { record: usize, vertex: usize },
    #[error("vertex {vertex} is out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("source and target vertex coincide ({0})")]
    IdenticalEndpoints(usize),
    #[error("vertex set must be nonempty")]
    EmptyVertexSet,
}

/// One edge (or arc `u -> v` when the graph is directed) with its conductance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Self { u, v, weight }
    }

    /// The endpoint opposite `x`, if `x` is incident to this edge.
    pub fn other(&self, x: usize) -> Option<usize> {
        if self.u == x {
            Some(self.v)
        } else if self.v == x {
            Some(self.u)
        } else {
            None
        }
    }
}

/// A weighted multigraph (or multidigraph) on vertices `0..n`.
///
/// Parallel records are kept as distinct edges; they aggregate by summation
/// only when the Kirchhoff matrix is formed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMultigraph {
    n: usize,
    edges: Vec<Edge>,
    directed: bool,
    labels: Option<Vec<String>>,
}

impl WeightedMultigraph {
    pub fn new(n: usize, edges: Vec<Edge>, directed: bool) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        for (record, e) in edges.iter().enumerate() {
            for vertex in [e.u, e.v] {
                if vertex >= n {
                    return Err(GraphError::EndpointOutOfRange { record, vertex, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop { record, vertex: e.u });
            }
            if e.weight.is_nan() || e.weight.is_infinite() {
                return Err(GraphError::NonFiniteWeight { record, weight: e.weight });
            }
            if e.weight <= 0.0 {
                return Err(GraphError::NonPositiveWeight { record, weight: e.weight });
            }
        }
        Ok(Self { n, edges, directed, labels: None })
    }

    pub fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        Self::new(n, edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect(), false)
    }

    pub fn directed(n: usize, arcs: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        Self::new(n, arcs.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect(), true)
    }

    /// Attaches external vertex labels; must be one per vertex.
    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n, "one label per vertex");
        self.labels = Some(labels);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of vertex `v`, falling back to its index.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    /// Same graph with one more record appended (an extra parallel edge).
    pub fn with_edge(&self, edge: Edge) -> Result<Self, GraphError> {
        let mut edges = self.edges.clone();
        edges.push(edge);
        let mut g = Self::new(self.n, edges, self.directed)?;
        g.labels = self.labels.clone();
        Ok(g)
    }

    /// Every weight multiplied by `factor` (must be positive).
    pub fn scaled(&self, factor: f64) -> Result<Self, GraphError> {
        let edges = self.edges.iter().map(|e| Edge::new(e.u, e.v, e.weight * factor)).collect();
        let mut g = Self::new(self.n, edges, self.directed)?;
        g.labels = self.labels.clone();
        Ok(g)
    }

    /// The multidigraph obtained by replacing each edge with two opposite arcs
    /// of the same weight. Directed graphs are returned unchanged.
    pub fn to_symmetric_digraph(&self) -> Self {
        if self.directed {
            return self.clone();
        }
        let edges =
            self.edges.iter().flat_map(|e| [Edge::new(e.u, e.v, e.weight), Edge::new(e.v, e.u, e.weight)]).collect();
        Self { n: self.n, edges, directed: true, labels: self.labels.clone() }
    }

    /// Reverses every arc. Diverging forests of the result are the converging
    /// forests of `self`.
    pub fn transposed(&self) -> Self {
        let edges = self.edges.iter().map(|e| Edge::new(e.v, e.u, e.weight)).collect();
        Self { n: self.n, edges, directed: self.directed, labels: self.labels.clone() }
    }

    /// Number of parallel records between each pair. For digraphs `a[i][j]`
    /// counts arcs `i -> j`; for graphs the table is symmetric.
    pub fn multiplicities(&self) -> Vec<Vec<usize>> {
        let mut a = vec![vec![0usize; self.n]; self.n];
        for e in &self.edges {
            a[e.u][e.v] += 1;
            if !self.directed {
                a[e.v][e.u] += 1;
            }
        }
        a
    }

    /// Largest number of parallel records joining any pair of vertices.
    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities().iter().flatten().copied().max().unwrap_or(0)
    }

    /// Undirected adjacency lists (arc direction ignored), deduplicated.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for e in &self.edges {
            adj[e.u].insert(e.v);
            adj[e.v].insert(e.u);
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    fn check_vertex(&self, vertex: usize) -> Result<(), GraphError> {
        if vertex >= self.n {
            Err(GraphError::VertexOutOfRange { vertex, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Connected components with arc direction ignored. Blocks are sorted
    /// internally and ordered by their smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.blocks()
    }

    /// `true` iff every (undirected) path from `i` to `t` passes through `k`.
    ///
    /// Vacuously true when `i` and `t` are disconnected, and trivially true
    /// when `k` is one of the endpoints.
    pub fn separates(&self, k: usize, i: usize, t: usize) -> Result<bool, GraphError> {
        for v in [k, i, t] {
            self.check_vertex(v)?;
        }
        if i == t {
            return Err(GraphError::IdenticalEndpoints(i));
        }
        if k == i || k == t {
            return Ok(true);
        }
        Ok(!self.reachable_avoiding(i, t, Some(k)))
    }

    /// Whether an undirected path joins `from` and `to`.
    pub fn connected(&self, from: usize, to: usize) -> bool {
        self.reachable_avoiding(from, to, None)
    }

    fn reachable_avoiding(&self, from: usize, to: usize, blocked: Option<usize>) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(x) = queue.pop_front() {
            if x == to {
                return true;
            }
            for &y in &adj[x] {
                if !seen[y] && Some(y) != blocked {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }

    /// `D` is a macrovertex when all its members have identical Kirchhoff
    /// entries toward every vertex outside `D`.
    pub fn is_macrovertex(&self, set: &[usize]) -> Result<bool, GraphError> {
        if set.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        for &v in set {
            self.check_vertex(v)?;
        }
        let inside: BTreeSet<usize> = set.iter().copied().collect();
        let l = self.kirchhoff();
        let first = set[0];
        Ok((0..self.n)
            .filter(|k| !inside.contains(k))
            .all(|k| inside.iter().all(|&i| (l.get(i, k) - l.get(first, k)).abs() <= KIRCHHOFF_EQ_TOL)))
    }

    pub fn kirchhoff(&self) -> KirchhoffMatrix {
        KirchhoffMatrix::from_graph(self)
    }
}

/// Dense Kirchhoff (Laplacian) matrix.
///
/// Undirected: `l[i][j] = -sum of weights between i and j`. Directed:
/// `l[i][j] = -sum of weights of arcs j -> i`, so the diagonal holds the
/// conductance converging to `i`. In both cases rows sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffMatrix {
    entries: DMatrix<f64>,
    directed: bool,
}

impl KirchhoffMatrix {
    fn from_graph(g: &WeightedMultigraph) -> Self {
        let n = g.n();
        let mut l = DMatrix::<f64>::zeros(n, n);
        for e in g.edges() {
            if g.is_directed() {
                l[(e.v, e.u)] -= e.weight;
            } else {
                l[(e.u, e.v)] -= e.weight;
                l[(e.v, e.u)] -= e.weight;
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| l[(i, j)]).sum();
            l[(i, i)] = -off;
        }
        Self { entries: l, directed: g.is_directed() }
    }

    /// Wraps a raw matrix. Used for matrices that did not come from a graph
    /// (for instance in tests); no invariants are checked.
    pub fn from_matrix(entries: DMatrix<f64>, directed: bool) -> Self {
        assert!(entries.is_square(), "Kirchhoff matrix must be square");
        Self { entries, directed }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Largest absolute row sum; the Gershgorin bound on the spectral radius.
    pub fn gershgorin_radius(&self) -> f64 {
        self.entries.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// Union-find with path halving, used for components and cycle detection.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns `false` if they were already one.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub(crate) fn blocks(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            let r = self.find(v);
            by_root[r].push(v);
        }
        let mut blocks: Vec<Vec<usize>> = by_root.into_iter().filter(|b| !b.is_empty()).collect();
        blocks.sort_by_key(|b| b[0]);
        blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> WeightedMultigraph {
        WeightedMultigraph::undirected(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn triangle() -> WeightedMultigraph {
        WeightedMultigraph::undirected(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn dense(l: &KirchhoffMatrix) -> Vec<Vec<f64>> {
        (0..l.n()).map(|i| (0..l.n()).map(|j| l.get(i, j)).collect()).collect()
    }

    #[test]
    fn build_rejects_bad_records() {
        assert!(WeightedMultigraph::undirected(2, &[(0, 1, 1.0)]).is_ok());
        assert_eq!(
            WeightedMultigraph::undirected(2, &[(0, 0, 1.0)]),
            Err(GraphError::SelfLoop { record: 0, vertex: 0 })
        );
        assert_eq!(
            WeightedMultigraph::undirected(2, &[(0, 1, 1.0), (0, 2, 1.0)]),
            Err(GraphError::EndpointOutOfRange { record: 1, vertex: 2, n: 2 })
        );
        assert_eq!(
            WeightedMultigraph::undirected(2, &[(0, 1, 0.0)]),
            Err(GraphError::NonPositiveWeight { record: 0, weight: 0.0 })
        );
        assert!(matches!(
            WeightedMultigraph::undirected(2, &[(0, 1, f64::NAN)]),
            Err(GraphError::NonFiniteWeight { .. })
        ));
        assert_eq!(WeightedMultigraph::undirected(0, &[]), Err(GraphError::NoVertices));
    }

    #[test]
    fn records_keep_input_order() {
        let g = WeightedMultigraph::undirected(3, &[(1, 2, 3.0), (0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        let ws: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
        assert_eq!(ws, vec![3.0, 1.0, 0.5]);
    }

    #[test]
    fn kirchhoff_of_p3() {
        assert_eq!(dense(&p3().kirchhoff()), vec![vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]);
    }

    #[test]
    fn kirchhoff_single_edge() {
        let g = WeightedMultigraph::undirected(2, &[(0, 1, 2.5)]).unwrap();
        assert_eq!(dense(&g.kirchhoff()), vec![vec![2.5, -2.5], vec![-2.5, 2.5]]);
    }

    #[test]
    fn kirchhoff_single_arc_converges_to_head() {
        let g = WeightedMultigraph::directed(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(dense(&g.kirchhoff()), vec![vec![0.0, 0.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn parallel_records_aggregate() {
        let a = WeightedMultigraph::undirected(3, &[(0, 1, 0.3), (1, 2, 1.0), (0, 1, 0.9)]).unwrap();
        let b = WeightedMultigraph::undirected(3, &[(0, 1, 1.2), (1, 2, 1.0)]).unwrap();
        let (la, lb) = (a.kirchhoff(), b.kirchhoff());
        assert!((la.matrix() - lb.matrix()).amax() <= 1e-12);
        assert_eq!(a.max_multiplicity(), 2);
    }

    #[test]
    fn doubled_arcs_give_identical_kirchhoff() {
        let g = WeightedMultigraph::undirected(4, &[(0, 1, 0.3), (1, 2, 1.7), (3, 1, 0.2), (0, 1, 2.0)]).unwrap();
        let d = g.to_symmetric_digraph();
        assert!(d.is_directed());
        assert_eq!(g.kirchhoff().matrix(), d.kirchhoff().matrix());
    }

    #[test]
    fn components_examples() {
        assert_eq!(p3().components(), vec![vec![0, 1, 2]]);
        let empty = WeightedMultigraph::undirected(3, &[]).unwrap();
        assert_eq!(empty.components(), vec![vec![0], vec![1], vec![2]]);
        let two = WeightedMultigraph::undirected(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(two.components(), vec![vec![0, 1], vec![2, 3]]);
        let arcs = WeightedMultigraph::directed(3, &[(2, 0, 1.0)]).unwrap();
        assert_eq!(arcs.components(), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn separates_examples() {
        assert_eq!(p3().separates(1, 0, 2), Ok(true));
        let c3 = triangle();
        for (k, i, t) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
            assert_eq!(c3.separates(k, i, t), Ok(false));
        }
        let two = WeightedMultigraph::undirected(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(two.separates(1, 0, 2), Ok(true));
        assert_eq!(p3().separates(1, 0, 0), Err(GraphError::IdenticalEndpoints(0)));
    }

    #[test]
    fn macrovertex_examples() {
        assert_eq!(triangle().is_macrovertex(&[0, 1]), Ok(true));
        assert_eq!(p3().is_macrovertex(&[0, 1]), Ok(false));
        assert_eq!(p3().is_macrovertex(&[0, 1, 2]), Ok(true));
        assert_eq!(p3().is_macrovertex(&[]), Err(GraphError::EmptyVertexSet));
    }

    #[test]
    fn transpose_reverses_arcs() {
        let g = WeightedMultigraph::directed(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let t = g.transposed();
        assert_eq!(t.edges()[1], Edge::new(2, 1, 2.0));
    }
}
