#![allow(dead_code)]

use matrix_forest::graph::{Edge, WeightedMultigraph};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weight in (0, hi].
pub fn weight<R: Rng>(rng: &mut R, hi: f64) -> f64 {
    hi - rng.gen_range(0.0..hi)
}

/// Random multigraph on `n` vertices: each pair gets an edge with
/// probability `p`, occasionally doubled.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, hi: f64, directed: bool) -> WeightedMultigraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.gen_bool(p) {
                edges.push(Edge::new(u, v, weight(rng, hi)));
                if rng.gen_bool(0.15) {
                    edges.push(Edge::new(u, v, weight(rng, hi)));
                }
            }
        }
    }
    WeightedMultigraph::new(n, edges, directed).unwrap()
}

/// Random graph with at most `max_edges` records, for enumeration.
pub fn small_graph<R: Rng>(rng: &mut R, max_n: usize, max_edges: usize, directed: bool) -> WeightedMultigraph {
    let n = rng.gen_range(1..=max_n);
    let m = if n == 1 { 0 } else { rng.gen_range(0..=max_edges) };
    let edges = (0..m)
        .map(|_| {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            Edge::new(u, v, weight(rng, 2.0))
        })
        .collect();
    WeightedMultigraph::new(n, edges, directed).unwrap()
}

/// Every subgraph of the complete (di)graph on `n` vertices with unit weights.
pub fn all_subgraphs(n: usize, directed: bool) -> Vec<WeightedMultigraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| if directed { u != v } else { u < v })
        .collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &(u, v))| Edge::new(u, v, 1.0))
                .collect();
            WeightedMultigraph::new(n, edges, directed).unwrap()
        })
        .collect()
}

/// Connected random graph: a random spanning tree plus extra edges.
pub fn connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64, hi: f64) -> WeightedMultigraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push(Edge::new(rng.gen_range(0..v), v, weight(rng, hi)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge::new(u, v, weight(rng, hi)));
            }
        }
    }
    WeightedMultigraph::new(n, edges, false).unwrap()
}

/// Two connected blobs sharing one cut vertex. Returns the graph, the cut
/// vertex, and the vertex lists of both sides (cut vertex excluded).
pub struct Separated {
    pub graph: WeightedMultigraph,
    pub cut: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

pub fn separated_graph<R: Rng>(rng: &mut R) -> Separated {
    let a = rng.gen_range(2..=4);
    let b = rng.gen_range(2..=4);
    let blob_a = connected_graph(rng, a, 0.5, 2.0);
    let blob_b = connected_graph(rng, b, 0.5, 2.0);
    // Blob A keeps its indices; its last vertex is the cut vertex, which is
    // also vertex 0 of blob B.
    let cut = a - 1;
    let shift = |v: usize| if v == 0 { cut } else { a + v - 1 };
    let mut edges: Vec<Edge> = blob_a.edges().to_vec();
    edges.extend(blob_b.edges().iter().map(|e| Edge::new(shift(e.u), shift(e.v), e.weight)));
    let n = a + b - 1;
    Separated {
        graph: WeightedMultigraph::new(n, edges, false).unwrap(),
        cut,
        left: (0..cut).collect(),
        right: (a..n).collect(),
    }
}

/// A graph with a planted macrovertex: members of `set` share identical
/// conductances to every outside vertex and arbitrary internal edges.
pub fn planted_macrovertex<R: Rng>(rng: &mut R, size: usize) -> (WeightedMultigraph, Vec<usize>) {
    let outside = rng.gen_range(2..=5);
    let base = connected_graph(rng, outside, 0.4, 2.0);
    let n = outside + size;
    let set: Vec<usize> = (outside..n).collect();
    let mut edges: Vec<Edge> = base.edges().to_vec();
    let mut attached = false;
    for o in 0..outside {
        if rng.gen_bool(0.5) || (o == outside - 1 && !attached) {
            attached = true;
            let w = weight(rng, 2.0);
            edges.extend(set.iter().map(|&d| Edge::new(o, d, w)));
        }
    }
    for (x, &u) in set.iter().enumerate() {
        for &v in &set[x + 1..] {
            if rng.gen_bool(0.6) {
                edges.push(Edge::new(u, v, weight(rng, 2.0)));
            }
        }
    }
    (WeightedMultigraph::new(n, edges, false).unwrap(), set)
}

pub fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub mod strategies {
    use matrix_forest::graph::{Edge, WeightedMultigraph};
    use proptest::prelude::*;

    /// Graphs with `1..=max_n` vertices, up to `max_edges` records and
    /// weights in (0, hi].
    pub fn graph(max_n: usize, max_edges: usize, hi: f64, directed: bool) -> impl Strategy<Value = WeightedMultigraph> {
        (1..=max_n).prop_flat_map(move |n| {
            let m = if n == 1 { 0 } else { max_edges };
            proptest::collection::vec((0..n, 1..n.max(2), 1e-3..=hi), 0..=m).prop_map(move |recs| {
                // Offsetting by 1..n modulo n never produces a self-loop.
                let edges = recs.into_iter().map(|(u, off, w)| Edge::new(u, (u + off) % n, w)).collect();
                WeightedMultigraph::new(n, edges, directed).unwrap()
            })
        })
    }

    /// A graph together with an increment `(k, t, delta)`, `k != t`.
    pub fn graph_with_pair(
        max_n: usize,
        max_edges: usize,
    ) -> impl Strategy<Value = (WeightedMultigraph, usize, usize, f64)> {
        (2..=max_n).prop_flat_map(move |n| {
            (proptest::collection::vec((0..n, 1..n, 1e-3..=2.0), 0..=max_edges), 0..n, 1..n, 1e-3..=3.0).prop_map(
                move |(recs, k, off, delta)| {
                    let edges = recs.into_iter().map(|(u, o, w)| Edge::new(u, (u + o) % n, w)).collect();
                    (WeightedMultigraph::new(n, edges, false).unwrap(), k, (k + off) % n, delta)
                },
            )
        })
    }
}
