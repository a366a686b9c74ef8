mod common;

use common::strategies::graph;
use matrix_forest::graph::{Edge, WeightedMultigraph};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kirchhoff_rows_sum_to_zero(g in graph(12, 30, 10.0, false)) {
        let l = g.kirchhoff();
        for i in 0..g.n() {
            let row: f64 = l.matrix().row(i).sum();
            prop_assert!(row.abs() <= 1e-12, "row {} sums to {}", i, row);
            for j in 0..g.n() {
                if i != j {
                    prop_assert!(l.get(i, j) <= 0.0);
                }
            }
            prop_assert!(l.get(i, i) >= 0.0);
        }
    }

    #[test]
    fn directed_rows_sum_to_zero(g in graph(12, 30, 10.0, true)) {
        let l = g.kirchhoff();
        for i in 0..g.n() {
            prop_assert!(l.matrix().row(i).sum().abs() <= 1e-12);
        }
    }

    #[test]
    fn undirected_kirchhoff_is_exactly_symmetric(g in graph(12, 30, 10.0, false)) {
        let l = g.kirchhoff();
        prop_assert_eq!(l.matrix(), &l.matrix().transpose());
    }

    #[test]
    fn doubled_edges_give_same_kirchhoff(g in graph(8, 16, 5.0, false)) {
        let (undirected, doubled) = (g.kirchhoff(), g.to_symmetric_digraph().kirchhoff());
        prop_assert_eq!(undirected.matrix(), doubled.matrix());
    }

    #[test]
    fn components_partition_vertices(g in graph(12, 14, 1.0, false)) {
        let blocks = g.components();
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..g.n()).collect::<Vec<_>>());
        for b in &blocks {
            for &x in b {
                prop_assert!(g.connected(b[0], x));
            }
        }
    }
}

#[test]
fn parallel_records_aggregate() {
    let split = WeightedMultigraph::undirected(3, &[(0, 1, 0.25), (0, 1, 0.5), (1, 2, 1.0)]).unwrap();
    let merged = WeightedMultigraph::undirected(3, &[(0, 1, 0.75), (1, 2, 1.0)]).unwrap();
    assert_eq!(split.kirchhoff().matrix(), merged.kirchhoff().matrix());
    assert_eq!(split.max_multiplicity(), 2);
}

#[test]
fn single_arc_kirchhoff() {
    let g = WeightedMultigraph::directed(2, &[(0, 1, 1.0)]).unwrap();
    let l = g.kirchhoff();
    assert_eq!(l.matrix().as_slice(), &[0.0, -1.0, 0.0, 1.0]);
}

#[test]
fn separation_on_path() {
    let p4 = WeightedMultigraph::new(4, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(2, 3, 1.0)], false)
        .unwrap();
    assert!(p4.separates(1, 0, 3).unwrap());
    assert!(p4.separates(2, 0, 3).unwrap());
    let c4 = p4.with_edge(Edge::new(3, 0, 1.0)).unwrap();
    assert!(!c4.separates(1, 0, 2).unwrap());
}
