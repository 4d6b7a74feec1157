use std::collections::BTreeSet;

use l0cut::io::{format_edge_list, format_signal, read_edge_list, read_signal, write_text};
use l0cut::{EdgeWeighting, FlowNetwork, Graph};
use proptest::prelude::*;

fn arcs_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (3usize..=9).prop_flat_map(|n| {
        let arc = (0..n, 0..n, 0.0f64..10.0);
        (Just(n), prop::collection::vec(arc, 0..24))
    })
}

fn brute_min_cut(n: usize, arcs: &[(usize, usize, f64)]) -> f64 {
    // Source 0 and sink n - 1; every other node may sit on either side.
    let inner = n - 2;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << inner) {
        let side = |v: usize| -> bool {
            if v == 0 {
                true
            } else if v == n - 1 {
                false
            } else {
                mask >> (v - 1) & 1 == 1
            }
        };
        let cut: f64 = arcs
            .iter()
            .filter(|&&(u, v, _)| side(u) && !side(v))
            .map(|&(_, _, c)| c)
            .sum();
        best = best.min(cut);
    }
    best
}

fn graph_strategy() -> impl Strategy<Value = (Graph, Vec<f64>)> {
    (2usize..=15).prop_flat_map(|n| {
        let pairs = prop::collection::vec((0..n, 0..n), 0..30);
        let weights = prop::collection::vec(0.0f64..5.0, 30);
        (Just(n), pairs, weights).prop_map(|(n, pairs, weights)| {
            let edges: BTreeSet<(usize, usize)> = pairs
                .into_iter()
                .filter(|(u, v)| u != v)
                .map(|(u, v)| (u.min(v), u.max(v)))
                .collect();
            let g = Graph::new(n, edges).unwrap();
            let w = weights[..g.num_edges()].to_vec();
            (g, w)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn max_flow_equals_enumerated_min_cut((n, arcs) in arcs_strategy()) {
        let mut net = FlowNetwork::new(n, 0, n - 1).unwrap();
        for &(u, v, c) in &arcs {
            if u != v {
                net.add_arc(u, v, c).unwrap();
            }
        }
        let proper: Vec<_> = arcs.iter().copied().filter(|&(u, v, _)| u != v).collect();
        let cut = net.min_cut().unwrap();
        let brute = brute_min_cut(n, &proper);
        let tol = 1e-9 * (1.0 + brute);
        prop_assert!((cut.value - brute).abs() <= tol, "cut {} brute {}", cut.value, brute);
        prop_assert!((cut.max_flow - brute).abs() <= tol);
        prop_assert!(net.flow_is_feasible(1e-9));
        prop_assert!(cut.source_side[0] && !cut.source_side[n - 1]);
    }

    #[test]
    fn edge_list_file_round_trip((g, w) in graph_strategy(), weighted in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.txt");
        let weights = EdgeWeighting::new(w, &g).unwrap();
        let text = format_edge_list(&g, weighted.then_some(&weights), &["test".into()]);
        write_text(&path, &text).unwrap();
        let back = read_edge_list(&path).unwrap();
        prop_assert_eq!(&back.graph, &g);
        if weighted && g.num_edges() > 0 {
            prop_assert_eq!(back.weights.as_ref(), Some(&weights));
        } else {
            prop_assert!(back.weights.is_none());
        }
    }

    #[test]
    fn signal_file_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..50)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("signal.txt");
        write_text(&path, &format_signal(&values, &[])).unwrap();
        prop_assert_eq!(read_signal(&path).unwrap(), values);
    }
}
