//! Property-based invariants over randomly generated graphs and files.

use proptest::collection::vec;
use proptest::prelude::*;

use kcore_dist::{
    check_bounds, coreness_exact, parse_edge_list, run_one_to_one, verify_locality,
    write_coreness, write_edge_list, Graph, ParseMode, RunOptions, Schedule,
};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..60, vec(any::<(u16, u16)>(), 0..150)).prop_map(|(n, pairs)| {
        let edges: Vec<(u32, u32)> = pairs
            .into_iter()
            .map(|(a, b)| ((a as usize % n) as u32, (b as usize % n) as u32))
            .collect();
        Graph::from_edges(n, edges)
    })
}

/// Remove isolated nodes, relabelling the rest by rank.
fn compact(g: &Graph) -> Graph {
    let kept: Vec<u32> = g.nodes().filter(|&u| g.degree(u) > 0).collect();
    let rank = |u: u32| kept.binary_search(&u).unwrap() as u32;
    let edges: Vec<(u32, u32)> = g
        .nodes()
        .flat_map(|u| {
            g.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (rank(u), rank(v)))
        })
        .collect();
    Graph::from_edges(kept.len(), edges)
}

proptest! {
    #[test]
    fn oracle_satisfies_locality(g in arb_graph()) {
        let c = coreness_exact(&g);
        prop_assert!(verify_locality(&g, &c).unwrap().is_empty());
    }

    #[test]
    fn coreness_bounded_by_degree(g in arb_graph()) {
        let c = coreness_exact(&g);
        for u in g.nodes() {
            prop_assert!(c.get(u) <= g.degree(u) as u32);
        }
    }

    #[test]
    fn edge_list_roundtrip(g in arb_graph()) {
        // Isolated nodes cannot appear in an edge list, so compare against
        // the graph with them compacted away.
        let g = compact(&g);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf, false).unwrap();
        let parsed = parse_edge_list(&buf[..], ParseMode::Undirected, Some(g.node_count()))
            .unwrap();
        prop_assert_eq!(parsed.node_count(), g.node_count());
        prop_assert_eq!(parsed.edge_count(), g.edge_count());
        for u in g.nodes() {
            prop_assert_eq!(parsed.neighbors(u), g.neighbors(u));
        }
    }

    #[test]
    fn coreness_file_roundtrip(g in arb_graph()) {
        let c = coreness_exact(&g);
        let mut buf = Vec::new();
        write_coreness(&g, &c, &mut buf).unwrap();
        let read = kcore_dist::read_coreness(&buf[..]).unwrap();
        prop_assert_eq!(read.values(), c.values());
    }

    #[test]
    fn sync_run_converges_to_oracle_within_bounds(g in arb_graph()) {
        let oracle = coreness_exact(&g);
        let run = run_one_to_one(&g, &RunOptions::default(), Some(&oracle));
        prop_assert!(run.converged);
        prop_assert_eq!(run.final_coreness.values(), oracle.values());
        let b = check_bounds(&g, &oracle, &run);
        prop_assert!(b.all_satisfied, "{:?}", b);
    }

    #[test]
    fn random_schedule_agrees_with_sync(g in arb_graph(), seed in 0u64..1000) {
        let oracle = coreness_exact(&g);
        let opts = RunOptions {
            schedule: Schedule::Random { seed },
            ..RunOptions::default()
        };
        let run = run_one_to_one(&g, &opts, Some(&oracle));
        prop_assert!(run.converged);
        prop_assert_eq!(run.final_coreness.values(), oracle.values());
    }

    #[test]
    fn symmetrized_parse_matches_undirected(g in arb_graph()) {
        // Emit each edge in a single direction; symmetrization restores it.
        let g = compact(&g);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf, false).unwrap();
        let parsed =
            parse_edge_list(&buf[..], ParseMode::SymmetrizeDirected, Some(g.node_count()))
                .unwrap();
        for u in g.nodes() {
            prop_assert_eq!(parsed.neighbors(u), g.neighbors(u));
        }
    }
}
