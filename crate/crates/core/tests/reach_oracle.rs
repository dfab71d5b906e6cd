//! Reachability against an independent depth-first enumeration.

use std::collections::BTreeSet;

use popsim::analysis::gen::random_spec;
use popsim::analysis::reach::{successors, ReachGraph};
use popsim::analysis::{parse_protocol, reachable, stable_decisions, Counts, ProtocolSpec};
use popsim::RngStream;
use proptest::prelude::*;

/// Recursive enumeration over agent multisets stored as sorted state lists.
fn dfs_oracle(spec: &ProtocolSpec, start: &Counts) -> BTreeSet<Vec<u32>> {
    fn agents(c: &[u32]) -> Vec<usize> {
        c.iter().enumerate().flat_map(|(s, &k)| std::iter::repeat_n(s, k as usize)).collect()
    }
    fn counts(agents: &[usize], k: usize) -> Vec<u32> {
        let mut v = vec![0; k];
        for &a in agents {
            v[a] += 1;
        }
        v
    }
    fn go(spec: &ProtocolSpec, c: Vec<u32>, seen: &mut BTreeSet<Vec<u32>>) {
        if !seen.insert(c.clone()) {
            return;
        }
        let list = agents(&c);
        for i in 0..list.len() {
            for j in 0..list.len() {
                if i == j {
                    continue;
                }
                let (x, y) = spec.delta(popsim::StateId(list[i] as u16), popsim::StateId(list[j] as u16));
                let mut next = list.clone();
                next[i] = x.index();
                next[j] = y.index();
                go(spec, counts(&next, c.len()), seen);
            }
        }
    }
    let mut seen = BTreeSet::new();
    go(spec, start.0.clone(), &mut seen);
    seen
}

fn small_instance() -> impl Strategy<Value = (u64, usize, Vec<u32>)> {
    (any::<u64>(), 2usize..=4).prop_flat_map(|(seed, k)| {
        (Just(seed), Just(k), proptest::collection::vec(0u32..=3, k).prop_filter("1..=6 agents", |v| {
            let n: u32 = v.iter().sum();
            (1..=6).contains(&n)
        }))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bfs_matches_dfs((seed, k, c) in small_instance()) {
        let spec = random_spec(k, 0.5, &mut RngStream::new(seed));
        let c0 = Counts(c);
        let bfs: BTreeSet<Vec<u32>> = reachable(&c0, &spec, 100_000).unwrap().into_iter().map(|c| c.0).collect();
        prop_assert_eq!(bfs, dfs_oracle(&spec, &c0));
    }

    #[test]
    fn every_node_is_connected_by_a_replayable_path((seed, k, c) in small_instance()) {
        let spec = random_spec(k, 0.5, &mut RngStream::new(seed));
        let g = ReachGraph::explore(&Counts(c), &spec, 100_000).unwrap();
        // Each edge is realised by one enabled transition.
        for (v, out) in g.edges.iter().enumerate() {
            let succ: Vec<Counts> = successors(&g.nodes[v], &spec).into_iter().map(|(_, _, c)| c).collect();
            for &w in out {
                prop_assert!(succ.contains(&g.nodes[w]));
            }
        }
        // Breadth-first discovery implies every node has a predecessor.
        for w in 1..g.nodes.len() {
            prop_assert!(g.edges.iter().any(|out| out.contains(&w)));
        }
    }

    #[test]
    fn stable_decisions_shrink_along_reachability((seed, k, c) in small_instance()) {
        let spec = random_spec(k, 0.5, &mut RngStream::new(seed));
        let c0 = Counts(c);
        let from_c0 = stable_decisions(&c0, &spec, 100_000).unwrap();
        for c1 in reachable(&c0, &spec, 100_000).unwrap() {
            let from_c1 = stable_decisions(&c1, &spec, 100_000).unwrap();
            prop_assert!(from_c1.is_subset(&from_c0));
        }
    }
}

#[test]
fn four_state_fixture_matches_oracle() {
    let spec = parse_protocol(include_str!("../../../protocols/fourstate.pp")).unwrap();
    for init in ["A:2,B:1", "A:3,B:3", "A:4,B:1", "A:1"] {
        let c0 = spec.parse_counts(init).unwrap();
        let bfs: BTreeSet<Vec<u32>> = reachable(&c0, &spec, 100_000).unwrap().into_iter().map(|c| c.0).collect();
        assert_eq!(bfs, dfs_oracle(&spec, &c0), "{init}");
    }
    let c0 = spec.parse_counts("A:2,B:1").unwrap();
    assert_eq!(dfs_oracle(&spec, &c0).len(), 3);
}
