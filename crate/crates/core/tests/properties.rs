use std::collections::{BTreeMap, VecDeque};

use alsim::async_engine::{snapshot, snapshot_set};
use alsim::graph::{self, PortGraph};
use alsim::schedule::{Schedule, ScheduleSpace};
use alsim::transform::local_ids;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_graph(n: usize, extra: usize, seed: u64) -> PortGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PortGraph::random_connected(n, extra, 2 * n as u64, &mut rng).unwrap()
}

/// All-pairs hop distances by Floyd-Warshall over the edge list.
fn floyd(g: &PortGraph) -> Vec<Vec<u32>> {
    let n = g.n();
    let inf = u32::MAX / 2;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in g.edges() {
        d[e.u][e.v] = 1;
        d[e.v][e.u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn graph_strategy() -> impl Strategy<Value = PortGraph> {
    (1usize..12, 0usize..8, any::<u64>()).prop_map(|(n, extra, seed)| random_graph(n, extra, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distances_match_floyd_warshall(g in graph_strategy()) {
        let d = floyd(&g);
        for (v, row) in d.iter().enumerate() {
            let bfs = g.distances_from(v);
            for (w, &dvw) in row.iter().enumerate() {
                prop_assert_eq!(bfs[w], Some(dvw));
            }
        }
    }

    #[test]
    fn balls_grow_with_radius(g in graph_strategy(), r in 0u32..6) {
        for v in 0..g.n() {
            let small = g.ball(v, r);
            let big = g.ball(v, r + 1);
            prop_assert!(small.nodes().all(|u| big.dist(u) == small.dist(u)));
            prop_assert_eq!(small.len() <= big.len(), true);
        }
    }

    #[test]
    fn sub_balls_match_graph_balls(g in graph_strategy(), r in 0u32..3) {
        let outer = g.ball(0, 2 * r + 1);
        for (c, dc) in outer.members().collect::<Vec<_>>() {
            if dc + r <= outer.radius() {
                let sub = outer.sub_ball(c, r).unwrap();
                let direct = g.ball(c, r);
                prop_assert_eq!(sub.bfs_order(), direct.bfs_order());
                for u in direct.nodes() {
                    prop_assert_eq!(sub.links(u), direct.links(u));
                }
            }
        }
    }

    #[test]
    fn bfs_order_matches_a_port_ordered_queue(g in graph_strategy(), r in 0u32..5) {
        let order = g.ball(0, r).bfs_order();
        let dist = g.distances_from(0);
        let mut seen = vec![false; g.n()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut expected = Vec::new();
        while let Some(u) = queue.pop_front() {
            expected.push(u);
            for l in g.links(u) {
                if !seen[l.neighbor] && dist[l.neighbor].unwrap() <= r {
                    seen[l.neighbor] = true;
                    queue.push_back(l.neighbor);
                }
            }
        }
        prop_assert_eq!(order, expected);
    }

    #[test]
    fn random_schedules_are_reproducible(n in 1usize..20, seed: u64, window in 0u32..6) {
        let a = Schedule::random(n, seed, window, 0.3, 0.3).unwrap();
        let b = Schedule::random(n, seed, window, 0.3, 0.3).unwrap();
        prop_assert_eq!(&a, &b);
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Schedule>(&json).unwrap(), a);
    }

    #[test]
    fn schedule_space_decodes_distinct_schedules(n in 1usize..4, w in 0u32..3, never: bool, crash: bool) {
        let space = ScheduleSpace::new(n, w, never, crash);
        let all: Vec<Schedule> = space.iter().collect();
        let per_node = (w as u128 + 1) * if crash { 2 } else { 1 } + u128::from(never);
        prop_assert_eq!(all.len() as u128, per_node.pow(n as u32));
        let distinct: std::collections::BTreeSet<String> =
            all.iter().map(|s| serde_json::to_string(s).unwrap()).collect();
        prop_assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn snapshot_sets_are_monotone(
        g in graph_strategy(),
        seed: u64,
        rho in 0u32..5,
        theta in 0u32..6,
        d_rho in 0u32..3,
        d_theta in 0u32..3,
    ) {
        let s = Schedule::random(g.n(), seed, 5, 0.2, 0.2).unwrap();
        for v in 0..g.n() {
            let small = snapshot_set(&g, &s, v, rho, theta);
            let big = snapshot_set(&g, &s, v, rho + d_rho, theta + d_theta);
            prop_assert!(small.is_subset(&big));
        }
    }

    #[test]
    fn snapshot_extraction_matches_the_global_set(g in graph_strategy(), seed: u64, t in 0u32..5) {
        let s = Schedule::random(g.n(), seed, 4, 0.2, 0.0).unwrap();
        for v in (0..g.n()).filter(|&v| s.wakes()[v].round().is_some()) {
            let view = snapshot(&g, &s, v, t).unwrap();
            let wake = s.wakes()[v].round().unwrap();
            let visible: Vec<_> = view.visible().keys().copied().collect();
            let global: Vec<_> = snapshot_set(&g, &s, v, t, wake).nodes().collect();
            prop_assert_eq!(visible, global);
        }
    }

    #[test]
    fn local_ids_never_collide(g in graph_strategy(), tau in 0u32..4) {
        let n_bound = g.id_bound();
        let mut owner_of: BTreeMap<u64, (u64, usize)> = BTreeMap::new();
        for v in 0..g.n() {
            for (u, x) in local_ids(g.id(v), &g.ball(v, tau), n_bound).iter() {
                prop_assert!(x < n_bound * n_bound);
                if let Some(prev) = owner_of.insert(x, (g.id(v), u)) {
                    prop_assert_eq!(prev, (g.id(v), u));
                }
            }
        }
    }

    #[test]
    fn rings_and_tori_are_symmetric(n in 3usize..10, rows in 3usize..5, cols in 3usize..5) {
        let ring = PortGraph::ring((0..n as u64).collect(), n as u64).unwrap();
        prop_assert!(graph::is_symmetric(&ring).unwrap());
        let torus = PortGraph::torus(rows, cols, (0..(rows * cols) as u64).collect(), (rows * cols) as u64).unwrap();
        prop_assert!(graph::is_symmetric_with_limit(&torus, 16).unwrap());
    }
}
