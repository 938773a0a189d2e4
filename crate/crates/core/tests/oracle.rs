mod common;

use netdesign::{RoutingAlgorithm, RoutingSystem};

use common::{brute_force, random_connected};

#[test]
fn betweenness_matches_enumeration() {
    let mut checked = 0;
    for i in 0..240u64 {
        let n = 2 + (i as usize % 11);
        let p = [0.1, 0.25, 0.45][i as usize % 3];
        let g = random_connected(n, p, 9000 + i);
        for algorithm in RoutingAlgorithm::ALL {
            let rs = RoutingSystem::build(&g, algorithm).unwrap();
            let profile = rs.effective_betweenness();
            let oracle = brute_force(&g, algorithm);
            for v in 0..n {
                let err = (profile.values[v] - oracle.values[v]).abs();
                assert!(err <= 1e-9, "graph {i} {algorithm} node {v}: error {err}");
            }
            assert!((profile.avg_path_length - oracle.avg_path_length).abs() <= 1e-9);
            for s in 0..n {
                for t in 0..n {
                    if s != t {
                        let count = rs.path_count(s, t).unwrap();
                        assert_eq!(count, oracle.counts[s][t].into(), "graph {i} {algorithm} {s}->{t}");
                    }
                }
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 480);
}

#[test]
fn efr_prefers_low_degree_detours() {
    // 0 - hub - 2 costs 2 + 5; 0 - 5 - 6 - 2 costs 2 + 2 + 2.
    let g = netdesign::Graph::new(
        8,
        [(0, 1), (1, 2), (1, 3), (1, 4), (3, 4), (1, 7), (0, 5), (5, 6), (6, 2)],
    )
    .unwrap();
    let spr = brute_force(&g, RoutingAlgorithm::Spr);
    let efr = brute_force(&g, RoutingAlgorithm::Efr);
    assert_eq!(spr.counts[0][2], 1);
    assert!(efr.values[1] < spr.values[1]);
    let rs = RoutingSystem::build(&g, RoutingAlgorithm::Efr).unwrap();
    let hops = rs.next_hop_distribution(0, 2).unwrap();
    assert_eq!(hops, vec![(5, 1.0)]);
}
