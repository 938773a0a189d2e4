mod common;

use netdesign::capacity::{analytic_rc, assign, assign_combo, Combo, Profiles, Scheme};
use netdesign::simulator::{Packet, TrafficState};
use netdesign::topology::Family;
use netdesign::{
    load_edge_list, save_edge_list, CapabilityAssignment, EtaConfig, ForwardingTable, Graph,
    RoutingAlgorithm, RoutingSystem, SimOptions, Simulation, SuccessorChoice,
};
use proptest::prelude::*;

use common::random_connected;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (3usize..24, 0.0f64..0.4, any::<u64>()).prop_map(|(n, p, s)| random_connected(n, p, s))
}

fn capabilities(values: Vec<f64>) -> CapabilityAssignment {
    CapabilityAssignment {
        scheme: Scheme::Uc,
        values,
        profile_routing: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_round_trip(g in graph_strategy()) {
        let text = save_edge_list(&g);
        let back = load_edge_list(&text).unwrap();
        prop_assert_eq!(back.node_count(), g.node_count());
        prop_assert_eq!(save_edge_list(&back), text);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn betweenness_sums_to_path_identity(g in graph_strategy()) {
        let n = g.node_count() as f64;
        for algorithm in RoutingAlgorithm::ALL {
            let p = RoutingSystem::build(&g, algorithm).unwrap().effective_betweenness();
            let expected = n * (n - 1.0) * (p.avg_path_length + 1.0);
            prop_assert!((p.total() - expected).abs() <= 1e-9 * expected);
            prop_assert!(p.values.iter().all(|&b| b >= 2.0 * (n - 1.0) - 1e-9));
        }
    }

    #[test]
    fn capabilities_sum_to_twice_edges(g in graph_strategy()) {
        let profiles = Profiles::compute(&g).unwrap();
        let total = 2.0 * g.edge_count() as f64;
        for combo in Combo::TABLE {
            let ca = assign_combo(&g, combo, &profiles).unwrap();
            prop_assert!((ca.total() - total).abs() <= 1e-9 * total, "{}", combo);
            prop_assert!(ca.values.iter().all(|&c| c > 0.0));
        }
    }

    #[test]
    fn betweenness_capabilities_load_every_node_equally(g in graph_strategy()) {
        let n = g.node_count() as f64;
        let spr = RoutingSystem::build(&g, RoutingAlgorithm::Spr).unwrap().effective_betweenness();
        let ca = assign(&g, Some(&spr), Scheme::Bc).unwrap();
        let eval = analytic_rc(&spr, &ca, false).unwrap();
        for (c, b) in ca.values.iter().zip(&spr.values) {
            let rate = c * n * (n - 1.0) / b;
            prop_assert!((rate - eval.rc_analytic).abs() <= 1e-12 * eval.rc_analytic);
        }
        let closed = 2.0 * g.edge_count() as f64 / (spr.avg_path_length + 1.0);
        prop_assert!((eval.rc_analytic - closed).abs() <= 1e-9 * closed);
    }

    #[test]
    fn packets_are_conserved(
        g in graph_strategy(),
        rate in 0.0f64..12.0,
        caps in prop::collection::vec(0.2f64..3.0, 24),
        seed in any::<u64>(),
        uniform_successor in any::<bool>(),
    ) {
        let rs = RoutingSystem::build(&g, RoutingAlgorithm::Efr).unwrap();
        let choice = if uniform_successor { SuccessorChoice::Uniform } else { SuccessorChoice::PathWeighted };
        let table = ForwardingTable::new(&rs, choice);
        let ca = capabilities(caps[..g.node_count()].to_vec());
        let sim = Simulation::new(&table, &ca, SimOptions::default()).unwrap();
        let mut state = TrafficState::new(g.node_count(), seed);
        for _ in 0..150 {
            let before = state.theta();
            let stats = sim.step(&mut state, rate);
            prop_assert_eq!(before + stats.created - stats.delivered, state.theta());
            let queued: u64 = (0..g.node_count()).map(|v| state.queue(v).len() as u64).sum();
            prop_assert_eq!(queued, state.theta());
        }
    }

    #[test]
    fn queues_are_first_in_first_out(
        g in graph_strategy(),
        rate in 0.5f64..10.0,
        seed in any::<u64>(),
    ) {
        let rs = RoutingSystem::build(&g, RoutingAlgorithm::Spr).unwrap();
        let table = ForwardingTable::new(&rs, SuccessorChoice::PathWeighted);
        let ca = capabilities(vec![1.5; g.node_count()]);
        let sim = Simulation::new(&table, &ca, SimOptions::default()).unwrap();
        let mut state = TrafficState::new(g.node_count(), seed);
        for _ in 0..120 {
            let old: Vec<Vec<Packet>> = (0..g.node_count())
                .map(|v| state.queue(v).iter().copied().collect())
                .collect();
            sim.step(&mut state, rate);
            for (v, old) in old.iter().enumerate() {
                let new: Vec<Packet> = state.queue(v).iter().copied().collect();
                // Survivors are a suffix of the old queue and still lead the new one.
                let kept = (0..=old.len()).any(|k| {
                    let rest = &old[k..];
                    new.len() >= rest.len() && new[..rest.len()] == *rest
                });
                prop_assert!(kept, "node {} reordered its queue", v);
            }
        }
    }
}

#[test]
fn line_delivers_in_injection_order() {
    let n = 6;
    let g = Graph::new(n, (0..n - 1).map(|v| (v, v + 1))).unwrap();
    let rs = RoutingSystem::build(&g, RoutingAlgorithm::Spr).unwrap();
    let table = ForwardingTable::new(&rs, SuccessorChoice::PathWeighted);
    let ca = capabilities(vec![1.0; n]);
    let sim = Simulation::new(&table, &ca, SimOptions::default()).unwrap();
    let mut state = TrafficState::new(n, 1);
    for stamp in 0..8 {
        state.inject(
            0,
            Packet {
                destination: (n - 1) as u32,
                created: stamp,
            },
        );
    }
    for _ in 0..20 {
        sim.step(&mut state, 0.0);
        let order: Vec<u32> = (0..n)
            .rev()
            .flat_map(|v| state.queue(v).iter().map(|p| p.created))
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
    }
    assert_eq!(state.theta(), 0);
}

#[test]
fn generators_are_deterministic() {
    for family in Family::ALL {
        let n = if family.is_vertex_transitive() { 64 } else { 150 };
        let a = save_edge_list(&family.spec(n, 99).generate().unwrap());
        let b = save_edge_list(&family.spec(n, 99).generate().unwrap());
        assert_eq!(a, b, "{family}");
        if !family.is_vertex_transitive() {
            let c = save_edge_list(&family.spec(n, 100).generate().unwrap());
            assert_ne!(a, c, "{family}");
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let g = Family::Er.spec(120, 5).generate().unwrap();
    let rs = RoutingSystem::build(&g, RoutingAlgorithm::Spr).unwrap();
    let table = ForwardingTable::new(&rs, SuccessorChoice::PathWeighted);
    let profiles = Profiles::compute(&g).unwrap();
    let ca = assign_combo(&g, "uc-spr".parse().unwrap(), &profiles).unwrap();
    let sim = Simulation::new(&table, &ca, SimOptions::default()).unwrap();
    let cfg = EtaConfig {
        warmup: 300,
        delta_t: 50,
        windows: 6,
        record_series: true,
    };
    let a = sim.measure_eta(20.0, cfg, 4).unwrap();
    let b = sim.measure_eta(20.0, cfg, 4).unwrap();
    assert_eq!(a, b);
    let c = sim.measure_eta(20.0, cfg, 5).unwrap();
    assert_ne!(a.theta_series, c.theta_series);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let g = Family::Ba.spec(400, 3).generate().unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let p = Profiles::compute(&g).unwrap();
                (p.spr.values, p.efr.values, g.metrics().unwrap().avg_path_length)
            })
    };
    assert_eq!(run(1), run(4));
}
