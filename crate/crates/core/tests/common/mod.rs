#![allow(dead_code)]

use netdesign::seed;
use netdesign::{Graph, RoutingAlgorithm};
use rand::Rng;

/// Random connected graph: a random recursive tree plus extra edges with
/// probability `p`.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = seed::rng(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p && !edges.contains(&(u, v)) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub struct OracleProfile {
    pub values: Vec<f64>,
    pub avg_path_length: f64,
    /// Minimal path count per ordered pair, `counts[s][t]`.
    pub counts: Vec<Vec<u64>>,
}

/// Effective betweenness by listing every minimal path explicitly.
///
/// Minimal costs come from Floyd-Warshall over arc weights (the cost of
/// leaving the tail); paths are then enumerated by depth-first search that
/// only follows arcs lying on some minimal path.
pub fn brute_force(g: &Graph, algorithm: RoutingAlgorithm) -> OracleProfile {
    let n = g.node_count();
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in g.neighbors(u) {
            row[v as usize] = algorithm.step_cost(g, u);
        }
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

    let mut values = vec![0.0; n];
    let mut counts = vec![vec![0u64; n]; n];
    let mut hop_sum = 0.0;
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let mut paths = Vec::new();
            let mut path = vec![s];
            walk(g, algorithm, &d, t, 0, &mut path, &mut paths);
            assert!(!paths.is_empty());
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                assert_eq!(algorithm.path_cost(g, p), d[s][t]);
                for &v in p {
                    values[v] += share;
                }
                hop_sum += (p.len() - 1) as f64 * share;
            }
            counts[s][t] = paths.len() as u64;
        }
    }
    OracleProfile {
        values,
        avg_path_length: hop_sum / (n * (n - 1)) as f64,
        counts,
    }
}

fn walk(
    g: &Graph,
    algorithm: RoutingAlgorithm,
    d: &[Vec<u64>],
    t: usize,
    cost: u64,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let v = *path.last().unwrap();
    if v == t {
        out.push(path.clone());
        return;
    }
    let s = path[0];
    let next_cost = cost + algorithm.step_cost(g, v);
    for &w in g.neighbors(v) {
        let w = w as usize;
        if path.contains(&w) || next_cost + d[w][t] != d[s][t] {
            continue;
        }
        path.push(w);
        walk(g, algorithm, d, t, next_cost, path, out);
        path.pop();
    }
}
