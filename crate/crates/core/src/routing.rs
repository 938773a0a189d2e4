//! Topology-based routing: candidate-path DAGs, path counts and effective
//! betweenness.
//!
//! For each destination `t` the candidate paths of an algorithm form a DAG
//! whose arcs point from `v` to every neighbour `w` with
//! `cost(w) + step(v) == cost(v)`. Shortest-path routing uses `step(v) = 1`;
//! efficient routing uses `step(v) = degree(v)`, so a path `v0..vk` costs the
//! degree sum of every node except the destination.
//!
//! DAGs are built one destination at a time and dropped after use; only the
//! per-node betweenness accumulator is kept across destinations.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed::Rng;

const DESTINATION_CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutingAlgorithm {
    /// Hop-count minimal paths.
    Spr,
    /// Paths minimising the degree sum of all nodes but the destination.
    Efr,
}

impl RoutingAlgorithm {
    pub const ALL: [RoutingAlgorithm; 2] = [RoutingAlgorithm::Spr, RoutingAlgorithm::Efr];

    pub fn name(self) -> &'static str {
        match self {
            RoutingAlgorithm::Spr => "spr",
            RoutingAlgorithm::Efr => "efr",
        }
    }

    /// Cost charged when a path leaves `v`.
    #[inline]
    pub fn step_cost(self, g: &Graph, v: usize) -> u64 {
        match self {
            RoutingAlgorithm::Spr => 1,
            RoutingAlgorithm::Efr => g.neighbors(v).len() as u64,
        }
    }

    /// Cost of an explicit node path under this algorithm.
    pub fn path_cost(self, g: &Graph, path: &[usize]) -> u64 {
        match path.split_last() {
            Some((_, body)) => body.iter().map(|&v| self.step_cost(g, v)).sum(),
            None => 0,
        }
    }
}

impl fmt::Display for RoutingAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoutingAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spr" => Ok(RoutingAlgorithm::Spr),
            "efr" => Ok(RoutingAlgorithm::Efr),
            other => Err(Error::Input(format!("unknown routing algorithm {other:?}"))),
        }
    }
}

/// Minimal-path counts toward one destination. Counts live in `u128` until
/// an addition overflows, then the whole destination is recounted with
/// arbitrary precision.
#[derive(Debug, Clone)]
enum PathCounts {
    Narrow(Vec<u128>),
    Wide(Vec<BigUint>),
}

/// Candidate-path DAG toward a single destination.
#[derive(Debug, Clone)]
pub struct DestinationDag {
    target: usize,
    cost: Vec<u64>,
    order: Vec<NodeId>,
    succ_start: Vec<u32>,
    succ: Vec<NodeId>,
    counts: PathCounts,
}

impl DestinationDag {
    fn build(g: &Graph, algorithm: RoutingAlgorithm, target: usize) -> Self {
        let n = g.node_count();
        let (cost, order) = match algorithm {
            RoutingAlgorithm::Spr => bfs_costs(g, target),
            RoutingAlgorithm::Efr => dijkstra_costs(g, algorithm, target),
        };

        let mut succ_start = Vec::with_capacity(n + 1);
        let mut succ = Vec::with_capacity(g.edge_count());
        for v in 0..n {
            succ_start.push(succ.len() as u32);
            if v == target {
                continue;
            }
            let step = algorithm.step_cost(g, v);
            succ.extend(
                g.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&w| cost[w as usize] + step == cost[v]),
            );
        }
        succ_start.push(succ.len() as u32);

        let mut dag = DestinationDag {
            target,
            cost,
            order,
            succ_start,
            succ,
            counts: PathCounts::Narrow(Vec::new()),
        };
        dag.counts = dag.count_paths();
        dag
    }

    fn count_paths(&self) -> PathCounts {
        let n = self.cost.len();
        let mut narrow = vec![0u128; n];
        narrow[self.target] = 1;
        let mut overflow = false;
        'outer: for &v in &self.order[1..] {
            let v = v as usize;
            let mut acc = 0u128;
            for &w in self.successors(v) {
                match acc.checked_add(narrow[w as usize]) {
                    Some(x) => acc = x,
                    None => {
                        overflow = true;
                        break 'outer;
                    }
                }
            }
            narrow[v] = acc;
        }
        if !overflow {
            return PathCounts::Narrow(narrow);
        }
        let mut wide = vec![BigUint::zero(); n];
        wide[self.target] = BigUint::from(1u32);
        for &v in &self.order[1..] {
            let v = v as usize;
            let mut acc = BigUint::zero();
            for &w in self.successors(v) {
                acc += &wide[w as usize];
            }
            wide[v] = acc;
        }
        PathCounts::Wide(wide)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Minimal cost from `v` to the destination.
    pub fn cost(&self, v: usize) -> u64 {
        self.cost[v]
    }

    /// Nodes in non-decreasing cost order, starting with the destination.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    #[inline]
    pub fn successors(&self, v: usize) -> &[NodeId] {
        &self.succ[self.succ_start[v] as usize..self.succ_start[v + 1] as usize]
    }

    /// Number of candidate paths from `v` to the destination.
    pub fn path_count(&self, v: usize) -> BigUint {
        match &self.counts {
            PathCounts::Narrow(c) => BigUint::from(c[v]),
            PathCounts::Wide(c) => c[v].clone(),
        }
    }

    /// True when counts had to leave `u128`.
    pub fn uses_wide_counts(&self) -> bool {
        matches!(self.counts, PathCounts::Wide(_))
    }

    /// `σ(w) / σ(v)`: the share of `v`'s candidate paths that continue via `w`.
    #[inline]
    pub fn share(&self, w: usize, v: usize) -> f64 {
        match &self.counts {
            PathCounts::Narrow(c) => c[w] as f64 / c[v] as f64,
            PathCounts::Wide(c) => big_ratio(&c[w], &c[v]),
        }
    }
}

fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(1000);
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

fn bfs_costs(g: &Graph, target: usize) -> (Vec<u64>, Vec<NodeId>) {
    let n = g.node_count();
    let mut cost = vec![u64::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    cost[target] = 0;
    queue.push_back(target);
    while let Some(u) = queue.pop_front() {
        order.push(u as NodeId);
        for &w in g.neighbors(u) {
            let w = w as usize;
            if cost[w] == u64::MAX {
                cost[w] = cost[u] + 1;
                queue.push_back(w);
            }
        }
    }
    (cost, order)
}

fn dijkstra_costs(g: &Graph, algorithm: RoutingAlgorithm, target: usize) -> (Vec<u64>, Vec<NodeId>) {
    let n = g.node_count();
    let mut cost = vec![u64::MAX; n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    cost[target] = 0;
    heap.push(Reverse((0u64, target as NodeId)));
    while let Some(Reverse((c, u))) = heap.pop() {
        let u = u as usize;
        if settled[u] || c > cost[u] {
            continue;
        }
        settled[u] = true;
        order.push(u as NodeId);
        for &v in g.neighbors(u) {
            let v = v as usize;
            if settled[v] {
                continue;
            }
            let cand = c + algorithm.step_cost(g, v);
            if cand < cost[v] {
                cost[v] = cand;
                heap.push(Reverse((cand, v as NodeId)));
            }
        }
    }
    (cost, order)
}

/// A routing algorithm bound to a connected graph.
#[derive(Debug, Clone, Copy)]
pub struct RoutingSystem<'g> {
    graph: &'g Graph,
    algorithm: RoutingAlgorithm,
}

impl<'g> RoutingSystem<'g> {
    pub fn build(graph: &'g Graph, algorithm: RoutingAlgorithm) -> Result<Self> {
        if graph.node_count() < 2 {
            return Err(Error::Input("routing needs at least two nodes".into()));
        }
        if !graph.is_connected() {
            return Err(Error::NotConnected);
        }
        Ok(RoutingSystem { graph, algorithm })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn algorithm(&self) -> RoutingAlgorithm {
        self.algorithm
    }

    /// Candidate-path DAG toward `target`.
    pub fn destination(&self, target: usize) -> DestinationDag {
        DestinationDag::build(self.graph, self.algorithm, target)
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v < self.graph.node_count() {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "node {v} out of range for {} nodes",
                self.graph.node_count()
            )))
        }
    }

    /// Number of candidate paths from `u` to `v`.
    pub fn path_count(&self, u: usize, v: usize) -> Result<BigUint> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::Input("path count needs distinct endpoints".into()));
        }
        Ok(self.destination(v).path_count(u))
    }

    /// Next-hop probabilities from `v` toward `t`, weighted so a hop-by-hop
    /// walk picks uniformly among all candidate paths.
    pub fn next_hop_distribution(&self, v: usize, t: usize) -> Result<Vec<(NodeId, f64)>> {
        self.check_node(v)?;
        self.check_node(t)?;
        if v == t {
            return Err(Error::Input("next hop needs v != t".into()));
        }
        let dag = self.destination(t);
        Ok(dag
            .successors(v)
            .iter()
            .map(|&w| (w, dag.share(w as usize, v)))
            .collect())
    }

    /// Effective betweenness of every node, endpoints included.
    ///
    /// Per destination, each source injects one unit that splits over the
    /// DAG in proportion to downstream path counts; a node's share of all
    /// flows (its own injections and the destination's inflow included) is
    /// its betweenness. Destinations are processed in fixed-size chunks
    /// reduced in order, so the result is independent of thread count.
    pub fn effective_betweenness(&self) -> BetweennessProfile {
        let n = self.graph.node_count();
        let chunks: Vec<(Vec<f64>, f64)> = (0..n.div_ceil(DESTINATION_CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut b = vec![0.0; n];
                let mut hops_total = 0.0;
                let mut flow = vec![0.0; n];
                let mut hops = vec![0.0; n];
                let lo = chunk * DESTINATION_CHUNK;
                for t in lo..(lo + DESTINATION_CHUNK).min(n) {
                    let dag = self.destination(t);
                    hops_total += accumulate(&dag, &mut flow, &mut hops);
                    for (acc, f) in b.iter_mut().zip(&flow) {
                        *acc += f;
                    }
                }
                (b, hops_total)
            })
            .collect();

        let mut values = vec![0.0; n];
        let mut hops_total = 0.0;
        for (b, h) in chunks {
            for (acc, x) in values.iter_mut().zip(&b) {
                *acc += x;
            }
            hops_total += h;
        }
        BetweennessProfile::new(self.algorithm, values, hops_total / (n as f64 * (n as f64 - 1.0)))
    }
}

/// Fills `flow` with one destination's betweenness contributions and returns
/// the summed expected hop count over all sources.
fn accumulate(dag: &DestinationDag, flow: &mut [f64], hops: &mut [f64]) -> f64 {
    let t = dag.target();
    flow.iter_mut().for_each(|f| *f = 1.0);
    flow[t] = 0.0;
    for &v in dag.order()[1..].iter().rev() {
        let v = v as usize;
        let out = flow[v];
        for &w in dag.successors(v) {
            flow[w as usize] += out * dag.share(w as usize, v);
        }
    }
    hops[t] = 0.0;
    let mut total = 0.0;
    for &v in &dag.order()[1..] {
        let v = v as usize;
        let mut h = 1.0;
        for &w in dag.successors(v) {
            h += dag.share(w as usize, v) * hops[w as usize];
        }
        hops[v] = h;
        total += h;
    }
    total
}

/// Effective betweenness of every node under one routing algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetweennessProfile {
    pub algorithm: RoutingAlgorithm,
    /// `B(i)` per node, endpoints included, so `B(i) >= 2(N-1)`.
    pub values: Vec<f64>,
    pub b_max: f64,
    /// Lowest-id node attaining `b_max`.
    pub argmax: usize,
    /// Mean hop length of candidate paths, uniform over paths per ordered pair.
    pub avg_path_length: f64,
}

impl BetweennessProfile {
    pub fn new(algorithm: RoutingAlgorithm, values: Vec<f64>, avg_path_length: f64) -> Self {
        let (argmax, b_max) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best });
        BetweennessProfile {
            algorithm,
            values,
            b_max,
            argmax,
            avg_path_length,
        }
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// How a packet picks among candidate successors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessorChoice {
    /// Weight each successor by its downstream path count, giving a uniform
    /// choice over whole candidate paths.
    #[default]
    PathWeighted,
    /// Pick a successor uniformly, ignoring downstream multiplicity.
    Uniform,
}

/// All next-hop tables materialised for fast sampling during simulation.
#[derive(Debug, Clone)]
pub struct ForwardingTable {
    n: usize,
    algorithm: RoutingAlgorithm,
    /// `start[t * n + v]..start[t * n + v + 1]` indexes `next` and `cumulative`.
    start: Vec<u32>,
    next: Vec<NodeId>,
    cumulative: Vec<f64>,
}

impl ForwardingTable {
    pub fn new(rs: &RoutingSystem<'_>, choice: SuccessorChoice) -> Self {
        let n = rs.graph().node_count();
        let per_dest: Vec<(Vec<u32>, Vec<NodeId>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|t| {
                let dag = rs.destination(t);
                let mut lens = Vec::with_capacity(n);
                let mut next = Vec::new();
                let mut cumulative = Vec::new();
                for v in 0..n {
                    let succ = dag.successors(v);
                    lens.push(succ.len() as u32);
                    let mut acc = 0.0;
                    for (k, &w) in succ.iter().enumerate() {
                        acc += match choice {
                            SuccessorChoice::PathWeighted => dag.share(w as usize, v),
                            SuccessorChoice::Uniform => 1.0 / succ.len() as f64,
                        };
                        next.push(w);
                        cumulative.push(if k + 1 == succ.len() { 1.0 } else { acc });
                    }
                }
                (lens, next, cumulative)
            })
            .collect();

        let total: usize = per_dest.iter().map(|d| d.1.len()).sum();
        assert!(total < u32::MAX as usize, "forwarding table too large");
        let mut start = Vec::with_capacity(n * n + 1);
        let mut next = Vec::with_capacity(total);
        let mut cumulative = Vec::with_capacity(total);
        for (lens, nx, cu) in per_dest {
            let mut pos = next.len() as u32;
            for len in lens {
                start.push(pos);
                pos += len;
            }
            next.extend(nx);
            cumulative.extend(cu);
        }
        start.push(next.len() as u32);
        ForwardingTable {
            n,
            algorithm: rs.algorithm(),
            start,
            next,
            cumulative,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn algorithm(&self) -> RoutingAlgorithm {
        self.algorithm
    }

    /// Successors of `v` toward `t` with cumulative probabilities.
    pub fn entries(&self, v: usize, t: usize) -> (&[NodeId], &[f64]) {
        let i = t * self.n + v;
        let range = self.start[i] as usize..self.start[i + 1] as usize;
        (&self.next[range.clone()], &self.cumulative[range])
    }

    /// Draws the next hop from `v` toward `t`. A lone successor consumes no
    /// randomness.
    #[inline]
    pub fn sample(&self, v: usize, t: usize, rng: &mut Rng) -> NodeId {
        let (next, cumulative) = self.entries(v, t);
        debug_assert!(!next.is_empty(), "no successor from {v} toward {t}");
        if next.len() == 1 {
            return next[0];
        }
        let r: f64 = rng.gen();
        let k = cumulative.partition_point(|&c| c <= r).min(next.len() - 1);
        next[k]
    }
}
