//! Seedable generators for the seven benchmark topologies.
//!
//! Every generator is a pure function of its parameters and seed. Randomised
//! families that must be connected (WS, ER, isolated-start BA) retry or repair with derived
//! sub-seeds, so identical [`GenSpec`]s always give identical graphs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed::{self, Rng};

/// Default bound on resampling attempts for families that must be connected.
pub const DEFAULT_MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ring,
    Lattice,
    Ws,
    Er,
    Ba,
    Pa,
    Hot,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Ba,
        Family::Pa,
        Family::Hot,
        Family::Er,
        Family::Ws,
        Family::Lattice,
        Family::Ring,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ring => "ring",
            Family::Lattice => "lattice",
            Family::Ws => "ws",
            Family::Er => "er",
            Family::Ba => "ba",
            Family::Pa => "pa",
            Family::Hot => "hot",
        }
    }

    /// Node count used by the benchmark tables.
    pub fn benchmark_size(self) -> usize {
        match self {
            Family::Ring | Family::Lattice => 1225,
            _ => 1200,
        }
    }

    /// True when the family is vertex-transitive, so every centrality-based
    /// capability scheme collapses to the uniform one.
    pub fn is_vertex_transitive(self) -> bool {
        matches!(self, Family::Ring | Family::Lattice)
    }

    /// Benchmark parameters scaled to `n` nodes: mean degree about 4 for
    /// every family, ER keeps the 2450-edges-per-1200-nodes density.
    pub fn spec(self, n: usize, seed: u64) -> GenSpec {
        let topology = match self {
            Family::Ring => Topology::Ring { n },
            Family::Lattice => {
                let side = (n as f64).sqrt().round().max(3.0) as usize;
                Topology::Lattice {
                    rows: side,
                    cols: side,
                }
            }
            Family::Ws => Topology::WattsStrogatz { n, rewire: 0.15 },
            Family::Er => Topology::ErdosRenyi {
                n,
                edges: (n as f64 * 2450.0 / 1200.0).round() as usize,
                connect: Connectivity::Repair,
            },
            Family::Ba => Topology::BarabasiAlbert {
                n,
                params: BaParams::benchmark(2),
            },
            Family::Pa => Topology::PreferentialAttachment { n, edges: 2 * n },
            Family::Hot => Topology::Hot {
                n,
                edges: 2 * n,
                core_size: HotParams::default().core_size,
            },
        };
        GenSpec { topology, seed }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ring" => Family::Ring,
            "lattice" => Family::Lattice,
            "ws" => Family::Ws,
            "er" => Family::Er,
            "ba" => Family::Ba,
            "pa" => Family::Pa,
            "hot" => Family::Hot,
            other => return Err(Error::Input(format!("unknown family {other:?}"))),
        })
    }
}

/// How the ER generator obtains a connected graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// Redraw the whole graph with a fresh sub-seed, bounded attempts.
    Resample,
    /// Join stray components to the largest one, each time dropping a
    /// uniformly chosen cycle edge so the edge count stays exact.
    Repair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Topology {
    Ring { n: usize },
    Lattice { rows: usize, cols: usize },
    #[serde(rename = "ws")]
    WattsStrogatz { n: usize, rewire: f64 },
    #[serde(rename = "er")]
    ErdosRenyi { n: usize, edges: usize, connect: Connectivity },
    #[serde(rename = "ba")]
    BarabasiAlbert { n: usize, params: BaParams },
    #[serde(rename = "pa")]
    PreferentialAttachment { n: usize, edges: usize },
    Hot { n: usize, edges: usize, core_size: usize },
}

impl Topology {
    pub fn family(&self) -> Family {
        match self {
            Topology::Ring { .. } => Family::Ring,
            Topology::Lattice { .. } => Family::Lattice,
            Topology::WattsStrogatz { .. } => Family::Ws,
            Topology::ErdosRenyi { .. } => Family::Er,
            Topology::BarabasiAlbert { .. } => Family::Ba,
            Topology::PreferentialAttachment { .. } => Family::Pa,
            Topology::Hot { .. } => Family::Hot,
        }
    }
}

/// A fully specified, reproducible generation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub topology: Topology,
    pub seed: u64,
}

impl GenSpec {
    pub fn generate(&self) -> Result<Graph> {
        let seed = self.seed;
        match self.topology {
            Topology::Ring { n } => gen_ring(n),
            Topology::Lattice { rows, cols } => gen_lattice(rows, cols),
            Topology::WattsStrogatz { n, rewire } => gen_ws(n, rewire, seed),
            Topology::ErdosRenyi { n, edges, connect } => gen_er(n, edges, connect, seed),
            Topology::BarabasiAlbert { n, params } => gen_ba_with(n, params, seed),
            Topology::PreferentialAttachment { n, edges } => gen_pa(n, edges, seed),
            Topology::Hot {
                n,
                edges,
                core_size,
            } => gen_hot(n, edges, HotParams { core_size }, seed),
        }
    }
}

/// Mutable simple-graph accumulator used while generating.
struct Builder {
    n: usize,
    edges: HashSet<(NodeId, NodeId)>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            n,
            edges: HashSet::new(),
        }
    }

    fn key(u: usize, v: usize) -> (NodeId, NodeId) {
        (u.min(v) as NodeId, u.max(v) as NodeId)
    }

    fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&Self::key(u, v))
    }

    /// Adds `u–v` unless it is a self-loop or already present.
    fn add(&mut self, u: usize, v: usize) -> bool {
        u != v && self.edges.insert(Self::key(u, v))
    }

    fn remove(&mut self, u: usize, v: usize) -> bool {
        self.edges.remove(&Self::key(u, v))
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    fn build(&self) -> Graph {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Graph::from_adjacency(adj)
    }
}

/// Ring where node `i` links to `i±1` and `i±2` (mod n).
pub fn gen_ring(n: usize) -> Result<Graph> {
    if n < 5 {
        return Err(Error::Parameter(format!("ring needs n >= 5, got {n}")));
    }
    Graph::new(n, ring_edges(n))
}

fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| [(i, (i + 1) % n), (i, (i + 2) % n)])
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    edges.sort_unstable();
    edges
}

/// Toroidal `rows × cols` grid; node `(r, c)` has id `r * cols + c`.
pub fn gen_lattice(rows: usize, cols: usize) -> Result<Graph> {
    if rows < 3 || cols < 3 {
        return Err(Error::Parameter(format!(
            "lattice needs rows, cols >= 3, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let edges = (0..rows).flat_map(|r| {
        (0..cols).flat_map(move |c| [(id(r, c), id(r, (c + 1) % cols)), (id(r, c), id((r + 1) % rows, c))])
    });
    Graph::new(rows * cols, edges)
}

/// Ring with a fraction of its edges rewired.
///
/// `round(rewire * 2n)` distinct ring edges are picked; each keeps one
/// uniformly chosen endpoint and moves the other to a uniform random node,
/// redrawing on self-loops and duplicates. Disconnected results are
/// regenerated from a derived seed.
pub fn gen_ws(n: usize, rewire: f64, seed: u64) -> Result<Graph> {
    if n < 5 {
        return Err(Error::Parameter(format!("ws needs n >= 5, got {n}")));
    }
    if !(0.0..=1.0).contains(&rewire) {
        return Err(Error::Parameter(format!("rewire fraction {rewire} not in [0, 1]")));
    }
    let base = ring_edges(n);
    let count = (rewire * base.len() as f64).round() as usize;
    let mut last = String::new();
    for attempt in 0..DEFAULT_MAX_ATTEMPTS {
        let mut rng = seed::rng(seed::derive(seed, attempt as u64));
        match rewire_once(n, &base, count, &mut rng) {
            Ok(b) => {
                let g = b.build();
                if g.is_connected() {
                    return Ok(g);
                }
                last = "rewired ring not connected".into();
            }
            Err(msg) => last = msg,
        }
    }
    Err(Error::Generation {
        attempts: DEFAULT_MAX_ATTEMPTS,
        message: last,
    })
}

fn rewire_once(
    n: usize,
    base: &[(usize, usize)],
    count: usize,
    rng: &mut Rng,
) -> std::result::Result<Builder, String> {
    let mut b = Builder::new(n);
    for &(u, v) in base {
        b.add(u, v);
    }
    let mut picked = index::sample(rng, base.len(), count).into_vec();
    picked.sort_unstable();
    for idx in picked {
        let (u, v) = base[idx];
        let (keep, dropped) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        b.remove(u, v);
        let mut placed = false;
        for _ in 0..64 * n {
            let w = rng.gen_range(0..n);
            if w != keep && w != dropped && !b.contains(keep, w) {
                b.add(keep, w);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(format!("no free endpoint for node {keep}"));
        }
    }
    Ok(b)
}

/// Uniform random graph with exactly `edges` edges, made connected by `connect`.
pub fn gen_er(n: usize, edges: usize, connect: Connectivity, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Parameter(format!("er needs n >= 2, got {n}")));
    }
    let max = n * (n - 1) / 2;
    if edges > max {
        return Err(Error::Parameter(format!(
            "er with {n} nodes holds at most {max} edges, asked {edges}"
        )));
    }
    if edges + 1 < n {
        return Err(Error::Parameter(format!(
            "{edges} edges cannot connect {n} nodes"
        )));
    }
    match connect {
        Connectivity::Resample => {
            for attempt in 0..DEFAULT_MAX_ATTEMPTS {
                let mut rng = seed::rng(seed::derive(seed, attempt as u64));
                let g = sample_gnm(n, edges, &mut rng).build();
                if g.is_connected() {
                    return Ok(g);
                }
            }
            Err(Error::Generation {
                attempts: DEFAULT_MAX_ATTEMPTS,
                message: format!("G({n}, {edges}) never connected"),
            })
        }
        Connectivity::Repair => {
            let mut rng = seed::rng(seed::derive(seed, 0));
            let mut b = sample_gnm(n, edges, &mut rng);
            repair_connectivity(&mut b, &mut rng);
            Ok(b.build())
        }
    }
}

fn sample_gnm(n: usize, edges: usize, rng: &mut Rng) -> Builder {
    // Row u holds pairs (u, u+1..n); offsets[u] is the index of (u, u+1).
    let offsets: Vec<usize> = (0..n).scan(0usize, |acc, u| {
        let start = *acc;
        *acc += n - 1 - u;
        Some(start)
    }).collect();
    let total = n * (n - 1) / 2;
    let mut b = Builder::new(n);
    let mut picked = index::sample(rng, total, edges).into_vec();
    picked.sort_unstable();
    for k in picked {
        let u = offsets.partition_point(|&o| o <= k) - 1;
        let v = u + 1 + (k - offsets[u]);
        b.add(u, v);
    }
    b
}

fn repair_connectivity(b: &mut Builder, rng: &mut Rng) {
    loop {
        let g = b.build();
        let comps = g.components();
        if comps.len() <= 1 {
            return;
        }
        let giant = (0..comps.len())
            .max_by_key(|&i| (comps[i].len(), std::cmp::Reverse(i)))
            .unwrap();
        let stray = (0..comps.len()).find(|&i| i != giant).unwrap();
        let a = *comps[stray].choose(rng).unwrap();
        let z = *comps[giant].choose(rng).unwrap();
        b.add(a, z);

        let g = b.build();
        let bridges = bridges(&g);
        let removable: Vec<(usize, usize)> = g
            .edges()
            .filter(|&(u, v)| !bridges.contains(&(u as NodeId, v as NodeId)))
            .collect();
        // A spanning structure with at least N edges always has a cycle.
        let &(u, v) = removable.choose(rng).expect("cycle edge exists");
        b.remove(u, v);
    }
}

/// Bridges as `(u, v)` with `u < v`, via iterative Tarjan low-link.
fn bridges(g: &Graph) -> HashSet<(NodeId, NodeId)> {
    let n = g.node_count();
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut out = HashSet::new();
    let mut time = 0u32;
    // (node, parent, next neighbour index)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != u32::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(frame) = stack.last_mut() {
            let (u, parent, i) = *frame;
            if let Some(&w) = g.neighbors(u).get(i) {
                frame.2 += 1;
                let w = w as usize;
                if w == parent {
                    continue;
                }
                if disc[w] == u32::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, u, 0));
                } else {
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        out.insert((parent.min(u) as NodeId, parent.max(u) as NodeId));
                    }
                }
            }
        }
    }
    out
}

/// Seed graph of the BA growth process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BaStart {
    /// Complete graph on `m + 1` nodes.
    #[default]
    Clique,
    /// `nodes` nodes without edges; needs a positive attachment offset.
    Isolated { nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaParams {
    /// Edges brought by each new node.
    pub m: usize,
    pub start: BaStart,
    /// Attachment weight of a node is its degree plus this offset.
    pub offset: usize,
}

impl BaParams {
    /// Clique seed, attachment proportional to degree.
    pub fn standard(m: usize) -> Self {
        BaParams {
            m,
            start: BaStart::Clique,
            offset: 0,
        }
    }

    /// Five isolated seed nodes, attachment proportional to degree plus one.
    /// Matches the benchmark BA instances: `M = 2(N - 5)`, hubs near 60
    /// edges and `L` near 4.4 at `N = 1200`.
    pub fn benchmark(m: usize) -> Self {
        BaParams {
            m,
            start: BaStart::Isolated { nodes: 5 },
            offset: 1,
        }
    }
}

/// Preferential attachment growth from an `(m+1)`-clique, `m` distinct
/// degree-proportional targets per new node.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    gen_ba_with(n, BaParams::standard(m), seed)
}

/// Preferential attachment growth: every new node links to `m` distinct
/// existing nodes, each drawn with weight `degree + offset`.
///
/// An isolated seed node can stay unchosen; such draws are repeated with
/// fresh sub-seeds.
pub fn gen_ba_with(n: usize, params: BaParams, seed: u64) -> Result<Graph> {
    if params.m < 1 || n <= params.m {
        return Err(Error::Parameter(format!(
            "ba needs n > m >= 1, got n={n}, m={}",
            params.m
        )));
    }
    if let BaStart::Clique = params.start {
        return grow_ba(n, params, &mut seed::rng(seed));
    }
    for attempt in 0..DEFAULT_MAX_ATTEMPTS {
        let g = grow_ba(n, params, &mut seed::rng(seed::derive(seed, attempt as u64)))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Generation {
        attempts: DEFAULT_MAX_ATTEMPTS,
        message: "ba growth left a seed node isolated".into(),
    })
}

fn grow_ba(n: usize, params: BaParams, rng: &mut seed::Rng) -> Result<Graph> {
    let BaParams { m, start, offset } = params;
    let mut b = Builder::new(n);
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * n * m);
    let first = match start {
        BaStart::Clique => {
            for u in 0..=m {
                for v in u + 1..=m {
                    b.add(u, v);
                    endpoints.extend([u, v]);
                }
            }
            m + 1
        }
        BaStart::Isolated { nodes } => {
            if nodes < m || nodes >= n {
                return Err(Error::Parameter(format!(
                    "isolated ba seed needs m <= nodes < n, got {nodes}"
                )));
            }
            if offset == 0 {
                return Err(Error::Parameter(
                    "isolated ba seed needs a positive attachment offset".into(),
                ));
            }
            nodes
        }
    };
    let mut targets = Vec::with_capacity(m);
    for v in first..n {
        targets.clear();
        let uniform_weight = (offset * v) as f64;
        let total = uniform_weight + endpoints.len() as f64;
        while targets.len() < m {
            let t = if rng.gen::<f64>() * total < uniform_weight {
                rng.gen_range(0..v)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            b.add(v, t);
            endpoints.extend([v, t]);
        }
    }
    Ok(b.build())
}

/// Triangle seed, one degree-proportional edge per new node, then internal
/// edges with both endpoints drawn proportional to degree until the graph
/// holds `edges` edges.
pub fn gen_pa(n: usize, edges: usize, seed: u64) -> Result<Graph> {
    if n < 4 {
        return Err(Error::Parameter(format!("pa needs n >= 4, got {n}")));
    }
    let max = n * (n - 1) / 2;
    if edges < n || edges > max {
        return Err(Error::Parameter(format!(
            "pa with {n} nodes needs {n} <= edges <= {max}, got {edges}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut b = Builder::new(n);
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges);
    for (u, v) in [(0, 1), (0, 2), (1, 2)] {
        b.add(u, v);
        endpoints.extend([u, v]);
    }
    for v in 3..n {
        let t = endpoints[rng.gen_range(0..endpoints.len())];
        b.add(v, t);
        endpoints.extend([v, t]);
    }
    let budget = 1000 * edges;
    let mut tries = 0;
    while b.len() < edges {
        tries += 1;
        if tries > budget {
            return Err(Error::Generation {
                attempts: budget,
                message: format!("pa stalled at {} of {edges} edges", b.len()),
            });
        }
        let u = endpoints[rng.gen_range(0..endpoints.len())];
        let v = endpoints[rng.gen_range(0..endpoints.len())];
        if b.add(u, v) {
            endpoints.extend([u, v]);
        }
    }
    Ok(b.build())
}

/// Tiering knobs for the HOT generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HotParams {
    /// Number of low-degree core routers.
    pub core_size: usize,
}

impl Default for HotParams {
    fn default() -> Self {
        HotParams { core_size: 10 }
    }
}

/// A HOT graph together with the PA degree sequence it was shaped after.
#[derive(Debug, Clone)]
pub struct HotBuild {
    pub graph: Graph,
    /// Degree sequence of the source PA draw, sorted descending.
    pub source_degrees: Vec<usize>,
    /// Gateway ids are `0..gateways`.
    pub gateways: usize,
    /// Core ids follow the gateways.
    pub core: usize,
}

/// Three-tier router-level topology. See [`build_hot`].
pub fn gen_hot(n: usize, edges: usize, params: HotParams, seed: u64) -> Result<Graph> {
    build_hot(n, edges, params, seed).map(|h| h.graph)
}

/// Builds a HOT-style graph following the degree sequence of a PA draw.
///
/// The highest-degree nodes become gateways and each hangs off one core
/// router. The core is a ring with a few chords, staffed by nodes whose
/// drawn degree is about what that wiring gives them. Every other node joins
/// the access cluster of one gateway, with cluster sizes following the
/// gateways' degrees. Spare periphery degree is spent first on links inside
/// the cluster, then on extra uplinks to gateways with unused degree.
pub fn build_hot(n: usize, edges: usize, params: HotParams, seed: u64) -> Result<HotBuild> {
    if n < 20 {
        return Err(Error::Parameter(format!("hot needs n >= 20, got {n}")));
    }
    let source = gen_pa(n, edges, seed::derive(seed, 1))?;
    let mut degrees = source.degrees();
    degrees.sort_unstable_by(|a, b| b.cmp(a));

    let core = params.core_size.clamp(3, n / 4);
    let mut gateways = 0;
    let mut residual_sum = 0usize;
    while gateways < n - core - 1 {
        residual_sum += degrees[gateways].saturating_sub(1);
        gateways += 1;
        if residual_sum >= n - gateways - core {
            break;
        }
    }
    let periphery_start = gateways + core;
    let periphery_count = n - periphery_start;

    // Sequence positions staffing the core: the first run after the gateways
    // whose degree fits a ring node with its share of gateway uplinks.
    let core_degree = 3 + gateways.div_ceil(core);
    let core_from = (gateways..n - core)
        .find(|&i| degrees[i] <= core_degree)
        .unwrap_or(n - core);
    let periphery_degrees: Vec<usize> = (gateways..n)
        .filter(|i| !(core_from..core_from + core).contains(i))
        .map(|i| degrees[i])
        .collect();

    let mut rng = seed::rng(seed::derive(seed, 2));
    let mut b = Builder::new(n);

    let core_id = |i: usize| gateways + (i % core);
    for i in 0..core {
        b.add(core_id(i), core_id(i + 1));
    }
    for i in (0..core / 2).step_by(2) {
        b.add(core_id(i), core_id(i + core / 2));
    }
    for gw in 0..gateways {
        b.add(gw, core_id(gw));
    }

    // Cluster sizes proportional to gateway residual degree, largest remainder.
    let residual: Vec<usize> = degrees[..gateways].iter().map(|d| d.saturating_sub(1)).collect();
    let total: usize = residual.iter().sum::<usize>().max(1);
    let exact: Vec<f64> = residual
        .iter()
        .map(|&r| r as f64 * periphery_count as f64 / total as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut short = periphery_count - quota.iter().sum::<usize>();
    let mut by_fraction: Vec<usize> = (0..gateways).collect();
    by_fraction.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &g in by_fraction.iter().cycle() {
        if short == 0 {
            break;
        }
        quota[g] += 1;
        short -= 1;
    }

    // Periphery ids run in descending drawn degree; each goes to the cluster
    // with the most open places, so big-degree members land in big clusters.
    let mut clusters: Vec<Vec<usize>> = quota.iter().map(|&q| Vec::with_capacity(q)).collect();
    for p in periphery_start..n {
        let gw = (0..gateways)
            .max_by(|&x, &y| {
                let open = |g: usize| quota[g] - clusters[g].len();
                open(x).cmp(&open(y)).then(y.cmp(&x))
            })
            .expect("at least one gateway");
        clusters[gw].push(p);
    }
    let mut stubs = vec![0usize; n];
    for (gw, cluster) in clusters.iter().enumerate() {
        for &p in cluster {
            b.add(p, gw);
            stubs[p] = periphery_degrees[p - periphery_start].saturating_sub(1);
        }
        pair_cluster_stubs(&mut b, cluster, &mut stubs, &mut rng);
    }

    let mut spare: Vec<usize> = (0..gateways).map(|g| residual[g].saturating_sub(quota[g])).collect();
    for p in periphery_start..n {
        while stubs[p] > 0 {
            let pick = (0..gateways)
                .filter(|&g| spare[g] > 0 && !b.contains(p, g))
                .max_by(|&x, &y| spare[x].cmp(&spare[y]).then(y.cmp(&x)));
            let Some(g) = pick else { break };
            b.add(p, g);
            spare[g] -= 1;
            stubs[p] -= 1;
        }
    }

    let graph = b.build();
    debug_assert!(graph.is_connected());
    Ok(HotBuild {
        graph,
        source_degrees: degrees,
        gateways,
        core,
    })
}

const PAIRING_PASSES: usize = 20;

/// Pairs the free stubs of a cluster's members over shuffled passes.
/// Unpaired stubs stay in `stubs`.
fn pair_cluster_stubs(b: &mut Builder, cluster: &[usize], stubs: &mut [usize], rng: &mut Rng) {
    let mut pool: Vec<usize> = cluster
        .iter()
        .flat_map(|&p| std::iter::repeat_n(p, stubs[p]))
        .collect();
    for _ in 0..PAIRING_PASSES {
        pool.shuffle(rng);
        let mut left = Vec::new();
        for pair in pool.chunks(2) {
            match *pair {
                [u, v] if b.add(u, v) => {}
                [u, v] => left.extend([u, v]),
                [u] => left.push(u),
                _ => unreachable!(),
            }
        }
        pool = left;
        if pool.len() < 2 {
            break;
        }
    }
    for &p in cluster {
        stubs[p] = 0;
    }
    for p in pool {
        stubs[p] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_shapes() {
        let g = gen_ring(8).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert_eq!(g.edge_count(), 16);
        let k5 = gen_ring(5).unwrap();
        assert_eq!(k5.edge_count(), 10);
        assert!(matches!(gen_ring(4), Err(Error::Parameter(_))));
    }

    #[test]
    fn lattice_small() {
        let g = gen_lattice(3, 3).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert_eq!(g.metrics().unwrap().diameter, 2);
        assert!(gen_lattice(2, 5).is_err());
    }

    #[test]
    fn ws_zero_rewire_is_ring() {
        assert_eq!(gen_ws(30, 0.0, 9).unwrap(), gen_ring(30).unwrap());
        assert!(gen_ws(30, 1.5, 9).is_err());
    }

    #[test]
    fn ws_keeps_edge_count() {
        for seed in 0..5 {
            let g = gen_ws(200, 0.15, seed).unwrap();
            assert_eq!(g.edge_count(), 400);
            assert!(g.is_connected());
        }
    }

    #[test]
    fn er_exact_and_complete() {
        let k4 = gen_er(4, 6, Connectivity::Resample, 1).unwrap();
        assert_eq!(k4.edge_count(), 6);
        for seed in 0..3 {
            let g = gen_er(300, 612, Connectivity::Repair, seed).unwrap();
            assert_eq!(g.edge_count(), 612);
            assert!(g.is_connected());
        }
        assert!(gen_er(4, 7, Connectivity::Repair, 1).is_err());
        assert!(gen_er(10, 5, Connectivity::Repair, 1).is_err());
    }

    #[test]
    fn er_resample_reports_attempts() {
        // Far below the connectivity threshold.
        match gen_er(200, 199, Connectivity::Resample, 3) {
            Err(Error::Generation { attempts, .. }) => assert_eq!(attempts, DEFAULT_MAX_ATTEMPTS),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ba_edge_counts() {
        let g = gen_ba(3, 2, 1).unwrap();
        assert_eq!(g.edge_count(), 3);
        let g = gen_ba(100, 2, 1).unwrap();
        assert_eq!(g.edge_count(), 3 + 97 * 2);
        assert!(g.is_connected());
        assert!(gen_ba(2, 2, 0).is_err());
    }

    #[test]
    fn ba_isolated_start() {
        let g = gen_ba_with(300, BaParams::benchmark(2), 4).unwrap();
        assert_eq!(g.edge_count(), 2 * (300 - 5));
        assert!(g.is_connected());
        let no_offset = BaParams {
            offset: 0,
            ..BaParams::benchmark(2)
        };
        assert!(gen_ba_with(300, no_offset, 4).is_err());
    }

    #[test]
    fn pa_forced_counts() {
        let g = gen_pa(4, 5, 11).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert!(g.is_connected());
        assert!(gen_pa(10, 9, 0).is_err());
        assert!(gen_pa(10, 46, 0).is_err());
    }

    #[test]
    fn hot_connected_and_tiered() {
        let h = build_hot(200, 400, HotParams::default(), 5).unwrap();
        assert!(h.graph.is_connected());
        assert_eq!(h.graph.node_count(), 200);
        assert!(h.gateways >= 1);
        assert!(gen_hot(10, 20, HotParams::default(), 0).is_err());
    }

    #[test]
    fn bridges_on_path_and_cycle() {
        let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(bridges(&path).len(), 3);
        let cyc = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert!(bridges(&cyc).is_empty());
        let lollipop = Graph::new(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap();
        let b = bridges(&lollipop);
        assert_eq!(b, HashSet::from([(2, 3), (3, 4)]));
    }
}
