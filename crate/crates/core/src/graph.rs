//! Undirected simple graphs over dense node ids `0..N`.
//!
//! A [`Graph`] is immutable once built. Construction rejects self-loops,
//! duplicate edges and out-of-range ids, so every graph in the toolkit
//! satisfies `sum(degree) == 2M` and has a symmetric adjacency.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Node identifier. Ids are dense, `0..node_count`.
pub type NodeId = u32;

const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

/// Hop-count distance summary of a connected graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphMetrics {
    /// Largest BFS distance over all pairs.
    pub diameter: u32,
    /// Mean BFS distance over ordered pairs `u != v`.
    pub avg_path_length: f64,
}

impl Graph {
    /// Builds a graph with `node_count` nodes from an edge list.
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count == 0 {
            return Err(Error::Input("graph needs at least one node".into()));
        }
        if node_count > u32::MAX as usize - 1 {
            return Err(Error::Input(format!("too many nodes: {node_count}")));
        }
        let mut adj = vec![Vec::new(); node_count];
        let mut seen = HashSet::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::Input(format!("duplicate edge ({u}, {v})")));
            }
            adj[u].push(v as NodeId);
            adj[v].push(u as NodeId);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            adj,
            edge_count: seen.len(),
        })
    }

    /// Builds from adjacency sets the caller already keeps simple and symmetric.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<NodeId>>) -> Self {
        let mut degree_sum = 0;
        for list in &mut adj {
            list.sort_unstable();
            degree_sum += list.len();
        }
        debug_assert!(degree_sum % 2 == 0);
        debug_assert!(adj.iter().enumerate().all(|(u, list)| {
            list.windows(2).all(|w| w[0] < w[1])
                && list
                    .iter()
                    .all(|&v| v as usize != u && adj[v as usize].binary_search(&(u as NodeId)).is_ok())
        }));
        Graph {
            adj,
            edge_count: degree_sum / 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Degree of `v`, or an input error for an unknown node.
    pub fn degree(&self, v: usize) -> Result<usize> {
        self.adj
            .get(v)
            .map(Vec::len)
            .ok_or_else(|| Error::Input(format!("node {v} out of range for {} nodes", self.node_count())))
    }

    /// Degrees of all nodes, indexed by node id.
    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `2M / N`.
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    /// Sorted neighbours of `v`. Panics on an out-of-range id.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adj[u].binary_search(&(v as NodeId)).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// BFS hop distances from `source`; `u32::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.node_count()];
        let mut queue = VecDeque::with_capacity(self.node_count());
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &w in &self.adj[u] {
                let w = w as usize;
                if dist[w] == UNREACHED {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|&d| d != UNREACHED)
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.node_count()];
        let mut out = Vec::new();
        for start in 0..self.node_count() {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut i = 0;
            while i < members.len() {
                let u = members[i];
                i += 1;
                for &w in &self.adj[u] {
                    if label[w as usize] == usize::MAX {
                        label[w as usize] = id;
                        members.push(w as usize);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Diameter and average shortest path length.
    ///
    /// Runs one BFS per source; sums are exact integers, so the result does
    /// not depend on how the sources are scheduled across threads.
    pub fn metrics(&self) -> Result<GraphMetrics> {
        let n = self.node_count();
        if n < 2 {
            return Err(Error::Input("metrics need at least two nodes".into()));
        }
        let per_source: Vec<Option<(u64, u32)>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let dist = self.bfs_distances(s);
                let mut sum = 0u64;
                let mut max = 0u32;
                for &d in &dist {
                    if d == UNREACHED {
                        return None;
                    }
                    sum += d as u64;
                    max = max.max(d);
                }
                Some((sum, max))
            })
            .collect();
        let mut total = 0u64;
        let mut diameter = 0u32;
        for entry in per_source {
            let (sum, max) = entry.ok_or(Error::NotConnected)?;
            total += sum;
            diameter = diameter.max(max);
        }
        Ok(GraphMetrics {
            diameter,
            avg_path_length: total as f64 / (n as f64 * (n as f64 - 1.0)),
        })
    }
}

/// Parses the whitespace-separated `u v` edge-list format.
///
/// Blank lines and lines starting with `#` are skipped. The node count is one
/// more than the largest id seen.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut max_id = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected two node ids, got {line:?}")));
        };
        let u: u32 = a
            .parse()
            .map_err(|_| parse_err(format!("bad node id {a:?}")))?;
        let v: u32 = b
            .parse()
            .map_err(|_| parse_err(format!("bad node id {b:?}")))?;
        if u == v {
            return Err(parse_err(format!("self-loop at node {u}")));
        }
        if u == u32::MAX || v == u32::MAX {
            return Err(parse_err("node id too large".into()));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(format!("duplicate edge {u} {v}")));
        }
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u as usize, v as usize));
    }
    let max_id = max_id.ok_or(Error::Parse {
        line: 0,
        message: "edge list contains no edges".into(),
    })?;
    Graph::new(max_id as usize + 1, edges)
}

/// Writes one `u v` line per edge with `u < v`, sorted.
pub fn save_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(g.edge_count() * 10);
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
