//! Weighted roadmap graph and the generalized graph-based distance.
//!
//! Edge weights are the Euclidean lengths of their chords. The distance
//! between two arbitrary points `a` and `b` is
//!
//! ```text
//! d_G(a, b) = |a - v_a| + shortest_path(v_a, v_b) + |v_b - b|
//! ```
//!
//! where `v_a`, `v_b` are the nodes nearest to `a` and `b` (lowest index on
//! ties). Between two node positions it reduces to the shortest-path length.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::distill::RawGraph;
use crate::{Error, Result, WorldPoint};

/// Graphs with at least this many nodes get a bucket index for nearest-node queries.
const SPATIAL_INDEX_MIN_NODES: usize = 4096;

#[derive(Debug)]
pub struct RoadmapGraph {
    nodes: Vec<WorldPoint>,
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Single-source shortest-path tables, filled on first use.
    sssp: Vec<OnceLock<Arc<[f64]>>>,
    index: Option<BucketIndex>,
}

impl Clone for RoadmapGraph {
    fn clone(&self) -> Self {
        Self::from_parts(self.nodes.clone(), self.adjacency.clone())
    }
}

impl PartialEq for RoadmapGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.adjacency == other.adjacency
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<WorldPoint>,
    edges: Vec<(usize, usize, f64)>,
}

impl RoadmapGraph {
    fn from_parts(nodes: Vec<WorldPoint>, adjacency: Vec<Vec<(usize, f64)>>) -> Self {
        let index = (nodes.len() >= SPATIAL_INDEX_MIN_NODES).then(|| BucketIndex::new(&nodes));
        Self {
            sssp: (0..nodes.len()).map(|_| OnceLock::new()).collect(),
            nodes,
            adjacency,
            index,
        }
    }

    /// Build from nodes and undirected edges; weights are chord lengths.
    pub fn from_edges(nodes: Vec<WorldPoint>, edges: &[[usize; 2]]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        if let Some(p) = nodes.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGraph(format!("non-finite node position {p}")));
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &[a, b] in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if adjacency[a].iter().any(|&(n, _)| n == b) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            let w = nodes[a].distance(&nodes[b]);
            if w <= 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "nodes {a} and {b} coincide, edge would have zero weight"
                )));
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }
        let graph = Self::from_parts(nodes, adjacency);
        graph.check_connected()?;
        Ok(graph)
    }

    /// Build from nodes and explicitly weighted edges. Used for loading
    /// serialized graphs and for abstract test graphs.
    pub fn from_weighted_edges(
        nodes: Vec<WorldPoint>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b, w) in edges {
            if a >= nodes.len() || b >= nodes.len() || a == b {
                return Err(Error::InvalidGraph(format!("bad edge ({a}, {b})")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {w}")));
            }
            if adjacency[a].iter().any(|&(n, _)| n == b) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }
        let graph = Self::from_parts(nodes, adjacency);
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut stack = vec![0];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != self.nodes.len() {
            return Err(Error::InvalidGraph(format!(
                "graph is disconnected: {} of {} nodes reachable from node 0",
                count,
                self.nodes.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[WorldPoint] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> WorldPoint {
        self.nodes[v]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Each undirected edge once, as `(low, high, weight)` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Shortest-path lengths from `source` to every node. Cached per source.
    pub fn distances_from(&self, source: usize) -> Arc<[f64]> {
        self.table(source).clone()
    }

    fn table(&self, source: usize) -> &Arc<[f64]> {
        self.sssp[source].get_or_init(|| dijkstra(&self.adjacency, source).into())
    }

    /// Shortest-path length. Always read from the lower-indexed endpoint's
    /// table so that the value is bit-identical in both directions.
    pub fn shortest_path_length(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.table(u.min(v))[u.max(v)]
    }

    /// Index of the node closest to `p`; lowest index on ties.
    pub fn nearest_node(&self, p: WorldPoint) -> usize {
        match &self.index {
            Some(index) => index.nearest(&self.nodes, p),
            None => nearest_by_scan(&self.nodes, p),
        }
    }

    /// Generalized graph-based distance between two arbitrary points.
    pub fn generalized_distance(&self, a: WorldPoint, b: WorldPoint) -> f64 {
        let va = self.nearest_node(a);
        let vb = self.nearest_node(b);
        let hop_a = a.distance(&self.nodes[va]);
        let hop_b = self.nodes[vb].distance(&b);
        // Fixed summation order keeps d_G(a, b) == d_G(b, a) bit for bit.
        let (short, long) = if hop_a <= hop_b { (hop_a, hop_b) } else { (hop_b, hop_a) };
        short + self.shortest_path_length(va, vb) + long
    }

    /// A point prepared for repeated `d_G(node, point)` queries.
    pub fn anchor(&self, p: WorldPoint) -> Anchor<'_> {
        let nearest = self.nearest_node(p);
        Anchor {
            graph: self,
            point: p,
            nearest,
            hop: self.nodes[nearest].distance(&p),
        }
    }

    /// Fill every single-source table up front, in parallel.
    pub fn warm_all(&self) {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().for_each(|v| {
            self.table(v);
        });
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GraphDoc {
            nodes: self.nodes.clone(),
            edges: self.edges().collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        Self::from_weighted_edges(doc.nodes, &doc.edges)
    }
}

/// `d_G` from nodes to one fixed point.
#[derive(Debug, Clone)]
pub struct Anchor<'g> {
    graph: &'g RoadmapGraph,
    pub point: WorldPoint,
    pub nearest: usize,
    hop: f64,
}

impl Anchor<'_> {
    /// `d_G(node v, point)`. A node is its own nearest node, so this is
    /// `shortest_path(v, nearest) + |nearest - point|`, equal bit for bit to
    /// [`RoadmapGraph::generalized_distance`] at the node's position.
    #[inline]
    pub fn distance_to_node(&self, v: usize) -> f64 {
        self.graph.shortest_path_length(v, self.nearest) + self.hop
    }
}

/// Apply the map-origin offset to a raw skeleton graph and weight its edges.
pub fn finalize_graph(raw: &RawGraph, origin: WorldPoint) -> Result<RoadmapGraph> {
    raw.validate()?;
    let nodes = raw.nodes.iter().map(|p| p.offset(origin)).collect();
    RoadmapGraph::from_edges(nodes, &raw.edges)
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State { cost: 0.0, node: source });
    while let Some(State { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for &(next, w) in &adjacency[node] {
            let candidate = cost + w;
            if candidate < dist[next] {
                dist[next] = candidate;
                heap.push(State {
                    cost: candidate,
                    node: next,
                });
            }
        }
    }
    dist
}

fn nearest_by_scan(nodes: &[WorldPoint], p: WorldPoint) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, n) in nodes.iter().enumerate() {
        let d = n.distance_sq(&p);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Uniform bucket grid over the node bounding box.
#[derive(Debug)]
struct BucketIndex {
    min: WorldPoint,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl BucketIndex {
    fn new(nodes: &[WorldPoint]) -> Self {
        let (mut min, mut max) = (nodes[0], nodes[0]);
        for p in nodes {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        let span = (max.x - min.x).max(max.y - min.y).max(1e-9);
        let per_side = (nodes.len() as f64).sqrt().ceil().max(1.0);
        let cell = span / per_side;
        let cols = ((max.x - min.x) / cell).floor() as usize + 1;
        let rows = ((max.y - min.y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for (i, p) in nodes.iter().enumerate() {
            let (c, r) = Self::clamp_cell(min, cell, cols, rows, *p);
            buckets[r * cols + c].push(i);
        }
        Self {
            min,
            cell,
            cols,
            rows,
            buckets,
        }
    }

    fn clamp_cell(min: WorldPoint, cell: f64, cols: usize, rows: usize, p: WorldPoint) -> (usize, usize) {
        let c = ((p.x - min.x) / cell).floor().clamp(0.0, (cols - 1) as f64) as usize;
        let r = ((p.y - min.y) / cell).floor().clamp(0.0, (rows - 1) as f64) as usize;
        (c, r)
    }

    fn nearest(&self, nodes: &[WorldPoint], p: WorldPoint) -> usize {
        let (pc, pr) = Self::clamp_cell(self.min, self.cell, self.cols, self.rows, p);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            if best != usize::MAX {
                // Nodes in ring k are at least (k - 1) buckets away along one axis.
                let reach = (ring as f64 - 1.0).max(0.0) * self.cell;
                if reach * reach > best_d {
                    break;
                }
            }
            let (r0, r1) = (pr as isize - ring as isize, pr as isize + ring as isize);
            let (c0, c1) = (pc as isize - ring as isize, pc as isize + ring as isize);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    if r != r0 && r != r1 && c != c0 && c != c1 {
                        continue;
                    }
                    if r < 0 || c < 0 || r as usize >= self.rows || c as usize >= self.cols {
                        continue;
                    }
                    for &i in &self.buckets[r as usize * self.cols + c as usize] {
                        let d = nodes[i].distance_sq(&p);
                        if d < best_d || (d == best_d && i < best) {
                            best_d = d;
                            best = i;
                        }
                    }
                }
            }
        }
        best
    }
}
