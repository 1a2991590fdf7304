//! Skeleton tracing into a sparse graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{RawGraph, Skeleton, SkeletonParams};
use crate::{Error, Result, WorldPoint};

const NONE: usize = usize::MAX;

/// Pixel adjacency over skeleton cells. Diagonal steps are dropped when the
/// two cells already share a 4-neighbor in the skeleton, so staircases do not
/// turn into triangles.
struct PixelGraph {
    /// Grid index of each pixel, ascending.
    cells: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl PixelGraph {
    fn new(skel: &Skeleton) -> Self {
        let (w, h) = (skel.width(), skel.height());
        let cells: Vec<usize> = (0..w * h).filter(|&i| skel.contains_index(i)).collect();
        let mut id = vec![NONE; w * h];
        for (p, &cell) in cells.iter().enumerate() {
            id[cell] = p;
        }
        let inside = |r: isize, c: isize| {
            r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && skel.contains(r as usize, c as usize)
        };
        let adjacency = cells
            .iter()
            .map(|&cell| {
                let (r, c) = ((cell / w) as isize, (cell % w) as isize);
                let mut nbrs = Vec::new();
                for dr in -1..=1isize {
                    for dc in -1..=1isize {
                        if (dr, dc) == (0, 0) || !inside(r + dr, c + dc) {
                            continue;
                        }
                        if dr != 0 && dc != 0 && (inside(r + dr, c) || inside(r, c + dc)) {
                            continue;
                        }
                        nbrs.push(id[(r + dr) as usize * w + (c + dc) as usize]);
                    }
                }
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Self { cells, adjacency }
    }

    /// Connected components as sorted pixel lists, in order of their lowest pixel.
    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.cells.len()];
        let mut out = Vec::new();
        for start in 0..self.cells.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut members = Vec::new();
            while let Some(p) = stack.pop() {
                members.push(p);
                for &q in &self.adjacency[p] {
                    if !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Chain {
    ends: [usize; 2],
    /// Grid indices along the trace, from `ends[0]` to `ends[1]`.
    cells: Vec<usize>,
}

impl Chain {
    fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }

    fn other(&self, node: usize) -> usize {
        if self.ends[0] == node {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    /// Cells oriented so the trace starts at `node`.
    fn cells_from(&self, node: usize) -> Vec<usize> {
        if self.ends[0] == node {
            self.cells.clone()
        } else {
            self.cells.iter().rev().copied().collect()
        }
    }
}

/// Junction/endpoint graph whose edges carry the traced skeleton cells.
struct Topology<'a> {
    skel: &'a Skeleton,
    node_cell: Vec<usize>,
    node_alive: Vec<bool>,
    chains: Vec<Option<Chain>>,
}

impl<'a> Topology<'a> {
    fn trace(skel: &'a Skeleton, pixels: &PixelGraph, members: &[usize]) -> Self {
        let degree = |p: usize| pixels.adjacency[p].len();
        let mut keys: Vec<usize> = members.iter().copied().filter(|&p| degree(p) != 2).collect();
        if keys.is_empty() {
            // A bare cycle: anchor it at its lowest cell.
            keys.push(members[0]);
        }
        let mut key_id = HashMap::new();
        for (i, &p) in keys.iter().enumerate() {
            key_id.insert(p, i);
        }

        let mut used = BTreeSet::new();
        let mut chains = Vec::new();
        for &start in &keys {
            for &first in &pixels.adjacency[start] {
                if used.contains(&(start.min(first), start.max(first))) {
                    continue;
                }
                used.insert((start.min(first), start.max(first)));
                let mut trace = vec![start, first];
                let (mut prev, mut cur) = (start, first);
                while !key_id.contains_key(&cur) {
                    let next = pixels.adjacency[cur]
                        .iter()
                        .copied()
                        .find(|&q| q != prev && !used.contains(&(cur.min(q), cur.max(q))))
                        .expect("degree-2 pixel has an unused continuation");
                    used.insert((cur.min(next), cur.max(next)));
                    trace.push(next);
                    prev = cur;
                    cur = next;
                }
                chains.push(Some(Chain {
                    ends: [key_id[&start], key_id[&cur]],
                    cells: trace.iter().map(|&p| pixels.cells[p]).collect(),
                }));
            }
        }

        Topology {
            skel,
            node_alive: vec![true; keys.len()],
            node_cell: keys.iter().map(|&p| pixels.cells[p]).collect(),
            chains,
        }
    }

    fn point(&self, cell: usize) -> WorldPoint {
        local_point(self.skel, cell)
    }

    fn arc_length(&self, cells: &[usize]) -> f64 {
        cells
            .windows(2)
            .map(|w| self.point(w[0]).distance(&self.point(w[1])))
            .sum()
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_cell.len()];
        for chain in self.chains.iter().flatten() {
            deg[chain.ends[0]] += 1;
            deg[chain.ends[1]] += 1;
        }
        deg
    }

    fn incident(&self, node: usize) -> Vec<usize> {
        self.chains
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().filter(|c| c.ends.contains(&node)).map(|_| i))
            .collect()
    }

    /// Merge junctions joined by branches shorter than `radius` into one node
    /// at the skeleton cell nearest their centroid.
    fn merge_crossings(&mut self, radius: f64, members: &[usize]) {
        let deg = self.degrees();
        let mut parent: Vec<usize> = (0..self.node_cell.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut short = Vec::new();
        for (i, chain) in self.chains.iter().enumerate() {
            let Some(chain) = chain else { continue };
            let [a, b] = chain.ends;
            if a != b && deg[a] >= 3 && deg[b] >= 3 && self.arc_length(&chain.cells) < radius {
                short.push(i);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    // Lowest id becomes the root.
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        if short.is_empty() {
            return;
        }

        let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for n in 0..self.node_cell.len() {
            let root = find(&mut parent, n);
            clusters.entry(root).or_default().push(n);
        }
        let mut rep_of = vec![NONE; self.node_cell.len()];
        for (&root, group) in &clusters {
            for &n in group {
                rep_of[n] = root;
            }
            if group.len() < 2 {
                continue;
            }
            let count = group.len() as f64;
            let (sx, sy) = group.iter().fold((0.0, 0.0), |(sx, sy), &n| {
                let p = self.point(self.node_cell[n]);
                (sx + p.x, sy + p.y)
            });
            let centroid = WorldPoint::new(sx / count, sy / count);
            let snapped = members
                .iter()
                .map(|&cell| (self.point(cell).distance_sq(&centroid), cell))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, cell)| cell)
                .expect("component is non-empty");
            self.node_cell[root] = snapped;
            for &n in group {
                if n != root {
                    self.node_alive[n] = false;
                }
            }
        }

        for i in short {
            if let Some(chain) = &self.chains[i] {
                if rep_of[chain.ends[0]] == rep_of[chain.ends[1]] {
                    self.chains[i] = None;
                }
            }
        }
        for i in 0..self.chains.len() {
            let Some(mut chain) = self.chains[i].take() else { continue };
            for side in 0..2 {
                let rep = rep_of[chain.ends[side]];
                if rep == chain.ends[side] && self.node_cell[rep] == chain.cells[endpoint(&chain.cells, side)] {
                    continue;
                }
                chain.ends[side] = rep;
                reattach(&mut chain.cells, side, self.node_cell[rep]);
            }
            if chain.cells.len() >= 2 {
                self.chains[i] = Some(chain);
            }
        }
    }

    /// Remove dangling branches shorter than `min_length`, shortest first.
    fn prune_end_segments(&mut self, min_length: f64) {
        loop {
            self.dissolve_pass_through_nodes();
            if min_length <= 0.0 {
                return;
            }
            let deg = self.degrees();
            let mut best: Option<(f64, usize)> = None;
            for (i, chain) in self.chains.iter().enumerate() {
                let Some(chain) = chain else { continue };
                let [a, b] = chain.ends;
                let spur = (deg[a] == 1 && deg[b] >= 3) || (deg[b] == 1 && deg[a] >= 3);
                if !spur {
                    continue;
                }
                let len = self.arc_length(&chain.cells);
                if len < min_length && best.is_none_or(|(l, _)| len < l) {
                    best = Some((len, i));
                }
            }
            let Some((_, i)) = best else { return };
            let chain = self.chains[i].take().expect("chosen chain is alive");
            let tip = if deg[chain.ends[0]] == 1 { chain.ends[0] } else { chain.ends[1] };
            self.node_alive[tip] = false;
        }
    }

    /// Join the two branches meeting at every degree-2 node.
    fn dissolve_pass_through_nodes(&mut self) {
        loop {
            let deg = self.degrees();
            let Some(node) = (0..deg.len()).find(|&n| {
                self.node_alive[n] && deg[n] == 2 && {
                    let inc = self.incident(n);
                    inc.len() == 2
                }
            }) else {
                return;
            };
            let inc = self.incident(node);
            let first = self.chains[inc[0]].take().expect("incident chain");
            let second = self.chains[inc[1]].take().expect("incident chain");
            let mut cells: Vec<usize> = first.cells_from(node).into_iter().rev().collect();
            cells.extend(second.cells_from(node).into_iter().skip(1));
            self.chains[inc[0]] = Some(Chain {
                ends: [first.other(node), second.other(node)],
                cells,
            });
            self.node_alive[node] = false;
        }
    }
}

fn endpoint(cells: &[usize], side: usize) -> usize {
    if side == 0 {
        0
    } else {
        cells.len() - 1
    }
}

/// Make the trace begin (side 0) or end (side 1) at `cell`, trimming when the
/// cell lies on the trace and extending it otherwise.
fn reattach(cells: &mut Vec<usize>, side: usize, cell: usize) {
    if side == 0 {
        match cells.iter().position(|&c| c == cell) {
            Some(k) => {
                cells.drain(..k);
            }
            None => cells.insert(0, cell),
        }
    } else {
        match cells.iter().rposition(|&c| c == cell) {
            Some(k) => cells.truncate(k + 1),
            None => cells.push(cell),
        }
    }
}

fn local_point(skel: &Skeleton, cell: usize) -> WorldPoint {
    let (w, h, res) = (skel.width(), skel.height(), skel.resolution());
    let (r, c) = (cell / w, cell % w);
    WorldPoint::new((c as f64 + 0.5) * res, ((h - 1 - r) as f64 + 0.5) * res)
}

/// True if every quarter-resolution sample of the chord lies on a Free cell.
fn chord_is_clear(skel: &Skeleton, a: WorldPoint, b: WorldPoint) -> bool {
    let res = skel.resolution();
    let (w, h) = (skel.width() as f64, skel.height() as f64);
    let steps = ((a.distance(&b) / (res / 4.0)).ceil() as usize).max(1);
    (0..=steps).all(|i| {
        let t = i as f64 / steps as f64;
        let fx = ((a.x + (b.x - a.x) * t) / res).floor();
        let fy = ((a.y + (b.y - a.y) * t) / res).floor();
        if fx < 0.0 || fy < 0.0 || fx >= w || fy >= h {
            return false;
        }
        let row = skel.height() - 1 - fy as usize;
        skel.is_free_index(row * skel.width() + fx as usize)
    })
}

/// Indices into a trace for `pieces` nearly equal arc-length pieces.
fn pick_indices(cumulative: &[f64], pieces: usize) -> Vec<usize> {
    let m = cumulative.len() - 1;
    let total = cumulative[m];
    let mut out = Vec::with_capacity(pieces + 1);
    out.push(0);
    for j in 1..pieces {
        let target = total * j as f64 / pieces as f64;
        let pos = cumulative.partition_point(|&s| s < target).min(m);
        let mut best = pos;
        if pos > 0 && target - cumulative[pos - 1] <= cumulative[pos] - target {
            best = pos - 1;
        }
        let lo = out[out.len() - 1] + 1;
        let hi = m - (pieces - j);
        out.push(best.clamp(lo, hi));
    }
    out.push(m);
    out
}

/// Choose the trace cells that become nodes: the fewest nearly even pieces
/// (at least `ceil(len / segment_length)`) whose chords are all no longer than
/// `segment_length` and stay in free space.
fn subdivide(skel: &Skeleton, cells: &[usize], segment_length: f64, is_loop: bool) -> Vec<usize> {
    let points: Vec<WorldPoint> = cells.iter().map(|&c| local_point(skel, c)).collect();
    let mut cumulative = Vec::with_capacity(points.len());
    cumulative.push(0.0);
    for w in points.windows(2) {
        let last = cumulative[cumulative.len() - 1];
        cumulative.push(last + w[0].distance(&w[1]));
    }
    let m = points.len() - 1;
    let total = cumulative[m];
    let mut pieces = ((total / segment_length) - 1e-9).ceil().max(1.0) as usize;
    if is_loop {
        pieces = pieces.max(3);
    }
    let pieces_max = m.max(1);
    pieces = pieces.min(pieces_max);
    loop {
        let picks = pick_indices(&cumulative, pieces);
        let valid = picks.windows(2).all(|p| {
            p[1] == p[0] + 1
                || (points[p[0]].distance(&points[p[1]]) <= segment_length + 1e-9
                    && chord_is_clear(skel, points[p[0]], points[p[1]]))
        });
        if valid || pieces >= pieces_max {
            return picks;
        }
        pieces += 1;
    }
}

/// Turn a skeleton into a connected graph: junctions and endpoints become
/// nodes, traced branches become edges, long branches are subdivided, nearby
/// junctions merged and short dangling branches pruned. Only the largest
/// connected skeleton component is kept.
pub fn build_raw_graph(skel: &Skeleton, params: &SkeletonParams) -> Result<RawGraph> {
    params.validate()?;
    if skel.is_empty() {
        return Err(Error::NoSkeleton("skeleton has no cells".into()));
    }
    let pixels = PixelGraph::new(skel);
    let components = pixels.components();
    let mut largest = 0;
    for (i, comp) in components.iter().enumerate() {
        if comp.len() > components[largest].len() {
            largest = i;
        }
    }
    let dropped = components.len() - 1;
    if dropped > 0 {
        log::warn!("distill: dropped {dropped} skeleton component(s) smaller than the largest");
    }
    let members = &components[largest];
    let member_cells: Vec<usize> = members.iter().map(|&p| pixels.cells[p]).collect();

    let mut topo = Topology::trace(skel, &pixels, members);
    topo.merge_crossings(params.crossing_merge_radius, &member_cells);
    topo.prune_end_segments(params.end_segment_min_length);

    // Every node is identified by its grid cell.
    let mut node_cells: BTreeSet<usize> = BTreeSet::new();
    let mut edges_by_cell: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (n, &cell) in topo.node_cell.iter().enumerate() {
        if topo.node_alive[n] {
            node_cells.insert(cell);
        }
    }
    for chain in topo.chains.iter().flatten() {
        let picks = subdivide(skel, &chain.cells, params.segment_length, chain.is_loop());
        for w in picks.windows(2) {
            let (a, b) = (chain.cells[w[0]], chain.cells[w[1]]);
            node_cells.insert(a);
            node_cells.insert(b);
            if a != b {
                edges_by_cell.insert((a.min(b), a.max(b)));
            }
        }
    }

    let index: HashMap<usize, usize> = node_cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let nodes = node_cells.iter().map(|&c| local_point(skel, c)).collect();
    let mut edges: Vec<[usize; 2]> = edges_by_cell
        .iter()
        .map(|&(a, b)| {
            let (i, j) = (index[&a], index[&b]);
            [i.min(j), i.max(j)]
        })
        .collect();
    edges.sort_unstable();
    Ok(RawGraph {
        nodes,
        edges,
        dropped_components: dropped,
    })
}
