//! Slow reference implementations used to check the fast paths.
//!
//! None of these share code with the modules they check beyond the data
//! types and the grid geometry helpers. [`graph_violations`] reads
//! clearance from the distance transform, which [`brute_force_clearance`]
//! checks in turn.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::planner::{compute_alpha, PlacementResult, Scenario, SelectionRule};
use crate::{CellState, CellUniverse, Error, OccupancyGrid, Result, RoadmapGraph, WorldPoint};

pub const FLOYD_WARSHALL_MAX_NODES: usize = 512;
pub const EXHAUSTIVE_MAX_SUBSETS: u128 = 2_000_000;

/// All-pairs shortest path lengths.
pub fn floyd_warshall(g: &RoadmapGraph) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    if n > FLOYD_WARSHALL_MAX_NODES {
        return Err(Error::GuardExceeded {
            what: "floyd-warshall node count",
            size: n as u128,
            limit: FLOYD_WARSHALL_MAX_NODES as u128,
        });
    }
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (u, v, w) in g.edges() {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    Ok(d)
}

/// Clearance of every Free cell by scanning all blocking cells, meters.
/// Non-Free cells and a ring of cells just outside the map block; non-Free
/// cells get 0.
pub fn brute_force_clearance(grid: &OccupancyGrid) -> Vec<f64> {
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let mut blockers = Vec::new();
    for r in -1..=h {
        for c in -1..=w {
            let outside = r < 0 || c < 0 || r >= h || c >= w;
            if outside || grid.state(r as usize, c as usize) != CellState::Free {
                blockers.push((r, c));
            }
        }
    }
    (0..grid.cells().len())
        .map(|i| {
            let (r, c) = grid.row_col(i);
            if grid.cells()[i] != CellState::Free {
                return 0.0;
            }
            let best = blockers
                .iter()
                .map(|&(br, bc)| {
                    let dr = (br - r as i64) as f64;
                    let dc = (bc - c as i64) as f64;
                    dr * dr + dc * dc
                })
                .fold(f64::INFINITY, f64::min);
            best.sqrt() * grid.resolution()
        })
        .collect()
}

/// `(A, A_cover)` by testing every universe cell against every disk.
pub fn brute_force_coverage(
    grid: &OccupancyGrid,
    positions: &[WorldPoint],
    operator: WorldPoint,
    r: f64,
    universe: CellUniverse,
) -> (usize, usize) {
    let mut total = 0;
    let mut covered = 0;
    for row in 0..grid.height() {
        for col in 0..grid.width() {
            if !universe.contains(grid.state(row, col)) {
                continue;
            }
            total += 1;
            let center = grid.cell_center(row, col);
            if positions
                .iter()
                .chain(std::iter::once(&operator))
                .any(|p| center.distance(p) <= r)
            {
                covered += 1;
            }
        }
    }
    (total, covered)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub acp: f64,
    pub covered_cells: usize,
    pub total_cells: usize,
    /// Lexicographically smallest best subset.
    pub nodes: Vec<usize>,
    pub subsets_checked: u128,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

struct Bits(Vec<u64>);

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn or_into(&self, other: &Bits, out: &mut Bits) {
        for ((o, a), b) in out.0.iter_mut().zip(&self.0).zip(&other.0) {
            *o = a | b;
        }
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Best ACP over every `n`-subset of graph nodes as robot positions.
pub fn exhaustive_best_acp(
    grid: &OccupancyGrid,
    graph: &RoadmapGraph,
    operator: WorldPoint,
    n: usize,
    r: f64,
    universe: CellUniverse,
) -> Result<ExhaustiveResult> {
    let v = graph.len();
    if n > v {
        return Err(Error::InvalidScenario(format!("cannot choose {n} of {v} nodes")));
    }
    let subsets = binomial(v, n);
    if subsets > EXHAUSTIVE_MAX_SUBSETS {
        return Err(Error::GuardExceeded {
            what: "exhaustive subset count",
            size: subsets,
            limit: EXHAUSTIVE_MAX_SUBSETS,
        });
    }

    let cells: Vec<WorldPoint> = (0..grid.cells().len())
        .filter(|&i| universe.contains(grid.cells()[i]))
        .map(|i| {
            let (row, col) = grid.row_col(i);
            grid.cell_center(row, col)
        })
        .collect();
    let disk = |p: WorldPoint| {
        let mut bits = Bits::zeros(cells.len());
        for (k, c) in cells.iter().enumerate() {
            if c.distance(&p) <= r {
                bits.set(k);
            }
        }
        bits
    };
    let base = disk(operator);
    let node_bits: Vec<Bits> = graph.nodes().par_iter().map(|&p| disk(p)).collect();
    let total = cells.len();

    let finish = |covered: usize, nodes: Vec<usize>| ExhaustiveResult {
        acp: if total == 0 { 0.0 } else { 100.0 * covered as f64 / total as f64 },
        covered_cells: covered,
        total_cells: total,
        nodes,
        subsets_checked: subsets,
    };
    if n == 0 {
        return Ok(finish(base.count(), Vec::new()));
    }

    // Each first element is an independent branch; ties go to the smaller
    // subset, and branches are combined in ascending order.
    let best = (0..=v - n)
        .into_par_iter()
        .map(|first| {
            let mut stack: Vec<Bits> = (0..n).map(|_| Bits::zeros(total)).collect();
            base.or_into(&node_bits[first], &mut stack[0]);
            let mut chosen = vec![first];
            let mut best = (0usize, Vec::new());
            search(&node_bits, v, n, &mut chosen, &mut stack, &mut best);
            best
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one subset");
    Ok(finish(best.0, best.1))
}

fn search(
    node_bits: &[Bits],
    v: usize,
    n: usize,
    chosen: &mut Vec<usize>,
    stack: &mut [Bits],
    best: &mut (usize, Vec<usize>),
) {
    let depth = chosen.len();
    if depth == n {
        let covered = stack[depth - 1].count();
        if covered > best.0 || best.1.is_empty() {
            *best = (covered, chosen.clone());
        }
        return;
    }
    let start = chosen[depth - 1] + 1;
    for next in start..=v - (n - depth) {
        let (done, rest) = stack.split_at_mut(depth);
        done[depth - 1].or_into(&node_bits[next], &mut rest[0]);
        chosen.push(next);
        search(node_bits, v, n, chosen, stack, best);
        chosen.pop();
    }
}

/// Check a roadmap against its map: one component, every node on a Free
/// cell with enough clearance, and every edge chord over Free cells when
/// sampled every quarter cell. Returns the violations found.
pub fn graph_violations(grid: &OccupancyGrid, graph: &RoadmapGraph, min_clearance: f64) -> Vec<String> {
    let mut issues = Vec::new();
    if graph.is_empty() {
        issues.push("graph has no nodes".to_string());
        return issues;
    }
    let mut seen = vec![false; graph.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in graph.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    let unreached = seen.iter().filter(|&&s| !s).count();
    if unreached > 0 {
        issues.push(format!("{unreached} nodes unreachable from node 0"));
    }

    let field = crate::distill::distance_transform(grid);
    for (v, &p) in graph.nodes().iter().enumerate() {
        match grid.cell_at(p) {
            Some((row, col)) if grid.is_free(row, col) => {
                let c = field.clearance(row, col);
                if c < min_clearance {
                    issues.push(format!("node {v} at {p} has clearance {c} < {min_clearance}"));
                }
            }
            _ => issues.push(format!("node {v} at {p} is not on a Free cell")),
        }
    }

    let step = grid.resolution() / 4.0;
    for (u, v, _) in graph.edges() {
        let (a, b) = (graph.node(u), graph.node(v));
        let n = ((a.distance(&b) / step).ceil() as usize).max(1);
        let blocked = (0..=n).any(|i| {
            let t = i as f64 / n as f64;
            let p = WorldPoint::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
            !matches!(grid.cell_at(p), Some((row, col)) if grid.is_free(row, col))
        });
        if blocked {
            issues.push(format!("edge ({u}, {v}) crosses a non-Free cell"));
        }
    }
    issues
}

/// Recheck a placement step by step from the definitions. Returns a list of
/// violations, empty when the placement is consistent.
///
/// Steps recorded as fallbacks are only checked for not reusing a node.
pub fn audit_placement(
    graph: &RoadmapGraph,
    grid: &OccupancyGrid,
    sc: &Scenario,
    placement: &PlacementResult,
) -> Vec<String> {
    let mut issues = Vec::new();
    let alpha = compute_alpha(grid, sc.robot_count);
    if placement.alpha != alpha {
        issues.push(format!("alpha {} != {}", placement.alpha, alpha));
    }
    let r = sc.coverage_radius;
    let d = |a: WorldPoint, b: WorldPoint| graph.generalized_distance(a, b);

    for (i, step) in placement.steps.iter().enumerate() {
        let node = placement.nodes[i];
        let lambda = graph.node(node);
        if placement.positions[i] != lambda {
            issues.push(format!("step {i}: position is not node {node}"));
        }
        if placement.nodes[..i].contains(&node) {
            issues.push(format!("step {i}: node {node} reused"));
        }
        let eta = if i < 2 { sc.operator } else { placement.positions[i - 2] };
        if placement.anchors[i] != eta {
            issues.push(format!("step {i}: anchor {} should be {}", placement.anchors[i], eta));
        }
        if placement.fallback_steps.contains(&i) != (step.rule != SelectionRule::Primary) {
            issues.push(format!("step {i}: fallback flag disagrees with rule"));
        }
        if step.rule != SelectionRule::Primary {
            continue;
        }

        let mut prior: Vec<WorldPoint> = vec![sc.operator];
        prior.extend_from_slice(&placement.positions[..i]);
        let admissible = |v: usize| {
            let p = graph.node(v);
            !placement.nodes[..i].contains(&v)
                && d(p, eta) < 2.0 * r
                && prior.iter().all(|&q| d(p, q) >= alpha)
        };
        if !admissible(node) {
            issues.push(format!("step {i}: node {node} violates the distance constraints"));
            continue;
        }
        let candidates: Vec<usize> = (0..graph.len()).filter(|&v| admissible(v)).collect();
        let top = candidates.iter().map(|&v| graph.degree(v)).max().unwrap_or(0);
        if graph.degree(node) != top {
            issues.push(format!(
                "step {i}: degree {} is not the candidate maximum {top}",
                graph.degree(node)
            ));
            continue;
        }
        let d_node = d(lambda, eta);
        for &v in &candidates {
            if graph.degree(v) == top {
                let dv = d(graph.node(v), eta);
                if dv > d_node || (dv == d_node && v < node) {
                    issues.push(format!("step {i}: node {v} beats node {node} on distance to the anchor"));
                    break;
                }
            }
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> WorldPoint {
        WorldPoint::new(x, y)
    }

    #[test]
    fn floyd_warshall_examples() {
        let single = RoadmapGraph::from_edges(vec![pt(0.0, 0.0)], &[]).unwrap();
        assert_eq!(floyd_warshall(&single).unwrap(), vec![vec![0.0]]);

        let tri = RoadmapGraph::from_weighted_edges(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)],
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 10.0)],
        )
        .unwrap();
        let d = floyd_warshall(&tri).unwrap();
        assert_eq!(d[0][2], 2.0);
        assert_eq!(d[2][0], 2.0);
    }

    #[test]
    fn brute_force_clearance_corners() {
        let g = OccupancyGrid::from_ascii("resolution: 1.0\norigin: [0.0, 0.0]\n#...#\n.....\n.....\n.....\n#...#\n")
            .unwrap();
        let c = brute_force_clearance(&g);
        assert_eq!(c[g.index(2, 2)], 8f64.sqrt());
        assert_eq!(c[g.index(0, 0)], 0.0);
        assert_eq!(c[g.index(0, 2)], 1.0);
    }

    #[test]
    fn exhaustive_trivial_cases() {
        let grid = OccupancyGrid::new(6, 1, 1.0, pt(0.0, 0.0), vec![CellState::Free; 6]).unwrap();
        let g = RoadmapGraph::from_edges(vec![pt(0.5, 0.5), pt(2.5, 0.5), pt(4.5, 0.5)], &[[0, 1], [1, 2]]).unwrap();
        let none = exhaustive_best_acp(&grid, &g, pt(0.5, 0.5), 0, 0.5, CellUniverse::Free).unwrap();
        assert_eq!(none.covered_cells, 1);
        let all = exhaustive_best_acp(&grid, &g, pt(0.5, 0.5), 3, 1.0, CellUniverse::Free).unwrap();
        assert_eq!(all.acp, 100.0);
        assert_eq!(all.nodes, vec![0, 1, 2]);
        // One robot: node 2 adds the most; ties would go to the smaller index.
        let one = exhaustive_best_acp(&grid, &g, pt(0.5, 0.5), 1, 1.0, CellUniverse::Free).unwrap();
        assert_eq!((one.nodes.clone(), one.covered_cells), (vec![2], 5));
    }

    #[test]
    fn exhaustive_guard() {
        let nodes: Vec<_> = (0..200).map(|i| pt(i as f64, 0.0)).collect();
        let edges: Vec<_> = (1..200).map(|i| [i - 1, i]).collect();
        let g = RoadmapGraph::from_edges(nodes, &edges).unwrap();
        let grid = OccupancyGrid::new(200, 1, 1.0, pt(0.0, 0.0), vec![CellState::Free; 200]).unwrap();
        let err = exhaustive_best_acp(&grid, &g, pt(0.5, 0.5), 4, 1.0, CellUniverse::Free).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
    }
}
