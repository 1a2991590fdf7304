//! Robot position selection on the roadmap graph.
//!
//! Positions are chosen one at a time. Step `i` anchors on `η = P` for
//! `i < 2` and on the position picked two steps earlier otherwise, so the
//! selection grows outward from the operator on two fronts. Each step:
//!
//! 1. keeps the unselected nodes `v` with `d_G(v, η) < 2r` and
//!    `d_G(v, λ) >= α` for the operator and every position already chosen;
//! 2. keeps only the candidates of maximum degree;
//! 3. takes the one furthest from `η` by `d_G` (lowest index on ties).
//!
//! `α = max(map height, map width) / N` spreads the robots over the map.
//!
//! When step 1 comes back empty, `α` is halved until it drops below the map
//! resolution; if that still finds nothing, the unselected node with the
//! largest `d_G` to its closest selected position is taken. Every relaxed
//! step is recorded.

use serde::{Deserialize, Serialize};

use crate::roadmap::Anchor;
use crate::{Error, OccupancyGrid, Result, RoadmapGraph, WorldPoint};

/// Coverage scenario: operator position, robot count and coverage radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub operator: WorldPoint,
    pub robot_count: usize,
    pub coverage_radius: f64,
    /// Seed for the random baseline; the planner itself is deterministic.
    pub seed: u64,
}

impl Scenario {
    pub fn new(operator: WorldPoint, robot_count: usize, coverage_radius: f64, seed: u64) -> Result<Self> {
        let sc = Self {
            operator,
            robot_count,
            coverage_radius,
            seed,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.robot_count == 0 {
            return Err(Error::InvalidScenario("robot count must be at least 1".into()));
        }
        if !(self.coverage_radius.is_finite() && self.coverage_radius > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "coverage radius must be positive, got {}",
                self.coverage_radius
            )));
        }
        if !self.operator.is_finite() {
            return Err(Error::InvalidScenario(format!("operator position {} is not finite", self.operator)));
        }
        Ok(())
    }

    /// Validate against a map: the operator has to stand inside it.
    pub fn validate_on(&self, grid: &OccupancyGrid) -> Result<()> {
        self.validate()?;
        if !grid.contains(self.operator) {
            let o = grid.origin();
            return Err(Error::InvalidScenario(format!(
                "operator {} is outside the map [{}, {}] x [{}, {}]",
                self.operator,
                o.x,
                o.x + grid.width_m(),
                o.y,
                o.y + grid.height_m()
            )));
        }
        Ok(())
    }
}

/// Spread constraint: the longer map side divided by the robot count.
pub fn compute_alpha(grid: &OccupancyGrid, robot_count: usize) -> f64 {
    let height = grid.height() as f64 * grid.resolution();
    let width = grid.width() as f64 * grid.resolution();
    height.max(width) / robot_count as f64
}

/// How a step's node was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SelectionRule {
    /// Full constraint set with the configured α.
    Primary,
    /// Full constraint set with α halved one or more times.
    RelaxedAlpha { alpha: f64 },
    /// No candidates at any α: largest distance to the nearest selected position.
    MaxMinDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub node: usize,
    pub anchor: WorldPoint,
    pub rule: SelectionRule,
    /// Size of the candidate set under the rule that fired.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementResult {
    pub alpha: f64,
    pub positions: Vec<WorldPoint>,
    /// Anchor η used at each step.
    pub anchors: Vec<WorldPoint>,
    /// Steps where the constraint set was empty and a relaxation fired.
    pub fallback_steps: Vec<usize>,
    /// Graph node index of each position.
    pub nodes: Vec<usize>,
    /// True when the graph ran out of nodes before every robot was placed.
    pub exhausted: bool,
    pub steps: Vec<StepRecord>,
}

/// Nodes `v` outside `taken` with `d_G(v, η) < 2r` and `d_G(v, s) >= α` for
/// every `s` in `spread_from`. Ascending node order.
pub fn candidate_set(
    g: &RoadmapGraph,
    eta: WorldPoint,
    spread_from: &[WorldPoint],
    taken: &[usize],
    r: f64,
    alpha: f64,
) -> Vec<usize> {
    let eta = g.anchor(eta);
    let others: Vec<Anchor<'_>> = spread_from.iter().map(|&p| g.anchor(p)).collect();
    filter_candidates(g, &eta, &others, &taken_mask(g, taken), r, alpha)
}

fn taken_mask(g: &RoadmapGraph, taken: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; g.len()];
    for &v in taken {
        mask[v] = true;
    }
    mask
}

fn filter_candidates(
    g: &RoadmapGraph,
    eta: &Anchor<'_>,
    others: &[Anchor<'_>],
    taken: &[bool],
    r: f64,
    alpha: f64,
) -> Vec<usize> {
    (0..g.len())
        .filter(|&v| {
            !taken[v]
                && eta.distance_to_node(v) < 2.0 * r
                && others.iter().all(|a| a.distance_to_node(v) >= alpha)
        })
        .collect()
}

/// The candidates whose degree equals the largest degree among them.
pub fn max_degree_subset(g: &RoadmapGraph, candidates: &[usize]) -> Result<Vec<usize>> {
    let top = candidates
        .iter()
        .map(|&v| g.degree(v))
        .max()
        .ok_or(Error::EmptyCandidates)?;
    Ok(candidates.iter().copied().filter(|&v| g.degree(v) == top).collect())
}

/// Furthest node from `eta`; the first (lowest index) on ties.
fn furthest(eta: &Anchor<'_>, nodes: &[usize]) -> usize {
    let mut best = nodes[0];
    let mut best_d = eta.distance_to_node(best);
    for &v in &nodes[1..] {
        let d = eta.distance_to_node(v);
        if d > best_d {
            best = v;
            best_d = d;
        }
    }
    best
}

/// Choose positions for `sc.robot_count` robots.
pub fn select_positions(g: &RoadmapGraph, grid: &OccupancyGrid, sc: &Scenario) -> Result<PlacementResult> {
    sc.validate_on(grid)?;
    let alpha = compute_alpha(grid, sc.robot_count);
    let r = sc.coverage_radius;

    let mut result = PlacementResult {
        alpha,
        positions: Vec::with_capacity(sc.robot_count),
        anchors: Vec::with_capacity(sc.robot_count),
        fallback_steps: Vec::new(),
        nodes: Vec::with_capacity(sc.robot_count),
        exhausted: false,
        steps: Vec::with_capacity(sc.robot_count),
    };
    let mut taken = vec![false; g.len()];
    // Λ ∪ {P}, operator first.
    let mut spread_from: Vec<Anchor<'_>> = vec![g.anchor(sc.operator)];

    for step in 0..sc.robot_count {
        if result.nodes.len() == g.len() {
            log::warn!("planner: graph exhausted after {} of {} robots", step, sc.robot_count);
            result.exhausted = true;
            break;
        }
        let eta_point = if step < 2 { sc.operator } else { result.positions[step - 2] };
        let eta = g.anchor(eta_point);

        let mut chosen = None;
        let mut trial_alpha = alpha;
        let mut rule = SelectionRule::Primary;
        loop {
            let candidates = filter_candidates(g, &eta, &spread_from, &taken, r, trial_alpha);
            if !candidates.is_empty() {
                let best = max_degree_subset(g, &candidates)?;
                chosen = Some((furthest(&eta, &best), candidates.len()));
                break;
            }
            trial_alpha /= 2.0;
            if trial_alpha < grid.resolution() {
                break;
            }
            rule = SelectionRule::RelaxedAlpha { alpha: trial_alpha };
        }

        let (node, candidates) = match chosen {
            Some(found) => found,
            None => {
                rule = SelectionRule::MaxMinDistance;
                let mut best = None;
                let mut best_d = f64::NEG_INFINITY;
                for v in (0..g.len()).filter(|&v| !taken[v]) {
                    let d = spread_from
                        .iter()
                        .map(|a| a.distance_to_node(v))
                        .fold(f64::INFINITY, f64::min);
                    if d > best_d {
                        best_d = d;
                        best = Some(v);
                    }
                }
                let remaining = taken.iter().filter(|&&t| !t).count();
                (best.expect("an unselected node exists"), remaining)
            }
        };

        if rule != SelectionRule::Primary {
            log::debug!("planner: step {step} fell back to {rule:?}");
            result.fallback_steps.push(step);
        }
        taken[node] = true;
        let position = g.node(node);
        spread_from.push(g.anchor(position));
        result.positions.push(position);
        result.nodes.push(node);
        result.anchors.push(eta_point);
        result.steps.push(StepRecord {
            step,
            node,
            anchor: eta_point,
            rule,
            candidates,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{CellState, OccupancyGrid};

    fn pt(x: f64, y: f64) -> WorldPoint {
        WorldPoint::new(x, y)
    }

    fn free_grid(width: usize, height: usize, res: f64) -> OccupancyGrid {
        OccupancyGrid::new(width, height, res, pt(0.0, 0.0), vec![CellState::Free; width * height]).unwrap()
    }

    fn line(n: usize) -> RoadmapGraph {
        let nodes = (0..n).map(|i| pt(i as f64, 0.0)).collect();
        let edges: Vec<_> = (1..n).map(|i| [i - 1, i]).collect();
        RoadmapGraph::from_edges(nodes, &edges).unwrap()
    }

    /// Degree-4 center at (6, 6) with four 6 m arms of 1 m spacing.
    fn plus() -> RoadmapGraph {
        let mut nodes = vec![pt(6.0, 6.0)];
        let mut edges = Vec::new();
        for (dx, dy) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            let mut prev = 0;
            for k in 1..=6 {
                nodes.push(pt(6.0 + dx * k as f64, 6.0 + dy * k as f64));
                edges.push([prev, nodes.len() - 1]);
                prev = nodes.len() - 1;
            }
        }
        RoadmapGraph::from_edges(nodes, &edges).unwrap()
    }

    #[test]
    fn alpha_from_map_size() {
        assert_eq!(compute_alpha(&free_grid(10, 10, 1.0), 1), 10.0);
        let map1 = free_grid(244, 244, 0.05);
        assert!((compute_alpha(&map1, 3) - 4.0667).abs() < 1e-4);
        let map3 = free_grid(3737, 2338, 0.01);
        assert!((compute_alpha(&map3, 5) - 7.474).abs() < 1e-12);
    }

    #[test]
    fn candidate_set_examples() {
        let single = RoadmapGraph::from_edges(vec![pt(0.0, 0.0)], &[]).unwrap();
        assert!(candidate_set(&single, pt(0.0, 0.0), &[pt(0.0, 0.0)], &[], 5.0, 1.0).is_empty());

        let g = line(10);
        let p = g.node(0);
        assert_eq!(candidate_set(&g, p, &[p], &[], 6.0, 2.0), (2..10).collect::<Vec<_>>());
        let with_five = candidate_set(&g, p, &[p, g.node(5)], &[5], 6.0, 2.0);
        assert_eq!(with_five, vec![2, 3, 7, 8, 9]);
    }

    #[test]
    fn max_degree_subset_examples() {
        let g = plus();
        assert_eq!(max_degree_subset(&g, &[1, 2, 3]).unwrap(), vec![1, 2, 3]);
        assert_eq!(max_degree_subset(&g, &[0, 2, 6]).unwrap(), vec![0]);
        assert_eq!(max_degree_subset(&g, &[6]).unwrap(), vec![6]);
        assert!(matches!(max_degree_subset(&g, &[]), Err(Error::EmptyCandidates)));

        // Degrees {1, 2, 3, 3}.
        let star = RoadmapGraph::from_edges(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0), pt(1.0, 1.0), pt(2.0, 1.0), pt(3.0, 0.0)],
            &[[0, 1], [1, 2], [1, 3], [2, 4], [2, 5], [3, 4]],
        )
        .unwrap();
        let degrees: Vec<_> = [0, 3, 1, 2].iter().map(|&v| star.degree(v)).collect();
        assert_eq!(degrees, vec![1, 2, 3, 3]);
        assert_eq!(max_degree_subset(&star, &[0, 3, 1, 2]).unwrap(), vec![1, 2]);
    }

    #[test]
    fn plus_graph_picks_arm_tips() {
        let g = plus();
        let grid = free_grid(12, 12, 1.0);
        let sc = Scenario::new(pt(6.0, 6.0), 2, 6.0, 0).unwrap();
        let out = select_positions(&g, &grid, &sc).unwrap();
        assert_eq!(out.alpha, 6.0);
        // Tips are nodes 6, 12, 18, 24; the lowest index wins the tie.
        assert_eq!(out.nodes, vec![6, 12]);
        assert_eq!(out.positions, vec![pt(12.0, 6.0), pt(6.0, 12.0)]);
        assert_eq!(out.anchors, vec![pt(6.0, 6.0), pt(6.0, 6.0)]);
        assert!(out.fallback_steps.is_empty());
        assert!(!out.exhausted);
    }

    #[test]
    fn anchors_follow_two_step_recursion() {
        let g = plus();
        let grid = free_grid(12, 12, 1.0);
        let sc = Scenario::new(pt(6.0, 6.0), 5, 6.0, 0).unwrap();
        let out = select_positions(&g, &grid, &sc).unwrap();
        assert_eq!(out.positions.len(), 5);
        let p = sc.operator;
        let expected: Vec<_> = [p, p]
            .into_iter()
            .chain(out.positions.iter().copied().take(3))
            .collect();
        assert_eq!(out.anchors, expected);
    }

    #[test]
    fn single_node_graph_exhausts() {
        let g = RoadmapGraph::from_edges(vec![pt(8.0, 5.0)], &[]).unwrap();
        let grid = free_grid(10, 10, 1.0);
        let sc = Scenario::new(pt(0.5, 5.0), 2, 20.0, 0).unwrap();
        let out = select_positions(&g, &grid, &sc).unwrap();
        assert_eq!(out.positions, vec![pt(8.0, 5.0)]);
        assert!(out.exhausted);
        assert!(out.fallback_steps.is_empty());
    }

    #[test]
    fn fallback_relaxes_alpha_then_spreads() {
        // Five nodes within 4 m of the operator on a 40 m map: α = 40 is
        // unreachable, halving reaches 2.5 which admits nodes 3 and 4; node 3
        // wins on degree.
        let g = line(5);
        let grid = free_grid(40, 40, 1.0);
        let sc = Scenario::new(pt(0.0, 0.0), 1, 6.0, 0).unwrap();
        let out = select_positions(&g, &grid, &sc).unwrap();
        assert_eq!(out.fallback_steps, vec![0]);
        assert_eq!(out.steps[0].rule, SelectionRule::RelaxedAlpha { alpha: 2.5 });
        assert_eq!(out.nodes, vec![3]);

        // With a tiny radius nothing is within 2r: the max-min rule fires.
        let sc = Scenario::new(pt(0.0, 0.0), 2, 0.1, 0).unwrap();
        let out = select_positions(&g, &grid, &sc).unwrap();
        assert_eq!(out.fallback_steps, vec![0, 1]);
        assert_eq!(out.steps[0].rule, SelectionRule::MaxMinDistance);
        assert_eq!(out.nodes, vec![4, 2]);
    }

    #[test]
    fn operator_outside_map_is_rejected() {
        let g = line(3);
        let grid = free_grid(5, 5, 1.0);
        let sc = Scenario::new(pt(7.0, 1.0), 1, 6.0, 0).unwrap();
        assert!(matches!(select_positions(&g, &grid, &sc), Err(Error::InvalidScenario(_))));
        assert!(Scenario::new(pt(0.0, 0.0), 0, 6.0, 0).is_err());
        assert!(Scenario::new(pt(0.0, 0.0), 1, 0.0, 0).is_err());
    }
}
