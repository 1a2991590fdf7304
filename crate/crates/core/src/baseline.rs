//! Conditional random placement, the comparison baseline.
//!
//! Robot `i` is drawn uniformly from the free cells `o` not yet used with
//! `α <= |o - φ| < 2r`, where `φ` is the operator for the first two robots
//! and the robot placed two steps earlier afterwards. If that set is empty
//! the draw is retried around the operator; if it is still empty the robot
//! is skipped and the step is recorded as exhausted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage;
use crate::planner::{compute_alpha, Scenario};
use crate::rng::SeededRng;
use crate::{CellUniverse, OccupancyGrid, Result, WorldPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomPlacement {
    pub seed: u64,
    pub alpha: f64,
    pub positions: Vec<WorldPoint>,
    /// Grid index of each chosen cell.
    pub cells: Vec<usize>,
    /// Anchor used for each placed robot.
    pub anchors: Vec<WorldPoint>,
    /// Steps that fell back from the robot anchor to the operator.
    pub reanchored_steps: Vec<usize>,
    /// Steps where no cell satisfied the constraints at all.
    pub exhausted_steps: Vec<usize>,
}

/// One draw of the conditional random baseline with `sc.seed`.
pub fn conditional_random(grid: &OccupancyGrid, sc: &Scenario) -> Result<RandomPlacement> {
    sc.validate_on(grid)?;
    let alpha = compute_alpha(grid, sc.robot_count);
    let two_r = 2.0 * sc.coverage_radius;
    let free: Vec<(usize, WorldPoint)> = (0..grid.cells().len())
        .filter(|&i| grid.cells()[i] == crate::CellState::Free)
        .map(|i| {
            let (row, col) = grid.row_col(i);
            (i, grid.cell_center(row, col))
        })
        .collect();
    let mut used = vec![false; free.len()];
    let mut rng = SeededRng::new(sc.seed);

    let mut out = RandomPlacement {
        seed: sc.seed,
        alpha,
        positions: Vec::new(),
        cells: Vec::new(),
        anchors: Vec::new(),
        reanchored_steps: Vec::new(),
        exhausted_steps: Vec::new(),
    };
    // Position placed at each step, None for skipped steps.
    let mut by_step: Vec<Option<WorldPoint>> = Vec::with_capacity(sc.robot_count);

    let eligible = |phi: WorldPoint, used: &[bool]| -> Vec<usize> {
        (0..free.len())
            .filter(|&k| {
                !used[k] && {
                    let d = free[k].1.distance(&phi);
                    d >= alpha && d < two_r
                }
            })
            .collect()
    };

    for step in 0..sc.robot_count {
        let robot_anchor = if step < 2 { None } else { by_step[step - 2] };
        let mut phi = robot_anchor.unwrap_or(sc.operator);
        let mut pool = eligible(phi, &used);
        if pool.is_empty() && robot_anchor.is_some() {
            out.reanchored_steps.push(step);
            phi = sc.operator;
            pool = eligible(phi, &used);
        }
        if pool.is_empty() {
            log::debug!("baseline: no eligible cell at step {step}");
            out.exhausted_steps.push(step);
            by_step.push(None);
            continue;
        }
        let k = pool[rng.index(pool.len())];
        used[k] = true;
        let (cell, p) = free[k];
        out.positions.push(p);
        out.cells.push(cell);
        out.anchors.push(phi);
        by_step.push(Some(p));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub iterations: usize,
    pub seed: u64,
    pub mean_acp: f64,
    pub min_acp: f64,
    pub max_acp: f64,
    /// Population standard deviation.
    pub stddev_acp: f64,
    pub per_iteration: Vec<f64>,
}

/// Mean ACP over `iterations` draws seeded `seed, seed + 1, ...`.
///
/// Draws run on the current rayon pool; results are in seed order, so the
/// summary does not depend on the number of threads.
pub fn average_acp(
    grid: &OccupancyGrid,
    sc: &Scenario,
    iterations: usize,
    universe: CellUniverse,
) -> Result<BaselineSummary> {
    sc.validate_on(grid)?;
    if iterations == 0 {
        return Err(crate::Error::InvalidScenario("iterations must be at least 1".into()));
    }
    let per_iteration = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let draw = Scenario {
                seed: sc.seed.wrapping_add(i as u64),
                ..*sc
            };
            let placement = conditional_random(grid, &draw)?;
            let report = coverage::acp(grid, &placement.positions, sc.operator, sc.coverage_radius, universe)?;
            Ok(report.acp)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = per_iteration.len() as f64;
    let mean = per_iteration.iter().sum::<f64>() / n;
    let var = per_iteration.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    Ok(BaselineSummary {
        iterations,
        seed: sc.seed,
        mean_acp: mean,
        min_acp: per_iteration.iter().copied().fold(f64::INFINITY, f64::min),
        max_acp: per_iteration.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        stddev_acp: var.sqrt(),
        per_iteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CellState;

    fn pt(x: f64, y: f64) -> WorldPoint {
        WorldPoint::new(x, y)
    }

    fn corridor() -> OccupancyGrid {
        OccupancyGrid::new(10, 1, 1.0, pt(0.0, 0.0), vec![CellState::Free; 10]).unwrap()
    }

    #[test]
    fn corridor_draw_respects_annulus() {
        let g = corridor();
        let sc = Scenario::new(pt(0.5, 0.5), 1, 2.5, 1).unwrap();
        // α = 10, nothing lies in [10, 5): exhausted.
        let out = conditional_random(&g, &sc).unwrap();
        assert!(out.positions.is_empty());
        assert_eq!(out.exhausted_steps, vec![0]);

        let sc = Scenario::new(pt(0.5, 0.5), 2, 4.0, 3).unwrap();
        // α = 5, annulus [5, 8): cells 5, 6, 7.
        let out = conditional_random(&g, &sc).unwrap();
        assert_eq!(out.positions.len(), 2);
        for p in &out.positions {
            assert!([5.5, 6.5, 7.5].contains(&p.x), "{p}");
        }
        assert_ne!(out.positions[0], out.positions[1]);
    }

    #[test]
    fn reanchors_to_operator() {
        // Free cells at x = 3.5, 4.5, 5.5; α = 3, annulus around P is [3, 5.5).
        // The third robot's anchor has no free cell 3 m away, so it falls
        // back to the operator and takes the last cell.
        let g = OccupancyGrid::from_ascii("resolution: 1.0\norigin: [0.0, 0.0]\n###...###\n").unwrap();
        for seed in 0..20 {
            let sc = Scenario::new(pt(0.5, 0.5), 3, 2.75, seed).unwrap();
            let out = conditional_random(&g, &sc).unwrap();
            assert_eq!(out.reanchored_steps, vec![2]);
            assert_eq!(out.anchors[2], sc.operator);
            let mut xs: Vec<f64> = out.positions.iter().map(|p| p.x).collect();
            xs.sort_by(f64::total_cmp);
            assert_eq!(xs, vec![3.5, 4.5, 5.5]);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = corridor();
        let sc = Scenario::new(pt(0.5, 0.5), 2, 4.0, 99).unwrap();
        assert_eq!(conditional_random(&g, &sc).unwrap(), conditional_random(&g, &sc).unwrap());
    }

    #[test]
    fn summary_uses_population_stddev() {
        let g = corridor();
        let sc = Scenario::new(pt(0.5, 0.5), 2, 4.0, 5).unwrap();
        let s = average_acp(&g, &sc, 8, CellUniverse::Free).unwrap();
        assert_eq!(s.per_iteration.len(), 8);
        let mean = s.per_iteration.iter().sum::<f64>() / 8.0;
        let var = s.per_iteration.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 8.0;
        assert!((s.mean_acp - mean).abs() < 1e-12);
        assert!((s.stddev_acp - var.sqrt()).abs() < 1e-12);
        assert!(s.min_acp <= s.mean_acp && s.mean_acp <= s.max_acp);
    }
}
