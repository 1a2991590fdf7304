//! Area coverage percentage of a set of disks over a map.
//!
//! A cell counts as covered when its center is within `r` (inclusive) of a
//! robot or of the operator. The denominator is the chosen [`CellUniverse`].

use serde::{Deserialize, Serialize};

use crate::{CellUniverse, OccupancyGrid, Result, WorldPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    #[serde(rename = "A")]
    pub total_cells: usize,
    #[serde(rename = "A_cover")]
    pub covered_cells: usize,
    /// Percentage in [0, 100].
    pub acp: f64,
    pub universe: CellUniverse,
    /// Covered flag per grid cell; only universe cells are ever set.
    #[serde(skip)]
    pub mask: Vec<bool>,
}

/// Inclusive index range of cells whose center coordinate along one axis
/// can fall within `[lo, hi]`, padded by one cell and clamped to `[0, n)`.
fn axis_range(lo: f64, hi: f64, origin: f64, res: f64, n: usize) -> Option<(usize, usize)> {
    let first = ((lo - origin) / res - 0.5).ceil() - 1.0;
    let last = ((hi - origin) / res - 0.5).floor() + 1.0;
    if !(last >= 0.0 && first < n as f64) {
        return None;
    }
    Some((first.max(0.0) as usize, (last as usize).min(n - 1)))
}

/// Mark the universe cells within `r` of `center`.
fn mark_disk(grid: &OccupancyGrid, center: WorldPoint, r: f64, universe: CellUniverse, mask: &mut [bool]) {
    let o = grid.origin();
    let res = grid.resolution();
    let h = grid.height();
    let Some((c0, c1)) = axis_range(center.x - r, center.x + r, o.x, res, grid.width()) else {
        return;
    };
    // j counts cell rows from the bottom of the map.
    let Some((j0, j1)) = axis_range(center.y - r, center.y + r, o.y, res, h) else {
        return;
    };
    for j in j0..=j1 {
        let row = h - 1 - j;
        for col in c0..=c1 {
            let i = grid.index(row, col);
            if !mask[i] && universe.contains(grid.cells()[i]) && grid.cell_center(row, col).distance(&center) <= r {
                mask[i] = true;
            }
        }
    }
}

/// Grid indices of the universe cells within `r` of `center`, ascending.
pub fn covered_cells(grid: &OccupancyGrid, center: WorldPoint, r: f64, universe: CellUniverse) -> Vec<usize> {
    let mut mask = vec![false; grid.cells().len()];
    mark_disk(grid, center, r, universe, &mut mask);
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
}

/// Coverage of the robots plus the operator.
pub fn acp(
    grid: &OccupancyGrid,
    positions: &[WorldPoint],
    operator: WorldPoint,
    r: f64,
    universe: CellUniverse,
) -> Result<CoverageReport> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(crate::Error::InvalidScenario(format!("coverage radius must be non-negative, got {r}")));
    }
    let mut mask = vec![false; grid.cells().len()];
    for &p in positions.iter().chain(std::iter::once(&operator)) {
        mark_disk(grid, p, r, universe, &mut mask);
    }
    let total = grid.cells().iter().filter(|&&s| universe.contains(s)).count();
    let covered = mask.iter().filter(|&&m| m).count();
    let acp = if total == 0 {
        0.0
    } else {
        100.0 * covered as f64 / total as f64
    };
    Ok(CoverageReport {
        total_cells: total,
        covered_cells: covered,
        acp,
        universe,
        mask,
    })
}
