//! Ridge extraction and topology-preserving thinning.
//!
//! Navigable cells are Free cells with clearance at least `min_clearance`.
//! Cells that are local maxima of the clearance field along one of the four
//! grid directions are ridge anchors. Thinning then runs in two stages:
//!
//! 1. Non-anchor simple points are removed in ascending clearance order,
//!    leaving the ridge plus whatever cells keep the region's topology.
//! 2. Directional sub-iterations (N, S, E, W) strip border points that are
//!    simple and not line ends until the set is one cell wide.
//!
//! Only simple points (8-connected foreground, 4-connected background) are
//! ever removed, so each connected navigable region keeps exactly one
//! connected skeleton with the same holes.

use std::sync::OnceLock;

use super::{ClearanceField, SkeletonParams};
use crate::{Error, Result};

/// Ring of the eight neighbors, clockwise from the top-left.
pub(crate) const RING: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
];

/// Skeleton cells on a grid, plus the free mask used to validate edge chords.
#[derive(Debug, Clone)]
pub struct Skeleton {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<bool>,
    free: Vec<bool>,
}

impl Skeleton {
    /// Build a skeleton from explicit cells on an otherwise all-free grid.
    pub fn from_cells(width: usize, height: usize, resolution: f64, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), width * height);
        Self {
            width,
            height,
            resolution,
            free: vec![true; cells.len()],
            cells,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// False for cells outside the grid.
    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width && self.cells[row * self.width + col]
    }

    #[inline]
    pub(crate) fn contains_index(&self, index: usize) -> bool {
        self.cells[index]
    }

    #[inline]
    pub(crate) fn is_free_index(&self, index: usize) -> bool {
        self.free[index]
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.contains(&true)
    }

    /// Skeleton cells as `(row, col)` in ascending order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| (i / self.width, i % self.width))
    }
}

/// Simple-point table indexed by the 8-bit neighbor mask (bit k = `RING[k]`).
fn simple_table() -> &'static [bool; 256] {
    static TABLE: OnceLock<[bool; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [false; 256];
        for (mask, slot) in table.iter_mut().enumerate() {
            let fg = |k: usize| mask & (1 << k) != 0;
            let fg_components = count_components(|k| fg(k), |a, b| eight_adjacent(a, b), |_| true);
            let bg_components = count_components(
                |k| !fg(k),
                |a, b| four_adjacent(a, b),
                // Only background pieces touching the center 4-wise matter.
                |k| k % 2 == 1,
            );
            *slot = fg_components == 1 && bg_components == 1;
        }
        table
    })
}

fn eight_adjacent(a: usize, b: usize) -> bool {
    let (ra, ca) = RING[a];
    let (rb, cb) = RING[b];
    a != b && (ra - rb).abs() <= 1 && (ca - cb).abs() <= 1
}

fn four_adjacent(a: usize, b: usize) -> bool {
    let (ra, ca) = RING[a];
    let (rb, cb) = RING[b];
    (ra - rb).abs() + (ca - cb).abs() == 1
}

fn count_components(
    member: impl Fn(usize) -> bool,
    adjacent: impl Fn(usize, usize) -> bool,
    counts: impl Fn(usize) -> bool,
) -> usize {
    let mut seen = [false; 8];
    let mut total = 0;
    for start in 0..8 {
        if seen[start] || !member(start) {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut relevant = false;
        while let Some(k) = stack.pop() {
            relevant |= counts(k);
            for j in 0..8 {
                if !seen[j] && member(j) && adjacent(k, j) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if relevant {
            total += 1;
        }
    }
    total
}

struct Mask<'a> {
    width: usize,
    height: usize,
    set: &'a [bool],
}

impl Mask<'_> {
    #[inline]
    fn get(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.set[row as usize * self.width + col as usize]
    }

    #[inline]
    fn neighbor_bits(&self, index: usize) -> u8 {
        let (r, c) = ((index / self.width) as isize, (index % self.width) as isize);
        let mut bits = 0u8;
        for (k, (dr, dc)) in RING.iter().enumerate() {
            if self.get(r + dr, c + dc) {
                bits |= 1 << k;
            }
        }
        bits
    }
}

/// Ridge anchors and a per-cell removal priority.
struct Ridge {
    anchor: Vec<bool>,
    /// Number of directions in which the cell is a strict local maximum.
    strict: Vec<u8>,
}

fn detect_ridges(field: &ClearanceField, navigable: &[bool]) -> Ridge {
    const DIRECTIONS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
    let (w, h) = (field.width(), field.height());
    let at = |r: isize, c: isize| -> u64 {
        if r < 0 || c < 0 || r as usize >= h || c as usize >= w {
            0
        } else {
            field.dist_sq(r as usize * w + c as usize)
        }
    };
    let mut anchor = vec![false; w * h];
    let mut strict = vec![0u8; w * h];
    for i in 0..w * h {
        if !navigable[i] {
            continue;
        }
        let (r, c) = ((i / w) as isize, (i % w) as isize);
        let here = field.dist_sq(i);
        for (dr, dc) in DIRECTIONS {
            let a = at(r - dr, c - dc);
            let b = at(r + dr, c + dc);
            if here >= a && here >= b && (here > a || here > b) {
                anchor[i] = true;
                if here > a && here > b {
                    strict[i] += 1;
                }
            }
        }
    }
    Ridge { anchor, strict }
}

/// Extract a thin ridge skeleton of the navigable free space.
pub fn extract_skeleton(field: &ClearanceField, params: &SkeletonParams) -> Result<Skeleton> {
    params.validate()?;
    let (w, h) = (field.width(), field.height());
    let res = field.resolution();
    let free: Vec<bool> = (0..w * h).map(|i| field.is_free(i)).collect();
    if !free.contains(&true) {
        return Err(Error::NoSkeleton("the map has no free cells".into()));
    }
    let navigable: Vec<bool> = (0..w * h)
        .map(|i| free[i] && field.clearance_at(i) >= params.min_clearance)
        .collect();
    if !navigable.contains(&true) {
        return Err(Error::NoSkeleton(format!(
            "no free cell has clearance >= min_clearance ({} m)",
            params.min_clearance
        )));
    }

    let ridge = detect_ridges(field, &navigable);
    let mut order: Vec<usize> = (0..w * h).filter(|&i| navigable[i]).collect();
    order.sort_by_key(|&i| (field.dist_sq(i), ridge.strict[i], i));

    let table = simple_table();
    let mut set = navigable;

    // Stage 1: erode everything that is not a ridge anchor.
    loop {
        let mut changed = false;
        for &i in &order {
            if !set[i] || ridge.anchor[i] {
                continue;
            }
            let bits = Mask { width: w, height: h, set: &set }.neighbor_bits(i);
            if table[bits as usize] {
                set[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Stage 2: directional thinning down to one cell width.
    const SIDES: [usize; 4] = [1, 5, 3, 7]; // N, S, E, W in RING
    loop {
        let mut changed = false;
        for side in SIDES {
            let border: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&i| {
                    set[i] && {
                        let bits = Mask { width: w, height: h, set: &set }.neighbor_bits(i);
                        bits & (1 << side) == 0
                    }
                })
                .collect();
            for i in border {
                let bits = Mask { width: w, height: h, set: &set }.neighbor_bits(i);
                if bits.count_ones() >= 2 && table[bits as usize] {
                    set[i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    Ok(Skeleton {
        width: w,
        height: h,
        resolution: res,
        cells: set,
        free,
    })
}
