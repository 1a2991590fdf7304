//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher).

use rayon::prelude::*;

use crate::{CellState, OccupancyGrid};

/// Per-cell clearance: distance from a cell center to the nearest non-Free
/// cell center. The ring just outside the map counts as an obstacle.
#[derive(Debug, Clone)]
pub struct ClearanceField {
    width: usize,
    height: usize,
    resolution: f64,
    /// Squared distance in cell units, exact.
    dist_sq: Vec<u64>,
}

impl ClearanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Squared clearance in cell units. Zero for non-Free cells.
    #[inline]
    pub fn dist_sq(&self, index: usize) -> u64 {
        self.dist_sq[index]
    }

    #[inline]
    pub fn clearance(&self, row: usize, col: usize) -> f64 {
        self.clearance_at(row * self.width + col)
    }

    #[inline]
    pub fn clearance_at(&self, index: usize) -> f64 {
        (self.dist_sq[index] as f64).sqrt() * self.resolution
    }

    #[inline]
    pub fn is_free(&self, index: usize) -> bool {
        self.dist_sq[index] > 0
    }
}

const FAR: f64 = 1e20;

/// One-dimensional squared distance transform of a sampled function.
fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        let mut s;
        loop {
            let p = v[k];
            let pf = p as f64;
            s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
            // z[0] is -inf, so this stops at k == 0.
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k];
        let d = qf - p as f64;
        *slot = d * d + f[p];
    }
}

fn transform_lines(data: &mut [f64], line_len: usize) {
    data.par_chunks_mut(line_len).for_each_init(
        || {
            (
                vec![0.0; line_len],
                vec![0usize; line_len],
                vec![0.0; line_len + 1],
            )
        },
        |(f, v, z), line| {
            f.copy_from_slice(line);
            transform_1d(f, line, v, z);
        },
    );
}

pub fn distance_transform(grid: &OccupancyGrid) -> ClearanceField {
    let (w, h) = (grid.width(), grid.height());
    let (pw, ph) = (w + 2, h + 2);

    // Column pass on a transposed, padded copy: line `c` holds column `c`.
    let mut cols = vec![0.0f64; pw * ph];
    for c in 1..=w {
        for r in 1..=h {
            if grid.state(r - 1, c - 1) == CellState::Free {
                cols[c * ph + r] = FAR;
            }
        }
    }
    transform_lines(&mut cols, ph);

    let mut rows = vec![0.0f64; pw * ph];
    for r in 0..ph {
        for c in 0..pw {
            rows[r * pw + c] = cols[c * ph + r];
        }
    }
    transform_lines(&mut rows, pw);

    let mut dist_sq = Vec::with_capacity(w * h);
    for r in 1..=h {
        for c in 1..=w {
            dist_sq.push(rows[r * pw + c] as u64);
        }
    }
    ClearanceField {
        width: w,
        height: h,
        resolution: grid.resolution(),
        dist_sq,
    }
}
