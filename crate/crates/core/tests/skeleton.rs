use gmcpos::distill::{distance_transform, extract_skeleton, SkeletonParams};
use gmcpos::{Error, OccupancyGrid};

fn ascii(rows: &[String]) -> OccupancyGrid {
    OccupancyGrid::from_ascii(&format!("resolution: 1.0\norigin: [0.0, 0.0]\n{}\n", rows.join("\n"))).unwrap()
}

/// Cells that are strict-or-plateau maxima of the clearance along some axis
/// or diagonal, by direct comparison with their neighbors.
fn brute_ridge(grid: &OccupancyGrid) -> Vec<(usize, usize)> {
    let clearance = gmcpos::oracle::brute_force_clearance(grid);
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    let at = |r: isize, c: isize| {
        if r < 0 || c < 0 || r >= h || c >= w {
            0.0
        } else {
            clearance[(r * w + c) as usize]
        }
    };
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let here = at(r, c);
            if here == 0.0 {
                continue;
            }
            let ridge = [(0, 1), (1, 0), (1, 1), (1, -1)].iter().any(|&(dr, dc)| {
                let (a, b) = (at(r - dr, c - dc), at(r + dr, c + dc));
                here >= a && here >= b && (here > a || here > b)
            });
            if ridge {
                out.push((r as usize, c as usize));
            }
        }
    }
    out
}

#[test]
fn corridor_skeleton_is_the_middle_row() {
    let wall = "#".repeat(22);
    let inner = format!("#{}#", ".".repeat(20));
    let grid = ascii(&[wall.clone(), inner.clone(), inner.clone(), inner, wall]);
    let skel = extract_skeleton(&distance_transform(&grid), &SkeletonParams::default()).unwrap();
    for c in 2..20 {
        assert!(skel.contains(2, c), "middle row cell {c}");
    }
    for (r, c) in skel.cells() {
        assert!(r == 2 || c <= 2 || c >= 19, "({r}, {c}) off the middle row");
    }
}

#[test]
fn square_room_keeps_both_diagonals() {
    let rows: Vec<String> = (0..11).map(|_| ".".repeat(11)).collect();
    let grid = ascii(&rows);
    let skel = extract_skeleton(&distance_transform(&grid), &SkeletonParams::default()).unwrap();
    let ridge = brute_ridge(&grid);
    for i in 0..11 {
        for cell in [(i, i), (i, 10 - i)] {
            assert!(ridge.contains(&cell), "brute ridge misses {cell:?}");
        }
    }
    // Diagonal ends may be trimmed by one cell, as with corridor ends.
    for i in 1..10 {
        for cell in [(i, i), (i, 10 - i)] {
            assert!(skel.contains(cell.0, cell.1), "skeleton misses {cell:?}");
        }
    }
}

#[test]
fn skeleton_is_connected_and_thin() {
    let rows: Vec<String> = (0..15)
        .map(|r| {
            (0..25)
                .map(|c| if (5..10).contains(&r) && (8..16).contains(&c) { '#' } else { '.' })
                .collect()
        })
        .collect();
    let grid = ascii(&rows);
    let skel = extract_skeleton(&distance_transform(&grid), &SkeletonParams::default()).unwrap();
    let cells: Vec<_> = skel.cells().collect();
    let mut seen = vec![cells[0]];
    let mut stack = vec![cells[0]];
    while let Some((r, c)) = stack.pop() {
        for &(rr, cc) in &cells {
            if r.abs_diff(rr) <= 1 && c.abs_diff(cc) <= 1 && !seen.contains(&(rr, cc)) {
                seen.push((rr, cc));
                stack.push((rr, cc));
            }
        }
    }
    assert_eq!(seen.len(), cells.len());
    // No 2x2 block survives thinning.
    for &(r, c) in &cells {
        assert!(!(skel.contains(r, c + 1) && skel.contains(r + 1, c) && skel.contains(r + 1, c + 1)));
    }
}

#[test]
fn clearance_requirement_too_large() {
    let rows: Vec<String> = (0..5).map(|_| ".".repeat(5)).collect();
    let grid = ascii(&rows);
    let params = SkeletonParams {
        min_clearance: 10.0,
        ..SkeletonParams::default()
    };
    match extract_skeleton(&distance_transform(&grid), &params) {
        Err(Error::NoSkeleton(msg)) => assert!(msg.contains("min_clearance"), "{msg}"),
        other => panic!("expected a no-skeleton error, got {other:?}"),
    }
}

#[test]
fn all_occupied_map_is_rejected() {
    let err = OccupancyGrid::from_ascii("resolution: 1.0\norigin: [0.0, 0.0]\n###\n###\n").unwrap_err();
    assert!(matches!(err, Error::InvalidMap(_) | Error::Parse { .. }), "{err}");
}

