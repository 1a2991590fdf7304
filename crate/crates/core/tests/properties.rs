use gmcpos::coverage::{self, covered_cells};
use gmcpos::distill::{distance_transform, distill, SkeletonParams};
use gmcpos::mapio::cell_sets;
use gmcpos::oracle;
use gmcpos::planner::{select_positions, Scenario};
use gmcpos::roadmap::finalize_graph;
use gmcpos::{baseline, CellState, CellUniverse, Error, OccupancyGrid, RoadmapGraph, WorldPoint};
use proptest::prelude::*;

fn state_strategy() -> impl Strategy<Value = CellState> {
    prop_oneof![
        6 => Just(CellState::Free),
        2 => Just(CellState::Occupied),
        1 => Just(CellState::Unknown),
    ]
}

/// Grids up to 30 x 30 with at least one Free cell.
fn grid_strategy() -> impl Strategy<Value = OccupancyGrid> {
    (1usize..=30, 1usize..=30, prop_oneof![Just(0.05), Just(0.1), Just(0.5), Just(1.0)], -5.0f64..5.0, -5.0f64..5.0)
        .prop_flat_map(|(w, h, res, ox, oy)| {
            (proptest::collection::vec(state_strategy(), w * h), 0..w * h).prop_map(move |(mut cells, k)| {
                cells[k] = CellState::Free;
                OccupancyGrid::new(w, h, res, WorldPoint::new(ox, oy), cells).unwrap()
            })
        })
}

/// Points around and somewhat beyond a grid.
fn point_in(grid: &OccupancyGrid) -> impl Strategy<Value = WorldPoint> {
    let o = grid.origin();
    let (w, h) = (grid.width_m(), grid.height_m());
    (o.x - 1.0..o.x + w + 1.0, o.y - 1.0..o.y + h + 1.0).prop_map(|(x, y)| WorldPoint::new(x, y))
}

/// Connected graphs of up to 20 nodes: a random spanning tree plus extra edges.
fn graph_strategy() -> impl Strategy<Value = RoadmapGraph> {
    (1usize..=20)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec((0.0f64..20.0, 0.0f64..20.0), n),
                proptest::collection::vec((any::<prop::sample::Index>(), 0.01f64..10.0), n.saturating_sub(1)),
                proptest::collection::vec((0..n, 0..n, 0.01f64..10.0), 0..2 * n),
            )
        })
        .prop_map(|(pts, tree, extra)| {
            let nodes: Vec<_> = pts.iter().map(|&(x, y)| WorldPoint::new(x, y)).collect();
            let mut edges = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for (i, (parent, w)) in tree.iter().enumerate() {
                let child = i + 1;
                let p = parent.index(child);
                seen.insert((p, child));
                edges.push((p, child, *w));
            }
            for (a, b, w) in extra {
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    edges.push((a, b, w));
                }
            }
            RoadmapGraph::from_weighted_edges(nodes, &edges).unwrap()
        })
}

/// Rooms on a 0.1 m grid: walls around the border and a few random blocks.
fn blocky_map_strategy() -> impl Strategy<Value = OccupancyGrid> {
    (20usize..=60, 20usize..=60)
        .prop_flat_map(|(w, h)| {
            let block = (0..w, 0..h, 2usize..15, 2usize..15);
            (Just(w), Just(h), proptest::collection::vec(block, 0..5))
        })
        .prop_map(|(w, h, blocks)| {
            let mut cells = vec![CellState::Free; w * h];
            for r in 0..h {
                for c in 0..w {
                    if r < 2 || c < 2 || r + 2 >= h || c + 2 >= w {
                        cells[r * w + c] = CellState::Occupied;
                    }
                }
            }
            for (c0, r0, bw, bh) in blocks {
                for r in r0..(r0 + bh).min(h) {
                    for c in c0..(c0 + bw).min(w) {
                        cells[r * w + c] = CellState::Occupied;
                    }
                }
            }
            cells[(h / 2) * w + w / 2] = CellState::Free;
            OccupancyGrid::new(w, h, 0.1, WorldPoint::new(0.0, 0.0), cells).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ascii_round_trip(grid in grid_strategy()) {
        let text = grid.to_ascii();
        prop_assert_eq!(OccupancyGrid::from_ascii(&text).unwrap(), grid);
    }

    #[test]
    fn cell_sets_inside_map(grid in grid_strategy()) {
        let sets = cell_sets(&grid);
        for p in sets.known.iter().chain(&sets.free) {
            prop_assert!(grid.contains(*p));
        }
        for p in &sets.free {
            prop_assert!(sets.known.contains(p));
        }
        prop_assert_eq!(sets.free.len(), grid.count(CellState::Free));
    }

    #[test]
    fn distance_transform_matches_brute_force(grid in grid_strategy()) {
        let field = distance_transform(&grid);
        let brute = oracle::brute_force_clearance(&grid);
        for (i, expected) in brute.iter().enumerate() {
            prop_assert_eq!(field.clearance_at(i), *expected, "cell {}", i);
        }
    }

    #[test]
    fn coverage_matches_brute_force(
        (grid, pts, op) in grid_strategy().prop_flat_map(|g| {
            let pts = proptest::collection::vec(point_in(&g), 0..6);
            let op = point_in(&g);
            (Just(g), pts, op)
        }),
        r in 0.0f64..4.0,
        known in any::<bool>(),
    ) {
        let universe = if known { CellUniverse::Known } else { CellUniverse::Free };
        let report = coverage::acp(&grid, &pts, op, r, universe).unwrap();
        let (total, covered) = oracle::brute_force_coverage(&grid, &pts, op, r, universe);
        prop_assert_eq!(report.total_cells, total);
        prop_assert_eq!(report.covered_cells, covered);
        prop_assert!((0.0..=100.0).contains(&report.acp));
    }

    #[test]
    fn coverage_monotone_and_idempotent(
        (grid, pts, extra, op) in grid_strategy().prop_flat_map(|g| {
            let pts = proptest::collection::vec(point_in(&g), 0..5);
            (Just(g.clone()), pts, point_in(&g), point_in(&g))
        }),
        r in 0.0f64..3.0,
    ) {
        let u = CellUniverse::Known;
        let base = coverage::acp(&grid, &pts, op, r, u).unwrap();
        let mut more = pts.clone();
        more.push(extra);
        prop_assert!(coverage::acp(&grid, &more, op, r, u).unwrap().covered_cells >= base.covered_cells);
        let mut doubled = pts.clone();
        doubled.extend_from_slice(&pts);
        prop_assert_eq!(coverage::acp(&grid, &doubled, op, r, u).unwrap().covered_cells, base.covered_cells);
        let wider = coverage::acp(&grid, &pts, op, r + 0.5, u).unwrap();
        prop_assert!(wider.covered_cells >= base.covered_cells);
    }

    #[test]
    fn coverage_union_bound(
        (grid, pts, op) in grid_strategy().prop_flat_map(|g| {
            let pts = proptest::collection::vec(point_in(&g), 0..5);
            (Just(g.clone()), pts, point_in(&g))
        }),
        r in 0.0f64..3.0,
    ) {
        let u = CellUniverse::Free;
        let union = coverage::acp(&grid, &pts, op, r, u).unwrap().covered_cells;
        let disks: Vec<Vec<usize>> = pts.iter().chain(std::iter::once(&op))
            .map(|&p| covered_cells(&grid, p, r, u))
            .collect();
        let sum: usize = disks.iter().map(Vec::len).sum();
        prop_assert!(union <= sum);
        let disjoint = disks.iter().enumerate().all(|(i, a)| {
            disks[i + 1..].iter().all(|b| a.iter().all(|c| !b.contains(c)))
        });
        prop_assert_eq!(union == sum, disjoint);
    }

    #[test]
    fn shortest_paths_match_floyd_warshall(g in graph_strategy()) {
        let fw = oracle::floyd_warshall(&g).unwrap();
        for u in 0..g.len() {
            for v in 0..g.len() {
                let d = g.shortest_path_length(u, v);
                prop_assert!((d - fw[u][v]).abs() <= 1e-9, "{} {} {} {}", u, v, d, fw[u][v]);
                prop_assert_eq!(g.generalized_distance(g.node(u), g.node(v)), d);
            }
        }
    }

    #[test]
    fn generalized_distance_properties(
        (g, pts) in graph_strategy().prop_flat_map(|g| {
            let pts = proptest::collection::vec((-5.0f64..25.0, -5.0f64..25.0), 3);
            (Just(g), pts)
        }),
    ) {
        let [a, b, c] = [0, 1, 2].map(|i| WorldPoint::new(pts[i].0, pts[i].1));
        let ab = g.generalized_distance(a, b);
        prop_assert_eq!(ab, g.generalized_distance(b, a));
        prop_assert!(ab >= 0.0);
        prop_assert!(ab <= g.generalized_distance(a, c) + g.generalized_distance(c, b) + 1e-9);
        prop_assert_eq!(g.generalized_distance(a, a) == 0.0, g.nodes().contains(&a));
        let anchor = g.anchor(a);
        for v in 0..g.len() {
            prop_assert_eq!(anchor.distance_to_node(v), g.generalized_distance(a, g.node(v)));
        }
    }

    #[test]
    fn nearest_node_is_closest(
        (g, pts) in graph_strategy().prop_flat_map(|g| {
            (Just(g), proptest::collection::vec((-5.0f64..25.0, -5.0f64..25.0), 5))
        }),
    ) {
        for (x, y) in pts {
            let p = WorldPoint::new(x, y);
            let k = g.nearest_node(p);
            let best = (0..g.len())
                .min_by(|&a, &b| g.node(a).distance_sq(&p).total_cmp(&g.node(b).distance_sq(&p)).then(a.cmp(&b)))
                .unwrap();
            prop_assert_eq!(k, best);
        }
    }

    #[test]
    fn json_round_trip(g in graph_strategy()) {
        let text = g.to_json().unwrap();
        prop_assert_eq!(RoadmapGraph::from_json(&text).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distilled_graphs_are_valid(grid in blocky_map_strategy()) {
        let params = SkeletonParams::default();
        match distill(&grid, &params) {
            Ok(raw) => {
                let g = finalize_graph(&raw, grid.origin()).unwrap();
                let issues = oracle::graph_violations(&grid, &g, params.min_clearance);
                prop_assert!(issues.is_empty(), "{:?}", issues);
            }
            Err(Error::NoSkeleton(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn shorter_segments_never_remove_nodes(grid in blocky_map_strategy()) {
        let mut last = 0;
        for seg in [3.0, 2.0, 1.5, 1.0, 0.7, 0.5, 0.3] {
            let params = SkeletonParams { segment_length: seg, ..SkeletonParams::default() };
            let Ok(raw) = distill(&grid, &params) else { return Ok(()) };
            prop_assert!(raw.nodes.len() >= last, "seg {}: {} < {}", seg, raw.nodes.len(), last);
            last = raw.nodes.len();
        }
    }

    #[test]
    fn planner_passes_audit_and_oracle_bound(
        grid in blocky_map_strategy(),
        n in 1usize..=3,
        r in 0.5f64..3.0,
        px in 0.0f64..1.0,
        py in 0.0f64..1.0,
    ) {
        let Ok(raw) = distill(&grid, &SkeletonParams::default()) else { return Ok(()) };
        let g = finalize_graph(&raw, grid.origin()).unwrap();
        let op = WorldPoint::new(px * grid.width_m(), py * grid.height_m());
        let sc = Scenario::new(op, n, r, 0).unwrap();
        let placement = select_positions(&g, &grid, &sc).unwrap();
        prop_assert_eq!(&select_positions(&g, &grid, &sc).unwrap(), &placement);
        let issues = oracle::audit_placement(&g, &grid, &sc, &placement);
        prop_assert!(issues.is_empty(), "{:?}", issues);
        for p in &placement.positions {
            prop_assert!(g.nodes().contains(p));
        }
        let placed = placement.positions.len();
        if let Ok(best) = oracle::exhaustive_best_acp(&grid, &g, op, placed, r, CellUniverse::Known) {
            let got = coverage::acp(&grid, &placement.positions, op, r, CellUniverse::Known).unwrap();
            prop_assert!(best.covered_cells >= got.covered_cells);
        }
    }

    #[test]
    fn baseline_draws_respect_constraints(
        grid in blocky_map_strategy(),
        n in 1usize..=6,
        r in 0.5f64..3.0,
        seed in any::<u64>(),
        px in 0.0f64..1.0,
        py in 0.0f64..1.0,
    ) {
        let op = WorldPoint::new(px * grid.width_m(), py * grid.height_m());
        let sc = Scenario::new(op, n, r, seed).unwrap();
        let out = baseline::conditional_random(&grid, &sc).unwrap();
        prop_assert_eq!(&baseline::conditional_random(&grid, &sc).unwrap(), &out);
        prop_assert_eq!(out.positions.len() + out.exhausted_steps.len(), n);
        let mut cells = out.cells.clone();
        cells.sort_unstable();
        cells.dedup();
        prop_assert_eq!(cells.len(), out.cells.len());
        for (k, &cell) in out.cells.iter().enumerate() {
            let (row, col) = grid.row_col(cell);
            prop_assert!(grid.is_free(row, col));
            prop_assert_eq!(grid.cell_center(row, col), out.positions[k]);
            let d = out.positions[k].distance(&out.anchors[k]);
            prop_assert!(d >= out.alpha && d < 2.0 * r);
        }
    }
}
