//! Bundled synthetic maps and the scenarios run on them.
//!
//! The maps are generated in code; `fixtures/` at the repository root holds
//! the same maps written out for the CLI, and a test keeps the two in sync.

use serde::{Deserialize, Serialize};

use crate::rng::SeededRng;
use crate::{CellState, OccupancyGrid, WorldPoint};

/// Builder over a blank grid, rows counted from the bottom so rectangles
/// can be given in world units.
struct Canvas {
    width: usize,
    height: usize,
    res: f64,
    cells: Vec<CellState>,
}

impl Canvas {
    fn new(width_m: f64, height_m: f64, res: f64, fill: CellState) -> Self {
        let width = (width_m / res).round() as usize;
        let height = (height_m / res).round() as usize;
        Self {
            width,
            height,
            res,
            cells: vec![fill; width * height],
        }
    }

    fn to_cells(&self, v: f64) -> usize {
        (v / self.res).round() as usize
    }

    /// Paint `[x0, x1) x [y0, y1)` in meters.
    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, state: CellState) {
        let (c0, c1) = (self.to_cells(x0), self.to_cells(x1).min(self.width));
        let (j0, j1) = (self.to_cells(y0), self.to_cells(y1).min(self.height));
        for j in j0..j1 {
            let row = self.height - 1 - j;
            for c in c0..c1 {
                self.cells[row * self.width + c] = state;
            }
        }
    }

    fn border(&mut self, thickness: f64) {
        let (w, h) = (self.width as f64 * self.res, self.height as f64 * self.res);
        self.rect(0.0, 0.0, w, thickness, CellState::Occupied);
        self.rect(0.0, h - thickness, w, h, CellState::Occupied);
        self.rect(0.0, 0.0, thickness, h, CellState::Occupied);
        self.rect(w - thickness, 0.0, w, h, CellState::Occupied);
    }

    fn finish(self) -> OccupancyGrid {
        OccupancyGrid::new(self.width, self.height, self.res, WorldPoint::new(0.0, 0.0), self.cells)
            .expect("fixture grids are valid")
    }
}

/// Square loop corridor, 12.2 m a side at 5 cm: 0.2 m outer walls, a 2.4 m
/// wide corridor and a solid central block.
pub fn loop_corridor() -> OccupancyGrid {
    let mut canvas = Canvas::new(12.2, 12.2, 0.05, CellState::Free);
    canvas.border(0.2);
    canvas.rect(2.6, 2.6, 9.6, 9.6, CellState::Occupied);
    canvas.finish()
}

/// Office floor, 36 x 22 m at 10 cm: a 2 m central corridor with four
/// rooms on each side behind 1.2 m doors, and a narrow 1.2 m passage
/// linking the two ends of the north wing.
pub fn multi_room() -> OccupancyGrid {
    let mut canvas = Canvas::new(36.0, 22.0, 0.1, CellState::Free);
    canvas.border(0.2);
    let wall = 0.2;
    // Corridor walls at y in [9.8, 10) and [12, 12.2).
    canvas.rect(0.0, 9.8, 36.0, 10.0, CellState::Occupied);
    canvas.rect(0.0, 12.0, 36.0, 12.2, CellState::Occupied);
    // Room partitions.
    for x in [9.0, 18.0, 27.0] {
        canvas.rect(x - wall / 2.0, 0.0, x + wall / 2.0, 9.8, CellState::Occupied);
        canvas.rect(x - wall / 2.0, 12.2, x + wall / 2.0, 19.8, CellState::Occupied);
    }
    // North passage behind the north rooms.
    canvas.rect(0.0, 19.8, 36.0, 20.0, CellState::Occupied);
    canvas.rect(0.2, 20.0, 35.8, 21.2, CellState::Free);
    // Doors: one per room onto the corridor, plus passage doors at both ends.
    for x in [3.9, 12.9, 21.9, 30.9] {
        canvas.rect(x, 9.8, x + 1.2, 10.0, CellState::Free);
        canvas.rect(x, 12.0, x + 1.2, 12.2, CellState::Free);
    }
    for x in [1.2, 33.6] {
        canvas.rect(x, 19.8, x + 1.2, 20.0, CellState::Free);
    }
    canvas.finish()
}

/// Randomized floor plan: a rectangle split recursively by walls, each new
/// wall pierced by one door.
pub fn random_rooms(seed: u64) -> OccupancyGrid {
    const WALL: usize = 2;
    const MIN_ROOM: usize = 30;
    let mut rng = SeededRng::new(seed);
    let width = 120 + rng.index(100);
    let height = 100 + rng.index(80);
    let mut occupied = vec![false; width * height];
    for r in 0..height {
        for c in 0..width {
            if r < WALL || c < WALL || r >= height - WALL || c >= width - WALL {
                occupied[r * width + c] = true;
            }
        }
    }

    // Rooms as half-open (r0, c0, r1, c1) interiors.
    let mut pending = vec![(WALL, WALL, height - WALL, width - WALL)];
    while let Some((r0, c0, r1, c1)) = pending.pop() {
        let (h, w) = (r1 - r0, c1 - c0);
        let horizontal = h >= w;
        let span = if horizontal { h } else { w };
        if span < 2 * MIN_ROOM + WALL {
            continue;
        }
        let is_occ = |occupied: &[bool], r: usize, c: usize| occupied[r * width + c];
        let mut placed = None;
        for _ in 0..20 {
            let p = MIN_ROOM + rng.index(span - 2 * MIN_ROOM - WALL + 1);
            // Both ends of the new wall must meet solid wall, not a door.
            let ok = (0..WALL).all(|t| {
                if horizontal {
                    is_occ(&occupied, r0 + p + t, c0 - 1) && is_occ(&occupied, r0 + p + t, c1)
                } else {
                    is_occ(&occupied, r0 - 1, c0 + p + t) && is_occ(&occupied, r1, c0 + p + t)
                }
            });
            if ok {
                placed = Some(p);
                break;
            }
        }
        let Some(p) = placed else { continue };
        let length = if horizontal { w } else { h };
        let door = 10 + rng.index(6);
        let door_at = rng.index(length - door + 1);
        for t in 0..WALL {
            for k in 0..length {
                let open = k >= door_at && k < door_at + door;
                let (r, c) = if horizontal { (r0 + p + t, c0 + k) } else { (r0 + k, c0 + p + t) };
                occupied[r * width + c] = !open;
            }
        }
        if horizontal {
            pending.push((r0, c0, r0 + p, c1));
            pending.push((r0 + p + WALL, c0, r1, c1));
        } else {
            pending.push((r0, c0, r1, c0 + p));
            pending.push((r0, c0 + p + WALL, r1, c1));
        }
    }

    let cells = occupied
        .into_iter()
        .map(|o| if o { CellState::Occupied } else { CellState::Free })
        .collect();
    OccupancyGrid::new(width, height, 0.1, WorldPoint::new(0.0, 0.0), cells).expect("generated grid is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureMap {
    LoopCorridor,
    MultiRoom,
}

impl FixtureMap {
    pub fn grid(self) -> OccupancyGrid {
        match self {
            FixtureMap::LoopCorridor => loop_corridor(),
            FixtureMap::MultiRoom => multi_room(),
        }
    }

    /// File name of the ASCII copy under `fixtures/`.
    pub fn file_name(self) -> &'static str {
        match self {
            FixtureMap::LoopCorridor => "loop_corridor.map",
            FixtureMap::MultiRoom => "multi_room.map",
        }
    }
}

/// A bundled scenario. Operator positions are concrete picks for the
/// qualitative placements in the scenario names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureScenario {
    pub id: &'static str,
    pub map: FixtureMap,
    pub operator: WorldPoint,
    pub robot_count: usize,
    pub coverage_radius: f64,
}

pub const SCENARIOS: [FixtureScenario; 4] = [
    FixtureScenario {
        id: "loop-bottom-left",
        map: FixtureMap::LoopCorridor,
        operator: WorldPoint::new(1.4, 1.4),
        robot_count: 3,
        coverage_radius: 6.0,
    },
    FixtureScenario {
        id: "loop-top-right",
        map: FixtureMap::LoopCorridor,
        operator: WorldPoint::new(10.8, 10.8),
        robot_count: 3,
        coverage_radius: 6.0,
    },
    FixtureScenario {
        id: "rooms-west",
        map: FixtureMap::MultiRoom,
        operator: WorldPoint::new(1.5, 11.0),
        robot_count: 5,
        coverage_radius: 6.0,
    },
    FixtureScenario {
        id: "rooms-center",
        map: FixtureMap::MultiRoom,
        operator: WorldPoint::new(18.0, 11.0),
        robot_count: 6,
        coverage_radius: 6.0,
    },
];
