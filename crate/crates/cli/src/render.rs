//! Raster images of a placement.
//!
//! Each grid cell becomes a `scale x scale` block. Layers, bottom to top:
//! map cells, uncovered universe cells tinted red, translucent coverage
//! disks (green for robots, red for the operator), roadmap edges, then the
//! robot markers (green circles) and the operator marker (red square).

use std::path::Path;

use anyhow::Context;
use gmcpos::coverage::CoverageReport;
use gmcpos::{CellState, OccupancyGrid, RoadmapGraph, WorldPoint};
use image::{GrayImage, Luma, Rgb, RgbImage};

pub const DEFAULT_SCALE: u32 = 8;

const FREE: [u8; 3] = [255, 255, 255];
const OCCUPIED: [u8; 3] = [40, 40, 40];
const UNKNOWN: [u8; 3] = [150, 150, 150];
const UNCOVERED: [u8; 3] = [255, 190, 190];
const ROBOT: [u8; 3] = [0, 160, 60];
const OPERATOR: [u8; 3] = [210, 20, 20];
const EDGE: [u8; 3] = [60, 100, 220];

pub struct Scene<'a> {
    pub grid: &'a OccupancyGrid,
    pub graph: Option<&'a RoadmapGraph>,
    pub positions: &'a [WorldPoint],
    pub operator: WorldPoint,
    pub radius: f64,
    pub coverage: &'a CoverageReport,
}

/// Pixel frame: world meters to image pixels.
struct Frame {
    origin: WorldPoint,
    top: f64,
    px_per_m: f64,
    width: u32,
    height: u32,
}

impl Frame {
    fn new(grid: &OccupancyGrid, scale: u32) -> Self {
        Frame {
            origin: grid.origin(),
            top: grid.origin().y + grid.height_m(),
            px_per_m: scale as f64 / grid.resolution(),
            width: grid.width() as u32 * scale,
            height: grid.height() as u32 * scale,
        }
    }

    fn to_px(&self, p: WorldPoint) -> (f64, f64) {
        ((p.x - self.origin.x) * self.px_per_m, (self.top - p.y) * self.px_per_m)
    }

    fn pixel_center(&self, x: u32, y: u32) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + (x as f64 + 0.5) / self.px_per_m,
            self.top - (y as f64 + 0.5) / self.px_per_m,
        )
    }

    /// Pixels whose centers lie within `radius` meters of `center`.
    fn disk(&self, center: WorldPoint, radius: f64) -> impl Iterator<Item = (u32, u32)> + '_ {
        let (cx, cy) = self.to_px(center);
        let rp = radius * self.px_per_m;
        let clamp = |v: f64, max: u32| v.max(0.0).min(max as f64) as u32;
        let (x0, x1) = (clamp((cx - rp).floor(), self.width), clamp((cx + rp).ceil() + 1.0, self.width));
        let (y0, y1) = (clamp((cy - rp).floor(), self.height), clamp((cy + rp).ceil() + 1.0, self.height));
        (y0..y1)
            .flat_map(move |y| (x0..x1).map(move |x| (x, y)))
            .filter(move |&(x, y)| self.pixel_center(x, y).distance(&center) <= radius)
    }
}

fn blend(img: &mut RgbImage, x: u32, y: u32, color: [u8; 3], alpha: f64) {
    let px = img.get_pixel_mut(x, y);
    for k in 0..3 {
        px.0[k] = (px.0[k] as f64 * (1.0 - alpha) + color[k] as f64 * alpha).round() as u8;
    }
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), color: [u8; 3]) {
    let steps = (a.0 - b.0).abs().max((a.1 - b.1).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let x = (a.0 + (b.0 - a.0) * t).floor();
        let y = (a.1 + (b.1 - a.1) * t).floor();
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, Rgb(color));
        }
    }
}

/// Draw a scene. Returns the image and the number of highlighted
/// (uncovered universe) cells.
pub fn render(scene: &Scene<'_>, scale: u32) -> (RgbImage, usize) {
    let grid = scene.grid;
    let scale = scale.max(1);
    let frame = Frame::new(grid, scale);
    let mut img = RgbImage::new(frame.width, frame.height);
    let mut highlighted = 0;

    for (i, &state) in grid.cells().iter().enumerate() {
        let (row, col) = grid.row_col(i);
        let uncovered = scene.coverage.universe.contains(state) && !scene.coverage.mask[i];
        let color = if uncovered {
            highlighted += 1;
            UNCOVERED
        } else {
            match state {
                CellState::Free => FREE,
                CellState::Occupied => OCCUPIED,
                CellState::Unknown => UNKNOWN,
            }
        };
        for dy in 0..scale {
            for dx in 0..scale {
                img.put_pixel(col as u32 * scale + dx, row as u32 * scale + dy, Rgb(color));
            }
        }
    }

    let disks: Vec<(WorldPoint, [u8; 3])> = scene
        .positions
        .iter()
        .map(|&p| (p, ROBOT))
        .chain(std::iter::once((scene.operator, OPERATOR)))
        .collect();
    for &(center, color) in &disks {
        for (x, y) in frame.disk(center, scene.radius) {
            blend(&mut img, x, y, color, 0.15);
        }
    }

    if let Some(graph) = scene.graph {
        for (u, v, _) in graph.edges() {
            line(&mut img, frame.to_px(graph.node(u)), frame.to_px(graph.node(v)), EDGE);
        }
    }

    let marker = (1.5 * scale as f64).max(3.0);
    for &p in scene.positions {
        let marker_m = marker / frame.px_per_m;
        for (x, y) in frame.disk(p, marker_m).collect::<Vec<_>>() {
            img.put_pixel(x, y, Rgb(ROBOT));
        }
    }
    let (ox, oy) = frame.to_px(scene.operator);
    for y in (oy - marker).floor() as i64..=(oy + marker).ceil() as i64 {
        for x in (ox - marker).floor() as i64..=(ox + marker).ceil() as i64 {
            if x >= 0 && y >= 0 && (x as u32) < frame.width && (y as u32) < frame.height {
                img.put_pixel(x as u32, y as u32, Rgb(OPERATOR));
            }
        }
    }
    (img, highlighted)
}

/// Coverage mask, one pixel per cell: covered 255, uncovered universe
/// cells 0, cells outside the universe 128.
pub fn mask_image(grid: &OccupancyGrid, coverage: &CoverageReport) -> GrayImage {
    let mut img = GrayImage::new(grid.width() as u32, grid.height() as u32);
    for (i, &state) in grid.cells().iter().enumerate() {
        let (row, col) = grid.row_col(i);
        let v = if coverage.mask[i] {
            255
        } else if coverage.universe.contains(state) {
            0
        } else {
            128
        };
        img.put_pixel(col as u32, row as u32, Luma([v]));
    }
    img
}

pub fn save_png(img: &RgbImage, path: &Path) -> anyhow::Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn save_mask(img: &GrayImage, path: &Path) -> anyhow::Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", path.display()))
}
