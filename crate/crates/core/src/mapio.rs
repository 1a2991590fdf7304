//! Occupancy grid maps.
//!
//! Two on-disk formats are understood:
//!
//! - ROS `map_server` style: a YAML metadata file (`image`, `resolution`,
//!   `origin`, `negate`, `occupied_thresh`, `free_thresh`) next to an 8-bit
//!   binary graymap (P5).
//! - A plain ASCII fixture format: `resolution:` and `origin:` header lines
//!   followed by one text row per grid row, `#` occupied, `.` free, `?` unknown.
//!
//! ## Coordinate frames
//!
//! Row 0 is the top of the picture. The origin is the world position of the
//! bottom-left corner of the map, so the center of cell `(row, col)` is
//!
//! ```text
//! x = origin.x + (col + 0.5) * resolution
//! y = origin.y + (height - 1 - row + 0.5) * resolution
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, WorldPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    pub fn symbol(self) -> char {
        match self {
            CellState::Free => '.',
            CellState::Occupied => '#',
            CellState::Unknown => '?',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '.' => Some(CellState::Free),
            '#' => Some(CellState::Occupied),
            '?' => Some(CellState::Unknown),
            _ => None,
        }
    }
}

/// Which cells count as the map area when scoring coverage.
///
/// `Known` is Free plus Occupied; Unknown cells never count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellUniverse {
    Free,
    #[default]
    Known,
}

impl CellUniverse {
    #[inline]
    pub fn contains(self, state: CellState) -> bool {
        match self {
            CellUniverse::Free => state == CellState::Free,
            CellUniverse::Known => state != CellState::Unknown,
        }
    }
}

impl std::str::FromStr for CellUniverse {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "free" => Ok(CellUniverse::Free),
            "known" => Ok(CellUniverse::Known),
            other => Err(format!("unknown coverage universe '{other}' (expected free|known)")),
        }
    }
}

impl std::fmt::Display for CellUniverse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CellUniverse::Free => "free",
            CellUniverse::Known => "known",
        })
    }
}

/// A validated 2D occupancy grid. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: WorldPoint,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: WorldPoint,
        cells: Vec<CellState>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(format!("empty grid {width}x{height}")));
        }
        if cells.len() != width * height {
            return Err(Error::InvalidMap(format!(
                "cell count {} does not match {width}x{height}",
                cells.len()
            )));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidMap(format!(
                "resolution must be a positive number, got {resolution}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidMap(format!("non-finite origin {origin}")));
        }
        if !cells.contains(&CellState::Free) {
            return Err(Error::InvalidMap("map has no free cells".into()));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    /// Number of columns (W₀).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of rows (H₀).
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> WorldPoint {
        self.origin
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    /// Map width in meters.
    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.resolution
    }

    /// Map height in meters.
    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.resolution
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn row_col(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    #[inline]
    pub fn state(&self, row: usize, col: usize) -> CellState {
        self.cells[self.index(row, col)]
    }

    #[inline]
    pub fn is_free(&self, row: usize, col: usize) -> bool {
        self.state(row, col) == CellState::Free
    }

    /// World position of the center of cell `(row, col)`.
    #[inline]
    pub fn cell_center(&self, row: usize, col: usize) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + (col as f64 + 0.5) * self.resolution,
            self.origin.y + ((self.height - 1 - row) as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing a world point, if inside the map.
    pub fn cell_at(&self, p: WorldPoint) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if !(fx >= 0.0 && fy >= 0.0 && fx < self.width as f64 && fy < self.height as f64) {
            return None;
        }
        let col = fx as usize;
        let row = self.height - 1 - fy as usize;
        Some((row, col))
    }

    /// True if `p` lies in the closed world rectangle covered by the map.
    pub fn contains(&self, p: WorldPoint) -> bool {
        p.x >= self.origin.x
            && p.y >= self.origin.y
            && p.x <= self.origin.x + self.width_m()
            && p.y <= self.origin.y + self.height_m()
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// Parse the ASCII fixture format.
    pub fn from_ascii(text: &str) -> Result<Self> {
        Self::from_ascii_named(text, "<ascii map>")
    }

    fn from_ascii_named(text: &str, name: &str) -> Result<Self> {
        let mut resolution = None;
        let mut origin = WorldPoint::default();
        let mut rows: Vec<Vec<CellState>> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once(':') {
                if !rows.is_empty() {
                    return Err(Error::parse(
                        name,
                        format!("line {}: header after grid rows", lineno + 1),
                    ));
                }
                match key.trim() {
                    "resolution" => {
                        let v: f64 = value.trim().parse().map_err(|_| {
                            Error::parse(name, format!("line {}: bad resolution", lineno + 1))
                        })?;
                        resolution = Some(v);
                    }
                    "origin" => origin = parse_origin(value).map_err(|m| Error::parse(name, m))?,
                    other => {
                        return Err(Error::parse(
                            name,
                            format!("line {}: unknown header '{other}'", lineno + 1),
                        ))
                    }
                }
                continue;
            }
            let row = line
                .chars()
                .enumerate()
                .map(|(col, c)| {
                    CellState::from_symbol(c).ok_or_else(|| {
                        Error::parse(
                            name,
                            format!("line {}, column {}: unknown cell symbol {c:?}", lineno + 1, col + 1),
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(
                        name,
                        format!(
                            "line {}: row has {} cells, expected {}",
                            lineno + 1,
                            row.len(),
                            first.len()
                        ),
                    ));
                }
            }
            rows.push(row);
        }

        let resolution =
            resolution.ok_or_else(|| Error::parse(name, "missing 'resolution:' header"))?;
        if rows.is_empty() {
            return Err(Error::parse(name, "no grid rows"));
        }
        let height = rows.len();
        let width = rows[0].len();
        Self::new(width, height, resolution, origin, rows.concat())
    }

    /// Serialize to the ASCII fixture format. Re-parsing yields an identical grid.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height + 64);
        let _ = writeln!(out, "resolution: {:?}", self.resolution);
        let _ = writeln!(out, "origin: [{:?}, {:?}]", self.origin.x, self.origin.y);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|c| c.symbol()));
            out.push('\n');
        }
        out
    }
}

fn parse_origin(value: &str) -> std::result::Result<WorldPoint, String> {
    let trimmed = value.trim().trim_start_matches('[').trim_end_matches(']');
    let parts: Vec<f64> = trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad origin component '{s}'")))
        .collect::<std::result::Result<_, _>>()?;
    origin_from_components(&parts)
}

fn origin_from_components(parts: &[f64]) -> std::result::Result<WorldPoint, String> {
    match parts {
        [x, y] => Ok(WorldPoint::new(*x, *y)),
        [x, y, theta] => {
            if *theta != 0.0 {
                Err(format!("rotated maps are not supported (origin theta = {theta})"))
            } else {
                Ok(WorldPoint::new(*x, *y))
            }
        }
        _ => Err(format!("origin needs 2 or 3 components, got {}", parts.len())),
    }
}

/// ROS `map_server` metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapMetadata {
    pub image: PathBuf,
    pub resolution: f64,
    pub origin: Vec<f64>,
    #[serde(default)]
    pub negate: u8,
    #[serde(default = "default_occupied_thresh")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free_thresh")]
    pub free_thresh: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

fn default_occupied_thresh() -> f64 {
    0.65
}

fn default_free_thresh() -> f64 {
    0.196
}

impl MapMetadata {
    /// Classify one pixel using the trinary occupancy convention.
    pub fn classify(&self, value: u8) -> CellState {
        let p = if self.negate == 0 {
            (255.0 - value as f64) / 255.0
        } else {
            value as f64 / 255.0
        };
        if p > self.occupied_thresh {
            CellState::Occupied
        } else if p < self.free_thresh {
            CellState::Free
        } else {
            CellState::Unknown
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        for (key, v) in [
            ("occupied_thresh", self.occupied_thresh),
            ("free_thresh", self.free_thresh),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::parse(name, format!("{key} = {v} is outside [0, 1]")));
            }
        }
        if self.negate > 1 {
            return Err(Error::parse(name, format!("negate must be 0 or 1, got {}", self.negate)));
        }
        if let Some(mode) = &self.mode {
            if mode != "trinary" {
                return Err(Error::parse(name, format!("unsupported map mode '{mode}'")));
            }
        }
        Ok(())
    }
}

/// Load a map from disk. `.yaml`/`.yml` files are read as ROS metadata;
/// anything else as the ASCII fixture format.
pub fn parse_map(path: impl AsRef<Path>) -> Result<OccupancyGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.display().to_string();
    match path.extension().and_then(|e| e.to_str()) {
        Some("yaml") | Some("yml") => {
            let meta: MapMetadata = serde_yaml::from_str(&text)
                .map_err(|e| Error::parse(&name, format!("bad map metadata: {e}")))?;
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            load_ros_map(&meta, base, &name)
        }
        _ => OccupancyGrid::from_ascii_named(&text, &name),
    }
}

fn load_ros_map(meta: &MapMetadata, base: &Path, name: &str) -> Result<OccupancyGrid> {
    meta.validate(name)?;
    let origin = origin_from_components(&meta.origin).map_err(|m| Error::parse(name, m))?;
    let image_path = base.join(&meta.image);
    let img = image::ImageReader::open(&image_path)
        .map_err(|source| Error::Io {
            path: image_path.clone(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Io {
            path: image_path.clone(),
            source,
        })?
        .decode()
        .map_err(|e| Error::parse(image_path.display().to_string(), format!("bad image: {e}")))?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(Error::parse(
                image_path.display().to_string(),
                format!("expected an 8-bit grayscale image, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = gray.dimensions();
    let cells = gray.as_raw().iter().map(|&v| meta.classify(v)).collect();
    OccupancyGrid::new(w as usize, h as usize, meta.resolution, origin, cells)
}

/// Write a grid as a ROS-style map: `<stem>.yaml` plus `<stem>.pgm`.
pub fn write_ros_map(grid: &OccupancyGrid, yaml_path: impl AsRef<Path>) -> Result<()> {
    use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
    use image::ImageEncoder;

    let yaml_path = yaml_path.as_ref();
    let pgm_path = yaml_path.with_extension("pgm");
    let pixels: Vec<u8> = grid
        .cells
        .iter()
        .map(|c| match c {
            CellState::Free => 254,
            CellState::Occupied => 0,
            CellState::Unknown => 205,
        })
        .collect();
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    let file = std::fs::File::create(&pgm_path).map_err(io_err(&pgm_path))?;
    PnmEncoder::new(std::io::BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            &pixels,
            grid.width as u32,
            grid.height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::parse(pgm_path.display().to_string(), e.to_string()))?;

    let meta = MapMetadata {
        image: PathBuf::from(pgm_path.file_name().expect("pgm path has a file name")),
        resolution: grid.resolution,
        origin: vec![grid.origin.x, grid.origin.y, 0.0],
        negate: 0,
        occupied_thresh: default_occupied_thresh(),
        free_thresh: default_free_thresh(),
        mode: None,
    };
    let text = serde_yaml::to_string(&meta)
        .map_err(|e| Error::parse(yaml_path.display().to_string(), e.to_string()))?;
    std::fs::write(yaml_path, text).map_err(io_err(yaml_path))
}

/// Cell-center point sets of a grid, both in ascending (row, col) order.
#[derive(Debug, Clone, Default)]
pub struct CellSets {
    /// Free and Occupied cells: the map area.
    pub known: Vec<WorldPoint>,
    /// Free cells only: where robots may stand.
    pub free: Vec<WorldPoint>,
}

pub fn cell_sets(grid: &OccupancyGrid) -> CellSets {
    let mut sets = CellSets::default();
    for (i, &state) in grid.cells.iter().enumerate() {
        if state == CellState::Unknown {
            continue;
        }
        let (row, col) = grid.row_col(i);
        let p = grid.cell_center(row, col);
        sets.known.push(p);
        if state == CellState::Free {
            sets.free.push(p);
        }
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(text: &str) -> OccupancyGrid {
        OccupancyGrid::from_ascii(text).unwrap()
    }

    #[test]
    fn all_free_three_by_three() {
        let g = grid("resolution: 1.0\norigin: [0, 0]\n...\n...\n...\n");
        assert_eq!(g.count(CellState::Free), 9);
        assert_eq!(g.cell_center(1, 1), WorldPoint::new(1.5, 1.5));
    }

    #[test]
    fn single_row_with_offset_origin() {
        let g = grid("resolution: 0.5\norigin: [10, 20]\n#.#\n");
        assert_eq!(g.state(0, 1), CellState::Free);
        assert_eq!(g.cell_center(0, 1), WorldPoint::new(10.75, 20.25));
    }

    #[test]
    fn row_zero_is_top() {
        let g = grid("resolution: 1.0\n#.\n..\n");
        // Occupied top-left cell sits at the highest y.
        assert_eq!(g.cell_center(0, 0), WorldPoint::new(0.5, 1.5));
        assert_eq!(g.cell_at(WorldPoint::new(0.2, 1.9)), Some((0, 0)));
        assert_eq!(g.cell_at(WorldPoint::new(1.2, 0.1)), Some((1, 1)));
        assert_eq!(g.cell_at(WorldPoint::new(-0.1, 0.1)), None);
    }

    #[test]
    fn ros_threshold_convention() {
        let meta = MapMetadata {
            image: "x.pgm".into(),
            resolution: 0.05,
            origin: vec![0.0, 0.0, 0.0],
            negate: 0,
            occupied_thresh: 0.65,
            free_thresh: 0.196,
            mode: None,
        };
        assert_eq!(meta.classify(0), CellState::Occupied);
        assert_eq!(meta.classify(254), CellState::Free);
        assert_eq!(meta.classify(205), CellState::Unknown);

        let negated = MapMetadata { negate: 1, ..meta };
        assert_eq!(negated.classify(0), CellState::Free);
        assert_eq!(negated.classify(255), CellState::Occupied);
    }

    #[test]
    fn rejects_bad_ascii() {
        let err = OccupancyGrid::from_ascii("resolution: 1\n.x.\n").unwrap_err();
        assert!(err.to_string().contains("unknown cell symbol"), "{err}");

        let err = OccupancyGrid::from_ascii("resolution: 1\n###\n#?#\n").unwrap_err();
        assert!(matches!(err, Error::InvalidMap(_)), "{err}");

        assert!(OccupancyGrid::from_ascii("..\n..\n").is_err(), "missing resolution");
        assert!(OccupancyGrid::from_ascii("resolution: 1\n...\n..\n").is_err(), "ragged");
        assert!(OccupancyGrid::from_ascii("resolution: 0\n..\n").is_err());
        assert!(OccupancyGrid::from_ascii("resolution: 1\norigin: [0, 0, 0.5]\n..\n").is_err());
    }

    #[test]
    fn cell_set_counts() {
        let all_free = grid("resolution: 1\n..\n..\n");
        let sets = cell_sets(&all_free);
        assert_eq!((sets.known.len(), sets.free.len()), (4, 4));

        let one_wall = grid("resolution: 1\n.#\n..\n");
        let sets = cell_sets(&one_wall);
        assert_eq!((sets.known.len(), sets.free.len()), (4, 3));

        let one_unknown = grid("resolution: 1\n.?\n..\n");
        let sets = cell_sets(&one_unknown);
        assert_eq!((sets.known.len(), sets.free.len()), (3, 3));
    }

    #[test]
    fn ros_round_trip_through_disk() {
        let g = grid("resolution: 0.25\norigin: [-1.5, 2]\n#..?\n#...\n####\n");
        let dir = tempfile::tempdir().unwrap();
        let yaml = dir.path().join("room.yaml");
        write_ros_map(&g, &yaml).unwrap();
        assert!(dir.path().join("room.pgm").exists());
        assert_eq!(parse_map(&yaml).unwrap(), g);
    }

    #[test]
    fn ros_errors() {
        let dir = tempfile::tempdir().unwrap();
        let yaml = dir.path().join("m.yaml");
        std::fs::write(&yaml, "image: missing.pgm\nresolution: 0.1\norigin: [0, 0, 0]\n").unwrap();
        assert!(matches!(parse_map(&yaml), Err(Error::Io { .. })));

        // Header promises more pixels than the file holds.
        std::fs::write(dir.path().join("short.pgm"), b"P5\n4 4\n255\n\xfe\xfe").unwrap();
        std::fs::write(&yaml, "image: short.pgm\nresolution: 0.1\norigin: [0, 0, 0]\n").unwrap();
        assert!(matches!(parse_map(&yaml), Err(Error::Parse { .. })));

        std::fs::write(dir.path().join("ok.pgm"), b"P5\n2 1\n255\n\xfe\xfe").unwrap();
        std::fs::write(&yaml, "image: ok.pgm\nresolution: 0.1\norigin: [0, 0, 1.0]\n").unwrap();
        assert!(parse_map(&yaml).is_err(), "rotation is rejected");

        std::fs::write(
            &yaml,
            "image: ok.pgm\nresolution: 0.1\norigin: [0, 0, 0]\nfree_thresh: 1.5\n",
        )
        .unwrap();
        assert!(parse_map(&yaml).is_err());

        std::fs::write(&yaml, "image: ok.pgm\nresolution: 0.1\norigin: [3, 4, 0]\n").unwrap();
        let g = parse_map(&yaml).unwrap();
        assert_eq!((g.width(), g.height()), (2, 1));
        assert_eq!(g.origin(), WorldPoint::new(3.0, 4.0));
    }
}
