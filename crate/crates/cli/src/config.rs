//! Scenario configuration: TOML sections merged with command-line flags.
//!
//! A config file holds one table per scenario; the table name is the
//! scenario id. Any flag given on the command line overrides the matching
//! key in every section. Relative map paths in a file are resolved against
//! the file's directory.
//!
//! ```toml
//! [loop-bottom-left]
//! map = "loop_corridor.map"
//! operator = [1.4, 1.4]
//! robots = 3
//! coverage_universe = "free"
//! ```

use std::path::{Path, PathBuf};

use clap::Args;
use gmcpos::distill::SkeletonParams;
use gmcpos::planner::Scenario;
use gmcpos::{CellUniverse, WorldPoint};
use serde::{Deserialize, Serialize};

pub const DEFAULT_RADIUS: f64 = 6.0;
pub const DEFAULT_ITERATIONS: usize = 50;

/// Bad user input: missing files, missing keys. Exits with status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn parse_point(s: &str) -> Result<WorldPoint, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad coordinate '{v}': {e}"));
    Ok(WorldPoint::new(parse(x)?, parse(y)?))
}

/// Scenario keys, all optional. Used both for config file sections and
/// for command-line overrides.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFields {
    /// Map file: ROS map YAML, or the ASCII grid format.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Operator position in world meters.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
    pub operator: Option<WorldPoint>,
    /// Number of robots to place.
    #[arg(long, value_name = "N")]
    pub robots: Option<usize>,
    /// Coverage radius in meters [default: 6].
    #[arg(long, value_name = "R")]
    pub radius: Option<f64>,
    /// Seed for the random baseline [default: 0].
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Baseline draws to average [default: 50].
    #[arg(long, value_name = "K")]
    pub iterations: Option<usize>,
    /// Cells counted as the map area: free or known [default: known].
    #[arg(long, value_name = "free|known")]
    pub coverage_universe: Option<CellUniverse>,
    /// Maximum node spacing along roadmap segments, meters [default: 1].
    #[arg(long, value_name = "M")]
    pub segment_length: Option<f64>,
    /// Junctions closer than this along the skeleton are merged [default: 0.4].
    #[arg(long, value_name = "M")]
    pub crossing_merge_radius: Option<f64>,
    /// Dangling branches shorter than this are pruned [default: 1].
    #[arg(long, value_name = "M")]
    pub end_segment_min_length: Option<f64>,
    /// Minimum obstacle clearance of roadmap cells [default: 0.25].
    #[arg(long, value_name = "M")]
    pub min_clearance: Option<f64>,
}

impl ScenarioFields {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: &ScenarioFields) -> ScenarioFields {
        ScenarioFields {
            map: over.map.clone().or(self.map),
            operator: over.operator.or(self.operator),
            robots: over.robots.or(self.robots),
            radius: over.radius.or(self.radius),
            seed: over.seed.or(self.seed),
            iterations: over.iterations.or(self.iterations),
            coverage_universe: over.coverage_universe.or(self.coverage_universe),
            segment_length: over.segment_length.or(self.segment_length),
            crossing_merge_radius: over.crossing_merge_radius.or(self.crossing_merge_radius),
            end_segment_min_length: over.end_segment_min_length.or(self.end_segment_min_length),
            min_clearance: over.min_clearance.or(self.min_clearance),
        }
    }
}

/// Map and roadmap settings; all the `graph` subcommand needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapConfig {
    pub id: String,
    pub map: PathBuf,
    pub skeleton: SkeletonParams,
}

impl MapConfig {
    pub fn resolve(id: &str, fields: &ScenarioFields) -> anyhow::Result<Self> {
        let map = fields
            .map
            .clone()
            .ok_or_else(|| input_error(format!("scenario '{id}': no map given (--map or `map` key)")))?;
        if !map.is_file() {
            return Err(input_error(format!("scenario '{id}': map file not found: {}", map.display())));
        }
        let defaults = SkeletonParams::default();
        let skeleton = SkeletonParams {
            segment_length: fields.segment_length.unwrap_or(defaults.segment_length),
            crossing_merge_radius: fields.crossing_merge_radius.unwrap_or(defaults.crossing_merge_radius),
            end_segment_min_length: fields.end_segment_min_length.unwrap_or(defaults.end_segment_min_length),
            min_clearance: fields.min_clearance.unwrap_or(defaults.min_clearance),
        };
        skeleton
            .validate()
            .map_err(|e| input_error(format!("scenario '{id}': {e}")))?;
        Ok(MapConfig {
            id: id.to_string(),
            map,
            skeleton,
        })
    }
}

/// Fully resolved scenario. Embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub map: PathBuf,
    pub operator: WorldPoint,
    pub robots: usize,
    pub radius: f64,
    pub seed: u64,
    pub iterations: usize,
    pub coverage_universe: CellUniverse,
    pub skeleton: SkeletonParams,
}

impl ScenarioConfig {
    pub fn resolve(id: &str, fields: ScenarioFields) -> anyhow::Result<Self> {
        let map = MapConfig::resolve(id, &fields)?;
        let cfg = ScenarioConfig {
            id: map.id,
            map: map.map,
            operator: fields
                .operator
                .ok_or_else(|| input_error(format!("scenario '{id}': no operator given (--operator or `operator` key)")))?,
            robots: fields
                .robots
                .ok_or_else(|| input_error(format!("scenario '{id}': no robot count given (--robots or `robots` key)")))?,
            radius: fields.radius.unwrap_or(DEFAULT_RADIUS),
            seed: fields.seed.unwrap_or(0),
            iterations: fields.iterations.unwrap_or(DEFAULT_ITERATIONS),
            coverage_universe: fields.coverage_universe.unwrap_or_default(),
            skeleton: map.skeleton,
        };
        cfg.scenario().map_err(|e| input_error(format!("scenario '{id}': {e}")))?;
        if cfg.iterations == 0 {
            return Err(input_error(format!("scenario '{id}': iterations must be at least 1")));
        }
        Ok(cfg)
    }

    pub fn scenario(&self) -> gmcpos::Result<Scenario> {
        Scenario::new(self.operator, self.robots, self.radius, self.seed)
    }

    pub fn map_config(&self) -> MapConfig {
        MapConfig {
            id: self.id.clone(),
            map: self.map.clone(),
            skeleton: self.skeleton,
        }
    }
}

/// Read a config file into `(id, fields)` pairs in file order.
pub fn read_config_file(path: &Path) -> anyhow::Result<Vec<(String, ScenarioFields)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read config file {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| input_error(format!("parsing config file {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for (id, value) in table {
        if !value.is_table() {
            return Err(input_error(format!(
                "{}: top-level key '{id}' is not a scenario section",
                path.display()
            )));
        }
        let mut fields: ScenarioFields = value
            .try_into()
            .map_err(|e| input_error(format!("{}: section [{id}]: {e}", path.display())))?;
        if let Some(map) = &fields.map {
            if map.is_relative() {
                fields.map = Some(base.join(map));
            }
        }
        out.push((id, fields));
    }
    if out.is_empty() {
        return Err(input_error(format!("{}: no scenario sections", path.display())));
    }
    Ok(out)
}

/// Sections to run: every section of `config` (or just `only`) with
/// `flags` laid over them, or a single section from flags alone.
pub fn load_sections(
    config: Option<&Path>,
    only: Option<&str>,
    flags: &ScenarioFields,
) -> anyhow::Result<Vec<(String, ScenarioFields)>> {
    let Some(path) = config else {
        return Ok(vec![(only.unwrap_or("cli").to_string(), flags.clone())]);
    };
    let mut sections = read_config_file(path)?;
    if let Some(id) = only {
        sections.retain(|(name, _)| name == id);
        if sections.is_empty() {
            return Err(input_error(format!("{}: no section named [{id}]", path.display())));
        }
    }
    Ok(sections
        .into_iter()
        .map(|(id, fields)| (id, fields.overlay(flags)))
        .collect())
}

pub fn load_scenarios(
    config: Option<&Path>,
    only: Option<&str>,
    flags: &ScenarioFields,
) -> anyhow::Result<Vec<ScenarioConfig>> {
    load_sections(config, only, flags)?
        .into_iter()
        .map(|(id, fields)| ScenarioConfig::resolve(&id, fields))
        .collect()
}

pub fn load_maps(config: Option<&Path>, only: Option<&str>, flags: &ScenarioFields) -> anyhow::Result<Vec<MapConfig>> {
    load_sections(config, only, flags)?
        .into_iter()
        .map(|(id, fields)| MapConfig::resolve(&id, &fields))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parsing() {
        assert_eq!(parse_point("1.5,-2").unwrap(), WorldPoint::new(1.5, -2.0));
        assert_eq!(parse_point(" 3 , 4 ").unwrap(), WorldPoint::new(3.0, 4.0));
        assert!(parse_point("3").is_err());
        assert!(parse_point("a,b").is_err());
    }

    #[test]
    fn file_sections_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.map"), "resolution: 1.0\norigin: [0.0, 0.0]\n...\n").unwrap();
        let cfg = dir.path().join("s.toml");
        std::fs::write(
            &cfg,
            "[b]\nmap = \"m.map\"\noperator = [0.5, 0.5]\nrobots = 1\n\n[a]\nmap = \"m.map\"\noperator = [1.5, 0.5]\nrobots = 2\nradius = 2.0\n",
        )
        .unwrap();
        let flags = ScenarioFields {
            seed: Some(9),
            ..Default::default()
        };
        let all = load_scenarios(Some(&cfg), None, &flags).unwrap();
        assert_eq!(all.iter().map(|s| s.id.as_str()).collect::<Vec<_>>(), vec!["b", "a"]);
        assert_eq!(all[0].map, dir.path().join("m.map"));
        assert_eq!(all[1].radius, 2.0);
        assert_eq!(all[0].radius, DEFAULT_RADIUS);
        assert!(all.iter().all(|s| s.seed == 9));
        assert_eq!(all[0].coverage_universe, CellUniverse::Known);

        let only = load_scenarios(Some(&cfg), Some("a"), &ScenarioFields::default()).unwrap();
        assert_eq!(only.len(), 1);
        assert!(load_scenarios(Some(&cfg), Some("zzz"), &ScenarioFields::default()).is_err());
    }

    #[test]
    fn missing_map_is_an_input_error() {
        let flags = ScenarioFields {
            map: Some("/no/such/map.yaml".into()),
            operator: Some(WorldPoint::new(0.0, 0.0)),
            robots: Some(1),
            ..Default::default()
        };
        let err = load_scenarios(None, None, &flags).unwrap_err();
        assert!(err.downcast_ref::<InputError>().is_some());
        assert!(err.to_string().contains("/no/such/map.yaml"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("s.toml");
        std::fs::write(&cfg, "[a]\nrobot = 3\n").unwrap();
        assert!(read_config_file(&cfg).is_err());
    }
}
