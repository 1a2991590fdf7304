//! Voronoi distillation: occupancy grid to a sparse, connected skeleton graph.
//!
//! The stages are the exact distance transform ([`distance_transform`]),
//! ridge skeleton extraction ([`extract_skeleton`]) and tracing the skeleton
//! into a graph with subdivided segments, merged crossings and pruned end
//! segments ([`build_raw_graph`]).

mod edt;
mod graph;
mod skeleton;

use serde::{Deserialize, Serialize};

pub use edt::{distance_transform, ClearanceField};
pub use graph::build_raw_graph;
pub use skeleton::{extract_skeleton, Skeleton};

use crate::{Error, OccupancyGrid, Result, WorldPoint};

/// Tuning for [`build_raw_graph`] and [`extract_skeleton`]. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    /// Maximum spacing between consecutive graph nodes along a segment.
    pub segment_length: f64,
    /// Junctions joined by a skeleton branch shorter than this are merged.
    pub crossing_merge_radius: f64,
    /// Dangling branches shorter than this are pruned.
    pub end_segment_min_length: f64,
    /// Skeleton cells must be at least this far from any non-Free cell.
    pub min_clearance: f64,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        Self {
            segment_length: 1.0,
            crossing_merge_radius: 0.4,
            end_segment_min_length: 1.0,
            min_clearance: 0.25,
        }
    }
}

impl SkeletonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.segment_length.is_finite() && self.segment_length > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "segment_length must be positive, got {}",
                self.segment_length
            )));
        }
        for (name, v) in [
            ("crossing_merge_radius", self.crossing_merge_radius),
            ("end_segment_min_length", self.end_segment_min_length),
            ("min_clearance", self.min_clearance),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "{name} must be a non-negative number, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Unweighted skeleton graph. Node coordinates are relative to the map's
/// bottom-left corner; the map origin is added by
/// [`crate::roadmap::finalize_graph`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawGraph {
    pub nodes: Vec<WorldPoint>,
    pub edges: Vec<[usize; 2]>,
    /// Skeleton components dropped because they were not the largest.
    #[serde(skip)]
    pub dropped_components: usize,
}

impl RawGraph {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGraph = serde_json::from_str(text)?;
        raw.validate()?;
        Ok(raw)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &[a, b] in &self.edges {
            if a >= self.nodes.len() || b >= self.nodes.len() {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(())
    }
}

/// Run the whole distillation on a grid.
pub fn distill(grid: &OccupancyGrid, params: &SkeletonParams) -> Result<RawGraph> {
    let field = distance_transform(grid);
    let skeleton = extract_skeleton(&field, params)?;
    build_raw_graph(&skeleton, params)
}
