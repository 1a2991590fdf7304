//! Graph-based multi-robot coverage positioning.
//!
//! The pipeline turns an occupancy grid into a weighted roadmap graph,
//! selects robot positions on that graph around a human operator, and scores
//! the result by the fraction of the map covered by radius-`r` disks.
//!
//! ```text
//! mapio -> distill -> roadmap -> planner -> coverage
//!                                baseline -> coverage
//! ```
//!
//! [`oracle`] holds brute-force reference implementations used to check the
//! fast paths, and [`fixtures`] holds the bundled synthetic maps.

pub mod baseline;
pub mod coverage;
pub mod distill;
mod error;
pub mod fixtures;
mod geom;
pub mod mapio;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod roadmap;

pub use error::{Error, Result};
pub use geom::WorldPoint;
pub use mapio::{CellState, CellUniverse, OccupancyGrid};
pub use roadmap::RoadmapGraph;
