//! Scenario runs behind each subcommand. Every report embeds the resolved
//! scenario config and contains nothing time- or host-dependent, so equal
//! inputs give byte-equal output.

use anyhow::Context;
use gmcpos::baseline::{self, BaselineSummary};
use gmcpos::coverage::{self, CoverageReport};
use gmcpos::oracle::{self, ExhaustiveResult};
use gmcpos::planner::{select_positions, PlacementResult};
use gmcpos::roadmap::finalize_graph;
use gmcpos::{distill, mapio, OccupancyGrid, RoadmapGraph};
use serde::Serialize;

use crate::config::{MapConfig, ScenarioConfig};

/// Map and roadmap for one scenario.
pub struct Prepared {
    pub config: MapConfig,
    pub grid: OccupancyGrid,
    pub graph: RoadmapGraph,
}

pub fn prepare(config: &MapConfig) -> anyhow::Result<Prepared> {
    let grid = mapio::parse_map(&config.map).with_context(|| format!("scenario '{}'", config.id))?;
    let graph = build_graph(&grid, config)?;
    log::info!(
        "{}: {}x{} grid, roadmap with {} nodes and {} edges",
        config.id,
        grid.width(),
        grid.height(),
        graph.len(),
        graph.edge_count()
    );
    Ok(Prepared {
        config: config.clone(),
        grid,
        graph,
    })
}

fn build_graph(grid: &OccupancyGrid, config: &MapConfig) -> anyhow::Result<RoadmapGraph> {
    let raw = distill::distill(grid, &config.skeleton).with_context(|| format!("scenario '{}': distillation", config.id))?;
    if raw.dropped_components > 0 {
        log::warn!(
            "{}: kept the largest roadmap component, dropped {}",
            config.id,
            raw.dropped_components
        );
    }
    Ok(finalize_graph(&raw, grid.origin())?)
}

/// The `graph` subcommand's JSON, also written by `plan --emit-graph`.
pub fn graph_json(prepared: &Prepared) -> anyhow::Result<String> {
    let mut text = prepared.graph.to_json()?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub config: ScenarioConfig,
    pub graph: GraphSummary,
    pub placement: PlacementResult,
    pub coverage: CoverageReport,
}

pub fn run_plan(cfg: &ScenarioConfig, prepared: &Prepared) -> anyhow::Result<PlanReport> {
    let scenario = cfg.scenario()?;
    let placement = select_positions(&prepared.graph, &prepared.grid, &scenario)
        .with_context(|| format!("scenario '{}': placement", cfg.id))?;
    let coverage = coverage::acp(
        &prepared.grid,
        &placement.positions,
        cfg.operator,
        cfg.radius,
        cfg.coverage_universe,
    )?;
    log::info!("{}: planner ACP {:.2}", cfg.id, coverage.acp);
    Ok(PlanReport {
        config: cfg.clone(),
        graph: GraphSummary {
            nodes: prepared.graph.len(),
            edges: prepared.graph.edge_count(),
        },
        placement,
        coverage,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub config: ScenarioConfig,
    pub baseline: BaselineSummary,
}

pub fn run_baseline(config: &ScenarioConfig) -> anyhow::Result<BaselineReport> {
    let grid = mapio::parse_map(&config.map).with_context(|| format!("scenario '{}'", config.id))?;
    let baseline = baseline::average_acp(&grid, &config.scenario()?, config.iterations, config.coverage_universe)?;
    Ok(BaselineReport {
        config: config.clone(),
        baseline,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub config: ScenarioConfig,
    pub gmcpos: PlanReport,
    pub baseline: BaselineSummary,
    /// Planner ACP minus the baseline mean, percentage points.
    pub delta: f64,
}

/// One CSV row of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scenario: String,
    pub gmcpos_acp: f64,
    pub cr_mean: f64,
    pub cr_stddev: f64,
    pub delta: f64,
}

impl CompareReport {
    pub fn row(&self) -> CompareRow {
        CompareRow {
            scenario: self.config.id.clone(),
            gmcpos_acp: self.gmcpos.coverage.acp,
            cr_mean: self.baseline.mean_acp,
            cr_stddev: self.baseline.stddev_acp,
            delta: self.delta,
        }
    }
}

pub fn run_compare(config: &ScenarioConfig) -> anyhow::Result<CompareReport> {
    let prepared = prepare(&config.map_config())?;
    let plan = run_plan(config, &prepared)?;
    let baseline = baseline::average_acp(
        &prepared.grid,
        &config.scenario()?,
        config.iterations,
        config.coverage_universe,
    )?;
    let delta = plan.coverage.acp - baseline.mean_acp;
    Ok(CompareReport {
        config: config.clone(),
        gmcpos: plan,
        baseline,
        delta,
    })
}

pub fn compare_csv(reports: &[CompareReport]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for report in reports {
        writer.serialize(report.row())?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub config: ScenarioConfig,
    /// Roadmap problems: disconnected, nodes off free space, blocked edges.
    pub graph_violations: Vec<String>,
    /// Planner steps that do not match a from-scratch recomputation.
    pub placement_violations: Vec<String>,
    pub planner_acp: f64,
    /// Best ACP over all node subsets of the placed size, when small enough.
    pub exhaustive: Option<ExhaustiveResult>,
    pub exhaustive_skipped: Option<String>,
    /// Largest gap between Dijkstra and Floyd-Warshall path lengths.
    pub shortest_path_max_error: Option<f64>,
    pub passed: bool,
}

pub fn run_oracle(config: &ScenarioConfig) -> anyhow::Result<OracleReport> {
    let prepared = prepare(&config.map_config())?;
    let plan = run_plan(config, &prepared)?;
    let graph = &prepared.graph;
    let graph_violations = oracle::graph_violations(&prepared.grid, graph, config.skeleton.min_clearance);
    let placement_violations = oracle::audit_placement(graph, &prepared.grid, &config.scenario()?, &plan.placement);

    let (exhaustive, exhaustive_skipped) = match oracle::exhaustive_best_acp(
        &prepared.grid,
        graph,
        config.operator,
        plan.placement.positions.len(),
        config.radius,
        config.coverage_universe,
    ) {
        Ok(best) => (Some(best), None),
        Err(gmcpos::Error::GuardExceeded { .. }) => (None, Some("subset count above the enumeration limit".into())),
        Err(e) => return Err(e.into()),
    };

    let shortest_path_max_error = oracle::floyd_warshall(graph).ok().map(|table| {
        graph.warm_all();
        let mut worst: f64 = 0.0;
        for (u, row) in table.iter().enumerate() {
            for (v, &expected) in row.iter().enumerate() {
                worst = worst.max((graph.shortest_path_length(u, v) - expected).abs());
            }
        }
        worst
    });

    let passed = graph_violations.is_empty()
        && placement_violations.is_empty()
        && exhaustive
            .as_ref()
            .is_none_or(|best| best.covered_cells >= plan.coverage.covered_cells)
        && shortest_path_max_error.is_none_or(|e| e <= 1e-9);
    Ok(OracleReport {
        config: config.clone(),
        graph_violations,
        placement_violations,
        planner_acp: plan.coverage.acp,
        exhaustive,
        exhaustive_skipped,
        shortest_path_max_error,
        passed,
    })
}
