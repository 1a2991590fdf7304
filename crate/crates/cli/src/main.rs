use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gmcpos_cli::config::{load_maps, load_scenarios, InputError, ScenarioConfig, ScenarioFields};
use gmcpos_cli::pipeline::{self, Prepared};
use gmcpos_cli::render::{self, Scene, DEFAULT_SCALE};
use rayon::prelude::*;
use serde::Serialize;

/// Place robots around an operator on an occupancy grid map so that their
/// coverage disks cover as much of the map as possible.
#[derive(Debug, Parser)]
#[command(name = "gmcpos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with one [section] per scenario. Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run only this section of the config file.
    #[arg(long, value_name = "ID")]
    scenario: Option<String>,
    #[command(flatten)]
    fields: ScenarioFields,
    /// Directory for output files. Without it, results go to stdout.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for scenario batches and baseline draws.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select robot positions and score their coverage.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Also write <id>.png and <id>.mask.png (needs --out).
        #[arg(long)]
        render: bool,
        /// Also write the roadmap as <id>.graph.json (needs --out).
        #[arg(long)]
        emit_graph: bool,
        /// Pixels per grid cell in rendered images.
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: u32,
    },
    /// Planner against the averaged random baseline; one CSV row per scenario.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Averaged random baseline only.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// Build the roadmap graph and write it as JSON.
    Graph {
        #[command(flatten)]
        common: Common,
    },
    /// Check the roadmap and placement against the reference implementations.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Plan and write the placement image and coverage mask.
    Render {
        #[command(flatten)]
        common: Common,
        /// Pixels per grid cell.
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: u32,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GMCPOS_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_input_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

/// Bad flags, config values or map files, as opposed to failures while
/// running a valid scenario.
fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<InputError>()
            || matches!(
                cause.downcast_ref::<gmcpos::Error>(),
                Some(
                    gmcpos::Error::Io { .. }
                        | gmcpos::Error::Parse { .. }
                        | gmcpos::Error::InvalidMap(_)
                        | gmcpos::Error::InvalidScenario(_)
                )
            )
    })
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn out_dir(common: &Common) -> anyhow::Result<Option<&Path>> {
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(common.out.as_deref())
}

/// Run `f` over the scenarios on a pool of `workers` threads, keeping
/// input order.
fn run_all<T: Send>(
    common: &Common,
    scenarios: &[ScenarioConfig],
    f: impl Fn(&ScenarioConfig) -> anyhow::Result<T> + Sync,
) -> anyhow::Result<Vec<T>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            bail!(InputError("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    pool.install(|| scenarios.par_iter().map(&f).collect())
}

fn scenarios(common: &Common) -> anyhow::Result<Vec<ScenarioConfig>> {
    load_scenarios(common.config.as_deref(), common.scenario.as_deref(), &common.fields)
}

fn draw(cfg: &ScenarioConfig, prepared: &Prepared, plan: &pipeline::PlanReport, scale: u32, dir: &Path) -> anyhow::Result<()> {
    let scene = Scene {
        grid: &prepared.grid,
        graph: Some(&prepared.graph),
        positions: &plan.placement.positions,
        operator: cfg.operator,
        radius: cfg.radius,
        coverage: &plan.coverage,
    };
    let (img, _) = render::render(&scene, scale);
    render::save_png(&img, &dir.join(format!("{}.png", cfg.id)))?;
    let mask = render::mask_image(&prepared.grid, &plan.coverage);
    render::save_mask(&mask, &dir.join(format!("{}.mask.png", cfg.id)))
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Plan {
            common,
            render,
            emit_graph,
            scale,
        } => {
            let all = scenarios(&common)?;
            let dir = out_dir(&common)?;
            if (render || emit_graph) && dir.is_none() {
                bail!(InputError("--render and --emit-graph need --out".into()));
            }
            let reports = run_all(&common, &all, |cfg| {
                let prepared = pipeline::prepare(&cfg.map_config())?;
                let plan = pipeline::run_plan(cfg, &prepared)?;
                if let Some(dir) = dir {
                    write(dir, &format!("{}.plan.json", cfg.id), &to_json(&plan)?)?;
                    if emit_graph {
                        write(dir, &format!("{}.graph.json", cfg.id), &pipeline::graph_json(&prepared)?)?;
                    }
                    if render {
                        draw(cfg, &prepared, &plan, scale, dir)?;
                    }
                }
                Ok(plan)
            })?;
            if dir.is_none() {
                print!("{}", to_json(&reports)?);
            }
        }
        Command::Compare { common } => {
            let all = scenarios(&common)?;
            let dir = out_dir(&common)?;
            let reports = run_all(&common, &all, pipeline::run_compare)?;
            let csv = pipeline::compare_csv(&reports)?;
            match dir {
                Some(dir) => {
                    write(dir, "compare.csv", &csv)?;
                    write(dir, "compare.json", &to_json(&reports)?)?;
                }
                None => print!("{csv}"),
            }
        }
        Command::Baseline { common } => {
            let all = scenarios(&common)?;
            let dir = out_dir(&common)?;
            let reports = run_all(&common, &all, pipeline::run_baseline)?;
            match dir {
                Some(dir) => {
                    for report in &reports {
                        write(dir, &format!("{}.baseline.json", report.config.id), &to_json(report)?)?;
                    }
                }
                None => print!("{}", to_json(&reports)?),
            }
        }
        Command::Graph { common } => {
            let maps = load_maps(common.config.as_deref(), common.scenario.as_deref(), &common.fields)?;
            let dir = out_dir(&common)?;
            if dir.is_none() && maps.len() > 1 {
                bail!(InputError("several scenarios selected; use --out or --scenario".into()));
            }
            for map in &maps {
                let prepared = pipeline::prepare(map)?;
                let json = pipeline::graph_json(&prepared)?;
                match dir {
                    Some(dir) => write(dir, &format!("{}.graph.json", map.id), &json)?,
                    None => print!("{json}"),
                }
            }
        }
        Command::Oracle { common } => {
            let all = scenarios(&common)?;
            let dir = out_dir(&common)?;
            let reports = run_all(&common, &all, pipeline::run_oracle)?;
            match dir {
                Some(dir) => {
                    for report in &reports {
                        write(dir, &format!("{}.oracle.json", report.config.id), &to_json(report)?)?;
                    }
                }
                None => print!("{}", to_json(&reports)?),
            }
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.passed)
                .map(|r| r.config.id.as_str())
                .collect();
            if !failed.is_empty() {
                eprintln!("oracle checks failed for: {}", failed.join(", "));
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Render { common, scale } => {
            let all = scenarios(&common)?;
            let Some(dir) = out_dir(&common)? else {
                bail!(InputError("render needs --out".into()));
            };
            run_all(&common, &all, |cfg| {
                let prepared = pipeline::prepare(&cfg.map_config())?;
                let plan = pipeline::run_plan(cfg, &prepared)?;
                draw(cfg, &prepared, &plan, scale, dir)
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
