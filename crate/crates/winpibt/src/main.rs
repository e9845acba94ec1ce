//! Command-line benchmark harness: solve single instances, run seeded
//! batches, validate maps, and render trajectories.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use winpibt::io::{parse_map, parse_scen, read_results, render_svg, write_results, MapFile, ResultFormat};
use winpibt::scenario::{maps, Instance, Mode, RunResult, DEFAULT_TIMESTEP_LIMIT};
use winpibt::{generate_random_instance, run, ModeSpec, NodeId, PibtCondition, Placement, SolverKind};

const OUTPUT_DIR_ENV: &str = "WINPIBT_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "winpibt", version, about = "Multi-agent path finding benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write a structured result.
    Solve(SolveArgs),
    /// Solve one instance per seed over a worker pool.
    Batch(BatchArgs),
    /// Parse a map and report whether the cycle condition holds.
    CheckMap(CheckMapArgs),
    /// Draw the trajectories of a stored result as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverName {
    Pibt,
    Winpibt,
    WinpibtIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeName {
    Classical,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementName {
    Uniform,
    Edges,
}

#[derive(Args)]
struct InstanceArgs {
    /// MovingAI .map file.
    #[arg(long, conflicts_with = "golden")]
    map: Option<PathBuf>,
    /// Built-in instance (`fig3`).
    #[arg(long)]
    golden: Option<String>,
    /// MovingAI .scen file providing starts and goals in order.
    #[arg(long, requires = "map")]
    scen: Option<PathBuf>,
    /// Number of agents.
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, value_enum, default_value_t = ModeName::Classical)]
    mode: ModeName,
    /// Task count for iterative mode.
    #[arg(long, default_value_t = 200)]
    tasks: usize,
    #[arg(long, value_enum, default_value_t = PlacementName::Uniform)]
    placement: PlacementName,
    #[arg(long, default_value_t = DEFAULT_TIMESTEP_LIMIT)]
    timestep_limit: usize,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverName::Winpibt)]
    solver: SolverName,
    /// Lookahead window for the windowed solvers.
    #[arg(long, default_value_t = 3)]
    window: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when omitted. Relative paths resolve against
    /// $WINPIBT_OUTPUT_DIR when that is set.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "jsonl")]
    format: String,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed list: `1..25` (inclusive), `7`, or `1,4,9`.
    #[arg(long)]
    seeds: String,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CheckMapArgs {
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, conflicts_with = "golden")]
    map: Option<PathBuf>,
    #[arg(long)]
    golden: Option<String>,
    /// JSON-lines result file produced by solve/batch.
    #[arg(long)]
    results: PathBuf,
    /// Which record of the file to draw.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Batch(args) => cmd_batch(args),
        Command::CheckMap(args) => cmd_check_map(args),
        Command::Render(args) => cmd_render(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn solver_kind(args: &SolverArgs) -> Result<SolverKind> {
    if args.window == 0 {
        bail!("--window must be at least 1");
    }
    Ok(match args.solver {
        SolverName::Pibt => SolverKind::Pibt,
        SolverName::Winpibt => SolverKind::WinPibt { window: args.window },
        SolverName::WinpibtIter => SolverKind::WinPibtIter { window: args.window },
    })
}

/// Build the instance and keep the map around for rendering paths later.
fn build_instance(args: &InstanceArgs, seed: u64) -> Result<(Instance, MapFile)> {
    if let Some(name) = &args.golden {
        if name != "fig3" {
            bail!("unknown golden instance {name:?} (available: fig3)");
        }
        let mut instance = maps::fig3_instance();
        instance.timestep_limit = args.timestep_limit;
        let grid = instance.graph.grid().unwrap();
        let map = MapFile { width: grid.width, height: grid.height, passable: grid.passable.clone() };
        return Ok((instance, map));
    }
    let map_path = args.map.as_ref().ok_or_else(|| anyhow!("either --map or --golden is required"))?;
    let text = std::fs::read_to_string(map_path).with_context(|| format!("reading {}", map_path.display()))?;
    let map = parse_map(&text)?;
    let graph = std::sync::Arc::new(map.to_graph()?);

    let instance = if let Some(scen_path) = &args.scen {
        let scen_text =
            std::fs::read_to_string(scen_path).with_context(|| format!("reading {}", scen_path.display()))?;
        let scen = parse_scen(&scen_text, &map)?;
        if scen.entries.len() < args.agents {
            bail!("scenario provides {} entries but {} agents were requested", scen.entries.len(), args.agents);
        }
        let grid = graph.grid().expect("grid-backed map");
        let node = |&(x, y): &(usize, usize)| grid.node_at(x, y).expect("validated endpoint");
        let starts: Vec<NodeId> = scen.entries[..args.agents].iter().map(|e| node(&e.start)).collect();
        let mode = match args.mode {
            ModeName::Classical => Mode::Classical {
                goals: scen.entries[..args.agents].iter().map(|e| node(&e.goal)).collect(),
            },
            ModeName::Iterative => Mode::Iterative { task_count: args.tasks, goal_seed: seed },
        };
        Instance { graph, starts, mode, timestep_limit: args.timestep_limit, seed }
    } else {
        let mode = match args.mode {
            ModeName::Classical => ModeSpec::Classical,
            ModeName::Iterative => ModeSpec::Iterative { task_count: args.tasks },
        };
        let placement = match args.placement {
            PlacementName::Uniform => Placement::Uniform,
            PlacementName::Edges => Placement::EdgeToEdge,
        };
        let mut instance = generate_random_instance(&graph, args.agents, seed, mode, placement)?;
        instance.timestep_limit = args.timestep_limit;
        instance
    };
    Ok((instance, map))
}

fn resolve_output(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

fn emit(bytes: &[u8], output: &Option<PathBuf>) -> Result<()> {
    match output {
        Some(path) => {
            let path = resolve_output(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn summary_line(r: &RunResult) -> String {
    let service = r.service_mean.map_or(String::new(), |s| format!(" service={s:.2}"));
    format!(
        "{} seed={} n={}: {} soc={} makespan={}{service} runtime={:.3}s",
        r.solver,
        r.seed,
        r.agents,
        if r.success { "success" } else { "cutoff" },
        r.soc,
        r.makespan,
        r.runtime
    )
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let format: ResultFormat = args.format.parse().map_err(|e: String| anyhow!(e))?;
    let kind = solver_kind(&args.solver)?;
    let (instance, _map) = build_instance(&args.instance, args.seed)?;
    let result = run(instance, kind)?;
    eprintln!("{}", summary_line(&result));
    emit(&write_results(std::slice::from_ref(&result), format), &args.output)?;
    Ok(if result.success { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.trim().parse().context("seed range start")?;
        let hi: u64 = b.trim().parse().context("seed range end")?;
        if hi < lo {
            bail!("empty seed range {spec:?}");
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("seed {s:?}")))
        .collect()
}

fn cmd_batch(args: BatchArgs) -> Result<ExitCode> {
    if args.instance.scen.is_some() {
        bail!("batch generates seeded instances; --scen applies to solve only");
    }
    let format: ResultFormat = args.format.parse().map_err(|e: String| anyhow!(e))?;
    let kind = solver_kind(&args.solver)?;
    let seeds = parse_seeds(&args.seeds)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, seeds.len().max(1));

    // Parse the map and build the shared graph once; workers only draw
    // seeded instances over it.
    let (template, _) = build_instance(&args.instance, seeds[0])?;
    let graph = template.graph.clone();
    let instance_for = |seed: u64| -> Result<Instance> {
        if args.instance.golden.is_some() {
            let mut instance = template.clone();
            instance.seed = seed;
            return Ok(instance);
        }
        let mode = match args.instance.mode {
            ModeName::Classical => ModeSpec::Classical,
            ModeName::Iterative => ModeSpec::Iterative { task_count: args.instance.tasks },
        };
        let placement = match args.instance.placement {
            PlacementName::Uniform => Placement::Uniform,
            PlacementName::Edges => Placement::EdgeToEdge,
        };
        let mut instance = generate_random_instance(&graph, args.instance.agents, seed, mode, placement)?;
        instance.timestep_limit = args.instance.timestep_limit;
        Ok(instance)
    };

    let slots: Mutex<Vec<Option<Result<RunResult>>>> =
        Mutex::new((0..seeds.len()).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                let outcome = instance_for(seeds[i])
                    .and_then(|instance| run(instance, kind).map_err(Into::into));
                slots.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    // Results land in seed order no matter which worker finished first.
    let mut results = Vec::with_capacity(seeds.len());
    for slot in slots.into_inner().unwrap() {
        results.push(slot.expect("every seed processed")?);
    }
    let succeeded = results.iter().filter(|r| r.success).count();
    eprintln!("batch: {} runs, {} succeeded", results.len(), succeeded);
    emit(&write_results(&results, format), &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_map(args: CheckMapArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.map).with_context(|| format!("reading {}", args.map.display()))?;
    let map = parse_map(&text)?;
    let graph = map.to_graph()?;
    println!(
        "{}: {} nodes, {} edges",
        args.map.display(),
        graph.node_count(),
        graph.edge_count()
    );
    match graph.check_pibt_condition() {
        PibtCondition::Satisfied => println!("pibt-condition: satisfied"),
        PibtCondition::Violated { from, to } => {
            let grid = graph.grid().expect("grid-backed map");
            let (fx, fy) = grid.cell_of(from);
            let (tx, ty) = grid.cell_of(to);
            println!("pibt-condition: violated at edge ({fx},{fy})-({tx},{ty})");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode> {
    let map = if let Some(name) = &args.golden {
        if name != "fig3" {
            bail!("unknown golden instance {name:?} (available: fig3)");
        }
        let instance = maps::fig3_instance();
        let grid = instance.graph.grid().unwrap();
        MapFile { width: grid.width, height: grid.height, passable: grid.passable.clone() }
    } else {
        let map_path = args.map.as_ref().ok_or_else(|| anyhow!("either --map or --golden is required"))?;
        let text =
            std::fs::read_to_string(map_path).with_context(|| format!("reading {}", map_path.display()))?;
        parse_map(&text)?
    };
    let bytes = std::fs::read(&args.results).with_context(|| format!("reading {}", args.results.display()))?;
    let results = read_results(&bytes, ResultFormat::JsonLines)?;
    let result = results
        .get(args.index)
        .ok_or_else(|| anyhow!("result file holds {} records, index {} out of range", results.len(), args.index))?;
    let svg = render_svg(result, &map);
    emit(svg.as_bytes(), &args.output)?;
    Ok(ExitCode::SUCCESS)
}
