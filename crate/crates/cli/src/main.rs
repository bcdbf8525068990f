//! `prioplan`: coloring, enumeration and intersection experiments.
//!
//! Exit codes: 0 success, 1 internal error, 2 input error, 3 budget error.

mod output;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prioplan::sim::{run_experiment, Experiment, Scenario};
use prioplan::{
    color_to_priority, enumerate_prioritizations, greedy_color, orient_edges, CouplingGraph, GraphFile, Strategy,
};
use serde::{Deserialize, Serialize};

use output::RunManifest;

#[derive(Parser)]
#[command(
    name = "prioplan",
    version,
    about = "Graph-coloring priorities for prioritized planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Command {
    /// Greedy-color a coupling graph and report the resulting levels.
    Color {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Histogram of computation levels over all priority permutations.
    Enumerate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run one strategy on a scenario.
    Simulate {
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
        /// Defaults to the scenario's strategy.
        #[arg(long)]
        strategy: Option<StrategyName>,
    },
    /// Run all four strategies on a scenario with the same seed.
    Compare {
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
    },
    /// Rerun the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Write outputs here instead of the recorded directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long = "n-exp")]
    n_exp: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Record wall-clock times. Makes outputs machine-dependent.
    #[arg(long)]
    measure_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Constant,
    Random,
    Constraint,
    Coloring,
}

impl StrategyName {
    fn with_seed(self, seed: u64) -> Strategy {
        match self {
            StrategyName::Constant => Strategy::Constant,
            StrategyName::Random => Strategy::Random { seed },
            StrategyName::Constraint => Strategy::Constraint,
            StrategyName::Coloring => Strategy::Coloring,
        }
    }
}

impl Command {
    pub fn config_path(&self) -> Option<&Path> {
        match self {
            Command::Color { graph, .. } | Command::Enumerate { graph, .. } => Some(graph),
            Command::Simulate { run, .. } | Command::Compare { run } => Some(&run.scenario),
            Command::Replay { manifest, .. } => Some(manifest),
        }
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Budget(m) | Failure::Internal(m) => f.write_str(m),
        }
    }
}

impl From<prioplan::Error> for Failure {
    fn from(e: prioplan::Error) -> Self {
        match e {
            prioplan::Error::Budget { .. } => Failure::Budget(e.to_string()),
            prioplan::Error::Inconsistent(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Writes to stdout, ignoring a reader that went away.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Internal(format!("{}: {e}", dir.display())))
}

fn written(path: &Path, result: std::io::Result<()>) -> Result<(), Failure> {
    result.map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<CouplingGraph, Failure> {
    Ok(GraphFile::parse(&read(path)?)?.to_graph()?)
}

fn write_manifest(command: &Command, seeds: Vec<u64>, dir: &Path) -> Result<(), Failure> {
    let path = dir.join("manifest.json");
    written(&path, output::write_json(&path, &RunManifest::new(command, seeds, dir)))
}

#[derive(Serialize)]
struct ColorReport {
    n: usize,
    n_colors: usize,
    n_levels: usize,
    colors_equal_levels: bool,
    coloring: std::collections::BTreeMap<usize, usize>,
    priority: std::collections::BTreeMap<usize, usize>,
    levels: std::collections::BTreeMap<usize, usize>,
    arcs: Vec<(usize, usize)>,
}

fn color(command: &Command, graph: &Path, out_dir: Option<&Path>) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let c = greedy_color(&g);
    let p = color_to_priority(&g, &c)?;
    let d = orient_edges(&g, &p)?;
    let levels = d.compute_levels()?;
    let report = ColorReport {
        n: g.n_vertices(),
        n_colors: c.n_colors(),
        n_levels: levels.n_levels(),
        colors_equal_levels: c.n_colors() == levels.n_levels(),
        coloring: c.to_map(),
        priority: p.to_map(),
        levels: levels.to_map(),
        arcs: d.arcs(),
    };
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&report).expect("report serializes")
    ));
    eprintln!(
        "n_colors {} n_levels {} equal {}",
        report.n_colors, report.n_levels, report.colors_equal_levels
    );
    if let Some(dir) = out_dir {
        create_dir(dir)?;
        let path = dir.join("coloring.json");
        written(&path, output::write_json(&path, &report))?;
        write_manifest(command, Vec::new(), dir)?;
    }
    Ok(())
}

fn enumerate(command: &Command, graph: &Path, out_dir: Option<&Path>) -> Result<(), Failure> {
    let g = load_graph(graph)?;
    let histogram = enumerate_prioritizations(&g)?;
    let mut text = String::from("n_levels,count\n");
    for (levels, count) in &histogram {
        text.push_str(&format!("{levels},{count}\n"));
    }
    emit(&text);
    if let Some(dir) = out_dir {
        create_dir(dir)?;
        let path = dir.join("histogram.csv");
        written(&path, fs::write(&path, &text))?;
        write_manifest(command, Vec::new(), dir)?;
    }
    Ok(())
}

fn load_scenario(run: &RunArgs) -> Result<Scenario, Failure> {
    let mut sc = Scenario::from_json(&read(&run.scenario)?)?;
    if let Some(seed) = run.seed {
        sc.seed = seed;
    }
    if let Some(steps) = run.steps {
        sc.n_steps = steps;
    }
    if let Some(n) = run.n_exp {
        sc.planner.n_expansions = n;
    }
    sc.validate()?;
    Ok(sc)
}

/// Reseeds a scenario's random strategy with the scenario seed.
fn reseeded(strategy: Strategy, seed: u64) -> Strategy {
    match strategy {
        Strategy::Random { .. } => Strategy::Random { seed },
        s => s,
    }
}

fn write_runs(dir: &Path, experiments: &[&Experiment]) -> Result<(), Failure> {
    let metrics = dir.join("metrics.csv");
    written(&metrics, output::write_metrics(&metrics, experiments))?;
    let agents = dir.join("agents.csv");
    written(&agents, output::write_agents(&agents, experiments))
}

fn simulate(command: &Command, run: &RunArgs, strategy: Option<StrategyName>) -> Result<(), Failure> {
    let sc = load_scenario(run)?;
    let strategy = match strategy {
        Some(name) => name.with_seed(sc.seed),
        None => reseeded(sc.strategy, sc.seed),
    };
    let experiment = run_experiment(&sc, strategy, run.measure_time)?;
    let dir = &run.out_dir;
    create_dir(dir)?;
    write_runs(dir, &[&experiment])?;
    let path = dir.join("summary.json");
    written(&path, output::write_json(&path, &experiment.summary))?;
    write_manifest(command, vec![sc.seed], dir)?;
    let s = &experiment.summary;
    emit(&format!(
        "{}: {} steps, max levels {}, total cost {:.4}, collisions {}, all reached end {}\n",
        s.strategy, s.n_steps, s.max_levels, s.total_cost, s.executed_collisions, s.all_reached_end
    ));
    Ok(())
}

fn compare(command: &Command, run: &RunArgs) -> Result<(), Failure> {
    let sc = load_scenario(run)?;
    let strategies = Strategy::all(sc.seed);
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&s| {
                let sc = &sc;
                scope.spawn(move || run_experiment(sc, s, run.measure_time))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    let experiments = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Experiment> = experiments.iter().collect();
    let dir = &run.out_dir;
    create_dir(dir)?;
    write_runs(dir, &refs)?;
    let summaries: Vec<_> = experiments.iter().map(|e| &e.summary).collect();
    let path = dir.join("comparison.csv");
    written(&path, output::write_comparison(&path, &summaries))?;
    let path = dir.join("summary.json");
    written(&path, output::write_json(&path, &summaries))?;
    write_manifest(command, vec![sc.seed], dir)?;
    emit(&fs::read_to_string(dir.join("comparison.csv")).unwrap_or_default());
    Ok(())
}

fn replay(manifest: &Path, out_dir: Option<&Path>) -> Result<(), Failure> {
    let text = read(manifest)?;
    let m: RunManifest =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", manifest.display())))?;
    if m.schema_version != output::SCHEMA_VERSION {
        return Err(Failure::Input(format!(
            "unsupported manifest schema {}",
            m.schema_version
        )));
    }
    let mut command = m.command;
    if let Some(dir) = out_dir {
        match &mut command {
            Command::Color { out_dir, .. } | Command::Enumerate { out_dir, .. } => *out_dir = Some(dir.to_path_buf()),
            Command::Simulate { run, .. } | Command::Compare { run } => run.out_dir = dir.to_path_buf(),
            Command::Replay { .. } => {}
        }
    }
    if matches!(command, Command::Replay { .. }) {
        return Err(Failure::Input("a manifest cannot record a replay".into()));
    }
    execute(&command)
}

fn execute(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Color { graph, out_dir } => color(command, graph, out_dir.as_deref()),
        Command::Enumerate { graph, out_dir } => enumerate(command, graph, out_dir.as_deref()),
        Command::Simulate { run, strategy } => simulate(command, run, *strategy),
        Command::Compare { run } => compare(command, run),
        Command::Replay { manifest, out_dir } => replay(manifest, out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
