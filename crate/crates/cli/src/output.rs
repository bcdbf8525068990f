//! CSV rows, JSON documents and the run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use prioplan::sim::{normalized_cost, Experiment, Summary};
use serde::{Deserialize, Serialize};

use crate::Command;

/// Bumped whenever a CSV or JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const METRICS_HEADER: &str =
    "step,strategy,n_vertices,n_edges,n_levels,t_ncs_modeled_ms,t_ncs_measured_ms,cost_step,infeasible_agents";
pub const AGENTS_HEADER: &str =
    "step,strategy,agent,priority,level,cost,infeasible,solve_time_ms,x,y,yaw,speed,progress,reached_end";
pub const COMPARISON_HEADER: &str = "strategy,median_t_ncs_modeled_ms,max_t_ncs_modeled_ms,median_t_ncs_measured_ms,\
max_t_ncs_measured_ms,median_levels,max_levels,total_cost,normalized_cost,infeasible_solves,executed_collisions,\
consistency_violations,all_reached_end";

#[derive(Serialize)]
struct MetricsRow<'a> {
    step: usize,
    strategy: &'a str,
    n_vertices: usize,
    n_edges: usize,
    n_levels: usize,
    t_ncs_modeled_ms: f64,
    t_ncs_measured_ms: Option<f64>,
    cost_step: f64,
    infeasible_agents: usize,
}

#[derive(Serialize)]
struct AgentRow<'a> {
    step: usize,
    strategy: &'a str,
    agent: usize,
    priority: usize,
    level: usize,
    cost: f64,
    infeasible: bool,
    solve_time_ms: Option<f64>,
    x: f64,
    y: f64,
    yaw: f64,
    speed: f64,
    progress: f64,
    reached_end: bool,
}

#[derive(Serialize)]
struct ComparisonRow<'a> {
    strategy: &'a str,
    median_t_ncs_modeled_ms: f64,
    max_t_ncs_modeled_ms: f64,
    median_t_ncs_measured_ms: Option<f64>,
    max_t_ncs_measured_ms: Option<f64>,
    median_levels: f64,
    max_levels: usize,
    total_cost: f64,
    normalized_cost: Option<f64>,
    infeasible_solves: usize,
    executed_collisions: usize,
    consistency_violations: usize,
    all_reached_end: bool,
}

/// Writes CSV with an explicit header so that empty tables still carry one.
fn write_csv<T: Serialize>(path: &Path, header: &str, rows: impl IntoIterator<Item = T>) -> io::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in rows {
        out.serialize(row)?;
    }
    let body = out.into_inner().map_err(|e| e.into_error())?;
    let mut text = format!("{header}\n").into_bytes();
    text.extend(body);
    fs::write(path, text)
}

pub fn write_metrics(path: &Path, experiments: &[&Experiment]) -> io::Result<()> {
    let rows = experiments.iter().flat_map(|e| &e.records).map(|r| MetricsRow {
        step: r.step,
        strategy: &r.strategy,
        n_vertices: r.n_vertices,
        n_edges: r.n_edges,
        n_levels: r.n_levels,
        t_ncs_modeled_ms: r.t_ncs_modeled_ms,
        t_ncs_measured_ms: r.t_ncs_measured_ms,
        cost_step: r.cost_step,
        infeasible_agents: r.infeasible_agents,
    });
    write_csv(path, METRICS_HEADER, rows)
}

pub fn write_agents(path: &Path, experiments: &[&Experiment]) -> io::Result<()> {
    let rows = experiments.iter().flat_map(|e| &e.records).flat_map(|r| {
        r.agents.iter().map(move |a| AgentRow {
            step: r.step,
            strategy: &r.strategy,
            agent: a.agent,
            priority: a.priority,
            level: a.level,
            cost: a.cost,
            infeasible: a.infeasible,
            solve_time_ms: a.solve_time_ms,
            x: a.state.x,
            y: a.state.y,
            yaw: a.state.yaw,
            speed: a.state.speed,
            progress: a.progress,
            reached_end: a.reached_end,
        })
    });
    write_csv(path, AGENTS_HEADER, rows)
}

/// One row per summary; costs are normalized by the first summary.
pub fn write_comparison(path: &Path, summaries: &[&Summary]) -> io::Result<()> {
    let baseline = summaries[0];
    let rows = summaries.iter().map(|s| ComparisonRow {
        strategy: &s.strategy,
        median_t_ncs_modeled_ms: s.median_t_ncs_modeled_ms,
        max_t_ncs_modeled_ms: s.max_t_ncs_modeled_ms,
        median_t_ncs_measured_ms: s.median_t_ncs_measured_ms,
        max_t_ncs_measured_ms: s.max_t_ncs_measured_ms,
        median_levels: s.median_levels,
        max_levels: s.max_levels,
        total_cost: s.total_cost,
        normalized_cost: normalized_cost(s, baseline),
        infeasible_solves: s.infeasible_solves,
        executed_collisions: s.executed_collisions,
        consistency_violations: s.consistency_violations,
        all_reached_end: s.all_reached_end,
    });
    write_csv(path, COMPARISON_HEADER, rows)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Everything needed to rerun an invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &Command, seeds: Vec<u64>, out_dir: &Path) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            command: command.clone(),
            config_path: command.config_path().map(Path::to_path_buf),
            seeds,
            out_dir: out_dir.to_path_buf(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }
}
