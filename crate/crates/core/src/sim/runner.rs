//! Closed-loop prioritized planning, one instance per time step.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coupling::build_coupling;
use super::scenario::Scenario;
use crate::coloring::greedy_color;
use crate::error::{Error, Result};
use crate::graph::{CouplingDag, CouplingGraph};
use crate::planning::{
    braking_plan, build_mpa, plan, shift_prediction, ConvexPolygon, MotionPrimitiveAutomaton, PlannerConfig,
    Prediction, ReferencePath, ReferenceTrajectory, VehicleState,
};
use crate::priority::{orient_edges, prioritize, PriorityAssignment, Strategy};
use crate::seed::{self, Component};
use crate::timing::{instance_time, TimingModel};

/// A vehicle counts as arrived once it is this close to its path end, m.
pub const ARRIVAL_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub agent: usize,
    pub priority: usize,
    pub level: usize,
    /// Cost of the executed plan over the horizon.
    pub cost: f64,
    /// The planner failed and the agent braked instead.
    pub infeasible: bool,
    pub solve_time_ms: Option<f64>,
    /// State after the step was applied.
    pub state: VehicleState,
    pub progress: f64,
    pub reached_end: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub strategy: String,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub max_degree: usize,
    pub edges: Vec<(usize, usize)>,
    /// Colors used by the greedy coloring of this step's coupling graph.
    pub n_colors: usize,
    pub priorities: Vec<usize>,
    pub arcs: Vec<(usize, usize)>,
    pub levels: Vec<usize>,
    pub n_levels: usize,
    pub t_ncs_modeled_ms: f64,
    pub t_ncs_measured_ms: Option<f64>,
    pub cost_step: f64,
    pub infeasible_agents: usize,
    /// Every stored copy of a predecessor's prediction equals the original.
    pub consistent: bool,
    /// Coupled pairs whose predictions overlap at some horizon step.
    pub prediction_overlaps: usize,
    /// Vehicle pairs whose footprints intersect after the step.
    pub executed_collisions: usize,
    pub agents: Vec<AgentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub strategy: String,
    pub n_steps: usize,
    pub total_cost: f64,
    pub max_levels: usize,
    pub median_levels: f64,
    pub max_t_ncs_modeled_ms: f64,
    pub median_t_ncs_modeled_ms: f64,
    pub max_t_ncs_measured_ms: Option<f64>,
    pub median_t_ncs_measured_ms: Option<f64>,
    pub infeasible_solves: usize,
    pub prediction_overlaps: usize,
    pub executed_collisions: usize,
    pub consistency_violations: usize,
    pub reached_end: Vec<bool>,
    pub all_reached_end: bool,
}

impl Summary {
    pub fn from_records(strategy: Strategy, records: &[StepRecord], reached_end: Vec<bool>) -> Self {
        let levels: Vec<f64> = records.iter().map(|r| r.n_levels as f64).collect();
        let modeled: Vec<f64> = records.iter().map(|r| r.t_ncs_modeled_ms).collect();
        let measured: Option<Vec<f64>> = records.iter().map(|r| r.t_ncs_measured_ms).collect();
        let measured = measured.filter(|m| !m.is_empty());
        Summary {
            strategy: strategy.name().to_string(),
            n_steps: records.len(),
            total_cost: records.iter().map(|r| r.cost_step).sum(),
            max_levels: records.iter().map(|r| r.n_levels).max().unwrap_or(0),
            median_levels: median(&levels),
            max_t_ncs_modeled_ms: modeled.iter().copied().fold(0.0, f64::max),
            median_t_ncs_modeled_ms: median(&modeled),
            max_t_ncs_measured_ms: measured.as_ref().map(|m| m.iter().copied().fold(0.0, f64::max)),
            median_t_ncs_measured_ms: measured.as_ref().map(|m| median(m)),
            infeasible_solves: records.iter().map(|r| r.infeasible_agents).sum(),
            prediction_overlaps: records.iter().map(|r| r.prediction_overlaps).sum(),
            executed_collisions: records.iter().map(|r| r.executed_collisions).sum(),
            consistency_violations: records.iter().filter(|r| !r.consistent).count(),
            all_reached_end: reached_end.iter().all(|&r| r),
            reached_end,
        }
    }
}

/// Median of `values`; the mean of the middle pair for even counts, 0 when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    }
}

/// `summary.total_cost / baseline.total_cost`, if the baseline cost is positive.
pub fn normalized_cost(summary: &Summary, baseline: &Summary) -> Option<f64> {
    (baseline.total_cost > 0.0).then(|| summary.total_cost / baseline.total_cost)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub records: Vec<StepRecord>,
    pub summary: Summary,
}

#[derive(Debug, Clone)]
struct AgentState {
    state: VehicleState,
    automaton: usize,
    /// Plan executed in the previous step; the braking maneuver initially.
    previous: Prediction,
}

struct Solve {
    prediction: Prediction,
    infeasible: bool,
    elapsed: Duration,
    /// Copies of the predecessor predictions this agent planned against.
    received: Vec<(usize, Prediction)>,
}

pub struct Simulation {
    scenario: Scenario,
    strategy: Strategy,
    measure_time: bool,
    mpa: MotionPrimitiveAutomaton,
    paths: Vec<ReferencePath>,
    agents: Vec<AgentState>,
    reached: Vec<bool>,
    step: usize,
}

impl Simulation {
    pub fn new(scenario: &Scenario, strategy: Strategy) -> Result<Self> {
        scenario.validate()?;
        let mpa = build_mpa(&scenario.mpa, &scenario.vehicle)?;
        let mut paths = Vec::new();
        let mut agents = Vec::new();
        for (idx, v) in scenario.vehicles.iter().enumerate() {
            let automaton = mpa.find_state(v.initial.speed, v.initial_steering).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "vehicle {}: speed {} and steering {} are not automaton levels",
                    idx + 1,
                    v.initial.speed,
                    v.initial_steering
                ))
            })?;
            let path = ReferencePath::new(v.path.clone())?;
            let state = VehicleState {
                speed: mpa.states[automaton].speed,
                ..v.initial
            };
            let horizon = scenario.planner.horizon;
            let reference = path.trajectory(state.position(), v.reference_speed, scenario.dt, horizon);
            let previous = braking_plan(&state, automaton, &reference, &mpa, horizon);
            paths.push(path);
            agents.push(AgentState {
                state,
                automaton,
                previous,
            });
        }
        let reached = vec![false; agents.len()];
        let mut sim = Simulation {
            scenario: scenario.clone(),
            strategy,
            measure_time: false,
            mpa,
            paths,
            agents,
            reached,
            step: 0,
        };
        sim.update_reached();
        Ok(sim)
    }

    /// Records wall-clock solve and prioritization times. Off by default so
    /// that records are reproducible.
    pub fn measure_time(mut self, on: bool) -> Self {
        self.measure_time = on;
        self
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn mpa(&self) -> &MotionPrimitiveAutomaton {
        &self.mpa
    }

    pub fn states(&self) -> Vec<VehicleState> {
        self.agents.iter().map(|a| a.state).collect()
    }

    pub fn reached_end(&self) -> &[bool] {
        &self.reached
    }

    pub fn coupling(&self) -> CouplingGraph {
        build_coupling(&self.states(), &self.mpa, self.scenario.planner.horizon)
    }

    fn update_reached(&mut self) {
        for (i, a) in self.agents.iter().enumerate() {
            let path = &self.paths[i];
            if path.project(a.state.position()) >= path.length() - ARRIVAL_TOLERANCE {
                self.reached[i] = true;
            }
        }
    }

    fn planner_config(&self, component: Component, agent: usize) -> PlannerConfig {
        PlannerConfig {
            horizon: self.scenario.planner.horizon,
            n_expansions: self.scenario.planner.n_expansions,
            seed: seed::derive(self.scenario.seed, component, self.step as u64, agent as u64),
        }
    }

    fn static_obstacles(&self, agent: usize) -> Vec<ConvexPolygon> {
        let mut obs = self.scenario.boundaries.clone();
        obs.extend(self.scenario.vehicles[agent - 1].keep_out.iter().cloned());
        obs
    }

    fn reference(&self, agent: usize) -> ReferenceTrajectory {
        let a = &self.agents[agent - 1];
        let v = &self.scenario.vehicles[agent - 1];
        self.paths[agent - 1].trajectory(
            a.state.position(),
            v.reference_speed,
            self.scenario.dt,
            self.scenario.planner.horizon,
        )
    }

    /// The previous plan advanced by one step. Always executable, and what
    /// an agent falls back to when planning fails.
    fn fallback_plan(&self, agent: usize) -> Prediction {
        shift_prediction(&self.agents[agent - 1].previous, &self.reference(agent), &self.mpa)
    }

    fn plan_agent(&self, agent: usize, obstacles: &[Vec<ConvexPolygon>], component: Component) -> (Prediction, bool) {
        let a = &self.agents[agent - 1];
        let cfg = self.planner_config(component, agent);
        match plan(
            &a.state,
            a.automaton,
            &self.reference(agent),
            obstacles,
            &self.mpa,
            &cfg,
        ) {
            Ok(p) => (p, false),
            Err(_) => (self.fallback_plan(agent), true),
        }
    }

    fn step_strategy(&self) -> Strategy {
        match self.strategy {
            Strategy::Random { seed } => Strategy::Random {
                seed: seed::derive(seed, Component::Prioritization, self.step as u64, 0),
            },
            s => s,
        }
    }

    /// Every agent prioritizes on its own; the results must agree.
    fn prioritize_agents(&self, g: &CouplingGraph) -> Result<(PriorityAssignment, Vec<Duration>)> {
        let n = self.agents.len();
        let horizon = self.scenario.planner.horizon;
        let strategy = self.step_strategy();
        let mut times = vec![Duration::ZERO; n];
        let counts = if strategy == Strategy::Constraint {
            let unconstrained: Vec<(Prediction, Duration)> = (1..=n)
                .into_par_iter()
                .map(|i| {
                    let start = Instant::now();
                    let obstacles = vec![self.static_obstacles(i); horizon];
                    let (p, _) = self.plan_agent(i, &obstacles, Component::UnconstrainedPlanner);
                    (p, start.elapsed())
                })
                .collect();
            for (t, (_, elapsed)) in times.iter_mut().zip(&unconstrained) {
                *t += *elapsed;
            }
            let predictions: Vec<&Prediction> = unconstrained.iter().map(|(p, _)| p).collect();
            Some(potential_collisions(g, &predictions))
        } else {
            None
        };

        let mut agreed: Option<PriorityAssignment> = None;
        for (idx, t) in times.iter_mut().enumerate() {
            let start = Instant::now();
            let p = prioritize(strategy, g, counts.as_deref())?;
            *t += start.elapsed();
            match &agreed {
                None => agreed = Some(p),
                Some(first) if *first != p => {
                    return Err(Error::Inconsistent(format!(
                        "agent {} computed different priorities",
                        idx + 1
                    )));
                }
                Some(_) => {}
            }
        }
        Ok((agreed.expect("at least one agent"), times))
    }

    fn solve_agent(&self, agent: usize, dag: &CouplingDag, predictions: &[Option<Prediction>]) -> Solve {
        let start = Instant::now();
        let received: Vec<(usize, Prediction)> = dag
            .predecessors(agent)
            .expect("agent in graph")
            .iter()
            .map(|&j| (j, predictions[j - 1].clone().expect("predecessors solve first")))
            .collect();
        // Lower-priority neighbors may have to fall back to their previous
        // plan; keep clear of it so the fallback stays collision-free.
        let guarded: Vec<Prediction> = if self.scenario.guard_successors {
            dag.successors(agent)
                .expect("agent in graph")
                .iter()
                .map(|&j| self.fallback_plan(j))
                .collect()
        } else {
            Vec::new()
        };
        let obstacles: Vec<Vec<ConvexPolygon>> = (0..self.scenario.planner.horizon)
            .map(|l| {
                let mut obs = self.static_obstacles(agent);
                obs.extend(received.iter().map(|(_, p)| p.occupancies[l].clone()));
                obs.extend(guarded.iter().map(|p| p.occupancies[l].clone()));
                obs
            })
            .collect();
        let (prediction, infeasible) = self.plan_agent(agent, &obstacles, Component::Planner);
        Solve {
            prediction,
            infeasible,
            elapsed: start.elapsed(),
            received,
        }
    }

    /// Runs one prioritized-planning instance and applies the first step of
    /// every plan.
    pub fn run_step(&mut self) -> Result<StepRecord> {
        let n = self.agents.len();
        let g = self.coupling();
        let (priorities, prio_times) = self.prioritize_agents(&g)?;
        let dag = orient_edges(&g, &priorities)?;
        let levels = dag.compute_levels()?;

        let mut solves: Vec<Option<Solve>> = (0..n).map(|_| None).collect();
        let mut predictions: Vec<Option<Prediction>> = vec![None; n];
        for group in levels.groups() {
            let results: Vec<Solve> = group
                .par_iter()
                .map(|&i| self.solve_agent(i, &dag, &predictions))
                .collect();
            for (&i, s) in group.iter().zip(results) {
                predictions[i - 1] = Some(s.prediction.clone());
                solves[i - 1] = Some(s);
            }
        }
        let solves: Vec<Solve> = solves.into_iter().map(|s| s.expect("every agent solved")).collect();

        let consistent = solves
            .iter()
            .all(|s| s.received.iter().all(|(j, copy)| *copy == solves[j - 1].prediction));
        if !consistent {
            return Err(Error::Inconsistent(
                "a stored prediction differs from its original".into(),
            ));
        }
        let all: Vec<&Prediction> = solves.iter().map(|s| &s.prediction).collect();
        let prediction_overlaps = overlapping_pairs(&g, &all);

        for (a, s) in self.agents.iter_mut().zip(&solves) {
            a.state = s.prediction.poses[0];
            a.automaton = s.prediction.automaton_states[0];
            a.previous = s.prediction.clone();
        }
        self.update_reached();
        let executed_collisions = self.executed_collisions();

        let t = self.scenario.timing;
        let modeled = TimingModel::uniform(
            n,
            Duration::from_micros(t.planning_us),
            Duration::from_micros(t.prioritization_us),
        );
        let t_ncs_modeled_ms = instance_time(&dag, &modeled)?.total_ms();
        let t_ncs_measured_ms = if self.measure_time {
            let measured = TimingModel::new(solves.iter().map(|s| s.elapsed).collect(), prio_times)?;
            Some(instance_time(&dag, &measured)?.total_ms())
        } else {
            None
        };

        let agents: Vec<AgentRecord> = solves
            .iter()
            .enumerate()
            .map(|(idx, s)| {
                let state = self.agents[idx].state;
                AgentRecord {
                    agent: idx + 1,
                    priority: priorities.as_slice()[idx],
                    level: levels.as_slice()[idx],
                    cost: s.prediction.cost,
                    infeasible: s.infeasible,
                    solve_time_ms: self.measure_time.then(|| s.elapsed.as_nanos() as f64 / 1e6),
                    state,
                    progress: self.paths[idx].project(state.position()),
                    reached_end: self.reached[idx],
                }
            })
            .collect();

        let record = StepRecord {
            step: self.step,
            strategy: self.strategy.name().to_string(),
            n_vertices: g.n_vertices(),
            n_edges: g.n_edges(),
            max_degree: g.max_degree(),
            edges: g.edges(),
            n_colors: greedy_color(&g).n_colors(),
            priorities: priorities.as_slice().to_vec(),
            arcs: dag.arcs(),
            levels: levels.as_slice().to_vec(),
            n_levels: levels.n_levels(),
            t_ncs_modeled_ms,
            t_ncs_measured_ms,
            cost_step: agents.iter().map(|a| a.cost).sum(),
            infeasible_agents: agents.iter().filter(|a| a.infeasible).count(),
            consistent,
            prediction_overlaps,
            executed_collisions,
            agents,
        };
        self.step += 1;
        Ok(record)
    }

    fn executed_collisions(&self) -> usize {
        let footprints: Vec<ConvexPolygon> = self
            .agents
            .iter()
            .map(|a| self.scenario.vehicle.footprint(&a.state))
            .collect();
        let mut count = 0;
        for a in 0..footprints.len() {
            for b in a + 1..footprints.len() {
                if footprints[a].intersects(&footprints[b]) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// For each agent, the number of coupled agents whose prediction overlaps
/// its own at some step.
pub fn potential_collisions(g: &CouplingGraph, predictions: &[&Prediction]) -> Vec<usize> {
    let mut counts = vec![0; g.n_vertices()];
    for (a, b) in g.edges() {
        if predictions_overlap(predictions[a - 1], predictions[b - 1]) {
            counts[a - 1] += 1;
            counts[b - 1] += 1;
        }
    }
    counts
}

fn overlapping_pairs(g: &CouplingGraph, predictions: &[&Prediction]) -> usize {
    g.edges()
        .into_iter()
        .filter(|&(a, b)| predictions_overlap(predictions[a - 1], predictions[b - 1]))
        .count()
}

fn predictions_overlap(a: &Prediction, b: &Prediction) -> bool {
    a.occupancies.iter().zip(&b.occupancies).any(|(x, y)| x.intersects(y))
}

/// Runs `scenario.n_steps` steps under `strategy`.
pub fn run_experiment(scenario: &Scenario, strategy: Strategy, measure_time: bool) -> Result<Experiment> {
    let mut sim = Simulation::new(scenario, strategy)?.measure_time(measure_time);
    let mut records = Vec::with_capacity(scenario.n_steps);
    for _ in 0..scenario.n_steps {
        records.push(sim.run_step()?);
    }
    let summary = Summary::from_records(strategy, &records, sim.reached_end().to_vec());
    Ok(Experiment { records, summary })
}
