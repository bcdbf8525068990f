//! Scenario configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planning::{ConvexPolygon, MpaConfig, Point2, ReferencePath, VehicleParams, VehicleState};
use crate::priority::Strategy;

/// Farthest a vehicle may start from its reference path, m.
const MAX_START_OFFSET: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub initial: VehicleState,
    /// Initial steering angle; must be one of the automaton's levels.
    #[serde(default)]
    pub initial_steering: f64,
    pub path: Vec<Point2>,
    pub reference_speed: f64,
    /// Areas only this vehicle must avoid, such as oncoming lanes.
    #[serde(default)]
    pub keep_out: Vec<ConvexPolygon>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerSettings {
    pub horizon: usize,
    pub n_expansions: usize,
}

/// Uniform per-agent durations used for the modeled computation time, µs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingSettings {
    pub planning_us: u64,
    pub prioritization_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Step duration, s. Must match `mpa.dt`.
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub vehicle: VehicleParams,
    pub mpa: MpaConfig,
    pub planner: PlannerSettings,
    pub timing: TimingSettings,
    /// Agents also keep clear of the previous plans of their coupled
    /// lower-priority neighbors, advanced by one step.
    #[serde(default = "default_true")]
    pub guard_successors: bool,
    /// Static obstacles present at every step.
    pub boundaries: Vec<ConvexPolygon>,
    pub vehicles: Vec<VehicleSpec>,
}

fn default_true() -> bool {
    true
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("scenario: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.vehicles.is_empty() {
            return Err(Error::InvalidInput("scenario has no vehicles".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) || self.dt != self.mpa.dt {
            return Err(Error::InvalidInput(format!(
                "time step {} must be positive and equal the automaton step {}",
                self.dt, self.mpa.dt
            )));
        }
        if self.planner.horizon == 0 || self.planner.n_expansions == 0 {
            return Err(Error::InvalidInput(
                "planner horizon and expansion budget must be positive".into(),
            ));
        }
        self.vehicle.validate()?;
        for (idx, v) in self.vehicles.iter().enumerate() {
            let id = idx + 1;
            let path =
                ReferencePath::new(v.path.clone()).map_err(|e| Error::InvalidInput(format!("vehicle {id}: {e}")))?;
            let s = &v.initial;
            if ![s.x, s.y, s.yaw, s.speed].iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput(format!("vehicle {id}: non-finite initial state")));
            }
            if !(0.0..=self.vehicle.max_speed).contains(&s.speed) {
                return Err(Error::InvalidInput(format!(
                    "vehicle {id}: initial speed out of bounds"
                )));
            }
            if !(v.reference_speed.is_finite() && v.reference_speed >= 0.0) {
                return Err(Error::InvalidInput(format!("vehicle {id}: invalid reference speed")));
            }
            let offset = path.point_at(path.project(s.position())).distance(s.position());
            if offset > MAX_START_OFFSET {
                return Err(Error::InvalidInput(format!(
                    "vehicle {id} starts {offset:.3} m from its reference path"
                )));
            }
        }
        Ok(())
    }
}
