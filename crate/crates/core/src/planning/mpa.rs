//! Motion-primitive automaton: vehicle dynamics quantized into speed and
//! steering levels with precomputed one-step trajectory segments.

use serde::{Deserialize, Serialize};

use super::geometry::{ConvexPolygon, Point2};
use super::model::{step_model, Input, VehicleParams, VehicleState};
use crate::error::{Error, Result};

const LEVEL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpaConfig {
    /// Ascending speed levels, m/s.
    pub speed_levels: Vec<f64>,
    /// Ascending steering levels, rad.
    pub steering_levels: Vec<f64>,
    /// Largest speed change of one primitive, m/s.
    pub max_speed_change: f64,
    /// Largest steering change of one primitive, rad.
    pub max_steering_change: f64,
    pub dt: f64,
    /// Poses sampled along each primitive, at least 5.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10
}

/// A `(speed, steering)` pair of the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutomatonState {
    pub speed_index: usize,
    pub steering_index: usize,
    pub speed: f64,
    pub steering: f64,
}

/// Pose relative to the start of a primitive, start heading along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl LocalPose {
    /// Places this local pose relative to `start`; speed is set by the caller.
    pub fn apply(&self, start: &VehicleState, speed: f64) -> VehicleState {
        let p = Point2::new(self.x, self.y).transform(start.position(), start.yaw);
        VehicleState::new(p.x, p.y, start.yaw + self.yaw, speed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub input: Input,
    pub speed_change: f64,
    pub successor: usize,
    /// Samples at `dt * k / samples`, `k = 1..=samples`; the last is the end pose.
    pub trajectory: Vec<LocalPose>,
    /// Hull of the footprints at the start and end of the primitive.
    pub swept: ConvexPolygon,
}

impl Primitive {
    pub fn end(&self) -> &LocalPose {
        self.trajectory.last().expect("primitives hold at least 5 samples")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionPrimitiveAutomaton {
    pub config: MpaConfig,
    pub vehicle: VehicleParams,
    pub states: Vec<AutomatonState>,
    /// `primitives[s]` are the transitions leaving state `s`.
    pub primitives: Vec<Vec<Primitive>>,
}

/// Builds every transition between automaton states that respects the
/// per-step speed and steering change limits.
pub fn build_mpa(config: &MpaConfig, vehicle: &VehicleParams) -> Result<MotionPrimitiveAutomaton> {
    vehicle.validate()?;
    check_levels("speed", &config.speed_levels)?;
    check_levels("steering", &config.steering_levels)?;
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "time step must be positive, got {}",
            config.dt
        )));
    }
    if config.samples < 5 {
        return Err(Error::InvalidInput("primitives need at least 5 samples".into()));
    }
    if !(config.max_speed_change >= 0.0 && config.max_steering_change >= 0.0) {
        return Err(Error::InvalidInput("change limits must be non-negative".into()));
    }
    if let Some(v) = config
        .speed_levels
        .iter()
        .find(|&&v| v < 0.0 || v > vehicle.max_speed + LEVEL_TOLERANCE)
    {
        return Err(Error::InvalidInput(format!("speed level {v} outside [0, max_speed]")));
    }
    if let Some(d) = config
        .steering_levels
        .iter()
        .find(|&&d| d.abs() > vehicle.max_steering + LEVEL_TOLERANCE)
    {
        return Err(Error::InvalidInput(format!("steering level {d} exceeds max_steering")));
    }

    let mut states = Vec::new();
    for (speed_index, &speed) in config.speed_levels.iter().enumerate() {
        for (steering_index, &steering) in config.steering_levels.iter().enumerate() {
            states.push(AutomatonState {
                speed_index,
                steering_index,
                speed,
                steering,
            });
        }
    }

    let local_footprint = vehicle.local_footprint();
    let mut primitives = Vec::with_capacity(states.len());
    for from in &states {
        let mut outgoing = Vec::new();
        for (to_idx, to) in states.iter().enumerate() {
            let dv = to.speed - from.speed;
            if dv.abs() > config.max_speed_change + LEVEL_TOLERANCE
                || (to.steering - from.steering).abs() > config.max_steering_change + LEVEL_TOLERANCE
            {
                continue;
            }
            let input = Input {
                steering: to.steering,
                acceleration: dv / config.dt,
            };
            let origin = VehicleState::new(0.0, 0.0, 0.0, from.speed);
            let trajectory = (1..=config.samples)
                .map(|k| {
                    // the final sample integrates over exactly dt
                    let t = if k == config.samples {
                        config.dt
                    } else {
                        config.dt * k as f64 / config.samples as f64
                    };
                    step_model(&origin, &input, t, vehicle).map(|s| LocalPose {
                        x: s.x,
                        y: s.y,
                        yaw: s.yaw,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let end = trajectory.last().expect("samples >= 5");
            let end_footprint = local_footprint.transformed(Point2::new(end.x, end.y), end.yaw);
            let mut corners = local_footprint.vertices().to_vec();
            corners.extend_from_slice(end_footprint.vertices());
            outgoing.push(Primitive {
                input,
                speed_change: dv,
                successor: to_idx,
                trajectory,
                swept: ConvexPolygon::hull(&corners)?,
            });
        }
        primitives.push(outgoing);
    }
    Ok(MotionPrimitiveAutomaton {
        config: config.clone(),
        vehicle: *vehicle,
        states,
        primitives,
    })
}

fn check_levels(name: &str, levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidInput(format!("no {name} levels")));
    }
    if levels.iter().any(|v| !v.is_finite()) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "{name} levels must be finite and strictly ascending"
        )));
    }
    Ok(())
}

impl MotionPrimitiveAutomaton {
    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn state_index(&self, speed_index: usize, steering_index: usize) -> Option<usize> {
        let n_steer = self.config.steering_levels.len();
        (speed_index < self.config.speed_levels.len() && steering_index < n_steer)
            .then_some(speed_index * n_steer + steering_index)
    }

    /// Automaton state whose levels equal `speed` and `steering`.
    pub fn find_state(&self, speed: f64, steering: f64) -> Option<usize> {
        self.states.iter().position(|s| {
            (s.speed - speed).abs() <= LEVEL_TOLERANCE && (s.steering - steering).abs() <= LEVEL_TOLERANCE
        })
    }

    /// Farthest distance any primitive moves the vehicle center in one step.
    pub fn max_step_displacement(&self) -> f64 {
        self.primitives
            .iter()
            .flatten()
            .flat_map(|p| p.trajectory.iter())
            .map(|q| q.x.hypot(q.y))
            .fold(0.0, f64::max)
    }

    /// Admissible as the last step of a plan: ends at standstill or can be
    /// repeated indefinitely.
    pub fn is_terminal(&self, from: usize, primitive: &Primitive) -> bool {
        self.states[primitive.successor].speed == 0.0 || primitive.successor == from
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("automaton serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("automaton: {e}")))
    }
}
