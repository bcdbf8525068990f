//! Kinematic single-track vehicle model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{ConvexPolygon, Point2};
use crate::error::{Error, Result};

/// Fixed RK4 sub-steps per call to [`step_model`].
pub const RK4_SUBSTEPS: usize = 10;

const INPUT_TOLERANCE: f64 = 1e-9;

/// Pose and speed of a vehicle; `(x, y)` is the footprint center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub speed: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, yaw: f64, speed: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
            speed,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Geometry and actuator limits shared by all vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
    pub max_speed: f64,
    pub max_steering: f64,
    pub max_acceleration: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            length: 0.22,
            width: 0.10,
            wheelbase: 0.15,
            max_speed: 1.0,
            max_steering: 0.5,
            max_acceleration: 2.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.length, self.width, self.wheelbase, self.max_speed];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || !(self.max_steering.is_finite() && self.max_steering >= 0.0)
            || !(self.max_acceleration.is_finite() && self.max_acceleration >= 0.0)
        {
            return Err(Error::InvalidInput(format!("invalid vehicle parameters {self:?}")));
        }
        Ok(())
    }

    pub fn circumradius(&self) -> f64 {
        (self.length / 2.0).hypot(self.width / 2.0)
    }

    /// Footprint rectangle at the origin, heading along +x.
    pub fn local_footprint(&self) -> ConvexPolygon {
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        ConvexPolygon::rectangle(-hl, -hw, hl, hw).expect("validated positive extents")
    }

    pub fn footprint(&self, s: &VehicleState) -> ConvexPolygon {
        self.local_footprint().transformed(s.position(), s.yaw)
    }
}

/// Front steering angle (rad) and longitudinal acceleration (m/s²), held
/// constant over one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub steering: f64,
    pub acceleration: f64,
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn derivative(s: [f64; 4], input: &Input, wheelbase: f64) -> [f64; 4] {
    let [_, _, yaw, v] = s;
    [
        v * yaw.cos(),
        v * yaw.sin(),
        v / wheelbase * input.steering.tan(),
        input.acceleration,
    ]
}

/// Integrates the single-track model over `dt` with fixed-step RK4.
pub fn step_model(state: &VehicleState, input: &Input, dt: f64, params: &VehicleParams) -> Result<VehicleState> {
    if input.steering.abs() > params.max_steering + INPUT_TOLERANCE
        || input.acceleration.abs() > params.max_acceleration + INPUT_TOLERANCE
        || !input.steering.is_finite()
        || !input.acceleration.is_finite()
    {
        return Err(Error::InvalidInput(format!("input {input:?} outside the feasible set")));
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidInput(format!("invalid time step {dt}")));
    }
    let h = dt / RK4_SUBSTEPS as f64;
    let mut s = [state.x, state.y, state.yaw, state.speed];
    let add = |a: [f64; 4], k: [f64; 4], f: f64| [a[0] + f * k[0], a[1] + f * k[1], a[2] + f * k[2], a[3] + f * k[3]];
    for _ in 0..RK4_SUBSTEPS {
        let k1 = derivative(s, input, params.wheelbase);
        let k2 = derivative(add(s, k1, h / 2.0), input, params.wheelbase);
        let k3 = derivative(add(s, k2, h / 2.0), input, params.wheelbase);
        let k4 = derivative(add(s, k3, h), input, params.wheelbase);
        for i in 0..4 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(VehicleState {
        x: s[0],
        y: s[1],
        yaw: normalize_angle(s[2]),
        speed: s[3].clamp(0.0, params.max_speed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> VehicleParams {
        VehicleParams::default()
    }

    #[test]
    fn standstill_is_an_equilibrium() {
        let s = VehicleState::new(1.0, -2.0, 0.3, 0.0);
        let zero = Input {
            steering: 0.0,
            acceleration: 0.0,
        };
        assert_eq!(step_model(&s, &zero, 0.2, &params()).unwrap(), s);
    }

    #[test]
    fn straight_line() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 1.0);
        let zero = Input {
            steering: 0.0,
            acceleration: 0.0,
        };
        let next = step_model(&s, &zero, 0.2, &params()).unwrap();
        assert!((next.x - 0.2).abs() < 1e-12);
        assert_eq!(next.y, 0.0);
        assert_eq!(next.yaw, 0.0);
        assert_eq!(next.speed, 1.0);
    }

    #[test]
    fn constant_steering_follows_circular_arc() {
        let p = params();
        let (v, delta, dt) = (0.8, 0.3, 0.2);
        let s = VehicleState::new(0.0, 0.0, 0.0, v);
        let next = step_model(
            &s,
            &Input {
                steering: delta,
                acceleration: 0.0,
            },
            dt,
            &p,
        )
        .unwrap();
        let rate = v / p.wheelbase * delta.tan();
        let yaw = rate * dt;
        assert!((next.yaw - yaw).abs() < 1e-6);
        // closed-form arc of radius v / rate
        let radius = v / rate;
        assert!((next.x - radius * yaw.sin()).abs() < 1e-6);
        assert!((next.y - radius * (1.0 - yaw.cos())).abs() < 1e-6);
    }

    #[test]
    fn acceleration_changes_speed_linearly() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 0.2);
        let next = step_model(
            &s,
            &Input {
                steering: 0.0,
                acceleration: 1.0,
            },
            0.2,
            &params(),
        )
        .unwrap();
        assert!((next.speed - 0.4).abs() < 1e-12);
        // x = v0 t + a t² / 2
        assert!((next.x - 0.06).abs() < 1e-12);
    }

    #[test]
    fn rejects_inputs_outside_limits() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 0.0);
        let p = params();
        assert!(step_model(
            &s,
            &Input {
                steering: 0.6,
                acceleration: 0.0
            },
            0.2,
            &p
        )
        .is_err());
        assert!(step_model(
            &s,
            &Input {
                steering: 0.0,
                acceleration: -2.5
            },
            0.2,
            &p
        )
        .is_err());
        assert!(step_model(
            &s,
            &Input {
                steering: f64::NAN,
                acceleration: 0.0
            },
            0.2,
            &p
        )
        .is_err());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((normalize_angle(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn footprint_is_rotated_rectangle() {
        let p = params();
        let fp = p.footprint(&VehicleState::new(1.0, 1.0, PI / 2.0, 0.0));
        assert!((fp.area() - p.length * p.width).abs() < 1e-12);
        assert!(fp.contains(Point2::new(1.0, 1.0 + 0.10)));
        assert!(!fp.contains(Point2::new(1.0 + 0.10, 1.0)));
    }
}
