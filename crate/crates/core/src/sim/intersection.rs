//! Four-way intersection with two lanes per direction and eight vehicles.
//!
//! Traffic keeps right. On every approach the inner lane goes straight and
//! the outer lane turns right. Vehicle ids run around the intersection
//! (north-bound, west-bound, south-bound, east-bound; straight before
//! turning) so that consecutive ids are always coupled at the start.

use std::f64::consts::FRAC_PI_2;

use crate::planning::{ConvexPolygon, MpaConfig, Point2, VehicleParams, VehicleState};
use crate::priority::Strategy;

use super::scenario::{PlannerSettings, Scenario, TimingSettings, VehicleSpec};

pub const LANE_WIDTH: f64 = 0.3;
/// Half-width of each road; the intersection box is `[-0.6, 0.6]²`.
pub const ROAD_HALF_WIDTH: f64 = 2.0 * LANE_WIDTH;
pub const MAP_HALF_X: f64 = 2.25;
pub const MAP_HALF_Y: f64 = 2.0;
pub const TURN_RADIUS: f64 = 0.6;

/// Distance from the center at which vehicles start, straight and turning.
const START_STRAIGHT: [f64; 4] = [1.0, 1.45, 1.0, 1.45];
const START_TURN: [f64; 4] = [1.1, 1.3, 1.1, 1.3];
/// Distance past the center at which straight paths end.
const END_STRAIGHT: f64 = 0.85;
/// Length of the exit leg after a right turn.
const TURN_EXIT: f64 = 0.3;
const REFERENCE_SPEED: f64 = 0.6;
const INITIAL_SPEED: f64 = 0.6;

/// Rotates `p` counter-clockwise by `quarter` quarter turns about the origin.
fn rotate(p: Point2, quarter: usize) -> Point2 {
    (0..quarter % 4).fold(p, |q, _| Point2::new(-q.y, q.x))
}

/// North-bound straight path in the inner lane, from `start` below the center.
fn straight_path(start: f64) -> Vec<Point2> {
    let x = LANE_WIDTH / 2.0;
    vec![Point2::new(x, -start), Point2::new(x, END_STRAIGHT)]
}

/// North-bound right turn from the outer lane into the outer east-bound lane.
fn right_turn_path(start: f64) -> Vec<Point2> {
    let lane = 1.5 * LANE_WIDTH;
    let center = Point2::new(lane + TURN_RADIUS, -(lane + TURN_RADIUS));
    let mut pts = vec![Point2::new(lane, -start)];
    let segments = 9;
    for k in 0..=segments {
        let a = std::f64::consts::PI - FRAC_PI_2 * k as f64 / segments as f64;
        pts.push(Point2::new(
            center.x + TURN_RADIUS * a.cos(),
            center.y + TURN_RADIUS * a.sin(),
        ));
    }
    pts.push(Point2::new(center.x + TURN_EXIT, -lane));
    pts
}

/// South-east corner block, cut off by a chamfer parallel to the turn.
fn corner_block() -> ConvexPolygon {
    let h = ROAD_HALF_WIDTH;
    let turn_center = 1.5 * LANE_WIDTH + TURN_RADIUS;
    // chamfer line (p - c)·(-1, 1)/√2 = TURN_RADIUS - LANE_WIDTH / 2
    let offset = (TURN_RADIUS - LANE_WIDTH / 2.0) * std::f64::consts::SQRT_2;
    let cut = turn_center - (offset - (turn_center - h));
    ConvexPolygon::new(vec![
        Point2::new(h, -cut),
        Point2::new(h, -MAP_HALF_Y),
        Point2::new(MAP_HALF_X, -MAP_HALF_Y),
        Point2::new(MAP_HALF_X, -h),
        Point2::new(cut, -h),
    ])
    .expect("corner block is convex")
}

/// Corner blocks in all four quadrants, mirrored from the south-east one.
pub fn boundaries() -> Vec<ConvexPolygon> {
    let base = corner_block();
    [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|&(sx, sy)| {
            let mirrored = base
                .vertices()
                .iter()
                .map(|v| Point2::new(sx * v.x, sy * v.y))
                .collect();
            ConvexPolygon::new(mirrored).expect("mirroring keeps convexity")
        })
        .collect()
}

/// Oncoming half of the north-south road, kept clear by north-bound vehicles.
fn oncoming_half() -> ConvexPolygon {
    ConvexPolygon::rectangle(-ROAD_HALF_WIDTH, -MAP_HALF_Y, 0.0, MAP_HALF_Y).expect("non-degenerate")
}

fn vehicle(path: Vec<Point2>, quarter: usize) -> VehicleSpec {
    let path: Vec<Point2> = path.into_iter().map(|p| rotate(p, quarter)).collect();
    let keep_out = oncoming_half().vertices().iter().map(|&v| rotate(v, quarter)).collect();
    let heading = FRAC_PI_2 * (quarter as f64 + 1.0);
    VehicleSpec {
        initial: VehicleState::new(path[0].x, path[0].y, heading, INITIAL_SPEED),
        initial_steering: 0.0,
        path,
        reference_speed: REFERENCE_SPEED,
        keep_out: vec![ConvexPolygon::new(keep_out).expect("rotation keeps convexity")],
    }
}

/// The shipped intersection scenario.
pub fn scenario() -> Scenario {
    let mut vehicles = Vec::new();
    for q in 0..4 {
        vehicles.push(vehicle(straight_path(START_STRAIGHT[q]), q));
        vehicles.push(vehicle(right_turn_path(START_TURN[q]), q));
    }
    Scenario {
        name: "intersection".into(),
        dt: 0.2,
        n_steps: 25,
        seed: 1,
        strategy: Strategy::Coloring,
        vehicle: VehicleParams::default(),
        mpa: MpaConfig {
            speed_levels: vec![0.0, 0.2, 0.4, 0.6],
            steering_levels: vec![-0.35, -0.175, 0.0, 0.175, 0.35],
            max_speed_change: 0.2,
            max_steering_change: 0.175,
            dt: 0.2,
            samples: 10,
        },
        planner: PlannerSettings {
            horizon: 8,
            n_expansions: 2500,
        },
        timing: TimingSettings {
            planning_us: 20_000,
            prioritization_us: 1_000,
        },
        guard_successors: true,
        boundaries: boundaries(),
        vehicles,
    }
}
