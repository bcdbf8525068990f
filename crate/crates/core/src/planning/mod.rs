//! Per-agent trajectory planning on a motion-primitive automaton.

pub mod geometry;
pub mod model;
pub mod mpa;
pub mod reference;
pub mod search;

pub use geometry::{polygons_intersect, ConvexPolygon, Point2};
pub use model::{step_model, Input, VehicleParams, VehicleState};
pub use mpa::{build_mpa, MotionPrimitiveAutomaton, MpaConfig};
pub use reference::{ReferencePath, ReferencePoint, ReferenceTrajectory};
pub use search::{
    braking_plan, plan, shift_prediction, stage_cost, trajectory_cost, PlanError, PlannerConfig, Prediction,
    PrimitiveRef,
};
