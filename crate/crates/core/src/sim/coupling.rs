//! Coupling graph from overlapping reachable sets.

use crate::graph::CouplingGraph;
use crate::planning::{MotionPrimitiveAutomaton, VehicleState};

/// Radius of the disc that contains every footprint a vehicle can reach
/// within `horizon` steps.
pub fn reach_radius(mpa: &MotionPrimitiveAutomaton, horizon: usize) -> f64 {
    mpa.max_step_displacement() * horizon as f64 + mpa.vehicle.circumradius()
}

/// Joins vehicles `i` and `j` (ids `1..=n`) when their reach discs intersect.
pub fn build_coupling(states: &[VehicleState], mpa: &MotionPrimitiveAutomaton, horizon: usize) -> CouplingGraph {
    let r = reach_radius(mpa, horizon);
    let mut edges = Vec::new();
    for (a, sa) in states.iter().enumerate() {
        for (b, sb) in states.iter().enumerate().skip(a + 1) {
            if sa.position().distance(sb.position()) <= 2.0 * r {
                edges.push((a + 1, b + 1));
            }
        }
    }
    CouplingGraph::new(states.len(), &edges).expect("pairs are distinct and in range")
}
