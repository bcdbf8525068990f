//! Sampling-based tree search over the motion-primitive automaton.
//!
//! Each rollout starts at the root and follows uniformly random transitions
//! that are not yet known to be exhausted. Reaching a transition that has
//! never been evaluated creates a node, which costs one expansion. Nodes
//! whose swept footprint hits an obstacle of their step are pruned. The
//! cheapest full-horizon leaf found within the expansion budget is
//! returned. Since the random stream only depends on the seed and the tree,
//! a larger budget replays a smaller one and then keeps going.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geometry::ConvexPolygon;
use super::model::VehicleState;
use super::mpa::MotionPrimitiveAutomaton;
use super::reference::{ReferencePoint, ReferenceTrajectory};

/// Weight of the squared speed error in the stage cost.
pub const SPEED_WEIGHT: f64 = 0.1;

const SPEED_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Prediction horizon in steps.
    pub horizon: usize,
    /// Expansion budget per planning call.
    pub n_expansions: usize,
    pub seed: u64,
}

/// One transition of a plan: primitive `index` leaving automaton state `from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveRef {
    pub from: usize,
    pub index: usize,
}

/// Planned trajectory over the horizon, as shared with other agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// States at steps `k+1 ..= k+H_p`.
    pub poses: Vec<VehicleState>,
    /// Swept footprint during each step.
    pub occupancies: Vec<ConvexPolygon>,
    pub primitives: Vec<PrimitiveRef>,
    /// Automaton state reached at each step.
    pub automaton_states: Vec<usize>,
    pub cost: f64,
}

impl Prediction {
    pub fn horizon(&self) -> usize {
        self.poses.len()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid planner input: {0}")]
    InvalidInput(String),
    /// No collision-free full-horizon plan was found within the budget.
    #[error("no feasible plan within {expansions} expansions (deepest prefix {} steps)", prefix.len())]
    Infeasible {
        prefix: Vec<PrimitiveRef>,
        expansions: usize,
    },
}

/// Squared distance to the reference point plus weighted squared speed error.
pub fn stage_cost(state: &VehicleState, reference: &ReferencePoint) -> f64 {
    let dx = state.x - reference.x;
    let dy = state.y - reference.y;
    let dv = state.speed - reference.speed;
    dx * dx + dy * dy + SPEED_WEIGHT * dv * dv
}

/// Trajectory cost: stage costs summed over the horizon in step order.
pub fn trajectory_cost(poses: &[VehicleState], reference: &ReferenceTrajectory) -> f64 {
    poses
        .iter()
        .zip(&reference.points)
        .fold(0.0, |acc, (s, r)| acc + stage_cost(s, r))
}

/// Applies a primitive to a state.
pub fn apply_primitive(
    mpa: &MotionPrimitiveAutomaton,
    state: &VehicleState,
    p: PrimitiveRef,
) -> (VehicleState, ConvexPolygon) {
    let prim = &mpa.primitives[p.from][p.index];
    let speed = mpa.states[prim.successor].speed;
    let next = prim.end().apply(state, speed);
    let swept = prim.swept.transformed(state.position(), state.yaw);
    (next, swept)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Child {
    Unvisited,
    Open(usize),
    Closed,
}

struct Node {
    parent: Option<(usize, usize)>,
    depth: usize,
    automaton: usize,
    state: VehicleState,
    occupancy: Option<ConvexPolygon>,
    cost: f64,
    children: Vec<Child>,
    open: usize,
}

struct Tree<'a> {
    mpa: &'a MotionPrimitiveAutomaton,
    reference: &'a ReferenceTrajectory,
    obstacles: &'a [Vec<ConvexPolygon>],
    horizon: usize,
    nodes: Vec<Node>,
    expansions: usize,
    best: Option<usize>,
    deepest: usize,
}

#[derive(Debug, Clone, Copy)]
enum Rollout {
    /// Repeat the current input where possible.
    Hold,
    /// Expand every transition and descend into the cheapest.
    Greedy,
    Uniform,
}

impl Tree<'_> {
    fn new_node(
        &mut self,
        parent: Option<(usize, usize)>,
        depth: usize,
        automaton: usize,
        state: VehicleState,
        occupancy: Option<ConvexPolygon>,
        cost: f64,
    ) -> usize {
        let (children, open) = if depth == self.horizon {
            (Vec::new(), 0)
        } else {
            let last_step = depth + 1 == self.horizon;
            let children: Vec<Child> = self.mpa.primitives[automaton]
                .iter()
                .map(|p| {
                    if !last_step || self.mpa.is_terminal(automaton, p) {
                        Child::Unvisited
                    } else {
                        Child::Closed
                    }
                })
                .collect();
            let open = children.iter().filter(|c| **c != Child::Closed).count();
            (children, open)
        };
        self.nodes.push(Node {
            parent,
            depth,
            automaton,
            state,
            occupancy,
            cost,
            children,
            open,
        });
        self.nodes.len() - 1
    }

    /// Marks `node` exhausted and propagates to ancestors that run out of
    /// open transitions.
    fn close(&mut self, mut node: usize) {
        while let Some((parent, slot)) = self.nodes[node].parent {
            if self.nodes[parent].children[slot] == Child::Closed {
                return;
            }
            self.nodes[parent].children[slot] = Child::Closed;
            self.nodes[parent].open -= 1;
            if self.nodes[parent].open > 0 {
                return;
            }
            node = parent;
        }
    }

    /// Evaluates transition `slot` of `cur`, spending one expansion. Returns
    /// the new node if it is feasible.
    fn expand(&mut self, cur: usize, slot: usize) -> Option<usize> {
        self.expansions += 1;
        let node = &self.nodes[cur];
        let depth = node.depth + 1;
        let pref = PrimitiveRef {
            from: node.automaton,
            index: slot,
        };
        let (next_state, swept) = apply_primitive(self.mpa, &node.state, pref);
        let successor = self.mpa.primitives[node.automaton][slot].successor;
        let in_bounds = (0.0..=self.mpa.vehicle.max_speed).contains(&next_state.speed);
        if !in_bounds || self.obstacles[depth - 1].iter().any(|o| o.intersects(&swept)) {
            self.nodes[cur].children[slot] = Child::Closed;
            self.nodes[cur].open -= 1;
            if self.nodes[cur].open == 0 {
                self.close(cur);
            }
            return None;
        }

        let cost = node.cost + stage_cost(&next_state, &self.reference.points[depth - 1]);
        let id = self.new_node(Some((cur, slot)), depth, successor, next_state, Some(swept), cost);
        self.nodes[cur].children[slot] = Child::Open(id);
        if depth > self.nodes[self.deepest].depth {
            self.deepest = id;
        }
        if depth == self.horizon {
            if self.best.is_none_or(|b| cost < self.nodes[b].cost) {
                self.best = Some(id);
            }
            self.close(id);
        } else if self.nodes[id].open == 0 {
            self.close(id);
        }
        Some(id)
    }

    fn uniform_slot(&self, cur: usize, rng: &mut ChaCha8Rng) -> usize {
        let node = &self.nodes[cur];
        let mut pick = rng.gen_range(0..node.open);
        node.children
            .iter()
            .position(|c| {
                if *c == Child::Closed {
                    return false;
                }
                if pick == 0 {
                    return true;
                }
                pick -= 1;
                false
            })
            .expect("open count matches children")
    }

    fn path_to(&self, mut node: usize) -> Vec<usize> {
        let mut path = Vec::new();
        while let Some((parent, _)) = self.nodes[node].parent {
            path.push(node);
            node = parent;
        }
        path.reverse();
        path
    }

    fn primitive_ref(&self, node: usize) -> PrimitiveRef {
        let (parent, slot) = self.nodes[node].parent.expect("non-root");
        PrimitiveRef {
            from: self.nodes[parent].automaton,
            index: slot,
        }
    }
}

/// Plans a trajectory from `state` (in automaton state `automaton`) that
/// tracks `reference` and keeps its swept footprint clear of
/// `obstacles[l]` at every step `l`.
///
/// The first rollout repeats the current input, the second descends
/// greedily by stage cost, and all later ones pick transitions uniformly
/// at random.
pub fn plan(
    state: &VehicleState,
    automaton: usize,
    reference: &ReferenceTrajectory,
    obstacles: &[Vec<ConvexPolygon>],
    mpa: &MotionPrimitiveAutomaton,
    config: &PlannerConfig,
) -> Result<Prediction, PlanError> {
    let horizon = config.horizon;
    if horizon == 0 || config.n_expansions == 0 {
        return Err(PlanError::InvalidInput(
            "horizon and expansion budget must be positive".into(),
        ));
    }
    if reference.horizon() != horizon || obstacles.len() != horizon {
        return Err(PlanError::InvalidInput(format!(
            "horizon {horizon} but {} reference points and {} obstacle sets",
            reference.horizon(),
            obstacles.len()
        )));
    }
    let Some(start) = mpa.states.get(automaton) else {
        return Err(PlanError::InvalidInput(format!("unknown automaton state {automaton}")));
    };
    if (start.speed - state.speed).abs() > SPEED_MATCH_TOLERANCE {
        return Err(PlanError::InvalidInput(format!(
            "vehicle speed {} does not match automaton speed {}",
            state.speed, start.speed
        )));
    }

    let budget = config.n_expansions;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tree = Tree {
        mpa,
        reference,
        obstacles,
        horizon,
        nodes: Vec::new(),
        expansions: 0,
        best: None,
        deepest: 0,
    };
    tree.new_node(None, 0, automaton, *state, None, 0.0);

    let mut rollout = 0usize;
    while tree.expansions < budget && tree.nodes[0].open > 0 {
        let policy = match rollout {
            0 => Rollout::Hold,
            1 => Rollout::Greedy,
            _ => Rollout::Uniform,
        };
        rollout += 1;
        let mut cur = 0usize;
        while tree.expansions < budget && tree.nodes[cur].open > 0 {
            let slot = match policy {
                Rollout::Greedy => {
                    for slot in 0..tree.nodes[cur].children.len() {
                        if tree.expansions >= budget {
                            break;
                        }
                        if tree.nodes[cur].children[slot] == Child::Unvisited {
                            tree.expand(cur, slot);
                        }
                    }
                    let cheapest = tree.nodes[cur]
                        .children
                        .iter()
                        .filter_map(|c| match c {
                            Child::Open(id) => Some(*id),
                            _ => None,
                        })
                        .min_by(|&a, &b| tree.nodes[a].cost.total_cmp(&tree.nodes[b].cost));
                    match cheapest {
                        Some(next) if tree.expansions < budget => {
                            cur = next;
                            continue;
                        }
                        _ => break,
                    }
                }
                Rollout::Hold => {
                    let node = &tree.nodes[cur];
                    let hold = mpa.primitives[node.automaton]
                        .iter()
                        .position(|p| p.successor == node.automaton)
                        .filter(|&s| node.children[s] != Child::Closed);
                    match hold {
                        Some(s) => s,
                        None => tree.uniform_slot(cur, &mut rng),
                    }
                }
                Rollout::Uniform => tree.uniform_slot(cur, &mut rng),
            };
            match tree.nodes[cur].children[slot] {
                Child::Open(next) => cur = next,
                Child::Unvisited => match tree.expand(cur, slot) {
                    Some(id) if tree.nodes[id].depth < horizon => cur = id,
                    Some(_) => break,
                    None => {}
                },
                Child::Closed => unreachable!("only open transitions are picked"),
            }
        }
    }

    let best = tree.best;
    let Some(leaf) = best else {
        let prefix = tree
            .path_to(tree.deepest)
            .into_iter()
            .map(|id| tree.primitive_ref(id))
            .collect();
        return Err(PlanError::Infeasible {
            prefix,
            expansions: tree.expansions,
        });
    };

    let path = tree.path_to(leaf);
    let mut prediction = Prediction {
        poses: Vec::with_capacity(horizon),
        occupancies: Vec::with_capacity(horizon),
        primitives: Vec::with_capacity(horizon),
        automaton_states: Vec::with_capacity(horizon),
        cost: tree.nodes[leaf].cost,
    };
    for id in path {
        let node = &tree.nodes[id];
        prediction.poses.push(node.state);
        prediction.occupancies.push(node.occupancy.clone().expect("non-root"));
        prediction.primitives.push(tree.primitive_ref(id));
        prediction.automaton_states.push(node.automaton);
    }
    Ok(prediction)
}

/// Decelerates as hard as the automaton allows while keeping the current
/// steering level, then holds standstill. Ignores obstacles.
pub fn braking_plan(
    state: &VehicleState,
    automaton: usize,
    reference: &ReferenceTrajectory,
    mpa: &MotionPrimitiveAutomaton,
    horizon: usize,
) -> Prediction {
    let mut prediction = Prediction {
        poses: Vec::with_capacity(horizon),
        occupancies: Vec::with_capacity(horizon),
        primitives: Vec::with_capacity(horizon),
        automaton_states: Vec::with_capacity(horizon),
        cost: 0.0,
    };
    let mut cur_state = *state;
    let mut cur = automaton;
    for _ in 0..horizon {
        let steer = mpa.states[cur].steering_index;
        let index = mpa.primitives[cur]
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let sa = &mpa.states[a.successor];
                let sb = &mpa.states[b.successor];
                sa.speed.total_cmp(&sb.speed).then(
                    sa.steering_index
                        .abs_diff(steer)
                        .cmp(&sb.steering_index.abs_diff(steer)),
                )
            })
            .map(|(i, _)| i)
            .expect("every automaton state has a self-loop");
        let pref = PrimitiveRef { from: cur, index };
        let (next, swept) = apply_primitive(mpa, &cur_state, pref);
        cur = mpa.primitives[cur][index].successor;
        prediction.poses.push(next);
        prediction.occupancies.push(swept);
        prediction.primitives.push(pref);
        prediction.automaton_states.push(cur);
        cur_state = next;
    }
    prediction.cost = trajectory_cost(&prediction.poses, reference);
    prediction
}

/// Drops the first step of `prediction` and appends one more step that
/// repeats the automaton state it ends in. The plan ends in a repeatable
/// state, so the result is executable from `prediction.poses[0]`.
pub fn shift_prediction(
    prediction: &Prediction,
    reference: &ReferenceTrajectory,
    mpa: &MotionPrimitiveAutomaton,
) -> Prediction {
    let last_state = *prediction.poses.last().expect("non-empty prediction");
    let last = *prediction.automaton_states.last().expect("non-empty prediction");
    let index = mpa.primitives[last]
        .iter()
        .position(|p| p.successor == last)
        .expect("every automaton state has a self-loop");
    let pref = PrimitiveRef { from: last, index };
    let (next, swept) = apply_primitive(mpa, &last_state, pref);

    let mut shifted = Prediction {
        poses: prediction.poses[1..].to_vec(),
        occupancies: prediction.occupancies[1..].to_vec(),
        primitives: prediction.primitives[1..].to_vec(),
        automaton_states: prediction.automaton_states[1..].to_vec(),
        cost: 0.0,
    };
    shifted.poses.push(next);
    shifted.occupancies.push(swept);
    shifted.primitives.push(pref);
    shifted.automaton_states.push(last);
    shifted.cost = trajectory_cost(&shifted.poses, reference);
    shifted
}
