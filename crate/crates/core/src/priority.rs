//! Priority assignments, edge orientation, and prioritization strategies.
//!
//! A smaller priority number means a higher priority: the agent plans
//! earlier and its neighbors with larger numbers must avoid its plan.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coloring::{self, Coloring};
use crate::error::{Error, Result};
use crate::graph::CouplingDag;
use crate::graph::CouplingGraph;

/// Largest graph accepted by [`enumerate_prioritizations`].
pub const ENUMERATE_MAX_VERTICES: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PriorityAssignment {
    priority: Vec<usize>,
}

impl PriorityAssignment {
    /// `priority[i - 1]` is the priority of vertex `i`. Values must be positive.
    pub fn new(priority: Vec<usize>) -> Result<Self> {
        if priority.is_empty() {
            return Err(Error::InvalidInput("empty priority assignment".into()));
        }
        if let Some(idx) = priority.iter().position(|&p| p == 0) {
            return Err(Error::InvalidInput(format!("vertex {} has priority 0", idx + 1)));
        }
        Ok(Self { priority })
    }

    /// Priority `order[k]` is `k + 1`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut priority = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            if !(1..=n).contains(&v) || priority[v - 1] != 0 {
                return Err(Error::InvalidInput(format!("order is not a permutation of 1..={n}")));
            }
            priority[v - 1] = k + 1;
        }
        Ok(Self { priority })
    }

    pub fn priority(&self, i: usize) -> Result<usize> {
        self.priority
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or(Error::UnknownVertex(i))
    }

    pub fn n_vertices(&self) -> usize {
        self.priority.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.priority
    }

    pub fn to_map(&self) -> BTreeMap<usize, usize> {
        self.priority.iter().enumerate().map(|(i, &p)| (i + 1, p)).collect()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.priority.len()];
        self.priority
            .iter()
            .all(|&p| p <= seen.len() && !std::mem::replace(&mut seen[p - 1], true))
    }

    /// Adjacent vertices must not share a priority.
    pub fn validate(&self, g: &CouplingGraph) -> Result<()> {
        if self.priority.len() != g.n_vertices() {
            return Err(Error::InvalidInput(format!(
                "{} priorities for {} vertices",
                self.priority.len(),
                g.n_vertices()
            )));
        }
        for (a, b) in g.edges() {
            if self.priority[a - 1] == self.priority[b - 1] {
                return Err(Error::InvalidPriority(a, b, self.priority[a - 1]));
            }
        }
        Ok(())
    }
}

/// Orders vertices by color class, then by id inside a class, and numbers
/// them `1..=n` in that order.
pub fn color_to_priority(g: &CouplingGraph, c: &Coloring) -> Result<PriorityAssignment> {
    c.validate(g)?;
    let order: Vec<usize> = c.classes().into_iter().flatten().collect();
    PriorityAssignment::from_order(&order)
}

/// Points every edge from the higher-priority (smaller number) endpoint to
/// the lower-priority one.
pub fn orient_edges(g: &CouplingGraph, p: &PriorityAssignment) -> Result<CouplingDag> {
    p.validate(g)?;
    let arcs: Vec<_> = g
        .edges()
        .into_iter()
        .map(|(a, b)| {
            if p.priority[a - 1] < p.priority[b - 1] {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    CouplingDag::new(g.n_vertices(), &arcs)
}

/// How priorities are assigned to agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    /// Priority equals vertex id.
    Constant,
    /// Uniform random permutation drawn from `seed`.
    Random { seed: u64 },
    /// More potential collisions means higher priority.
    Constraint,
    /// Greedy coloring, level reordering, then class order.
    Coloring,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Constant => "constant",
            Strategy::Random { .. } => "random",
            Strategy::Constraint => "constraint",
            Strategy::Coloring => "coloring",
        }
    }

    /// The four strategies compared in experiments; `seed` feeds `Random`.
    pub fn all(seed: u64) -> [Strategy; 4] {
        [
            Strategy::Constant,
            Strategy::Random { seed },
            Strategy::Constraint,
            Strategy::Coloring,
        ]
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `constant`, `random`, `constraint` or `coloring`; `random` gets seed 0.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Strategy::Constant),
            "random" => Ok(Strategy::Random { seed: 0 }),
            "constraint" => Ok(Strategy::Constraint),
            "coloring" => Ok(Strategy::Coloring),
            other => Err(Error::InvalidInput(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Fisher–Yates over the ascending ids `1..=n`, driven by ChaCha8 seeded
/// with `seed`. The shuffled sequence is the planning order.
pub fn random_order(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

/// Applies `strategy` to `g`.
///
/// `collisions[i - 1]` is the number of potential collisions of vertex `i`;
/// only the constraint strategy reads it.
pub fn prioritize(strategy: Strategy, g: &CouplingGraph, collisions: Option<&[usize]>) -> Result<PriorityAssignment> {
    let n = g.n_vertices();
    match strategy {
        Strategy::Constant => PriorityAssignment::new((1..=n).collect()),
        Strategy::Random { seed } => PriorityAssignment::from_order(&random_order(n, seed)),
        Strategy::Constraint => {
            let counts =
                collisions.ok_or_else(|| Error::InvalidInput("constraint strategy needs collision counts".into()))?;
            if counts.len() != n {
                return Err(Error::InvalidInput(format!(
                    "expected {n} collision counts, got {}",
                    counts.len()
                )));
            }
            let mut order: Vec<usize> = (1..=n).collect();
            order.sort_by(|&a, &b| counts[b - 1].cmp(&counts[a - 1]).then(a.cmp(&b)));
            PriorityAssignment::from_order(&order)
        }
        Strategy::Coloring => {
            let greedy = coloring::greedy_color(g);
            let reordered = coloring::reorder_levels(&greedy, g);
            color_to_priority(g, &reordered)
        }
    }
}

/// Histogram of computation-level counts over all `n!` priority permutations.
pub fn enumerate_prioritizations(g: &CouplingGraph) -> Result<BTreeMap<usize, u64>> {
    let n = g.n_vertices();
    if n > ENUMERATE_MAX_VERTICES {
        return Err(Error::Budget {
            n,
            max: ENUMERATE_MAX_VERTICES,
        });
    }
    let mut histogram = BTreeMap::new();
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut count = |perm: &[usize]| -> Result<()> {
        let p = PriorityAssignment {
            priority: perm.to_vec(),
        };
        let levels = orient_edges(g, &p)?.compute_levels()?.n_levels();
        *histogram.entry(levels).or_insert(0u64) += 1;
        Ok(())
    };
    // Heap's algorithm, iterative form
    let mut stack = vec![0usize; n];
    count(&perm)?;
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            count(&perm)?;
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    Ok(histogram)
}

/// Minimum achievable number of computation levels, which is the chromatic
/// number of `g`.
pub fn min_levels(g: &CouplingGraph) -> Result<usize> {
    coloring::chromatic_number(g)
}
