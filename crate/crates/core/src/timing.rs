//! Networked computation time of one prioritized-planning instance.
//!
//! The instance time is the slowest agent's prioritization time plus the
//! planning times summed along the heaviest path of the coupling DAG.
//! Communication time is not modeled.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CouplingDag, CouplingGraph};
use crate::priority::{self, Strategy};

/// Per-agent planning and prioritization durations, indexed by id − 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingModel {
    pub planning: Vec<Duration>,
    pub prioritization: Vec<Duration>,
}

impl TimingModel {
    pub fn new(planning: Vec<Duration>, prioritization: Vec<Duration>) -> Result<Self> {
        if planning.len() != prioritization.len() {
            return Err(Error::InvalidInput(format!(
                "{} planning times but {} prioritization times",
                planning.len(),
                prioritization.len()
            )));
        }
        Ok(Self {
            planning,
            prioritization,
        })
    }

    /// Every agent plans in `planning` and prioritizes in `prioritization`.
    pub fn uniform(n: usize, planning: Duration, prioritization: Duration) -> Self {
        Self {
            planning: vec![planning; n],
            prioritization: vec![prioritization; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceTiming {
    pub total: Duration,
    pub critical_path: Vec<usize>,
    pub n_levels: usize,
}

impl InstanceTiming {
    pub fn total_ms(&self) -> f64 {
        self.total.as_nanos() as f64 / 1e6
    }
}

pub fn instance_time(d: &CouplingDag, t: &TimingModel) -> Result<InstanceTiming> {
    let n = d.n_vertices();
    if t.planning.len() != n || t.prioritization.len() != n {
        return Err(Error::InvalidInput(format!(
            "timing model covers {} / {} agents, graph has {n}",
            t.planning.len(),
            t.prioritization.len()
        )));
    }
    let (critical_path, planning) = d.longest_weighted_path(&t.planning)?;
    let prio = t.prioritization.iter().copied().max().unwrap_or_default();
    Ok(InstanceTiming {
        total: prio + planning,
        critical_path,
        n_levels: d.compute_levels()?.n_levels(),
    })
}

/// Instance timing of each strategy on the same graph and timing model.
pub fn compare_strategies(
    g: &CouplingGraph,
    strategies: &[Strategy],
    t: &TimingModel,
    collisions: Option<&[usize]>,
) -> Result<Vec<(Strategy, InstanceTiming)>> {
    strategies
        .iter()
        .map(|&s| {
            let p = priority::prioritize(s, g, collisions)?;
            let d = priority::orient_edges(g, &p)?;
            Ok((s, instance_time(&d, t)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priority::{orient_edges, random_order, PriorityAssignment};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ms(v: u64) -> Duration {
        Duration::from_millis(v)
    }

    #[test]
    fn instance_time_examples() {
        let chain = CouplingDag::new(3, &[(1, 2), (2, 3)]).unwrap();
        let t = TimingModel::uniform(3, ms(50), ms(1));
        let timing = instance_time(&chain, &t).unwrap();
        assert_eq!(timing.total, ms(151));
        assert_eq!(timing.critical_path, vec![1, 2, 3]);

        let single = CouplingDag::new(1, &[]).unwrap();
        let t = TimingModel::uniform(1, ms(50), Duration::from_micros(810));
        let timing = instance_time(&single, &t).unwrap();
        assert_eq!(timing.total, Duration::from_micros(50_810));
        assert_eq!(timing.total_ms(), 50.81);

        assert!(instance_time(&chain, &TimingModel::uniform(2, ms(1), ms(1))).is_err());
        assert!(TimingModel::new(vec![ms(1)], vec![]).is_err());
    }

    #[test]
    fn uniform_planning_is_affine_in_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..200 {
            let g = CouplingGraph::random(9, 0.4, &mut rng).unwrap();
            let p = PriorityAssignment::from_order(&random_order(9, seed)).unwrap();
            let d = orient_edges(&g, &p).unwrap();
            let t = TimingModel::uniform(9, ms(50), ms(2));
            let timing = instance_time(&d, &t).unwrap();
            assert_eq!(timing.total, ms(2) + ms(50) * timing.n_levels as u32);
        }
    }

    #[test]
    fn compare_examples() {
        let t8 = TimingModel::uniform(8, ms(50), ms(1));
        let p8 = CouplingGraph::path(8).unwrap();
        let rows = compare_strategies(&p8, &[Strategy::Constant, Strategy::Coloring], &t8, None).unwrap();
        assert_eq!(rows[0].1.n_levels, 8);
        assert_eq!(rows[1].1.n_levels, 2);
        assert!(rows[1].1.total < rows[0].1.total);

        let k3 = CouplingGraph::complete(3).unwrap();
        let t3 = TimingModel::uniform(3, ms(50), ms(1));
        let rows = compare_strategies(&k3, &Strategy::all(5), &t3, Some(&[2, 0, 1])).unwrap();
        assert!(rows.iter().all(|(_, r)| r.n_levels == 3));

        let e3 = CouplingGraph::edgeless(3).unwrap();
        let rows = compare_strategies(&e3, &Strategy::all(5), &t3, Some(&[0, 0, 0])).unwrap();
        assert!(rows.iter().all(|(_, r)| r.n_levels == 1 && r.total == ms(51)));

        assert!(compare_strategies(&e3, &[Strategy::Constraint], &t3, None).is_err());
    }
}
