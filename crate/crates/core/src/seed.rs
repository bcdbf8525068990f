//! Seed derivation.
//!
//! Every random stream in an experiment is derived from one experiment seed
//! and a `(component, step, agent)` triple by chained SplitMix64 mixing, so
//! runs of different strategies draw identical planner randomness.

/// Stream families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    Prioritization = 1,
    Planner = 2,
    UnconstrainedPlanner = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, component: Component, step: u64, agent: u64) -> u64 {
    let mut h = splitmix64(seed);
    for word in [component as u64, step, agent] {
        h = splitmix64(h ^ word);
    }
    h
}
