//! Vertex colorings of coupling graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CouplingGraph;

/// Largest graph accepted by the exact chromatic-number search.
pub const CHROMATIC_MAX_VERTICES: usize = 12;

/// Proper vertex coloring with colors `1..=n_colors`, all of them used.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<usize>,
    n_colors: usize,
}

impl Coloring {
    /// Validates `colors` (indexed by vertex id − 1) against `g`.
    pub fn new(g: &CouplingGraph, colors: Vec<usize>) -> Result<Self> {
        let c = Self::from_colors_unchecked(colors);
        c.validate(g)?;
        Ok(c)
    }

    fn from_colors_unchecked(colors: Vec<usize>) -> Self {
        let n_colors = colors.iter().copied().max().unwrap_or(0);
        Self { colors, n_colors }
    }

    /// Checks properness and contiguity of the color set against `g`.
    pub fn validate(&self, g: &CouplingGraph) -> Result<()> {
        if self.colors.len() != g.n_vertices() {
            return Err(Error::InvalidColoring(format!(
                "{} colors for {} vertices",
                self.colors.len(),
                g.n_vertices()
            )));
        }
        let mut used = vec![false; self.n_colors];
        for (idx, &c) in self.colors.iter().enumerate() {
            if c == 0 {
                return Err(Error::InvalidColoring(format!("vertex {} is uncolored", idx + 1)));
            }
            used[c - 1] = true;
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidColoring(format!("color {} is unused", gap + 1)));
        }
        for (a, b) in g.edges() {
            if self.colors[a - 1] == self.colors[b - 1] {
                return Err(Error::InvalidColoring(format!(
                    "adjacent vertices {a} and {b} share color {}",
                    self.colors[a - 1]
                )));
            }
        }
        Ok(())
    }

    pub fn color(&self, i: usize) -> Result<usize> {
        self.colors
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or(Error::UnknownVertex(i))
    }

    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.colors
    }

    pub fn to_map(&self) -> BTreeMap<usize, usize> {
        self.colors.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect()
    }

    /// Color classes, index `c - 1` holding the ascending ids of color `c`.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.n_colors];
        for (idx, &c) in self.colors.iter().enumerate() {
            classes[c - 1].push(idx + 1);
        }
        classes
    }
}

/// Decentralized greedy coloring.
///
/// Each round scans the uncolored vertices in ascending id order and picks
/// the one with the highest saturation degree; among equal saturation a
/// strictly larger degree wins, otherwise the earlier (smaller) id stays.
/// The picked vertex gets the smallest color absent from its neighborhood.
/// The result depends only on `g`, so every agent computing it agrees.
pub fn greedy_color(g: &CouplingGraph) -> Coloring {
    let n = g.n_vertices();
    let degree: Vec<usize> = g.vertices().map(|v| g.adj(v).len()).collect();
    let mut color = vec![0usize; n];
    let mut uncolored: Vec<usize> = g.vertices().collect();
    // scratch marker for "color c seen among neighbors", stamped per query
    let mut seen = vec![0usize; n + 2];
    let mut stamp = 0usize;

    while !uncolored.is_empty() {
        let mut s_max: isize = -1;
        let mut pick = uncolored[0];
        for &i in &uncolored {
            stamp += 1;
            let mut s = 0isize;
            for &j in g.adj(i) {
                let c = color[j - 1];
                if c != 0 && seen[c] != stamp {
                    seen[c] = stamp;
                    s += 1;
                }
            }
            if s > s_max {
                s_max = s;
                pick = i;
            }
            if s == s_max && degree[i - 1] > degree[pick - 1] {
                pick = i;
            }
        }

        stamp += 1;
        for &j in g.adj(pick) {
            let c = color[j - 1];
            if c != 0 {
                seen[c] = stamp;
            }
        }
        let chosen = (1..=n).find(|&c| seen[c] != stamp).unwrap_or(n);
        color[pick - 1] = chosen;
        uncolored.retain(|&v| v != pick);
    }
    Coloring::from_colors_unchecked(color)
}

/// Chromatic number by exact backtracking, trying `k = 1, 2, ...`.
pub fn chromatic_number(g: &CouplingGraph) -> Result<usize> {
    let n = g.n_vertices();
    if n > CHROMATIC_MAX_VERTICES {
        return Err(Error::Budget {
            n,
            max: CHROMATIC_MAX_VERTICES,
        });
    }
    // color high-degree vertices first to prune early
    let mut order: Vec<usize> = g.vertices().collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.adj(v).len()));
    let mut color = vec![0usize; n];
    for k in 1..=n {
        if extend(g, &order, 0, k, 0, &mut color) {
            return Ok(k);
        }
    }
    Ok(n)
}

fn extend(g: &CouplingGraph, order: &[usize], pos: usize, k: usize, used: usize, color: &mut [usize]) -> bool {
    let Some(&v) = order.get(pos) else {
        return true;
    };
    // symmetry breaking: a fresh color is only ever the next unused one
    for c in 1..=(used + 1).min(k) {
        if g.adj(v).iter().all(|&w| color[w - 1] != c) {
            color[v - 1] = c;
            if extend(g, order, pos + 1, k, used.max(c), color) {
                color[v - 1] = 0;
                return true;
            }
            color[v - 1] = 0;
        }
    }
    false
}

/// Renumbers the color classes so that classes holding high-degree
/// vertices come first.
///
/// Sort keys: maximum degree in the class (descending), degree sum
/// (descending), original color (ascending). Classes themselves are kept.
pub fn reorder_levels(c: &Coloring, g: &CouplingGraph) -> Coloring {
    let classes = c.classes();
    let mut keyed: Vec<(usize, usize, usize)> = classes
        .iter()
        .enumerate()
        .map(|(idx, members)| {
            let degrees = members.iter().map(|&v| g.adj(v).len());
            let max = degrees.clone().max().unwrap_or(0);
            let sum = degrees.sum();
            (max, sum, idx + 1)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

    let mut renumber = vec![0usize; c.n_colors + 1];
    for (new_idx, &(_, _, old)) in keyed.iter().enumerate() {
        renumber[old] = new_idx + 1;
    }
    Coloring::from_colors_unchecked(c.colors.iter().map(|&old| renumber[old]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn map(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
        pairs.iter().copied().collect()
    }

    /// Exhaustive k-colorability check over all k^n assignments.
    fn colorable_brute(g: &CouplingGraph, k: usize) -> bool {
        let n = g.n_vertices();
        let total = k.pow(n as u32);
        let edges = g.edges();
        (0..total).any(|mut code| {
            let mut col = vec![0; n];
            for c in col.iter_mut() {
                *c = code % k;
                code /= k;
            }
            edges.iter().all(|&(a, b)| col[a - 1] != col[b - 1])
        })
    }

    #[test]
    fn greedy_edgeless_uses_one_color() {
        for n in 1..=6 {
            let c = greedy_color(&CouplingGraph::edgeless(n).unwrap());
            assert_eq!(c.n_colors(), 1);
            assert!(c.as_slice().iter().all(|&x| x == 1));
        }
    }

    #[test]
    fn greedy_triangle() {
        let c = greedy_color(&CouplingGraph::complete(3).unwrap());
        assert_eq!(c.to_map(), map(&[(1, 1), (2, 2), (3, 3)]));
    }

    #[test]
    fn greedy_five_cycle_trace() {
        let g = CouplingGraph::cycle(5).unwrap();
        let c = greedy_color(&g);
        assert_eq!(c.to_map(), map(&[(1, 1), (2, 2), (3, 1), (4, 2), (5, 3)]));
        assert_eq!(c.n_colors(), 3);
        assert!(!colorable_brute(&g, 2));
        assert!(colorable_brute(&g, 3));
    }

    #[test]
    fn greedy_prefers_larger_degree_on_saturation_tie() {
        // star centered at 4: vertex 4 has the largest degree and goes first
        let g = CouplingGraph::new(4, &[(4, 1), (4, 2), (4, 3)]).unwrap();
        let c = greedy_color(&g);
        assert_eq!(c.to_map(), map(&[(1, 2), (2, 2), (3, 2), (4, 1)]));
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(chromatic_number(&CouplingGraph::complete(4).unwrap()), Ok(4));
        assert_eq!(chromatic_number(&CouplingGraph::cycle(5).unwrap()), Ok(3));
        assert_eq!(chromatic_number(&CouplingGraph::edgeless(3).unwrap()), Ok(1));
        // a tree: spider with legs of different lengths
        let tree = CouplingGraph::new(7, &[(1, 2), (2, 3), (1, 4), (4, 5), (5, 6), (1, 7)]).unwrap();
        assert_eq!(chromatic_number(&tree), Ok(2));
        assert_eq!(
            chromatic_number(&CouplingGraph::edgeless(13).unwrap()),
            Err(Error::Budget { n: 13, max: 12 })
        );
    }

    #[test]
    fn validation_rejects_bad_colorings() {
        let p3 = CouplingGraph::path(3).unwrap();
        assert!(Coloring::new(&p3, vec![1, 2, 1]).is_ok());
        assert!(Coloring::new(&p3, vec![1, 1, 2]).is_err());
        assert!(Coloring::new(&p3, vec![1, 3, 1]).is_err());
        assert!(Coloring::new(&p3, vec![0, 1, 2]).is_err());
        assert!(Coloring::new(&p3, vec![1, 2]).is_err());
    }

    #[test]
    fn reorder_examples() {
        // star: center 5 in class 2, leaves in class 1
        let star = CouplingGraph::new(5, &[(5, 1), (5, 2), (5, 3), (5, 4)]).unwrap();
        let c = Coloring::new(&star, vec![1, 1, 1, 1, 2]).unwrap();
        let r = reorder_levels(&c, &star);
        assert_eq!(r.color(5), Ok(1));
        assert_eq!(r.classes(), vec![vec![5], vec![1, 2, 3, 4]]);

        let k3 = CouplingGraph::complete(3).unwrap();
        let c = greedy_color(&k3);
        assert_eq!(reorder_levels(&c, &k3), c);

        // perfect matching: identical degree profile per class
        let m = CouplingGraph::new(4, &[(1, 2), (3, 4)]).unwrap();
        let c = Coloring::new(&m, vec![1, 2, 1, 2]).unwrap();
        assert_eq!(reorder_levels(&c, &m), c);
    }

    proptest! {
        #[test]
        fn greedy_is_valid_and_bounded(n in 1usize..=64, p in 0.0f64..1.0, seed in any::<u64>()) {
            let g = CouplingGraph::random(n, p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let c = greedy_color(&g);
            prop_assert!(c.validate(&g).is_ok());
            prop_assert!(c.n_colors() <= g.max_degree() + 1);
            prop_assert_eq!(&greedy_color(&g), &c);

            let r = reorder_levels(&c, &g);
            prop_assert!(r.validate(&g).is_ok());
            prop_assert_eq!(r.n_colors(), c.n_colors());
        }

        #[test]
        fn chromatic_matches_brute_force(n in 1usize..=7, p in 0.0f64..1.0, seed in any::<u64>()) {
            let g = CouplingGraph::random(n, p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let chi = chromatic_number(&g).unwrap();
            prop_assert!(colorable_brute(&g, chi));
            if chi > 1 {
                prop_assert!(!colorable_brute(&g, chi - 1));
            }
            prop_assert!(chi <= greedy_color(&g).n_colors());
        }
    }
}
