//! Undirected and directed coupling graphs.
//!
//! Vertex ids are dense and 1-based: a graph with `n` vertices owns ids
//! `1..=n`. Agents and vertices are used interchangeably.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected interaction graph between agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl CouplingGraph {
    /// Builds a graph on `n` vertices from unordered pairs.
    ///
    /// Self-loops, duplicate edges (in either orientation) and out-of-range
    /// endpoints are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            check_id(n, a)?;
            check_id(n, b)?;
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop on vertex {a}")));
            }
            if !adjacency[a - 1].insert(b) {
                return Err(Error::InvalidInput(format!("duplicate edge {{{a}, {b}}}")));
            }
            adjacency[b - 1].insert(a);
        }
        Ok(Self { adjacency })
    }

    pub fn edgeless(n: usize) -> Result<Self> {
        Self::new(n, &[])
    }

    /// Path `1 - 2 - ... - n`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Self::new(n, &edges)
    }

    /// Cycle `1 - 2 - ... - n - 1`, `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("a cycle needs at least 3 vertices".into()));
        }
        let mut edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        edges.push((n, 1));
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                edges.push((i, j));
            }
        }
        Self::new(n, &edges)
    }

    /// Erdős–Rényi `G(n, p)`: each unordered pair is an edge with probability `p`.
    pub fn random<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if rng.gen_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        Self::new(n, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        1..=self.adjacency.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        (1..=self.adjacency.len()).contains(&i)
    }

    pub fn neighbors(&self, i: usize) -> Result<&BTreeSet<usize>> {
        check_id(self.n_vertices(), i)?;
        Ok(&self.adjacency[i - 1])
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        self.neighbors(i).map(BTreeSet::len)
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.contains(a) && self.adjacency[a - 1].contains(&b)
    }

    /// Edges as `(a, b)` with `a < b`, in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for (idx, nbrs) in self.adjacency.iter().enumerate() {
            let a = idx + 1;
            out.extend(nbrs.range(a + 1..).map(|&b| (a, b)));
        }
        out
    }

    // Infallible accessor for ids already known to be in range.
    pub(crate) fn adj(&self, i: usize) -> &BTreeSet<usize> {
        &self.adjacency[i - 1]
    }
}

/// Directed graph over the vertices of a coupling graph.
///
/// Construction does not require acyclicity so that cyclic inputs can be
/// detected; every analytic that needs a DAG checks it and reports
/// [`Error::Cyclic`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingDag {
    successors: Vec<BTreeSet<usize>>,
    predecessors: Vec<BTreeSet<usize>>,
}

impl CouplingDag {
    pub fn new(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        let mut successors = vec![BTreeSet::new(); n];
        let mut predecessors = vec![BTreeSet::new(); n];
        for &(from, to) in arcs {
            check_id(n, from)?;
            check_id(n, to)?;
            if from == to {
                return Err(Error::InvalidInput(format!("self-loop on vertex {from}")));
            }
            if !successors[from - 1].insert(to) {
                return Err(Error::InvalidInput(format!("duplicate arc {from}->{to}")));
            }
            predecessors[to - 1].insert(from);
        }
        Ok(Self {
            successors,
            predecessors,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.successors.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.successors.iter().map(BTreeSet::len).sum()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_arcs());
        for (idx, succ) in self.successors.iter().enumerate() {
            out.extend(succ.iter().map(|&to| (idx + 1, to)));
        }
        out
    }

    pub fn successors(&self, i: usize) -> Result<&BTreeSet<usize>> {
        check_id(self.n_vertices(), i)?;
        Ok(&self.successors[i - 1])
    }

    pub fn predecessors(&self, i: usize) -> Result<&BTreeSet<usize>> {
        check_id(self.n_vertices(), i)?;
        Ok(&self.predecessors[i - 1])
    }

    pub fn in_degree(&self, i: usize) -> Result<usize> {
        self.predecessors(i).map(BTreeSet::len)
    }

    pub fn out_degree(&self, i: usize) -> Result<usize> {
        self.successors(i).map(BTreeSet::len)
    }

    /// True when the underlying unordered arcs are exactly the edges of `g`.
    pub fn is_orientation_of(&self, g: &CouplingGraph) -> bool {
        if self.n_vertices() != g.n_vertices() || self.n_arcs() != g.n_edges() {
            return false;
        }
        self.arcs()
            .iter()
            .all(|&(a, b)| g.has_edge(a, b) && !self.successors[b - 1].contains(&a))
    }

    /// Kahn's algorithm; picks the smallest ready id first so the order is
    /// deterministic. `None` when a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n_vertices();
        let mut in_deg: Vec<usize> = self.predecessors.iter().map(BTreeSet::len).collect();
        let mut ready: BTreeSet<usize> = (1..=n).filter(|&v| in_deg[v - 1] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &self.successors[v - 1] {
                in_deg[w - 1] -= 1;
                if in_deg[w - 1] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    fn require_order(&self) -> Result<Vec<usize>> {
        self.topological_order().ok_or(Error::Cyclic)
    }

    /// Sources (no incoming arcs) and sinks (no outgoing arcs).
    pub fn sources_sinks(&self) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
        self.require_order()?;
        let sources = (1..=self.n_vertices())
            .filter(|&v| self.predecessors[v - 1].is_empty())
            .collect();
        let sinks = (1..=self.n_vertices())
            .filter(|&v| self.successors[v - 1].is_empty())
            .collect();
        Ok((sources, sinks))
    }

    /// Computation level of every vertex: sources sit on level 1 and every
    /// other vertex one above its highest predecessor.
    pub fn compute_levels(&self) -> Result<LevelAssignment> {
        let order = self.require_order()?;
        let mut level = vec![0usize; self.n_vertices()];
        for v in order {
            level[v - 1] = 1 + self.predecessors[v - 1]
                .iter()
                .map(|&p| level[p - 1])
                .max()
                .unwrap_or(0);
        }
        let n_levels = level.iter().copied().max().unwrap_or(1);
        Ok(LevelAssignment { level, n_levels })
    }

    /// Heaviest source-to-sink path under per-vertex weights.
    ///
    /// `weights[i - 1]` is the weight of vertex `i`. Among equally heavy paths
    /// the lexicographically smallest id sequence wins.
    pub fn longest_weighted_path(&self, weights: &[Duration]) -> Result<(Vec<usize>, Duration)> {
        let n = self.n_vertices();
        if weights.len() != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} vertex weights, got {}",
                weights.len()
            )));
        }
        let order = self.require_order()?;
        // best[v]: heaviest weight of a path from v to a sink, and the next hop.
        let mut best: Vec<(Duration, Option<usize>)> = vec![(Duration::ZERO, None); n];
        for &v in order.iter().rev() {
            let mut tail = Duration::ZERO;
            let mut next = None;
            // ascending ids: the first strict maximum is the smallest id
            for &w in &self.successors[v - 1] {
                let cand = best[w - 1].0;
                if next.is_none() || cand > tail {
                    tail = cand;
                    next = Some(w);
                }
            }
            best[v - 1] = (weights[v - 1] + tail, next);
        }
        let mut start = None;
        let mut total = Duration::ZERO;
        for v in 1..=n {
            if self.predecessors[v - 1].is_empty() && (start.is_none() || best[v - 1].0 > total) {
                start = Some(v);
                total = best[v - 1].0;
            }
        }
        let mut path = Vec::new();
        let mut cursor = start;
        while let Some(v) = cursor {
            path.push(v);
            cursor = best[v - 1].1;
        }
        Ok((path, total))
    }
}

/// Level of every vertex in a coupling DAG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelAssignment {
    level: Vec<usize>,
    n_levels: usize,
}

impl LevelAssignment {
    pub fn level(&self, i: usize) -> Result<usize> {
        check_id(self.level.len(), i)?;
        Ok(self.level[i - 1])
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.level
    }

    pub fn to_map(&self) -> BTreeMap<usize, usize> {
        self.level.iter().enumerate().map(|(i, &l)| (i + 1, l)).collect()
    }

    /// Vertices grouped by level, levels ascending, ids ascending within a level.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_levels];
        for (idx, &l) in self.level.iter().enumerate() {
            groups[l - 1].push(idx + 1);
        }
        groups
    }
}

/// Serialized form of a graph file: `n` plus either `edges` (undirected) or
/// `arcs` (directed), all ids 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<[usize; 2]>>,
}

impl GraphFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("graph file: {e}")))
    }

    pub fn from_graph(g: &CouplingGraph) -> Self {
        Self {
            n: g.n_vertices(),
            edges: Some(g.edges().into_iter().map(|(a, b)| [a, b]).collect()),
            arcs: None,
        }
    }

    pub fn from_dag(d: &CouplingDag) -> Self {
        Self {
            n: d.n_vertices(),
            edges: None,
            arcs: Some(d.arcs().into_iter().map(|(a, b)| [a, b]).collect()),
        }
    }

    pub fn to_graph(&self) -> Result<CouplingGraph> {
        match (&self.edges, &self.arcs) {
            (Some(edges), None) => {
                let pairs: Vec<_> = edges.iter().map(|e| (e[0], e[1])).collect();
                CouplingGraph::new(self.n, &pairs)
            }
            (None, None) => CouplingGraph::edgeless(self.n),
            _ => Err(Error::InvalidInput("expected an undirected graph with `edges`".into())),
        }
    }

    pub fn to_dag(&self) -> Result<CouplingDag> {
        match (&self.edges, &self.arcs) {
            (None, Some(arcs)) => {
                let pairs: Vec<_> = arcs.iter().map(|e| (e[0], e[1])).collect();
                CouplingDag::new(self.n, &pairs)
            }
            (None, None) => CouplingDag::new(self.n, &[]),
            _ => Err(Error::InvalidInput("expected a directed graph with `arcs`".into())),
        }
    }
}

fn check_id(n: usize, i: usize) -> Result<()> {
    if (1..=n).contains(&i) {
        Ok(())
    } else {
        Err(Error::UnknownVertex(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ms(v: u64) -> Duration {
        Duration::from_millis(v)
    }

    #[test]
    fn degree_examples() {
        let k3 = CouplingGraph::complete(3).unwrap();
        assert!(k3.vertices().all(|v| k3.degree(v).unwrap() == 2));
        let lone = CouplingGraph::edgeless(1).unwrap();
        assert_eq!(lone.degree(1).unwrap(), 0);
        let p3 = CouplingGraph::path(3).unwrap();
        assert_eq!(p3.degree(2).unwrap(), 2);
        assert_eq!(p3.degree(4), Err(Error::UnknownVertex(4)));
        assert_eq!(p3.degree(0), Err(Error::UnknownVertex(0)));
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(CouplingGraph::new(0, &[]).is_err());
        assert!(CouplingGraph::new(2, &[(1, 1)]).is_err());
        assert!(CouplingGraph::new(2, &[(1, 2), (2, 1)]).is_err());
        assert_eq!(CouplingGraph::new(2, &[(1, 3)]), Err(Error::UnknownVertex(3)));
        assert!(CouplingDag::new(2, &[(1, 2), (1, 2)]).is_err());
    }

    #[test]
    fn sources_and_sinks() {
        let single = CouplingDag::new(1, &[]).unwrap();
        let one: BTreeSet<_> = [1].into();
        assert_eq!(single.sources_sinks().unwrap(), (one.clone(), one));

        let chain = CouplingDag::new(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(chain.sources_sinks().unwrap(), ([1].into(), [3].into()));

        let join = CouplingDag::new(3, &[(1, 3), (2, 3)]).unwrap();
        assert_eq!(join.sources_sinks().unwrap(), ([1, 2].into(), [3].into()));

        let cyclic = CouplingDag::new(2, &[(1, 2), (2, 1)]).unwrap();
        assert_eq!(cyclic.sources_sinks(), Err(Error::Cyclic));
    }

    #[test]
    fn acyclicity() {
        assert!(CouplingDag::new(3, &[(1, 2), (2, 3)]).unwrap().is_acyclic());
        assert!(!CouplingDag::new(2, &[(1, 2), (2, 1)]).unwrap().is_acyclic());
        assert!(CouplingDag::new(4, &[]).unwrap().is_acyclic());
        assert!(!CouplingDag::new(3, &[(1, 2), (2, 3), (3, 1)]).unwrap().is_acyclic());
    }

    #[test]
    fn level_examples() {
        let chain = CouplingDag::new(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(chain.compute_levels().unwrap().n_levels(), 4);

        let star = CouplingDag::new(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(star.compute_levels().unwrap().n_levels(), 2);

        // longest path 3 -> 4 -> 2 has three vertices
        let d = CouplingDag::new(4, &[(1, 2), (3, 2), (3, 4), (4, 2)]).unwrap();
        let levels = d.compute_levels().unwrap();
        assert_eq!(levels.to_map(), BTreeMap::from([(1, 1), (2, 3), (3, 1), (4, 2)]));
        assert_eq!(levels.n_levels(), 3);
        assert_eq!(levels.groups(), vec![vec![1, 3], vec![4], vec![2]]);

        let cyclic = CouplingDag::new(2, &[(1, 2), (2, 1)]).unwrap();
        assert_eq!(cyclic.compute_levels(), Err(Error::Cyclic));
    }

    #[test]
    fn weighted_path_examples() {
        let chain = CouplingDag::new(3, &[(1, 2), (2, 3)]).unwrap();
        let (path, total) = chain.longest_weighted_path(&[ms(50), ms(50), ms(50)]).unwrap();
        assert_eq!(path, vec![1, 2, 3]);
        assert_eq!(total, ms(150));

        let join = CouplingDag::new(3, &[(1, 3), (2, 3)]).unwrap();
        let (path, total) = join.longest_weighted_path(&[ms(10), ms(90), ms(10)]).unwrap();
        assert_eq!(path, vec![2, 3]);
        assert_eq!(total, ms(100));

        assert!(matches!(
            join.longest_weighted_path(&[ms(1)]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn weighted_path_ties_pick_smallest_ids() {
        // two equally heavy routes 1->3->4 and 2->3->4 / 1->2... prefer [1, ...]
        let d = CouplingDag::new(4, &[(1, 3), (2, 3), (3, 4), (1, 4)]).unwrap();
        let (path, _) = d.longest_weighted_path(&[ms(1); 4]).unwrap();
        assert_eq!(path, vec![1, 3, 4]);
        let d = CouplingDag::new(4, &[(2, 4), (2, 3), (1, 4)]).unwrap();
        let (path, total) = d.longest_weighted_path(&[ms(5); 4]).unwrap();
        assert_eq!(path, vec![1, 4]);
        assert_eq!(total, ms(10));
    }

    #[test]
    fn graph_file_round_trip() {
        let g = CouplingGraph::cycle(5).unwrap();
        let text = serde_json::to_string(&GraphFile::from_graph(&g)).unwrap();
        assert_eq!(GraphFile::parse(&text).unwrap().to_graph().unwrap(), g);
        let d = GraphFile::parse(r#"{"n": 3, "arcs": [[1, 2], [3, 2]]}"#).unwrap();
        assert_eq!(d.to_dag().unwrap().arcs(), vec![(1, 2), (3, 2)]);
        assert!(d.to_graph().is_err());
        assert!(GraphFile::parse("{\"edges\": []}").is_err());
    }

    /// Vertex count of the longest directed path, by exhaustive DFS.
    fn brute_longest_path(d: &CouplingDag) -> usize {
        fn dfs(d: &CouplingDag, v: usize) -> usize {
            1 + d.successors(v).unwrap().iter().map(|&w| dfs(d, w)).max().unwrap_or(0)
        }
        (1..=d.n_vertices()).map(|v| dfs(d, v)).max().unwrap()
    }

    fn random_dag(n: usize, p: f64, seed: u64) -> CouplingDag {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CouplingGraph::random(n, p, &mut rng).unwrap();
        // orient along a random permutation
        let mut rank: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            rank.swap(i, rng.gen_range(0..=i));
        }
        let arcs: Vec<_> = g
            .edges()
            .into_iter()
            .map(|(a, b)| if rank[a - 1] < rank[b - 1] { (a, b) } else { (b, a) })
            .collect();
        CouplingDag::new(n, &arcs).unwrap()
    }

    proptest! {
        #[test]
        fn levels_match_brute_force(n in 1usize..=8, p in 0.0f64..1.0, seed in any::<u64>()) {
            let d = random_dag(n, p, seed);
            let levels = d.compute_levels().unwrap();
            for (a, b) in d.arcs() {
                prop_assert!(levels.level(a).unwrap() < levels.level(b).unwrap());
            }
            for v in 1..=n {
                let is_source = d.in_degree(v).unwrap() == 0;
                prop_assert_eq!(levels.level(v).unwrap() == 1, is_source);
            }
            prop_assert_eq!(levels.n_levels(), brute_longest_path(&d));
        }

        #[test]
        fn unit_weights_give_level_count(n in 1usize..=10, p in 0.0f64..1.0, seed in any::<u64>()) {
            let d = random_dag(n, p, seed);
            let (path, total) = d.longest_weighted_path(&vec![ms(1); n]).unwrap();
            let n_levels = d.compute_levels().unwrap().n_levels();
            prop_assert_eq!(total, ms(n_levels as u64));
            prop_assert_eq!(path.len(), n_levels);
            let (sources, sinks) = d.sources_sinks().unwrap();
            prop_assert!(sources.contains(&path[0]));
            prop_assert!(sinks.contains(path.last().unwrap()));
        }
    }
}
