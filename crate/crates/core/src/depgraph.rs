//! Undirected dependency graphs and the pairwise test cache behind them.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::binning::DiscretizedFeature;
use crate::dataset::VariableId;
use crate::error::{Error, Result};
use crate::stats::{IndependenceTest, IndependenceVerdict};

/// Simple undirected graph over variable ids, stored as neighbor sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<VariableId, BTreeSet<VariableId>>,
}

impl Graph {
    pub fn with_nodes(nodes: impl IntoIterator<Item = VariableId>) -> Self {
        Graph {
            adj: nodes.into_iter().map(|v| (v, BTreeSet::new())).collect(),
        }
    }

    pub fn from_edges(
        nodes: impl IntoIterator<Item = VariableId>,
        edges: impl IntoIterator<Item = (VariableId, VariableId)>,
    ) -> Self {
        let mut g = Self::with_nodes(nodes);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Adds an edge between two existing nodes. Self-loops are ignored.
    pub fn add_edge(&mut self, a: VariableId, b: VariableId) {
        if a == b {
            return;
        }
        assert!(self.adj.contains_key(&a) && self.adj.contains_key(&b));
        self.adj.get_mut(&a).unwrap().insert(b);
        self.adj.get_mut(&b).unwrap().insert(a);
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = VariableId> + '_ {
        self.adj.keys().copied()
    }

    pub fn node_set(&self) -> BTreeSet<VariableId> {
        self.adj.keys().copied().collect()
    }

    pub fn contains(&self, v: VariableId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn min_node(&self) -> Option<VariableId> {
        self.adj.keys().next().copied()
    }

    pub fn neighbors(&self, v: VariableId) -> &BTreeSet<VariableId> {
        &self.adj[&v]
    }

    pub fn degree(&self, v: VariableId) -> usize {
        self.adj[&v].len()
    }

    pub fn has_edge(&self, a: VariableId, b: VariableId) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> Vec<(VariableId, VariableId)> {
        self.adj
            .iter()
            .flat_map(|(&a, n)| n.range(a..).map(move |&b| (a, b)))
            .collect()
    }

    /// Subgraph induced by `members` (ids outside the graph are ignored).
    pub fn induced<'a>(&self, members: impl IntoIterator<Item = &'a VariableId>) -> Graph {
        let keep: BTreeSet<VariableId> = members
            .into_iter()
            .copied()
            .filter(|v| self.contains(*v))
            .collect();
        Graph {
            adj: keep
                .iter()
                .map(|&v| {
                    let n = self.adj[&v].intersection(&keep).copied().collect();
                    (v, n)
                })
                .collect(),
        }
    }

    /// Graph with `removed` nodes deleted.
    pub fn without(&self, removed: &BTreeSet<VariableId>) -> Graph {
        Graph {
            adj: self
                .adj
                .iter()
                .filter(|(v, _)| !removed.contains(v))
                .map(|(&v, n)| (v, n.difference(removed).copied().collect()))
                .collect(),
        }
    }

    /// True iff every pair of distinct nodes is adjacent.
    pub fn is_complete(&self) -> bool {
        let k = self.n_nodes();
        self.adj.values().all(|n| n.len() + 1 == k)
    }

    /// Maximal connected induced subgraphs, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Graph> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut members = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[&v] {
                    if seen.insert(w) {
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            out.push(self.induced(&members));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }
}

pub fn is_complete(g: &Graph) -> bool {
    g.is_complete()
}

pub fn connected_components(g: &Graph) -> Vec<Graph> {
    g.connected_components()
}

fn pair_key(a: VariableId, b: VariableId) -> (VariableId, VariableId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Verdicts of every pair tested so far, keyed by unordered pair.
#[derive(Debug, Clone, Default)]
pub struct VerdictCache {
    verdicts: BTreeMap<(VariableId, VariableId), IndependenceVerdict>,
}

impl VerdictCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, a: VariableId, b: VariableId) -> Option<&IndependenceVerdict> {
        self.verdicts.get(&pair_key(a, b))
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(VariableId, VariableId), &IndependenceVerdict)> {
        self.verdicts.iter()
    }

    /// Returns the verdict for `(a, b)`, running `tester` only if the pair is
    /// not cached yet.
    pub fn verdict<T: IndependenceTest + ?Sized>(
        &mut self,
        features: &[DiscretizedFeature],
        tester: &T,
        a: VariableId,
        b: VariableId,
    ) -> Result<IndependenceVerdict> {
        let key = pair_key(a, b);
        if let Some(v) = self.verdicts.get(&key) {
            return Ok(*v);
        }
        let v = tester.test(&features[a.row()], &features[b.row()])?;
        self.verdicts.insert(key, v);
        Ok(v)
    }

    /// Tests all uncached pairs concurrently and inserts them.
    pub(crate) fn fill<T: IndependenceTest + ?Sized>(
        &mut self,
        features: &[DiscretizedFeature],
        tester: &T,
        pairs: Vec<(VariableId, VariableId)>,
    ) -> Result<()> {
        let missing: BTreeSet<_> = pairs
            .into_iter()
            .map(|(a, b)| pair_key(a, b))
            .filter(|p| !self.verdicts.contains_key(p))
            .collect();
        let missing: Vec<_> = missing.into_iter().collect();
        let results: Vec<Result<IndependenceVerdict>> = missing
            .par_iter()
            .map(|&(a, b)| tester.test(&features[a.row()], &features[b.row()]))
            .collect();
        for (pair, v) in missing.into_iter().zip(results) {
            self.verdicts.insert(pair, v?);
        }
        Ok(())
    }
}

/// Dependency graph over a node subset together with the verdicts of every
/// pair inside it. Edge iff the pair is not independent.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    graph: Graph,
    tests: BTreeMap<(VariableId, VariableId), IndependenceVerdict>,
}

impl DependencyGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn verdict(&self, a: VariableId, b: VariableId) -> Option<&IndependenceVerdict> {
        self.tests.get(&pair_key(a, b))
    }

    pub fn tests(&self) -> &BTreeMap<(VariableId, VariableId), IndependenceVerdict> {
        &self.tests
    }
}

/// Builds the dependency graph over `nodes`. `features` is indexed by row
/// (`VariableId::row`). Pairs already in `cache` are not re-tested.
pub fn build_graph<T: IndependenceTest + ?Sized>(
    features: &[DiscretizedFeature],
    tester: &T,
    nodes: &[VariableId],
    cache: &mut VerdictCache,
) -> Result<DependencyGraph> {
    let nodes: BTreeSet<VariableId> = nodes.iter().copied().collect();
    for &v in &nodes {
        let f = features
            .get(v.row())
            .ok_or_else(|| Error::argument(format!("unknown variable {v}")))?;
        if f.is_constant() {
            return Err(Error::ConstantNode(v));
        }
    }
    let list: Vec<VariableId> = nodes.iter().copied().collect();
    let pairs: Vec<_> = list
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| list[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    cache.fill(features, tester, pairs.clone())?;

    let mut graph = Graph::with_nodes(list.iter().copied());
    let mut tests = BTreeMap::new();
    for (a, b) in pairs {
        let v = *cache.get(a, b).expect("filled above");
        if !v.independent {
            graph.add_edge(a, b);
        }
        tests.insert((a, b), v);
    }
    Ok(DependencyGraph { graph, tests })
}
