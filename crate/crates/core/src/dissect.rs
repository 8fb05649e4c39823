//! Minimum vertex cuts and iterative graph dissection.
//!
//! A graph is repeatedly split by removing vertex cuts of minimum
//! cardinality until only complete subgraphs remain. The surviving complete
//! subgraphs hold the features that other features are functions of.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::VariableId;
use crate::depgraph::Graph;
use crate::error::{Error, Result};
use crate::flow::local_vertex_cut;

/// Largest graph the brute-force oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 14;

/// Tie-breaking between equally small cuts: node priorities (lower rank is
/// preferred as pivot and candidate terminal) and which extremal minimum
/// cut of a terminal pair is taken.
#[derive(Debug, Clone, Default)]
pub struct TieBreak {
    rank: BTreeMap<VariableId, u64>,
    sink_side: bool,
}

impl TieBreak {
    /// Rank equals id.
    pub fn by_id() -> Self {
        Self::default()
    }

    /// Random node priorities derived from `seed`.
    pub fn shuffled(nodes: impl IntoIterator<Item = VariableId>, seed: u64) -> Self {
        let mut nodes: Vec<VariableId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        nodes.shuffle(&mut rng);
        TieBreak {
            sink_side: rng.random_bool(0.5),
            rank: nodes
                .into_iter()
                .enumerate()
                .map(|(r, v)| (v, r as u64))
                .collect(),
        }
    }

    fn rank(&self, v: VariableId) -> (u64, VariableId) {
        (self.rank.get(&v).copied().unwrap_or(v.0 as u64), v)
    }
}

/// Minimum-cardinality vertex cut of `g`, ties broken by node id.
///
/// Returns an empty set for disconnected graphs.
pub fn min_node_cut(g: &Graph) -> Result<BTreeSet<VariableId>> {
    min_node_cut_with(g, &TieBreak::by_id())
}

/// Minimum vertex cut via local cuts from one minimum-degree node `v`: to
/// each non-neighbor of `v`, and between each non-adjacent pair of
/// neighbors of `v`. Some minimum cut either avoids `v` or separates two of
/// its neighbors, so the smallest local cut is a global one.
pub fn min_node_cut_with(g: &Graph, ties: &TieBreak) -> Result<BTreeSet<VariableId>> {
    if g.n_nodes() < 2 {
        return Err(Error::argument(format!(
            "a vertex cut needs at least 2 nodes, graph has {}",
            g.n_nodes()
        )));
    }
    if g.is_complete() {
        return Err(Error::NoCutExists);
    }
    if !g.is_connected() {
        return Ok(BTreeSet::new());
    }

    let mut order: Vec<VariableId> = g.nodes().collect();
    order.sort_by_key(|&v| ties.rank(v));
    let local: BTreeMap<VariableId, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| g.neighbors(v).iter().map(|w| local[w]).sorted().collect())
        .collect();

    let v = (0..order.len())
        .min_by_key(|&i| (adj[i].len(), i))
        .expect("non-empty");
    let adjacent = |a: usize, b: usize| adj[a].binary_search(&b).is_ok();

    let mut candidates: Vec<(usize, usize)> = (0..order.len())
        .filter(|&w| w != v && !adjacent(v, w))
        .map(|w| (v, w))
        .collect();
    for (i, &x) in adj[v].iter().enumerate() {
        for &y in &adj[v][i + 1..] {
            if !adjacent(x, y) {
                candidates.push((x, y));
            }
        }
    }

    let mut best: Option<Vec<usize>> = None;
    for (s, t) in candidates {
        let limit = best.as_ref().map_or(u32::MAX, |b| b.len() as u32);
        if let Some(cut) = local_vertex_cut(&adj, s, t, limit, ties.sink_side) {
            let done = cut.len() == 1;
            best = Some(cut);
            if done {
                break;
            }
        }
    }
    let best = best.expect("incomplete connected graph has a non-adjacent pair");
    Ok(best.into_iter().map(|i| order[i]).collect())
}

/// Exhaustive oracle: the first disconnecting set in order of increasing
/// size, then lexicographic node order.
pub fn brute_force_min_node_cut(g: &Graph) -> Result<BTreeSet<VariableId>> {
    if g.n_nodes() > BRUTE_FORCE_LIMIT {
        return Err(Error::argument(format!(
            "brute force is limited to {BRUTE_FORCE_LIMIT} nodes, graph has {}",
            g.n_nodes()
        )));
    }
    if g.n_nodes() < 2 {
        return Err(Error::argument("a vertex cut needs at least 2 nodes"));
    }
    if g.is_complete() {
        return Err(Error::NoCutExists);
    }
    let nodes: Vec<VariableId> = g.nodes().collect();
    for size in 0..=nodes.len() - 2 {
        for subset in nodes.iter().copied().combinations(size) {
            let removed: BTreeSet<VariableId> = subset.into_iter().collect();
            if g.without(&removed).connected_components().len() >= 2 {
                return Ok(removed);
            }
        }
    }
    unreachable!("removing all but two non-adjacent nodes disconnects the graph")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    /// 1-based step within one dissection.
    pub step: usize,
    pub nodes: BTreeSet<VariableId>,
    pub from_component: BTreeSet<VariableId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DissectionResult {
    /// Disjoint complete subgraphs, ordered by smallest member.
    pub complete_subgraphs: Vec<BTreeSet<VariableId>>,
    pub removals: Vec<Removal>,
}

impl DissectionResult {
    pub fn removed_nodes(&self) -> BTreeSet<VariableId> {
        self.removals
            .iter()
            .flat_map(|r| r.nodes.iter().copied())
            .collect()
    }

    pub fn surviving_nodes(&self) -> BTreeSet<VariableId> {
        self.complete_subgraphs.iter().flatten().copied().collect()
    }

    /// Checks the structural guarantees of a dissection of `original`:
    /// complete, disjoint and mutually non-adjacent survivors that together
    /// with the removed nodes cover the graph; every cut splits its
    /// component, touches at least two of the resulting parts with each of
    /// its nodes and has no disconnecting proper subset (checked up to
    /// size 3); every removed node is reachable from a survivor.
    pub fn check_invariants(&self, original: &Graph) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for sub in &self.complete_subgraphs {
            if !original.induced(sub).is_complete() {
                return Err(format!("subgraph {sub:?} is not complete"));
            }
            for v in sub {
                if !seen.insert(*v) {
                    return Err(format!("node {v} appears twice"));
                }
            }
        }
        for r in &self.removals {
            if r.nodes.is_empty() {
                return Err(format!("step {} removed nothing", r.step));
            }
            for v in &r.nodes {
                if !seen.insert(*v) {
                    return Err(format!("node {v} appears twice"));
                }
            }
        }
        if seen != original.node_set() {
            return Err("survivors and removed nodes do not cover the graph".into());
        }
        for (i, a) in self.complete_subgraphs.iter().enumerate() {
            for b in &self.complete_subgraphs[i + 1..] {
                if let Some((x, y)) = a
                    .iter()
                    .cartesian_product(b)
                    .find(|(x, y)| original.has_edge(**x, **y))
                {
                    return Err(format!("survivors {x} and {y} are adjacent"));
                }
            }
        }
        for r in &self.removals {
            let comp = original.induced(&r.from_component);
            let parts = comp.without(&r.nodes).connected_components();
            if parts.len() < 2 {
                return Err(format!("step {} does not split its component", r.step));
            }
            for &s in &r.nodes {
                let touched = parts
                    .iter()
                    .filter(|p| comp.neighbors(s).iter().any(|w| p.contains(*w)))
                    .count();
                if touched < 2 {
                    return Err(format!("cut node {s} touches {touched} part(s)"));
                }
            }
            if r.nodes.len() <= 3 {
                let nodes: Vec<_> = r.nodes.iter().copied().collect();
                for size in 0..nodes.len() {
                    for subset in nodes.iter().copied().combinations(size) {
                        let subset: BTreeSet<_> = subset.into_iter().collect();
                        if !comp.without(&subset).is_connected() {
                            return Err(format!(
                                "step {}: proper subset {subset:?} already disconnects",
                                r.step
                            ));
                        }
                    }
                }
            }
        }
        let survivors = self.surviving_nodes();
        for comp in original.connected_components() {
            let has_survivor = comp.nodes().any(|v| survivors.contains(&v));
            if !has_survivor && !comp.is_empty() {
                return Err(format!(
                    "component starting at {:?} has no surviving node",
                    comp.min_node()
                ));
            }
        }
        Ok(())
    }
}

/// Dissects `g` with ties broken by node id.
pub fn dissect(g: &Graph) -> DissectionResult {
    dissect_with(g, &TieBreak::by_id())
}

/// Dissects `g` until only complete subgraphs remain. Incomplete components
/// are processed in order of their smallest member.
pub fn dissect_with(g: &Graph, ties: &TieBreak) -> DissectionResult {
    let mut complete = Vec::new();
    let mut pending: BTreeMap<VariableId, Graph> = BTreeMap::new();
    let sort = |comp: Graph, complete: &mut Vec<Graph>, pending: &mut BTreeMap<_, _>| {
        if comp.is_complete() {
            complete.push(comp);
        } else {
            pending.insert(comp.min_node().expect("components are non-empty"), comp);
        }
    };
    for comp in g.connected_components() {
        sort(comp, &mut complete, &mut pending);
    }

    let mut removals = Vec::new();
    while let Some((_, comp)) = pending.pop_first() {
        let cut = min_node_cut_with(&comp, ties).expect("pending components are incomplete");
        debug_assert!(!cut.is_empty(), "pending components are connected");
        for part in comp.without(&cut).connected_components() {
            sort(part, &mut complete, &mut pending);
        }
        removals.push(Removal {
            step: removals.len() + 1,
            nodes: cut,
            from_component: comp.node_set(),
        });
    }

    let mut complete_subgraphs: Vec<BTreeSet<VariableId>> =
        complete.into_iter().map(|c| c.node_set()).collect();
    complete_subgraphs.sort();
    DissectionResult {
        complete_subgraphs,
        removals,
    }
}
