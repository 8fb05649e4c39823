//! JSON and plain-text renderings of analysis results.
//!
//! Structs serialize their fields in declaration order and all maps are
//! ordered, so identical results render to identical bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dataset::VariableId;
use crate::depgraph::{DependencyGraph, VerdictCache};
use crate::dissect::DissectionResult;
use crate::pfa::{LoggedRemoval, OutputTest, PfaResult};
use crate::stats::IndependenceVerdict;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub pair: [VariableId; 2],
    pub chi2: f64,
    pub dof: u64,
    pub p_value: f64,
    pub independent: bool,
    pub guard_ok: bool,
}

impl PairTest {
    pub fn new(a: VariableId, b: VariableId, v: &IndependenceVerdict) -> Self {
        PairTest {
            pair: [a, b],
            chi2: v.chi2,
            dof: v.dof,
            p_value: v.p_value,
            independent: v.independent,
            guard_ok: v.guard_ok,
        }
    }
}

pub fn pair_tests(cache: &VerdictCache) -> Vec<PairTest> {
    cache
        .iter()
        .map(|(&(a, b), v)| PairTest::new(a, b, v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphExport {
    pub nodes: Vec<VariableId>,
    pub edges: Vec<[VariableId; 2]>,
    pub tests: Vec<PairTest>,
}

impl From<&DependencyGraph> for GraphExport {
    fn from(g: &DependencyGraph) -> Self {
        GraphExport {
            nodes: g.graph().nodes().collect(),
            edges: g.graph().edges().into_iter().map(|(a, b)| [a, b]).collect(),
            tests: g
                .tests()
                .iter()
                .map(|(&(a, b), v)| PairTest::new(a, b, v))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissectionExport {
    pub removed: Vec<RemovalExport>,
    pub complete_subgraphs: Vec<BTreeSet<VariableId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalExport {
    pub step: usize,
    pub nodes: BTreeSet<VariableId>,
    pub from_component: BTreeSet<VariableId>,
}

impl From<&DissectionResult> for DissectionExport {
    fn from(r: &DissectionResult) -> Self {
        DissectionExport {
            removed: r
                .removals
                .iter()
                .map(|x| RemovalExport {
                    step: x.step,
                    nodes: x.nodes.clone(),
                    from_component: x.from_component.clone(),
                })
                .collect(),
            complete_subgraphs: r.complete_subgraphs.clone(),
        }
    }
}

/// Full record of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport<C: Serialize> {
    /// Every setting needed to reproduce the run.
    pub config: C,
    pub n_points: usize,
    pub n_features: usize,
    pub n_outputs: usize,
    pub principal_subgraphs: Vec<BTreeSet<VariableId>>,
    pub principal_features: BTreeSet<VariableId>,
    pub removed: Vec<LoggedRemoval>,
    pub passes: usize,
    pub relevant_features: Option<BTreeSet<VariableId>>,
    pub mi_scores: Option<BTreeMap<VariableId, f64>>,
    pub mi_features: Option<BTreeSet<VariableId>>,
    /// The feature list written to the features file.
    pub selected_features: BTreeSet<VariableId>,
    pub constants: Vec<VariableId>,
    pub output_tests: Vec<OutputTest>,
    pub tests: Vec<PairTest>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl<C: Serialize> RunReport<C> {
    pub fn new(
        config: C,
        shape: (usize, usize, usize),
        result: &PfaResult,
        cache: Option<&VerdictCache>,
    ) -> Self {
        let (n_points, n_features, n_outputs) = shape;
        RunReport {
            config,
            n_points,
            n_features,
            n_outputs,
            principal_subgraphs: result.principal_subgraphs.clone(),
            principal_features: result.principal_features.clone(),
            removed: result.removed.clone(),
            passes: result.passes,
            relevant_features: result.relevant_features.clone(),
            mi_scores: result.mi_scores.clone(),
            mi_features: result.mi_features.clone(),
            selected_features: result.selected().clone(),
            constants: result.constants.clone(),
            output_tests: result.output_tests.clone(),
            tests: cache.map(pair_tests).unwrap_or_default(),
            warnings: result.warnings.clone(),
            timings_ms: None,
        }
    }
}

/// One 1-based index per line, ascending, LF line endings.
pub fn features_text<'a>(features: impl IntoIterator<Item = &'a VariableId>) -> String {
    let mut ids: Vec<VariableId> = features.into_iter().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    ids.iter().map(|id| format!("{id}\n")).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::{build_graph, Graph};
    use crate::dissect::dissect;
    use crate::synth::{generate, Scenario, SynthSpec};
    use crate::{discretize_all, ChiSquareTest};

    #[test]
    fn features_file_format() {
        let ids = [VariableId(4), VariableId(2), VariableId(4)];
        assert_eq!(features_text(&ids), "2\n4\n");
        assert_eq!(features_text(&[]), "");
    }

    #[test]
    fn graph_and_dissection_export() {
        let ds = generate(&SynthSpec::new(Scenario::Example1, 3000, 7)).unwrap();
        let features = discretize_all(&ds, 100).unwrap();
        let nodes: Vec<_> = ds.feature_ids().collect();
        let mut cache = VerdictCache::new();
        let g = build_graph(&features, &ChiSquareTest::default(), &nodes, &mut cache).unwrap();
        let export = GraphExport::from(&g);
        assert_eq!(export.nodes.len(), 5);
        assert_eq!(export.tests.len(), 10);
        let json: serde_json::Value = serde_json::from_str(&to_json(&export)).unwrap();
        let keys: Vec<_> = json["tests"][0]
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect();
        for k in ["pair", "chi2", "dof", "p_value"] {
            assert!(keys.contains(&k.to_string()));
        }

        let path = Graph::from_edges(
            (1..=3).map(VariableId),
            [
                (VariableId(1), VariableId(2)),
                (VariableId(2), VariableId(3)),
            ],
        );
        let d = DissectionExport::from(&dissect(&path));
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"removed":[{"step":1,"nodes":[2],"from_component":[1,2,3]}],"complete_subgraphs":[[1],[3]]}"#
        );
    }
}
