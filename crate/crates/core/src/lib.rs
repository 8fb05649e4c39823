//! Principal feature analysis.
//!
//! Features that are functions of other features show up as linker nodes in
//! a pairwise dependency graph. This crate builds that graph from chi-square
//! independence tests over discretized measurements, dissects it with
//! minimum vertex cuts until only complete subgraphs remain, and filters the
//! surviving features against output variables.
//!
//! The usual entry point is [`pfa::run_pfa`] followed by
//! [`pfa::PfaSession::filter_relevant`] when the dataset carries outputs.

pub mod binning;
pub mod dataset;
pub mod depgraph;
pub mod dissect;
mod error;
mod flow;
pub mod gamma;
pub mod pfa;
pub mod report;
pub mod stats;
pub mod synth;

pub use binning::{discretize, discretize_all, DiscretizedFeature};
pub use dataset::{Dataset, VariableId};
pub use depgraph::{build_graph, DependencyGraph, Graph, VerdictCache};
pub use dissect::{brute_force_min_node_cut, dissect, min_node_cut, DissectionResult, Removal};
pub use error::{Error, Result};
pub use pfa::{
    filter_by_mi, robust_intersection, run_pfa, Batching, PfaConfig, PfaResult, PfaSession,
    RobustResult,
};
pub use stats::{
    chi_square_p_value, chi_square_statistic, contingency, is_independent, mutual_information,
    ChiSquareTest, ContingencyTable, DofMode, IndependenceTest, IndependenceVerdict,
    MutualInfoTest,
};
pub use synth::{generate, random_graph, DagSpec, Scenario, SynthSpec};
