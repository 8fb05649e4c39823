//! Batched principal feature analysis and filtering against outputs.
//!
//! Features are processed in batches of at most `ns` nodes. Each batch's
//! dependency graph is dissected; survivors are re-batched until a full pass
//! removes nothing, after which the graph of all remaining nodes is dissected
//! once more. Test verdicts are cached for the whole run, so no pair is ever
//! tested twice.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{discretize_all, DiscretizedFeature};
use crate::dataset::{Dataset, VariableId};
use crate::depgraph::{build_graph, VerdictCache};
use crate::dissect::{dissect_with, TieBreak};
use crate::error::{Error, Result};
use crate::stats::{
    mutual_information, ChiSquareTest, DofMode, IndependenceTest, IndependenceVerdict,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Batching {
    /// Ascending ids packed into consecutive batches.
    #[default]
    Ordered,
    /// Nodes shuffled with the run seed before packing.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaConfig {
    /// Minimum points per bin.
    pub nu: usize,
    /// Significance level of the independence test.
    pub alpha: f64,
    /// Maximum nodes per batch.
    pub ns: usize,
    pub batching: Batching,
    pub seed: u64,
    /// Shuffles cut tie-breaking priorities when set.
    pub tie_seed: Option<u64>,
    pub min_expected: f64,
    pub dof_mode: DofMode,
    /// Mutual information threshold (nats) for the final reduction.
    pub theta: Option<f64>,
}

impl PfaConfig {
    pub fn new(nu: usize) -> Self {
        PfaConfig {
            nu,
            alpha: 0.01,
            ns: 50,
            batching: Batching::Ordered,
            seed: 0,
            tie_seed: None,
            min_expected: 5.0,
            dof_mode: DofMode::Independence,
            theta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 1 {
            return Err(Error::argument("nu must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::argument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.ns < 2 {
            return Err(Error::argument(format!(
                "ns must be at least 2, got {}",
                self.ns
            )));
        }
        if self.min_expected.is_nan() || self.min_expected < 0.0 {
            return Err(Error::argument("min_expected must be non-negative"));
        }
        if let Some(theta) = self.theta {
            if theta.is_nan() || theta < 0.0 {
                return Err(Error::argument(format!(
                    "theta must be non-negative, got {theta}"
                )));
            }
        }
        Ok(())
    }

    pub fn chi_square(&self) -> ChiSquareTest {
        ChiSquareTest {
            alpha: self.alpha,
            min_expected: self.min_expected,
            dof_mode: self.dof_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedRemoval {
    /// 1-based outer pass. The final full-graph pass gets its own number.
    pub pass: usize,
    /// 1-based batch within the pass.
    pub batch: usize,
    /// 1-based step within the batch's dissection.
    pub step: usize,
    pub nodes: BTreeSet<VariableId>,
    pub from_component: BTreeSet<VariableId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTest {
    pub feature: VariableId,
    pub output: VariableId,
    #[serde(flatten)]
    pub verdict: IndependenceVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaResult {
    pub config: PfaConfig,
    /// Disjoint complete subgraphs over the surviving features.
    pub principal_subgraphs: Vec<BTreeSet<VariableId>>,
    pub principal_features: BTreeSet<VariableId>,
    pub removed: Vec<LoggedRemoval>,
    /// Whole principal subgraphs related to at least one output.
    pub relevant_features: Option<BTreeSet<VariableId>>,
    pub output_tests: Vec<OutputTest>,
    /// Largest mutual information (nats) of each relevant feature with any output.
    pub mi_scores: Option<BTreeMap<VariableId, f64>>,
    pub mi_features: Option<BTreeSet<VariableId>>,
    pub constants: Vec<VariableId>,
    pub warnings: Vec<String>,
    pub passes: usize,
}

impl PfaResult {
    fn empty(config: PfaConfig, constants: Vec<VariableId>) -> Self {
        PfaResult {
            config,
            principal_subgraphs: Vec::new(),
            principal_features: BTreeSet::new(),
            removed: Vec::new(),
            relevant_features: None,
            output_tests: Vec::new(),
            mi_scores: None,
            mi_features: None,
            constants,
            warnings: Vec::new(),
            passes: 0,
        }
    }

    /// The most reduced feature set computed so far: MI-filtered, else
    /// relevant, else principal.
    pub fn selected(&self) -> &BTreeSet<VariableId> {
        self.mi_features
            .as_ref()
            .or(self.relevant_features.as_ref())
            .unwrap_or(&self.principal_features)
    }

    pub fn subgraph_of(&self, v: VariableId) -> Option<&BTreeSet<VariableId>> {
        self.principal_subgraphs.iter().find(|s| s.contains(&v))
    }
}

/// Discretized dataset plus the verdict cache of one analysis.
pub struct PfaSession<'a, T: IndependenceTest = ChiSquareTest> {
    ds: &'a Dataset,
    cfg: PfaConfig,
    tester: T,
    features: Vec<DiscretizedFeature>,
    cache: VerdictCache,
    output_cache: VerdictCache,
}

impl<'a> PfaSession<'a, ChiSquareTest> {
    pub fn new(ds: &'a Dataset, cfg: PfaConfig) -> Result<Self> {
        let tester = cfg.chi_square();
        Self::with_tester(ds, cfg, tester)
    }
}

impl<'a, T: IndependenceTest> PfaSession<'a, T> {
    /// Session whose dependency graph uses `tester`. Relevance against
    /// outputs always uses the configured chi-square test.
    pub fn with_tester(ds: &'a Dataset, cfg: PfaConfig, tester: T) -> Result<Self> {
        cfg.validate()?;
        let features = discretize_all(ds, cfg.nu)?;
        Ok(PfaSession {
            ds,
            cfg,
            tester,
            features,
            cache: VerdictCache::new(),
            output_cache: VerdictCache::new(),
        })
    }

    pub fn features(&self) -> &[DiscretizedFeature] {
        &self.features
    }

    pub fn cache(&self) -> &VerdictCache {
        &self.cache
    }

    pub fn config(&self) -> &PfaConfig {
        &self.cfg
    }

    pub fn run(&mut self) -> Result<PfaResult> {
        let (mut nodes, constants): (Vec<VariableId>, Vec<VariableId>) = self
            .ds
            .feature_ids()
            .partition(|id| !self.features[id.row()].is_constant());
        let mut result = PfaResult::empty(self.cfg.clone(), constants);
        if nodes.is_empty() {
            return Ok(result);
        }

        let ties = match self.cfg.tie_seed {
            Some(seed) => TieBreak::shuffled(self.ds.feature_ids(), seed),
            None => TieBreak::by_id(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut pass = 0;
        let subgraphs = loop {
            pass += 1;
            let batches = self.partition(&nodes, &mut rng);
            let outcomes = self.dissect_batches(&batches, &ties)?;
            let mut removed_any = false;
            let mut survivors = Vec::new();
            let mut subgraphs = Vec::new();
            for (b, outcome) in outcomes.into_iter().enumerate() {
                removed_any |= !outcome.removals.is_empty();
                result
                    .removed
                    .extend(outcome.removals.into_iter().map(|r| LoggedRemoval {
                        pass,
                        batch: b + 1,
                        step: r.step,
                        nodes: r.nodes,
                        from_component: r.from_component,
                    }));
                survivors.extend(outcome.complete_subgraphs.iter().flatten().copied());
                subgraphs.extend(outcome.complete_subgraphs);
            }
            survivors.sort_unstable();
            nodes = survivors;
            if !removed_any {
                if batches.len() == 1 {
                    // The full graph of the remaining nodes was just dissected.
                    break subgraphs;
                }
                pass += 1;
                let full = self.dissect_batches(&[nodes.clone()], &ties)?.remove(0);
                result
                    .removed
                    .extend(full.removals.into_iter().map(|r| LoggedRemoval {
                        pass,
                        batch: 1,
                        step: r.step,
                        nodes: r.nodes,
                        from_component: r.from_component,
                    }));
                break full.complete_subgraphs;
            }
        };

        let mut subgraphs = subgraphs;
        subgraphs.sort();
        result.principal_features = subgraphs.iter().flatten().copied().collect();
        result.principal_subgraphs = subgraphs;
        result.passes = pass;
        result.warnings = guard_warnings(&self.cache, self.cfg.min_expected);
        Ok(result)
    }

    fn partition(&self, nodes: &[VariableId], rng: &mut ChaCha8Rng) -> Vec<Vec<VariableId>> {
        let mut order = nodes.to_vec();
        match self.cfg.batching {
            Batching::Ordered => order.sort_unstable(),
            Batching::Random => order.shuffle(rng),
        }
        order
            .chunks(self.cfg.ns)
            .map(|c| {
                let mut c = c.to_vec();
                c.sort_unstable();
                c
            })
            .collect()
    }

    /// Tests every in-batch pair in one parallel sweep, then dissects the
    /// batches independently. Output order follows `batches`.
    fn dissect_batches(
        &mut self,
        batches: &[Vec<VariableId>],
        ties: &TieBreak,
    ) -> Result<Vec<crate::dissect::DissectionResult>> {
        let pairs = batches
            .iter()
            .flat_map(|b| {
                b.iter()
                    .enumerate()
                    .flat_map(move |(i, &x)| b[i + 1..].iter().map(move |&y| (x, y)))
            })
            .collect();
        self.cache.fill(&self.features, &self.tester, pairs)?;
        let graphs = batches
            .iter()
            .map(|b| build_graph(&self.features, &self.tester, b, &mut self.cache))
            .collect::<Result<Vec<_>>>()?;
        Ok(graphs
            .par_iter()
            .map(|g| dissect_with(g.graph(), ties))
            .collect())
    }

    /// PFA, then relevance filtering when the dataset has outputs, then MI
    /// filtering when `theta` is configured (which requires outputs).
    pub fn analyze(&mut self) -> Result<PfaResult> {
        if self.cfg.theta.is_some() && self.ds.n_outputs() == 0 {
            return Err(Error::NoOutputs);
        }
        let mut result = self.run()?;
        if self.ds.n_outputs() > 0 {
            self.filter_relevant(&mut result)?;
            if let Some(theta) = self.cfg.theta {
                self.filter_by_mi(&mut result, theta)?;
            }
        }
        Ok(result)
    }

    /// Keeps every principal subgraph with at least one member not
    /// independent of at least one output.
    pub fn filter_relevant(&mut self, result: &mut PfaResult) -> Result<()> {
        if self.ds.n_outputs() == 0 {
            return Err(Error::NoOutputs);
        }
        let tester = self.cfg.chi_square();
        let outputs: Vec<VariableId> = self.ds.output_ids().collect();
        let pairs: Vec<_> = result
            .principal_features
            .iter()
            .flat_map(|&f| outputs.iter().map(move |&y| (y, f)))
            .collect();
        self.output_cache.fill(&self.features, &tester, pairs)?;

        let mut relevant = BTreeSet::new();
        let mut tests = Vec::new();
        for sub in &result.principal_subgraphs {
            let mut hit = false;
            for &f in sub {
                for &y in &outputs {
                    let verdict = *self.output_cache.get(y, f).expect("filled above");
                    hit |= !verdict.independent;
                    tests.push(OutputTest {
                        feature: f,
                        output: y,
                        verdict,
                    });
                }
            }
            if hit {
                relevant.extend(sub.iter().copied());
            }
        }
        tests.sort_by_key(|t| (t.feature, t.output));
        for t in &tests {
            if !t.verdict.guard_ok {
                result
                    .warnings
                    .push(guard_message(t.feature, t.output, self.cfg.min_expected));
            }
        }
        result.output_tests = tests;
        result.relevant_features = Some(relevant);
        Ok(())
    }

    /// Relevant features whose mutual information with the outputs (maximum
    /// over outputs) exceeds `theta`. Records the scores on `result`.
    pub fn filter_by_mi(&self, result: &mut PfaResult, theta: f64) -> Result<BTreeSet<VariableId>> {
        let relevant = result.relevant_features.clone().ok_or_else(|| {
            Error::argument("relevance filtering must run before mutual information filtering")
        })?;
        if theta.is_nan() || theta < 0.0 {
            return Err(Error::argument(format!(
                "theta must be non-negative, got {theta}"
            )));
        }
        let outputs: Vec<VariableId> = self.ds.output_ids().collect();
        let scores: BTreeMap<VariableId, f64> = relevant
            .par_iter()
            .map(|&f| {
                let best = outputs
                    .iter()
                    .map(|&y| mutual_information(&self.features[f.row()], &self.features[y.row()]))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                Ok((f, best))
            })
            .collect::<Result<_>>()?;
        let kept: BTreeSet<VariableId> = scores
            .iter()
            .filter(|(_, &s)| s > theta)
            .map(|(&f, _)| f)
            .collect();
        result.mi_scores = Some(scores);
        result.mi_features = Some(kept.clone());
        Ok(kept)
    }

    /// Principal features not independent of `target`, i.e. candidate
    /// arguments for modeling it. Missing verdicts are computed on demand.
    /// For a principal target the other members of its subgraph are returned.
    pub fn explain_feature(
        &mut self,
        result: &PfaResult,
        target: VariableId,
    ) -> Result<BTreeSet<VariableId>> {
        if !self.ds.contains(target) {
            return Err(Error::argument(format!("unknown variable {target}")));
        }
        if let Some(sub) = result.subgraph_of(target) {
            return Ok(sub.iter().copied().filter(|&v| v != target).collect());
        }
        let mut out = BTreeSet::new();
        for &p in &result.principal_features {
            if !self
                .cache
                .verdict(&self.features, &self.tester, target, p)?
                .independent
            {
                out.insert(p);
            }
        }
        Ok(out)
    }
}

fn guard_message(a: VariableId, b: VariableId, min_expected: f64) -> String {
    format!("pair ({a}, {b}): expected cell count below {min_expected}, consider raising nu")
}

fn guard_warnings(cache: &VerdictCache, min_expected: f64) -> Vec<String> {
    cache
        .iter()
        .filter(|(_, v)| !v.guard_ok)
        .map(|(&(a, b), _)| guard_message(a, b, min_expected))
        .collect()
}

pub fn run_pfa(ds: &Dataset, cfg: &PfaConfig) -> Result<PfaResult> {
    PfaSession::new(ds, cfg.clone())?.run()
}

/// Runs relevance filtering on a finished result using its recorded config.
pub fn filter_relevant(result: &mut PfaResult, ds: &Dataset) -> Result<()> {
    PfaSession::new(ds, result.config.clone())?.filter_relevant(result)
}

pub fn filter_by_mi(
    result: &mut PfaResult,
    ds: &Dataset,
    theta: f64,
) -> Result<BTreeSet<VariableId>> {
    PfaSession::new(ds, result.config.clone())?.filter_by_mi(result, theta)
}

/// Full pipeline on one dataset: PFA, then relevance filtering when the
/// dataset has outputs, then MI filtering when `theta` is configured.
pub fn analyze(ds: &Dataset, cfg: &PfaConfig) -> Result<PfaResult> {
    PfaSession::new(ds, cfg.clone())?.analyze()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustResult {
    pub intersection: BTreeSet<VariableId>,
    pub runs: Vec<PfaResult>,
}

/// Runs [`analyze`] on `runs` random subsamples (run `i` uses seed
/// `cfg.seed + i` for both subsampling and batching) and intersects the
/// selected feature sets.
pub fn robust_intersection(
    ds: &Dataset,
    cfg: &PfaConfig,
    runs: usize,
    fraction: f64,
) -> Result<RobustResult> {
    if runs < 1 {
        return Err(Error::argument("at least one run is required"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::argument(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let mut results = Vec::with_capacity(runs);
    let mut intersection: Option<BTreeSet<VariableId>> = None;
    for run in 0..runs {
        let seed = cfg.seed.wrapping_add(run as u64);
        let wrap = |e| Error::Run {
            run: run + 1,
            source: Box::new(e),
        };
        let sub = ds.subsample(fraction, seed).map_err(wrap)?;
        let run_cfg = PfaConfig {
            seed,
            ..cfg.clone()
        };
        let result = analyze(&sub, &run_cfg).map_err(wrap)?;
        intersection = Some(match intersection {
            None => result.selected().clone(),
            Some(acc) => acc.intersection(result.selected()).copied().collect(),
        });
        results.push(result);
    }
    Ok(RobustResult {
        intersection: intersection.unwrap_or_default(),
        runs: results,
    })
}
