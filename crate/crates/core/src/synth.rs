//! Synthetic datasets with known functional structure, and random graphs.

use std::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VariableId};
use crate::depgraph::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Product,
    Sum,
}

/// A derived variable computed from earlier variables (indices into the
/// variable list, base variables first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedVar {
    pub op: Combine,
    pub parents: Vec<usize>,
}

/// Independent uniform base variables followed by derived variables,
/// emitted in `row_order`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagSpec {
    pub n_base: usize,
    pub derived: Vec<DerivedVar>,
    /// Emitted row `r` holds variable `row_order[r]`.
    pub row_order: Vec<usize>,
}

impl DagSpec {
    /// `n_derived` variables, each a sum or product of 2 or 3 distinct base
    /// variables; rows are shuffled so bases and derived ones interleave.
    pub fn random(n_base: usize, n_derived: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bases: Vec<usize> = (0..n_base).collect();
        let derived = (0..n_derived)
            .map(|_| {
                let k = rng.random_range(2..=3).min(n_base);
                let mut parents: Vec<usize> = bases.choose_multiple(&mut rng, k).copied().collect();
                parents.sort_unstable();
                let op = if rng.random_bool(0.5) {
                    Combine::Product
                } else {
                    Combine::Sum
                };
                DerivedVar { op, parents }
            })
            .collect();
        let mut row_order: Vec<usize> = (0..n_base + n_derived).collect();
        row_order.shuffle(&mut rng);
        DagSpec {
            n_base,
            derived,
            row_order,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_base + self.derived.len()
    }

    /// Ids of the base variables in the emitted dataset (no output rows).
    pub fn base_ids(&self) -> Vec<VariableId> {
        let mut ids: Vec<VariableId> = self
            .row_order
            .iter()
            .enumerate()
            .filter(|(_, &var)| var < self.n_base)
            .map(|(r, _)| VariableId::from_row(r))
            .collect();
        ids.sort_unstable();
        ids
    }

    fn validate(&self) -> Result<()> {
        if self.n_base == 0 {
            return Err(Error::argument("a DAG needs at least one base variable"));
        }
        for (i, d) in self.derived.iter().enumerate() {
            if d.parents.is_empty() || d.parents.iter().any(|&p| p >= self.n_base + i) {
                return Err(Error::argument(format!(
                    "derived variable {i} must have parents among earlier variables"
                )));
            }
        }
        let mut order = self.row_order.clone();
        order.sort_unstable();
        if order != (0..self.n_vars()).collect::<Vec<_>>() {
            return Err(Error::argument(
                "row order must be a permutation of all variables",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// x1, x2, x3 independent; x4 = 2 x1 x2 x3; x5 = x1 x2. No outputs.
    Example1,
    /// y = [x1 >= median(x1)]; x1, x2 independent; x3 = x1 x2.
    Example2,
    /// x1..x5 independent, only x1, x3, x5 measured; x6 = x1 x2,
    /// x7 = x2 x3, x8 = x3 x4, x9 = x4 x5.
    Example3,
    /// y = [x1 + x2 10^-0.5 >= 4]; x1, x2 independent.
    Example4,
    Custom(DagSpec),
}

impl Scenario {
    pub fn n_outputs(&self) -> usize {
        match self {
            Scenario::Example2 | Scenario::Example4 => 1,
            _ => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Example1 => "example1",
            Scenario::Example2 => "example2",
            Scenario::Example3 => "example3",
            Scenario::Example4 => "example4",
            Scenario::Custom(_) => "custom",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Scenario::Example1),
            "example2" => Ok(Scenario::Example2),
            "example3" => Ok(Scenario::Example3),
            "example4" => Ok(Scenario::Example4),
            other => Err(Error::argument(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub scenario: Scenario,
    pub n_points: usize,
    pub seed: u64,
    /// Base variables are uniform on `[low, high)`.
    pub low: f64,
    pub high: f64,
}

impl SynthSpec {
    pub fn new(scenario: Scenario, n_points: usize, seed: u64) -> Self {
        SynthSpec {
            scenario,
            n_points,
            seed,
            low: 0.0,
            high: 5.0,
        }
    }
}

fn threshold(values: &[f64], pred: impl Fn(usize) -> bool) -> Vec<f64> {
    (0..values.len())
        .map(|i| if pred(i) { 1.0 } else { 0.0 })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    if spec.n_points == 0 {
        return Err(Error::argument("n_points must be at least 1"));
    }
    if !spec.low.is_finite() || !spec.high.is_finite() || spec.low >= spec.high {
        return Err(Error::argument("base range must satisfy low < high"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let uniform = Uniform::new(spec.low, spec.high).expect("checked range");
    let n = spec.n_points;
    let mut base = |count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| uniform.sample_iter(&mut rng).take(n).collect())
            .collect()
    };
    let zip2 = |a: &[f64], b: &[f64], f: fn(f64, f64) -> f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
    };

    let rows = match &spec.scenario {
        Scenario::Example1 => {
            let v = base(3);
            let x5 = zip2(&v[0], &v[1], |a, b| a * b);
            let x4: Vec<f64> = (0..n).map(|i| 2.0 * v[0][i] * v[1][i] * v[2][i]).collect();
            vec![v[0].clone(), v[1].clone(), v[2].clone(), x4, x5]
        }
        Scenario::Example2 => {
            let v = base(2);
            let x3 = zip2(&v[0], &v[1], |a, b| a * b);
            let cut = median(&v[0]);
            let y = threshold(&v[0], |i| v[0][i] >= cut);
            vec![y, v[0].clone(), v[1].clone(), x3]
        }
        Scenario::Example3 => {
            let v = base(5);
            let prod = |a: usize, b: usize| zip2(&v[a], &v[b], |x, y| x * y);
            vec![
                v[0].clone(),
                v[2].clone(),
                v[4].clone(),
                prod(0, 1),
                prod(1, 2),
                prod(2, 3),
                prod(3, 4),
            ]
        }
        Scenario::Example4 => {
            let v = base(2);
            let w = 10f64.powf(-0.5);
            let y = threshold(&v[0], |i| v[0][i] + v[1][i] * w >= 4.0);
            vec![y, v[0].clone(), v[1].clone()]
        }
        Scenario::Custom(dag) => {
            dag.validate()?;
            let mut vars = base(dag.n_base);
            for d in &dag.derived {
                let row: Vec<f64> = (0..n)
                    .map(|i| {
                        let it = d.parents.iter().map(|&p| vars[p][i]);
                        match d.op {
                            Combine::Product => it.product(),
                            Combine::Sum => it.sum(),
                        }
                    })
                    .collect();
                vars.push(row);
            }
            dag.row_order.iter().map(|&v| vars[v].clone()).collect()
        }
    };
    Dataset::from_rows(rows, spec.scenario.n_outputs())
}

/// Graph on ids `1..=n` where each pair is joined with probability `p_edge`.
pub fn random_graph(n: usize, p_edge: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::argument("random graphs need at least 2 nodes"));
    }
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(Error::argument(format!(
            "edge probability {p_edge} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::with_nodes((1..=n).map(VariableId));
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.random_bool(p_edge) {
                g.add_edge(VariableId(a), VariableId(b));
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_shape_and_equations() {
        let ds = generate(&SynthSpec::new(Scenario::Example1, 5000, 42)).unwrap();
        assert_eq!(
            (ds.n_features(), ds.n_outputs(), ds.n_points()),
            (5, 0, 5000)
        );
        for i in 0..ds.n_points() {
            let x: Vec<f64> = (0..5).map(|r| ds.row(r)[i]).collect();
            assert_eq!(x[3], 2.0 * x[0] * x[1] * x[2]);
            assert_eq!(x[4], x[0] * x[1]);
            assert!(x[..3].iter().all(|v| (0.0..5.0).contains(v)));
        }
    }

    #[test]
    fn example2_output() {
        let ds = generate(&SynthSpec::new(Scenario::Example2, 1001, 1)).unwrap();
        assert_eq!((ds.n_features(), ds.n_outputs()), (3, 1));
        let y = ds.row(0);
        assert!(y.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(y.iter().filter(|&&v| v == 1.0).count(), 501);
        for i in 0..ds.n_points() {
            assert_eq!(ds.row(3)[i], ds.row(1)[i] * ds.row(2)[i]);
        }
    }

    #[test]
    fn example3_rows() {
        let ds = generate(&SynthSpec::new(Scenario::Example3, 100, 5)).unwrap();
        assert_eq!(ds.n_rows(), 7);
        assert_eq!(ds.n_outputs(), 0);
    }

    #[test]
    fn example4_threshold() {
        let ds = generate(&SynthSpec::new(Scenario::Example4, 2000, 9)).unwrap();
        let w = 10f64.powf(-0.5);
        for i in 0..ds.n_points() {
            let expected = ds.row(1)[i] + ds.row(2)[i] * w >= 4.0;
            assert_eq!(ds.row(0)[i] == 1.0, expected);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate(&SynthSpec::new(Scenario::Example3, 300, 11)).unwrap();
        let b = generate(&SynthSpec::new(Scenario::Example3, 300, 11)).unwrap();
        let c = generate(&SynthSpec::new(Scenario::Example3, 300, 12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn custom_dag() {
        let dag = DagSpec::random(4, 6, 3);
        let ds = generate(&SynthSpec::new(Scenario::Custom(dag.clone()), 50, 0)).unwrap();
        assert_eq!(ds.n_rows(), 10);
        assert_eq!(dag.base_ids().len(), 4);
        let bad = DagSpec {
            n_base: 1,
            derived: vec![DerivedVar {
                op: Combine::Sum,
                parents: vec![1],
            }],
            row_order: vec![0, 1],
        };
        assert!(generate(&SynthSpec::new(Scenario::Custom(bad), 5, 0)).is_err());
    }

    #[test]
    fn scenario_names() {
        assert_eq!("example3".parse::<Scenario>().unwrap(), Scenario::Example3);
        assert!("example9".parse::<Scenario>().is_err());
        assert!(generate(&SynthSpec::new(Scenario::Example1, 0, 0)).is_err());
    }

    #[test]
    fn random_graph_extremes() {
        assert!(random_graph(6, 1.0, 1).unwrap().is_complete());
        assert_eq!(random_graph(6, 0.0, 1).unwrap().n_edges(), 0);
        let g = random_graph(10, 0.4, 7).unwrap();
        assert_eq!(g, random_graph(10, 0.4, 7).unwrap());
        let connected = (0..40)
            .filter(|&s| random_graph(10, 0.4, s).unwrap().is_connected())
            .count();
        assert!(connected > 0 && connected < 40);
        assert!(random_graph(1, 0.5, 0).is_err());
        assert!(random_graph(3, 1.5, 0).is_err());
    }
}
