//! Pairwise independence testing over discretized variables.

use serde::{Deserialize, Serialize};

use crate::binning::DiscretizedFeature;
use crate::error::{Error, Result};
use crate::gamma;

/// Joint bin counts of two discretized variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    observed: Vec<u64>,
    rows: usize,
    cols: usize,
    row_marginals: Vec<u64>,
    col_marginals: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    /// Builds a table from a row-major `rows x cols` count matrix.
    pub fn from_counts(rows: usize, cols: usize, observed: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 || observed.len() != rows * cols {
            return Err(Error::argument(format!(
                "{} counts do not form a {rows}x{cols} table",
                observed.len()
            )));
        }
        let mut row_marginals = vec![0u64; rows];
        let mut col_marginals = vec![0u64; cols];
        for i in 0..rows {
            for j in 0..cols {
                let o = observed[i * cols + j];
                row_marginals[i] += o;
                col_marginals[j] += o;
            }
        }
        let n = row_marginals.iter().sum();
        Ok(ContingencyTable {
            observed,
            rows,
            cols,
            row_marginals,
            col_marginals,
            n,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn observed(&self, i: usize, j: usize) -> u64 {
        self.observed[i * self.cols + j]
    }

    /// Expected count under independence, `row_i * col_j / N`.
    pub fn expected(&self, i: usize, j: usize) -> f64 {
        (self.row_marginals[i] as f64 * self.col_marginals[j] as f64) / self.n as f64
    }

    pub fn row_marginals(&self) -> &[u64] {
        &self.row_marginals
    }

    pub fn col_marginals(&self) -> &[u64] {
        &self.col_marginals
    }

    pub fn min_expected(&self) -> f64 {
        let min_r = self.row_marginals.iter().copied().min().unwrap_or(0);
        let min_c = self.col_marginals.iter().copied().min().unwrap_or(0);
        (min_r as f64 * min_c as f64) / self.n as f64
    }

    pub fn transpose(&self) -> Self {
        let mut observed = vec![0u64; self.observed.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                observed[j * self.rows + i] = self.observed[i * self.cols + j];
            }
        }
        ContingencyTable {
            observed,
            rows: self.cols,
            cols: self.rows,
            row_marginals: self.col_marginals.clone(),
            col_marginals: self.row_marginals.clone(),
            n: self.n,
        }
    }

    fn cells(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (0..self.cols).map(move |j| (self.observed(i, j), self.expected(i, j)))
        })
    }
}

/// Sums terms in ascending order so that the result does not depend on the
/// orientation of the table.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn check_coverage(a: &DiscretizedFeature, b: &DiscretizedFeature) -> Result<()> {
    if a.n_points() != b.n_points() {
        return Err(Error::argument(format!(
            "variables cover {} and {} points",
            a.n_points(),
            b.n_points()
        )));
    }
    Ok(())
}

/// Counts joint bin occurrences of `a` (rows) and `b` (columns).
pub fn contingency(a: &DiscretizedFeature, b: &DiscretizedFeature) -> Result<ContingencyTable> {
    check_coverage(a, b)?;
    let cols = b.n_bins();
    let mut observed = vec![0u64; a.n_bins() * cols];
    for (&i, &j) in a.bins().iter().zip(b.bins()) {
        observed[i as usize * cols + j as usize] += 1;
    }
    ContingencyTable::from_counts(a.n_bins(), cols, observed)
}

/// Pearson statistic `sum (f_O - f_E)^2 / f_E`.
pub fn chi_square_statistic(t: &ContingencyTable) -> Result<f64> {
    let mut terms = Vec::with_capacity(t.rows * t.cols);
    for i in 0..t.rows {
        for j in 0..t.cols {
            let e = t.expected(i, j);
            if e.is_nan() || e <= 0.0 {
                return Err(Error::DegenerateTable { row: i, col: j });
            }
            let d = t.observed(i, j) as f64 - e;
            terms.push(d * d / e);
        }
    }
    Ok(ordered_sum(terms))
}

/// Upper-tail probability of the chi-square distribution with `dof` degrees
/// of freedom.
pub fn chi_square_p_value(chi2: f64, dof: u64) -> Result<f64> {
    if !chi2.is_finite() || chi2 < 0.0 {
        return Err(Error::argument(format!("chi-square statistic {chi2}")));
    }
    if dof == 0 {
        return Err(Error::argument("degrees of freedom must be positive"));
    }
    Ok(gamma::regularized_upper(dof as f64 / 2.0, chi2 / 2.0))
}

/// Mutual information of the two bin distributions, in nats.
pub fn mutual_information(a: &DiscretizedFeature, b: &DiscretizedFeature) -> Result<f64> {
    Ok(table_mutual_information(&contingency(a, b)?))
}

pub fn table_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n as f64;
    let terms = t
        .cells()
        .filter(|&(o, _)| o > 0)
        .map(|(o, e)| (o as f64 / n) * (o as f64 / e).ln())
        .collect();
    ordered_sum(terms).max(0.0)
}

/// How degrees of freedom are counted for the independence test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofMode {
    /// `(k - 1)(l - 1)`.
    #[default]
    Independence,
    /// `k * l - 1`, the goodness-of-fit convention.
    CellsMinusOne,
}

impl DofMode {
    pub fn dof(self, rows: usize, cols: usize) -> u64 {
        match self {
            DofMode::Independence => ((rows - 1) * (cols - 1)) as u64,
            DofMode::CellsMinusOne => (rows * cols - 1) as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceVerdict {
    pub chi2: f64,
    pub dof: u64,
    pub p_value: f64,
    pub independent: bool,
    /// Every expected cell count reached the configured minimum.
    pub guard_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutual_information: Option<f64>,
}

impl IndependenceVerdict {
    fn constant() -> Self {
        IndependenceVerdict {
            chi2: 0.0,
            dof: 0,
            p_value: 1.0,
            independent: true,
            guard_ok: true,
            mutual_information: None,
        }
    }
}

/// Chi-square test of independence. A constant variable is independent of
/// everything. Independence is rejected when `p < alpha`.
pub fn is_independent(
    a: &DiscretizedFeature,
    b: &DiscretizedFeature,
    alpha: f64,
    min_expected: f64,
    dof_mode: DofMode,
) -> Result<IndependenceVerdict> {
    check_coverage(a, b)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::argument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if a.is_constant() || b.is_constant() {
        return Ok(IndependenceVerdict::constant());
    }
    let table = contingency(a, b)?;
    let chi2 = chi_square_statistic(&table)?;
    let dof = dof_mode.dof(table.rows, table.cols);
    let p_value = chi_square_p_value(chi2, dof)?;
    Ok(IndependenceVerdict {
        chi2,
        dof,
        p_value,
        independent: p_value >= alpha,
        guard_ok: table.min_expected() >= min_expected,
        mutual_information: None,
    })
}

/// Pairwise dependency criterion used to build dependency graphs.
pub trait IndependenceTest: Sync {
    fn test(&self, a: &DiscretizedFeature, b: &DiscretizedFeature) -> Result<IndependenceVerdict>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub alpha: f64,
    pub min_expected: f64,
    pub dof_mode: DofMode,
}

impl Default for ChiSquareTest {
    fn default() -> Self {
        ChiSquareTest {
            alpha: 0.01,
            min_expected: 5.0,
            dof_mode: DofMode::Independence,
        }
    }
}

impl IndependenceTest for ChiSquareTest {
    fn test(&self, a: &DiscretizedFeature, b: &DiscretizedFeature) -> Result<IndependenceVerdict> {
        is_independent(a, b, self.alpha, self.min_expected, self.dof_mode)
    }
}

/// Declares two variables dependent when their mutual information exceeds
/// `threshold` nats. The chi-square fields are filled in for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoTest {
    pub threshold: f64,
    pub min_expected: f64,
}

impl IndependenceTest for MutualInfoTest {
    fn test(&self, a: &DiscretizedFeature, b: &DiscretizedFeature) -> Result<IndependenceVerdict> {
        check_coverage(a, b)?;
        if a.is_constant() || b.is_constant() {
            return Ok(IndependenceVerdict {
                mutual_information: Some(0.0),
                ..IndependenceVerdict::constant()
            });
        }
        let table = contingency(a, b)?;
        let chi2 = chi_square_statistic(&table)?;
        let dof = DofMode::Independence.dof(table.rows, table.cols);
        let mi = table_mutual_information(&table);
        Ok(IndependenceVerdict {
            chi2,
            dof,
            p_value: chi_square_p_value(chi2, dof)?,
            independent: mi <= self.threshold,
            guard_ok: table.min_expected() >= self.min_expected,
            mutual_information: Some(mi),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::discretize;
    use proptest::prelude::*;

    fn halves(n: usize) -> DiscretizedFeature {
        let values: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.0 } else { 1.0 }).collect();
        discretize(&values, 1).unwrap()
    }

    #[test]
    fn identical_halves_table() {
        let a = halves(100);
        let t = contingency(&a, &a).unwrap();
        assert_eq!(
            (
                t.observed(0, 0),
                t.observed(0, 1),
                t.observed(1, 0),
                t.observed(1, 1)
            ),
            (50, 0, 0, 50)
        );
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(t.expected(i, j), 25.0);
            }
        }
        assert_eq!(chi_square_statistic(&t).unwrap(), 100.0);
        assert!((table_mutual_information(&t) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_row_table_matches_marginals() {
        let c = discretize(&[3.0; 9], 1).unwrap();
        let b = discretize(&[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0], 3).unwrap();
        let t = contingency(&c, &b).unwrap();
        assert_eq!((t.rows(), t.cols()), (1, 3));
        for j in 0..3 {
            assert_eq!(t.observed(0, j), t.col_marginals()[j]);
            assert_eq!(t.expected(0, j), t.observed(0, j) as f64);
        }
        assert_eq!(chi_square_statistic(&t).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_two_by_two() {
        let t = ContingencyTable::from_counts(2, 2, vec![10, 20, 20, 10]).unwrap();
        assert_eq!(chi_square_statistic(&t).unwrap(), 100.0 / 15.0);
    }

    #[test]
    fn degenerate_table() {
        let t = ContingencyTable::from_counts(2, 2, vec![0, 0, 5, 5]).unwrap();
        assert!(matches!(
            chi_square_statistic(&t),
            Err(Error::DegenerateTable { row: 0, col: 0 })
        ));
    }

    #[test]
    fn p_value_critical_values() {
        assert_eq!(chi_square_p_value(0.0, 3).unwrap(), 1.0);
        assert!((chi_square_p_value(3.841, 1).unwrap() - 0.05).abs() < 1e-3);
        assert!((chi_square_p_value(13.277, 4).unwrap() - 0.01).abs() < 1e-3);
        // dof 2 is an exponential tail.
        assert!((chi_square_p_value(7.0, 2).unwrap() - (-3.5f64).exp()).abs() < 1e-15);
        assert!(chi_square_p_value(f64::NAN, 1).is_err());
        assert!(chi_square_p_value(f64::INFINITY, 1).is_err());
        assert!(chi_square_p_value(1.0, 0).is_err());
    }

    #[test]
    fn p_value_monotone_in_statistic() {
        for dof in [1u64, 2, 5, 17, 100, 2500] {
            let mut prev = 1.0;
            for step in 0..400 {
                let x = step as f64 * dof as f64 / 100.0;
                let p = chi_square_p_value(x, dof).unwrap();
                assert!(p <= prev, "dof={dof} x={x}");
                prev = p;
            }
        }
    }

    #[test]
    fn constant_is_independent_of_everything() {
        let c = discretize(&[1.0; 100], 5).unwrap();
        let a = halves(100);
        let v = is_independent(&c, &a, 0.01, 5.0, DofMode::Independence).unwrap();
        assert!(v.independent);
        assert_eq!((v.chi2, v.p_value), (0.0, 1.0));
    }

    #[test]
    fn identical_variable_is_dependent() {
        let a = halves(1000);
        let v = is_independent(&a, &a, 0.01, 5.0, DofMode::Independence).unwrap();
        assert_eq!(v.chi2, 1000.0);
        assert_eq!(v.dof, 1);
        assert!(v.p_value < 1e-6);
        assert!(!v.independent);
        assert!(v.guard_ok);
        let v = is_independent(&a, &a, 0.01, 5.0, DofMode::CellsMinusOne).unwrap();
        assert_eq!(v.dof, 3);
    }

    #[test]
    fn guard_flags_sparse_tables() {
        let a = discretize(&(0..12).map(f64::from).collect::<Vec<_>>(), 3).unwrap();
        let v = is_independent(&a, &a, 0.01, 5.0, DofMode::Independence).unwrap();
        assert!(!v.guard_ok);
    }

    #[test]
    fn alpha_out_of_range() {
        let a = halves(10);
        assert!(is_independent(&a, &a, 0.0, 5.0, DofMode::Independence).is_err());
        assert!(is_independent(&a, &a, 1.0, 5.0, DofMode::Independence).is_err());
    }

    #[test]
    fn coverage_mismatch() {
        assert!(contingency(&halves(10), &halves(12)).is_err());
        assert!(mutual_information(&halves(10), &halves(12)).is_err());
    }

    #[test]
    fn product_table_has_zero_mi_and_is_independent() {
        // a = i % 2, b = i / 2 % 3 over 600 points: exact product distribution.
        let av: Vec<f64> = (0..600).map(|i| (i % 2) as f64).collect();
        let bv: Vec<f64> = (0..600).map(|i| ((i / 2) % 3) as f64).collect();
        let a = discretize(&av, 1).unwrap();
        let b = discretize(&bv, 1).unwrap();
        assert_eq!(mutual_information(&a, &b).unwrap(), 0.0);
        for alpha in [0.001, 0.5, 0.999] {
            let v = is_independent(&a, &b, alpha, 5.0, DofMode::Independence).unwrap();
            assert!(v.independent);
            assert_eq!(v.chi2, 0.0);
        }
    }

    fn arb_pair() -> impl Strategy<Value = (DiscretizedFeature, DiscretizedFeature)> {
        (20usize..200).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u8..5, n),
                proptest::collection::vec(0u8..4, n),
            )
                .prop_map(|(a, b)| {
                    let a: Vec<f64> = a.into_iter().map(f64::from).collect();
                    let b: Vec<f64> = b.into_iter().map(f64::from).collect();
                    (discretize(&a, 1).unwrap(), discretize(&b, 1).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn symmetric_exactly((a, b) in arb_pair()) {
            let ab = contingency(&a, &b).unwrap();
            let ba = contingency(&b, &a).unwrap();
            prop_assert_eq!(&ab.transpose(), &ba);
            prop_assert_eq!(
                mutual_information(&a, &b).unwrap().to_bits(),
                mutual_information(&b, &a).unwrap().to_bits()
            );
            if !a.is_constant() && !b.is_constant() {
                prop_assert_eq!(
                    chi_square_statistic(&ab).unwrap().to_bits(),
                    chi_square_statistic(&ba).unwrap().to_bits()
                );
            }
        }

        #[test]
        fn table_conservation((a, b) in arb_pair()) {
            let t = contingency(&a, &b).unwrap();
            let mut observed = 0u64;
            let mut expected = 0.0;
            for i in 0..t.rows() {
                let mut row = 0;
                for j in 0..t.cols() {
                    observed += t.observed(i, j);
                    row += t.observed(i, j);
                    expected += t.expected(i, j);
                }
                prop_assert_eq!(row, t.row_marginals()[i]);
            }
            prop_assert_eq!(observed, t.n());
            prop_assert!((expected - t.n() as f64).abs() < 1e-9 * t.n() as f64);
        }

        #[test]
        fn relabeling_bins_keeps_chi2((a, b) in arb_pair(), shift in 1u32..5) {
            prop_assume!(!a.is_constant() && !b.is_constant());
            // Reverse a's bin order.
            let rev: Vec<f64> = a.bins().iter().map(|&x| f64::from(a.n_bins() as u32 - 1 - x) * f64::from(shift)).collect();
            let a2 = discretize(&rev, 1).unwrap();
            let x = chi_square_statistic(&contingency(&a, &b).unwrap()).unwrap();
            let y = chi_square_statistic(&contingency(&a2, &b).unwrap()).unwrap();
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }

        #[test]
        fn self_information_is_entropy((a, _b) in arb_pair()) {
            prop_assume!(!a.is_constant());
            let n = a.n_points() as f64;
            let entropy: f64 = a.bin_counts().iter().map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            }).sum();
            prop_assert!((mutual_information(&a, &a).unwrap() - entropy).abs() < 1e-12);
        }
    }
}
