//! Discretization of continuous measurements into ordinal bins holding at
//! least `nu` points each.

use rayon::prelude::*;

use crate::dataset::{Dataset, VariableId};
use crate::error::{Error, Result};

/// Ordinal bin assignment of one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedFeature {
    bins: Vec<u32>,
    n_bins: usize,
    is_constant: bool,
}

impl DiscretizedFeature {
    /// Per-point bin index in original point order.
    pub fn bins(&self) -> &[u32] {
        &self.bins
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Set when the variable carries no contingency information: either all
    /// measurements are equal, or no bin could reach `nu` points so that
    /// everything collapsed into one bin.
    pub fn is_constant(&self) -> bool {
        self.is_constant
    }

    pub fn n_points(&self) -> usize {
        self.bins.len()
    }

    /// Number of points in each bin.
    pub fn bin_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_bins];
        for &b in &self.bins {
            counts[b as usize] += 1;
        }
        counts
    }

    fn constant(n_points: usize) -> Self {
        DiscretizedFeature {
            bins: vec![0; n_points],
            n_bins: 1,
            is_constant: true,
        }
    }
}

/// Bins `values` so that every bin holds at least `nu` points and equal values
/// never straddle a bin boundary. A trailing remainder smaller than `nu` joins
/// the last full bin.
pub fn discretize(values: &[f64], nu: usize) -> Result<DiscretizedFeature> {
    if values.is_empty() {
        return Err(Error::argument("cannot discretize an empty sequence"));
    }
    if nu == 0 {
        return Err(Error::argument("nu must be at least 1"));
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if max <= min {
        return Ok(DiscretizedFeature::constant(values.len()));
    }

    // Stable sort: ties keep their original point order.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    // Bin boundaries as end positions (exclusive) into `order`.
    let mut ends: Vec<usize> = Vec::new();
    let mut start = 0;
    let n = order.len();
    while n - start >= nu {
        let mut end = start + nu;
        let last = values[order[end - 1]];
        while end < n && values[order[end]] <= last {
            end += 1;
        }
        ends.push(end);
        start = end;
    }
    match ends.last_mut() {
        // Remainder (possibly empty) joins the last full bin.
        Some(last) => *last = n,
        None => return Ok(DiscretizedFeature::constant(values.len())),
    }
    if ends.len() == 1 {
        return Ok(DiscretizedFeature::constant(values.len()));
    }

    let mut bins = vec![0u32; n];
    let mut begin = 0;
    for (b, &end) in ends.iter().enumerate() {
        for &p in &order[begin..end] {
            bins[p] = b as u32;
        }
        begin = end;
    }
    Ok(DiscretizedFeature {
        bins,
        n_bins: ends.len(),
        is_constant: false,
    })
}

/// Discretizes every row of the dataset, outputs included, in row order.
pub fn discretize_all(ds: &Dataset, nu: usize) -> Result<Vec<DiscretizedFeature>> {
    (0..ds.n_rows())
        .into_par_iter()
        .map(|r| {
            discretize(ds.row(r), nu).map_err(|e| Error::Variable {
                id: VariableId::from_row(r),
                source: Box::new(e),
            })
        })
        .collect()
}
