//! Tabular measurement data.
//!
//! The interchange format is a headerless CSV where every row is a variable
//! and every column is a data point. The first `n_outputs` rows are output
//! variables, the remaining rows are features. Variables are addressed by
//! their 1-based row position in that file ([`VariableId`]).

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based row position of a variable in the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(pub usize);

impl VariableId {
    /// 0-based row index.
    pub fn row(self) -> usize {
        self.0 - 1
    }

    pub fn from_row(row: usize) -> Self {
        VariableId(row + 1)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense row-major matrix of measurements. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_rows: usize,
    n_points: usize,
    n_outputs: usize,
}

impl Dataset {
    /// Builds a dataset from rows of equal length. The first `n_outputs` rows
    /// are outputs.
    pub fn from_rows(rows: Vec<Vec<f64>>, n_outputs: usize) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::EmptyInput);
        }
        let n_points = rows[0].len();
        if n_points == 0 {
            return Err(Error::EmptyInput);
        }
        if n_outputs >= n_rows {
            return Err(Error::argument(format!(
                "{n_outputs} output rows leave no feature rows in a dataset of {n_rows} rows"
            )));
        }
        let mut values = Vec::with_capacity(n_rows * n_points);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n_points {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    column: row.len().min(n_points) + 1,
                    expected: n_points,
                    found: row.len(),
                });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: r + 1,
                    column: c + 1,
                    cell: row[c].to_string(),
                });
            }
            values.extend(row);
        }
        Ok(Dataset {
            values,
            n_rows,
            n_points,
            n_outputs,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_features(&self) -> usize {
        self.n_rows - self.n_outputs
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Values of the 0-based row `r`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n_points..(r + 1) * self.n_points]
    }

    pub fn variable(&self, id: VariableId) -> &[f64] {
        self.row(id.row())
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_points)
    }

    pub fn output_ids(&self) -> impl Iterator<Item = VariableId> {
        (0..self.n_outputs).map(VariableId::from_row)
    }

    pub fn feature_ids(&self) -> impl Iterator<Item = VariableId> {
        (self.n_outputs..self.n_rows).map(VariableId::from_row)
    }

    pub fn contains(&self, id: VariableId) -> bool {
        id.0 >= 1 && id.0 <= self.n_rows
    }

    /// Parses the CSV interchange format.
    pub fn parse_csv(text: &str, n_outputs: usize) -> Result<Self> {
        let mut rows = Vec::new();
        let mut expected: Option<usize> = None;
        for (r, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(expected.unwrap_or(0));
            for (c, cell) in line.split(',').enumerate() {
                let trimmed = cell.trim();
                let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
                    row: r + 1,
                    column: c + 1,
                    cell: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: c + 1,
                        cell: cell.to_string(),
                    });
                }
                row.push(v);
            }
            match expected {
                None => expected = Some(row.len()),
                Some(n) if n != row.len() => {
                    return Err(Error::RaggedRow {
                        row: r + 1,
                        column: row.len().min(n) + 1,
                        expected: n,
                        found: row.len(),
                    })
                }
                Some(_) => {}
            }
            rows.push(row);
        }
        Self::from_rows(rows, n_outputs)
    }

    pub fn load_csv(path: impl AsRef<Path>, n_outputs: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text, n_outputs)
    }

    /// Renders the CSV interchange format. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 8);
        for row in self.rows() {
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Keeps a uniformly random subset of `round(fraction * n_points)`
    /// columns. Kept columns stay in their original relative order.
    pub fn subsample(&self, fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::argument(format!(
                "subsample fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let keep = (fraction * self.n_points as f64).round() as usize;
        if keep < 1 {
            return Err(Error::argument(format!(
                "fraction {fraction} of {} points keeps no column",
                self.n_points
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols = rand::seq::index::sample(&mut rng, self.n_points, keep).into_vec();
        cols.sort_unstable();
        let mut values = Vec::with_capacity(self.n_rows * keep);
        for row in self.rows() {
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Dataset {
            values,
            n_rows: self.n_rows,
            n_points: keep,
            n_outputs: self.n_outputs,
        })
    }
}
