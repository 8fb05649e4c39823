use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::VariableId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input")]
    EmptyInput,

    #[error(
        "row {row}: expected {expected} columns, found {found} (first offending column {column})"
    )]
    RaggedRow {
        row: usize,
        column: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {cell:?} as a finite number")]
    Parse {
        row: usize,
        column: usize,
        cell: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("variable {0} is constant and cannot be part of a dependency graph")]
    ConstantNode(VariableId),

    #[error("graph is complete, it has no vertex cut")]
    NoCutExists,

    #[error("contingency table has an empty expected cell at ({row}, {col})")]
    DegenerateTable { row: usize, col: usize },

    #[error("dataset has no output rows")]
    NoOutputs,

    #[error("variable {id}")]
    Variable {
        id: VariableId,
        #[source]
        source: Box<Error>,
    },

    #[error("robust run {run}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
