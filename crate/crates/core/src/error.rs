// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use thiserror::Error;
use uuid::Uuid;

use crate::bridge::HandleKind;
use crate::columnar::{DataType, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid batch: {}", display_violations(.0))]
    InvalidBatch(Vec<Violation>),

    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: u64, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("codec error: {0}")]
    Codec(String),

    /// Structural problem with an ACF file (trailer, footer, chunk sizes).
    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("csv parse error at line {line}, column {column}: {message}")]
    Csv {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("unknown format: {0}")]
    UnknownFormat(String),

    #[error("no files matched {0}")]
    NoFiles(String),

    #[error("unknown column: {0}")]
    UnknownColumn(String),

    #[error("column index {index} out of range for {width} columns")]
    ColumnOutOfRange { index: usize, width: usize },

    #[error("type mismatch on column {column}: expected {expected:?}, found {actual:?}")]
    TypeMismatch {
        column: usize,
        expected: DataType,
        actual: DataType,
    },

    #[error("dangling handle {0}")]
    DanglingHandle(Uuid),

    #[error("double release of handle {0}")]
    DoubleRelease(Uuid),

    #[error("unknown handle {0}")]
    UnknownHandle(Uuid),

    #[error("handle kind mismatch: expected {expected:?}, found {actual:?}")]
    HandleKind {
        expected: HandleKind,
        actual: HandleKind,
    },

    #[error("tasks already taken")]
    TasksTaken,

    #[error("partitioner assigned fragment {fragment} to partition {partition}, but only {num_partitions} exist")]
    Partition {
        fragment: usize,
        partition: usize,
        num_partitions: usize,
    },

    #[error("fragment {fragment}, row {row}: {source}")]
    AtRow {
        fragment: usize,
        row: u64,
        #[source]
        source: Box<Error>,
    },
}

fn display_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn decode(offset: usize, message: impl Into<String>) -> Self {
        Error::Decode {
            offset: offset as u64,
            message: message.into(),
        }
    }

    pub(crate) fn format(path: &std::path::Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}
