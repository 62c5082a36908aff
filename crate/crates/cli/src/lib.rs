// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Dataset generation, hardlink inflation and the experiment runner behind
//! the `arrowgate` command.

pub mod baseline;
pub mod gen;
pub mod inflate;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod stats;

use std::path::PathBuf;

pub use gen::{generate, GenSpec, ValueStream};
pub use inflate::{inflate, inflate_view};
pub use manifest::{Manifest, ManifestFile};
pub use report::{BenchReport, RunRecord, Summary};
pub use runner::{run, Experiment, RunSpec};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] arrowgate_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("checksum mismatch for {path}: manifest has {expected}, file has {actual}")]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("{experiment} {config}: run {run} counted {actual} rows, manifest expects {expected}")]
    CountMismatch {
        experiment: String,
        config: String,
        run: usize,
        expected: u64,
        actual: u64,
    },

    #[error("invalid spec: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}
