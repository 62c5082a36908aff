// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use arrowgate_cli::{generate, GenSpec};
use arrowgate_core::{Codec, FormatKind};
use tempfile::TempDir;

/// A generated dataset that is deleted when dropped.
pub struct Fixture {
    _dir: TempDir,
    pub root: PathBuf,
}

impl Fixture {
    pub fn new(rows: u64, cols: u32, format: FormatKind, codec: Codec) -> Self {
        let dir = tempfile::tempdir().expect("temporary directory");
        let spec = GenSpec {
            formats: vec![format],
            codec,
            ..GenSpec::new(rows, cols, rows.div_ceil(4).max(1), dir.path())
        };
        generate(&spec).expect("fixture generation");
        Self {
            root: dir.path().to_path_buf(),
            _dir: dir,
        }
    }

    /// URI of the fixture's files of `format`.
    pub fn uri(&self, format: FormatKind) -> String {
        self.root
            .join(format.to_string())
            .to_string_lossy()
            .into_owned()
    }
}
