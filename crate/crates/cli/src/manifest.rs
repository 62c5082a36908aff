// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use arrowgate_core::FormatKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gen::GenSpec;
use crate::{Error, IoContext, Result};

pub const MANIFEST_NAME: &str = "_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    /// Relative to the dataset root, with `/` separators.
    pub path: String,
    pub format: FormatKind,
    pub rows: u64,
    pub bytes: u64,
    pub sha256: String,
    /// For inflation links and copies: the file they duplicate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: GenSpec,
    /// Rows per format before inflation.
    pub base_rows: u64,
    pub files: Vec<ManifestFile>,
    #[serde(default)]
    pub inflation: u32,
    /// Set when inflation had to copy files instead of linking them.
    #[serde(default)]
    pub copy_fallback: bool,
}

impl Manifest {
    pub fn path(root: &Path) -> PathBuf {
        root.join(MANIFEST_NAME)
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = Self::path(root);
        let text = std::fs::read(&path).at(&path)?;
        serde_json::from_slice(&text)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, root: &Path) -> Result<()> {
        let path = Self::path(root);
        let mut text = serde_json::to_vec_pretty(self).expect("manifest serializes");
        text.push(b'\n');
        std::fs::write(&path, text).at(&path)
    }

    pub fn base_files(&self, format: FormatKind) -> impl Iterator<Item = &ManifestFile> {
        self.files
            .iter()
            .filter(move |f| f.format == format && f.link_of.is_none())
    }

    /// Rows a scan of every file of `format` must count.
    pub fn logical_rows(&self, format: FormatKind) -> u64 {
        self.files
            .iter()
            .filter(|f| f.format == format)
            .map(|f| f.rows)
            .sum()
    }

    pub fn has_format(&self, format: FormatKind) -> bool {
        self.base_files(format).next().is_some()
    }

    /// Re-hashes every base file of `format` and compares with the manifest.
    pub fn verify(&self, root: &Path, format: FormatKind) -> Result<()> {
        for f in self.base_files(format) {
            let path = root.join(&f.path);
            let actual = sha256_file(&path)?;
            if actual != f.sha256 {
                return Err(Error::Checksum {
                    path,
                    expected: f.sha256.clone(),
                    actual,
                });
            }
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut reader = BufReader::with_capacity(1 << 20, File::open(path).at(path)?);
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = reader.read(&mut buf).at(path)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
