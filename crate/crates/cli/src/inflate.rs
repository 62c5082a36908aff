// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Multiplying a dataset's logical size with hardlinks.

use std::path::{Path, PathBuf};

use arrowgate_core::FormatKind;

use crate::manifest::{Manifest, ManifestFile};
use crate::{Error, IoContext, Result};

/// `part-00000.acf` -> `part-00000.link003.acf`
pub fn link_name(base: &str, index: u32) -> String {
    match base.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}.link{index:03}.{ext}"),
        None => format!("{base}.link{index:03}"),
    }
}

fn parse_link_index(name: &str) -> Option<u32> {
    let stem = name.rsplit_once('.').map_or(name, |(s, _)| s);
    let (_, idx) = stem.rsplit_once(".link")?;
    if idx.len() != 3 {
        return None;
    }
    idx.parse().ok()
}

/// Creates `dst` as a hardlink of `src`, or as a copy when linking fails and
/// `copy_fallback` is set. Returns whether a copy was made.
fn link_or_copy(src: &Path, dst: &Path, copy_fallback: bool) -> Result<bool> {
    match std::fs::hard_link(src, dst) {
        Ok(()) => Ok(false),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
        Err(_) if copy_fallback => {
            std::fs::copy(src, dst).at(dst)?;
            Ok(true)
        }
        Err(e) => Err(Error::Io {
            path: dst.to_path_buf(),
            source: e,
        }),
    }
}

/// Gives every base file of the dataset at `dir` exactly `factor` sibling
/// links, removing links above `factor` left by an earlier call, and updates
/// the manifest.
pub fn inflate(dir: &Path, factor: u32, copy_fallback: bool) -> Result<Manifest> {
    let mut manifest = Manifest::load(dir)?;
    let bases: Vec<ManifestFile> = manifest
        .files
        .iter()
        .filter(|f| f.link_of.is_none())
        .cloned()
        .collect();

    let mut copied = false;
    let mut files = Vec::with_capacity(bases.len() * (factor as usize + 1));
    for base in &bases {
        let src = dir.join(&base.path);
        let parent = src
            .parent()
            .expect("manifest paths name files")
            .to_path_buf();
        let base_name = src.file_name().unwrap().to_string_lossy().into_owned();
        let base_stem = base_name
            .rsplit_once('.')
            .map_or(base_name.as_str(), |(s, _)| s);

        for entry in std::fs::read_dir(&parent).at(&parent)? {
            let entry = entry.at(&parent)?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let stale = parse_link_index(&name).is_some_and(|i| i > factor)
                && name.starts_with(&format!("{base_stem}.link"));
            if stale {
                std::fs::remove_file(entry.path()).at(entry.path())?;
            }
        }

        files.push(base.clone());
        for i in 1..=factor {
            let name = link_name(&base_name, i);
            let dst = parent.join(&name);
            copied |= link_or_copy(&src, &dst, copy_fallback)?;
            let rel = match base.path.rsplit_once('/') {
                Some((d, _)) => format!("{d}/{name}"),
                None => name,
            };
            files.push(ManifestFile {
                path: rel,
                link_of: Some(base.path.clone()),
                ..base.clone()
            });
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    manifest.files = files;
    manifest.inflation = factor;
    manifest.copy_fallback = copied || (manifest.copy_fallback && factor > 0);
    manifest.save(dir)?;
    Ok(manifest)
}

/// A scratch directory `dir/_views/x{factor}/{format}` holding `factor + 1`
/// entries per base file of `format`, hardlinked when possible. The base
/// dataset and its manifest are left alone. Returns the directory and the
/// row count a scan of it must produce.
pub fn inflate_view(
    dir: &Path,
    manifest: &Manifest,
    format: FormatKind,
    factor: u32,
) -> Result<(PathBuf, u64)> {
    let view = dir
        .join("_views")
        .join(format!("x{factor}"))
        .join(format.to_string());
    std::fs::create_dir_all(&view).at(&view)?;
    let mut rows = 0;
    let mut wanted = Vec::new();
    for base in manifest.base_files(format) {
        let src = dir.join(&base.path);
        let flat = base.path.replace('/', "_");
        for i in 0..=factor {
            let name = link_name(&flat, i);
            link_or_copy(&src, &view.join(&name), true)?;
            wanted.push(name);
            rows += base.rows;
        }
    }
    for entry in std::fs::read_dir(&view).at(&view)? {
        let entry = entry.at(&view)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !wanted.contains(&name) {
            std::fs::remove_file(entry.path()).at(entry.path())?;
        }
    }
    Ok((view, rows))
}
