// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! File discovery, format detection and schema merging.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::bridge::{Bridge, Handle, HandleKind};
use crate::columnar::{Field, Schema, SchemaRef};
use crate::error::{Error, Result};
use crate::storage::csv::infer_schema_from_reader;
use crate::storage::{
    detect_format, AcfFooter, CsvDialect, FormatKind, IoCounter, DEFAULT_SAMPLE_ROWS,
};

/// One independently scannable unit: an ACF row group or a whole CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub path: PathBuf,
    pub format: FormatKind,
    /// ACF row group index; `None` for CSV files and ACF files with no groups.
    pub row_group: Option<usize>,
    pub estimated_rows: Option<u64>,
    file_schema: SchemaRef,
    footer: Option<Arc<AcfFooter>>,
}

impl Fragment {
    /// Schema of the file this fragment lives in.
    pub fn file_schema(&self) -> &SchemaRef {
        &self.file_schema
    }

    pub(crate) fn footer(&self) -> Option<&Arc<AcfFooter>> {
        self.footer.as_ref()
    }
}

#[derive(Debug, Clone)]
pub struct OpenOptions {
    pub format_override: Option<FormatKind>,
    pub dialect: CsvDialect,
    pub sample_rows: usize,
    /// Receives every byte read from storage by this dataset and its scans.
    pub io: Option<Arc<IoCounter>>,
}

impl Default for OpenOptions {
    fn default() -> Self {
        Self {
            format_override: None,
            dialect: CsvDialect::default(),
            sample_rows: DEFAULT_SAMPLE_ROWS,
            io: None,
        }
    }
}

/// The files behind a URI, as an ordered list of fragments under one merged
/// schema. Immutable once opened.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: SchemaRef,
    fragments: Vec<Fragment>,
    source_uri: String,
    dialect: CsvDialect,
    io: Arc<IoCounter>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.fragments == other.fragments
            && self.source_uri == other.source_uri
            && self.dialect == other.dialect
    }
}

pub fn dataset_open(uri: &str, format_override: Option<FormatKind>) -> Result<Dataset> {
    Dataset::open(
        uri,
        &OpenOptions {
            format_override,
            ..OpenOptions::default()
        },
    )
}

impl Dataset {
    /// Opens a file, a directory (searched recursively, skipping names that
    /// start with `.` or `_`) or a glob pattern.
    pub fn open(uri: &str, options: &OpenOptions) -> Result<Self> {
        let io = options.io.clone().unwrap_or_default();
        let paths = discover(uri)?;
        let mut fragments = Vec::new();
        let mut schemas = Vec::with_capacity(paths.len());
        for path in paths {
            let format = match options.format_override {
                Some(f) => f,
                None => detect_format(&path, options.dialect.delimiter, &io)?,
            };
            match format {
                FormatKind::Acf => {
                    let file = File::open(&path)?;
                    let footer = Arc::new(AcfFooter::read_from(&file, &path, &io)?);
                    let file_schema = Arc::new(footer.schema.clone());
                    if footer.row_groups.is_empty() {
                        fragments.push(Fragment {
                            path: path.clone(),
                            format,
                            row_group: None,
                            estimated_rows: Some(0),
                            file_schema: Arc::clone(&file_schema),
                            footer: Some(Arc::clone(&footer)),
                        });
                    }
                    for (g, group) in footer.row_groups.iter().enumerate() {
                        fragments.push(Fragment {
                            path: path.clone(),
                            format,
                            row_group: Some(g),
                            estimated_rows: Some(group.row_count),
                            file_schema: Arc::clone(&file_schema),
                            footer: Some(Arc::clone(&footer)),
                        });
                    }
                    schemas.push(file_schema);
                }
                FormatKind::Csv => {
                    let schema = infer_schema_from_reader(
                        File::open(&path)?,
                        options.dialect,
                        options.sample_rows,
                        &io,
                    )
                    .map_err(|e| match e {
                        Error::Csv { .. } => Error::format(&path, e.to_string()),
                        e => e,
                    })?;
                    let file_schema = Arc::new(schema);
                    fragments.push(Fragment {
                        path,
                        format,
                        row_group: None,
                        estimated_rows: None,
                        file_schema: Arc::clone(&file_schema),
                        footer: None,
                    });
                    schemas.push(file_schema);
                }
            }
        }
        let merged = merge_schemas(schemas.iter().map(|s| s.as_ref()))?;
        Ok(Self {
            schema: Arc::new(merged),
            fragments,
            source_uri: uri.to_string(),
            dialect: options.dialect,
            io,
        })
    }

    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn source_uri(&self) -> &str {
        &self.source_uri
    }

    pub fn dialect(&self) -> CsvDialect {
        self.dialect
    }

    pub fn io(&self) -> &Arc<IoCounter> {
        &self.io
    }

    /// Sum of fragment row counts, when every fragment knows its own.
    pub fn estimated_rows(&self) -> Option<u64> {
        self.fragments.iter().map(|f| f.estimated_rows).sum()
    }

    /// Registers the dataset with a bridge as a `Dataset` handle.
    pub fn register(self, bridge: &Bridge) -> Handle {
        bridge.register(Arc::new(self), HandleKind::Dataset)
    }
}

fn is_hidden(name: &std::ffi::OsStr) -> bool {
    let name = name.to_string_lossy();
    name.starts_with('.') || name.starts_with('_')
}

fn discover(uri: &str) -> Result<Vec<PathBuf>> {
    let mut paths = if uri.contains(['*', '?', '[']) {
        let matches = glob::glob(uri)
            .map_err(|e| Error::InvalidArgument(format!("bad glob {uri:?}: {e}")))?;
        let mut out = Vec::new();
        for m in matches {
            let p = m.map_err(|e| Error::Io(e.into()))?;
            if p.is_file() {
                out.push(p);
            }
        }
        out
    } else {
        let root = Path::new(uri);
        if root.is_dir() {
            let mut out = Vec::new();
            let walk = walkdir::WalkDir::new(root)
                .follow_links(true)
                .into_iter()
                .filter_entry(|e| e.depth() == 0 || !is_hidden(e.file_name()));
            for entry in walk {
                let entry = entry.map_err(|e| {
                    Error::Io(e.into_io_error().unwrap_or_else(|| {
                        std::io::Error::other("filesystem loop while walking directory")
                    }))
                })?;
                if entry.file_type().is_file() {
                    out.push(entry.into_path());
                }
            }
            out
        } else if root.is_file() {
            vec![root.to_path_buf()]
        } else {
            Vec::new()
        }
    };
    if paths.is_empty() {
        return Err(Error::NoFiles(uri.to_string()));
    }
    paths.sort();
    Ok(paths)
}

/// Union of fields by name, in order of first appearance.
///
/// A name must have the same dtype everywhere. A field is nullable if it is
/// nullable in any input or missing from any input.
pub fn merge_schemas<'a>(schemas: impl IntoIterator<Item = &'a Schema>) -> Result<Schema> {
    let schemas: Vec<&Schema> = schemas.into_iter().collect();
    if schemas.is_empty() {
        return Err(Error::Schema(
            "cannot merge an empty list of schemas".into(),
        ));
    }
    let mut merged: Vec<Field> = Vec::new();
    for s in &schemas {
        for f in s.fields() {
            match merged.iter_mut().find(|m| m.name == f.name) {
                Some(m) if m.dtype != f.dtype => {
                    return Err(Error::Schema(format!(
                        "column {:?} is {} in one file and {} in another",
                        f.name, m.dtype, f.dtype
                    )))
                }
                Some(m) => m.nullable |= f.nullable,
                None => merged.push(f.clone()),
            }
        }
    }
    for m in &mut merged {
        if schemas.iter().any(|s| s.index_of(&m.name).is_none()) {
            m.nullable = true;
        }
    }
    Schema::try_new(merged)
}
