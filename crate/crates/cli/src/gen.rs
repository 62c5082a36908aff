// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Seeded synthetic datasets of Int64 columns.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arrowgate_core::storage::{AcfWriter, CsvWriter};
use arrowgate_core::{
    Codec, ColumnVector, CsvDialect, DataType, Field, FormatKind, RecordBatch, Schema, SchemaRef,
};
use serde::{Deserialize, Serialize};

use crate::manifest::{sha256_file, Manifest, ManifestFile};
use crate::{Error, IoContext, Result};

pub const DEFAULT_ROWS_PER_GROUP: u64 = 65536;
pub const DEFAULT_VALUE_BOUND: u64 = 1 << 32;
const GEN_BATCH_ROWS: u64 = 65536;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub rows: u64,
    pub cols: u32,
    pub rows_per_file: u64,
    pub formats: Vec<FormatKind>,
    pub codec: Codec,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(default = "default_rows_per_group")]
    pub rows_per_group: u64,
    /// Values are drawn from `0..value_bound`.
    #[serde(default = "default_value_bound")]
    pub value_bound: u64,
}

fn default_rows_per_group() -> u64 {
    DEFAULT_ROWS_PER_GROUP
}

fn default_value_bound() -> u64 {
    DEFAULT_VALUE_BOUND
}

impl GenSpec {
    pub fn new(rows: u64, cols: u32, rows_per_file: u64, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            rows,
            cols,
            rows_per_file,
            formats: vec![FormatKind::Acf, FormatKind::Csv],
            codec: Codec::None,
            seed: 42,
            out_dir: out_dir.into(),
            rows_per_group: DEFAULT_ROWS_PER_GROUP,
            value_bound: DEFAULT_VALUE_BOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Spec(m.to_string()));
        if self.cols == 0 {
            return bad("cols must be at least 1");
        }
        if self.rows_per_file == 0 {
            return bad("rows_per_file must be at least 1");
        }
        if self.rows_per_group == 0 {
            return bad("rows_per_group must be at least 1");
        }
        if self.value_bound == 0 {
            return bad("value_bound must be at least 1");
        }
        if self.formats.is_empty() {
            return bad("at least one format is required");
        }
        Ok(())
    }

    /// Files per format. A zero-row spec still gets one (empty) file.
    pub fn num_files(&self) -> u64 {
        self.rows.div_ceil(self.rows_per_file).max(1)
    }

    pub fn schema(&self) -> SchemaRef {
        let fields = (0..self.cols)
            .map(|c| Field::new(format!("c{c}"), DataType::Int64, false))
            .collect();
        Arc::new(Schema::try_new(fields).expect("generated names are unique"))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One column's values: a 64-bit LCG (Knuth's MMIX constants) whose high
/// half is reduced into `0..bound`.
#[derive(Debug, Clone)]
pub struct ValueStream {
    state: u64,
    bound: u64,
}

impl ValueStream {
    const A: u64 = 6364136223846793005;
    const C: u64 = 1442695040888963407;

    pub fn new(seed: u64, column: u32, bound: u64) -> Self {
        Self {
            state: splitmix64(seed ^ splitmix64(column as u64 + 1)),
            bound,
        }
    }

    pub fn next_value(&mut self) -> i64 {
        self.state = self.state.wrapping_mul(Self::A).wrapping_add(Self::C);
        ((self.state >> 32) % self.bound) as i64
    }
}

/// Every generated value in row order, column by column per row.
pub fn replay(spec: &GenSpec) -> impl Iterator<Item = Vec<i64>> {
    let mut streams: Vec<ValueStream> = (0..spec.cols)
        .map(|c| ValueStream::new(spec.seed, c, spec.value_bound))
        .collect();
    (0..spec.rows).map(move |_| streams.iter_mut().map(|s| s.next_value()).collect())
}

pub fn file_name(index: u64, format: FormatKind) -> String {
    format!("part-{index:05}.{format}")
}

enum Sink {
    Acf(AcfWriter),
    Csv(CsvWriter<BufWriter<File>>),
}

/// Writes the dataset under `out_dir/{acf,csv}/` and the manifest at
/// `out_dir/_manifest.json`. Existing files with the same names are replaced.
pub fn generate(spec: &GenSpec) -> Result<Manifest> {
    spec.validate()?;
    let schema = spec.schema();
    let mut formats = spec.formats.clone();
    formats.sort_by_key(|f| f.to_string());
    formats.dedup();
    for f in &formats {
        let dir = spec.out_dir.join(f.to_string());
        std::fs::create_dir_all(&dir).at(&dir)?;
    }

    let mut streams: Vec<ValueStream> = (0..spec.cols)
        .map(|c| ValueStream::new(spec.seed, c, spec.value_bound))
        .collect();
    let mut files = Vec::new();
    let mut remaining = spec.rows;
    for index in 0..spec.num_files() {
        let file_rows = remaining.min(spec.rows_per_file);
        remaining -= file_rows;
        let mut sinks = Vec::with_capacity(formats.len());
        for &format in &formats {
            let path = spec
                .out_dir
                .join(format.to_string())
                .join(file_name(index, format));
            let sink = match format {
                FormatKind::Acf => Sink::Acf(AcfWriter::create(
                    &path,
                    Arc::clone(&schema),
                    spec.codec,
                    spec.rows_per_group as usize,
                )?),
                FormatKind::Csv => {
                    let out = BufWriter::with_capacity(1 << 20, File::create(&path).at(&path)?);
                    let mut w = CsvWriter::new(out, CsvDialect::default());
                    w.write_header(&schema)?;
                    Sink::Csv(w)
                }
            };
            sinks.push((format, path, sink));
        }

        let mut left = file_rows;
        let mut values = vec![0i64; GEN_BATCH_ROWS.min(file_rows) as usize];
        while left > 0 {
            let n = left.min(GEN_BATCH_ROWS) as usize;
            left -= n as u64;
            let columns = streams
                .iter_mut()
                .map(|s| {
                    for v in &mut values[..n] {
                        *v = s.next_value();
                    }
                    ColumnVector::from_i64s(&values[..n])
                })
                .collect();
            let batch = RecordBatch::try_new_with_rows(Arc::clone(&schema), columns, n)?;
            for (_, _, sink) in &mut sinks {
                match sink {
                    Sink::Acf(w) => w.write(&batch)?,
                    Sink::Csv(w) => w.write_batch(&batch)?,
                }
            }
        }

        for (format, path, sink) in sinks {
            match sink {
                Sink::Acf(w) => {
                    w.finish()?;
                }
                Sink::Csv(w) => {
                    let out = w.finish()?;
                    out.into_inner()
                        .map_err(|e| e.into_error())
                        .at(&path)?
                        .sync_all()
                        .at(&path)?;
                }
            }
            files.push(describe(&spec.out_dir, &path, format, file_rows, None)?);
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        // the manifest lives in out_dir, so it records no path to it
        spec: GenSpec {
            out_dir: PathBuf::new(),
            ..spec.clone()
        },
        base_rows: spec.rows,
        files,
        inflation: 0,
        copy_fallback: false,
    };
    manifest.save(&spec.out_dir)?;
    Ok(manifest)
}

pub(crate) fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

pub(crate) fn describe(
    root: &Path,
    path: &Path,
    format: FormatKind,
    rows: u64,
    link_of: Option<String>,
) -> Result<ManifestFile> {
    let bytes = std::fs::metadata(path).at(path)?.len();
    Ok(ManifestFile {
        path: relative(root, path),
        format,
        rows,
        bytes,
        sha256: sha256_file(path)?,
        link_of,
    })
}
