// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Timed, count-verified experiment runs over generated datasets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use arrowgate_core::query::default_pool_width;
use arrowgate_core::storage::{read_acf_footer, read_row_group, write_acf};
use arrowgate_core::{
    load_with, Bridge, Codec, Dataset, FormatKind, IoCounter, OpenOptions, ReadConfig,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::naive_csv_count;
use crate::inflate::inflate_view;
use crate::manifest::Manifest;
use crate::report::{filesystem_of, BenchReport, BridgeCounters, ReportMeta, RunRecord, Summary};
use crate::stats::Stats;
use crate::{Error, IoContext, Result};

pub const DEFAULT_REPS: usize = 31;
pub const DEFAULT_BATCH_ROWS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    E1,
    E2,
    E3,
    E4,
    E5,
    Scan,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::E1 => "e1",
            Experiment::E2 => "e2",
            Experiment::E3 => "e3",
            Experiment::E4 => "e4",
            Experiment::E5 => "e5",
            Experiment::Scan => "scan",
        }
    }

    /// The swept values when none are given.
    pub fn default_sweep(self) -> Vec<u64> {
        match self {
            Experiment::E1 => (5..=15).map(|p| 1u64 << p).collect(),
            Experiment::E2 | Experiment::E3 => vec![0, 1, 3],
            Experiment::E5 => vec![1, 2, 5, 10, 25, 50, 100],
            Experiment::E4 | Experiment::Scan => Vec::new(),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "e1" => Experiment::E1,
            "e2" => Experiment::E2,
            "e3" => Experiment::E3,
            "e4" => Experiment::E4,
            "e5" => Experiment::E5,
            "scan" | "raw-scan" => Experiment::Scan,
            other => return Err(Error::Spec(format!("unknown experiment {other:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub data: PathBuf,
    pub repetitions: usize,
    pub discard_first: bool,
    pub batch_rows: usize,
    /// Batch sizes for E1, inflation factors for E2 and E3, projection widths
    /// for E5. Empty means the experiment's default.
    pub sweep: Vec<u64>,
    pub codecs: Vec<Codec>,
    /// Format scanned by `scan`; ACF when the dataset has it.
    pub format: Option<FormatKind>,
    pub projection: Option<Vec<String>>,
    pub partitions: Option<usize>,
    pub pool: Option<usize>,
    pub boundary_latency: Duration,
    /// Print one line per configuration to stderr.
    pub progress: bool,
}

impl RunSpec {
    pub fn new(experiment: Experiment, data: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            data: data.into(),
            repetitions: DEFAULT_REPS,
            discard_first: true,
            batch_rows: DEFAULT_BATCH_ROWS,
            sweep: Vec::new(),
            codecs: vec![Codec::None, Codec::FastLz, Codec::Deflate],
            format: None,
            projection: None,
            partitions: None,
            pool: None,
            boundary_latency: Duration::ZERO,
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 || (self.discard_first && self.repetitions < 2) {
            return Err(Error::Spec(
                "repetitions must be at least 2 when the first run is discarded".into(),
            ));
        }
        if self.batch_rows == 0 {
            return Err(Error::Spec("batch_rows must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Scanner,
    NaiveCsv,
}

/// Everything that determines what a run reads and how. Two runs with equal
/// configs do the same work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Dataset directory relative to the data root.
    pub dataset: String,
    pub format: FormatKind,
    pub method: Method,
    pub batch_rows: usize,
    /// `None` means every column, in schema order.
    pub projection: Option<Vec<String>>,
    pub partitions: Option<usize>,
    pub pool: usize,
    pub boundary_latency_ns: u64,
}

impl RunConfig {
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(json)[..8])
    }
}

struct Planned {
    series: &'static str,
    x: String,
    config: RunConfig,
    expected_rows: u64,
}

/// Drops a projection that names every column in order.
fn normalize_projection(
    projection: Option<Vec<String>>,
    columns: &[String],
) -> Option<Vec<String>> {
    projection.filter(|p| p.as_slice() != columns)
}

/// Rewrites every base ACF file into `data/_codecs/{codec}`, reusing files a
/// previous call already produced.
fn transcode(data: &Path, manifest: &Manifest, codec: Codec) -> Result<String> {
    let rel = format!("_codecs/{codec}");
    let dir = data.join(&rel);
    std::fs::create_dir_all(&dir).at(&dir)?;
    for base in manifest.base_files(FormatKind::Acf) {
        let src = data.join(&base.path);
        let dst = dir.join(base.path.replace('/', "_"));
        if let Ok(existing) = read_acf_footer(&dst) {
            let codecs_match = existing
                .row_groups
                .iter()
                .all(|g| g.columns.iter().all(|c| c.codec == codec));
            if codecs_match && existing.total_rows == base.rows {
                continue;
            }
        }
        let footer = read_acf_footer(&src)?;
        let file = std::fs::File::open(&src).at(&src)?;
        let io = IoCounter::new();
        let groups = footer
            .row_groups
            .iter()
            .map(|g| read_row_group(&file, g, &footer.schema, None, &io));
        let batches = groups.collect::<std::result::Result<Vec<_>, _>>()?;
        write_acf(
            &dst,
            Arc::new(footer.schema.clone()),
            &batches,
            codec,
            manifest.spec.rows_per_group as usize,
        )?;
    }
    Ok(rel)
}

fn plan(spec: &RunSpec, manifest: &Manifest) -> Result<Vec<Planned>> {
    let data = &spec.data;
    let columns: Vec<String> = manifest
        .spec
        .schema()
        .fields()
        .iter()
        .map(|f| f.name.clone())
        .collect();
    let pool = spec.pool.unwrap_or_else(default_pool_width);
    let scanner = |dataset: String,
                   format: FormatKind,
                   batch_rows: usize,
                   projection: Option<Vec<String>>| RunConfig {
        dataset,
        format,
        method: Method::Scanner,
        batch_rows,
        projection: normalize_projection(projection, &columns),
        partitions: spec.partitions,
        pool,
        boundary_latency_ns: spec.boundary_latency.as_nanos() as u64,
    };
    let sweep = if spec.sweep.is_empty() {
        spec.experiment.default_sweep()
    } else {
        spec.sweep.clone()
    };
    let need = |format: FormatKind| -> Result<()> {
        if manifest.has_format(format) {
            Ok(())
        } else {
            Err(Error::Spec(format!(
                "dataset at {} has no {format} files",
                data.display()
            )))
        }
    };
    let base_rows =
        |format: FormatKind| -> u64 { manifest.base_files(format).map(|f| f.rows).sum() };

    let mut out = Vec::new();
    match spec.experiment {
        Experiment::E1 => {
            need(FormatKind::Acf)?;
            for &b in &sweep {
                if b == 0 {
                    return Err(Error::Spec("batch sizes must be at least 1".into()));
                }
                out.push(Planned {
                    series: "scanner",
                    x: b.to_string(),
                    config: scanner(
                        "acf".into(),
                        FormatKind::Acf,
                        b as usize,
                        spec.projection.clone(),
                    ),
                    expected_rows: manifest.logical_rows(FormatKind::Acf),
                });
            }
        }
        Experiment::E2 | Experiment::E3 => {
            let format = if spec.experiment == Experiment::E2 {
                FormatKind::Acf
            } else {
                FormatKind::Csv
            };
            need(format)?;
            for &x in &sweep {
                let factor = u32::try_from(x)
                    .map_err(|_| Error::Spec(format!("inflation factor {x} too large")))?;
                let (_, rows) = inflate_view(data, manifest, format, factor)?;
                let rel = format!("_views/x{factor}/{format}");
                out.push(Planned {
                    series: "scanner",
                    x: ((factor as u64 + 1) * base_rows(format)).to_string(),
                    config: scanner(
                        rel.clone(),
                        format,
                        spec.batch_rows,
                        spec.projection.clone(),
                    ),
                    expected_rows: rows,
                });
                if format == FormatKind::Csv {
                    out.push(Planned {
                        series: "naive_csv",
                        x: ((factor as u64 + 1) * base_rows(format)).to_string(),
                        config: RunConfig {
                            dataset: rel,
                            format,
                            method: Method::NaiveCsv,
                            batch_rows: 0,
                            projection: None,
                            partitions: None,
                            pool: 1,
                            boundary_latency_ns: 0,
                        },
                        expected_rows: rows,
                    });
                }
            }
        }
        Experiment::E4 => {
            need(FormatKind::Acf)?;
            for &codec in &spec.codecs {
                let rel = transcode(data, manifest, codec)?;
                out.push(Planned {
                    series: "scanner",
                    x: codec.to_string(),
                    config: scanner(
                        rel,
                        FormatKind::Acf,
                        spec.batch_rows,
                        spec.projection.clone(),
                    ),
                    expected_rows: base_rows(FormatKind::Acf),
                });
            }
        }
        Experiment::E5 => {
            need(FormatKind::Acf)?;
            for &w in &sweep {
                let w = w as usize;
                if w == 0 || w > columns.len() {
                    continue;
                }
                out.push(Planned {
                    series: "scanner",
                    x: w.to_string(),
                    config: scanner(
                        "acf".into(),
                        FormatKind::Acf,
                        spec.batch_rows,
                        Some(columns[..w].to_vec()),
                    ),
                    expected_rows: manifest.logical_rows(FormatKind::Acf),
                });
            }
        }
        Experiment::Scan => {
            let format = spec
                .format
                .unwrap_or(if manifest.has_format(FormatKind::Acf) {
                    FormatKind::Acf
                } else {
                    FormatKind::Csv
                });
            need(format)?;
            out.push(Planned {
                series: "scanner",
                x: format.to_string(),
                config: scanner(
                    format.to_string(),
                    format,
                    spec.batch_rows,
                    spec.projection.clone(),
                ),
                expected_rows: manifest.logical_rows(format),
            });
        }
    }
    Ok(out)
}

struct Measured {
    elapsed: Duration,
    rows: u64,
    bytes_read: u64,
    bridge: BridgeCounters,
}

fn measure(data: &Path, config: &RunConfig, csv_files: &[(PathBuf, u64)]) -> Result<Measured> {
    match config.method {
        Method::Scanner => {
            let mut builder = ReadConfig::builder()
                .with_source_uri(data.join(&config.dataset).to_string_lossy())
                .with_format_override(config.format)
                .with_batch_rows(config.batch_rows)
                .with_pool_width(config.pool)
                .with_boundary_latency(Duration::from_nanos(config.boundary_latency_ns));
            if let Some(p) = config.partitions {
                builder = builder.with_num_partitions(p);
            }
            if let Some(p) = &config.projection {
                builder = builder.with_projection(p.iter().cloned());
            }
            let read = builder.build()?;
            let bridge = Bridge::new();
            let io = IoCounter::new();
            let reader = load_with(&read, &bridge, Some(Arc::clone(&io)))?;
            let before = io.snapshot();
            let start = Instant::now();
            let rows = reader.count()?;
            let elapsed = start.elapsed();
            let bytes_read = io.snapshot().since(&before).data_bytes;
            drop(reader);
            let s = bridge.stats();
            Ok(Measured {
                elapsed,
                rows,
                bytes_read,
                bridge: BridgeCounters {
                    registered: s.registered,
                    released: s.released,
                    batch_copies: s.batch_copies,
                    live: s.live,
                },
            })
        }
        Method::NaiveCsv => {
            let start = Instant::now();
            let mut rows = 0;
            for (path, _) in csv_files {
                rows += naive_csv_count(path)?;
            }
            Ok(Measured {
                elapsed: start.elapsed(),
                rows,
                bytes_read: csv_files.iter().map(|(_, b)| b).sum(),
                bridge: BridgeCounters::default(),
            })
        }
    }
}

/// Runs every configuration of the experiment `repetitions` times and checks
/// each run's row count against the manifest. A wrong count aborts the run.
pub fn run(spec: &RunSpec) -> Result<BenchReport> {
    spec.validate()?;
    let manifest = Manifest::load(&spec.data)?;
    for format in [FormatKind::Acf, FormatKind::Csv] {
        manifest.verify(&spec.data, format)?;
    }
    let planned = plan(spec, &manifest)?;
    let experiment = spec.experiment.name().to_string();

    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for p in planned {
        let fingerprint = p.config.fingerprint();
        let csv_files = match p.config.method {
            Method::NaiveCsv => {
                let ds = Dataset::open(
                    &spec.data.join(&p.config.dataset).to_string_lossy(),
                    &OpenOptions {
                        format_override: Some(FormatKind::Csv),
                        ..OpenOptions::default()
                    },
                )?;
                ds.fragments()
                    .iter()
                    .map(|f| {
                        let len = std::fs::metadata(&f.path).at(&f.path)?.len();
                        Ok((f.path.clone(), len))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            Method::Scanner => Vec::new(),
        };

        let mut samples = Vec::with_capacity(spec.repetitions);
        let mut last = None;
        for run in 0..spec.repetitions {
            let m = measure(&spec.data, &p.config, &csv_files)?;
            if m.rows != p.expected_rows {
                return Err(Error::CountMismatch {
                    experiment: experiment.clone(),
                    config: fingerprint,
                    run,
                    expected: p.expected_rows,
                    actual: m.rows,
                });
            }
            if spec.discard_first && run == 0 {
                continue;
            }
            samples.push(m.elapsed.as_nanos() as f64);
            runs.push(RunRecord {
                experiment: experiment.clone(),
                config: fingerprint.clone(),
                run,
                elapsed_ns: m.elapsed.as_nanos() as u64,
                rows: m.rows,
                bytes_read: m.bytes_read,
                batch_copies: m.bridge.batch_copies,
            });
            last = Some(m);
        }
        let last = last.expect("at least one measured run");
        let stats = Stats::from_samples(&samples);
        if spec.progress {
            eprintln!(
                "{experiment} {} x={}: median {:.3} ms, p1 {:.3} ms, p99 {:.3} ms ({} runs)",
                p.series,
                p.x,
                stats.median / 1e6,
                stats.p1 / 1e6,
                stats.p99 / 1e6,
                stats.n
            );
        }
        summaries.push(Summary {
            experiment: experiment.clone(),
            config: fingerprint,
            series: p.series.to_string(),
            x: p.x,
            params: p.config,
            runs: samples.len(),
            elapsed_ns: stats,
            rows: last.rows,
            bytes_read: last.bytes_read,
            bridge: last.bridge,
        });
    }

    Ok(BenchReport {
        meta: ReportMeta {
            data_dir: spec.data.to_string_lossy().into_owned(),
            filesystem: filesystem_of(&spec.data),
            repetitions: spec.repetitions,
            discard_first: spec.discard_first,
        },
        summaries,
        runs,
    })
}
