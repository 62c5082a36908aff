// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Partitioned reads and the count queries that drive them.
//!
//! ```no_run
//! use arrowgate_core::{load, ReadConfig};
//!
//! let config = ReadConfig::builder()
//!     .with_num_partitions(100)
//!     .with_source_uri("data/people")
//!     .build()?;
//! let reader = load(&config)?;
//! let over_42 = reader.filter_count(|row| Ok(row.get_int64(1)? > 42))?;
//! # Ok::<(), arrowgate_core::Error>(())
//! ```

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::bridge::{Bridge, Handle};
use crate::dataset::{Dataset, Fragment, OpenOptions};
use crate::error::{Error, Result};
use crate::rows::{rows, RowView};
use crate::scanner::{ScanOptions, Scanner, DEFAULT_BATCH_ROWS};
use crate::storage::{CsvDialect, FormatKind, IoCounter};

pub type PartitionFn = dyn Fn(usize, &Fragment, usize) -> usize + Send + Sync;

/// Assigns fragments to partitions.
#[derive(Clone, Default)]
pub enum Partitioner {
    /// Fragment `i` goes to partition `i % P`.
    #[default]
    RoundRobin,
    /// Fragment `i` of `F` goes to partition `i * P / F`.
    Contiguous,
    /// Called with (fragment index, fragment, partition count).
    Custom(Arc<PartitionFn>),
}

impl fmt::Debug for Partitioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partitioner::RoundRobin => f.write_str("RoundRobin"),
            Partitioner::Contiguous => f.write_str("Contiguous"),
            Partitioner::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Partitioner {
    pub fn custom(f: impl Fn(usize, &Fragment, usize) -> usize + Send + Sync + 'static) -> Self {
        Partitioner::Custom(Arc::new(f))
    }

    fn assign(&self, fragments: &[Fragment], partitions: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new(); partitions];
        let n = fragments.len();
        for (i, frag) in fragments.iter().enumerate() {
            let p = match self {
                Partitioner::RoundRobin => i % partitions,
                Partitioner::Contiguous => i * partitions / n,
                Partitioner::Custom(f) => f(i, frag, partitions),
            };
            if p >= partitions {
                return Err(Error::Partition {
                    fragment: i,
                    partition: p,
                    num_partitions: partitions,
                });
            }
            out[p].push(i);
        }
        Ok(out)
    }
}

/// Worker threads used when no width is configured: `ARROWGATE_POOL`, or the
/// number of available cores.
pub fn default_pool_width() -> usize {
    std::env::var("ARROWGATE_POOL")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone)]
pub struct ReadConfig {
    pub source_uri: String,
    /// Defaults to the number of fragments.
    pub num_partitions: Option<usize>,
    pub partitioner: Partitioner,
    pub batch_rows: usize,
    pub projection: Option<Vec<String>>,
    pub format_override: Option<FormatKind>,
    pub dialect: CsvDialect,
    /// Defaults to [`default_pool_width`].
    pub pool_width: Option<usize>,
    pub boundary_latency: Duration,
}

impl ReadConfig {
    pub fn builder() -> ReadConfigBuilder {
        ReadConfigBuilder::default()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReadConfigBuilder {
    source_uri: Option<String>,
    num_partitions: Option<usize>,
    partitioner: Partitioner,
    batch_rows: Option<usize>,
    projection: Option<Vec<String>>,
    format_override: Option<FormatKind>,
    dialect: CsvDialect,
    pool_width: Option<usize>,
    boundary_latency: Duration,
}

impl ReadConfigBuilder {
    pub fn with_source_uri(mut self, uri: impl Into<String>) -> Self {
        self.source_uri = Some(uri.into());
        self
    }

    pub fn with_num_partitions(mut self, n: usize) -> Self {
        self.num_partitions = Some(n);
        self
    }

    pub fn with_partitioner(mut self, p: Partitioner) -> Self {
        self.partitioner = p;
        self
    }

    pub fn with_batch_rows(mut self, rows: usize) -> Self {
        self.batch_rows = Some(rows);
        self
    }

    pub fn with_projection<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.projection = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_format_override(mut self, format: FormatKind) -> Self {
        self.format_override = Some(format);
        self
    }

    pub fn with_dialect(mut self, dialect: CsvDialect) -> Self {
        self.dialect = dialect;
        self
    }

    pub fn with_pool_width(mut self, width: usize) -> Self {
        self.pool_width = Some(width);
        self
    }

    pub fn with_boundary_latency(mut self, latency: Duration) -> Self {
        self.boundary_latency = latency;
        self
    }

    pub fn build(self) -> Result<ReadConfig> {
        let source_uri = self
            .source_uri
            .ok_or_else(|| Error::InvalidArgument("read config needs a source uri".into()))?;
        if self.num_partitions == Some(0) {
            return Err(Error::InvalidArgument(
                "num_partitions must be at least 1".into(),
            ));
        }
        if self.pool_width == Some(0) {
            return Err(Error::InvalidArgument(
                "pool width must be at least 1".into(),
            ));
        }
        let batch_rows = self.batch_rows.unwrap_or(DEFAULT_BATCH_ROWS);
        if batch_rows == 0 {
            return Err(Error::InvalidArgument(
                "batch_rows must be at least 1".into(),
            ));
        }
        Ok(ReadConfig {
            source_uri,
            num_partitions: self.num_partitions,
            partitioner: self.partitioner,
            batch_rows,
            projection: self.projection,
            format_override: self.format_override,
            dialect: self.dialect,
            pool_width: self.pool_width,
            boundary_latency: self.boundary_latency,
        })
    }
}

/// Opens the configured source on a fresh bridge.
pub fn load(config: &ReadConfig) -> Result<PartitionedReader> {
    load_with(config, &Bridge::new(), None)
}

/// Opens the configured source on `bridge`, counting storage reads into `io`.
pub fn load_with(
    config: &ReadConfig,
    bridge: &Arc<Bridge>,
    io: Option<Arc<IoCounter>>,
) -> Result<PartitionedReader> {
    let dataset = Dataset::open(
        &config.source_uri,
        &OpenOptions {
            format_override: config.format_override,
            dialect: config.dialect,
            io,
            ..OpenOptions::default()
        },
    )?;
    let num_partitions = config
        .num_partitions
        .unwrap_or(dataset.fragments().len())
        .max(1);
    let partitions = config
        .partitioner
        .assign(dataset.fragments(), num_partitions)?;
    let options = ScanOptions {
        batch_rows: config.batch_rows,
        projection: config.projection.clone(),
        boundary_latency: config.boundary_latency,
        memory: None,
    };
    let dataset = Arc::new(dataset);
    let handle = bridge.register(Arc::clone(&dataset), crate::bridge::HandleKind::Dataset);
    // validate the projection before any scan starts
    drop(Scanner::with_fragments(
        bridge,
        handle,
        options.clone(),
        Some(Vec::new()),
    )?);
    Ok(PartitionedReader {
        bridge: Arc::clone(bridge),
        dataset,
        handle,
        partitions,
        options,
        pool_width: config.pool_width.unwrap_or_else(default_pool_width),
    })
}

/// A dataset split into disjoint fragment lists, scanned by a worker pool.
pub struct PartitionedReader {
    bridge: Arc<Bridge>,
    dataset: Arc<Dataset>,
    handle: Handle,
    partitions: Vec<Vec<usize>>,
    options: ScanOptions,
    pool_width: usize,
}

impl PartitionedReader {
    pub fn partitions(&self) -> &[Vec<usize>] {
        &self.partitions
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn bridge(&self) -> &Arc<Bridge> {
        &self.bridge
    }

    pub fn options(&self) -> &ScanOptions {
        &self.options
    }

    /// Runs `work` once per partition on up to `pool_width` threads and sums
    /// the results.
    fn run<F>(&self, options: &ScanOptions, work: F) -> Result<u64>
    where
        F: Fn(Scanner) -> Result<u64> + Sync,
    {
        let next = AtomicUsize::new(0);
        let total = AtomicUsize::new(0);
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let workers = self.pool_width.min(self.partitions.len()).max(1);
        let worker = || loop {
            if failure.lock().unwrap().is_some() {
                return;
            }
            let p = next.fetch_add(1, Ordering::Relaxed);
            let Some(fragments) = self.partitions.get(p) else {
                return;
            };
            if fragments.is_empty() {
                continue;
            }
            let result = Scanner::with_fragments(
                &self.bridge,
                self.handle,
                options.clone(),
                Some(fragments.clone()),
            )
            .and_then(&work);
            match result {
                Ok(n) => {
                    total.fetch_add(n as usize, Ordering::Relaxed);
                }
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    return;
                }
            }
        };
        if workers == 1 {
            worker();
        } else {
            std::thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(worker);
                }
            });
        }
        match failure.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(total.into_inner() as u64),
        }
    }

    pub fn count(&self) -> Result<u64> {
        self.run(&self.options, |s| s.count().map(|c| c.rows))
    }

    /// Counts rows for which `predicate` holds. Predicate errors are reported
    /// with the fragment index and the row's ordinal within the fragment.
    pub fn filter_count<P>(&self, predicate: P) -> Result<u64>
    where
        P: Fn(&RowView<'_>) -> Result<bool> + Sync,
    {
        self.run(&self.options, |scanner| {
            let mut hits = 0;
            for mut task in scanner.tasks()? {
                let fragment = task.fragment_index();
                let mut ordinal = 0u64;
                while let Some(batch) = task.next_batch()? {
                    let mut cursor = rows(&batch);
                    while let Some(row) = cursor.next_row() {
                        let keep = predicate(&row).map_err(|e| Error::AtRow {
                            fragment,
                            row: ordinal,
                            source: Box::new(e),
                        })?;
                        hits += keep as u64;
                        ordinal += 1;
                    }
                }
            }
            Ok(hits)
        })
    }

    /// Row count of a scan restricted to `columns`.
    pub fn project_count<S: AsRef<str>>(&self, columns: &[S]) -> Result<u64> {
        let options = ScanOptions {
            projection: Some(columns.iter().map(|c| c.as_ref().to_string()).collect()),
            ..self.options.clone()
        };
        self.run(&options, |s| s.count().map(|c| c.rows))
    }
}

impl Drop for PartitionedReader {
    fn drop(&mut self) {
        let _ = self.bridge.release(self.handle);
    }
}
