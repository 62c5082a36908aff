// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Lazy batched scans.
//!
//! The native side ([`ScannerState`], [`TaskState`]) lives in the bridge
//! registry. [`Scanner`] and [`ScanTask`] are the consumer-side handles: every
//! batch they return was serialized once by the native side and deserialized
//! without copying column data.

use std::fs::File;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::bridge::{Bridge, Handle, HandleKind};
use crate::columnar::{
    deserialize_batch, ColumnVector, DataType, MemoryTracker, RecordBatch, Schema, SchemaRef,
};
use crate::dataset::{Dataset, Fragment};
use crate::error::{Error, Result};
use crate::storage::{CsvBatchReader, FormatKind, GroupBatchReader, PositionedReader};

pub const DEFAULT_BATCH_ROWS: usize = 8192;

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub batch_rows: usize,
    /// Output columns by name, in output order. `None` scans every column.
    pub projection: Option<Vec<String>>,
    /// Emulated fixed cost of each call across the boundary.
    pub boundary_latency: Duration,
    /// Accounts for every batch buffer allocated by the scan.
    pub memory: Option<Arc<MemoryTracker>>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            batch_rows: DEFAULT_BATCH_ROWS,
            projection: None,
            boundary_latency: Duration::ZERO,
            memory: None,
        }
    }
}

impl ScanOptions {
    pub fn with_batch_rows(mut self, rows: usize) -> Self {
        self.batch_rows = rows;
        self
    }

    pub fn with_projection<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.projection = Some(names.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_boundary_latency(mut self, latency: Duration) -> Self {
        self.boundary_latency = latency;
        self
    }

    pub fn with_memory(mut self, tracker: Arc<MemoryTracker>) -> Self {
        self.memory = Some(tracker);
        self
    }

    /// Checks the options against `schema` and returns the output column
    /// indices, or `None` for the full schema.
    fn resolve(&self, schema: &Schema) -> Result<Option<Vec<usize>>> {
        if self.batch_rows == 0 {
            return Err(Error::InvalidArgument(
                "batch_rows must be at least 1".into(),
            ));
        }
        let Some(names) = &self.projection else {
            return Ok(None);
        };
        let mut indices = Vec::with_capacity(names.len());
        for name in names {
            let i = schema
                .index_of(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            if indices.contains(&i) {
                return Err(Error::InvalidArgument(format!(
                    "column {name:?} projected twice"
                )));
            }
            indices.push(i);
        }
        let identity =
            indices.len() == schema.len() && indices.iter().enumerate().all(|(k, &i)| k == i);
        Ok((!identity).then_some(indices))
    }
}

/// Native scanner object.
pub struct ScannerState {
    dataset: Arc<Dataset>,
    options: ScanOptions,
    output: SchemaRef,
    fragments: Vec<usize>,
    tasks_taken: AtomicBool,
}

/// Where each output column comes from within one fragment.
#[derive(Debug, Clone, Copy)]
enum ColumnSource {
    /// Index into the columns the storage reader produces.
    Read(usize),
    /// Absent from this file: filled with nulls.
    Null(DataType),
}

enum FragmentReader {
    Unopened,
    Acf(GroupBatchReader),
    Csv(Box<CsvBatchReader<PositionedReader>>),
    Exhausted,
}

/// Native per-fragment cursor.
pub struct TaskState {
    dataset: Arc<Dataset>,
    fragment: usize,
    options: ScanOptions,
    output: SchemaRef,
    reader: Mutex<FragmentReader>,
}

impl TaskState {
    /// Maps output columns onto the fragment's file schema, returning the file
    /// columns to read and the source of every output column.
    fn plan(&self) -> (Vec<usize>, Vec<ColumnSource>) {
        let file_schema = self.fragment().file_schema();
        let mut read = Vec::new();
        let sources = self
            .output
            .fields()
            .iter()
            .map(|f| match file_schema.index_of(&f.name) {
                Some(i) => {
                    read.push(i);
                    ColumnSource::Read(read.len() - 1)
                }
                None => ColumnSource::Null(f.dtype),
            })
            .collect();
        (read, sources)
    }

    fn fragment(&self) -> &Fragment {
        &self.dataset.fragments()[self.fragment]
    }

    fn open(&self) -> Result<FragmentReader> {
        let frag = self.fragment();
        let (read, _) = self.plan();
        let io = Arc::clone(self.dataset.io());
        let file = Arc::new(File::open(&frag.path)?);
        match (frag.format, frag.row_group) {
            (FormatKind::Acf, None) => Ok(FragmentReader::Exhausted),
            (FormatKind::Acf, Some(g)) => {
                let footer = frag.footer().expect("acf fragment without footer");
                Ok(FragmentReader::Acf(GroupBatchReader::open(
                    file,
                    &footer.schema,
                    &footer.row_groups[g],
                    Some(&read),
                    self.options.batch_rows,
                    io,
                    self.options.memory.clone(),
                )?))
            }
            (FormatKind::Csv, _) => {
                let len = file.metadata()?.len();
                let source = PositionedReader::new(file, 0, len, io);
                let reader = CsvBatchReader::new(
                    source,
                    Arc::clone(frag.file_schema()),
                    self.dataset.dialect(),
                    self.options.batch_rows,
                )?
                .with_projection(&read)?
                .with_tracker(self.options.memory.clone());
                Ok(FragmentReader::Csv(Box::new(reader)))
            }
        }
    }

    /// Produces the next native batch in the output schema.
    fn next_native(&self) -> Result<Option<RecordBatch>> {
        let mut reader = self.reader.lock().unwrap();
        if matches!(*reader, FragmentReader::Unopened) {
            *reader = self.open()?;
        }
        let raw = match &mut *reader {
            FragmentReader::Acf(r) => r.next_batch(),
            FragmentReader::Csv(r) => r.next_batch(),
            FragmentReader::Unopened | FragmentReader::Exhausted => Ok(None),
        };
        let raw = match raw {
            Ok(Some(b)) => b,
            Ok(None) => {
                *reader = FragmentReader::Exhausted;
                return Ok(None);
            }
            Err(e) => {
                *reader = FragmentReader::Exhausted;
                return Err(e);
            }
        };
        drop(reader);
        let (_, sources) = self.plan();
        let rows = raw.num_rows();
        let columns: Vec<ColumnVector> = sources
            .iter()
            .map(|s| match *s {
                ColumnSource::Read(k) => raw.column(k).clone(),
                ColumnSource::Null(dtype) => {
                    ColumnVector::nulls_tracked(dtype, rows, self.options.memory.as_ref())
                }
            })
            .collect();
        drop(raw);
        Ok(Some(RecordBatch::new_unchecked(
            Arc::clone(&self.output),
            columns,
            rows,
        )))
    }
}

/// Consumer-side handle to a registered scanner. Releases it on drop.
pub struct Scanner {
    bridge: Arc<Bridge>,
    handle: Handle,
    schema: SchemaRef,
}

impl Scanner {
    /// Creates a scanner over every fragment of the dataset behind
    /// `dataset`. Performs no storage I/O.
    pub fn new(bridge: &Arc<Bridge>, dataset: Handle, options: ScanOptions) -> Result<Self> {
        Self::with_fragments(bridge, dataset, options, None)
    }

    /// Like [`new`](Self::new), restricted to the given fragment indices.
    pub fn with_fragments(
        bridge: &Arc<Bridge>,
        dataset: Handle,
        options: ScanOptions,
        fragments: Option<Vec<usize>>,
    ) -> Result<Self> {
        check_kind(dataset, HandleKind::Dataset)?;
        let ds: Arc<Dataset> = bridge.resolve(dataset)?;
        let indices = options.resolve(ds.schema())?;
        let output = match &indices {
            Some(i) => Arc::new(ds.schema().project(i)?),
            None => Arc::clone(ds.schema()),
        };
        let fragments = match fragments {
            Some(f) => {
                if let Some(&bad) = f.iter().find(|&&i| i >= ds.fragments().len()) {
                    return Err(Error::InvalidArgument(format!(
                        "fragment {bad} out of range for {} fragments",
                        ds.fragments().len()
                    )));
                }
                f
            }
            None => (0..ds.fragments().len()).collect(),
        };
        let state = ScannerState {
            dataset: ds,
            options,
            output: Arc::clone(&output),
            fragments,
            tasks_taken: AtomicBool::new(false),
        };
        let handle = bridge.register(Arc::new(state), HandleKind::Scanner);
        Ok(Self {
            bridge: Arc::clone(bridge),
            handle,
            schema: output,
        })
    }

    pub fn handle(&self) -> Handle {
        self.handle
    }

    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    pub fn bridge(&self) -> &Arc<Bridge> {
        &self.bridge
    }

    /// One task per fragment, in fragment order. Can be called once per
    /// scanner; creating tasks performs no storage I/O.
    pub fn tasks(&self) -> Result<Vec<ScanTask>> {
        let state: Arc<ScannerState> = self.bridge.resolve(self.handle)?;
        if state.tasks_taken.swap(true, Ordering::AcqRel) {
            return Err(Error::TasksTaken);
        }
        Ok(state
            .fragments
            .iter()
            .map(|&fragment| {
                let task = TaskState {
                    dataset: Arc::clone(&state.dataset),
                    fragment,
                    options: state.options.clone(),
                    output: Arc::clone(&state.output),
                    reader: Mutex::new(FragmentReader::Unopened),
                };
                ScanTask {
                    bridge: Arc::clone(&self.bridge),
                    handle: self.bridge.register(Arc::new(task), HandleKind::ScanTask),
                    schema: Arc::clone(&self.schema),
                    fragment,
                }
            })
            .collect())
    }

    /// Counts rows by draining every task in order, one batch at a time.
    pub fn count(self) -> Result<ScanSummary> {
        let mut summary = ScanSummary::default();
        for mut task in self.tasks()? {
            while let Some(batch) = task.next_batch()? {
                summary.rows += batch.num_rows() as u64;
                summary.batches += 1;
            }
        }
        Ok(summary)
    }
}

impl Drop for Scanner {
    fn drop(&mut self) {
        let _ = self.bridge.release(self.handle);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanSummary {
    pub rows: u64,
    pub batches: u64,
}

/// Total row count of a scan; consumes the scanner.
pub fn scan_count(scanner: Scanner) -> Result<u64> {
    scanner.count().map(|s| s.rows)
}

/// Consumer-side handle to one fragment's cursor. Releases it on drop.
pub struct ScanTask {
    bridge: Arc<Bridge>,
    handle: Handle,
    schema: SchemaRef,
    fragment: usize,
}

impl ScanTask {
    pub fn handle(&self) -> Handle {
        self.handle
    }

    /// Index of this task's fragment in the dataset.
    pub fn fragment_index(&self) -> usize {
        self.fragment
    }

    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    /// Pulls the next batch across the boundary, or `None` at the end of the
    /// fragment.
    pub fn next_batch(&mut self) -> Result<Option<RecordBatch>> {
        let task: Arc<TaskState> = self.bridge.resolve(self.handle)?;
        if !task.options.boundary_latency.is_zero() {
            std::thread::sleep(task.options.boundary_latency);
        }
        let Some(native) = task.next_native()? else {
            return Ok(None);
        };
        let (batch_handle, message) = self
            .bridge
            .transfer_batch_tracked(&native, task.options.memory.as_ref())?;
        drop(native);
        let batch = deserialize_batch(&message, Arc::clone(&self.schema));
        self.bridge.release(batch_handle)?;
        batch.map(Some)
    }
}

impl Iterator for ScanTask {
    type Item = Result<RecordBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_batch().transpose()
    }
}

impl Drop for ScanTask {
    fn drop(&mut self) {
        let _ = self.bridge.release(self.handle);
    }
}

fn check_kind(handle: Handle, expected: HandleKind) -> Result<()> {
    if handle.kind() != expected {
        return Err(Error::HandleKind {
            expected,
            actual: handle.kind(),
        });
    }
    Ok(())
}
