// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Columnar ingestion with a lazy batched scanner.
//!
//! Data flows through the crate in the same order a read request does:
//!
//! 1. [`dataset`] discovers files behind a path or glob, detects their format
//!    and merges their schemas into a [`Dataset`](dataset::Dataset) of
//!    scannable fragments.
//! 2. [`bridge`] registers native objects behind opaque UUID handles and moves
//!    every batch across the boundary as exactly one serialized
//!    [`BatchMessage`](columnar::BatchMessage).
//! 3. [`scanner`] reads fragments lazily in fixed-size record batches, pushing
//!    column projection down into [`storage`].
//! 4. [`rows`] wraps the received column vectors for row-wise access without
//!    materializing rows.
//! 5. [`query`] is a small row-oriented consumer: partitioned reads with
//!    count, filter-count and projection-count queries.

pub mod bridge;
pub mod columnar;
pub mod dataset;
pub mod error;
pub mod query;
pub mod rows;
pub mod scanner;
pub mod storage;

pub use bridge::{Bridge, BridgeStats, Handle, HandleKind};
pub use columnar::{
    deserialize_batch, select_columns, serialize_batch, validate_batch, BatchMessage, Buffer,
    ColumnVector, DataType, Field, MemoryTracker, OwnedValue, RecordBatch, Schema, SchemaRef,
    Value, Violation,
};

pub use dataset::{dataset_open, merge_schemas, Dataset, Fragment, OpenOptions};
pub use error::{Error, Result};
pub use query::{load, load_with, PartitionedReader, Partitioner, ReadConfig};
pub use rows::{row_stream, rows, OwnedRow, RowCursor, RowStream, RowView};
pub use scanner::{scan_count, ScanOptions, ScanSummary, ScanTask, Scanner};
pub use storage::{Codec, CsvDialect, FormatKind, IoCounter, IoSnapshot};
