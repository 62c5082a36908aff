// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Logical types, column vectors, record batches and the batch message
//! format exchanged across the bridge.

mod batch;
pub(crate) mod bitmap;
mod buffer;
mod column;
mod message;
mod types;

pub use batch::{select_columns, validate_batch, RecordBatch, Violation};
pub use bitmap::{bit_is_set, bitmap_len, set_bit};
pub use buffer::{Buffer, MemorySnapshot, MemoryTracker};
pub use column::{ColumnBuilder, ColumnVector, OwnedValue, Value};
pub use message::{
    decode_columns, deserialize_batch, serialize_batch, serialize_batch_tracked, BatchMessage,
    DecodedColumns, MESSAGE_MAGIC,
};
pub use types::{DataType, Field, Schema, SchemaRef};
