// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Serialized record batches.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "ABM1" | u32 column_count | u64 row_count
//! per column:
//!   u8 dtype tag (1=Int64, 2=Float64, 3=Utf8) | u8 has_validity
//!   [ceil(row_count/8) validity bytes]   if has_validity
//!   [(row_count+1) x u32 offsets]        if Utf8
//!   u64 data_len | data_len bytes
//! ```

use std::sync::Arc;

use super::batch::{validate_batch, RecordBatch};
use super::bitmap::bitmap_len;
use super::buffer::{Buffer, MemoryTracker};
use super::column::ColumnVector;
use super::types::{DataType, SchemaRef};
use crate::error::{Error, Result};

pub const MESSAGE_MAGIC: &[u8; 4] = b"ABM1";
const HEADER_LEN: usize = 4 + 4 + 8;

/// A record batch serialized into one contiguous buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchMessage {
    bytes: Buffer,
}

impl BatchMessage {
    pub fn from_bytes(bytes: impl Into<Buffer>) -> Self {
        Self {
            bytes: bytes.into(),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn buffer(&self) -> &Buffer {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

fn encoded_len(batch: &RecordBatch) -> usize {
    HEADER_LEN
        + batch
            .columns()
            .iter()
            .map(|c| 2 + 8 + c.byte_size())
            .sum::<usize>()
}

/// Serializes a valid batch. Fails with [`Error::InvalidBatch`] otherwise.
pub fn serialize_batch(batch: &RecordBatch) -> Result<BatchMessage> {
    serialize_batch_tracked(batch, None)
}

/// [`serialize_batch`] with the message buffer charged to `tracker`.
pub fn serialize_batch_tracked(
    batch: &RecordBatch,
    tracker: Option<&Arc<MemoryTracker>>,
) -> Result<BatchMessage> {
    let violations = validate_batch(batch);
    if !violations.is_empty() {
        return Err(Error::InvalidBatch(violations));
    }
    let mut out = Vec::with_capacity(encoded_len(batch));
    out.extend_from_slice(MESSAGE_MAGIC);
    out.extend_from_slice(&(batch.num_columns() as u32).to_le_bytes());
    out.extend_from_slice(&(batch.num_rows() as u64).to_le_bytes());
    for col in batch.columns() {
        out.push(col.dtype().tag());
        match col.validity() {
            Some(v) => {
                out.push(1);
                out.extend_from_slice(v);
            }
            None => out.push(0),
        }
        if let Some(o) = col.offsets() {
            out.extend_from_slice(o);
        }
        out.extend_from_slice(&(col.data().len() as u64).to_le_bytes());
        out.extend_from_slice(col.data());
    }
    Ok(BatchMessage {
        bytes: Buffer::tracked(out, tracker),
    })
}

/// Columns decoded from a message, before they are matched to a schema.
#[derive(Debug)]
pub struct DecodedColumns {
    pub num_rows: usize,
    pub columns: Vec<ColumnVector>,
}

struct Cursor<'a> {
    buf: &'a Buffer,
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<Buffer> {
        match self.pos.checked_add(n) {
            Some(end) if end <= self.buf.len() => {
                let b = self.buf.slice(self.pos, n);
                self.pos = end;
                Ok(b)
            }
            _ => Err(Error::decode(
                self.pos,
                format!(
                    "truncated {what}: need {n} bytes, {} left",
                    self.buf.len() - self.pos
                ),
            )),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8, what)?[..].try_into().unwrap(),
        ))
    }
}

/// Decodes the columns of a message. Column buffers are slices of the message
/// buffer; nothing is copied.
pub fn decode_columns(msg: &BatchMessage) -> Result<DecodedColumns> {
    let buf = &msg.bytes;
    if buf.len() < HEADER_LEN {
        return Err(Error::decode(
            0,
            format!("truncated header: {} of {HEADER_LEN} bytes", buf.len()),
        ));
    }
    if &buf[..4] != MESSAGE_MAGIC {
        return Err(Error::decode(0, "bad magic"));
    }
    let ncols = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let nrows_u64 = u64::from_le_bytes(buf[8..16].try_into().unwrap());
    let nrows = usize::try_from(nrows_u64)
        .map_err(|_| Error::decode(8, format!("row count {nrows_u64} too large")))?;
    let mut cur = Cursor {
        buf,
        pos: HEADER_LEN,
    };
    let mut columns = Vec::with_capacity(ncols.min(4096));
    for c in 0..ncols {
        let tag_at = cur.pos;
        let tag = cur.u8(&format!("column {c} tag"))?;
        let dtype = DataType::from_tag(tag)
            .ok_or_else(|| Error::decode(tag_at, format!("column {c}: unknown dtype tag {tag}")))?;
        let flag_at = cur.pos;
        let validity = match cur.u8(&format!("column {c} validity flag"))? {
            0 => None,
            1 => Some(cur.take(bitmap_len(nrows), &format!("column {c} validity"))?),
            f => {
                return Err(Error::decode(
                    flag_at,
                    format!("column {c}: bad validity flag {f}"),
                ))
            }
        };
        let offsets = match dtype {
            DataType::Utf8 => {
                let n = nrows
                    .checked_add(1)
                    .and_then(|n| n.checked_mul(4))
                    .ok_or_else(|| Error::decode(cur.pos, "offsets length overflow"))?;
                Some(cur.take(n, &format!("column {c} offsets"))?)
            }
            _ => None,
        };
        let len_at = cur.pos;
        let data_len = cur.u64(&format!("column {c} data length"))?;
        let data_len = usize::try_from(data_len)
            .map_err(|_| Error::decode(len_at, format!("column {c}: data length too large")))?;
        let data = cur.take(data_len, &format!("column {c} data"))?;
        columns.push(ColumnVector::from_parts(
            dtype, nrows, validity, offsets, data,
        ));
    }
    if cur.pos != buf.len() {
        return Err(Error::decode(
            cur.pos,
            format!(
                "{} trailing bytes after {ncols} columns",
                buf.len() - cur.pos
            ),
        ));
    }
    Ok(DecodedColumns {
        num_rows: nrows,
        columns,
    })
}

/// Rebuilds a batch from a message against the schema both sides agreed on.
/// The result shares the message buffer and passes
/// [`validate_batch`](super::validate_batch).
pub fn deserialize_batch(msg: &BatchMessage, schema: SchemaRef) -> Result<RecordBatch> {
    let decoded = decode_columns(msg)?;
    if decoded.columns.len() != schema.len() {
        return Err(Error::decode(
            4,
            format!(
                "message has {} columns, schema has {}",
                decoded.columns.len(),
                schema.len()
            ),
        ));
    }
    let batch = RecordBatch::new_unchecked(schema, decoded.columns, decoded.num_rows);
    let violations = validate_batch(&batch);
    if let Some(v) = violations.first() {
        return Err(Error::decode(
            HEADER_LEN,
            format!("decoded batch is invalid: {v}"),
        ));
    }
    Ok(batch)
}
