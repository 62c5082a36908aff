// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fmt;
use std::sync::Arc;

use super::bitmap::bitmap_len;
use super::column::ColumnVector;
use super::types::{DataType, Schema, SchemaRef};
use crate::error::{Error, Result};

/// Equal-length columns sharing a schema. Immutable once built.
#[derive(Clone)]
pub struct RecordBatch {
    schema: SchemaRef,
    columns: Vec<ColumnVector>,
    num_rows: usize,
}

/// One broken batch invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ColumnCount {
        expected: usize,
        actual: usize,
    },
    UnequalColumnLengths {
        column: usize,
        expected: usize,
        actual: usize,
    },
    DtypeMismatch {
        column: usize,
        expected: DataType,
        actual: DataType,
    },
    DataLength {
        column: usize,
        expected: usize,
        actual: usize,
    },
    ValidityLength {
        column: usize,
        expected: usize,
        actual: usize,
    },
    MissingOffsets {
        column: usize,
    },
    UnexpectedOffsets {
        column: usize,
    },
    OffsetsLength {
        column: usize,
        expected: usize,
        actual: usize,
    },
    OffsetsStart {
        column: usize,
        first: u32,
    },
    OffsetsNotMonotone {
        column: usize,
        index: usize,
    },
    OffsetsTerminal {
        column: usize,
        last: u32,
        data_len: usize,
    },
    InvalidUtf8 {
        column: usize,
        row: usize,
    },
    NullInNonNullable {
        column: usize,
        row: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            ColumnCount { expected, actual } => {
                write!(f, "column count mismatch: schema has {expected}, batch has {actual}")
            }
            UnequalColumnLengths { column, expected, actual } => write!(
                f,
                "unequal column lengths: column {column} has {actual} rows, expected {expected}"
            ),
            DtypeMismatch { column, expected, actual } => write!(
                f,
                "dtype mismatch: column {column} is {actual}, schema says {expected}"
            ),
            DataLength { column, expected, actual } => write!(
                f,
                "data length mismatch: column {column} has {actual} bytes, expected {expected}"
            ),
            ValidityLength { column, expected, actual } => write!(
                f,
                "validity length mismatch: column {column} has {actual} bytes, expected {expected}"
            ),
            MissingOffsets { column } => write!(f, "missing offsets: utf8 column {column}"),
            UnexpectedOffsets { column } => {
                write!(f, "unexpected offsets on fixed-width column {column}")
            }
            OffsetsLength { column, expected, actual } => write!(
                f,
                "offsets length mismatch: column {column} has {actual} bytes, expected {expected}"
            ),
            OffsetsStart { column, first } => {
                write!(f, "offsets start mismatch: column {column} starts at {first}")
            }
            OffsetsNotMonotone { column, index } => {
                write!(f, "offsets not monotone: column {column} decreases at {index}")
            }
            OffsetsTerminal { column, last, data_len } => write!(
                f,
                "offsets terminal mismatch: column {column} ends at {last}, data has {data_len} bytes"
            ),
            InvalidUtf8 { column, row } => write!(f, "invalid utf8: column {column}, row {row}"),
            NullInNonNullable { column, row } => {
                write!(f, "null in non-nullable column {column} at row {row}")
            }
        }
    }
}

fn read_u32(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes(b[i * 4..i * 4 + 4].try_into().unwrap())
}

/// Every invariant the column breaks on its own (no schema involved).
fn column_violations(idx: usize, col: &ColumnVector, out: &mut Vec<Violation>) {
    let len = col.len();
    if let Some(v) = col.validity() {
        if v.len() != bitmap_len(len) {
            out.push(Violation::ValidityLength {
                column: idx,
                expected: bitmap_len(len),
                actual: v.len(),
            });
        }
    }
    match col.dtype().byte_width() {
        Some(w) => {
            if col.offsets().is_some() {
                out.push(Violation::UnexpectedOffsets { column: idx });
            }
            if col.data().len() != len * w {
                out.push(Violation::DataLength {
                    column: idx,
                    expected: len * w,
                    actual: col.data().len(),
                });
            }
        }
        None => {
            let Some(offsets) = col.offsets() else {
                out.push(Violation::MissingOffsets { column: idx });
                return;
            };
            if offsets.len() != (len + 1) * 4 {
                out.push(Violation::OffsetsLength {
                    column: idx,
                    expected: (len + 1) * 4,
                    actual: offsets.len(),
                });
                return;
            }
            let first = read_u32(offsets, 0);
            if first != 0 {
                out.push(Violation::OffsetsStart { column: idx, first });
            }
            let mut prev = first;
            let mut monotone = true;
            for i in 1..=len {
                let o = read_u32(offsets, i);
                if o < prev {
                    out.push(Violation::OffsetsNotMonotone {
                        column: idx,
                        index: i,
                    });
                    monotone = false;
                    break;
                }
                prev = o;
            }
            let last = read_u32(offsets, len);
            if last as usize != col.data().len() {
                out.push(Violation::OffsetsTerminal {
                    column: idx,
                    last,
                    data_len: col.data().len(),
                });
            } else if monotone && first == 0 {
                // offsets are sound, so every slot can be checked
                let validity_ok = col.validity().is_none_or(|v| v.len() == bitmap_len(len));
                for row in 0..len {
                    if validity_ok && col.is_null(row) {
                        continue;
                    }
                    let s = &col.data()
                        [read_u32(offsets, row) as usize..read_u32(offsets, row + 1) as usize];
                    if std::str::from_utf8(s).is_err() {
                        out.push(Violation::InvalidUtf8 { column: idx, row });
                        break;
                    }
                }
            }
        }
    }
}

/// Checks every batch invariant and returns all violations found.
pub fn validate_batch(batch: &RecordBatch) -> Vec<Violation> {
    let mut out = Vec::new();
    let fields = batch.schema.fields();
    if fields.len() != batch.columns.len() {
        out.push(Violation::ColumnCount {
            expected: fields.len(),
            actual: batch.columns.len(),
        });
    }
    for (idx, col) in batch.columns.iter().enumerate() {
        if col.len() != batch.num_rows {
            out.push(Violation::UnequalColumnLengths {
                column: idx,
                expected: batch.num_rows,
                actual: col.len(),
            });
        }
        if let Some(field) = fields.get(idx) {
            if field.dtype != col.dtype() {
                out.push(Violation::DtypeMismatch {
                    column: idx,
                    expected: field.dtype,
                    actual: col.dtype(),
                });
            }
        }
        let before = out.len();
        column_violations(idx, col, &mut out);
        let sound = out.len() == before;
        if sound && fields.get(idx).is_some_and(|f| !f.nullable) && col.validity().is_some() {
            if let Some(row) = (0..col.len()).find(|&r| col.is_null(r)) {
                out.push(Violation::NullInNonNullable { column: idx, row });
            }
        }
    }
    out
}

impl RecordBatch {
    /// Builds a batch, rejecting it if any invariant is broken. The row count
    /// is taken from the first column (0 when there are none).
    pub fn try_new(schema: SchemaRef, columns: Vec<ColumnVector>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        Self::try_new_with_rows(schema, columns, rows)
    }

    /// Like [`try_new`](Self::try_new) with an explicit row count, needed for
    /// batches with no columns.
    pub fn try_new_with_rows(
        schema: SchemaRef,
        columns: Vec<ColumnVector>,
        num_rows: usize,
    ) -> Result<Self> {
        let batch = Self::new_unchecked(schema, columns, num_rows);
        let violations = validate_batch(&batch);
        if violations.is_empty() {
            Ok(batch)
        } else {
            Err(Error::InvalidBatch(violations))
        }
    }

    /// Assembles a batch without validation.
    pub fn new_unchecked(schema: SchemaRef, columns: Vec<ColumnVector>, num_rows: usize) -> Self {
        Self {
            schema,
            columns,
            num_rows,
        }
    }

    pub fn empty(schema: SchemaRef) -> Self {
        let columns = schema
            .fields()
            .iter()
            .map(|f| match f.dtype {
                DataType::Int64 => ColumnVector::from_i64s(&[]),
                DataType::Float64 => ColumnVector::from_f64s(&[]),
                DataType::Utf8 => ColumnVector::from_strs([]),
            })
            .collect();
        Self::new_unchecked(schema, columns, 0)
    }

    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    pub fn columns(&self) -> &[ColumnVector] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &ColumnVector {
        &self.columns[i]
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    /// Bytes held by all column buffers.
    pub fn byte_size(&self) -> usize {
        self.columns.iter().map(|c| c.byte_size()).sum()
    }
}

impl PartialEq for RecordBatch {
    fn eq(&self, other: &Self) -> bool {
        self.num_rows == other.num_rows
            && self.schema == other.schema
            && self.columns == other.columns
    }
}

impl fmt::Debug for RecordBatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecordBatch")
            .field("schema", &format_args!("{}", self.schema))
            .field("num_rows", &self.num_rows)
            .field("columns", &self.columns)
            .finish()
    }
}

/// Projects `batch` to the given column indices, in order. Column buffers are
/// shared with the input, never copied.
pub fn select_columns(batch: &RecordBatch, indices: &[usize]) -> Result<RecordBatch> {
    let width = batch.num_columns();
    let mut seen = vec![false; width];
    for &i in indices {
        if i >= width {
            return Err(Error::ColumnOutOfRange { index: i, width });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!(
                "duplicate column index {i}"
            )));
        }
    }
    let schema: Schema = batch.schema.project(indices)?;
    let columns = indices.iter().map(|&i| batch.columns[i].clone()).collect();
    Ok(RecordBatch::new_unchecked(
        Arc::new(schema),
        columns,
        batch.num_rows,
    ))
}
