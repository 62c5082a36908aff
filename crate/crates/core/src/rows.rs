// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Row-wise access over column vectors.
//!
//! A [`RowView`] borrows its cursor, so it cannot outlive the next call to
//! `next_row`. Values are read straight out of the column buffers; use
//! [`RowView::to_owned`] to extract an independent record.

use std::collections::VecDeque;

use crate::columnar::{DataType, OwnedValue, RecordBatch, SchemaRef, Value};
use crate::error::{Error, Result};
use crate::scanner::{ScanTask, Scanner};

/// Cursor over the rows of one batch.
pub struct RowCursor<'a> {
    batch: &'a RecordBatch,
    next: usize,
}

pub fn rows(batch: &RecordBatch) -> RowCursor<'_> {
    RowCursor { batch, next: 0 }
}

impl<'a> RowCursor<'a> {
    pub fn next_row(&mut self) -> Option<RowView<'_>> {
        if self.next >= self.batch.num_rows() {
            return None;
        }
        self.next += 1;
        Some(RowView {
            batch: self.batch,
            row: self.next - 1,
        })
    }

    pub fn remaining(&self) -> usize {
        self.batch.num_rows() - self.next
    }
}

/// The current row of a cursor.
#[derive(Clone, Copy)]
pub struct RowView<'a> {
    batch: &'a RecordBatch,
    row: usize,
}

impl<'a> RowView<'a> {
    /// Row index within its batch.
    pub fn index(&self) -> usize {
        self.row
    }

    pub fn width(&self) -> usize {
        self.batch.num_columns()
    }

    pub fn schema(&self) -> &SchemaRef {
        self.batch.schema()
    }

    fn column(&self, col: usize, expected: DataType) -> Result<&'a crate::columnar::ColumnVector> {
        let c = self.checked(col)?;
        if c.dtype() != expected {
            return Err(Error::TypeMismatch {
                column: col,
                expected,
                actual: c.dtype(),
            });
        }
        Ok(c)
    }

    fn checked(&self, col: usize) -> Result<&'a crate::columnar::ColumnVector> {
        self.batch
            .columns()
            .get(col)
            .ok_or(Error::ColumnOutOfRange {
                index: col,
                width: self.batch.num_columns(),
            })
    }

    /// The Int64 slot at `col`. Null slots read as whatever the buffer holds;
    /// check [`is_null`](Self::is_null) first when the column is nullable.
    pub fn get_int64(&self, col: usize) -> Result<i64> {
        Ok(self.column(col, DataType::Int64)?.i64_at(self.row))
    }

    pub fn get_f64(&self, col: usize) -> Result<f64> {
        Ok(self.column(col, DataType::Float64)?.f64_at(self.row))
    }

    /// A view into the column's string data.
    pub fn get_str(&self, col: usize) -> Result<&'a str> {
        self.column(col, DataType::Utf8)?.str_at(self.row)
    }

    pub fn is_null(&self, col: usize) -> Result<bool> {
        Ok(self.checked(col)?.is_null(self.row))
    }

    pub fn get(&self, col: usize) -> Result<Value<'a>> {
        Ok(self.checked(col)?.value(self.row))
    }

    /// Copies the row out of the batch.
    pub fn to_owned(&self) -> OwnedRow {
        OwnedRow(
            self.batch
                .columns()
                .iter()
                .map(|c| c.value(self.row).to_owned())
                .collect(),
        )
    }
}

impl std::fmt::Debug for RowView<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list()
            .entries(self.batch.columns().iter().map(|c| c.value(self.row)))
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OwnedRow(pub Vec<OwnedValue>);

impl OwnedRow {
    pub fn values(&self) -> &[OwnedValue] {
        &self.0
    }
}

/// Rows of every task of a scanner, in order. Batches are pulled on demand.
pub struct RowStream {
    tasks: VecDeque<ScanTask>,
    batch: Option<RecordBatch>,
    next: usize,
    schema: SchemaRef,
    batches_pulled: u64,
    // keeps the scanner handle alive for the stream's lifetime
    _scanner: Scanner,
}

pub fn row_stream(scanner: Scanner) -> Result<RowStream> {
    Ok(RowStream {
        tasks: scanner.tasks()?.into(),
        batch: None,
        next: 0,
        schema: scanner.schema().clone(),
        batches_pulled: 0,
        _scanner: scanner,
    })
}

impl RowStream {
    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    pub fn batches_pulled(&self) -> u64 {
        self.batches_pulled
    }

    pub fn next_row(&mut self) -> Result<Option<RowView<'_>>> {
        loop {
            if let Some(b) = &self.batch {
                if self.next < b.num_rows() {
                    break;
                }
            }
            self.batch = None;
            let Some(task) = self.tasks.front_mut() else {
                return Ok(None);
            };
            match task.next_batch()? {
                Some(b) => {
                    self.batches_pulled += 1;
                    self.batch = Some(b);
                    self.next = 0;
                }
                None => {
                    self.tasks.pop_front();
                }
            }
        }
        self.next += 1;
        Ok(Some(RowView {
            batch: self.batch.as_ref().unwrap(),
            row: self.next - 1,
        }))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::columnar::{ColumnVector, Field, Schema};

    fn batch() -> RecordBatch {
        let schema = Arc::new(
            Schema::try_new(vec![
                Field::new("i", DataType::Int64, true),
                Field::new("f", DataType::Float64, false),
                Field::new("s", DataType::Utf8, false),
            ])
            .unwrap(),
        );
        RecordBatch::try_new(
            schema,
            vec![
                ColumnVector::from_opt_i64s(&[Some(1), None, Some(3)]),
                ColumnVector::from_f64s(&[0.5, 1.5, 2.5]),
                ColumnVector::from_strs(["a", "bb", ""]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn yields_every_row() {
        let b = batch();
        let mut c = rows(&b);
        let mut seen = Vec::new();
        while let Some(r) = c.next_row() {
            seen.push((
                r.index(),
                r.get_f64(1).unwrap(),
                r.get_str(2).unwrap().to_string(),
            ));
        }
        assert_eq!(
            seen,
            [
                (0, 0.5, "a".into()),
                (1, 1.5, "bb".into()),
                (2, 2.5, String::new())
            ]
        );
    }

    #[test]
    fn empty_batch_is_exhausted() {
        let b = RecordBatch::empty(batch().schema().clone());
        assert!(rows(&b).next_row().is_none());
    }

    #[test]
    fn accessor_errors() {
        let b = batch();
        let mut c = rows(&b);
        let r = c.next_row().unwrap();
        assert!(matches!(
            r.get_int64(1),
            Err(Error::TypeMismatch { column: 1, .. })
        ));
        assert!(matches!(r.get_f64(0), Err(Error::TypeMismatch { .. })));
        assert!(matches!(
            r.get_str(9),
            Err(Error::ColumnOutOfRange { index: 9, width: 3 })
        ));
        assert!(r.is_null(3).is_err());
    }

    #[test]
    fn nulls_follow_validity() {
        let b = batch();
        let mut c = rows(&b);
        c.next_row();
        let r = c.next_row().unwrap();
        assert!(r.is_null(0).unwrap());
        assert_eq!(r.get(0).unwrap(), Value::Null);
        assert!(!r.is_null(1).unwrap());
        assert_eq!(
            r.to_owned(),
            OwnedRow(vec![
                OwnedValue::Null,
                OwnedValue::Float64(1.5),
                OwnedValue::Utf8("bb".into())
            ])
        );
    }
}
