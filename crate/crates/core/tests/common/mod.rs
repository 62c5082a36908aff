// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use arrowgate_core::columnar::ColumnBuilder;
use arrowgate_core::storage::{write_acf, CsvDialect, CsvWriter};
use arrowgate_core::{
    Bridge, Codec, DataType, Field, OwnedValue, RecordBatch, ScanOptions, Scanner, Schema,
    SchemaRef,
};
use proptest::prelude::*;

/// A table held row-major, as the independent oracle for scans.
#[derive(Debug, Clone)]
pub struct Table {
    pub schema: SchemaRef,
    pub rows: Vec<Vec<OwnedValue>>,
}

impl Table {
    /// Splits the rows into batches of `chunk` rows (at least one batch).
    pub fn batches(&self, chunk: usize) -> Vec<RecordBatch> {
        let mut out = Vec::new();
        let mut start = 0;
        loop {
            let end = (start + chunk).min(self.rows.len());
            let columns = self
                .schema
                .fields()
                .iter()
                .enumerate()
                .map(|(c, f)| {
                    let mut b = ColumnBuilder::new(f.dtype);
                    for row in &self.rows[start..end] {
                        b.append_value(row[c].as_value()).unwrap();
                    }
                    b.finish()
                })
                .collect();
            out.push(
                RecordBatch::try_new_with_rows(Arc::clone(&self.schema), columns, end - start)
                    .unwrap(),
            );
            start = end;
            if start >= self.rows.len() {
                return out;
            }
        }
    }

    pub fn project(&self, cols: &[usize]) -> Vec<Vec<OwnedValue>> {
        self.rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect()
    }

    pub fn write_acf(&self, path: &Path, codec: Codec, rows_per_group: usize) {
        write_acf(
            path,
            Arc::clone(&self.schema),
            self.batches(97),
            codec,
            rows_per_group,
        )
        .unwrap();
    }

    pub fn write_csv(&self, path: &Path) {
        let mut w = CsvWriter::new(
            std::io::BufWriter::new(std::fs::File::create(path).unwrap()),
            CsvDialect::default(),
        );
        w.write_header(&self.schema).unwrap();
        for b in self.batches(97) {
            w.write_batch(&b).unwrap();
        }
        w.finish().unwrap();
    }
}

fn value_strategy(dtype: DataType, nullable: bool) -> BoxedStrategy<OwnedValue> {
    let v: BoxedStrategy<OwnedValue> = match dtype {
        DataType::Int64 => any::<i64>().prop_map(OwnedValue::Int64).boxed(),
        DataType::Float64 => prop_oneof![
            (-1e6f64..1e6).prop_map(OwnedValue::Float64),
            any::<f64>()
                .prop_filter("finite", |f| f.is_finite())
                .prop_map(OwnedValue::Float64),
        ]
        .boxed(),
        // a leading letter keeps inference from reading strings as numbers
        DataType::Utf8 => "s[a-z0-9 é]{0,8}".prop_map(OwnedValue::Utf8).boxed(),
    };
    if nullable {
        prop_oneof![4 => v, 1 => Just(OwnedValue::Null)].boxed()
    } else {
        v
    }
}

fn dtype_strategy() -> impl Strategy<Value = DataType> {
    prop_oneof![
        Just(DataType::Int64),
        Just(DataType::Float64),
        Just(DataType::Utf8)
    ]
}

/// Random tables whose first row has no nulls, so CSV schema inference
/// recovers every column type.
pub fn table_strategy(max_cols: usize, max_rows: usize) -> impl Strategy<Value = Table> {
    proptest::collection::vec((dtype_strategy(), any::<bool>()), 1..=max_cols).prop_flat_map(
        move |spec| {
            let schema = Arc::new(
                Schema::try_new(
                    spec.iter()
                        .enumerate()
                        .map(|(i, (d, n))| Field::new(format!("c{i}"), *d, *n))
                        .collect(),
                )
                .unwrap(),
            );
            let first: Vec<_> = spec
                .iter()
                .map(|(d, _)| value_strategy(*d, false))
                .collect();
            let row: Vec<_> = spec.iter().map(|(d, n)| value_strategy(*d, *n)).collect();
            (first, proptest::collection::vec(row, 0..max_rows)).prop_map(move |(first, rest)| {
                let mut rows = vec![first];
                rows.extend(rest);
                Table {
                    schema: Arc::clone(&schema),
                    rows,
                }
            })
        },
    )
}

pub fn batch_rows(batch: &RecordBatch) -> impl Iterator<Item = Vec<OwnedValue>> + '_ {
    (0..batch.num_rows()).map(move |r| {
        batch
            .columns()
            .iter()
            .map(|c| c.value(r).to_owned())
            .collect()
    })
}

/// Every row of a full scan, in order.
pub fn scan_rows(
    uri: &str,
    format: Option<arrowgate_core::FormatKind>,
    options: ScanOptions,
) -> Vec<Vec<OwnedValue>> {
    let bridge = Bridge::new();
    let ds = arrowgate_core::dataset_open(uri, format)
        .unwrap()
        .register(&bridge);
    let scanner = Scanner::new(&bridge, ds, options).unwrap();
    let mut out = Vec::new();
    for task in scanner.tasks().unwrap() {
        for b in task {
            out.extend(batch_rows(&b.unwrap()));
        }
    }
    out
}
