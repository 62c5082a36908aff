// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Deliberately inefficient readers used as comparison points.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use arrowgate_core::storage::{read_acf_footer, read_row_group};
use arrowgate_core::{Error as CoreError, IoCounter, OwnedValue, RecordBatch};

use crate::{IoContext, Result};

/// Counts the data rows of a headed, comma-separated file the slow way: one
/// `String` per line, one `String` per field and one boxed value per field.
pub fn naive_csv_count(path: &Path) -> Result<u64> {
    let reader = BufReader::new(File::open(path).at(path)?);
    let mut lines = reader.lines();
    let width = match lines.next() {
        None => return Ok(0),
        Some(header) => header.at(path)?.split(',').count(),
    };
    let mut rows = 0u64;
    for (i, line) in lines.enumerate() {
        let line = line.at(path)?;
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != width {
            return Err(CoreError::Csv {
                line: i as u64 + 2,
                column: fields.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", fields.len()),
            }
            .into());
        }
        let values: Vec<Box<OwnedValue>> = fields
            .into_iter()
            .map(|f| {
                Box::new(if f.is_empty() {
                    OwnedValue::Null
                } else if let Ok(v) = f.parse::<i64>() {
                    OwnedValue::Int64(v)
                } else if let Ok(v) = f.parse::<f64>() {
                    OwnedValue::Float64(v)
                } else {
                    OwnedValue::Utf8(f)
                })
            })
            .collect();
        std::hint::black_box(&values);
        rows += 1;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EagerScan {
    pub rows: u64,
    /// Bytes of decoded batches held at once; the whole file.
    pub peak_bytes: u64,
}

/// Decodes every row group of an ACF file into memory before counting.
pub fn eager_acf_count(path: &Path) -> Result<EagerScan> {
    let footer = read_acf_footer(path)?;
    let file = File::open(path).at(path)?;
    let io = IoCounter::new();
    let batches: Vec<RecordBatch> = footer
        .row_groups
        .iter()
        .map(|g| read_row_group(&file, g, &footer.schema, None, &io))
        .collect::<std::result::Result<_, _>>()?;
    let peak_bytes = batches.iter().map(|b| b.byte_size() as u64).sum();
    let rows = batches.iter().map(|b| b.num_rows() as u64).sum();
    Ok(EagerScan { rows, peak_bytes })
}
