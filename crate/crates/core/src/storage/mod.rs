// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! On-disk formats: the ACF columnar file, unquoted CSV, per-chunk codecs and
//! format detection.

pub mod acf;
mod codec;
pub mod csv;
mod format;
mod io;

pub use acf::{
    read_acf_footer, read_row_group, write_acf, AcfFooter, AcfWriter, ColumnChunkMeta,
    GroupBatchReader, RowGroupMeta, ACF_MAGIC,
};
pub use codec::{compress, decompress, Codec};
pub use csv::{
    csv_infer_schema, csv_parse_batches, CsvBatchReader, CsvDialect, CsvWriter, DEFAULT_SAMPLE_ROWS,
};
pub use format::{detect_format, detect_format_bytes, FormatKind};
pub use io::{IoCounter, IoSnapshot, PositionedReader};
