// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Unquoted, delimiter-separated text.
//!
//! Fields never contain the delimiter or a newline. An empty field in a
//! nullable column is null. A trailing `\r` on a line is ignored.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::io::IoCounter;
use crate::columnar::{
    ColumnBuilder, DataType, Field, MemoryTracker, RecordBatch, Schema, SchemaRef, Value,
};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_ROWS: usize = 1024;
const READ_CHUNK: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvDialect {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvDialect {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
        }
    }
}

impl CsvDialect {
    pub fn headerless() -> Self {
        Self {
            has_header: false,
            ..Self::default()
        }
    }
}

/// Splits a line into fields.
#[inline]
fn fields(line: &[u8], delimiter: u8) -> impl Iterator<Item = &[u8]> {
    line.split(move |&b| b == delimiter)
}

#[inline]
fn strip_cr(line: &[u8]) -> &[u8] {
    line.strip_suffix(b"\r").unwrap_or(line)
}

/// Parses a decimal `i64` with an optional sign.
#[inline]
pub(crate) fn parse_i64(s: &[u8]) -> Option<i64> {
    let (neg, digits) = match s.first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    if digits.is_empty() || digits.len() > 19 {
        return None;
    }
    let mut acc: i64 = 0;
    for &d in digits {
        let d = d.wrapping_sub(b'0');
        if d > 9 {
            return None;
        }
        acc = acc.checked_mul(10)?;
        acc = if neg {
            acc.checked_sub(d as i64)?
        } else {
            acc.checked_add(d as i64)?
        };
    }
    Some(acc)
}

#[inline]
fn parse_f64(s: &[u8]) -> Option<f64> {
    std::str::from_utf8(s).ok()?.parse().ok()
}

/// Lazily parses CSV text into record batches of at most `batch_rows` rows.
///
/// Input is read a megabyte at a time and parsed in place; the only
/// per-batch allocations are the column builders.
pub struct CsvBatchReader<R> {
    source: R,
    schema: SchemaRef,
    out_schema: SchemaRef,
    dialect: CsvDialect,
    batch_rows: usize,
    /// For each source field, the output column it feeds, if projected.
    targets: Vec<Option<usize>>,
    tracker: Option<Arc<MemoryTracker>>,
    buf: Vec<u8>,
    start: usize,
    end: usize,
    eof: bool,
    /// 1-based number of the last line consumed.
    line: u64,
    header_pending: bool,
    done: bool,
}

/// Parses `source` against `schema`. Every line must have exactly
/// `schema.len()` fields.
pub fn csv_parse_batches<R: Read>(
    source: R,
    schema: SchemaRef,
    dialect: CsvDialect,
    batch_rows: usize,
) -> Result<CsvBatchReader<R>> {
    CsvBatchReader::new(source, schema, dialect, batch_rows)
}

impl<R: Read> CsvBatchReader<R> {
    pub fn new(
        source: R,
        schema: SchemaRef,
        dialect: CsvDialect,
        batch_rows: usize,
    ) -> Result<Self> {
        if batch_rows == 0 {
            return Err(Error::InvalidArgument(
                "batch_rows must be at least 1".into(),
            ));
        }
        if schema.is_empty() {
            return Err(Error::Schema("csv schema has no columns".into()));
        }
        Ok(Self {
            source,
            out_schema: Arc::clone(&schema),
            targets: (0..schema.len()).map(Some).collect(),
            schema,
            dialect,
            batch_rows,
            tracker: None,
            buf: Vec::new(),
            start: 0,
            end: 0,
            eof: false,
            line: 0,
            header_pending: dialect.has_header,
            done: false,
        })
    }

    /// Only materializes the given columns, in the given order.
    pub fn with_projection(mut self, indices: &[usize]) -> Result<Self> {
        self.out_schema = Arc::new(self.schema.project(indices)?);
        self.targets = vec![None; self.schema.len()];
        for (out, &src) in indices.iter().enumerate() {
            self.targets[src] = Some(out);
        }
        Ok(self)
    }

    pub fn with_tracker(mut self, tracker: Option<Arc<MemoryTracker>>) -> Self {
        self.tracker = tracker;
        self
    }

    /// Schema of the yielded batches, after projection.
    #[allow(clippy::misnamed_getters)]
    pub fn schema(&self) -> &SchemaRef {
        &self.out_schema
    }

    /// Returns the next complete line (without its newline), refilling the
    /// buffer as needed.
    fn next_line(&mut self) -> Result<Option<(usize, usize)>> {
        loop {
            if let Some(i) = memchr::memchr(b'\n', &self.buf[self.start..self.end]) {
                let line = (self.start, self.start + i);
                self.start += i + 1;
                self.line += 1;
                return Ok(Some(line));
            }
            if self.eof {
                if self.start < self.end {
                    let line = (self.start, self.end);
                    self.start = self.end;
                    self.line += 1;
                    return Ok(Some(line));
                }
                return Ok(None);
            }
            self.fill()?;
        }
    }

    fn fill(&mut self) -> Result<()> {
        if self.start > 0 {
            self.buf.copy_within(self.start..self.end, 0);
            self.end -= self.start;
            self.start = 0;
        }
        if self.buf.len() - self.end < READ_CHUNK / 2 {
            let grown = (self.buf.len() * 2).max(READ_CHUNK);
            self.buf.resize(grown, 0);
        }
        let n = self.source.read(&mut self.buf[self.end..])?;
        if n == 0 {
            self.eof = true;
        }
        self.end += n;
        Ok(())
    }

    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Csv {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn parse_line(&self, line: &[u8], builders: &mut [ColumnBuilder]) -> Result<()> {
        let line = strip_cr(line);
        let mut count = 0;
        for (i, raw) in fields(line, self.dialect.delimiter).enumerate() {
            count = i + 1;
            let Some(Some(out)) = self.targets.get(i) else {
                continue;
            };
            let field = self.schema.field(i);
            let b = &mut builders[*out];
            if raw.is_empty() && (field.nullable || field.dtype != DataType::Utf8) {
                if !field.nullable {
                    return Err(self.error(
                        i + 1,
                        format!("empty value in non-nullable column {:?}", field.name),
                    ));
                }
                b.append_null();
                continue;
            }
            match field.dtype {
                DataType::Int64 => match parse_i64(raw) {
                    Some(v) => b.append_i64(v),
                    None => {
                        return Err(self.error(
                            i + 1,
                            format!("invalid integer {:?}", String::from_utf8_lossy(raw)),
                        ))
                    }
                },
                DataType::Float64 => match parse_f64(raw) {
                    Some(v) => b.append_f64(v),
                    None => {
                        return Err(self.error(
                            i + 1,
                            format!("invalid float {:?}", String::from_utf8_lossy(raw)),
                        ))
                    }
                },
                DataType::Utf8 => match std::str::from_utf8(raw) {
                    Ok(s) => b.append_str(s),
                    Err(_) => return Err(self.error(i + 1, "invalid UTF-8")),
                },
            }
        }
        if count != self.schema.len() {
            return Err(self.error(
                count.min(self.schema.len()) + 1,
                format!("expected {} fields, found {count}", self.schema.len()),
            ));
        }
        Ok(())
    }

    pub fn next_batch(&mut self) -> Result<Option<RecordBatch>> {
        if self.done {
            return Ok(None);
        }
        if self.header_pending {
            self.header_pending = false;
            self.next_line()?;
        }
        let mut builders: Vec<ColumnBuilder> = self
            .out_schema
            .fields()
            .iter()
            .map(|f| ColumnBuilder::with_capacity(f.dtype, self.batch_rows))
            .collect();
        let mut rows = 0;
        while rows < self.batch_rows {
            let Some((lo, hi)) = self.next_line()? else {
                self.done = true;
                break;
            };
            self.parse_line(&self.buf[lo..hi], &mut builders)?;
            rows += 1;
        }
        if rows == 0 {
            return Ok(None);
        }
        let columns = builders
            .into_iter()
            .map(|b| b.finish_tracked(self.tracker.as_ref()))
            .collect();
        RecordBatch::try_new_with_rows(Arc::clone(&self.out_schema), columns, rows).map(Some)
    }
}

impl<R: Read> Iterator for CsvBatchReader<R> {
    type Item = Result<RecordBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_batch() {
            Ok(b) => b.map(Ok),
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Int64,
    Float64,
    Utf8,
}

fn classify(raw: &[u8]) -> Kind {
    if parse_i64(raw).is_some() {
        Kind::Int64
    } else if parse_f64(raw).is_some() {
        Kind::Float64
    } else {
        Kind::Utf8
    }
}

/// Infers a schema from the first `sample_rows` data lines of `path`.
pub fn csv_infer_schema(
    path: impl AsRef<Path>,
    dialect: CsvDialect,
    sample_rows: usize,
) -> Result<Schema> {
    let file = File::open(path)?;
    infer_schema_from_reader(file, dialect, sample_rows, &IoCounter::default())
}

/// Schema inference over any reader; bytes consumed count as metadata.
///
/// Each column gets the narrowest of Int64, Float64 and Utf8 that fits every
/// sampled non-empty value; a column with no non-empty samples is Utf8.
/// Inferred fields are always nullable, since unsampled rows may be empty.
pub fn infer_schema_from_reader<R: Read>(
    mut source: R,
    dialect: CsvDialect,
    sample_rows: usize,
    io: &IoCounter,
) -> Result<Schema> {
    let wanted = sample_rows + dialect.has_header as usize;
    let mut text = Vec::new();
    let mut chunk = vec![0u8; 64 * 1024];
    let mut newlines = 0;
    loop {
        let n = source.read(&mut chunk)?;
        if n == 0 {
            break;
        }
        io.add_metadata(n as u64);
        newlines += memchr::memchr_iter(b'\n', &chunk[..n]).count();
        text.extend_from_slice(&chunk[..n]);
        if newlines >= wanted {
            break;
        }
    }
    if text.is_empty() {
        return Err(Error::Csv {
            line: 0,
            column: 0,
            message: "empty file".into(),
        });
    }
    let mut lines = text.split(|&b| b == b'\n');
    let mut line_no = 0u64;
    let mut names: Option<Vec<String>> = None;
    if dialect.has_header {
        line_no += 1;
        let header = strip_cr(lines.next().unwrap_or_default());
        names = Some(
            fields(header, dialect.delimiter)
                .enumerate()
                .map(|(i, n)| match std::str::from_utf8(n) {
                    Ok("") => Ok(format!("c{i}")),
                    Ok(s) => Ok(s.to_string()),
                    Err(_) => Err(Error::Csv {
                        line: 1,
                        column: i + 1,
                        message: "header is not valid UTF-8".into(),
                    }),
                })
                .collect::<Result<_>>()?,
        );
    }
    let mut kinds: Vec<Option<Kind>> = names
        .as_ref()
        .map(|n| vec![None; n.len()])
        .unwrap_or_default();
    let mut width = names.as_ref().map(Vec::len);
    let total_lines = newlines + usize::from(!text.ends_with(b"\n"));
    for line in lines.take(sample_rows) {
        line_no += 1;
        if line_no as usize > total_lines {
            break;
        }
        let line = strip_cr(line);
        let count = fields(line, dialect.delimiter).count();
        match width {
            None => {
                width = Some(count);
                kinds = vec![None; count];
            }
            Some(w) if w != count => {
                return Err(Error::Csv {
                    line: line_no,
                    column: count.min(w) + 1,
                    message: format!("expected {w} fields, found {count}"),
                })
            }
            Some(_) => {}
        }
        for (k, raw) in kinds.iter_mut().zip(fields(line, dialect.delimiter)) {
            if !raw.is_empty() {
                let c = classify(raw);
                *k = Some(k.map_or(c, |prev| prev.max(c)));
            }
        }
    }
    let width = width.unwrap_or(0);
    let names = names.unwrap_or_else(|| (0..width).map(|i| format!("c{i}")).collect());
    let fields = names
        .into_iter()
        .zip(kinds)
        .map(|(name, k)| {
            let dtype = match k {
                Some(Kind::Int64) => DataType::Int64,
                Some(Kind::Float64) => DataType::Float64,
                Some(Kind::Utf8) | None => DataType::Utf8,
            };
            Field::new(name, dtype, true)
        })
        .collect();
    Schema::try_new(fields)
}

/// Writes record batches as CSV text in the same dialect the parser reads.
pub struct CsvWriter<W: Write> {
    out: W,
    dialect: CsvDialect,
    line: Vec<u8>,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W, dialect: CsvDialect) -> Self {
        Self {
            out,
            dialect,
            line: Vec::with_capacity(256),
        }
    }

    fn check_text(&self, s: &[u8]) -> Result<()> {
        if s.iter()
            .any(|&b| b == self.dialect.delimiter || b == b'\n' || b == b'\r')
        {
            return Err(Error::InvalidArgument(format!(
                "value {:?} contains the delimiter or a line break",
                String::from_utf8_lossy(s)
            )));
        }
        Ok(())
    }

    pub fn write_header(&mut self, schema: &Schema) -> Result<()> {
        self.line.clear();
        for (i, name) in schema.names().enumerate() {
            self.check_text(name.as_bytes())?;
            if i > 0 {
                self.line.push(self.dialect.delimiter);
            }
            self.line.extend_from_slice(name.as_bytes());
        }
        self.line.push(b'\n');
        self.out.write_all(&self.line)?;
        Ok(())
    }

    pub fn write_batch(&mut self, batch: &RecordBatch) -> Result<()> {
        for r in 0..batch.num_rows() {
            self.line.clear();
            for (i, col) in batch.columns().iter().enumerate() {
                if i > 0 {
                    self.line.push(self.dialect.delimiter);
                }
                match col.value(r) {
                    Value::Null => {}
                    Value::Int64(v) => write!(self.line, "{v}")?,
                    Value::Float64(v) => write!(self.line, "{v:?}")?,
                    Value::Utf8(s) => {
                        self.check_text(s.as_bytes())?;
                        self.line.extend_from_slice(s.as_bytes());
                    }
                }
            }
            self.line.push(b'\n');
            self.out.write_all(&self.line)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columnar::{ColumnVector, OwnedValue};

    fn int_schema(n: usize) -> SchemaRef {
        Arc::new(
            Schema::try_new(
                (0..n)
                    .map(|i| Field::new(format!("c{i}"), DataType::Int64, true))
                    .collect(),
            )
            .unwrap(),
        )
    }

    fn rows(batches: &[RecordBatch]) -> Vec<Vec<OwnedValue>> {
        batches
            .iter()
            .flat_map(|b| {
                (0..b.num_rows())
                    .map(move |r| b.columns().iter().map(|c| c.value(r).to_owned()).collect())
            })
            .collect()
    }

    #[test]
    fn one_row_batches() {
        let batches: Vec<_> = csv_parse_batches(
            &b"1,2\n3,4\n"[..],
            int_schema(2),
            CsvDialect::headerless(),
            1,
        )
        .unwrap()
        .collect::<Result<_>>()
        .unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].column(0), &ColumnVector::from_i64s(&[1]));
        assert_eq!(batches[0].column(1), &ColumnVector::from_i64s(&[2]));
        assert_eq!(batches[1].column(0), &ColumnVector::from_i64s(&[3]));
        assert_eq!(batches[1].column(1), &ColumnVector::from_i64s(&[4]));
    }

    #[test]
    fn empty_field_is_null() {
        let b = csv_parse_batches(&b"1,\n,4"[..], int_schema(2), CsvDialect::headerless(), 10)
            .unwrap()
            .next_batch()
            .unwrap()
            .unwrap();
        assert_eq!(b.column(0), &ColumnVector::from_opt_i64s(&[Some(1), None]));
        assert_eq!(b.column(1), &ColumnVector::from_opt_i64s(&[None, Some(4)]));
    }

    #[test]
    fn errors_carry_line_and_column() {
        let mut r = csv_parse_batches(
            &b"a,b\n1,2\n3,x\n"[..],
            int_schema(2),
            CsvDialect::default(),
            10,
        )
        .unwrap();
        match r.next_batch() {
            Err(Error::Csv { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
        let mut r = csv_parse_batches(
            &b"1,2\n3\n"[..],
            int_schema(2),
            CsvDialect::headerless(),
            10,
        )
        .unwrap();
        match r.next_batch() {
            Err(Error::Csv { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("expected 2 fields"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn crlf_and_projection() {
        let mut r = csv_parse_batches(
            &b"a,b,c\r\n1,2,3\r\n4,5,6\r\n"[..],
            int_schema(3),
            CsvDialect::default(),
            10,
        )
        .unwrap()
        .with_projection(&[2, 0])
        .unwrap();
        let b = r.next_batch().unwrap().unwrap();
        assert_eq!(b.schema().names().collect::<Vec<_>>(), ["c2", "c0"]);
        assert_eq!(b.column(0), &ColumnVector::from_i64s(&[3, 6]));
        assert_eq!(b.column(1), &ColumnVector::from_i64s(&[1, 4]));
        assert!(r.next_batch().unwrap().is_none());
    }

    #[test]
    fn lines_longer_than_the_buffer() {
        let long = "x".repeat(3 * READ_CHUNK);
        let text = format!("{long}\nshort\n");
        let schema =
            Arc::new(Schema::try_new(vec![Field::new("s", DataType::Utf8, false)]).unwrap());
        let batches: Vec<_> =
            csv_parse_batches(text.as_bytes(), schema, CsvDialect::headerless(), 8)
                .unwrap()
                .collect::<Result<_>>()
                .unwrap();
        assert_eq!(
            rows(&batches),
            [
                vec![OwnedValue::Utf8(long)],
                vec![OwnedValue::Utf8("short".into())]
            ]
        );
    }

    #[test]
    fn parse_i64_edges() {
        assert_eq!(parse_i64(b"-9223372036854775808"), Some(i64::MIN));
        assert_eq!(parse_i64(b"9223372036854775807"), Some(i64::MAX));
        assert_eq!(parse_i64(b"9223372036854775808"), None);
        assert_eq!(parse_i64(b"+12"), Some(12));
        assert_eq!(parse_i64(b"-"), None);
        assert_eq!(parse_i64(b"1.5"), None);
    }

    fn infer(text: &str, dialect: CsvDialect) -> Result<Schema> {
        infer_schema_from_reader(
            text.as_bytes(),
            dialect,
            DEFAULT_SAMPLE_ROWS,
            &IoCounter::default(),
        )
    }

    #[test]
    fn inference_rules() {
        let s = infer("a,b\n1,2.5\n", CsvDialect::default()).unwrap();
        assert_eq!(
            s.fields(),
            [
                Field::new("a", DataType::Int64, true),
                Field::new("b", DataType::Float64, true)
            ]
        );
        let s = infer("1,2,3\n4,5,6\n", CsvDialect::headerless()).unwrap();
        assert_eq!(s.names().collect::<Vec<_>>(), ["c0", "c1", "c2"]);
        assert!(s.fields().iter().all(|f| f.dtype == DataType::Int64));
        let s = infer("v\n1\nx\n", CsvDialect::default()).unwrap();
        assert_eq!(s.field(0).dtype, DataType::Utf8);
        let s = infer("v,w\n1,\n2.5,\n", CsvDialect::default()).unwrap();
        assert_eq!(s.field(0).dtype, DataType::Float64);
        assert_eq!(s.field(1).dtype, DataType::Utf8);
        assert!(infer("a,b\n1,2\n3\n", CsvDialect::default()).is_err());
        assert!(infer("", CsvDialect::default()).is_err());
    }

    #[test]
    fn inference_respects_sample_limit() {
        let text = "a\n1\n2\nx\n";
        let s = infer_schema_from_reader(
            text.as_bytes(),
            CsvDialect::default(),
            2,
            &IoCounter::default(),
        )
        .unwrap();
        assert_eq!(s.field(0).dtype, DataType::Int64);
    }

    #[test]
    fn writer_round_trip() {
        let schema = Arc::new(
            Schema::try_new(vec![
                Field::new("i", DataType::Int64, true),
                Field::new("f", DataType::Float64, true),
                Field::new("s", DataType::Utf8, true),
            ])
            .unwrap(),
        );
        let batch = RecordBatch::try_new(
            Arc::clone(&schema),
            vec![
                ColumnVector::from_opt_i64s(&[Some(-3), None, Some(7)]),
                ColumnVector::from_opt_f64s(&[Some(1.0), Some(-2.5e-12), None]),
                ColumnVector::from_opt_strs(&[Some("x y"), None, Some("é")]),
            ],
        )
        .unwrap();
        let mut w = CsvWriter::new(Vec::new(), CsvDialect::default());
        w.write_header(&schema).unwrap();
        w.write_batch(&batch).unwrap();
        let text = w.finish().unwrap();
        let inferred = infer(std::str::from_utf8(&text).unwrap(), CsvDialect::default()).unwrap();
        assert_eq!(&inferred, schema.as_ref());
        let back: Vec<_> = csv_parse_batches(&text[..], schema, CsvDialect::default(), 2)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(rows(&back), rows(&[batch]));

        let bad = RecordBatch::try_new(
            Arc::new(Schema::try_new(vec![Field::new("s", DataType::Utf8, false)]).unwrap()),
            vec![ColumnVector::from_strs(["a,b"])],
        )
        .unwrap();
        assert!(CsvWriter::new(Vec::new(), CsvDialect::default())
            .write_batch(&bad)
            .is_err());
    }
}
