// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! ACF, a small row-group columnar file format.
//!
//! ```text
//! "ACF1"
//! row group 0: chunk(col 0) chunk(col 1) ...
//! row group 1: ...
//! footer (UTF-8 JSON)
//! u32 footer_len, "ACF1"
//! ```
//!
//! A chunk is one column of one row group, compressed as a single block. Its
//! uncompressed payload is `[validity][offsets][data]`: the validity bitmap
//! is present iff the field is nullable, the `u32` offsets iff it is Utf8.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::codec::{compress, decompress, Codec};
use super::io::{read_metadata_at, IoCounter, PositionedReader};
use crate::columnar::bitmap::append_bits;
use crate::columnar::{
    bitmap_len, validate_batch, Buffer, ColumnBuilder, ColumnVector, DataType, MemoryTracker,
    RecordBatch, Schema, SchemaRef,
};
use crate::error::{Error, Result};

pub const ACF_MAGIC: &[u8; 4] = b"ACF1";
const TRAILER_LEN: u64 = 8;
const STREAM_BUFFER: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnChunkMeta {
    pub codec: Codec,
    #[serde(rename = "off")]
    pub file_offset: u64,
    #[serde(rename = "clen")]
    pub compressed_len: u64,
    #[serde(rename = "ulen")]
    pub uncompressed_len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowGroupMeta {
    #[serde(rename = "rows")]
    pub row_count: u64,
    #[serde(rename = "cols")]
    pub columns: Vec<ColumnChunkMeta>,
}

impl RowGroupMeta {
    pub fn compressed_len(&self) -> u64 {
        self.columns.iter().map(|c| c.compressed_len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcfFooter {
    pub schema: Schema,
    pub row_groups: Vec<RowGroupMeta>,
    pub total_rows: u64,
}

impl AcfFooter {
    /// Reads the footer of an open file, touching only the trailer and the
    /// footer bytes.
    pub fn read_from(file: &File, path: &Path, io: &IoCounter) -> Result<Self> {
        let file_len = file.metadata()?.len();
        if file_len < ACF_MAGIC.len() as u64 + TRAILER_LEN {
            return Err(Error::format(path, "truncated footer"));
        }
        let trailer = read_metadata_at(file, file_len - TRAILER_LEN, TRAILER_LEN as usize, io)?;
        if &trailer[4..] != ACF_MAGIC {
            return Err(Error::format(path, "bad trailer magic"));
        }
        let footer_len = u32::from_le_bytes(trailer[..4].try_into().unwrap()) as u64;
        let body_end = file_len - TRAILER_LEN;
        if footer_len > body_end - ACF_MAGIC.len() as u64 {
            return Err(Error::format(path, "footer length out of bounds"));
        }
        let footer_start = body_end - footer_len;
        let raw = read_metadata_at(file, footer_start, footer_len as usize, io)?;
        let footer: AcfFooter = serde_json::from_slice(&raw)
            .map_err(|e| Error::format(path, format!("truncated footer: {e}")))?;
        footer.check(path, footer_start)?;
        Ok(footer)
    }

    fn check(&self, path: &Path, footer_start: u64) -> Result<()> {
        let sum: u64 = self.row_groups.iter().map(|g| g.row_count).sum();
        if sum != self.total_rows {
            return Err(Error::format(
                path,
                format!("total_rows {} != sum of group rows {sum}", self.total_rows),
            ));
        }
        let mut next = ACF_MAGIC.len() as u64;
        for (g, group) in self.row_groups.iter().enumerate() {
            if group.columns.len() != self.schema.len() {
                return Err(Error::format(
                    path,
                    format!(
                        "row group {g} has {} chunks for {} fields",
                        group.columns.len(),
                        self.schema.len()
                    ),
                ));
            }
            for (c, chunk) in group.columns.iter().enumerate() {
                let end = chunk.file_offset.checked_add(chunk.compressed_len);
                if chunk.file_offset < next || end.is_none_or(|e| e > footer_start) {
                    return Err(Error::format(
                        path,
                        format!("row group {g} column {c}: chunk out of order or out of bounds"),
                    ));
                }
                let layout = ChunkLayout::new(self.schema.field(c), group.row_count as usize);
                if let Some(expected) = layout.fixed_ulen() {
                    if expected != chunk.uncompressed_len {
                        return Err(Error::format(
                            path,
                            format!(
                                "row group {g} column {c}: uncompressed length {} != {expected}",
                                chunk.uncompressed_len
                            ),
                        ));
                    }
                } else if chunk.uncompressed_len < layout.prefix_len() as u64 {
                    return Err(Error::format(
                        path,
                        format!("row group {g} column {c}: uncompressed length too small"),
                    ));
                }
                next = end.unwrap();
            }
        }
        Ok(())
    }
}

/// Byte layout of one chunk's uncompressed payload.
#[derive(Debug, Clone, Copy)]
struct ChunkLayout {
    dtype: DataType,
    rows: usize,
    validity_len: usize,
    offsets_len: usize,
}

impl ChunkLayout {
    fn new(field: &crate::columnar::Field, rows: usize) -> Self {
        Self {
            dtype: field.dtype,
            rows,
            validity_len: if field.nullable { bitmap_len(rows) } else { 0 },
            offsets_len: match field.dtype {
                DataType::Utf8 => (rows + 1) * 4,
                _ => 0,
            },
        }
    }

    fn prefix_len(&self) -> usize {
        self.validity_len + self.offsets_len
    }

    fn fixed_ulen(&self) -> Option<u64> {
        self.dtype
            .byte_width()
            .map(|w| (self.prefix_len() + self.rows * w) as u64)
    }
}

fn encode_chunk(col: &ColumnVector, nullable: bool) -> Vec<u8> {
    let rows = col.len();
    let mut out = Vec::with_capacity(col.byte_size() + bitmap_len(rows));
    if nullable {
        match col.validity() {
            Some(v) => out.extend_from_slice(v),
            None => {
                let mut ones = vec![0xffu8; bitmap_len(rows)];
                if rows % 8 != 0 {
                    *ones.last_mut().unwrap() = (1u8 << (rows % 8)) - 1;
                }
                out.extend_from_slice(&ones);
            }
        }
    }
    if let Some(o) = col.offsets() {
        out.extend_from_slice(o);
    }
    out.extend_from_slice(col.data());
    out
}

/// Splits a decompressed payload into a column, sharing one allocation.
fn decode_chunk(payload: Buffer, layout: ChunkLayout) -> ColumnVector {
    let validity = (layout.validity_len > 0).then(|| payload.slice(0, layout.validity_len));
    let offsets =
        (layout.offsets_len > 0).then(|| payload.slice(layout.validity_len, layout.offsets_len));
    let data_start = layout.prefix_len().min(payload.len());
    let data = payload.slice(data_start, payload.len() - data_start);
    ColumnVector::from_parts(layout.dtype, layout.rows, validity, offsets, data)
}

/// Streams record batches into an ACF file, cutting row groups of exactly
/// `rows_per_group` rows (the last group may be shorter).
pub struct AcfWriter {
    path: PathBuf,
    out: BufWriter<File>,
    pos: u64,
    schema: SchemaRef,
    codec: Codec,
    rows_per_group: usize,
    builders: Vec<ColumnBuilder>,
    pending: usize,
    groups: Vec<RowGroupMeta>,
}

impl AcfWriter {
    pub fn create(
        path: impl AsRef<Path>,
        schema: SchemaRef,
        codec: Codec,
        rows_per_group: usize,
    ) -> Result<Self> {
        if rows_per_group == 0 {
            return Err(Error::InvalidArgument(
                "rows_per_group must be at least 1".into(),
            ));
        }
        let path = path.as_ref().to_path_buf();
        let mut out = BufWriter::with_capacity(1 << 20, File::create(&path)?);
        out.write_all(ACF_MAGIC)?;
        let builders = Self::fresh_builders(&schema, rows_per_group);
        Ok(Self {
            path,
            out,
            pos: ACF_MAGIC.len() as u64,
            schema,
            codec,
            rows_per_group,
            builders,
            pending: 0,
            groups: Vec::new(),
        })
    }

    fn fresh_builders(schema: &Schema, rows: usize) -> Vec<ColumnBuilder> {
        schema
            .fields()
            .iter()
            .map(|f| ColumnBuilder::with_capacity(f.dtype, rows))
            .collect()
    }

    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    pub fn write(&mut self, batch: &RecordBatch) -> Result<()> {
        self.check_batch(batch)?;
        let mut start = 0;
        while start < batch.num_rows() {
            let take = (self.rows_per_group - self.pending).min(batch.num_rows() - start);
            for (b, col) in self.builders.iter_mut().zip(batch.columns()) {
                b.append_range(col, start, take);
            }
            self.pending += take;
            start += take;
            if self.pending == self.rows_per_group {
                self.flush_group()?;
            }
        }
        Ok(())
    }

    fn check_batch(&self, batch: &RecordBatch) -> Result<()> {
        let theirs = batch.schema().fields();
        let ours = self.schema.fields();
        let same_shape = theirs.len() == ours.len()
            && theirs
                .iter()
                .zip(ours)
                .all(|(a, b)| a.name == b.name && a.dtype == b.dtype);
        if !same_shape {
            return Err(Error::Schema(format!(
                "batch schema {} does not match file schema {}",
                batch.schema(),
                self.schema
            )));
        }
        let violations = validate_batch(batch);
        if !violations.is_empty() {
            return Err(Error::InvalidBatch(violations));
        }
        for (i, (f, col)) in ours.iter().zip(batch.columns()).enumerate() {
            if !f.nullable && col.null_count() > 0 {
                return Err(Error::Schema(format!(
                    "column {i} ({}) is not nullable but the batch has nulls",
                    f.name
                )));
            }
        }
        Ok(())
    }

    fn flush_group(&mut self) -> Result<()> {
        let builders = std::mem::replace(
            &mut self.builders,
            Self::fresh_builders(&self.schema, self.rows_per_group),
        );
        let mut columns = Vec::with_capacity(builders.len());
        for (b, f) in builders.into_iter().zip(self.schema.fields()) {
            let payload = encode_chunk(&b.finish(), f.nullable);
            let compressed = compress(self.codec, &payload)?;
            self.out.write_all(&compressed)?;
            columns.push(ColumnChunkMeta {
                codec: self.codec,
                file_offset: self.pos,
                compressed_len: compressed.len() as u64,
                uncompressed_len: payload.len() as u64,
            });
            self.pos += compressed.len() as u64;
        }
        self.groups.push(RowGroupMeta {
            row_count: self.pending as u64,
            columns,
        });
        self.pending = 0;
        Ok(())
    }

    /// Flushes the last partial group and writes the footer and trailer.
    pub fn finish(mut self) -> Result<AcfFooter> {
        if self.pending > 0 {
            self.flush_group()?;
        }
        let footer = AcfFooter {
            schema: (*self.schema).clone(),
            total_rows: self.groups.iter().map(|g| g.row_count).sum(),
            row_groups: std::mem::take(&mut self.groups),
        };
        let json = serde_json::to_vec(&footer).map_err(io::Error::other)?;
        let len = u32::try_from(json.len())
            .map_err(|_| Error::format(&self.path, "footer exceeds 4 GiB"))?;
        self.out.write_all(&json)?;
        self.out.write_all(&len.to_le_bytes())?;
        self.out.write_all(ACF_MAGIC)?;
        self.out.flush()?;
        Ok(footer)
    }
}

/// Writes every batch to a new ACF file and returns its footer.
pub fn write_acf<I>(
    path: impl AsRef<Path>,
    schema: SchemaRef,
    batches: I,
    codec: Codec,
    rows_per_group: usize,
) -> Result<AcfFooter>
where
    I: IntoIterator,
    I::Item: std::borrow::Borrow<RecordBatch>,
{
    let mut w = AcfWriter::create(path, schema, codec, rows_per_group)?;
    for b in batches {
        w.write(std::borrow::Borrow::borrow(&b))?;
    }
    w.finish()
}

pub fn read_acf_footer(path: impl AsRef<Path>) -> Result<AcfFooter> {
    let path = path.as_ref();
    let file = File::open(path)?;
    AcfFooter::read_from(&file, path, &IoCounter::default())
}

fn resolve_projection(schema: &Schema, projection: Option<&[usize]>) -> Result<Vec<usize>> {
    match projection {
        None => Ok((0..schema.len()).collect()),
        Some(p) => {
            // validates bounds and duplicates
            schema.project(p)?;
            Ok(p.to_vec())
        }
    }
}

/// Reads one whole row group, fetching only the projected column chunks.
pub fn read_row_group(
    file: &File,
    meta: &RowGroupMeta,
    schema: &Schema,
    projection: Option<&[usize]>,
    io: &Arc<IoCounter>,
) -> Result<RecordBatch> {
    let indices = resolve_projection(schema, projection)?;
    let out_schema = Arc::new(schema.project(&indices)?);
    let rows = meta.row_count as usize;
    let mut columns = Vec::with_capacity(indices.len());
    let file = Arc::new(file.try_clone()?);
    for &c in &indices {
        let chunk = &meta.columns[c];
        let mut raw = Vec::with_capacity(chunk.compressed_len as usize);
        PositionedReader::new(
            Arc::clone(&file),
            chunk.file_offset,
            chunk.compressed_len,
            Arc::clone(io),
        )
        .read_to_end(&mut raw)?;
        if raw.len() as u64 != chunk.compressed_len {
            return Err(Error::Codec(format!("column {c}: chunk truncated")));
        }
        let payload = decompress(chunk.codec, &raw, chunk.uncompressed_len as usize)?;
        let layout = ChunkLayout::new(schema.field(c), rows);
        if payload.len() < layout.prefix_len() {
            return Err(Error::Codec(format!("column {c}: payload too short")));
        }
        columns.push(decode_chunk(Buffer::from_vec(payload), layout));
    }
    RecordBatch::try_new_with_rows(out_schema, columns, rows)
}

enum ChunkSource {
    /// Uncompressed chunk: each read is a positional read of exactly the
    /// requested range.
    Raw {
        file: Arc<File>,
        data_start: u64,
        io: Arc<IoCounter>,
    },
    Deflate(flate2::bufread::DeflateDecoder<BufReader<PositionedReader>>),
    FastLz(snap::read::FrameDecoder<BufReader<PositionedReader>>),
}

impl ChunkSource {
    fn open(file: &Arc<File>, chunk: &ColumnChunkMeta, io: &Arc<IoCounter>) -> Self {
        let reader = || {
            BufReader::with_capacity(
                STREAM_BUFFER,
                PositionedReader::new(
                    Arc::clone(file),
                    chunk.file_offset,
                    chunk.compressed_len,
                    Arc::clone(io),
                ),
            )
        };
        match chunk.codec {
            Codec::None => ChunkSource::Raw {
                file: Arc::clone(file),
                data_start: chunk.file_offset,
                io: Arc::clone(io),
            },
            Codec::Deflate => ChunkSource::Deflate(flate2::bufread::DeflateDecoder::new(reader())),
            Codec::FastLz => ChunkSource::FastLz(snap::read::FrameDecoder::new(reader())),
        }
    }

    /// Reads the next `buf.len()` payload bytes; `at` is their payload offset.
    fn read_exact_at(&mut self, at: u64, buf: &mut [u8]) -> io::Result<()> {
        match self {
            ChunkSource::Raw {
                file,
                data_start,
                io,
            } => PositionedReader::new(
                Arc::clone(file),
                *data_start + at,
                buf.len() as u64,
                Arc::clone(io),
            )
            .read_exact(buf),
            ChunkSource::Deflate(d) => d.read_exact(buf),
            ChunkSource::FastLz(d) => d.read_exact(buf),
        }
    }

    /// Confirms the payload is exhausted and consumes any remaining compressed
    /// bytes, so the chunk is read exactly once in full.
    fn finish(&mut self) -> io::Result<()> {
        let mut probe = [0u8; 1];
        let extra = match self {
            ChunkSource::Raw { .. } => return Ok(()),
            ChunkSource::Deflate(d) => {
                let n = d.read(&mut probe)?;
                io::copy(d.get_mut(), &mut io::sink())?;
                n
            }
            ChunkSource::FastLz(d) => {
                let n = d.read(&mut probe)?;
                io::copy(d.get_mut(), &mut io::sink())?;
                n
            }
        };
        if extra != 0 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "chunk payload longer than declared",
            ));
        }
        Ok(())
    }
}

struct ColumnCursor {
    layout: ChunkLayout,
    ulen: u64,
    source: ChunkSource,
    /// Group-wide validity bitmap, when the field is nullable.
    validity: Option<Vec<u8>>,
    /// Group-wide Utf8 offsets.
    offsets: Option<Vec<u32>>,
    /// Payload offset of the next unread data byte.
    cursor: u64,
}

impl ColumnCursor {
    fn open(
        file: &Arc<File>,
        field: &crate::columnar::Field,
        chunk: &ColumnChunkMeta,
        rows: usize,
        io: &Arc<IoCounter>,
    ) -> Result<Self> {
        let layout = ChunkLayout::new(field, rows);
        let mut source = ChunkSource::open(file, chunk, io);
        let mut cursor = 0u64;
        let validity = if layout.validity_len > 0 {
            let mut v = vec![0u8; layout.validity_len];
            source.read_exact_at(cursor, &mut v).map_err(chunk_error)?;
            cursor += v.len() as u64;
            Some(v)
        } else {
            None
        };
        let offsets = if layout.offsets_len > 0 {
            let mut raw = vec![0u8; layout.offsets_len];
            source
                .read_exact_at(cursor, &mut raw)
                .map_err(chunk_error)?;
            cursor += raw.len() as u64;
            let offsets: Vec<u32> = raw
                .chunks_exact(4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            let data_len = chunk.uncompressed_len - layout.prefix_len() as u64;
            let sound = offsets[0] == 0
                && offsets.windows(2).all(|w| w[0] <= w[1])
                && *offsets.last().unwrap() as u64 == data_len;
            if !sound {
                return Err(Error::Codec(format!(
                    "column {}: corrupt string offsets",
                    field.name
                )));
            }
            Some(offsets)
        } else {
            None
        };
        Ok(Self {
            layout,
            ulen: chunk.uncompressed_len,
            source,
            validity,
            offsets,
            cursor,
        })
    }

    fn read_rows(
        &mut self,
        start: usize,
        len: usize,
        tracker: Option<&Arc<MemoryTracker>>,
    ) -> Result<ColumnVector> {
        let validity = self.validity.as_ref().map(|v| {
            let mut out = Vec::with_capacity(bitmap_len(len));
            append_bits(&mut out, 0, v, start, len);
            Buffer::tracked(out, tracker)
        });
        let (offsets, data_len) = match &self.offsets {
            Some(o) => {
                let base = o[start];
                let rebased: Vec<u8> = o[start..=start + len]
                    .iter()
                    .flat_map(|x| (x - base).to_le_bytes())
                    .collect();
                (
                    Some(Buffer::tracked(rebased, tracker)),
                    (o[start + len] - base) as usize,
                )
            }
            None => (None, len * self.layout.dtype.byte_width().unwrap()),
        };
        let mut data = vec![0u8; data_len];
        self.source
            .read_exact_at(self.cursor, &mut data)
            .map_err(chunk_error)?;
        self.cursor += data_len as u64;
        if self.cursor == self.ulen {
            self.source.finish().map_err(chunk_error)?;
        }
        Ok(ColumnVector::from_parts(
            self.layout.dtype,
            len,
            validity,
            offsets,
            Buffer::tracked(data, tracker),
        ))
    }
}

fn chunk_error(e: io::Error) -> Error {
    match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Codec("chunk payload shorter than declared".into()),
        io::ErrorKind::InvalidData | io::ErrorKind::InvalidInput | io::ErrorKind::Other => {
            Error::Codec(format!("corrupt chunk: {e}"))
        }
        _ => Error::Io(e),
    }
}

/// Reads one row group as a sequence of batches of at most `batch_rows` rows,
/// decoding each projected column incrementally. Only the current batch's
/// column data is held in memory.
pub struct GroupBatchReader {
    schema: SchemaRef,
    columns: Vec<ColumnCursor>,
    rows: usize,
    pos: usize,
    batch_rows: usize,
    tracker: Option<Arc<MemoryTracker>>,
}

impl GroupBatchReader {
    /// Opens the projected chunks of `meta`. Reads the validity bitmaps and
    /// string offsets up front; column data is read batch by batch.
    pub fn open(
        file: Arc<File>,
        schema: &Schema,
        meta: &RowGroupMeta,
        projection: Option<&[usize]>,
        batch_rows: usize,
        io: Arc<IoCounter>,
        tracker: Option<Arc<MemoryTracker>>,
    ) -> Result<Self> {
        if batch_rows == 0 {
            return Err(Error::InvalidArgument(
                "batch_rows must be at least 1".into(),
            ));
        }
        let indices = resolve_projection(schema, projection)?;
        let out_schema = Arc::new(schema.project(&indices)?);
        let rows = meta.row_count as usize;
        let columns = indices
            .iter()
            .map(|&c| ColumnCursor::open(&file, schema.field(c), &meta.columns[c], rows, &io))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema: out_schema,
            columns,
            rows,
            pos: 0,
            batch_rows,
            tracker,
        })
    }

    pub fn schema(&self) -> &SchemaRef {
        &self.schema
    }

    pub fn remaining_rows(&self) -> usize {
        self.rows - self.pos
    }

    pub fn next_batch(&mut self) -> Result<Option<RecordBatch>> {
        if self.pos >= self.rows {
            return Ok(None);
        }
        let len = self.batch_rows.min(self.rows - self.pos);
        let tracker = self.tracker.as_ref();
        let columns = self
            .columns
            .iter_mut()
            .map(|c| c.read_rows(self.pos, len, tracker))
            .collect::<Result<Vec<_>>>()?;
        self.pos += len;
        RecordBatch::try_new_with_rows(Arc::clone(&self.schema), columns, len).map(Some)
    }
}

impl Iterator for GroupBatchReader {
    type Item = Result<RecordBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_batch().transpose()
    }
}
