// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fmt;
use std::sync::Arc;

use super::bitmap::{append_bits, bit_is_set, bitmap_len, set_bit};
use super::buffer::{Buffer, MemoryTracker};
use super::types::DataType;
use crate::error::{Error, Result};

/// A borrowed cell value.
#[derive(Debug, Clone, Copy)]
pub enum Value<'a> {
    Null,
    Int64(i64),
    Float64(f64),
    Utf8(&'a str),
}

impl Value<'_> {
    pub fn to_owned(&self) -> OwnedValue {
        match *self {
            Value::Null => OwnedValue::Null,
            Value::Int64(v) => OwnedValue::Int64(v),
            Value::Float64(v) => OwnedValue::Float64(v),
            Value::Utf8(s) => OwnedValue::Utf8(s.to_owned()),
        }
    }
}

impl PartialEq for Value<'_> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Int64(a), Value::Int64(b)) => a == b,
            // bitwise, so NaN == NaN and 0.0 != -0.0
            (Value::Float64(a), Value::Float64(b)) => a.to_bits() == b.to_bits(),
            (Value::Utf8(a), Value::Utf8(b)) => a == b,
            _ => false,
        }
    }
}

/// An owned cell value, produced only by explicit extraction.
#[derive(Debug, Clone)]
pub enum OwnedValue {
    Null,
    Int64(i64),
    Float64(f64),
    Utf8(String),
}

impl OwnedValue {
    pub fn as_value(&self) -> Value<'_> {
        match self {
            OwnedValue::Null => Value::Null,
            OwnedValue::Int64(v) => Value::Int64(*v),
            OwnedValue::Float64(v) => Value::Float64(*v),
            OwnedValue::Utf8(s) => Value::Utf8(s),
        }
    }
}

impl PartialEq for OwnedValue {
    fn eq(&self, other: &Self) -> bool {
        self.as_value() == other.as_value()
    }
}

impl fmt::Display for OwnedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OwnedValue::Null => f.write_str("null"),
            OwnedValue::Int64(v) => write!(f, "{v}"),
            OwnedValue::Float64(v) => write!(f, "{v:?}"),
            OwnedValue::Utf8(s) => f.write_str(s),
        }
    }
}

/// A single column of `len` values of one [`DataType`].
///
/// Fixed-width values are stored little-endian in `data`. Utf8 columns carry
/// `len + 1` little-endian `u32` offsets into `data`. A missing validity
/// bitmap means every slot is valid.
#[derive(Clone)]
pub struct ColumnVector {
    dtype: DataType,
    len: usize,
    validity: Option<Buffer>,
    offsets: Option<Buffer>,
    data: Buffer,
}

impl ColumnVector {
    /// Assembles a column from raw buffers without checking invariants; use
    /// [`validate_batch`](super::validate_batch) to check them.
    pub fn from_parts(
        dtype: DataType,
        len: usize,
        validity: Option<Buffer>,
        offsets: Option<Buffer>,
        data: Buffer,
    ) -> Self {
        Self {
            dtype,
            len,
            validity,
            offsets,
            data,
        }
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        let mut b = ColumnBuilder::with_capacity(DataType::Int64, values.len());
        values.iter().for_each(|&v| b.append_i64(v));
        b.finish()
    }

    pub fn from_f64s(values: &[f64]) -> Self {
        let mut b = ColumnBuilder::with_capacity(DataType::Float64, values.len());
        values.iter().for_each(|&v| b.append_f64(v));
        b.finish()
    }

    pub fn from_strs<'a>(values: impl IntoIterator<Item = &'a str>) -> Self {
        let mut b = ColumnBuilder::new(DataType::Utf8);
        values.into_iter().for_each(|v| b.append_str(v));
        b.finish()
    }

    pub fn from_opt_i64s(values: &[Option<i64>]) -> Self {
        let mut b = ColumnBuilder::with_capacity(DataType::Int64, values.len());
        for v in values {
            match v {
                Some(v) => b.append_i64(*v),
                None => b.append_null(),
            }
        }
        b.finish()
    }

    pub fn from_opt_f64s(values: &[Option<f64>]) -> Self {
        let mut b = ColumnBuilder::with_capacity(DataType::Float64, values.len());
        for v in values {
            match v {
                Some(v) => b.append_f64(*v),
                None => b.append_null(),
            }
        }
        b.finish()
    }

    pub fn from_opt_strs(values: &[Option<&str>]) -> Self {
        let mut b = ColumnBuilder::new(DataType::Utf8);
        for v in values {
            match v {
                Some(v) => b.append_str(v),
                None => b.append_null(),
            }
        }
        b.finish()
    }

    /// A column of `len` nulls.
    pub fn nulls(dtype: DataType, len: usize) -> Self {
        Self::nulls_tracked(dtype, len, None)
    }

    pub(crate) fn nulls_tracked(
        dtype: DataType,
        len: usize,
        tracker: Option<&Arc<MemoryTracker>>,
    ) -> Self {
        let validity = Some(Buffer::tracked(vec![0; bitmap_len(len)], tracker));
        match dtype.byte_width() {
            Some(w) => Self::from_parts(
                dtype,
                len,
                validity,
                None,
                Buffer::tracked(vec![0; len * w], tracker),
            ),
            None => Self::from_parts(
                dtype,
                len,
                validity,
                Some(Buffer::tracked(vec![0; (len + 1) * 4], tracker)),
                Buffer::empty(),
            ),
        }
    }

    pub fn dtype(&self) -> DataType {
        self.dtype
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn validity(&self) -> Option<&Buffer> {
        self.validity.as_ref()
    }

    pub fn offsets(&self) -> Option<&Buffer> {
        self.offsets.as_ref()
    }

    pub fn data(&self) -> &Buffer {
        &self.data
    }

    /// Total bytes across validity, offsets and data.
    pub fn byte_size(&self) -> usize {
        self.data.len()
            + self.validity.as_ref().map_or(0, |b| b.len())
            + self.offsets.as_ref().map_or(0, |b| b.len())
    }

    #[inline]
    pub fn is_valid(&self, i: usize) -> bool {
        self.validity.as_ref().is_none_or(|v| bit_is_set(v, i))
    }

    #[inline]
    pub fn is_null(&self, i: usize) -> bool {
        !self.is_valid(i)
    }

    pub fn null_count(&self) -> usize {
        match &self.validity {
            None => 0,
            Some(_) => (0..self.len).filter(|&i| self.is_null(i)).count(),
        }
    }

    /// Raw Int64 slot value (whatever is stored under a null). Panics when
    /// `i` is out of bounds.
    #[inline]
    pub fn i64_at(&self, i: usize) -> i64 {
        let b = &self.data[i * 8..i * 8 + 8];
        i64::from_le_bytes(b.try_into().unwrap())
    }

    #[inline]
    pub fn f64_at(&self, i: usize) -> f64 {
        let b = &self.data[i * 8..i * 8 + 8];
        f64::from_le_bytes(b.try_into().unwrap())
    }

    #[inline]
    pub(crate) fn offset_at(&self, i: usize) -> usize {
        let o = self.offsets.as_ref().expect("utf8 column without offsets");
        u32::from_le_bytes(o[i * 4..i * 4 + 4].try_into().unwrap()) as usize
    }

    /// Utf8 slot as a view into the data buffer.
    pub fn str_at(&self, i: usize) -> Result<&str> {
        let (start, end) = (self.offset_at(i), self.offset_at(i + 1));
        let bytes = self
            .data
            .get(start..end)
            .ok_or_else(|| Error::InvalidArgument(format!("offsets {start}..{end} exceed data")))?;
        std::str::from_utf8(bytes).map_err(|e| Error::InvalidArgument(format!("invalid utf8: {e}")))
    }

    /// Logical value at `i`, `Value::Null` for null slots.
    pub fn value(&self, i: usize) -> Value<'_> {
        if self.is_null(i) {
            return Value::Null;
        }
        match self.dtype {
            DataType::Int64 => Value::Int64(self.i64_at(i)),
            DataType::Float64 => Value::Float64(self.f64_at(i)),
            DataType::Utf8 => Value::Utf8(self.str_at(i).unwrap_or("\u{fffd}")),
        }
    }
}

/// Logical equality: same type, length, null positions and valid values.
/// Bytes stored under null slots are ignored.
impl PartialEq for ColumnVector {
    fn eq(&self, other: &Self) -> bool {
        self.dtype == other.dtype
            && self.len == other.len
            && (0..self.len).all(|i| self.value(i) == other.value(i))
    }
}

impl fmt::Debug for ColumnVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 8;
        let mut list = f.debug_list();
        for i in 0..self.len.min(SHOWN) {
            list.entry(&self.value(i));
        }
        if self.len > SHOWN {
            list.entry(&format_args!("... {} more", self.len - SHOWN));
        }
        list.finish()
    }
}

/// Incrementally builds a [`ColumnVector`].
#[derive(Debug)]
pub struct ColumnBuilder {
    dtype: DataType,
    len: usize,
    data: Vec<u8>,
    /// Utf8 only: little-endian u32 offsets, starting with 0.
    offsets: Vec<u8>,
    validity: Option<Vec<u8>>,
}

impl ColumnBuilder {
    pub fn new(dtype: DataType) -> Self {
        Self::with_capacity(dtype, 0)
    }

    pub fn with_capacity(dtype: DataType, rows: usize) -> Self {
        let (data, offsets) = match dtype.byte_width() {
            Some(w) => (Vec::with_capacity(rows * w), Vec::new()),
            None => {
                let mut o = Vec::with_capacity((rows + 1) * 4);
                o.extend_from_slice(&0u32.to_le_bytes());
                (Vec::new(), o)
            }
        };
        Self {
            dtype,
            len: 0,
            data,
            offsets,
            validity: None,
        }
    }

    pub fn dtype(&self) -> DataType {
        self.dtype
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn mark_valid(&mut self) {
        if let Some(v) = &mut self.validity {
            if self.len % 8 == 0 {
                v.push(0);
            }
            set_bit(v, self.len);
        }
    }

    #[inline]
    pub fn append_i64(&mut self, v: i64) {
        debug_assert_eq!(self.dtype, DataType::Int64);
        self.mark_valid();
        self.data.extend_from_slice(&v.to_le_bytes());
        self.len += 1;
    }

    #[inline]
    pub fn append_f64(&mut self, v: f64) {
        debug_assert_eq!(self.dtype, DataType::Float64);
        self.mark_valid();
        self.data.extend_from_slice(&v.to_le_bytes());
        self.len += 1;
    }

    #[inline]
    pub fn append_str(&mut self, s: &str) {
        debug_assert_eq!(self.dtype, DataType::Utf8);
        self.mark_valid();
        self.data.extend_from_slice(s.as_bytes());
        self.push_offset();
        self.len += 1;
    }

    #[inline]
    fn push_offset(&mut self) {
        let end = u32::try_from(self.data.len()).expect("utf8 column exceeds 4 GiB");
        self.offsets.extend_from_slice(&end.to_le_bytes());
    }

    pub fn append_null(&mut self) {
        let len = self.len;
        let v = self.validity.get_or_insert_with(|| {
            let mut v = vec![0xffu8; bitmap_len(len)];
            if len % 8 != 0 {
                *v.last_mut().unwrap() = (1u8 << (len % 8)) - 1;
            }
            v
        });
        if len % 8 == 0 {
            v.push(0);
        }
        match self.dtype.byte_width() {
            Some(w) => self.data.resize(self.data.len() + w, 0),
            None => self.push_offset(),
        }
        self.len += 1;
    }

    pub fn append_value(&mut self, v: Value<'_>) -> Result<()> {
        match (self.dtype, v) {
            (_, Value::Null) => self.append_null(),
            (DataType::Int64, Value::Int64(x)) => self.append_i64(x),
            (DataType::Float64, Value::Float64(x)) => self.append_f64(x),
            (DataType::Utf8, Value::Utf8(s)) => self.append_str(s),
            (dtype, v) => {
                return Err(Error::InvalidArgument(format!(
                    "cannot append {v:?} to a {dtype} column"
                )))
            }
        }
        Ok(())
    }

    /// Appends rows `start..start + len` of `src`.
    pub fn append_range(&mut self, src: &ColumnVector, start: usize, len: usize) {
        assert_eq!(src.dtype, self.dtype);
        assert!(start + len <= src.len);
        if src.validity.is_some() || self.validity.is_some() {
            let cur = self.len;
            let v = self.validity.get_or_insert_with(|| {
                let mut v = vec![0xffu8; bitmap_len(cur)];
                if cur % 8 != 0 {
                    *v.last_mut().unwrap() = (1u8 << (cur % 8)) - 1;
                }
                v
            });
            match &src.validity {
                Some(sv) => append_bits(v, cur, sv, start, len),
                None => {
                    v.resize(bitmap_len(cur + len), 0);
                    (cur..cur + len).for_each(|i| set_bit(v, i));
                }
            }
        }
        match self.dtype.byte_width() {
            Some(w) => self
                .data
                .extend_from_slice(&src.data[start * w..(start + len) * w]),
            None => {
                let (lo, hi) = (src.offset_at(start), src.offset_at(start + len));
                let base = self.data.len();
                self.data.extend_from_slice(&src.data[lo..hi]);
                for i in start + 1..=start + len {
                    let o = (src.offset_at(i) - lo + base) as u32;
                    self.offsets.extend_from_slice(&o.to_le_bytes());
                }
            }
        }
        self.len += len;
    }

    pub fn finish(self) -> ColumnVector {
        self.finish_tracked(None)
    }

    pub fn finish_tracked(self, tracker: Option<&Arc<MemoryTracker>>) -> ColumnVector {
        let offsets = match self.dtype {
            DataType::Utf8 => Some(Buffer::tracked(self.offsets, tracker)),
            _ => None,
        };
        ColumnVector {
            dtype: self.dtype,
            len: self.len,
            validity: self.validity.map(|v| Buffer::tracked(v, tracker)),
            offsets,
            data: Buffer::tracked(self.data, tracker),
        }
    }
}
