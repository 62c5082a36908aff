// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! LSB-first validity bitmaps.

#[inline]
pub fn bitmap_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

#[inline]
pub fn bit_is_set(bitmap: &[u8], i: usize) -> bool {
    bitmap[i >> 3] & (1 << (i & 7)) != 0
}

#[inline]
pub fn set_bit(bitmap: &mut [u8], i: usize) {
    bitmap[i >> 3] |= 1 << (i & 7);
}

/// Appends `len` bits of `src` starting at bit `start` to `dst`, which
/// currently holds `dst_bits` bits.
pub(crate) fn append_bits(
    dst: &mut Vec<u8>,
    dst_bits: usize,
    src: &[u8],
    start: usize,
    len: usize,
) {
    dst.resize(bitmap_len(dst_bits + len), 0);
    if dst_bits % 8 == 0 && start % 8 == 0 {
        let n = bitmap_len(len);
        dst[dst_bits / 8..dst_bits / 8 + n].copy_from_slice(&src[start / 8..start / 8 + n]);
        // clear bits past the end so equal bitmaps compare equal byte-wise
        if len % 8 != 0 {
            let last = dst_bits / 8 + n - 1;
            dst[last] &= (1u8 << (len % 8)) - 1;
        }
        return;
    }
    for i in 0..len {
        if bit_is_set(src, start + i) {
            set_bit(dst, dst_bits + i);
        }
    }
}
