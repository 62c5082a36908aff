// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fs::File;
use std::io::{self, Read};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Storage bytes read, split into metadata (trailers, footers, format sniffing,
/// schema inference) and column data.
#[derive(Debug, Default)]
pub struct IoCounter {
    metadata_bytes: AtomicU64,
    data_bytes: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IoSnapshot {
    pub metadata_bytes: u64,
    pub data_bytes: u64,
}

impl IoCounter {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn add_metadata(&self, n: u64) {
        self.metadata_bytes.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_data(&self, n: u64) {
        self.data_bytes.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> IoSnapshot {
        IoSnapshot {
            metadata_bytes: self.metadata_bytes.load(Ordering::Relaxed),
            data_bytes: self.data_bytes.load(Ordering::Relaxed),
        }
    }
}

impl IoSnapshot {
    pub fn since(&self, earlier: &IoSnapshot) -> IoSnapshot {
        IoSnapshot {
            metadata_bytes: self.metadata_bytes - earlier.metadata_bytes,
            data_bytes: self.data_bytes - earlier.data_bytes,
        }
    }
}

#[cfg(unix)]
fn read_at(file: &File, buf: &mut [u8], offset: u64) -> io::Result<usize> {
    std::os::unix::fs::FileExt::read_at(file, buf, offset)
}

#[cfg(windows)]
fn read_at(file: &File, buf: &mut [u8], offset: u64) -> io::Result<usize> {
    std::os::windows::fs::FileExt::seek_read(file, buf, offset)
}

/// Reads the byte range `pos..end` of a shared file with positional reads,
/// counting every byte as column data.
pub struct PositionedReader {
    file: Arc<File>,
    pos: u64,
    end: u64,
    io: Arc<IoCounter>,
}

impl PositionedReader {
    pub fn new(file: Arc<File>, pos: u64, len: u64, io: Arc<IoCounter>) -> Self {
        Self {
            file,
            pos,
            end: pos + len,
            io,
        }
    }

    pub fn remaining(&self) -> u64 {
        self.end - self.pos
    }
}

impl Read for PositionedReader {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let want = (buf.len() as u64).min(self.remaining()) as usize;
        if want == 0 {
            return Ok(0);
        }
        let n = read_at(&self.file, &mut buf[..want], self.pos)?;
        self.pos += n as u64;
        self.io.add_data(n as u64);
        Ok(n)
    }
}

/// Reads exactly `len` bytes at `offset`, counted as metadata.
pub(crate) fn read_metadata_at(
    file: &File,
    offset: u64,
    len: usize,
    io: &IoCounter,
) -> io::Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    let mut filled = 0;
    while filled < len {
        let n = read_at(file, &mut buf[filled..], offset + filled as u64)?;
        if n == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "short read"));
        }
        filled += n;
    }
    io.add_metadata(len as u64);
    Ok(buf)
}
