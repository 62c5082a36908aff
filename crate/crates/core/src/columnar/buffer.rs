// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::fmt;
use std::ops::Deref;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Accounts for bytes held by live batch buffers.
///
/// Buffers created with [`Buffer::tracked`] add their length on creation and
/// subtract it when the last reference is dropped, so `peak` is the high-water
/// mark of simultaneously live batch memory.
#[derive(Debug, Default)]
pub struct MemoryTracker {
    current: AtomicUsize,
    peak: AtomicUsize,
    allocations: AtomicUsize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MemorySnapshot {
    pub current: usize,
    pub peak: usize,
    pub allocations: usize,
}

impl MemoryTracker {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn acquire(&self, n: usize) {
        let now = self.current.fetch_add(n, Ordering::AcqRel) + n;
        self.peak.fetch_max(now, Ordering::AcqRel);
        self.allocations.fetch_add(1, Ordering::Relaxed);
    }

    fn release(&self, n: usize) {
        self.current.fetch_sub(n, Ordering::AcqRel);
    }

    pub fn snapshot(&self) -> MemorySnapshot {
        MemorySnapshot {
            current: self.current.load(Ordering::Acquire),
            peak: self.peak.load(Ordering::Acquire),
            allocations: self.allocations.load(Ordering::Relaxed),
        }
    }
}

struct Allocation {
    bytes: Vec<u8>,
    tracker: Option<Arc<MemoryTracker>>,
}

impl Drop for Allocation {
    fn drop(&mut self) {
        if let Some(t) = &self.tracker {
            t.release(self.bytes.len());
        }
    }
}

/// Immutable, reference-counted byte buffer. Cloning and slicing share the
/// underlying allocation.
#[derive(Clone)]
pub struct Buffer {
    alloc: Arc<Allocation>,
    offset: usize,
    len: usize,
}

impl Buffer {
    pub fn from_vec(bytes: Vec<u8>) -> Self {
        Self::tracked(bytes, None)
    }

    pub fn tracked(bytes: Vec<u8>, tracker: Option<&Arc<MemoryTracker>>) -> Self {
        let len = bytes.len();
        if let Some(t) = tracker {
            t.acquire(len);
        }
        Self {
            alloc: Arc::new(Allocation {
                bytes,
                tracker: tracker.cloned(),
            }),
            offset: 0,
            len,
        }
    }

    pub fn empty() -> Self {
        Self::from_vec(Vec::new())
    }

    /// Shares `len` bytes starting at `offset`.
    ///
    /// Panics if the range is out of bounds.
    pub fn slice(&self, offset: usize, len: usize) -> Self {
        assert!(
            offset.checked_add(len).is_some_and(|end| end <= self.len),
            "slice {offset}+{len} out of bounds for buffer of {}",
            self.len
        );
        Self {
            alloc: Arc::clone(&self.alloc),
            offset: self.offset + offset,
            len,
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.alloc.bytes[self.offset..self.offset + self.len]
    }

    /// True when both buffers view the same allocation.
    pub fn shares_allocation(&self, other: &Buffer) -> bool {
        Arc::ptr_eq(&self.alloc, &other.alloc)
    }
}

impl Deref for Buffer {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        self.as_slice()
    }
}

impl AsRef<[u8]> for Buffer {
    fn as_ref(&self) -> &[u8] {
        self.as_slice()
    }
}

impl PartialEq for Buffer {
    fn eq(&self, other: &Self) -> bool {
        self.as_slice() == other.as_slice()
    }
}

impl Eq for Buffer {}

impl fmt::Debug for Buffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Buffer({} bytes)", self.len)
    }
}

impl From<Vec<u8>> for Buffer {
    fn from(v: Vec<u8>) -> Self {
        Buffer::from_vec(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_follows_last_reference() {
        let t = MemoryTracker::new();
        let a = Buffer::tracked(vec![0; 100], Some(&t));
        let b = a.slice(10, 20);
        assert_eq!(t.snapshot().current, 100);
        drop(a);
        assert_eq!(t.snapshot().current, 100);
        assert_eq!(b.len(), 20);
        drop(b);
        let s = t.snapshot();
        assert_eq!((s.current, s.peak, s.allocations), (0, 100, 1));
    }

    #[test]
    fn slices_share() {
        let a = Buffer::from_vec((0u8..10).collect());
        let b = a.slice(2, 3);
        assert_eq!(&*b, &[2, 3, 4]);
        assert!(a.shares_allocation(&b));
        assert_eq!(&*b.slice(1, 2), &[3, 4]);
    }

    #[test]
    #[should_panic]
    fn slice_out_of_bounds() {
        Buffer::from_vec(vec![1, 2]).slice(1, 2);
    }
}
