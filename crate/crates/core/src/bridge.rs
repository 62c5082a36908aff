// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! The simulated foreign boundary.
//!
//! Native-side objects (datasets, scanners, scan tasks, serialized batches)
//! live in a [`Bridge`] registry and are referred to from the consumer side
//! only through opaque UUID [`Handle`]s. Every batch crosses the boundary as
//! exactly one serialized [`BatchMessage`]; `batch_copies` counts those
//! crossings.

use std::any::Any;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::columnar::{serialize_batch_tracked, BatchMessage, MemoryTracker, RecordBatch};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HandleKind {
    Dataset,
    Scanner,
    ScanTask,
    Batch,
}

/// Opaque reference to a native object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Handle {
    uuid: Uuid,
    kind: HandleKind,
}

impl Handle {
    pub fn uuid(&self) -> Uuid {
        self.uuid
    }

    pub fn kind(&self) -> HandleKind {
        self.kind
    }

    /// A handle for an arbitrary uuid, e.g. one received from elsewhere.
    pub fn from_raw(uuid: Uuid, kind: HandleKind) -> Self {
        Self { uuid, kind }
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{}", self.kind, self.uuid)
    }
}

/// Counter snapshot. `live == registered - released` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BridgeStats {
    pub registered: u64,
    pub released: u64,
    pub batch_copies: u64,
    pub live: u64,
}

#[derive(Default)]
struct Counters {
    registered: u64,
    released: u64,
    batch_copies: u64,
}

struct Entry {
    kind: HandleKind,
    object: Arc<dyn Any + Send + Sync>,
}

/// Handle registry with lifetime and copy accounting. Safe to share between
/// threads.
pub struct Bridge {
    // uuids are (prefix, sequence) pairs, so a released uuid can be told apart
    // from a foreign one without keeping tombstones
    prefix: u64,
    next_seq: AtomicU64,
    live: DashMap<Uuid, Entry>,
    counters: Mutex<Counters>,
}

impl Default for Bridge {
    fn default() -> Self {
        Self {
            prefix: Uuid::new_v4().as_u64_pair().0,
            next_seq: AtomicU64::new(0),
            live: DashMap::new(),
            counters: Mutex::new(Counters::default()),
        }
    }
}

impl fmt::Debug for Bridge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bridge")
            .field("stats", &self.stats())
            .finish()
    }
}

impl Bridge {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn register<T: Any + Send + Sync>(&self, object: Arc<T>, kind: HandleKind) -> Handle {
        let seq = self.next_seq.fetch_add(1, Ordering::Relaxed);
        let uuid = Uuid::from_u64_pair(self.prefix, seq);
        self.live.insert(uuid, Entry { kind, object });
        self.counters.lock().unwrap().registered += 1;
        Handle { uuid, kind }
    }

    fn issued_here(&self, uuid: Uuid) -> bool {
        let (prefix, seq) = uuid.as_u64_pair();
        prefix == self.prefix && seq < self.next_seq.load(Ordering::Acquire)
    }

    fn missing(&self, handle: Handle, releasing: bool) -> Error {
        if !self.issued_here(handle.uuid) {
            Error::UnknownHandle(handle.uuid)
        } else if releasing {
            Error::DoubleRelease(handle.uuid)
        } else {
            Error::DanglingHandle(handle.uuid)
        }
    }

    /// Returns the live object behind `handle`.
    pub fn resolve<T: Any + Send + Sync>(&self, handle: Handle) -> Result<Arc<T>> {
        let entry = self
            .live
            .get(&handle.uuid)
            .ok_or_else(|| self.missing(handle, false))?;
        if entry.kind != handle.kind {
            return Err(Error::HandleKind {
                expected: handle.kind,
                actual: entry.kind,
            });
        }
        Arc::clone(&entry.object).downcast::<T>().map_err(|_| {
            Error::InvalidArgument(format!(
                "handle {handle} does not refer to a {}",
                std::any::type_name::<T>()
            ))
        })
    }

    /// Drops the registry's reference to the object behind `handle`.
    pub fn release(&self, handle: Handle) -> Result<()> {
        let removed = self
            .live
            .remove_if(&handle.uuid, |_, e| e.kind == handle.kind);
        match removed {
            Some(_) => {
                self.counters.lock().unwrap().released += 1;
                Ok(())
            }
            None => match self.live.get(&handle.uuid) {
                Some(e) => Err(Error::HandleKind {
                    expected: handle.kind,
                    actual: e.kind,
                }),
                None => Err(self.missing(handle, true)),
            },
        }
    }

    /// Serializes `batch` into a message (the one permitted copy), registers
    /// it and returns its handle together with the message.
    pub fn transfer_batch(&self, batch: &RecordBatch) -> Result<(Handle, BatchMessage)> {
        self.transfer_batch_tracked(batch, None)
    }

    pub(crate) fn transfer_batch_tracked(
        &self,
        batch: &RecordBatch,
        tracker: Option<&Arc<MemoryTracker>>,
    ) -> Result<(Handle, BatchMessage)> {
        let msg = serialize_batch_tracked(batch, tracker)?;
        self.counters.lock().unwrap().batch_copies += 1;
        let handle = self.register(Arc::new(msg.clone()), HandleKind::Batch);
        Ok((handle, msg))
    }

    pub fn stats(&self) -> BridgeStats {
        let c = self.counters.lock().unwrap();
        BridgeStats {
            registered: c.registered,
            released: c.released,
            batch_copies: c.batch_copies,
            live: c.registered - c.released,
        }
    }

    /// Number of entries currently in the registry map.
    pub fn live_entries(&self) -> usize {
        self.live.len()
    }
}
