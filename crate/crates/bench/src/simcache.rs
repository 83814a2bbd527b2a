//! A deterministic block cache that stands in for the OS page cache.
//!
//! Blocks are admitted on first access until the resident octets would
//! exceed the capacity; after that the least recently used blocks are
//! evicted to make room.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use cubepack::{BlockKey, BlockObserver};

#[derive(Debug, Default)]
struct State {
    tick: u64,
    resident: HashMap<BlockKey, (u64, usize)>,
    by_tick: BTreeMap<u64, BlockKey>,
    used: u64,
    hits: u64,
    misses: u64,
}

#[derive(Debug)]
pub struct SimCache {
    capacity: u64,
    state: Mutex<State>,
}

impl SimCache {
    pub fn new(capacity: u64) -> Self {
        SimCache {
            capacity,
            state: Mutex::new(State::default()),
        }
    }

    pub fn unbounded() -> Self {
        Self::new(u64::MAX)
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn hits(&self) -> u64 {
        self.state.lock().unwrap().hits
    }

    pub fn misses(&self) -> u64 {
        self.state.lock().unwrap().misses
    }

    /// Octets currently resident.
    pub fn resident(&self) -> u64 {
        self.state.lock().unwrap().used
    }

    pub fn resident_blocks(&self) -> usize {
        self.state.lock().unwrap().resident.len()
    }

    /// Drops every resident block; counters are kept.
    pub fn clear(&self) {
        let mut s = self.state.lock().unwrap();
        s.resident.clear();
        s.by_tick.clear();
        s.used = 0;
    }
}

impl BlockObserver for SimCache {
    fn access(&self, key: BlockKey, len: usize) {
        let mut guard = self.state.lock().unwrap();
        let s = &mut *guard;
        s.tick += 1;
        let tick = s.tick;
        if let Some(entry) = s.resident.get_mut(&key) {
            s.by_tick.remove(&entry.0);
            entry.0 = tick;
            s.by_tick.insert(tick, key);
            s.hits += 1;
            return;
        }
        s.misses += 1;
        if len as u64 > self.capacity {
            return;
        }
        while s.used + len as u64 > self.capacity {
            let (_, victim) = s
                .by_tick
                .pop_first()
                .expect("used > 0 implies a resident block");
            let (_, vlen) = s.resident.remove(&victim).unwrap();
            s.used -= vlen as u64;
        }
        s.resident.insert(key, (tick, len));
        s.by_tick.insert(tick, key);
        s.used += len as u64;
    }
}
