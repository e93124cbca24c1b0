use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

/// Millisecond timestamps for recorded responses.
pub trait Clock {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// Counter clock: each reading is one tick after the previous one. Machine
/// sessions use it so reruns produce byte-identical files.
#[derive(Default)]
pub struct LogicalClock {
    next: AtomicU64,
}

impl LogicalClock {
    pub fn starting_at(t: u64) -> Self {
        Self {
            next: AtomicU64::new(t),
        }
    }
}

impl Clock for LogicalClock {
    fn now_ms(&self) -> u64 {
        self.next.fetch_add(1, Ordering::Relaxed)
    }
}
