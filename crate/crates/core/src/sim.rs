//! Discrete-event scheduler, labelled RNG streams and the append-only event log.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::SimError;

/// Simulated time in milliseconds since scenario start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1000)
    }

    pub const fn as_millis(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Milliseconds elapsed since `earlier`, zero if `earlier` is later.
    pub fn since(self, earlier: SimTime) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;
    fn add(self, ms: u64) -> SimTime {
        SimTime(self.0 + ms)
    }
}

impl Sub<u64> for SimTime {
    type Output = SimTime;
    fn sub(self, ms: u64) -> SimTime {
        SimTime(self.0.saturating_sub(ms))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:03}s", self.0 / 1000, self.0 % 1000)
    }
}

/// Event priority classes. Lower fires first at equal time.
pub mod priority {
    pub const RISK: u8 = 0;
    pub const LEDGER: u8 = 1;
    pub const AGENT: u8 = 2;
    /// Fault injectors, operators and scripted governance: after agents.
    pub const EXTERNAL: u8 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug, Clone)]
pub struct ScheduledEvent<E> {
    pub fire_at: SimTime,
    pub priority: u8,
    pub seq: u64,
    pub payload: E,
}

impl<E> ScheduledEvent<E> {
    fn key(&self) -> (SimTime, u8, u64) {
        (self.fire_at, self.priority, self.seq)
    }
}

impl<E> PartialEq for ScheduledEvent<E> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<E> Eq for ScheduledEvent<E> {}

impl<E> PartialOrd for ScheduledEvent<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for ScheduledEvent<E> {
    // reversed so BinaryHeap pops the smallest key
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

/// Single-threaded event queue ordered by `(fire_at, priority, seq)`.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<ScheduledEvent<E>>,
    cancelled: HashSet<u64>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len() - self.cancelled.len()
    }

    pub fn schedule(&mut self, fire_at: SimTime, priority: u8, payload: E) -> Result<EventHandle, SimError> {
        if fire_at < self.now {
            return Err(SimError::PastTime { fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(ScheduledEvent { fire_at, priority, seq, payload });
        Ok(EventHandle(seq))
    }

    /// Schedules relative to `now()`; cannot fail.
    pub fn schedule_in(&mut self, delay_ms: u64, priority: u8, payload: E) -> EventHandle {
        let at = self.now + delay_ms;
        self.schedule(at, priority, payload).expect("relative schedule is never in the past")
    }

    /// Returns false if the event already fired or was cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq || self.queue.iter().all(|e| e.seq != handle.0) {
            return false;
        }
        self.cancelled.insert(handle.0)
    }

    /// Pops the next live event with `fire_at <= end`, advancing the clock to it.
    pub fn pop_until(&mut self, end: SimTime) -> Option<ScheduledEvent<E>> {
        while let Some(top) = self.queue.peek() {
            if top.fire_at > end {
                return None;
            }
            let ev = self.queue.pop().expect("peeked");
            if self.cancelled.remove(&ev.seq) {
                continue;
            }
            debug_assert!(ev.fire_at >= self.now);
            self.now = ev.fire_at;
            return Some(ev);
        }
        None
    }

    /// Moves the clock forward without firing anything. Used after draining.
    pub fn advance_to(&mut self, end: SimTime) {
        if end > self.now {
            self.now = end;
        }
    }

    /// Fires every event with `fire_at <= end` in key order and leaves `now() == end`.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F) -> usize
    where
        F: FnMut(&mut Scheduler<E>, ScheduledEvent<E>),
    {
        let mut fired = 0;
        while let Some(ev) = self.pop_until(end) {
            handler(self, ev);
            fired += 1;
        }
        self.advance_to(end);
        fired
    }
}

/// Deterministic random stream keyed by `(seed, label)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> Self {
        assert!(!label.is_empty(), "rng label must be non-empty");
        let mut h = Sha256::new();
        h.update(b"ozsim-rng-v1");
        h.update(seed.to_le_bytes());
        h.update(label.as_bytes());
        let key: [u8; 32] = h.finalize().into();
        RngStream { label: label.to_string(), rng: ChaCha8Rng::from_seed(key) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Hands out RNG streams for one scenario seed.
#[derive(Clone, Copy, Debug)]
pub struct RngFactory {
    seed: u64,
}

impl RngFactory {
    pub fn new(seed: u64) -> Self {
        RngFactory { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fork_rng(&self, label: &str) -> RngStream {
        RngStream::new(self.seed, label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventLogRecord {
    pub t: SimTime,
    pub source: String,
    pub kind: String,
    pub detail: Map<String, Value>,
}

/// Append-only log of structured records. Keeps a running SHA-256 over the
/// serialized lines so the digest is available without re-serializing.
pub struct EventLog {
    records: Vec<EventLogRecord>,
    hasher: Sha256,
    last_t: SimTime,
    keep_records: bool,
    len: usize,
}

impl Default for EventLog {
    fn default() -> Self {
        Self::new(true)
    }
}

impl EventLog {
    /// With `keep_records == false` only the digest and count are maintained.
    pub fn new(keep_records: bool) -> Self {
        EventLog { records: Vec::new(), hasher: Sha256::new(), last_t: SimTime::ZERO, keep_records, len: 0 }
    }

    pub fn emit(&mut self, t: SimTime, source: &str, kind: &str, detail: Value) {
        let detail = match detail {
            Value::Object(m) => m,
            Value::Null => Map::new(),
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        self.push(EventLogRecord { t, source: source.to_string(), kind: kind.to_string(), detail });
    }

    pub fn push(&mut self, rec: EventLogRecord) {
        assert!(rec.t >= self.last_t, "event log must be time-ordered");
        self.last_t = rec.t;
        let line = serde_json::to_string(&rec).expect("log record serializes");
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        self.len += 1;
        if self.keep_records {
            self.records.push(rec);
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn records(&self) -> &[EventLogRecord] {
        &self.records
    }

    /// Hex SHA-256 over every line emitted so far.
    pub fn digest(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("log record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Digest of a sequence of already-serialized lines, matching `EventLog::digest`.
pub fn digest_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn priority_breaks_time_ties() {
        let mut s = Scheduler::new();
        s.schedule(SimTime(1000), 1, "late").unwrap();
        s.schedule(SimTime(1000), 0, "early").unwrap();
        let mut order = Vec::new();
        s.run_until(SimTime(2000), |_, ev| order.push(ev.payload));
        assert_eq!(order, vec!["early", "late"]);
    }

    #[test]
    fn insertion_order_breaks_full_ties() {
        let mut s = Scheduler::new();
        s.schedule(SimTime(500), 0, 'A').unwrap();
        s.schedule(SimTime(500), 0, 'B').unwrap();
        let mut order = Vec::new();
        s.run_until(SimTime(500), |_, ev| order.push(ev.payload));
        assert_eq!(order, vec!['A', 'B']);
    }

    #[test]
    fn past_time_is_rejected() {
        let mut s: Scheduler<()> = Scheduler::new();
        s.advance_to(SimTime(20));
        assert!(matches!(s.schedule(SimTime(10), 0, ()), Err(SimError::PastTime { .. })));
    }

    #[test]
    fn run_until_on_empty_queue_moves_clock() {
        let mut s: Scheduler<()> = Scheduler::new();
        assert_eq!(s.run_until(SimTime(5000), |_, _| {}), 0);
        assert_eq!(s.now(), SimTime(5000));
    }

    #[test]
    fn run_until_stops_at_end() {
        let mut s = Scheduler::new();
        for t in 1..=3 {
            s.schedule(SimTime(t), 2, t).unwrap();
        }
        assert_eq!(s.run_until(SimTime(2), |_, _| {}), 2);
        assert_eq!(s.now(), SimTime(2));
        assert_eq!(s.pending(), 1);
    }

    #[test]
    fn cancelled_events_do_not_fire() {
        let mut s = Scheduler::new();
        let h = s.schedule(SimTime(10), 0, 1).unwrap();
        s.schedule(SimTime(20), 0, 2).unwrap();
        assert!(s.cancel(h));
        assert!(!s.cancel(h));
        let mut fired = Vec::new();
        s.run_until(SimTime(100), |_, ev| fired.push(ev.payload));
        assert_eq!(fired, vec![2]);
    }

    #[test]
    fn handlers_can_schedule_follow_ups() {
        let mut s = Scheduler::new();
        s.schedule(SimTime(0), 0, 0u32).unwrap();
        let n = s.run_until(SimTime(10_000), |s, ev| {
            if ev.payload < 9 {
                s.schedule_in(1000, 0, ev.payload + 1);
            }
        });
        assert_eq!(n, 10);
    }

    #[test]
    fn same_label_same_stream() {
        let f = RngFactory::new(42);
        let a: Vec<u64> = (0..16).map({
            let mut r = f.fork_rng("users");
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..16).map({
            let mut r = f.fork_rng("users");
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
        let mut p = f.fork_rng("price");
        let c: Vec<u64> = (0..16).map(|_| p.random()).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = RngStream::new(42, "users");
        let mut b = RngStream::new(43, "users");
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn log_digest_matches_jsonl() {
        let mut log = EventLog::new(true);
        log.emit(SimTime(0), "sim", "start", serde_json::json!({"seed": 1}));
        log.emit(SimTime(5), "ledger", "block", serde_json::json!({"height": 1}));
        let text = log.to_jsonl();
        assert_eq!(digest_lines(text.lines()), log.digest());
    }

    #[test]
    #[should_panic]
    fn log_rejects_time_travel() {
        let mut log = EventLog::new(false);
        log.emit(SimTime(5), "a", "b", Value::Null);
        log.emit(SimTime(4), "a", "b", Value::Null);
    }
}
