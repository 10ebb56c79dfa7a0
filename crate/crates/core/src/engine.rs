//! Deterministic discrete-event core: virtual clock, time-ordered event queue,
//! and seedable random streams.
//!
//! Time is integer microseconds so that per-packet delay components sum to the
//! end-to-end latency exactly, with zero tolerance. Events with equal fire
//! times are dequeued in insertion order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::{Add, AddAssign};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BearerId, FlowKey, PduSeq, UeId};

/// Duration in integer microseconds.
pub type Micros = u64;

/// Virtual simulation time, microseconds since simulation start.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    /// Elapsed microseconds since `earlier`. Panics if `earlier` is later.
    pub fn since(self, earlier: SimTime) -> Micros {
        self.0
            .checked_sub(earlier.0)
            .unwrap_or_else(|| panic!("time went backwards: {} < {}", self, earlier))
    }
}

impl Add<Micros> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: Micros) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl AddAssign<Micros> for SimTime {
    fn add_assign(&mut self, rhs: Micros) {
        self.0 += rhs;
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// Smallest multiple of `slot_len` that is >= `t`. A time already on a
/// boundary maps to itself.
pub fn next_slot_boundary(t: SimTime, slot_len: Micros) -> SimTime {
    assert!(slot_len > 0, "slot length must be positive");
    SimTime(t.0.div_ceil(slot_len) * slot_len)
}

/// What a scheduled event does when it fires.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    PacketArrival { key: FlowKey },
    UlGrantReady { pdu: PduSeq },
    UlTxDone { pdu: PduSeq },
    GnbProcDone { pdu: PduSeq },
    CorePathDone { pdu: PduSeq },
    DlSlotBoundary { bearer: BearerId },
    PtmTxDone { bearer: BearerId, pdu: PduSeq },
    NakReport { pdu: PduSeq, naks: Vec<UeId> },
    RepairTxDone { pdu: PduSeq, receiver: UeId, attempt: u32, delivered: bool },
    MobilityChange { ue: UeId, attached: bool },
    PolicyChange { key: FlowKey, allowed: bool },
    ScenarioEnd,
}

#[derive(Clone, Debug)]
pub struct Event {
    pub fire_at: SimTime,
    /// Monotone insertion counter; ties on `fire_at` dequeue in this order.
    pub seq: u64,
    pub kind: EventKind,
}

struct HeapEntry(Event);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.fire_at == other.0.fire_at && self.0.seq == other.0.seq
    }
}
impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for earliest-first, FIFO on ties.
        other
            .0
            .fire_at
            .cmp(&self.0.fire_at)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Virtual clock plus the pending event set for one simulation run.
#[derive(Default)]
pub struct EventLoop {
    clock: SimTime,
    heap: BinaryHeap<HeapEntry>,
    next_seq: u64,
    processed: u64,
}

impl EventLoop {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Enqueue an event. Scheduling in the past is a programming fault and
    /// aborts the run.
    pub fn schedule(&mut self, fire_at: SimTime, kind: EventKind) {
        assert!(
            fire_at >= self.clock,
            "event scheduled in the past: fire_at={} clock={} kind={:?}",
            fire_at,
            self.clock,
            kind
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(HeapEntry(Event { fire_at, seq, kind }));
    }

    fn pop(&mut self) -> Option<Event> {
        let ev = self.heap.pop()?.0;
        debug_assert!(ev.fire_at >= self.clock);
        self.clock = ev.fire_at;
        self.processed += 1;
        Some(ev)
    }

    /// Process all events with `fire_at <= end`, in (time, insertion) order.
    /// The clock lands on `end` afterwards even if the queue drained early.
    pub fn run_until(&mut self, end: SimTime, mut handler: impl FnMut(&mut Self, Event)) {
        while let Some(entry) = self.heap.peek() {
            if entry.0.fire_at > end {
                break;
            }
            let ev = self.pop().unwrap();
            handler(self, ev);
        }
        if end > self.clock {
            self.clock = end;
        }
    }

    /// Process every pending event, including ones handlers keep scheduling.
    pub fn run_to_exhaustion(&mut self, mut handler: impl FnMut(&mut Self, Event)) {
        while let Some(ev) = self.pop() {
            handler(self, ev);
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A named random stream derived from the scenario seed. Adding a new
/// consumer with its own label never perturbs existing streams.
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn derive(seed: u64, label: &str) -> Self {
        let sub_seed = splitmix64(seed ^ fnv1a(label.as_bytes()));
        RngStream { rng: ChaCha8Rng::seed_from_u64(sub_seed) }
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in the inclusive range [lo, hi].
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        self.rng.random_range(lo..=hi)
    }

    /// Exponential with the given mean, in microseconds (rounded down, min 1).
    pub fn exp_micros(&mut self, mean: f64) -> Micros {
        let u = 1.0 - self.unit(); // (0, 1]
        ((-mean * u.ln()).floor() as u64).max(1)
    }
}

/// Counter-style generator keyed by per-draw coordinates instead of draw
/// order. Used for per-(packet, receiver, attempt) loss so that outcomes do
/// not depend on event interleaving and stay identical across paired runs.
#[derive(Clone, Copy)]
pub struct KeyedRng {
    base: u64,
}

impl KeyedRng {
    pub fn derive(seed: u64, label: &str) -> Self {
        KeyedRng { base: splitmix64(seed ^ fnv1a(label.as_bytes())) }
    }

    /// Uniform in [0, 1) for the given key triple.
    pub fn unit(&self, a: u64, b: u64, c: u64) -> f64 {
        let mut x = self.base;
        x = splitmix64(x ^ a);
        x = splitmix64(x ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        x = splitmix64(x ^ c.wrapping_mul(0xc2b2_ae3d_27d4_eb4f));
        (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Duration sampler, either degenerate or uniform over an inclusive range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sampler {
    Fixed { fixed: Micros },
    Uniform { uniform: [Micros; 2] },
}

impl Sampler {
    pub const fn fixed(value: Micros) -> Self {
        Sampler::Fixed { fixed: value }
    }

    pub const fn uniform(lo: Micros, hi: Micros) -> Self {
        Sampler::Uniform { uniform: [lo, hi] }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Micros {
        match *self {
            Sampler::Fixed { fixed } => fixed,
            Sampler::Uniform { uniform: [lo, hi] } => rng.range(lo, hi),
        }
    }

    pub fn bounds(&self) -> (Micros, Micros) {
        match *self {
            Sampler::Fixed { fixed } => (fixed, fixed),
            Sampler::Uniform { uniform: [lo, hi] } => (lo, hi),
        }
    }

    pub fn mean(&self) -> f64 {
        let (lo, hi) = self.bounds();
        (lo + hi) as f64 / 2.0
    }

    pub fn is_valid(&self) -> bool {
        let (lo, hi) = self.bounds();
        lo <= hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::UeId;

    fn marker(n: u32) -> EventKind {
        EventKind::MobilityChange { ue: UeId(n), attached: true }
    }

    fn marker_id(kind: &EventKind) -> u32 {
        match kind {
            EventKind::MobilityChange { ue, .. } => ue.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn schedule_at_current_clock_fires_first() {
        let mut el = EventLoop::new();
        el.schedule(SimTime::from_micros(0), marker(1));
        let mut seen = vec![];
        el.run_until(SimTime::from_micros(10_000), |_, ev| seen.push(marker_id(&ev.kind)));
        assert_eq!(seen, vec![1]);
    }

    #[test]
    fn equal_fire_times_dequeue_in_insertion_order() {
        let mut el = EventLoop::new();
        el.schedule(SimTime::from_micros(500), marker(1));
        el.schedule(SimTime::from_micros(500), marker(2));
        let mut seen = vec![];
        el.run_until(SimTime::from_micros(500), |_, ev| seen.push(marker_id(&ev.kind)));
        assert_eq!(seen, vec![1, 2]);
    }

    #[test]
    #[should_panic(expected = "scheduled in the past")]
    fn scheduling_in_the_past_aborts() {
        let mut el = EventLoop::new();
        el.schedule(SimTime::from_micros(200), marker(1));
        el.run_until(SimTime::from_micros(200), |_, _| {});
        el.schedule(SimTime::from_micros(100), marker(2));
    }

    #[test]
    fn run_until_empty_queue_sets_clock_to_end() {
        let mut el = EventLoop::new();
        el.run_until(SimTime::from_micros(10_000), |_, _| panic!("no events expected"));
        assert_eq!(el.now(), SimTime::from_micros(10_000));
    }

    #[test]
    fn run_until_processes_only_due_events() {
        let mut el = EventLoop::new();
        for (i, t) in [1_000u64, 2_000, 3_000].iter().enumerate() {
            el.schedule(SimTime::from_micros(*t), marker(i as u32));
        }
        let mut count = 0;
        el.run_until(SimTime::from_micros(2_000), |_, _| count += 1);
        assert_eq!(count, 2);
        assert_eq!(el.pending(), 1);
    }

    // Handlers that schedule earlier-than-next events must still observe the
    // global (time, insertion) order. Oracle: sort the full trace.
    #[test]
    fn interleaved_scheduling_preserves_global_order() {
        let mut el = EventLoop::new();
        el.schedule(SimTime::from_micros(100), marker(0));
        el.schedule(SimTime::from_micros(900), marker(1));
        let mut trace: Vec<(u64, u32)> = vec![];
        el.run_to_exhaustion(|el, ev| {
            let id = marker_id(&ev.kind);
            trace.push((ev.fire_at.micros(), id));
            if id == 0 {
                // earlier than the already-queued 900us event
                el.schedule(SimTime::from_micros(300), marker(10));
                el.schedule(SimTime::from_micros(200), marker(11));
            }
            if id == 11 {
                el.schedule(SimTime::from_micros(250), marker(12));
            }
        });
        let mut expect = trace.clone();
        expect.sort_by_key(|&(t, _)| t);
        assert_eq!(trace, expect);
        assert_eq!(trace.len(), 5);
        assert_eq!(trace.last().unwrap().0, 900);
    }

    #[test]
    fn processed_timestamps_are_monotone() {
        let mut el = EventLoop::new();
        let mut rng = RngStream::derive(7, "test");
        for i in 0..200 {
            el.schedule(SimTime::from_micros(rng.range(0, 5_000)), marker(i));
        }
        let mut last = 0;
        el.run_to_exhaustion(|_, ev| {
            assert!(ev.fire_at.micros() >= last);
            last = ev.fire_at.micros();
        });
    }

    #[test]
    fn next_slot_boundary_cases() {
        let slot = 500;
        assert_eq!(next_slot_boundary(SimTime::from_micros(0), slot).micros(), 0);
        assert_eq!(next_slot_boundary(SimTime::from_micros(1), slot).micros(), 500);
        // oracle: ceil(1250/500)*500
        let expect = 1250u64.div_ceil(500) * 500;
        assert_eq!(expect, 1500);
        assert_eq!(next_slot_boundary(SimTime::from_micros(1250), slot).micros(), expect);
        assert_eq!(next_slot_boundary(SimTime::from_micros(500), slot).micros(), 500);
    }

    #[test]
    fn rng_streams_are_reproducible_and_independent() {
        let mut a1 = RngStream::derive(42, "traffic");
        let mut a2 = RngStream::derive(42, "traffic");
        let mut b = RngStream::derive(42, "core-delay");
        let seq_a1: Vec<u64> = (0..32).map(|_| a1.range(0, u64::MAX - 1)).collect();
        let seq_a2: Vec<u64> = (0..32).map(|_| a2.range(0, u64::MAX - 1)).collect();
        let seq_b: Vec<u64> = (0..32).map(|_| b.range(0, u64::MAX - 1)).collect();
        assert_eq!(seq_a1, seq_a2);
        assert_ne!(seq_a1, seq_b);
    }

    #[test]
    fn keyed_rng_is_order_independent() {
        let k = KeyedRng::derive(3, "loss");
        let a = k.unit(10, 2, 0);
        let _ = k.unit(99, 1, 1);
        assert_eq!(a, k.unit(10, 2, 0));
        assert!((0.0..1.0).contains(&a));
    }

    #[test]
    fn sampler_bounds_hold() {
        let mut rng = RngStream::derive(1, "s");
        let s = Sampler::uniform(250, 1000);
        for _ in 0..1000 {
            let v = s.sample(&mut rng);
            assert!((250..=1000).contains(&v));
        }
        assert_eq!(Sampler::fixed(7500).sample(&mut rng), 7500);
    }
}
