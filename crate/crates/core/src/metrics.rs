//! Per-packet, per-receiver latency ledger and the statistics derived from
//! it: delay decomposition, deadline reliability, and sweep aggregates.
//!
//! The ledger invariant is exact: for every delivered (packet, receiver)
//! pair, the sum of recorded delay components equals `delivered_at -
//! created_at` in integer microseconds, zero tolerance.

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{PduSeq, UeId};
use crate::engine::{Micros, SimTime};

/// Which path carried a packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    CoreAnchored,
    LocalBreakout,
}

impl Path {
    pub fn tag(self) -> &'static str {
        match self {
            Path::CoreAnchored => "ca",
            Path::LocalBreakout => "lb",
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One additive piece of the end-to-end delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    /// Uplink grant wait.
    UlGrant,
    /// Uplink transmission.
    UlTx,
    /// gNB processing (PDCP/RLC handling, group mapping, scheduling work).
    GnbProc,
    /// Backhaul + user-plane anchor + application segment; core path only.
    CorePath,
    /// Wait for the next downlink PTM opportunity, including queueing.
    DlSched,
    /// Downlink PTM transmission.
    DlTx,
    /// Extra delay of a NAK-triggered unicast repair past the PTM delivery.
    Repair,
}

impl Component {
    pub const ALL: [Component; 7] = [
        Component::UlGrant,
        Component::UlTx,
        Component::GnbProc,
        Component::CorePath,
        Component::DlSched,
        Component::DlTx,
        Component::Repair,
    ];

    fn index(self) -> usize {
        match self {
            Component::UlGrant => 0,
            Component::UlTx => 1,
            Component::GnbProc => 2,
            Component::CorePath => 3,
            Component::DlSched => 4,
            Component::DlTx => 5,
            Component::Repair => 6,
        }
    }
}

/// Ledger entry for one (packet, receiver) pair.
#[derive(Clone, Debug)]
pub struct PairRecord {
    pub created_at: SimTime,
    pub path: Option<Path>,
    components: [Option<Micros>; 7],
    pub delivered_at: Option<SimTime>,
    pub lost: bool,
}

impl PairRecord {
    fn new(created_at: SimTime) -> Self {
        PairRecord {
            created_at,
            path: None,
            components: [None; 7],
            delivered_at: None,
            lost: false,
        }
    }

    pub fn component(&self, c: Component) -> Micros {
        self.components[c.index()].unwrap_or(0)
    }

    pub fn component_sum(&self) -> Micros {
        self.components.iter().flatten().sum()
    }

    /// End-to-end latency for delivered pairs.
    pub fn latency(&self) -> Option<Micros> {
        self.delivered_at.map(|at| at.since(self.created_at))
    }

    /// Delivery-from-gNB latency: downlink wait + transmission + repair.
    pub fn dl_latency(&self) -> Option<Micros> {
        self.delivered_at.map(|_| {
            self.component(Component::DlSched)
                + self.component(Component::DlTx)
                + self.component(Component::Repair)
        })
    }

    pub fn metric(&self, dl_only: bool) -> Option<Micros> {
        if dl_only {
            self.dl_latency()
        } else {
            self.latency()
        }
    }
}

/// Per-run record of every (packet, receiver) pair.
#[derive(Clone, Debug, Default)]
pub struct LatencyLedger {
    records: BTreeMap<(PduSeq, UeId), PairRecord>,
    closed: bool,
}

impl LatencyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn entry(&mut self, pdu: PduSeq, receiver: UeId) -> &mut PairRecord {
        assert!(!self.closed, "ledger already closed");
        self.records
            .get_mut(&(pdu, receiver))
            .unwrap_or_else(|| panic!("no ledger pair for pdu {pdu} receiver {receiver}"))
    }

    /// Register a pair at packet creation time.
    pub fn open(&mut self, pdu: PduSeq, receiver: UeId, created_at: SimTime) {
        assert!(!self.closed, "ledger already closed");
        let prev = self.records.insert((pdu, receiver), PairRecord::new(created_at));
        assert!(prev.is_none(), "pair (pdu {pdu}, receiver {receiver}) opened twice");
    }

    pub fn set_path(&mut self, pdu: PduSeq, receiver: UeId, path: Path) {
        let rec = self.entry(pdu, receiver);
        assert!(rec.path.is_none(), "path set twice for pdu {pdu} receiver {receiver}");
        rec.path = Some(path);
    }

    /// Record one delay component. Double-recording a component, or a core
    /// component on a local-breakout pair, is a fault.
    pub fn record(&mut self, pdu: PduSeq, receiver: UeId, component: Component, value: Micros) {
        let rec = self.entry(pdu, receiver);
        if component == Component::CorePath {
            assert!(
                rec.path != Some(Path::LocalBreakout),
                "core segment recorded on a local-breakout pair (pdu {pdu}, receiver {receiver})"
            );
        }
        let slot = &mut rec.components[component.index()];
        assert!(
            slot.is_none(),
            "component {component:?} recorded twice for pdu {pdu} receiver {receiver}"
        );
        *slot = Some(value);
    }

    pub fn mark_delivered(&mut self, pdu: PduSeq, receiver: UeId, at: SimTime) {
        let rec = self.entry(pdu, receiver);
        assert!(
            rec.delivered_at.is_none() && !rec.lost,
            "pair (pdu {pdu}, receiver {receiver}) resolved twice"
        );
        rec.delivered_at = Some(at);
    }

    pub fn mark_lost(&mut self, pdu: PduSeq, receiver: UeId) {
        let rec = self.entry(pdu, receiver);
        assert!(
            rec.delivered_at.is_none() && !rec.lost,
            "pair (pdu {pdu}, receiver {receiver}) resolved twice"
        );
        rec.lost = true;
    }

    /// Freeze the ledger and check the sum identity on every delivered pair.
    pub fn close(&mut self) {
        for ((pdu, receiver), rec) in &self.records {
            if let Some(latency) = rec.latency() {
                assert_eq!(
                    latency,
                    rec.component_sum(),
                    "ledger sum mismatch for pdu {pdu} receiver {receiver}"
                );
            } else {
                assert!(
                    rec.lost,
                    "pair (pdu {pdu}, receiver {receiver}) neither delivered nor lost"
                );
            }
        }
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, pdu: PduSeq, receiver: UeId) -> Option<&PairRecord> {
        self.records.get(&(pdu, receiver))
    }

    /// Pairs in (packet, receiver) order.
    pub fn iter(&self) -> impl Iterator<Item = (&(PduSeq, UeId), &PairRecord)> {
        self.records.iter()
    }

    pub fn delivered(&self) -> usize {
        self.records.values().filter(|r| r.delivered_at.is_some()).count()
    }

    pub fn lost(&self) -> usize {
        self.records.values().filter(|r| r.lost).count()
    }
}

/// Deadline-reliability verdict over all generated pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReliabilityReport {
    pub deadline: Micros,
    pub target: f64,
    pub achieved: f64,
    pub met: bool,
    /// True when the ledger was empty and `achieved` defaulted to 1.0.
    pub degenerate: bool,
}

/// Fraction of generated (packet, receiver) pairs delivered within the
/// deadline. Lost pairs count as failures; repaired deliveries count at their
/// actual delivery time.
pub fn reliability(ledger: &LatencyLedger, deadline: Micros, target: f64) -> ReliabilityReport {
    assert!(ledger.is_closed(), "reliability requires a closed ledger");
    reliability_metric(ledger, deadline, target, false)
}

pub fn reliability_metric(
    ledger: &LatencyLedger,
    deadline: Micros,
    target: f64,
    dl_only: bool,
) -> ReliabilityReport {
    if ledger.is_empty() {
        return ReliabilityReport { deadline, target, achieved: 1.0, met: true, degenerate: true };
    }
    let total = ledger.len();
    let within = ledger
        .iter()
        .filter(|(_, r)| r.metric(dl_only).map(|l| l <= deadline).unwrap_or(false))
        .count();
    let achieved = within as f64 / total as f64;
    ReliabilityReport { deadline, target, achieved, met: achieved >= target, degenerate: false }
}

/// Nearest-rank percentile of a sorted sample.
pub fn percentile(sorted: &[Micros], q: f64) -> Micros {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank.min(sorted.len()) - 1]
}

/// Aggregate latency statistics for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LatencySummary {
    pub pairs: usize,
    pub delivered: usize,
    pub lost: usize,
    pub mean_us: f64,
    pub p50_us: Micros,
    pub p95_us: Micros,
    pub p99_us: Micros,
    pub min_us: Micros,
    pub max_us: Micros,
}

pub fn summarize(ledger: &LatencyLedger, dl_only: bool) -> LatencySummary {
    let mut latencies: Vec<Micros> =
        ledger.iter().filter_map(|(_, r)| r.metric(dl_only)).collect();
    latencies.sort_unstable();
    let mut out = LatencySummary {
        pairs: ledger.len(),
        delivered: ledger.delivered(),
        lost: ledger.lost(),
        ..LatencySummary::default()
    };
    if latencies.is_empty() {
        return out;
    }
    out.mean_us = latencies.iter().sum::<u64>() as f64 / latencies.len() as f64;
    out.p50_us = percentile(&latencies, 0.50);
    out.p95_us = percentile(&latencies, 0.95);
    out.p99_us = percentile(&latencies, 0.99);
    out.min_us = latencies[0];
    out.max_us = *latencies.last().unwrap();
    out
}

/// Per-path statistics at one sweep size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStats {
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    pub reliability: f64,
}

/// One receiver-count point of the group-size sweep, averaged over seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub n_receivers: u32,
    pub ca: PathStats,
    pub lb: PathStats,
}

impl SweepPoint {
    /// Mean latency removed by local breakout at this group size.
    pub fn gap_us(&self) -> f64 {
        self.ca.mean_us - self.lb.mean_us
    }
}
