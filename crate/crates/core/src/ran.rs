//! Radio-segment timing: uplink grant and transmission, gNB processing,
//! downlink PTM scheduling, optional per-receiver loss, NAK collection, and
//! selective unicast repair.
//!
//! The PHY is abstracted to slot-granular transmission times; a packet always
//! fits in one transport block, so a transmission occupies a whole number of
//! slots.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{PduSeq, UeId};
use crate::engine::{next_slot_boundary, KeyedRng, Micros, RngStream, Sampler, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UlGrantMode {
    /// Pre-allocated occasions: wait to the next slot boundary, capped by a
    /// draw from the grant sampler.
    ConfiguredGrant,
    /// Scheduling-request round trip: full sampler draw.
    RequestBased,
}

/// Slot structure and the per-segment delay samplers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RadioTiming {
    pub slot_len: Micros,
    pub ul_grant_mode: UlGrantMode,
    pub ul_grant_delay: Sampler,
    pub gnb_proc_delay: Sampler,
    pub ul_tx_slots: u32,
    pub dl_tx_slots: u32,
    /// NAK feedback arrives this long after the PTM transmission ends.
    pub nak_window: Micros,
    /// Extra gNB delay before repair transmissions begin.
    pub repair_proc_delay: Micros,
    pub max_repair_attempts: u32,
}

impl Default for RadioTiming {
    fn default() -> Self {
        RadioTiming {
            slot_len: 500,
            ul_grant_mode: UlGrantMode::RequestBased,
            ul_grant_delay: Sampler::uniform(250, 1000),
            gnb_proc_delay: Sampler::uniform(1000, 2000),
            ul_tx_slots: 1,
            dl_tx_slots: 1,
            nak_window: 500,
            repair_proc_delay: 0,
            max_repair_attempts: 3,
        }
    }
}

impl RadioTiming {
    pub fn ul_tx(&self) -> Micros {
        self.ul_tx_slots as u64 * self.slot_len
    }

    pub fn dl_tx(&self) -> Micros {
        self.dl_tx_slots as u64 * self.slot_len
    }
}

/// Independent per-receiver delivery failure probability for one PTM or
/// repair transmission. Zero by default, isolating path latency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub per_receiver_loss_prob: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel { per_receiver_loss_prob: 0.0 }
    }
}

impl LossModel {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.per_receiver_loss_prob)
    }
}

/// Uplink grant wait plus transmission duration for a packet created at `at`.
pub fn ul_segment(at: SimTime, timing: &RadioTiming, rng: &mut RngStream) -> (Micros, Micros) {
    let draw = timing.ul_grant_delay.sample(rng);
    let grant_wait = match timing.ul_grant_mode {
        UlGrantMode::RequestBased => draw,
        UlGrantMode::ConfiguredGrant => {
            let align = next_slot_boundary(at, timing.slot_len).since(at);
            align.min(draw)
        }
    };
    (grant_wait, timing.ul_tx())
}

/// A planned PTM transmission on a bearer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PtmSchedule {
    pub start: SimTime,
    pub done: SimTime,
    pub dl_wait: Micros,
    pub dl_tx: Micros,
}

/// Schedule the head-of-queue packet: transmission starts at the next slot
/// boundary at or after `ready_at`, but never before `not_before` (the end of
/// the bearer's previous transmission).
pub fn schedule_ptm(ready_at: SimTime, not_before: SimTime, timing: &RadioTiming) -> PtmSchedule {
    let start = next_slot_boundary(ready_at.max(not_before), timing.slot_len);
    let dl_tx = timing.dl_tx();
    PtmSchedule { start, done: start + dl_tx, dl_wait: start.since(ready_at), dl_tx }
}

/// Outcome of one PTM transmission: receivers that got the packet and those
/// that report a NAK. The two sets partition the receiver set.
pub fn ptm_deliver(
    pdu: PduSeq,
    receivers: &BTreeSet<UeId>,
    loss: &LossModel,
    keyed: &KeyedRng,
) -> (BTreeSet<UeId>, BTreeSet<UeId>) {
    let p = loss.per_receiver_loss_prob;
    let mut delivered = BTreeSet::new();
    let mut nak = BTreeSet::new();
    for &r in receivers {
        // attempt 0 is the PTM transmission itself
        if keyed.unit(pdu, r.0 as u64, 0) >= p {
            delivered.insert(r);
        } else {
            nak.insert(r);
        }
    }
    (delivered, nak)
}

/// One slot of the selective unicast repair schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepairAttempt {
    pub receiver: UeId,
    /// 1-based; attempt 0 was the PTM transmission.
    pub attempt: u32,
    pub tx_start: SimTime,
    pub delivered_at: SimTime,
    pub delivered: bool,
}

/// Selective unicast repair for the NAK set of one packet, starting no
/// earlier than `at`. Repair slots are serialized: each round walks the
/// still-missing receivers in ascending UE id, one slot each, re-sampling
/// loss per attempt, until delivery or `max_repair_attempts` is exhausted.
pub fn repair_unicast(
    pdu: PduSeq,
    nak_set: &BTreeSet<UeId>,
    timing: &RadioTiming,
    at: SimTime,
    loss: &LossModel,
    keyed: &KeyedRng,
) -> Vec<RepairAttempt> {
    assert!(!nak_set.is_empty(), "repair invoked without NAKs");
    let p = loss.per_receiver_loss_prob;
    let base = next_slot_boundary(at, timing.slot_len);
    let slot = timing.slot_len;

    let mut missing: Vec<UeId> = nak_set.iter().copied().collect();
    let mut attempts = vec![0u32; missing.len()];
    let mut out = Vec::new();
    let mut slot_idx: u64 = 0;

    while !missing.is_empty() {
        let mut still_missing = Vec::new();
        let mut still_attempts = Vec::new();
        for (i, &r) in missing.iter().enumerate() {
            let attempt = attempts[i] + 1;
            let tx_start = base + slot_idx * slot;
            slot_idx += 1;
            let delivered = keyed.unit(pdu, r.0 as u64, attempt as u64) >= p;
            out.push(RepairAttempt {
                receiver: r,
                attempt,
                tx_start,
                delivered_at: tx_start + slot,
                delivered,
            });
            if !delivered && attempt < timing.max_repair_attempts {
                still_missing.push(r);
                still_attempts.push(attempt);
            }
        }
        missing = still_missing;
        attempts = still_attempts;
    }
    out
}
