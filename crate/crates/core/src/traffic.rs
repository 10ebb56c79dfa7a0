//! On/off source traffic generation.
//!
//! Arrivals within an ON window are deterministic at a fixed inter-arrival
//! spacing (the fluid reading of a constant data rate); randomness enters only
//! through the per-source phase. An optional switch replaces the fixed spacing
//! with exponential gaps for robustness experiments.

use serde::{Deserialize, Serialize};

use crate::engine::{Micros, RngStream, SimTime};

/// On/off workload shape for one source flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnOffProfile {
    pub on_time: Micros,
    pub off_time: Micros,
    pub data_rate_bps: u64,
    pub packet_bits: u32,
}

impl Default for OnOffProfile {
    fn default() -> Self {
        OnOffProfile {
            on_time: 10_000,
            off_time: 90_000,
            data_rate_bps: 1_000_000,
            packet_bits: 1002,
        }
    }
}

impl OnOffProfile {
    pub fn cycle(&self) -> Micros {
        self.on_time + self.off_time
    }

    /// Packet spacing during ON: packet_bits / data_rate, in microseconds.
    pub fn inter_arrival(&self) -> Micros {
        (self.packet_bits as u64 * 1_000_000) / self.data_rate_bps
    }

    pub fn is_valid(&self) -> bool {
        self.on_time > 0
            && self.off_time > 0
            && self.data_rate_bps > 0
            && self.packet_bits > 0
            && self.inter_arrival() > 0
    }
}

/// Deterministic arrival times in [0, horizon) for a source whose on/off
/// cycles start at -phase. Strictly increasing; every arrival falls inside an
/// ON window.
pub fn generate_arrivals(profile: &OnOffProfile, horizon: Micros, phase: Micros) -> Vec<SimTime> {
    assert!(profile.is_valid(), "invalid traffic profile");
    assert!(phase < profile.cycle(), "phase must be within one cycle");
    let cycle = profile.cycle() as i64;
    let ia = profile.inter_arrival() as i64;
    let horizon = horizon as i64;

    let mut out = Vec::new();
    // First cycle whose ON window can still intersect [0, horizon).
    let mut window_start = -(phase as i64);
    while window_start < horizon {
        let window_end = window_start + profile.on_time as i64;
        let mut t = window_start;
        while t < window_end {
            if t >= 0 && t < horizon {
                out.push(SimTime::from_micros(t as u64));
            }
            t += ia;
        }
        window_start += cycle;
    }
    out
}

/// Exponential-gap variant: within each ON window arrivals follow a Poisson
/// process whose mean gap equals the deterministic inter-arrival spacing.
pub fn generate_arrivals_exp(
    profile: &OnOffProfile,
    horizon: Micros,
    phase: Micros,
    rng: &mut RngStream,
) -> Vec<SimTime> {
    assert!(profile.is_valid(), "invalid traffic profile");
    assert!(phase < profile.cycle(), "phase must be within one cycle");
    let cycle = profile.cycle() as i64;
    let mean = profile.inter_arrival() as f64;
    let horizon = horizon as i64;

    let mut out = Vec::new();
    let mut window_start = -(phase as i64);
    while window_start < horizon {
        let window_end = window_start + profile.on_time as i64;
        let mut t = window_start + rng.exp_micros(mean) as i64;
        while t < window_end {
            if t >= 0 && t < horizon {
                out.push(SimTime::from_micros(t as u64));
            }
            t += rng.exp_micros(mean) as i64;
        }
        window_start += cycle;
    }
    out
}

/// One uniformly random phase in [0, cycle) per source, drawn from the
/// traffic stream. Desynchronizes sources.
pub fn assign_phases(n_sources: usize, profile: &OnOffProfile, rng: &mut RngStream) -> Vec<Micros> {
    assert!(n_sources >= 1);
    let cycle = profile.cycle();
    (0..n_sources).map(|_| rng.range(0, cycle - 1)).collect()
}
