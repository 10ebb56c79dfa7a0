//! Property tests for the ordering, partition, and determinism invariants.

use proptest::prelude::*;

use lbsim::config::{GroupConfig, ScenarioConfig};
use lbsim::domain::UeId;
use lbsim::engine::{EventKind, EventLoop, KeyedRng, SimTime};
use lbsim::output::packet_csv;
use lbsim::ran::{ptm_deliver, LossModel};
use lbsim::sim::run_scenario;
use lbsim::traffic::{generate_arrivals, OnOffProfile};

fn marker(n: u32) -> EventKind {
    EventKind::MobilityChange { ue: UeId(n), attached: true }
}

proptest! {
    // Processed order always equals the stable sort of (time, insertion),
    // including events scheduled by handlers mid-run.
    #[test]
    fn event_order_is_time_then_insertion(times in prop::collection::vec(0u64..50_000, 1..200)) {
        let mut el = EventLoop::new();
        for (i, &t) in times.iter().enumerate() {
            el.schedule(SimTime::from_micros(t), marker(i as u32));
        }
        let mut trace: Vec<(u64, u64)> = Vec::new();
        let extra_base = times.len() as u32;
        let mut extras = 0u32;
        el.run_to_exhaustion(|el, ev| {
            trace.push((ev.fire_at.micros(), ev.seq));
            // occasionally schedule an earlier-than-pending event
            if extras < 32 && ev.seq % 7 == 0 {
                el.schedule(ev.fire_at + 1, marker(extra_base + extras));
                extras += 1;
            }
        });
        let mut sorted = trace.clone();
        sorted.sort();
        prop_assert_eq!(&trace, &sorted);
    }

    // Arrivals are strictly increasing and never land in an OFF window,
    // for any phase and horizon.
    #[test]
    fn arrivals_stay_in_on_windows(phase in 0u64..100_000, horizon in 1u64..2_000_000) {
        let p = OnOffProfile::default();
        let arrivals = generate_arrivals(&p, horizon, phase);
        for w in arrivals.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for t in &arrivals {
            prop_assert!(t.micros() < horizon);
            prop_assert!((t.micros() + phase) % p.cycle() < p.on_time);
        }
    }

    // Over whole cycles the arrival count is phase-independent.
    #[test]
    fn arrival_count_is_phase_invariant_over_whole_cycles(
        phase in 0u64..100_000,
        cycles in 1u64..30,
    ) {
        let p = OnOffProfile::default();
        let arrivals = generate_arrivals(&p, cycles * p.cycle(), phase);
        prop_assert_eq!(arrivals.len() as u64, cycles * 10);
    }

    // Delivered and NAK sets partition the receiver set for any loss
    // probability and any receiver set.
    #[test]
    fn ptm_outcome_partitions_receivers(
        ids in prop::collection::btree_set(0u32..500, 1..60),
        p in 0.0f64..=1.0,
        pdu in 0u64..1_000,
        seed in 0u64..50,
    ) {
        let receivers: std::collections::BTreeSet<UeId> = ids.into_iter().map(UeId).collect();
        let loss = LossModel { per_receiver_loss_prob: p };
        let keyed = KeyedRng::derive(seed, "loss");
        let (delivered, nak) = ptm_deliver(pdu, &receivers, &loss, &keyed);
        prop_assert!(delivered.is_disjoint(&nak));
        let union: std::collections::BTreeSet<UeId> =
            delivered.union(&nak).copied().collect();
        prop_assert_eq!(union, receivers);
    }
}

proptest! {
    // Runs are expensive; a handful of cases is enough for the determinism
    // and delivery-completeness properties.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn identical_runs_produce_identical_csv(
        seed in 0u64..1_000,
        receivers in 1u32..8,
        loss_pct in 0u32..40,
        forced in any::<bool>(),
    ) {
        let mut cfg = ScenarioConfig::default();
        cfg.duration_us = 300_000;
        cfg.n_ues = receivers + 1;
        cfg.groups = vec![GroupConfig { source: 0, receivers: (1..=receivers).collect() }];
        cfg.loss.per_receiver_loss_prob = loss_pct as f64 / 100.0;
        let a = packet_csv(&run_scenario(&cfg, seed, forced), cfg.deadline_us);
        let b = packet_csv(&run_scenario(&cfg, seed, forced), cfg.deadline_us);
        prop_assert_eq!(a, b);
    }

    // Without loss, every generated pair is delivered exactly once on either
    // path, and the ledger-sum identity holds everywhere.
    #[test]
    fn lossless_runs_deliver_every_pair(
        seed in 0u64..1_000,
        receivers in 1u32..8,
        forced in any::<bool>(),
    ) {
        let mut cfg = ScenarioConfig::default();
        cfg.duration_us = 300_000;
        cfg.n_ues = receivers + 1;
        cfg.groups = vec![GroupConfig { source: 0, receivers: (1..=receivers).collect() }];
        let out = run_scenario(&cfg, seed, forced);
        prop_assert_eq!(out.ledger.delivered(), out.ledger.len());
        prop_assert_eq!(out.ledger.lost(), 0);
        prop_assert_eq!(out.ledger.len(), out.pdus.len() * receivers as usize);
        for (_, rec) in out.ledger.iter() {
            prop_assert_eq!(rec.latency().unwrap(), rec.component_sum());
        }
    }
}
