//! CSV emission and text summaries. Output is byte-identical for identical
//! (configuration, seed): rows are written in a fixed order and floats with a
//! fixed precision.

use std::fmt::Write as _;

use crate::config::ScenarioConfig;
use crate::metrics::{reliability_metric, summarize, Component, SweepPoint};
use crate::sim::{CompareOutput, RunOutput};

pub const PACKET_CSV_HEADER: &str = "pdu_seq,source,receiver,path,t_rqt_us,t_ul_us,t_gnb_us,\
t_core_us,t_dlschd_us,t_dl_us,t_repair_us,latency_us,met_deadline,lost";

pub const SWEEP_CSV_HEADER: &str = "n_receivers,path,mean_us,p50_us,p95_us,p99_us,reliability";

pub const COMPARE_CSV_HEADER: &str = "pdu_seq,source,receiver,l_ca_us,l_lb_us,gap_us";

pub const POSITIONS_CSV_HEADER: &str = "ue,x_m,y_m,z_m";

/// One row per (packet, receiver) pair in (packet, receiver) order.
pub fn packet_csv(out: &RunOutput, deadline_us: u64) -> String {
    let mut s = String::new();
    s.push_str(PACKET_CSV_HEADER);
    s.push('\n');
    for (&(pdu, receiver), rec) in out.ledger.iter() {
        let meta = &out.pdus[pdu as usize];
        let path = rec.path.expect("routed pair");
        let (latency, met) = match rec.latency() {
            Some(l) => (l.to_string(), (l <= deadline_us) as u8),
            None => (String::new(), 0),
        };
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            pdu,
            meta.key.source,
            receiver,
            path,
            rec.component(Component::UlGrant),
            rec.component(Component::UlTx),
            rec.component(Component::GnbProc),
            rec.component(Component::CorePath),
            rec.component(Component::DlSched),
            rec.component(Component::DlTx),
            rec.component(Component::Repair),
            latency,
            met,
            rec.lost as u8,
        )
        .unwrap();
    }
    s
}

pub fn compare_csv(cmp: &CompareOutput) -> String {
    let mut s = String::new();
    s.push_str(COMPARE_CSV_HEADER);
    s.push('\n');
    for row in &cmp.rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            row.pdu, row.source, row.receiver, row.l_ca_us, row.l_lb_us, row.gap_us()
        )
        .unwrap();
    }
    s
}

/// One row per (size, path); the local-breakout row follows the core row.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_CSV_HEADER);
    s.push('\n');
    for p in points {
        for (tag, stats) in [("ca", &p.ca), ("lb", &p.lb)] {
            writeln!(
                s,
                "{},{},{:.3},{:.3},{:.3},{:.3},{:.6}",
                p.n_receivers, tag, stats.mean_us, stats.p50_us, stats.p95_us, stats.p99_us,
                stats.reliability
            )
            .unwrap();
        }
    }
    s
}

pub fn positions_csv(out: &RunOutput) -> String {
    let mut s = String::new();
    s.push_str(POSITIONS_CSV_HEADER);
    s.push('\n');
    for (ue, pos) in &out.ue_positions {
        writeln!(s, "{},{:.3},{:.3},{:.3}", ue, pos[0], pos[1], pos[2]).unwrap();
    }
    s
}

pub fn run_summary(out: &RunOutput, cfg: &ScenarioConfig, seed: u64) -> String {
    let stats = summarize(&out.ledger, cfg.dl_only);
    let rel = reliability_metric(&out.ledger, cfg.deadline_us, cfg.target_reliability, cfg.dl_only);
    let d = &out.decisions;
    let mut s = String::new();
    writeln!(s, "seed: {}  mode: {}  measurement: {}", seed, cfg.mode, cfg.measurement).unwrap();
    writeln!(
        s,
        "packets: {}  pairs: {}  delivered: {}  lost: {}  ptm_tx: {}  repair_tx: {}",
        out.pdus.len(),
        stats.pairs,
        stats.delivered,
        stats.lost,
        out.ptm_tx_count,
        out.repair_tx_count
    )
    .unwrap();
    let metric = if cfg.dl_only { "dl-only latency" } else { "latency" };
    writeln!(
        s,
        "{}: mean={:.1}us p50={}us p95={}us p99={}us min={}us max={}us",
        metric, stats.mean_us, stats.p50_us, stats.p95_us, stats.p99_us, stats.min_us,
        stats.max_us
    )
    .unwrap();
    writeln!(
        s,
        "reliability: Pr[L <= {}us] = {:.6} (target {:.6}) -> {}{}",
        rel.deadline,
        rel.achieved,
        rel.target,
        if rel.met { "met" } else { "missed" },
        if rel.degenerate { " [degenerate: empty ledger]" } else { "" }
    )
    .unwrap();
    writeln!(
        s,
        "decisions: local_breakout={} core(no_ft_entry)={} core(not_allowed)={} \
core(receivers_not_attached)={} core(prb_exhausted)={} core(forced)={}",
        d.local_breakout,
        d.no_ft_entry,
        d.not_allowed,
        d.receivers_not_attached,
        d.prb_exhausted,
        d.forced_core
    )
    .unwrap();
    s
}

pub fn compare_summary(cmp: &CompareOutput, cfg: &ScenarioConfig, seed: u64) -> String {
    let mut s = String::new();
    writeln!(s, "seed: {}  mode: paired  measurement: {}", seed, cfg.measurement).unwrap();
    writeln!(s, "matched pairs: {}", cmp.rows.len()).unwrap();
    if !cmp.rows.is_empty() {
        let mean = cmp.mean_gap_us();
        let min = cmp.rows.iter().map(|r| r.gap_us()).min().unwrap();
        let max = cmp.rows.iter().map(|r| r.gap_us()).max().unwrap();
        writeln!(s, "gap: mean={:.3}us min={}us max={}us", mean, min, max).unwrap();
        let mean_ca = cmp.rows.iter().map(|r| r.l_ca_us as f64).sum::<f64>()
            / cmp.rows.len() as f64;
        let mean_lb = cmp.rows.iter().map(|r| r.l_lb_us as f64).sum::<f64>()
            / cmp.rows.len() as f64;
        writeln!(s, "mean latency: core_anchored={:.1}us local_breakout={:.1}us", mean_ca, mean_lb)
            .unwrap();
    }
    s
}
