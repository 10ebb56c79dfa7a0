//! Event-driven scenario execution: wires traffic, the uplink and downlink
//! radio segments, the routing decision, the core-path detour, loss and
//! repair into one run, and builds the paired-comparison and sweep layers on
//! top of single runs.

use std::collections::BTreeMap;

use crate::breakout::{apply_dynamic_event, route, CoreReason, DynamicEventKind, RouteDecision};
use crate::config::{Measurement, Mode, ScenarioConfig};
use crate::corepath::{core_segment, CorePathModel};
use crate::domain::{
    BearerId, FlowKey, ForwardingEntry, ForwardingTable, GroupId, MulticastGroup, PduSeq,
    PolicySet, PtmBearer, Ue, UeId,
};
use crate::engine::{
    next_slot_boundary, Event, EventKind, EventLoop, KeyedRng, Micros, RngStream, SimTime,
};
use crate::metrics::{
    percentile, reliability_metric, Component, LatencyLedger, Path, PathStats, SweepPoint,
};
use crate::ran::{ptm_deliver, repair_unicast, schedule_ptm, ul_segment, LossModel, RadioTiming};
use crate::traffic::{assign_phases, generate_arrivals, generate_arrivals_exp};

/// How many packets each routing verdict received.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecisionCounts {
    pub local_breakout: u64,
    pub no_ft_entry: u64,
    pub not_allowed: u64,
    pub receivers_not_attached: u64,
    pub prb_exhausted: u64,
    pub forced_core: u64,
}

impl DecisionCounts {
    fn bump(&mut self, decision: &RouteDecision) {
        match decision {
            RouteDecision::LocalBreakout { .. } => self.local_breakout += 1,
            RouteDecision::SendToCore { reason } => match reason {
                CoreReason::NoFtEntry => self.no_ft_entry += 1,
                CoreReason::NotAllowed => self.not_allowed += 1,
                CoreReason::ReceiversNotAttached => self.receivers_not_attached += 1,
                CoreReason::PrbExhausted => self.prb_exhausted += 1,
                CoreReason::ForcedCoreScenario => self.forced_core += 1,
            },
        }
    }

    pub fn total(&self) -> u64 {
        self.local_breakout
            + self.no_ft_entry
            + self.not_allowed
            + self.receivers_not_attached
            + self.prb_exhausted
            + self.forced_core
    }

    pub fn core_total(&self) -> u64 {
        self.total() - self.local_breakout
    }
}

/// Routing outcome and provenance of one packet, kept for reporting.
#[derive(Clone, Copy, Debug)]
pub struct PduMeta {
    pub seq: PduSeq,
    pub key: FlowKey,
    pub group: GroupId,
    pub created_at: SimTime,
    pub path: Path,
    pub reason: Option<CoreReason>,
}

/// Everything one simulation pass produces.
pub struct RunOutput {
    pub ledger: LatencyLedger,
    pub decisions: DecisionCounts,
    pub pdus: Vec<PduMeta>,
    pub ue_positions: Vec<(UeId, [f64; 3])>,
    pub end_clock: SimTime,
    pub events_processed: u64,
    /// Downlink PTM transmissions performed; one per packet irrespective of
    /// the receiver count.
    pub ptm_tx_count: u64,
    /// Unicast repair transmissions performed.
    pub repair_tx_count: u64,
    /// Per-packet core draws made by a paired-analytic pass for packets that
    /// stayed local; indexed by packet sequence.
    analytic_core: Vec<Option<Micros>>,
}

impl RunOutput {
    fn analytic_core(&self, pdu: PduSeq) -> Option<Micros> {
        self.analytic_core.get(pdu as usize).copied().flatten()
    }
}

struct PduFlight {
    key: FlowKey,
    group: GroupId,
    bearer: BearerId,
    created_at: SimTime,
    path: Option<Path>,
    reason: Option<CoreReason>,
    /// Core draw made in paired-analytic mode for packets that stayed local.
    analytic_core: Option<Micros>,
    ptm_done: Option<SimTime>,
}

struct BearerRuntime {
    bearer: PtmBearer,
    busy_until: SimTime,
    tx_scheduled: bool,
}

struct Sim<'c> {
    cfg: &'c ScenarioConfig,
    timing: RadioTiming,
    loss: LossModel,
    core_model: CorePathModel,
    forced_core: bool,
    /// Draw a core delay for every packet even when it stays local, so the
    /// paired-analytic comparison can add it arithmetically.
    draw_core_always: bool,
    events: EventLoop,
    ues: BTreeMap<UeId, Ue>,
    groups: BTreeMap<GroupId, MulticastGroup>,
    bearers: BTreeMap<BearerId, BearerRuntime>,
    ft: ForwardingTable,
    policies: PolicySet,
    /// Scenario-level session map; the core resolves a flow to its group even
    /// when the gNB has no forwarding entry.
    sessions: BTreeMap<FlowKey, (GroupId, BearerId)>,
    rng_grant: RngStream,
    rng_proc: RngStream,
    rng_core: RngStream,
    keyed_loss: KeyedRng,
    pdus: Vec<PduFlight>,
    ledger: LatencyLedger,
    decisions: DecisionCounts,
    ptm_tx_count: u64,
    repair_tx_count: u64,
}

impl<'c> Sim<'c> {
    fn build(cfg: &'c ScenarioConfig, seed: u64, forced_core: bool, draw_core_always: bool) -> Self {
        let mut rng_place = RngStream::derive(seed, "placement");
        let ues: BTreeMap<UeId, Ue> = (0..cfg.n_ues)
            .map(|i| {
                let r = cfg.cell.radius_m * rng_place.unit().sqrt();
                let theta = rng_place.unit() * std::f64::consts::TAU;
                let ue = Ue {
                    id: UeId(i),
                    position: [r * theta.cos(), r * theta.sin(), 0.0],
                    attached: true,
                };
                (ue.id, ue)
            })
            .collect();

        let mut groups = BTreeMap::new();
        let mut bearers = BTreeMap::new();
        let mut ft = ForwardingTable::new();
        let mut sessions = BTreeMap::new();
        for (i, gc) in cfg.groups.iter().enumerate() {
            let gid = GroupId(i as u32);
            let bid = BearerId(i as u32);
            let group = MulticastGroup::new(
                gid,
                UeId(gc.source),
                gc.receivers.iter().map(|&r| UeId(r)).collect(),
            )
            .expect("validated configuration");
            groups.insert(gid, group);
            bearers.insert(bid, PtmBearer::new(bid, gid, "urllc"));
            let key = cfg.group_flow_key(i);
            ft.install(ForwardingEntry { key, group: gid, bearer: bid }, &groups, &bearers)
                .expect("validated configuration");
            sessions.insert(key, (gid, bid));
        }

        let policies = PolicySet {
            allowed_flows: cfg.allowed_flow_keys(),
            prb_budget: cfg.policies.prb_budget,
            prb_required: cfg.policies.prb_required,
        };

        let bearers = bearers
            .into_iter()
            .map(|(id, bearer)| {
                (id, BearerRuntime { bearer, busy_until: SimTime::ZERO, tx_scheduled: false })
            })
            .collect();

        Sim {
            cfg,
            timing: cfg.radio.timing(),
            loss: LossModel { per_receiver_loss_prob: cfg.loss.per_receiver_loss_prob },
            core_model: CorePathModel { delay: cfg.core.delay },
            forced_core,
            draw_core_always,
            events: EventLoop::new(),
            ues,
            groups,
            bearers,
            ft,
            policies,
            sessions,
            rng_grant: RngStream::derive(seed, "ul-grant"),
            rng_proc: RngStream::derive(seed, "gnb-proc"),
            rng_core: RngStream::derive(seed, "core-delay"),
            keyed_loss: KeyedRng::derive(seed, "loss"),
            pdus: Vec::new(),
            ledger: LatencyLedger::new(),
            decisions: DecisionCounts::default(),
            ptm_tx_count: 0,
            repair_tx_count: 0,
        }
    }

    fn seed_events(&mut self, seed: u64) {
        let profile = self.cfg.traffic.profile();
        let mut rng_traffic = RngStream::derive(seed, "traffic");
        let phases = if self.cfg.traffic.sync_phases {
            vec![0; self.cfg.groups.len()]
        } else {
            assign_phases(self.cfg.groups.len(), &profile, &mut rng_traffic)
        };
        for (i, phase) in phases.iter().enumerate() {
            let key = self.cfg.group_flow_key(i);
            let arrivals = if self.cfg.traffic.exp_interarrival {
                generate_arrivals_exp(&profile, self.cfg.duration_us, *phase, &mut rng_traffic)
            } else {
                generate_arrivals(&profile, self.cfg.duration_us, *phase)
            };
            for t in arrivals {
                self.events.schedule(t, EventKind::PacketArrival { key });
            }
        }
        for ev in &self.cfg.dynamic_events {
            let at = SimTime::from_micros(ev.at_us);
            let kind = match ev.kind.as_str() {
                "detach" => EventKind::MobilityChange { ue: UeId(ev.ue.unwrap()), attached: false },
                "attach" => EventKind::MobilityChange { ue: UeId(ev.ue.unwrap()), attached: true },
                "revoke" => EventKind::PolicyChange {
                    key: FlowKey {
                        source: UeId(ev.source.unwrap()),
                        flow: crate::domain::FlowId(ev.flow.unwrap()),
                    },
                    allowed: false,
                },
                "grant" => EventKind::PolicyChange {
                    key: FlowKey {
                        source: UeId(ev.source.unwrap()),
                        flow: crate::domain::FlowId(ev.flow.unwrap()),
                    },
                    allowed: true,
                },
                other => panic!("validated configuration allowed dynamic event kind '{other}'"),
            };
            self.events.schedule(at, kind);
        }
        self.events
            .schedule(SimTime::from_micros(self.cfg.duration_us), EventKind::ScenarioEnd);
    }

    fn receivers_of(&self, pdu: PduSeq) -> Vec<UeId> {
        let group = &self.groups[&self.pdus[pdu as usize].group];
        group.receivers.iter().copied().collect()
    }

    fn record_all(&mut self, pdu: PduSeq, component: Component, value: Micros) {
        for r in self.receivers_of(pdu) {
            self.ledger.record(pdu, r, component, value);
        }
    }

    fn handle(&mut self, el: &mut EventLoop, ev: Event) {
        match ev.kind {
            EventKind::PacketArrival { key } => {
                let seq = self.pdus.len() as PduSeq;
                let (group, bearer) = *self
                    .sessions
                    .get(&key)
                    .unwrap_or_else(|| panic!("traffic for unconfigured flow {key}"));
                let created_at = el.now();
                self.pdus.push(PduFlight {
                    key,
                    group,
                    bearer,
                    created_at,
                    path: None,
                    reason: None,
                    analytic_core: None,
                    ptm_done: None,
                });
                for r in self.receivers_of(seq) {
                    self.ledger.open(seq, r, created_at);
                }
                let (grant_wait, _) = ul_segment(created_at, &self.timing, &mut self.rng_grant);
                self.record_all(seq, Component::UlGrant, grant_wait);
                el.schedule(created_at + grant_wait, EventKind::UlGrantReady { pdu: seq });
            }
            EventKind::UlGrantReady { pdu } => {
                let ul_tx = self.timing.ul_tx();
                self.record_all(pdu, Component::UlTx, ul_tx);
                el.schedule(el.now() + ul_tx, EventKind::UlTxDone { pdu });
            }
            EventKind::UlTxDone { pdu } => {
                // gNB ingress: the routing decision is evaluated here, against
                // current attachment and policy state.
                let key = self.pdus[pdu as usize].key;
                let decision = route(
                    key,
                    &self.ft,
                    &self.policies,
                    &self.groups,
                    &self.ues,
                    self.forced_core,
                );
                self.decisions.bump(&decision);
                let (path, reason) = match decision {
                    RouteDecision::LocalBreakout { .. } => (Path::LocalBreakout, None),
                    RouteDecision::SendToCore { reason } => (Path::CoreAnchored, Some(reason)),
                };
                self.pdus[pdu as usize].path = Some(path);
                self.pdus[pdu as usize].reason = reason;
                for r in self.receivers_of(pdu) {
                    self.ledger.set_path(pdu, r, path);
                }
                let proc = self.timing.gnb_proc_delay.sample(&mut self.rng_proc);
                self.record_all(pdu, Component::GnbProc, proc);
                el.schedule(el.now() + proc, EventKind::GnbProcDone { pdu });
            }
            EventKind::GnbProcDone { pdu } => {
                match self.pdus[pdu as usize].path.expect("routed before processing") {
                    Path::CoreAnchored => {
                        let delay = core_segment(&self.core_model, &mut self.rng_core);
                        self.record_all(pdu, Component::CorePath, delay);
                        el.schedule(el.now() + delay, EventKind::CorePathDone { pdu });
                    }
                    Path::LocalBreakout => {
                        if self.draw_core_always {
                            self.pdus[pdu as usize].analytic_core =
                                Some(core_segment(&self.core_model, &mut self.rng_core));
                        }
                        self.enqueue_downlink(el, pdu);
                    }
                }
            }
            EventKind::CorePathDone { pdu } => {
                self.enqueue_downlink(el, pdu);
            }
            EventKind::DlSlotBoundary { bearer } => {
                let now = el.now();
                let rt = self.bearers.get_mut(&bearer).expect("known bearer");
                let (pdu, ready_at) = rt.bearer.head().expect("transmission without a queued pdu");
                debug_assert_eq!(now, next_slot_boundary(now, self.timing.slot_len));
                let plan = schedule_ptm(ready_at, now, &self.timing);
                debug_assert_eq!(plan.start, now);
                rt.busy_until = plan.done;
                self.record_all(pdu, Component::DlSched, plan.dl_wait);
                self.record_all(pdu, Component::DlTx, plan.dl_tx);
                el.schedule(plan.done, EventKind::PtmTxDone { bearer, pdu });
            }
            EventKind::PtmTxDone { bearer, pdu } => {
                let now = el.now();
                let rt = self.bearers.get_mut(&bearer).expect("known bearer");
                let (head, _) = rt.bearer.dequeue().expect("queued pdu");
                assert_eq!(head, pdu, "PTM transmissions are FIFO per bearer");
                self.ptm_tx_count += 1;
                self.pdus[pdu as usize].ptm_done = Some(now);

                let group = &self.groups[&self.pdus[pdu as usize].group];
                let (delivered, nak) =
                    ptm_deliver(pdu, &group.receivers, &self.loss, &self.keyed_loss);
                for r in delivered {
                    self.ledger.mark_delivered(pdu, r, now);
                }
                if !nak.is_empty() {
                    el.schedule(
                        now + self.timing.nak_window,
                        EventKind::NakReport { pdu, naks: nak.into_iter().collect() },
                    );
                }

                let rt = self.bearers.get_mut(&bearer).expect("known bearer");
                if rt.bearer.head().is_some() {
                    el.schedule(
                        next_slot_boundary(now, self.timing.slot_len),
                        EventKind::DlSlotBoundary { bearer },
                    );
                } else {
                    rt.tx_scheduled = false;
                }
            }
            EventKind::NakReport { pdu, naks } => {
                let at = el.now() + self.timing.repair_proc_delay;
                let nak_set = naks.into_iter().collect();
                let attempts = repair_unicast(
                    pdu,
                    &nak_set,
                    &self.timing,
                    at,
                    &self.loss,
                    &self.keyed_loss,
                );
                for a in &attempts {
                    el.schedule(
                        a.delivered_at,
                        EventKind::RepairTxDone {
                            pdu,
                            receiver: a.receiver,
                            attempt: a.attempt,
                            delivered: a.delivered,
                        },
                    );
                }
            }
            EventKind::RepairTxDone { pdu, receiver, attempt, delivered } => {
                self.repair_tx_count += 1;
                let ptm_done = self.pdus[pdu as usize].ptm_done.expect("repair after PTM");
                if delivered {
                    let extra = el.now().since(ptm_done);
                    self.ledger.record(pdu, receiver, Component::Repair, extra);
                    self.ledger.mark_delivered(pdu, receiver, el.now());
                } else if attempt >= self.timing.max_repair_attempts {
                    self.ledger.mark_lost(pdu, receiver);
                }
            }
            EventKind::MobilityChange { ue, attached } => {
                let kind = if attached {
                    DynamicEventKind::Attach(ue)
                } else {
                    DynamicEventKind::Detach(ue)
                };
                apply_dynamic_event(kind, &mut self.ues, &mut self.policies);
            }
            EventKind::PolicyChange { key, allowed } => {
                let kind = if allowed {
                    DynamicEventKind::Grant(key)
                } else {
                    DynamicEventKind::Revoke(key)
                };
                apply_dynamic_event(kind, &mut self.ues, &mut self.policies);
            }
            EventKind::ScenarioEnd => {}
        }
    }

    fn enqueue_downlink(&mut self, el: &mut EventLoop, pdu: PduSeq) {
        let now = el.now();
        let bearer = self.pdus[pdu as usize].bearer;
        let rt = self.bearers.get_mut(&bearer).expect("known bearer");
        rt.bearer.enqueue(pdu, now);
        if !rt.tx_scheduled {
            rt.tx_scheduled = true;
            let start = next_slot_boundary(now.max(rt.busy_until), self.timing.slot_len);
            el.schedule(start, EventKind::DlSlotBoundary { bearer });
        }
    }

    fn run(mut self, seed: u64) -> RunOutput {
        self.seed_events(seed);
        let mut el = std::mem::take(&mut self.events);
        el.run_to_exhaustion(|el, ev| self.handle(el, ev));
        self.events = el;
        self.ledger.close();

        let pdus = self
            .pdus
            .iter()
            .enumerate()
            .map(|(i, p)| PduMeta {
                seq: i as PduSeq,
                key: p.key,
                group: p.group,
                created_at: p.created_at,
                path: p.path.expect("every generated packet is routed"),
                reason: p.reason,
            })
            .collect();
        let ue_positions = self.ues.values().map(|u| (u.id, u.position)).collect();
        let analytic_core = self.pdus.iter().map(|p| p.analytic_core).collect();
        RunOutput {
            ledger: self.ledger,
            decisions: self.decisions,
            pdus,
            ue_positions,
            end_clock: self.events.now(),
            events_processed: self.events.processed(),
            ptm_tx_count: self.ptm_tx_count,
            repair_tx_count: self.repair_tx_count,
            analytic_core,
        }
    }
}

/// Execute one full pass of the scenario. `forced_core` selects the
/// core-anchored baseline against identical forwarding and policy state.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64, forced_core: bool) -> RunOutput {
    Sim::build(cfg, seed, forced_core, false).run(seed)
}

/// Run a scenario on the path its `mode` names. Paired mode is handled by
/// [`compare`].
pub fn run_configured(cfg: &ScenarioConfig, seed: u64) -> RunOutput {
    assert!(cfg.mode != Mode::Paired, "paired mode runs through compare()");
    run_scenario(cfg, seed, cfg.mode == Mode::CoreAnchored)
}

/// One matched (packet, receiver) pair of the paired comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompareRow {
    pub pdu: PduSeq,
    pub source: UeId,
    pub receiver: UeId,
    pub l_ca_us: Micros,
    pub l_lb_us: Micros,
}

impl CompareRow {
    pub fn gap_us(&self) -> i64 {
        self.l_ca_us as i64 - self.l_lb_us as i64
    }
}

pub struct CompareOutput {
    pub rows: Vec<CompareRow>,
    pub ca: RunOutput,
    pub lb: RunOutput,
}

impl CompareOutput {
    pub fn mean_gap_us(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.gap_us() as f64).sum::<f64>() / self.rows.len() as f64
    }
}

/// Run the scenario on both paths with identical seed and identical per-packet
/// radio draws, and match results per (packet, receiver) pair.
///
/// Event measurement runs two full passes; the downlink slot re-alignment may
/// differ between them. Analytic measurement runs the local pass once and adds
/// the per-packet core draw arithmetically, so the gap is exactly the core
/// segment.
pub fn compare(cfg: &ScenarioConfig, seed: u64) -> CompareOutput {
    match cfg.measurement {
        Measurement::Event => {
            let ca = run_scenario(cfg, seed, true);
            let lb = run_scenario(cfg, seed, false);
            let rows = join_rows(&ca, &lb);
            CompareOutput { rows, ca, lb }
        }
        Measurement::Analytic => {
            let lb = Sim::build(cfg, seed, false, true).run(seed);
            let ca = synthesize_core_anchored(&lb);
            let rows = join_rows(&ca, &lb);
            CompareOutput { rows, ca, lb }
        }
    }
}

fn join_rows(ca: &RunOutput, lb: &RunOutput) -> Vec<CompareRow> {
    let mut rows = Vec::new();
    for (&(pdu, receiver), lb_rec) in lb.ledger.iter() {
        let Some(l_lb) = lb_rec.latency() else { continue };
        let Some(ca_rec) = ca.ledger.get(pdu, receiver) else { continue };
        let Some(l_ca) = ca_rec.latency() else { continue };
        rows.push(CompareRow {
            pdu,
            source: lb.pdus[pdu as usize].key.source,
            receiver,
            l_ca_us: l_ca,
            l_lb_us: l_lb,
        });
    }
    rows
}

/// Analytic core-anchored counterfactual of a local pass: identical component
/// draws plus the per-packet core delay, summed per the decomposition.
fn synthesize_core_anchored(lb: &RunOutput) -> RunOutput {
    let mut ledger = LatencyLedger::new();
    for (&(pdu, receiver), rec) in lb.ledger.iter() {
        ledger.open(pdu, receiver, rec.created_at);
        ledger.set_path(pdu, receiver, Path::CoreAnchored);
        for c in [Component::UlGrant, Component::UlTx, Component::GnbProc] {
            ledger.record(pdu, receiver, c, rec.component(c));
        }
        let meta = &lb.pdus[pdu as usize];
        let core = match meta.path {
            // the local pass already traversed the core (eligibility fallback)
            Path::CoreAnchored => rec.component(Component::CorePath),
            Path::LocalBreakout => lb
                .analytic_core(pdu)
                .expect("paired-analytic pass draws a core delay per packet"),
        };
        ledger.record(pdu, receiver, Component::CorePath, core);
        for c in [Component::DlSched, Component::DlTx] {
            ledger.record(pdu, receiver, c, rec.component(c));
        }
        if rec.delivered_at.is_some() {
            let repair = rec.component(Component::Repair);
            if repair > 0 {
                ledger.record(pdu, receiver, Component::Repair, repair);
            }
            let total = ledger.get(pdu, receiver).unwrap().component_sum();
            ledger.mark_delivered(pdu, receiver, rec.created_at + total);
        } else {
            ledger.mark_lost(pdu, receiver);
        }
    }
    ledger.close();

    let decisions = DecisionCounts {
        forced_core: lb.decisions.total(),
        ..DecisionCounts::default()
    };
    let pdus = lb
        .pdus
        .iter()
        .map(|m| PduMeta {
            path: Path::CoreAnchored,
            reason: Some(CoreReason::ForcedCoreScenario),
            ..*m
        })
        .collect();
    RunOutput {
        ledger,
        decisions,
        pdus,
        ue_positions: lb.ue_positions.clone(),
        end_clock: lb.end_clock,
        events_processed: lb.events_processed,
        ptm_tx_count: lb.ptm_tx_count,
        repair_tx_count: lb.repair_tx_count,
        analytic_core: Vec::new(),
    }
}

/// Aggregate one path of one run into sweep statistics.
fn path_stats(out: &RunOutput, cfg: &ScenarioConfig) -> PathStats {
    let mut latencies: Vec<Micros> =
        out.ledger.iter().filter_map(|(_, r)| r.metric(cfg.dl_only)).collect();
    latencies.sort_unstable();
    let rel = reliability_metric(&out.ledger, cfg.deadline_us, cfg.target_reliability, cfg.dl_only);
    if latencies.is_empty() {
        return PathStats { mean_us: 0.0, p50_us: 0.0, p95_us: 0.0, p99_us: 0.0, reliability: rel.achieved };
    }
    PathStats {
        mean_us: latencies.iter().sum::<u64>() as f64 / latencies.len() as f64,
        p50_us: percentile(&latencies, 0.50) as f64,
        p95_us: percentile(&latencies, 0.95) as f64,
        p99_us: percentile(&latencies, 0.99) as f64,
        reliability: rel.achieved,
    }
}

fn average_stats(per_seed: &[PathStats]) -> PathStats {
    let n = per_seed.len() as f64;
    PathStats {
        mean_us: per_seed.iter().map(|s| s.mean_us).sum::<f64>() / n,
        p50_us: per_seed.iter().map(|s| s.p50_us).sum::<f64>() / n,
        p95_us: per_seed.iter().map(|s| s.p95_us).sum::<f64>() / n,
        p99_us: per_seed.iter().map(|s| s.p99_us).sum::<f64>() / n,
        reliability: per_seed.iter().map(|s| s.reliability).sum::<f64>() / n,
    }
}

/// Scenario specialized to one receiver count: UE 0 sources a single group
/// serving receivers 1..=n.
pub fn sweep_config(base: &ScenarioConfig, n_receivers: u32) -> ScenarioConfig {
    let mut cfg = base.clone();
    cfg.groups = vec![crate::config::GroupConfig {
        source: 0,
        receivers: (1..=n_receivers).collect(),
    }];
    cfg.n_ues = n_receivers + 1;
    cfg.policies.allowed_flows = None;
    cfg
}

/// Both-path receiver-count sweep, one point per size, averaged over seeds.
pub fn sweep(base: &ScenarioConfig, sizes: &[u32], seeds: &[u64]) -> Vec<SweepPoint> {
    assert!(!sizes.is_empty(), "sweep needs at least one size");
    assert!(!seeds.is_empty(), "sweep needs at least one seed");
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let cfg = sweep_config(base, size);
        let mut lb_stats = Vec::with_capacity(seeds.len());
        let mut ca_stats = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            lb_stats.push(path_stats(&run_scenario(&cfg, seed, false), &cfg));
            ca_stats.push(path_stats(&run_scenario(&cfg, seed, true), &cfg));
        }
        points.push(SweepPoint {
            n_receivers: size,
            ca: average_stats(&ca_stats),
            lb: average_stats(&lb_stats),
        });
    }
    points
}
