//! Scenario configuration: a single TOML file describing the cell, groups,
//! traffic, radio timing, core-path delay, loss, policies, scripted dynamic
//! events, and measurement setup. Ready-made preset files live under
//! `presets/`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{FlowId, FlowKey, UeId};
use crate::engine::Sampler;
use crate::ran::UlGrantMode;
use crate::traffic::OnOffProfile;

/// Baseline parameter values the default configuration must match.
pub mod defaults {
    /// 30 kHz subcarrier spacing implies a 0.5 ms slot.
    pub const SLOT_US: u64 = 500;
    pub const ON_TIME_US: u64 = 10_000;
    pub const OFF_TIME_US: u64 = 90_000;
    pub const DATA_RATE_BPS: u64 = 1_000_000;
    pub const PACKET_BITS: u32 = 1002;
    pub const CELL_RADIUS_M: f64 = 100.0;
    pub const GNB_POS_M: [f64; 3] = [0.0, 0.0, 30.0];
    pub const MAX_UES: u32 = 150;
    pub const DEADLINE_US: u64 = 5_000;
    pub const TARGET_RELIABILITY: f64 = 0.99999;
    /// UL grant wait budget row, microseconds.
    pub const UL_GRANT_LO_US: u64 = 250;
    pub const UL_GRANT_HI_US: u64 = 1_000;
    /// gNB processing budget row, microseconds.
    pub const GNB_PROC_LO_US: u64 = 1_000;
    pub const GNB_PROC_HI_US: u64 = 2_000;
    /// Core-path (backhaul + user-plane anchor + application) budget row.
    pub const CORE_LO_US: u64 = 5_000;
    pub const CORE_HI_US: u64 = 10_000;
    pub const DURATION_US: u64 = 10_000_000;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    LocalBreakout,
    CoreAnchored,
    Paired,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::LocalBreakout => "local_breakout",
            Mode::CoreAnchored => "core_anchored",
            Mode::Paired => "paired",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// Full event-driven timing; the two paths see different downlink slot
    /// re-alignment because the core-anchored copy reaches the queue later.
    Event,
    /// Components summed with shared draws; the paired gap is exactly the
    /// core segment.
    Analytic,
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measurement::Event => "event",
            Measurement::Analytic => "analytic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    pub radius_m: f64,
    pub gnb_pos: [f64; 3],
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig { radius_m: defaults::CELL_RADIUS_M, gnb_pos: defaults::GNB_POS_M }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub source: u32,
    pub receivers: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub on_time_us: u64,
    pub off_time_us: u64,
    pub data_rate_bps: u64,
    pub packet_bits: u32,
    /// Replace the fixed packet spacing with exponential gaps of equal mean.
    pub exp_interarrival: bool,
    /// Start every source at phase 0 instead of a random phase (stress
    /// configuration with synchronized ON windows).
    pub sync_phases: bool,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            on_time_us: defaults::ON_TIME_US,
            off_time_us: defaults::OFF_TIME_US,
            data_rate_bps: defaults::DATA_RATE_BPS,
            packet_bits: defaults::PACKET_BITS,
            exp_interarrival: false,
            sync_phases: false,
        }
    }
}

impl TrafficConfig {
    pub fn profile(&self) -> OnOffProfile {
        OnOffProfile {
            on_time: self.on_time_us,
            off_time: self.off_time_us,
            data_rate_bps: self.data_rate_bps,
            packet_bits: self.packet_bits,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub slot_us: u64,
    pub ul_grant_mode: UlGrantMode,
    pub ul_grant_delay: Sampler,
    pub gnb_proc_delay: Sampler,
    pub ul_tx_slots: u32,
    pub dl_tx_slots: u32,
    pub nak_window_us: u64,
    pub repair_proc_us: u64,
    pub max_repair_attempts: u32,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            slot_us: defaults::SLOT_US,
            ul_grant_mode: UlGrantMode::RequestBased,
            ul_grant_delay: Sampler::uniform(defaults::UL_GRANT_LO_US, defaults::UL_GRANT_HI_US),
            gnb_proc_delay: Sampler::uniform(defaults::GNB_PROC_LO_US, defaults::GNB_PROC_HI_US),
            ul_tx_slots: 1,
            dl_tx_slots: 1,
            nak_window_us: defaults::SLOT_US,
            repair_proc_us: 0,
            max_repair_attempts: 3,
        }
    }
}

impl RadioConfig {
    pub fn timing(&self) -> crate::ran::RadioTiming {
        crate::ran::RadioTiming {
            slot_len: self.slot_us,
            ul_grant_mode: self.ul_grant_mode,
            ul_grant_delay: self.ul_grant_delay,
            gnb_proc_delay: self.gnb_proc_delay,
            ul_tx_slots: self.ul_tx_slots,
            dl_tx_slots: self.dl_tx_slots,
            nak_window: self.nak_window_us,
            repair_proc_delay: self.repair_proc_us,
            max_repair_attempts: self.max_repair_attempts,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoreConfig {
    pub delay: Sampler,
}

impl Default for CoreConfig {
    fn default() -> Self {
        CoreConfig { delay: Sampler::uniform(defaults::CORE_LO_US, defaults::CORE_HI_US) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub per_receiver_loss_prob: f64,
}

#[allow(clippy::derivable_impls)]
impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { per_receiver_loss_prob: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRef {
    pub source: u32,
    pub flow: u32,
}

impl FlowRef {
    pub fn key(&self) -> FlowKey {
        FlowKey { source: UeId(self.source), flow: FlowId(self.flow) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Flows permitted to break out locally; omitted means every configured
    /// group flow is permitted.
    pub allowed_flows: Option<Vec<FlowRef>>,
    pub prb_budget: u32,
    pub prb_required: u32,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        // reservations span the whole 100-RB bandwidth
        PolicyConfig { allowed_flows: None, prb_budget: 100, prb_required: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicEventConfig {
    pub at_us: u64,
    /// One of `detach`, `attach`, `revoke`, `grant`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ue: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<u32>,
}

/// Full parameterization of one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration_us: u64,
    pub n_ues: u32,
    pub mode: Mode,
    pub measurement: Measurement,
    /// Report delivery-from-gNB latency instead of the full uplink-to-
    /// delivery path in summaries and sweeps.
    pub dl_only: bool,
    pub deadline_us: u64,
    pub target_reliability: f64,
    pub cell: CellConfig,
    pub groups: Vec<GroupConfig>,
    pub traffic: TrafficConfig,
    pub radio: RadioConfig,
    pub core: CoreConfig,
    pub loss: LossConfig,
    pub policies: PolicyConfig,
    pub dynamic_events: Vec<DynamicEventConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            duration_us: defaults::DURATION_US,
            n_ues: 10,
            mode: Mode::LocalBreakout,
            measurement: Measurement::Event,
            dl_only: false,
            deadline_us: defaults::DEADLINE_US,
            target_reliability: defaults::TARGET_RELIABILITY,
            cell: CellConfig::default(),
            groups: vec![GroupConfig { source: 0, receivers: (1..10).collect() }],
            traffic: TrafficConfig::default(),
            radio: RadioConfig::default(),
            core: CoreConfig::default(),
            loss: LossConfig::default(),
            policies: PolicyConfig::default(),
            dynamic_events: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    /// Flow key assigned to the i-th configured group.
    pub fn group_flow_key(&self, group_idx: usize) -> FlowKey {
        FlowKey {
            source: UeId(self.groups[group_idx].source),
            flow: FlowId(group_idx as u32),
        }
    }

    /// Flows permitted for local breakout, resolved against the group list.
    pub fn allowed_flow_keys(&self) -> BTreeSet<FlowKey> {
        match &self.policies.allowed_flows {
            Some(list) => list.iter().map(|f| f.key()).collect(),
            None => (0..self.groups.len()).map(|i| self.group_flow_key(i)).collect(),
        }
    }

    /// All invariant violations in this configuration, empty when clean.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut push = |msg: String| problems.push(msg);

        if self.n_ues == 0 {
            push("n_ues must be at least 1".into());
        }
        if self.n_ues > defaults::MAX_UES {
            push(format!("n_ues {} exceeds the {}-UE cell limit", self.n_ues, defaults::MAX_UES));
        }
        if self.cell.radius_m <= 0.0 {
            push("cell.radius_m must be positive".into());
        }
        if self.groups.is_empty() {
            push("at least one group is required".into());
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.receivers.is_empty() {
                push(format!("group {i}: receiver set is empty"));
            }
            if g.receivers.contains(&g.source) {
                push(format!("group {i}: source {} must not be a receiver", g.source));
            }
            let mut seen = BTreeSet::new();
            for &r in &g.receivers {
                if !seen.insert(r) {
                    push(format!("group {i}: receiver {r} listed twice"));
                }
                if r >= self.n_ues {
                    push(format!("group {i}: receiver {r} is outside the UE set"));
                }
            }
            if g.source >= self.n_ues {
                push(format!("group {i}: source {} is outside the UE set", g.source));
            }
        }

        let t = self.traffic;
        if t.on_time_us == 0 || t.off_time_us == 0 {
            push("traffic on/off times must be positive".into());
        }
        if t.data_rate_bps == 0 || t.packet_bits == 0 {
            push("traffic data rate and packet size must be positive".into());
        } else if !t.profile().is_valid() {
            push("traffic inter-arrival rounds to zero microseconds".into());
        }

        let r = self.radio;
        if r.slot_us == 0 {
            push("radio.slot_us must be positive".into());
        }
        if r.ul_tx_slots == 0 || r.dl_tx_slots == 0 {
            push("radio tx slot counts must be at least 1".into());
        }
        if !r.ul_grant_delay.is_valid() {
            push("radio.ul_grant_delay bounds are inverted".into());
        }
        if !r.gnb_proc_delay.is_valid() {
            push("radio.gnb_proc_delay bounds are inverted".into());
        }
        if !self.core.delay.is_valid() {
            push("core.delay bounds are inverted".into());
        }
        if !(0.0..=1.0).contains(&self.loss.per_receiver_loss_prob) {
            push(format!(
                "loss.per_receiver_loss_prob {} is outside [0, 1]",
                self.loss.per_receiver_loss_prob
            ));
        }
        if self.policies.prb_required == 0 {
            push("policies.prb_required must be at least 1".into());
        }
        if let Some(flows) = &self.policies.allowed_flows {
            let known: BTreeSet<FlowKey> =
                (0..self.groups.len()).map(|i| self.group_flow_key(i)).collect();
            for f in flows {
                if !known.contains(&f.key()) {
                    push(format!(
                        "policies.allowed_flows: ({}, {}) does not match any group flow",
                        f.source, f.flow
                    ));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.target_reliability) {
            push(format!("target_reliability {} is outside [0, 1]", self.target_reliability));
        }
        if self.deadline_us == 0 {
            push("deadline_us must be positive".into());
        }
        if self.measurement == Measurement::Analytic && self.mode != Mode::Paired {
            push("measurement = \"analytic\" requires mode = \"paired\"".into());
        }

        for (i, ev) in self.dynamic_events.iter().enumerate() {
            match ev.kind.as_str() {
                "detach" | "attach" => match ev.ue {
                    Some(ue) if ue < self.n_ues => {}
                    Some(ue) => push(format!("dynamic event {i}: UE {ue} is outside the UE set")),
                    None => push(format!("dynamic event {i}: '{}' needs a `ue`", ev.kind)),
                },
                "revoke" | "grant" => match (ev.source, ev.flow) {
                    (Some(_), Some(_)) => {}
                    _ => push(format!(
                        "dynamic event {i}: '{}' needs `source` and `flow`",
                        ev.kind
                    )),
                },
                other => push(format!("dynamic event {i}: unknown kind '{other}'")),
            }
            if ev.at_us >= self.duration_us && self.duration_us > 0 {
                push(format!("dynamic event {i}: fires at or after the scenario horizon"));
            }
        }
        problems
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let problems = self.validate();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }
}
