//! The gNB routing decision: forwarding-table lookup, policy and attachment
//! checks, pivot to the PTM bearer or fall back to the core path, plus the
//! dynamic events that flip eligibility mid-run.

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{
    eligibility, Eligibility, BearerId, FlowKey, ForwardingTable, GroupId, MulticastGroup,
    PolicySet, Ue, UeId,
};
use crate::engine::SimTime;

/// Why a packet was sent to the core instead of being pivoted locally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoreReason {
    NoFtEntry,
    NotAllowed,
    ReceiversNotAttached,
    PrbExhausted,
    /// Scenario-level baseline: the whole run is forced onto the core path.
    ForcedCoreScenario,
}

impl fmt::Display for CoreReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoreReason::NoFtEntry => "no_ft_entry",
            CoreReason::NotAllowed => "not_allowed",
            CoreReason::ReceiversNotAttached => "receivers_not_attached",
            CoreReason::PrbExhausted => "prb_exhausted",
            CoreReason::ForcedCoreScenario => "forced_core_scenario",
        };
        f.write_str(s)
    }
}

/// Verdict for one uplink packet. Routing is total: every input maps to a
/// decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteDecision {
    LocalBreakout { group: GroupId, bearer: BearerId },
    SendToCore { reason: CoreReason },
}

/// Decide the path for a packet of flow `key`, evaluated at gNB-ingress time
/// against current state. A forced-core scenario overrides everything; after
/// that, a missing forwarding entry and then each failed eligibility
/// condition fall back to the core.
pub fn route(
    key: FlowKey,
    ft: &ForwardingTable,
    policies: &PolicySet,
    groups: &BTreeMap<GroupId, MulticastGroup>,
    ues: &BTreeMap<UeId, Ue>,
    forced_core: bool,
) -> RouteDecision {
    if forced_core {
        return RouteDecision::SendToCore { reason: CoreReason::ForcedCoreScenario };
    }
    let entry = match ft.lookup(key) {
        Some(e) => e,
        None => return RouteDecision::SendToCore { reason: CoreReason::NoFtEntry },
    };
    let group = groups
        .get(&entry.group)
        .unwrap_or_else(|| panic!("forwarding entry {key} references unknown group"));
    match eligibility(key, group, policies, ues) {
        Eligibility::Eligible => {
            RouteDecision::LocalBreakout { group: entry.group, bearer: entry.bearer }
        }
        Eligibility::NotAllowed => {
            RouteDecision::SendToCore { reason: CoreReason::NotAllowed }
        }
        Eligibility::ReceiversNotAttached => {
            RouteDecision::SendToCore { reason: CoreReason::ReceiversNotAttached }
        }
        Eligibility::PrbExhausted => {
            RouteDecision::SendToCore { reason: CoreReason::PrbExhausted }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynamicEventKind {
    Detach(UeId),
    Attach(UeId),
    Revoke(FlowKey),
    Grant(FlowKey),
}

/// A scripted state change; takes effect on the next packet routed after
/// `at`, while packets already routed are unaffected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DynamicEvent {
    pub at: SimTime,
    pub kind: DynamicEventKind,
}

pub fn apply_dynamic_event(
    kind: DynamicEventKind,
    ues: &mut BTreeMap<UeId, Ue>,
    policies: &mut PolicySet,
) {
    match kind {
        DynamicEventKind::Detach(ue) => {
            ues.get_mut(&ue).expect("dynamic event references unknown UE").attached = false;
        }
        DynamicEventKind::Attach(ue) => {
            ues.get_mut(&ue).expect("dynamic event references unknown UE").attached = true;
        }
        DynamicEventKind::Revoke(key) => {
            policies.allowed_flows.remove(&key);
        }
        DynamicEventKind::Grant(key) => {
            policies.allowed_flows.insert(key);
        }
    }
}
