//! Cell-level model state: UEs, multicast groups, uplink flows, the
//! forwarding table, breakout policies, and point-to-multipoint bearers.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;

/// Global packet sequence number, assigned in creation order.
pub type PduSeq = u64;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug,
            Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(UeId);
id_type!(GroupId);
id_type!(FlowId);
id_type!(BearerId);

/// One user equipment attached to the serving cell.
#[derive(Clone, Debug)]
pub struct Ue {
    pub id: UeId,
    /// Meters; the abstract radio model ignores geometry, positions are kept
    /// for scenario traceability.
    pub position: [f64; 3],
    pub attached: bool,
}

/// Identifies an authorized uplink flow: (source UE, flow id).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct FlowKey {
    pub source: UeId,
    pub flow: FlowId,
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.source, self.flow)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("group {0}: receiver set is empty")]
    EmptyReceivers(GroupId),
    #[error("group {0}: source {1} is not a member")]
    SourceNotMember(GroupId, UeId),
    #[error("group {0}: source {1} must not be a receiver")]
    SourceIsReceiver(GroupId, UeId),
    #[error("group {0}: receivers are not a subset of members")]
    ReceiversNotMembers(GroupId),
    #[error("forwarding entry for {0} already installed")]
    DuplicateEntry(FlowKey),
    #[error("forwarding entry for {0}: group {1} does not exist")]
    UnknownGroup(FlowKey, GroupId),
    #[error("forwarding entry for {0}: bearer {1} is not configured for group {2}")]
    BearerMismatch(FlowKey, BearerId, GroupId),
}

/// A multicast group with one designated source and a fixed receiver set.
#[derive(Clone, Debug)]
pub struct MulticastGroup {
    pub id: GroupId,
    pub source: UeId,
    pub members: BTreeSet<UeId>,
    pub receivers: BTreeSet<UeId>,
}

impl MulticastGroup {
    pub fn new(
        id: GroupId,
        source: UeId,
        receivers: BTreeSet<UeId>,
    ) -> Result<Self, DomainError> {
        if receivers.is_empty() {
            return Err(DomainError::EmptyReceivers(id));
        }
        if receivers.contains(&source) {
            return Err(DomainError::SourceIsReceiver(id, source));
        }
        let mut members = receivers.clone();
        members.insert(source);
        let group = MulticastGroup { id, source, members, receivers };
        group.check()?;
        Ok(group)
    }

    pub fn check(&self) -> Result<(), DomainError> {
        if self.receivers.is_empty() {
            return Err(DomainError::EmptyReceivers(self.id));
        }
        if !self.members.contains(&self.source) {
            return Err(DomainError::SourceNotMember(self.id, self.source));
        }
        if self.receivers.contains(&self.source) {
            return Err(DomainError::SourceIsReceiver(self.id, self.source));
        }
        if !self.receivers.is_subset(&self.members) {
            return Err(DomainError::ReceiversNotMembers(self.id));
        }
        Ok(())
    }
}

/// Maps an uplink flow to the group and downlink PTM bearer that serve it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForwardingEntry {
    pub key: FlowKey,
    pub group: GroupId,
    pub bearer: BearerId,
}

/// At most one entry per flow key at all times.
#[derive(Clone, Debug, Default)]
pub struct ForwardingTable {
    entries: BTreeMap<FlowKey, ForwardingEntry>,
}

impl ForwardingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, key: FlowKey) -> Option<&ForwardingEntry> {
        self.entries.get(&key)
    }

    /// Install a new entry after validating it against the group and bearer
    /// registries. The control plane never double-installs.
    pub fn install(
        &mut self,
        entry: ForwardingEntry,
        groups: &BTreeMap<GroupId, MulticastGroup>,
        bearers: &BTreeMap<BearerId, PtmBearer>,
    ) -> Result<(), DomainError> {
        if self.entries.contains_key(&entry.key) {
            return Err(DomainError::DuplicateEntry(entry.key));
        }
        if !groups.contains_key(&entry.group) {
            return Err(DomainError::UnknownGroup(entry.key, entry.group));
        }
        match bearers.get(&entry.bearer) {
            Some(b) if b.group == entry.group => {}
            _ => return Err(DomainError::BearerMismatch(entry.key, entry.bearer, entry.group)),
        }
        self.entries.insert(entry.key, entry);
        Ok(())
    }

    pub fn remove(&mut self, key: FlowKey) -> Option<ForwardingEntry> {
        self.entries.remove(&key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ForwardingEntry> {
        self.entries.values()
    }
}

/// Flow-level permissions plus the PRB admission check for one PTM
/// transmission.
#[derive(Clone, Debug)]
pub struct PolicySet {
    pub allowed_flows: BTreeSet<FlowKey>,
    pub prb_budget: u32,
    pub prb_required: u32,
}

impl PolicySet {
    pub fn allows(&self, key: FlowKey) -> bool {
        self.allowed_flows.contains(&key)
    }

    pub fn prb_ok(&self) -> bool {
        self.prb_required <= self.prb_budget
    }
}

/// Why a flow is, or is not, admitted for local breakout right now.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eligibility {
    Eligible,
    NotAllowed,
    ReceiversNotAttached,
    PrbExhausted,
}

/// Admission check for pivoting `key` onto its group's PTM bearer. Failure
/// reasons are reported in a fixed order (policy, attachment, PRB) so
/// diagnostics stay deterministic.
pub fn eligibility(
    key: FlowKey,
    group: &MulticastGroup,
    policies: &PolicySet,
    ues: &BTreeMap<UeId, Ue>,
) -> Eligibility {
    if !policies.allows(key) {
        return Eligibility::NotAllowed;
    }
    let all_attached = group
        .receivers
        .iter()
        .all(|r| ues.get(r).map(|u| u.attached).unwrap_or(false));
    if !all_attached {
        return Eligibility::ReceiversNotAttached;
    }
    if !policies.prb_ok() {
        return Eligibility::PrbExhausted;
    }
    Eligibility::Eligible
}

/// Downlink point-to-multipoint bearer with its PDCP queue.
#[derive(Clone, Debug)]
pub struct PtmBearer {
    pub id: BearerId,
    pub group: GroupId,
    pub qos_marking: String,
    queue: VecDeque<(PduSeq, SimTime)>,
}

impl PtmBearer {
    pub fn new(id: BearerId, group: GroupId, qos_marking: impl Into<String>) -> Self {
        PtmBearer { id, group, qos_marking: qos_marking.into(), queue: VecDeque::new() }
    }

    pub fn enqueue(&mut self, pdu: PduSeq, at: SimTime) {
        self.queue.push_back((pdu, at));
    }

    pub fn dequeue(&mut self) -> Option<(PduSeq, SimTime)> {
        self.queue.pop_front()
    }

    pub fn head(&self) -> Option<(PduSeq, SimTime)> {
        self.queue.front().copied()
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }
}

/// One uplink payload, timestamped at MAC ingress at its source.
#[derive(Clone, Debug)]
pub struct Pdu {
    pub seq: PduSeq,
    pub key: FlowKey,
    pub size_bits: u32,
    pub created_at: SimTime,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(id: u32, source: u32, receivers: &[u32]) -> MulticastGroup {
        MulticastGroup::new(
            GroupId(id),
            UeId(source),
            receivers.iter().map(|&r| UeId(r)).collect(),
        )
        .unwrap()
    }

    fn registries() -> (BTreeMap<GroupId, MulticastGroup>, BTreeMap<BearerId, PtmBearer>) {
        let g = group(0, 0, &[1, 2]);
        let b = PtmBearer::new(BearerId(0), GroupId(0), "urllc");
        ([(g.id, g)].into(), [(b.id, b)].into())
    }

    fn key(source: u32, flow: u32) -> FlowKey {
        FlowKey { source: UeId(source), flow: FlowId(flow) }
    }

    #[test]
    fn group_invariants_enforced() {
        assert_eq!(
            MulticastGroup::new(GroupId(0), UeId(0), BTreeSet::new()).unwrap_err(),
            DomainError::EmptyReceivers(GroupId(0))
        );
        assert_eq!(
            MulticastGroup::new(GroupId(0), UeId(1), [UeId(1)].into()).unwrap_err(),
            DomainError::SourceIsReceiver(GroupId(0), UeId(1))
        );
        let g = group(0, 0, &[1, 2]);
        assert!(g.receivers.is_subset(&g.members));
        assert!(g.members.contains(&g.source));
    }

    #[test]
    fn install_then_lookup_returns_entry() {
        let (groups, bearers) = registries();
        let mut ft = ForwardingTable::new();
        let entry = ForwardingEntry { key: key(0, 0), group: GroupId(0), bearer: BearerId(0) };
        ft.install(entry, &groups, &bearers).unwrap();
        assert_eq!(ft.lookup(key(0, 0)), Some(&entry));
        assert_eq!(ft.lookup(key(0, 1)), None);
    }

    #[test]
    fn duplicate_install_rejected() {
        let (groups, bearers) = registries();
        let mut ft = ForwardingTable::new();
        let entry = ForwardingEntry { key: key(0, 0), group: GroupId(0), bearer: BearerId(0) };
        ft.install(entry, &groups, &bearers).unwrap();
        assert_eq!(
            ft.install(entry, &groups, &bearers).unwrap_err(),
            DomainError::DuplicateEntry(key(0, 0))
        );
    }

    #[test]
    fn install_without_backing_group_or_bearer_rejected() {
        let (groups, bearers) = registries();
        let mut ft = ForwardingTable::new();
        let no_group =
            ForwardingEntry { key: key(0, 0), group: GroupId(9), bearer: BearerId(0) };
        assert_eq!(
            ft.install(no_group, &groups, &bearers).unwrap_err(),
            DomainError::UnknownGroup(key(0, 0), GroupId(9))
        );
        let wrong_bearer =
            ForwardingEntry { key: key(0, 0), group: GroupId(0), bearer: BearerId(9) };
        assert_eq!(
            ft.install(wrong_bearer, &groups, &bearers).unwrap_err(),
            DomainError::BearerMismatch(key(0, 0), BearerId(9), GroupId(0))
        );
    }

    #[test]
    fn remove_makes_lookup_absent() {
        let (groups, bearers) = registries();
        let mut ft = ForwardingTable::new();
        let entry = ForwardingEntry { key: key(0, 0), group: GroupId(0), bearer: BearerId(0) };
        ft.install(entry, &groups, &bearers).unwrap();
        assert!(ft.remove(key(0, 0)).is_some());
        assert_eq!(ft.lookup(key(0, 0)), None);
    }

    fn ues(attached: &[(u32, bool)]) -> BTreeMap<UeId, Ue> {
        attached
            .iter()
            .map(|&(id, a)| {
                (UeId(id), Ue { id: UeId(id), position: [0.0; 3], attached: a })
            })
            .collect()
    }

    fn policies(allowed: &[(u32, u32)], budget: u32, required: u32) -> PolicySet {
        PolicySet {
            allowed_flows: allowed.iter().map(|&(s, f)| key(s, f)).collect(),
            prb_budget: budget,
            prb_required: required,
        }
    }

    #[test]
    fn eligibility_reason_order() {
        let g = group(0, 0, &[1, 2]);
        let all = ues(&[(0, true), (1, true), (2, true)]);
        let one_detached = ues(&[(0, true), (1, false), (2, true)]);

        let p = policies(&[(0, 0)], 100, 1);
        assert_eq!(eligibility(key(0, 0), &g, &p, &all), Eligibility::Eligible);
        assert_eq!(
            eligibility(key(0, 0), &g, &p, &one_detached),
            Eligibility::ReceiversNotAttached
        );

        let empty = policies(&[], 100, 1);
        assert_eq!(eligibility(key(0, 0), &g, &empty, &all), Eligibility::NotAllowed);
        // policy failure wins over attachment failure
        assert_eq!(
            eligibility(key(0, 0), &g, &empty, &one_detached),
            Eligibility::NotAllowed
        );

        let no_prb = policies(&[(0, 0)], 0, 1);
        assert_eq!(eligibility(key(0, 0), &g, &no_prb, &all), Eligibility::PrbExhausted);
    }

    // Detaching any receiver can only move the result away from Eligible.
    #[test]
    fn eligibility_monotone_under_detach() {
        let g = group(0, 0, &[1, 2, 3]);
        let p = policies(&[(0, 0)], 100, 1);
        let all = ues(&[(0, true), (1, true), (2, true), (3, true)]);
        assert_eq!(eligibility(key(0, 0), &g, &p, &all), Eligibility::Eligible);
        for detach in [1u32, 2, 3] {
            let mut one_down = all.clone();
            one_down.get_mut(&UeId(detach)).unwrap().attached = false;
            assert_ne!(eligibility(key(0, 0), &g, &p, &one_down), Eligibility::Eligible);
        }
    }

    #[test]
    fn bearer_queue_is_fifo() {
        let mut b = PtmBearer::new(BearerId(0), GroupId(0), "urllc");
        b.enqueue(1, SimTime::from_micros(10));
        b.enqueue(2, SimTime::from_micros(20));
        assert_eq!(b.dequeue(), Some((1, SimTime::from_micros(10))));
        assert_eq!(b.dequeue(), Some((2, SimTime::from_micros(20))));
        assert_eq!(b.dequeue(), None);
    }
}
