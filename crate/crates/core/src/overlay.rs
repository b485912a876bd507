//! One-hop overlay membership between Enhanced Gateways.
//!
//! Every member holds the full Global Lookup Table. A joiner sends an attach
//! request to a bootstrap member, which answers with its table and announces
//! the joiner to everyone else.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::engine::queue::EventQueue;
use crate::geo::GeoCoordinate;
use crate::time::{SimDuration, SimTime};

const NODE_ID_SPACE: u32 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlayError {
    #[error("node id `{0}` is not six hex characters")]
    BadNodeId(String),
    #[error("node id {0:#x} exceeds 24 bits")]
    NodeIdRange(u32),
    #[error("network category must not be empty")]
    EmptyCategory,
    #[error("node {0} is already part of the overlay")]
    DuplicateNodeId(NodeId),
}

/// 24-bit overlay identifier, rendered as six uppercase hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(raw: u32) -> Result<Self, OverlayError> {
        if raw >= NODE_ID_SPACE {
            return Err(OverlayError::NodeIdRange(raw));
        }
        Ok(NodeId(raw))
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:06X}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = OverlayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 6 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(OverlayError::BadNodeId(s.to_string()));
        }
        let raw = u32::from_str_radix(s, 16).map_err(|_| OverlayError::BadNodeId(s.to_string()))?;
        NodeId::new(raw)
    }
}

/// Draws ids from `rng` until one is not in `taken`.
///
/// Panics if all 2^24 ids are taken.
pub fn generate_node_id<R: Rng + ?Sized>(rng: &mut R, taken: &BTreeSet<NodeId>) -> NodeId {
    assert!(taken.len() < NODE_ID_SPACE as usize, "node id space exhausted");
    loop {
        let id = NodeId(rng.random_range(0..NODE_ID_SPACE));
        if !taken.contains(&id) {
            return id;
        }
    }
}

/// What kind of quantity a sensor network measures. Compared case-insensitively.
#[derive(Debug, Clone)]
pub struct NetworkCategory {
    label: String,
    key: String,
}

impl NetworkCategory {
    pub const POLLUTION: &'static str = "Pollution";
    pub const TRAFFIC: &'static str = "Traffic";
    pub const HUMIDITY: &'static str = "Humidity";
    pub const TEMPERATURE: &'static str = "Temperature";
    pub const WIND_SPEED: &'static str = "WindSpeed";
    pub const FIRE_DETECTION: &'static str = "FireDetection";
    /// Derived at the gateway from the fused weather triple.
    pub const FIRE_RISK: &'static str = "FireRisk";

    const KNOWN: [&'static str; 7] = [
        Self::POLLUTION,
        Self::TRAFFIC,
        Self::HUMIDITY,
        Self::TEMPERATURE,
        Self::WIND_SPEED,
        Self::FIRE_DETECTION,
        Self::FIRE_RISK,
    ];

    pub fn new(label: &str) -> Result<Self, OverlayError> {
        let label = label.trim();
        if label.is_empty() {
            return Err(OverlayError::EmptyCategory);
        }
        let key = label.to_lowercase();
        // known labels get their canonical spelling
        let label =
            Self::KNOWN.iter().find(|k| k.to_lowercase() == key).map_or_else(|| label.to_string(), |k| k.to_string());
        Ok(Self { label, key })
    }

    /// Shorthand for the built-in labels; panics on an empty label.
    pub fn named(label: &str) -> Self {
        Self::new(label).expect("category label must not be empty")
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl PartialEq for NetworkCategory {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for NetworkCategory {}

impl PartialOrd for NetworkCategory {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NetworkCategory {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl Hash for NetworkCategory {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl fmt::Display for NetworkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// One row of the Global Lookup Table.
#[derive(Debug, Clone, PartialEq)]
pub struct GltEntry {
    pub node_id: NodeId,
    /// Endpoint of the gateway; IP-address shaped in all output.
    pub address: String,
    pub center: GeoCoordinate,
    pub category: NetworkCategory,
}

/// Overlay-wide membership, keyed by node id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GlobalLookupTable {
    entries: BTreeMap<NodeId, GltEntry>,
}

impl GlobalLookupTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry unless its id is already present. Existing rows are
    /// never replaced; returns whether the table grew.
    pub fn insert(&mut self, entry: GltEntry) -> bool {
        if self.entries.contains_key(&entry.node_id) {
            return false;
        }
        self.entries.insert(entry.node_id, entry);
        true
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn get(&self, id: NodeId) -> Option<&GltEntry> {
        self.entries.get(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in node id order.
    pub fn iter(&self) -> impl Iterator<Item = &GltEntry> {
        self.entries.values()
    }

    pub fn node_ids(&self) -> BTreeSet<NodeId> {
        self.entries.keys().copied().collect()
    }

    /// All entries of `category` other than `self_id`, sorted by node id.
    pub fn lookup(&self, self_id: NodeId, category: &NetworkCategory) -> Vec<&GltEntry> {
        self.entries.values().filter(|e| e.node_id != self_id && &e.category == category).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinRejection {
    DuplicateNodeId,
    /// The contacted node has not completed its own join.
    NotAMember,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OverlayMessage {
    AttachRequest(GltEntry),
    AttachAccepted(GlobalLookupTable),
    AttachRejected(JoinRejection),
    NewMember(GltEntry),
}

/// Side effects of handling one overlay message.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Handled {
    pub outgoing: Vec<(NodeId, OverlayMessage)>,
    /// Entries this member learned about (its table grew by these).
    pub learned: Vec<GltEntry>,
    /// Set on the joiner when its attach request was answered.
    pub join_result: Option<Result<(), JoinRejection>>,
}

/// One gateway's view of the overlay.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayMember {
    entry: GltEntry,
    glt: GlobalLookupTable,
    joined: bool,
}

impl OverlayMember {
    /// The first member: bootstraps from itself.
    pub fn founder(entry: GltEntry) -> Self {
        let mut glt = GlobalLookupTable::new();
        glt.insert(entry.clone());
        Self { entry, glt, joined: true }
    }

    /// A node that still has to attach; returns the request to send to the bootstrap.
    pub fn joining(entry: GltEntry) -> (Self, OverlayMessage) {
        let request = OverlayMessage::AttachRequest(entry.clone());
        let member = Self { entry, glt: GlobalLookupTable::new(), joined: false };
        (member, request)
    }

    pub fn id(&self) -> NodeId {
        self.entry.node_id
    }

    pub fn entry(&self) -> &GltEntry {
        &self.entry
    }

    pub fn glt(&self) -> &GlobalLookupTable {
        &self.glt
    }

    pub fn is_joined(&self) -> bool {
        self.joined
    }

    fn learn(&mut self, entry: GltEntry, handled: &mut Handled) {
        if self.glt.insert(entry.clone()) {
            handled.learned.push(entry);
        }
    }

    pub fn handle(&mut self, from: NodeId, message: OverlayMessage) -> Handled {
        let mut handled = Handled::default();
        match message {
            OverlayMessage::AttachRequest(joiner) => {
                let rejection = if !self.joined {
                    Some(JoinRejection::NotAMember)
                } else if self.glt.contains(joiner.node_id) {
                    Some(JoinRejection::DuplicateNodeId)
                } else {
                    None
                };
                if let Some(reason) = rejection {
                    handled.outgoing.push((from, OverlayMessage::AttachRejected(reason)));
                    return handled;
                }
                let others: Vec<NodeId> = self.glt.iter().map(|e| e.node_id).filter(|id| *id != self.id()).collect();
                self.learn(joiner.clone(), &mut handled);
                handled.outgoing.push((from, OverlayMessage::AttachAccepted(self.glt.clone())));
                for id in others {
                    handled.outgoing.push((id, OverlayMessage::NewMember(joiner.clone())));
                }
            }
            OverlayMessage::AttachAccepted(table) => {
                self.learn(self.entry.clone(), &mut handled);
                for entry in table.iter() {
                    self.learn(entry.clone(), &mut handled);
                }
                self.joined = true;
                handled.join_result = Some(Ok(()));
            }
            OverlayMessage::AttachRejected(reason) => {
                handled.join_result = Some(Err(reason));
            }
            OverlayMessage::NewMember(entry) => {
                self.learn(entry, &mut handled);
            }
        }
        handled
    }
}

/// How a join attempt ended.
#[derive(Debug, Clone, PartialEq)]
pub enum JoinOutcome {
    Pending,
    /// Carries the joiner's table as delivered with the attach response.
    Joined(GlobalLookupTable),
    Rejected(JoinRejection),
    /// The bootstrap never received the request.
    UnknownBootstrap(NodeId),
}

#[derive(Debug, Clone)]
struct Envelope {
    from: NodeId,
    to: NodeId,
    message: OverlayMessage,
}

/// Stand-alone overlay driven by its own event queue, with a fixed one-way
/// delay between members.
#[derive(Debug, Clone)]
pub struct Overlay {
    members: BTreeMap<NodeId, OverlayMember>,
    outcomes: BTreeMap<NodeId, JoinOutcome>,
    queue: EventQueue<Envelope>,
    delay: SimDuration,
    delivered: u64,
}

impl Overlay {
    pub fn new(delay: SimDuration) -> Self {
        Self { members: BTreeMap::new(), outcomes: BTreeMap::new(), queue: EventQueue::new(), delay, delivered: 0 }
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    /// Starts a join. The first node of an empty overlay may name itself as
    /// bootstrap. A joiner whose id is already known is refused outright.
    pub fn join(&mut self, joiner: GltEntry, bootstrap: NodeId) -> Result<(), OverlayError> {
        let id = joiner.node_id;
        if self.members.contains_key(&id) {
            return Err(OverlayError::DuplicateNodeId(id));
        }
        if bootstrap == id && self.members.is_empty() {
            let member = OverlayMember::founder(joiner);
            self.outcomes.insert(id, JoinOutcome::Joined(member.glt().clone()));
            self.members.insert(id, member);
            return Ok(());
        }
        let (member, request) = OverlayMember::joining(joiner);
        self.members.insert(id, member);
        self.outcomes.insert(id, JoinOutcome::Pending);
        self.send(id, bootstrap, request);
        Ok(())
    }

    fn send(&mut self, from: NodeId, to: NodeId, message: OverlayMessage) {
        self.queue.schedule_after(self.delay, Envelope { from, to, message });
    }

    /// Delivers messages until none are in flight.
    pub fn run_until_quiescent(&mut self) {
        while let Some(event) = self.queue.pop() {
            let Envelope { from, to, message } = event.payload;
            let Some(member) = self.members.get_mut(&to) else {
                if let OverlayMessage::AttachRequest(joiner) = message {
                    self.outcomes.insert(joiner.node_id, JoinOutcome::UnknownBootstrap(to));
                }
                continue;
            };
            self.delivered += 1;
            let handled = member.handle(from, message);
            if let Some(result) = handled.join_result {
                let outcome = match result {
                    Ok(()) => JoinOutcome::Joined(member.glt().clone()),
                    Err(reason) => JoinOutcome::Rejected(reason),
                };
                self.outcomes.insert(to, outcome);
            }
            for (dest, msg) in handled.outgoing {
                self.send(to, dest, msg);
            }
        }
        // failed joiners never became members
        let failed: Vec<NodeId> = self
            .outcomes
            .iter()
            .filter(|(_, o)| matches!(o, JoinOutcome::Rejected(_) | JoinOutcome::UnknownBootstrap(_)))
            .map(|(id, _)| *id)
            .collect();
        for id in failed {
            if self.members.get(&id).is_some_and(|m| !m.is_joined()) {
                self.members.remove(&id);
            }
        }
    }

    pub fn outcome(&self, id: NodeId) -> Option<&JoinOutcome> {
        self.outcomes.get(&id)
    }

    pub fn glt(&self, id: NodeId) -> Option<&GlobalLookupTable> {
        self.members.get(&id).filter(|m| m.is_joined()).map(|m| m.glt())
    }

    pub fn members(&self) -> impl Iterator<Item = &OverlayMember> {
        self.members.values().filter(|m| m.is_joined())
    }

    pub fn messages_delivered(&self) -> u64 {
        self.delivered
    }
}
