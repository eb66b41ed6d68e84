//! Mutable per-node state of a run: queues, caches, outstanding
//! transmissions, committed duties, and the node-local counters.

use crate::coding::{CodingBuffer, QueuedPacket, SwitchState, TxQueues};
use crate::scheme::flexonc::AckCache;
use crate::topology::RoutingView;
use crate::types::{CodedHeader, NodeId, PacketId};
use std::collections::{BTreeMap, BTreeSet};

/// One partner of an outstanding coded frame, with the feedback heard for
/// it so far.
#[derive(Clone, Debug)]
pub struct PendingPartner {
    pub entry: QueuedPacket,
    /// The pairing that admitted this partner relied on the loose test.
    pub suspect: bool,
    /// Someone holding the packet confirmed custody.
    pub acked: bool,
    /// That someone was the partner's own intended forwarder.
    pub acked_by_intended: bool,
    pub nacked: bool,
}

/// A transmission whose feedback window is still open. At most one exists
/// per node: the channel reservation covers the window, so a node never
/// has two frames awaiting feedback at once.
#[derive(Clone, Debug)]
pub enum PendingTx {
    Native { entry: QueuedPacket, acked: bool },
    Coded { header: CodedHeader, partners: Vec<PendingPartner> },
}

/// A bystander's scheduled stand-in for one partner of a coded frame it
/// overheard, delayed to its feedback slot so better-placed nodes go
/// first.
#[derive(Clone, Debug)]
pub struct BackupDuty {
    pub header: CodedHeader,
    pub frame_sender: NodeId,
    pub partner: PacketId,
    pub forward_to: NodeId,
    pub was_unknown: bool,
    /// 1 + this node's position among the frame's eligible bystanders;
    /// the intended forwarder holds rank 1.
    pub my_rank: u32,
}

/// A gradient forwarder's armed claim on a packet (table-free scheme
/// only); cancelled when anyone else is heard carrying the packet.
#[derive(Clone, Debug)]
pub struct ForwardDuty {
    pub generation: u64,
    pub heard_from: NodeId,
}

#[derive(Debug)]
pub struct NodeState {
    pub id: NodeId,
    pub queues: TxQueues,
    pub buffer: CodingBuffer,
    pub ack_cache: AckCache,
    /// Packets this node has put on the air at least once.
    pub seen_forwarded: BTreeSet<PacketId>,
    pub switch: Option<SwitchState>,
    pub pending: Option<PendingTx>,
    pub pending_token: u64,
    /// A coded frame rebuilt for retransmission, ahead of both queues.
    pub staged_retransmit: Option<Vec<QueuedPacket>>,
    /// This node currently sits in the channel request queue.
    pub requested: bool,
    pub duties: BTreeMap<u64, BackupDuty>,
    pub forward_duties: BTreeMap<PacketId, ForwardDuty>,
    /// Transmit-once guard of the table-free scheme.
    pub transmitted_once: BTreeSet<PacketId>,
    pub view: RoutingView,
    // Node-local counters, lifted into NodeMetrics at the end of the run.
    pub decoding_failures: u64,
    pub undecodable_overhears: u64,
    pub coding_opportunities: u64,
    pub backup_firings: u64,
}

impl NodeState {
    pub fn new(
        id: NodeId,
        view: RoutingView,
        buffer_retention_s: f64,
        buffer_capacity: usize,
        ack_cache_size: usize,
        switch: Option<SwitchState>,
    ) -> Self {
        NodeState {
            id,
            queues: TxQueues::new(),
            buffer: CodingBuffer::new(buffer_retention_s, buffer_capacity),
            ack_cache: AckCache::new(ack_cache_size),
            seen_forwarded: BTreeSet::new(),
            switch,
            pending: None,
            pending_token: 0,
            staged_retransmit: None,
            requested: false,
            duties: BTreeMap::new(),
            forward_duties: BTreeMap::new(),
            transmitted_once: BTreeSet::new(),
            view,
            decoding_failures: 0,
            undecodable_overhears: 0,
            coding_opportunities: 0,
            backup_firings: 0,
        }
    }

    /// Is `id` held anywhere custody lives on this node?
    pub fn holds(&self, id: PacketId) -> bool {
        if self.queues.contains(id) {
            return true;
        }
        match &self.pending {
            Some(PendingTx::Native { entry, .. }) if entry.packet.id == id => return true,
            Some(PendingTx::Coded { partners, .. })
                if partners.iter().any(|p| p.entry.packet.id == id) =>
            {
                return true;
            }
            _ => {}
        }
        self.staged_retransmit
            .as_ref()
            .is_some_and(|parts| parts.iter().any(|p| p.packet.id == id))
    }
}
