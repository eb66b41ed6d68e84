//! Cooperative-recovery mechanics: acknowledgment bookkeeping, the
//! feedback-window slot layout, and backup-duty selection for eligible
//! bystanders of a coded frame.
//!
//! Every data frame reserves a feedback window behind its airtime. Slot k
//! belongs to the intended forwarder of the frame's k-th partner; a coded
//! frame under cooperative recovery reserves further slots, one per member
//! of its eligible set in ascending node order. A bystander that committed
//! to a backup duty fires in its own slot unless someone better-ranked —
//! the intended forwarder or an earlier bystander — acknowledged the
//! packet first, which it necessarily overhears before its slot arrives.

use crate::phy::ChannelParams;
use crate::topology::{second_next_hop, RoutingView, Topology};
use crate::types::{CodedHeader, NodeId, PacketId};
use std::collections::{BTreeSet, VecDeque};

/// Bounded memory of packet ids the node has heard acknowledged. Oldest
/// entries fall out first; re-inserting an id refreshes nothing (the fact
/// is already known).
#[derive(Clone, Debug)]
pub struct AckCache {
    cap: usize,
    order: VecDeque<PacketId>,
    set: BTreeSet<PacketId>,
}

impl AckCache {
    pub fn new(cap: usize) -> Self {
        AckCache { cap, order: VecDeque::new(), set: BTreeSet::new() }
    }

    pub fn insert(&mut self, id: PacketId) {
        if self.cap == 0 || !self.set.insert(id) {
            return;
        }
        self.order.push_back(id);
        while self.order.len() > self.cap {
            let evicted = self.order.pop_front().expect("nonempty");
            self.set.remove(&evicted);
        }
    }

    pub fn contains(&self, id: PacketId) -> bool {
        self.set.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

/// Transmission start of feedback slot `slot` (1-based) for a data frame
/// that finished arriving at `arrival`.
pub fn slot_start(arrival: f64, slot: u32, params: &ChannelParams) -> f64 {
    arrival + params.guard_s + f64::from(slot - 1) * params.ack_slot()
}

/// Feedback slots a frame reserves: one per partner, plus one per eligible
/// bystander when cooperative recovery is on.
pub fn feedback_slots(partners: u32, eligible: u32, backups: bool) -> u32 {
    if backups {
        partners + eligible
    } else {
        partners
    }
}

/// Slot in which the eligible bystander at 1-based `position` fires: all
/// intended-forwarder slots come first, then bystanders in ascending node
/// order.
pub fn backup_slot(partners: u32, position: u32) -> u32 {
    partners + position
}

/// A bystander's commitment to stand in for one failing intended
/// forwarder.
#[derive(Clone, Debug, PartialEq)]
pub struct ChosenBackup {
    pub partner: PacketId,
    pub intended: NodeId,
    /// Where this node would send the packet: the hop after the intended
    /// forwarder on the packet's route.
    pub forward_to: NodeId,
    /// The packet was not in the buffer and must be peeled out of the
    /// coded frame.
    pub was_unknown: bool,
}

/// Which partner, if any, this eligible bystander commits to back up: the
/// first in header order it could actually rescue — close enough to the
/// intended forwarder to hear its verdict, close enough to the following
/// hop to forward, and able to obtain the packet from what it knows.
pub fn choose_backup(
    header: &CodedHeader,
    topo: &Topology,
    view: &RoutingView,
    me: NodeId,
    known: &BTreeSet<PacketId>,
) -> Option<ChosenBackup> {
    for &(id, intended) in &header.partners {
        if !topo.are_adjacent(me, intended) {
            continue;
        }
        let Ok(forward_to) = second_next_hop(view, intended, id.destination()) else {
            continue;
        };
        if !topo.are_adjacent(me, forward_to) {
            continue;
        }
        let others_known = header
            .partners
            .iter()
            .filter(|&&(p, _)| p != id)
            .all(|&(p, _)| known.contains(&p));
        let have_it = known.contains(&id);
        if !have_it && !others_known {
            continue;
        }
        return Some(ChosenBackup { partner: id, intended, forward_to, was_unknown: !have_it });
    }
    None
}
