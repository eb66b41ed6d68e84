//! Helpers for the opportunistic baseline: hop-count gradients, duty
//! delays, and its coding-awareness test.
//!
//! The opportunistic scheme has no forwarding tables and no feedback. A
//! frame's receivers that sit strictly closer (in hops) to a packet's
//! destination each arm a duty timer; the shortest timer usually wins and
//! its transmission, once overheard, cancels the rest. Timers shrink when
//! the would-be forwarder can combine the packet with queued traffic, so
//! coding-rich forwarders win ties — that is the scheme's entire
//! coding-awareness.

use crate::topology::Topology;
use crate::types::{NativePacket, NodeId};
use std::collections::BTreeMap;

/// Hop distances toward every destination of interest.
#[derive(Clone, Debug)]
pub struct HopField {
    dists: BTreeMap<NodeId, Vec<Option<u32>>>,
}

impl HopField {
    pub fn build(topo: &Topology, dests: &[NodeId]) -> Self {
        let dists = dests.iter().map(|&d| (d, topo.hop_distances(d))).collect();
        HopField { dists }
    }

    pub fn dist(&self, from: NodeId, dest: NodeId) -> Option<u32> {
        self.dists.get(&dest).and_then(|v| v[from.idx()])
    }

    /// Whether `a` is strictly closer to `dest` than `b`. Unreachable
    /// positions are never closer.
    pub fn is_closer(&self, a: NodeId, b: NodeId, dest: NodeId) -> bool {
        match (self.dist(a, dest), self.dist(b, dest)) {
            (Some(da), Some(db)) => da < db,
            _ => false,
        }
    }
}

/// How long a forwarder holding `coding_gain` combinable partners waits
/// before firing its duty. More partners, shorter wait; the per-node
/// stagger keeps equal-gain timers from colliding.
pub fn core_duty_delay(base_s: f64, tie_eps_s: f64, coding_gain: u32, node: NodeId) -> f64 {
    base_s / (1.0 + f64::from(coding_gain)) + f64::from(node.0) * tie_eps_s
}

fn reaches(topo: &Topology, a: NodeId, b: NodeId) -> bool {
    a == b || topo.are_adjacent(a, b)
}

/// Coding test without forwarding tables: packets `a` and `b` may share a
/// frame sent by `me` when, for each packet, some neighbor of `me`
/// strictly closer to that packet's destination was in earshot of the
/// *other* packet's last transmitter — so a useful receiver plausibly
/// holds what it needs to decode.
pub fn core_pair_ok(
    topo: &Topology,
    field: &HopField,
    me: NodeId,
    a: &NativePacket,
    b: &NativePacket,
) -> bool {
    if a.id.destination() == b.id.destination() {
        return false;
    }
    let candidate_exists = |dest: NodeId, other_prev: NodeId| {
        topo.neighbors(me)
            .iter()
            .any(|&v| field.is_closer(v, me, dest) && reaches(topo, v, other_prev))
    };
    candidate_exists(a.id.destination(), b.prev_hop)
        && candidate_exists(b.id.destination(), a.prev_hop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{FlowId, PacketId};

    fn n(i: u16) -> NodeId {
        NodeId(i)
    }

    fn packet(src: u16, dst: u16, prev: u16) -> NativePacket {
        NativePacket {
            id: PacketId { flow: FlowId { src: n(src), dst: n(dst), num: 0 }, seq: 1 },
            prev_hop: n(prev),
            next_hop: n(dst),
            payload_bytes: 1000,
            decoded_native: false,
            coded_origin: None,
            suspect: false,
            birth: 0.0,
        }
    }

    #[test]
    fn gradient_follows_hop_counts() {
        let topo = Topology::eight_node();
        let field = HopField::build(&topo, &[n(4), n(0)]);
        assert_eq!(field.dist(n(0), n(4)), Some(4));
        assert_eq!(field.dist(n(6), n(4)), Some(2));
        assert!(field.is_closer(n(2), n(1), n(4)));
        assert!(!field.is_closer(n(1), n(1), n(4)));
        assert!(!field.is_closer(n(5), n(6), n(4)));
    }

    #[test]
    fn duty_delay_shrinks_with_gain_and_staggers_by_node() {
        let base = core_duty_delay(2.0e-3, 1.0e-4, 0, n(0));
        assert!((base - 2.0e-3).abs() < 1e-12);
        let gain2 = core_duty_delay(2.0e-3, 1.0e-4, 2, n(0));
        assert!((gain2 - 2.0e-3 / 3.0).abs() < 1e-12);
        let staggered = core_duty_delay(2.0e-3, 1.0e-4, 2, n(3));
        assert!((staggered - gain2 - 3.0e-4).abs() < 1e-12);
        assert!(gain2 < base);
    }

    #[test]
    fn crossing_flows_at_the_relay_may_pair() {
        let topo = Topology::x_topology();
        let field = HopField::build(&topo, &[n(3), n(4)]);
        let a = packet(0, 3, 0);
        let b = packet(1, 4, 1);
        assert!(core_pair_ok(&topo, &field, n(2), &a, &b));
    }

    #[test]
    fn chain_midpoint_pairs_opposing_traffic() {
        let topo = Topology::eight_node();
        let field = HopField::build(&topo, &[n(4), n(0)]);
        let a = packet(0, 4, 1); // heading on toward N4, last sent by N1
        let b = packet(4, 0, 3); // heading back toward N0, last sent by N3
        assert!(core_pair_ok(&topo, &field, n(2), &a, &b));
    }

    #[test]
    fn pairing_fails_without_a_useful_receiver() {
        let topo = Topology::eight_node();
        let field = HopField::build(&topo, &[n(4), n(0)]);
        // Two packets for the same destination never pair.
        let c = packet(0, 4, 1);
        let d = packet(5, 4, 5);
        assert!(!core_pair_ok(&topo, &field, n(2), &c, &d));
        // A partner last heard at the far end of the chain: none of N1's
        // forward receivers (N2, N6) were in its earshot.
        let a = packet(0, 4, 0);
        let far = packet(4, 0, 4);
        assert!(!core_pair_ok(&topo, &field, n(1), &a, &far));
    }
}
