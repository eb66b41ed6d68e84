//! Packet and identifier types shared by every layer of the simulator.
//!
//! Coded payloads are symbolic: a coded packet carries the set of packet ids
//! it combines instead of an XORed bitstream. Decoding therefore reduces to
//! set difference against what a node already holds, which keeps the
//! protocol logic exact while avoiding byte-level payload bookkeeping.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Seconds since simulation start.
pub type Seconds = f64;

/// Node index in the topology. Stable and dense: node `k` is the k-th
/// position handed to the topology builder.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u16);

impl NodeId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0)
    }
}

/// Unidirectional traffic flow. `num` separates parallel flows between the
/// same endpoint pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowId {
    pub src: NodeId,
    pub dst: NodeId,
    pub num: u8,
}

impl fmt::Debug for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F({}->{}#{})", self.src, self.dst, self.num)
    }
}

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}#{}", self.src, self.dst, self.num)
    }
}

/// Globally unique packet identity: flow plus per-flow sequence number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PacketId {
    pub flow: FlowId,
    pub seq: u32,
}

impl fmt::Debug for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.flow, self.seq)
    }
}

impl PacketId {
    pub fn destination(self) -> NodeId {
        self.flow.dst
    }
}

/// A native (uncoded) packet as held or transmitted by one node.
///
/// `prev_hop` is the node this copy was heard from; for a packet the holder
/// generated itself it is the holder. For a decoded-native packet the
/// coding rules treat the transmitter of the coded frame it was recovered
/// from as the previous hop, kept in `coded_origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct NativePacket {
    pub id: PacketId,
    pub prev_hop: NodeId,
    pub next_hop: NodeId,
    pub payload_bytes: u32,
    /// Recovered from a coded frame rather than received natively.
    pub decoded_native: bool,
    /// Transmitter of the coded frame this packet was decoded from.
    /// Present exactly when `decoded_native` is set.
    pub coded_origin: Option<NodeId>,
    /// Tagged at encode time when this decoded-native packet was combined
    /// under the relaxed conditions even though the partner's next hop is
    /// not the origin-coded previous hop.
    pub suspect: bool,
    pub birth: Seconds,
}

impl NativePacket {
    /// Previous hop as the coding rules see it.
    pub fn rule_prev_hop(&self) -> NodeId {
        self.coded_origin.unwrap_or(self.prev_hop)
    }
}

/// Set of eligible non-intended forwarders, as a bitmap over node indices.
/// Topologies are capped at 64 nodes so the bitmap always fits.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct EligibleSet(pub u64);

impl EligibleSet {
    pub fn empty() -> Self {
        EligibleSet(0)
    }

    pub fn insert(&mut self, n: NodeId) {
        debug_assert!(n.idx() < 64);
        self.0 |= 1 << n.idx();
    }

    pub fn remove(&mut self, n: NodeId) {
        self.0 &= !(1 << n.idx());
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.idx() < 64 && self.0 & (1 << n.idx()) != 0
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Members in ascending node-index order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..64u16).filter(|i| self.0 & (1 << i) != 0).map(NodeId)
    }

    /// 1-based position of `n` among members in ascending index order.
    pub fn position(&self, n: NodeId) -> Option<u32> {
        if !self.contains(n) {
            return None;
        }
        let below = self.0 & ((1u64 << n.idx()) - 1);
        Some(below.count_ones() + 1)
    }
}

impl fmt::Debug for EligibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Header of a coded frame: the combined packets with their intended next
/// hops, plus the bitmap of eligible non-intended forwarders.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedHeader {
    /// `(packet, intended next hop)` pairs, in encode order. Next hops are
    /// pairwise distinct.
    pub partners: Vec<(PacketId, NodeId)>,
    pub eligible: EligibleSet,
}

impl CodedHeader {
    pub fn partner_count(&self) -> usize {
        self.partners.len()
    }

    pub fn next_hop_of(&self, id: PacketId) -> Option<NodeId> {
        self.partners.iter().find(|(p, _)| *p == id).map(|&(_, nh)| nh)
    }

    /// 1-based slot position of the intended forwarder `nh` in the header.
    pub fn slot_of_next_hop(&self, nh: NodeId) -> Option<usize> {
        self.partners.iter().position(|&(_, h)| h == nh).map(|i| i + 1)
    }
}

/// A coded frame in flight. `carried` mirrors the header's packet ids; it
/// stands in for the XORed payload bits.
#[derive(Clone, Debug, PartialEq)]
pub struct CodedPacket {
    pub header: CodedHeader,
    pub sender: NodeId,
    /// Airtime is governed by the largest combined payload.
    pub payload_bytes: u32,
    pub carried: BTreeSet<PacketId>,
}

impl CodedPacket {
    pub fn new(header: CodedHeader, sender: NodeId, payload_bytes: u32) -> Self {
        let carried = header.partners.iter().map(|&(p, _)| p).collect();
        CodedPacket { header, sender, payload_bytes, carried }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AckKind {
    Ack,
    Nack,
}

/// Acknowledgment frame. Carries the sender address so receivers can apply
/// rank-based cancellation and duplicate control.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Acknowledgment {
    pub kind: AckKind,
    pub sender: NodeId,
    pub packet: PacketId,
}

/// Decode a coded packet against a set of known packet ids.
///
/// Returns the single missing packet when exactly one of the carried ids is
/// unknown; `None` when zero are missing (nothing new to learn) or two or
/// more are missing (underdetermined).
pub fn xor_decode(coded: &CodedPacket, known: &BTreeSet<PacketId>) -> Option<PacketId> {
    let mut missing = None;
    for &id in &coded.carried {
        if !known.contains(&id) {
            if missing.is_some() {
                return None;
            }
            missing = Some(id);
        }
    }
    missing
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("{receiver} is not in the frame's eligible forwarder set")]
    NotEligible { receiver: NodeId },
    #[error("packet {0:?} is not carried by the frame")]
    UnknownPartner(PacketId),
}

/// Acknowledgment rank of a non-intended forwarder for one decoded partner.
///
/// Rank 1 belongs to the partner's intended forwarder. Eligible non-intended
/// forwarders occupy ranks 2..=k+1 in ascending node-index order, so the
/// mapping from {intended} + eligible set onto 1..=k+1 is a bijection.
pub fn rank_of(receiver: NodeId, header: &CodedHeader, decoded: PacketId) -> Result<u32, RankError> {
    if header.next_hop_of(decoded).is_none() {
        return Err(RankError::UnknownPartner(decoded));
    }
    match header.eligible.position(receiver) {
        Some(pos) => Ok(pos + 1),
        None => Err(RankError::NotEligible { receiver }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fid(src: u16, dst: u16, num: u8) -> FlowId {
        FlowId { src: NodeId(src), dst: NodeId(dst), num }
    }

    fn pid(src: u16, dst: u16, seq: u32) -> PacketId {
        PacketId { flow: fid(src, dst, 0), seq }
    }

    fn coded(partners: &[(PacketId, u16)]) -> CodedPacket {
        let header = CodedHeader {
            partners: partners.iter().map(|&(p, h)| (p, NodeId(h))).collect(),
            eligible: EligibleSet::empty(),
        };
        CodedPacket::new(header, NodeId(0), 1000)
    }

    #[test]
    fn decode_recovers_the_single_missing_packet() {
        let p1 = pid(0, 7, 1);
        let p2 = pid(7, 9, 1);
        let c = coded(&[(p1, 7), (p2, 9)]);
        let known: BTreeSet<_> = [p2].into();
        assert_eq!(xor_decode(&c, &known), Some(p1));
    }

    #[test]
    fn decode_fails_with_two_missing() {
        // A node that overheard only the coded frame knows neither partner.
        let p1 = pid(0, 7, 1);
        let p3 = pid(2, 0, 1);
        let c = coded(&[(p1, 6), (p3, 0)]);
        assert_eq!(xor_decode(&c, &BTreeSet::new()), None);
    }

    #[test]
    fn decode_returns_nothing_when_all_partners_are_known() {
        let p1 = pid(0, 7, 1);
        let p2 = pid(7, 9, 1);
        let c = coded(&[(p1, 7), (p2, 9)]);
        let known: BTreeSet<_> = [p1, p2].into();
        assert_eq!(xor_decode(&c, &known), None);
    }

    #[test]
    fn decode_agrees_with_brute_force_over_all_known_subsets() {
        // Oracle: enumerate every subset of up to four partners as the known
        // set; the decodable case is exactly |missing| == 1.
        let ids: Vec<PacketId> = (0..4).map(|k| pid(k, 10 + k, 1)).collect();
        for n in 2..=4usize {
            let partners: Vec<(PacketId, u16)> =
                ids[..n].iter().enumerate().map(|(i, &p)| (p, 20 + i as u16)).collect();
            let c = coded(&partners);
            for mask in 0u32..(1 << n) {
                let known: BTreeSet<PacketId> = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| ids[i])
                    .collect();
                let missing: Vec<PacketId> =
                    ids[..n].iter().copied().filter(|p| !known.contains(p)).collect();
                let expect = if missing.len() == 1 { Some(missing[0]) } else { None };
                assert_eq!(xor_decode(&c, &known), expect, "n={n} mask={mask:b}");
            }
        }
    }

    #[test]
    fn rank_counts_from_two_in_ascending_node_order() {
        let p2 = pid(0, 4, 5);
        let mut header = CodedHeader {
            partners: vec![(p2, NodeId(2))],
            eligible: EligibleSet::empty(),
        };
        header.eligible.insert(NodeId(6));
        assert_eq!(rank_of(NodeId(6), &header, p2), Ok(2));

        let mut header2 = CodedHeader {
            partners: vec![(p2, NodeId(5))],
            eligible: EligibleSet::empty(),
        };
        header2.eligible.insert(NodeId(7));
        header2.eligible.insert(NodeId(3));
        assert_eq!(rank_of(NodeId(3), &header2, p2), Ok(2));
        assert_eq!(rank_of(NodeId(7), &header2, p2), Ok(3));
    }

    #[test]
    fn rank_rejects_nodes_outside_the_eligible_set() {
        let p = pid(0, 4, 1);
        let header = CodedHeader { partners: vec![(p, NodeId(2))], eligible: EligibleSet::empty() };
        assert_eq!(
            rank_of(NodeId(9), &header, p),
            Err(RankError::NotEligible { receiver: NodeId(9) })
        );
    }

    #[test]
    fn rank_is_a_bijection_onto_two_through_k_plus_one() {
        let p = pid(0, 4, 1);
        for mask in 1u64..(1 << 10) {
            let eligible = EligibleSet(mask);
            let header = CodedHeader { partners: vec![(p, NodeId(63))], eligible };
            let mut ranks: Vec<u32> =
                eligible.iter().map(|n| rank_of(n, &header, p).unwrap()).collect();
            ranks.sort_unstable();
            let expect: Vec<u32> = (2..2 + eligible.len()).collect();
            assert_eq!(ranks, expect, "mask={mask:b}");
        }
    }
}
