//! Decoding buffers, transmit queues, and the rules that decide which
//! packets may share one coded frame.
//!
//! A node combines packets P1 and P2 only when each packet's next hop can
//! plausibly decode: the next hop of each must be, or neighbor, the node
//! the other packet was last transmitted by. A packet that was itself
//! extracted from a coded frame weakens that reasoning — its "last
//! transmitter" sent it inside a combination that bystanders may not have
//! been able to open — so a stricter per-side test exists: the partner's
//! next hop must *equal* the node the decoded packet came from, since that
//! node provably held the packet. Nodes normally use the loose test and
//! mark the risky pairings; the switch machinery in [`SwitchState`] counts
//! the negative acknowledgments those pairings earn and flips the node to
//! the strict test when one flow collects too many.

use crate::topology::Topology;
use crate::types::{FlowId, NativePacket, NodeId, PacketId};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Recently seen packets a node can decode against, with bounded memory.
/// Entries expire `retention` seconds after they were stored, and once
/// `capacity` is exceeded the oldest entry is evicted first.
#[derive(Clone, Debug)]
pub struct CodingBuffer {
    retention: f64,
    capacity: usize,
    stored_at: BTreeMap<PacketId, f64>,
}

impl CodingBuffer {
    pub fn new(retention: f64, capacity: usize) -> Self {
        CodingBuffer { retention, capacity, stored_at: BTreeMap::new() }
    }

    pub fn prune(&mut self, now: f64) {
        let horizon = now - self.retention;
        self.stored_at.retain(|_, &mut t| t >= horizon);
    }

    /// Record `id` as known at `now`; re-inserting refreshes its age.
    pub fn insert(&mut self, id: PacketId, now: f64) {
        self.prune(now);
        self.stored_at.insert(id, now);
        while self.stored_at.len() > self.capacity {
            let oldest = self
                .stored_at
                .iter()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(&id, _)| id)
                .expect("nonempty");
            self.stored_at.remove(&oldest);
        }
    }

    pub fn contains(&self, id: PacketId) -> bool {
        self.stored_at.contains_key(&id)
    }

    /// The identifiers currently decodable against, after expiry.
    pub fn known(&mut self, now: f64) -> BTreeSet<PacketId> {
        self.prune(now);
        self.stored_at.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.stored_at.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored_at.is_empty()
    }
}

/// A native packet waiting in a transmit queue.
#[derive(Clone, Debug)]
pub struct QueuedPacket {
    pub packet: NativePacket,
    /// Transmissions attempted so far (on any path through any queue).
    pub attempts: u32,
    pub enqueued_at: f64,
    /// For overheard copies held on another node's behalf: the hop this
    /// node would send the packet to, one past the original next hop.
    pub forward_next_hop: Option<NodeId>,
}

impl QueuedPacket {
    /// The next hop this node would address when transmitting the packet.
    pub fn coding_next_hop(&self) -> NodeId {
        self.forward_next_hop.unwrap_or(self.packet.next_hop)
    }

    /// The packet as it would leave this node: overheard copies are
    /// re-addressed to their forward hop.
    pub fn coding_view(&self) -> NativePacket {
        let mut p = self.packet.clone();
        p.next_hop = self.coding_next_hop();
        p
    }
}

/// The two transmit queues of one node. Q1 holds packets the node is
/// obliged to forward; Q2 holds overheard copies kept to help neighbors.
/// One packet id never appears twice: a Q1 insert displaces any Q2 copy,
/// and inserts of an id already present are refused.
#[derive(Debug, Default)]
pub struct TxQueues {
    pub q1: VecDeque<QueuedPacket>,
    pub q2: VecDeque<QueuedPacket>,
}

impl TxQueues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, id: PacketId) -> bool {
        self.q1.iter().any(|q| q.packet.id == id) || self.q2.iter().any(|q| q.packet.id == id)
    }

    pub fn push_q1_back(&mut self, qp: QueuedPacket) -> bool {
        self.push_q1(qp, false)
    }

    pub fn push_q1_front(&mut self, qp: QueuedPacket) -> bool {
        self.push_q1(qp, true)
    }

    fn push_q1(&mut self, qp: QueuedPacket, front: bool) -> bool {
        let id = qp.packet.id;
        if self.q1.iter().any(|q| q.packet.id == id) {
            return false;
        }
        // The forwarding duty supersedes a helper copy.
        self.q2.retain(|q| q.packet.id != id);
        if front {
            self.q1.push_front(qp);
        } else {
            self.q1.push_back(qp);
        }
        true
    }

    pub fn push_q2_back(&mut self, qp: QueuedPacket) -> bool {
        if self.contains(qp.packet.id) {
            return false;
        }
        self.q2.push_back(qp);
        true
    }

    /// Remove one packet by id from whichever queue holds it.
    pub fn remove(&mut self, id: PacketId) -> Option<QueuedPacket> {
        if let Some(pos) = self.q1.iter().position(|q| q.packet.id == id) {
            return self.q1.remove(pos);
        }
        if let Some(pos) = self.q2.iter().position(|q| q.packet.id == id) {
            return self.q2.remove(pos);
        }
        None
    }

    /// Drop every queued packet failing the predicate; returns how many
    /// were dropped.
    pub fn retain<F: FnMut(&QueuedPacket) -> bool>(&mut self, mut keep: F) -> usize {
        let before = self.q1.len() + self.q2.len();
        self.q1.retain(|q| keep(q));
        self.q2.retain(|q| keep(q));
        before - (self.q1.len() + self.q2.len())
    }

    pub fn is_empty(&self) -> bool {
        self.q1.is_empty() && self.q2.is_empty()
    }
}

fn reaches(topo: &Topology, a: NodeId, b: NodeId) -> bool {
    a == b || topo.are_adjacent(a, b)
}

/// The loose pairing test: each packet's next hop must be, or neighbor,
/// the other packet's last transmitter, so it had a chance to overhear
/// what it will need to decode.
pub fn common_conditions_ok(topo: &Topology, a: &NativePacket, b: &NativePacket) -> bool {
    reaches(topo, a.next_hop, b.rule_prev_hop()) && reaches(topo, b.next_hop, a.rule_prev_hop())
}

/// Which sides of a pairing rest on shaky ground: a packet decoded out of
/// a coded frame is suspect unless its partner heads exactly to the node
/// that transmitted that frame — the one node guaranteed to have held it.
pub fn pair_suspects(a: &NativePacket, b: &NativePacket) -> (bool, bool) {
    let sa = a.decoded_native && b.next_hop != a.rule_prev_hop();
    let sb = b.decoded_native && a.next_hop != b.rule_prev_hop();
    (sa, sb)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanEncodeOutcome {
    Reject,
    Accept { suspect_a: bool, suspect_b: bool },
}

/// Whether `a` and `b` may share a coded frame. `strict` switches the
/// decoded-native sides from the loose neighborhood test to the exact
/// previous-transmitter test.
pub fn can_encode(
    topo: &Topology,
    a: &NativePacket,
    b: &NativePacket,
    strict: bool,
) -> CanEncodeOutcome {
    // Each intended forwarder must be able to tell which partner is its
    // own, and a node cannot be the target of two partners at once.
    if a.next_hop == b.next_hop {
        return CanEncodeOutcome::Reject;
    }
    if !common_conditions_ok(topo, a, b) {
        return CanEncodeOutcome::Reject;
    }
    let (suspect_a, suspect_b) = pair_suspects(a, b);
    if strict && (suspect_a || suspect_b) {
        return CanEncodeOutcome::Reject;
    }
    CanEncodeOutcome::Accept { suspect_a, suspect_b }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartnerSource {
    Q1,
    Q2,
}

/// One queue entry chosen to join a coded frame.
#[derive(Clone, Debug)]
pub struct SelectedPartner {
    pub source: PartnerSource,
    pub id: PacketId,
    pub view: NativePacket,
    pub suspect: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CodingSelection {
    pub head_suspect: bool,
    pub partners: Vec<SelectedPartner>,
}

/// Grow a coding set around `head`: own forwarding traffic first, then
/// helper copies, then packets that were themselves decoded out of coded
/// frames (the least trustworthy partners). Every admitted candidate must
/// pair with the head *and* every previously admitted partner, so the
/// whole set is mutually encodable, and the set never exceeds
/// `max_partners` packets including the head. Suspect marks accumulate
/// across all pairings.
pub fn select_partners(
    topo: &Topology,
    head: &NativePacket,
    q1: &VecDeque<QueuedPacket>,
    q2: &VecDeque<QueuedPacket>,
    strict: bool,
    max_partners: usize,
) -> CodingSelection {
    let mut views: Vec<NativePacket> = vec![head.clone()];
    let mut suspects: Vec<bool> = vec![false];
    let mut chosen: Vec<(PartnerSource, PacketId)> = Vec::new();

    let q1_plain = q1
        .iter()
        .filter(|q| !q.packet.decoded_native)
        .map(|q| (PartnerSource::Q1, q.coding_view()));
    let q2_all = q2.iter().map(|q| (PartnerSource::Q2, q.coding_view()));
    let q1_decoded = q1
        .iter()
        .filter(|q| q.packet.decoded_native)
        .map(|q| (PartnerSource::Q1, q.coding_view()));

    for (source, view) in q1_plain.chain(q2_all).chain(q1_decoded) {
        if views.len() >= max_partners.max(1) {
            break;
        }
        if view.id == head.id || chosen.iter().any(|&(_, id)| id == view.id) {
            continue;
        }
        let mut cand_suspect = false;
        let mut member_updates = vec![false; views.len()];
        let mut ok = true;
        for (j, member) in views.iter().enumerate() {
            match can_encode(topo, &view, member, strict) {
                CanEncodeOutcome::Reject => {
                    ok = false;
                    break;
                }
                CanEncodeOutcome::Accept { suspect_a, suspect_b } => {
                    cand_suspect |= suspect_a;
                    member_updates[j] = suspect_b;
                }
            }
        }
        if !ok {
            continue;
        }
        for (j, s) in member_updates.into_iter().enumerate() {
            suspects[j] |= s;
        }
        chosen.push((source, view.id));
        views.push(view);
        suspects.push(cand_suspect);
    }

    let partners = chosen
        .into_iter()
        .zip(views.drain(1..).zip(suspects.drain(1..)))
        .map(|((source, id), (view, suspect))| SelectedPartner { source, id, view, suspect })
        .collect();
    CodingSelection { head_suspect: suspects[0], partners }
}

/// Knobs of the rule-switch heuristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchParams {
    /// Negative acknowledgments a single flow may collect before the node
    /// abandons the loose pairing test; the count must *exceed* this.
    pub nack_threshold: u32,
    /// A flow is declared gone after `alpha` mean inter-arrival times of
    /// silence.
    pub alpha: f64,
    /// Weight of the newest gap in the inter-arrival average.
    pub ewma_weight: f64,
    /// Stand-in mean inter-arrival time until a flow shows its first gap.
    pub miat_init: f64,
}

impl Default for SwitchParams {
    fn default() -> Self {
        SwitchParams { nack_threshold: 5, alpha: 3.0, ewma_weight: 0.25, miat_init: 1.0 }
    }
}

/// A silence deadline for one flow, to be checked by the caller's event
/// loop. Stale deadlines are recognized by their generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowTimer {
    pub flow: FlowId,
    pub generation: u64,
    pub deadline: f64,
}

#[derive(Clone, Debug)]
struct FlowClock {
    last_arrival: f64,
    miat: Option<f64>,
    generation: u64,
}

/// Per-node state of the pairing-rule switch. Every data frame that
/// mentions a flow refreshes that flow's clock; negative acknowledgments
/// earned by risky pairings accumulate per flow; and when one flow's count
/// exceeds the threshold, the node switches to the strict test. Hearing a
/// brand-new flow, or any known flow going silent, reverts the switch and
/// clears all counts — the traffic pattern that justified the suspicion is
/// gone.
#[derive(Clone, Debug)]
pub struct SwitchState {
    params: SwitchParams,
    flows: BTreeMap<FlowId, FlowClock>,
    nacks: BTreeMap<FlowId, u32>,
    active: bool,
}

impl SwitchState {
    pub fn new(params: SwitchParams) -> Self {
        SwitchState { params, flows: BTreeMap::new(), nacks: BTreeMap::new(), active: false }
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Note that a data frame mentioned `flow` at time `now`. Returns the
    /// silence deadline the caller should watch for this flow.
    pub fn note_flow_arrival(&mut self, flow: FlowId, now: f64) -> FlowTimer {
        if let Some(clock) = self.flows.get_mut(&flow) {
            let gap = now - clock.last_arrival;
            clock.miat = Some(match clock.miat {
                None => gap,
                Some(m) => (1.0 - self.params.ewma_weight) * m + self.params.ewma_weight * gap,
            });
            clock.last_arrival = now;
            clock.generation += 1;
        } else {
            self.revert();
            self.flows
                .insert(flow, FlowClock { last_arrival: now, miat: None, generation: 0 });
        }
        let clock = &self.flows[&flow];
        let horizon = clock.miat.unwrap_or(self.params.miat_init);
        FlowTimer {
            flow,
            generation: clock.generation,
            deadline: now + self.params.alpha * horizon,
        }
    }

    /// Deliver a silence deadline. Outdated generations are ignored; a
    /// current one forgets the flow and reverts the switch. Returns whether
    /// the deadline was still live.
    pub fn timer_expired(&mut self, timer: FlowTimer) -> bool {
        match self.flows.get(&timer.flow) {
            Some(clock) if clock.generation == timer.generation => {
                self.flows.remove(&timer.flow);
                self.revert();
                true
            }
            _ => false,
        }
    }

    /// Count a negative acknowledgment earned by a risky pairing against
    /// `flow`. Returns true when this one tips the node into strict mode.
    pub fn note_suspect_nack(&mut self, flow: FlowId) -> bool {
        let count = self.nacks.entry(flow).or_insert(0);
        *count += 1;
        if !self.active && *count > self.params.nack_threshold {
            self.active = true;
            return true;
        }
        false
    }

    fn revert(&mut self) {
        self.nacks.clear();
        self.active = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(i: u16) -> NodeId {
        NodeId(i)
    }

    fn flow(src: u16, dst: u16) -> FlowId {
        FlowId { src: n(src), dst: n(dst), num: 0 }
    }

    fn pid(src: u16, dst: u16, seq: u32) -> PacketId {
        PacketId { flow: flow(src, dst), seq }
    }

    fn native(id: PacketId, prev: u16, next: u16) -> NativePacket {
        NativePacket {
            id,
            prev_hop: n(prev),
            next_hop: n(next),
            payload_bytes: 1000,
            decoded_native: false,
            coded_origin: None,
            suspect: false,
            birth: 0.0,
        }
    }

    fn decoded(id: PacketId, origin: u16, next: u16) -> NativePacket {
        NativePacket {
            id,
            prev_hop: n(origin),
            next_hop: n(next),
            payload_bytes: 1000,
            decoded_native: true,
            coded_origin: Some(n(origin)),
            suspect: false,
            birth: 0.0,
        }
    }

    fn queued(p: NativePacket) -> QueuedPacket {
        QueuedPacket { packet: p, attempts: 0, enqueued_at: 0.0, forward_next_hop: None }
    }

    #[test]
    fn buffer_expires_entries_after_the_retention_window() {
        let mut buf = CodingBuffer::new(2.0, 200);
        buf.insert(pid(0, 4, 1), 10.0);
        assert!(buf.contains(pid(0, 4, 1)));
        assert_eq!(buf.known(11.9).len(), 1);
        assert!(buf.known(12.1).is_empty());
        assert!(!buf.contains(pid(0, 4, 1)));
    }

    #[test]
    fn buffer_evicts_the_oldest_when_full() {
        let mut buf = CodingBuffer::new(100.0, 3);
        for s in 0..4 {
            buf.insert(pid(0, 4, s), s as f64);
        }
        assert!(!buf.contains(pid(0, 4, 0)));
        for s in 1..4 {
            assert!(buf.contains(pid(0, 4, s)));
        }
    }

    #[test]
    fn buffer_reinsert_refreshes_age() {
        let mut buf = CodingBuffer::new(100.0, 2);
        buf.insert(pid(0, 4, 0), 0.0);
        buf.insert(pid(0, 4, 1), 1.0);
        buf.insert(pid(0, 4, 0), 2.0); // now 1 is the oldest
        buf.insert(pid(0, 4, 2), 3.0);
        assert!(buf.contains(pid(0, 4, 0)));
        assert!(!buf.contains(pid(0, 4, 1)));
    }

    #[test]
    fn queues_keep_one_copy_per_packet() {
        let mut q = TxQueues::new();
        let p = native(pid(0, 4, 1), 0, 2);
        assert!(q.push_q2_back(queued(p.clone())));
        assert!(!q.push_q2_back(queued(p.clone())));
        // Forwarding duty displaces the helper copy.
        assert!(q.push_q1_back(queued(p.clone())));
        assert!(q.q2.is_empty());
        assert!(!q.push_q1_front(queued(p.clone())));
        assert_eq!(q.q1.len(), 1);
        assert!(q.remove(p.id).is_some());
        assert!(q.is_empty());
    }

    #[test]
    fn crossing_relay_traffic_is_encodable() {
        // Two two-hop flows crossing at one relay, each sink in earshot of
        // the opposite source.
        let topo = Topology::x_topology();
        let a = native(pid(0, 3, 1), 0, 3);
        let b = native(pid(1, 4, 1), 1, 4);
        assert!(common_conditions_ok(&topo, &a, &b));
        assert_eq!(
            can_encode(&topo, &a, &b, true),
            CanEncodeOutcome::Accept { suspect_a: false, suspect_b: false }
        );
    }

    #[test]
    fn shared_next_hop_is_never_encodable() {
        let topo = Topology::x_topology();
        let a = native(pid(0, 3, 1), 0, 3);
        let b = native(pid(1, 3, 1), 1, 3);
        assert_eq!(can_encode(&topo, &a, &b, false), CanEncodeOutcome::Reject);
        assert_eq!(can_encode(&topo, &a, &b, true), CanEncodeOutcome::Reject);
    }

    #[test]
    fn out_of_earshot_next_hop_blocks_the_pair() {
        // On the 3x4 lattice, a packet heading to N10 cannot pair with one
        // last sent by N2: N10 is three rows from N2's radio.
        let topo = Topology::twelve_node();
        let a = native(pid(1, 11, 1), 5, 10);
        let b = native(pid(2, 8, 1), 2, 9);
        assert!(!common_conditions_ok(&topo, &a, &b));
        assert_eq!(can_encode(&topo, &a, &b, false), CanEncodeOutcome::Reject);
    }

    #[test]
    fn decoded_packets_pair_loosely_but_not_strictly() {
        // The relay one row up decoded P1 out of a frame sent by N5 and is
        // about to forward it to N7; a partner heading to N9 clears the
        // loose test only because N9 neighbors N5. N9 never held the frame
        // P1 traveled in, so the pairing is marked.
        let topo = Topology::twelve_node();
        let p1 = decoded(pid(1, 11, 1), 5, 7);
        let p3 = native(pid(7, 8, 1), 7, 9);
        assert!(common_conditions_ok(&topo, &p1, &p3));
        assert_eq!(
            can_encode(&topo, &p1, &p3, false),
            CanEncodeOutcome::Accept { suspect_a: true, suspect_b: false }
        );
        assert_eq!(can_encode(&topo, &p1, &p3, true), CanEncodeOutcome::Reject);

        // A partner heading exactly back to N5 passes the strict test.
        let p4 = native(pid(10, 5, 1), 10, 5);
        assert_eq!(
            can_encode(&topo, &p1, &p4, true),
            CanEncodeOutcome::Accept { suspect_a: false, suspect_b: false }
        );
    }

    #[test]
    fn four_crossing_flows_fill_one_frame_at_the_hub() {
        let topo = Topology::cross_topology();
        let head = native(pid(0, 4, 1), 0, 4);
        let q1: VecDeque<QueuedPacket> = [
            native(pid(4, 0, 1), 4, 0),
            native(pid(1, 3, 1), 1, 3),
            native(pid(3, 1, 1), 3, 1),
        ]
        .into_iter()
        .map(queued)
        .collect();
        let sel = select_partners(&topo, &head, &q1, &VecDeque::new(), false, 4);
        assert_eq!(sel.partners.len(), 3);
        assert!(!sel.head_suspect);
        assert!(sel.partners.iter().all(|p| !p.suspect));
        // The cap is honored even with a fourth valid candidate.
        let sel3 = select_partners(&topo, &head, &q1, &VecDeque::new(), false, 3);
        assert_eq!(sel3.partners.len(), 2);
    }

    #[test]
    fn own_traffic_is_preferred_over_helper_copies() {
        let topo = Topology::x_topology();
        let head = native(pid(0, 3, 1), 0, 3);
        let own: VecDeque<QueuedPacket> = [native(pid(1, 4, 1), 1, 4)].into_iter().map(queued).collect();
        let helper: VecDeque<QueuedPacket> =
            [native(pid(1, 4, 2), 1, 4)].into_iter().map(queued).collect();
        let sel = select_partners(&topo, &head, &own, &helper, false, 4);
        // Both head to N4, so only one fits; queue 1 wins.
        assert_eq!(sel.partners.len(), 1);
        assert_eq!(sel.partners[0].source, PartnerSource::Q1);
        assert_eq!(sel.partners[0].id, pid(1, 4, 1));
    }

    #[test]
    fn helper_copies_are_coded_under_their_forward_hop() {
        // A helper beside the 8-node relay chain re-addresses overheard
        // packets one hop forward before pairing them.
        let topo = Topology::eight_node();
        let mut toward4 = queued(native(pid(0, 4, 1), 0, 1));
        toward4.forward_next_hop = Some(n(2));
        let mut toward0 = queued(native(pid(4, 0, 1), 1, 0));
        toward0.forward_next_hop = Some(n(0));
        assert_eq!(toward0.coding_view().next_hop, n(0));
        let head = toward4.coding_view();
        let q2: VecDeque<QueuedPacket> = [toward0].into_iter().collect();
        let sel = select_partners(&topo, &head, &VecDeque::new(), &q2, false, 4);
        assert_eq!(sel.partners.len(), 1);
        assert_eq!(sel.partners[0].view.next_hop, n(0));
    }

    #[test]
    fn sixth_nack_flips_the_switch() {
        let mut sw = SwitchState::new(SwitchParams::default());
        let f = flow(7, 8);
        sw.note_flow_arrival(f, 0.0);
        for _ in 0..5 {
            assert!(!sw.note_suspect_nack(f));
            assert!(!sw.is_active());
        }
        assert!(sw.note_suspect_nack(f));
        assert!(sw.is_active());
        // Further negatives keep it active without re-announcing.
        assert!(!sw.note_suspect_nack(f));
    }

    #[test]
    fn hearing_a_new_flow_reverts_the_switch() {
        let mut sw = SwitchState::new(SwitchParams::default());
        let f = flow(7, 8);
        sw.note_flow_arrival(f, 0.0);
        for _ in 0..6 {
            sw.note_suspect_nack(f);
        }
        assert!(sw.is_active());
        sw.note_flow_arrival(flow(2, 4), 1.0);
        assert!(!sw.is_active());
        // Counts restart from zero afterwards.
        for _ in 0..6 {
            sw.note_suspect_nack(f);
        }
        assert!(sw.is_active());
    }

    #[test]
    fn silence_deadline_tracks_the_inter_arrival_average() {
        let mut sw = SwitchState::new(SwitchParams::default());
        let f = flow(1, 11);
        let t0 = sw.note_flow_arrival(f, 1.0);
        assert_eq!(t0.deadline, 1.0 + 3.0); // stand-in average until a gap exists
        let t1 = sw.note_flow_arrival(f, 1.07);
        assert!((t1.deadline - 1.28).abs() < 1e-12); // first gap taken as-is
        let t2 = sw.note_flow_arrival(f, 1.15);
        // average = 0.75 * 0.07 + 0.25 * 0.08
        assert!((t2.deadline - 1.3675).abs() < 1e-12);
        assert_ne!(t1.generation, t2.generation);
    }

    #[test]
    fn only_the_latest_deadline_counts() {
        let mut sw = SwitchState::new(SwitchParams::default());
        let f = flow(1, 11);
        sw.note_flow_arrival(f, 0.0);
        for _ in 0..6 {
            sw.note_suspect_nack(f);
        }
        let stale = sw.note_flow_arrival(f, 0.1);
        let live = sw.note_flow_arrival(f, 0.2);
        assert!(!sw.timer_expired(stale));
        assert!(sw.is_active(), "stale deadline must not revert anything");
        assert!(sw.timer_expired(live));
        assert!(!sw.is_active());
        // The flow is forgotten, so its next mention is a fresh start.
        assert!(!sw.timer_expired(live));
    }

    #[test]
    fn strict_acceptance_implies_loose_acceptance_unmarked() {
        // Exhaustive over placements on the 3x4 lattice: whenever the
        // strict test accepts a pair, the loose test accepts it too and
        // finds nothing to mark.
        let topo = Topology::twelve_node();
        let ids = [pid(0, 11, 1), pid(3, 8, 1)];
        let mut checked = 0u32;
        for ph_a in 0..12u16 {
            for nh_a in 0..12u16 {
                for ph_b in 0..12u16 {
                    for nh_b in 0..12u16 {
                        for dec in 0..4u8 {
                            let mut a = native(ids[0], ph_a, nh_a);
                            let mut b = native(ids[1], ph_b, nh_b);
                            if dec & 1 != 0 {
                                a = decoded(ids[0], ph_a, nh_a);
                            }
                            if dec & 2 != 0 {
                                b = decoded(ids[1], ph_b, nh_b);
                            }
                            if let CanEncodeOutcome::Accept { suspect_a, suspect_b } =
                                can_encode(&topo, &a, &b, true)
                            {
                                assert!(!suspect_a && !suspect_b);
                                assert_eq!(
                                    can_encode(&topo, &a, &b, false),
                                    CanEncodeOutcome::Accept {
                                        suspect_a: false,
                                        suspect_b: false
                                    }
                                );
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 0);
    }

    proptest! {
        // Whatever lands in the queues, a selection is mutually encodable,
        // capped, and free of duplicate ids and shared next hops.
        #[test]
        fn selections_are_always_coherent(
            specs in proptest::collection::vec((0..12u16, 0..12u16, 0..12u16, any::<bool>(), any::<bool>()), 0..10),
            head_ph in 0..12u16,
            head_nh in 0..12u16,
            cap in 1..5usize,
        ) {
            let topo = Topology::twelve_node();
            let head = native(pid(0, 11, 0), head_ph, head_nh);
            let mut q1 = VecDeque::new();
            let mut q2 = VecDeque::new();
            for (i, &(src, ph, nh, dec, to_q2)) in specs.iter().enumerate() {
                let id = PacketId { flow: flow(src, 11), seq: i as u32 + 1 };
                let p = if dec { decoded(id, ph, nh) } else { native(id, ph, nh) };
                if to_q2 { q2.push_back(queued(p)); } else { q1.push_back(queued(p)); }
            }
            let sel = select_partners(&topo, &head, &q1, &q2, false, cap);
            prop_assert!(sel.partners.len() + 1 <= cap.max(1));
            let mut views = vec![head.clone()];
            views.extend(sel.partners.iter().map(|p| p.view.clone()));
            for i in 0..views.len() {
                for j in (i + 1)..views.len() {
                    prop_assert_ne!(views[i].next_hop, views[j].next_hop);
                    prop_assert_ne!(views[i].id, views[j].id);
                    prop_assert!(common_conditions_ok(&topo, &views[i], &views[j]));
                }
            }
        }
    }
}
