//! Event trace of a run and an order-sensitive digest over it.
//!
//! Every run hashes its trace whether or not the events themselves are
//! kept; two runs of the same configuration and seed must produce the
//! same digest, which makes regressions in event ordering visible as a
//! single number.

use crate::types::{NodeId, PacketId};

#[derive(Clone, Debug, PartialEq)]
pub enum TraceEvent {
    Generated { time: f64, packet: PacketId },
    NativeSent { time: f64, node: NodeId, packet: PacketId, next_hop: NodeId, attempt: u32 },
    CodedSent { time: f64, node: NodeId, partners: Vec<(PacketId, NodeId)> },
    Received { time: f64, node: NodeId, from: NodeId, packet: PacketId },
    Decoded { time: f64, node: NodeId, packet: PacketId },
    DecodeFailed { time: f64, node: NodeId, from: NodeId },
    AckSent { time: f64, node: NodeId, packet: PacketId, nack: bool },
    BackupFired { time: f64, node: NodeId, packet: PacketId },
    Delivered { time: f64, packet: PacketId, duplicate: bool },
    Dropped { time: f64, node: NodeId, packet: PacketId },
    SwitchActivated { time: f64, node: NodeId },
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Collects trace events into an FNV-1a digest, optionally retaining the
/// events themselves.
#[derive(Clone, Debug)]
pub struct TraceLog {
    state: u64,
    events: Option<Vec<TraceEvent>>,
}

impl TraceLog {
    pub fn new(keep_events: bool) -> Self {
        TraceLog { state: FNV_OFFSET, events: keep_events.then(Vec::new) }
    }

    pub fn push(&mut self, ev: TraceEvent) {
        self.hash_event(&ev);
        if let Some(events) = &mut self.events {
            events.push(ev);
        }
    }

    pub fn hash(&self) -> u64 {
        self.state
    }

    pub fn into_events(self) -> Option<Vec<TraceEvent>> {
        self.events
    }

    fn byte(&mut self, b: u8) {
        self.state ^= u64::from(b);
        self.state = self.state.wrapping_mul(FNV_PRIME);
    }

    fn bytes(&mut self, bs: &[u8]) {
        for &b in bs {
            self.byte(b);
        }
    }

    fn time(&mut self, t: f64) {
        self.bytes(&t.to_bits().to_le_bytes());
    }

    fn node(&mut self, n: NodeId) {
        self.bytes(&n.0.to_le_bytes());
    }

    fn packet(&mut self, p: PacketId) {
        self.node(p.flow.src);
        self.node(p.flow.dst);
        self.byte(p.flow.num);
        self.bytes(&p.seq.to_le_bytes());
    }

    fn hash_event(&mut self, ev: &TraceEvent) {
        use TraceEvent::*;
        match *ev {
            Generated { time, packet } => {
                self.byte(1);
                self.time(time);
                self.packet(packet);
            }
            NativeSent { time, node, packet, next_hop, attempt } => {
                self.byte(2);
                self.time(time);
                self.node(node);
                self.packet(packet);
                self.node(next_hop);
                self.bytes(&attempt.to_le_bytes());
            }
            CodedSent { time, node, ref partners } => {
                self.byte(3);
                self.time(time);
                self.node(node);
                self.byte(partners.len() as u8);
                for &(p, nh) in partners {
                    self.packet(p);
                    self.node(nh);
                }
            }
            Received { time, node, from, packet } => {
                self.byte(4);
                self.time(time);
                self.node(node);
                self.node(from);
                self.packet(packet);
            }
            Decoded { time, node, packet } => {
                self.byte(5);
                self.time(time);
                self.node(node);
                self.packet(packet);
            }
            DecodeFailed { time, node, from } => {
                self.byte(6);
                self.time(time);
                self.node(node);
                self.node(from);
            }
            AckSent { time, node, packet, nack } => {
                self.byte(7);
                self.time(time);
                self.node(node);
                self.packet(packet);
                self.byte(u8::from(nack));
            }
            BackupFired { time, node, packet } => {
                self.byte(8);
                self.time(time);
                self.node(node);
                self.packet(packet);
            }
            Delivered { time, packet, duplicate } => {
                self.byte(9);
                self.time(time);
                self.packet(packet);
                self.byte(u8::from(duplicate));
            }
            Dropped { time, node, packet } => {
                self.byte(10);
                self.time(time);
                self.node(node);
                self.packet(packet);
            }
            SwitchActivated { time, node } => {
                self.byte(11);
                self.time(time);
                self.node(node);
            }
        }
    }
}
