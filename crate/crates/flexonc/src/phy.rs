//! Frame timing and the lossy broadcast channel.
//!
//! Every transmission is a broadcast heard by all nodes in range. A frame
//! reaches each in-range receiver independently with probability
//! `(1 - ber)^bits`, i.e. every bit must survive. Acknowledgment frames can
//! carry an extra loss factor so feedback paths can be stressed without
//! touching data frames, and individual directed links can be pinned to
//! their own bit error rate.
//!
//! Reception draws come from one counter-based random stream per receiver,
//! derived from the run seed. Receivers are always sampled in ascending
//! node order and a draw is consumed for every in-range receiver even when
//! the outcome is forced, so a run is reproducible bit-for-bit from its
//! seed alone.

use crate::topology::Topology;
use crate::types::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Radio and framing parameters shared by every node.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    /// Physical transmission rate in bits per second.
    pub data_rate_bps: f64,
    /// Bit error rate applied to every link unless overridden.
    pub ber: f64,
    /// Transmission range in meters.
    pub range_m: f64,
    /// Acknowledgment frame body in bytes.
    pub ack_bytes: u32,
    /// Fixed per-frame header/trailer overhead in bytes.
    pub overhead_bytes: u32,
    /// Extra header bytes per partner carried in a coded frame.
    pub coded_partner_overhead: u32,
    /// Idle guard time between channel activities, in seconds.
    pub guard_s: f64,
    /// Additional independent loss applied to acknowledgment frames only.
    pub ack_loss: f64,
    /// Per-directed-link bit error rates overriding `ber`.
    pub link_ber: BTreeMap<(NodeId, NodeId), f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            data_rate_bps: 1.0e6,
            ber: 0.0,
            range_m: 250.0,
            ack_bytes: 14,
            overhead_bytes: 24,
            coded_partner_overhead: 2,
            guard_s: 1.0e-4,
            ack_loss: 0.0,
            link_ber: BTreeMap::new(),
        }
    }
}

impl ChannelParams {
    /// Time to push `frame_bytes` onto the air.
    pub fn airtime(&self, frame_bytes: u32) -> f64 {
        (frame_bytes as f64 * 8.0) / self.data_rate_bps
    }

    /// On-air size of a native data frame with `payload` bytes.
    pub fn data_frame_bytes(&self, payload: u32) -> u32 {
        payload + self.overhead_bytes
    }

    /// On-air size of a coded frame: the longest partner payload plus the
    /// per-partner header entries.
    pub fn coded_frame_bytes(&self, max_payload: u32, partners: usize) -> u32 {
        max_payload + self.overhead_bytes + self.coded_partner_overhead * partners as u32
    }

    pub fn ack_frame_bytes(&self) -> u32 {
        self.ack_bytes + self.overhead_bytes
    }

    pub fn ack_airtime(&self) -> f64 {
        self.airtime(self.ack_frame_bytes())
    }

    /// Length of one feedback slot: an acknowledgment plus its guard.
    pub fn ack_slot(&self) -> f64 {
        self.ack_airtime() + self.guard_s
    }

    /// Feedback window of `slots` acknowledgment slots plus the trailing
    /// guard before the channel is free again.
    pub fn ack_window(&self, slots: u32) -> f64 {
        slots as f64 * self.ack_slot() + self.guard_s
    }

    fn link_error_rate(&self, from: NodeId, to: NodeId) -> f64 {
        self.link_ber.get(&(from, to)).copied().unwrap_or(self.ber)
    }

    /// Probability that a `frame_bytes`-long frame crosses the directed
    /// link intact.
    pub fn link_success(&self, from: NodeId, to: NodeId, frame_bytes: u32) -> f64 {
        frame_success_probability(self.link_error_rate(from, to), frame_bytes)
    }
}

/// `(1 - ber)^(8 * frame_bytes)`, evaluated in the log domain so frames of
/// tens of thousands of bits keep full precision at tiny error rates.
pub fn frame_success_probability(ber: f64, frame_bytes: u32) -> f64 {
    if ber <= 0.0 {
        return 1.0;
    }
    if ber >= 1.0 {
        return 0.0;
    }
    let bits = f64::from(frame_bytes) * 8.0;
    (bits * (-ber).ln_1p()).exp()
}

/// Outcome of one broadcast at one in-range receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reception {
    pub receiver: NodeId,
    pub delivered: bool,
}

/// The shared medium: holds the per-receiver random streams for one run.
pub struct Channel {
    pub params: ChannelParams,
    rngs: Vec<ChaCha8Rng>,
}

impl Channel {
    pub fn new(params: ChannelParams, node_count: usize, run_seed: u64) -> Self {
        let rngs = (0..node_count)
            .map(|i| {
                // Distinct, seed-dependent stream per receiver. The odd
                // multiplier spreads consecutive node indices across the
                // seed space.
                let stream = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                ChaCha8Rng::seed_from_u64(run_seed ^ stream)
            })
            .collect();
        Channel { params, rngs }
    }

    /// Transmit one frame of `frame_bytes` from `sender`; every in-range
    /// node rolls its own reception. `extra_loss` is an independent loss
    /// probability stacked on top of the bit errors (used for
    /// acknowledgment frames; zero for data).
    pub fn broadcast(
        &mut self,
        topo: &Topology,
        sender: NodeId,
        frame_bytes: u32,
        extra_loss: f64,
    ) -> Vec<Reception> {
        topo.neighbors(sender)
            .iter()
            .map(|&rx| {
                let p = self.params.link_success(sender, rx, frame_bytes) * (1.0 - extra_loss);
                let draw: f64 = self.rngs[rx.idx()].gen();
                Reception { receiver: rx, delivered: draw < p }
            })
            .collect()
    }
}
