//! Per-run measurement records and their CSV/JSON rendering.
//!
//! Accounting invariant: every generated packet is, at the end of a run,
//! exactly one of delivered (reached its destination at least once),
//! dropped (every copy was abandoned — retries exhausted or purged), or
//! stranded (some copy still sat in a queue, buffer stage, or pending
//! transmission when the run was cut off). Duplicates are extra arrivals
//! of already-delivered packets and are counted separately.

use crate::scheme::SchemeKind;
use crate::types::{FlowId, NodeId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowMetrics {
    pub flow: FlowId,
    pub generated: u64,
    /// Unique packets that reached the destination.
    pub delivered: u64,
    /// Additional arrivals of already-delivered packets at the destination.
    pub duplicates: u64,
    /// Delivered payload bits over the flow's active duration.
    pub throughput_bps: f64,
    /// Mean generation-to-first-delivery latency; zero when nothing
    /// arrived.
    pub mean_delay_s: f64,
    /// Transmissions beyond each packet's first, summed over the flow.
    pub retransmissions: u64,
    /// Negative acknowledgments sent for this flow's packets.
    pub nacks: u64,
    pub dropped: u64,
    pub stranded: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub node: NodeId,
    /// Coded frames addressed to this node it could not open.
    pub decoding_failures: u64,
    /// Overheard coded frames useless to this bystander (two or more
    /// unknowns).
    pub undecodable_overhears: u64,
    /// Coded frames this node built.
    pub coding_opportunities: u64,
    /// Backup duties this node actually fired.
    pub backup_firings: u64,
}

/// What became of the coded frames a run sent, judged by the feedback
/// their senders heard: every coded frame is acknowledged by at least one
/// intended forwarder, rescued by bystanders only, or times out unheard
/// (which includes hearing nothing but negatives).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CodedFates {
    pub sent: u64,
    pub intended: u64,
    pub backup_only: u64,
    pub timed_out_unheard: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchActivation {
    pub node: NodeId,
    pub time_s: f64,
}

/// Everything measured in one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub scheme: SchemeKind,
    pub seed: u64,
    pub duration_s: f64,
    pub flows: Vec<FlowMetrics>,
    pub nodes: Vec<NodeMetrics>,
    pub coded: CodedFates,
    /// Acknowledgment receptions lost to channel errors, over all
    /// receivers in range.
    pub lost_acks: u64,
    pub switch_activations: Vec<SwitchActivation>,
    /// Order-sensitive digest of the run's event trace; equal seeds and
    /// configurations must produce equal hashes.
    pub trace_hash: u64,
}

impl MetricsRecord {
    pub fn flow(&self, flow: FlowId) -> Option<&FlowMetrics> {
        self.flows.iter().find(|f| f.flow == flow)
    }

    pub fn node(&self, node: NodeId) -> Option<&NodeMetrics> {
        self.nodes.iter().find(|n| n.node == node)
    }

    pub fn total_generated(&self) -> u64 {
        self.flows.iter().map(|f| f.generated).sum()
    }

    pub fn total_delivered(&self) -> u64 {
        self.flows.iter().map(|f| f.delivered).sum()
    }

    pub fn total_duplicates(&self) -> u64 {
        self.flows.iter().map(|f| f.duplicates).sum()
    }

    pub fn total_throughput_bps(&self) -> f64 {
        self.flows.iter().map(|f| f.throughput_bps).sum()
    }

    pub fn total_nacks(&self) -> u64 {
        self.flows.iter().map(|f| f.nacks).sum()
    }

    pub fn total_retransmissions(&self) -> u64 {
        self.flows.iter().map(|f| f.retransmissions).sum()
    }

    pub fn total_backup_firings(&self) -> u64 {
        self.nodes.iter().map(|n| n.backup_firings).sum()
    }

    pub fn total_decoding_failures(&self) -> u64 {
        self.nodes.iter().map(|n| n.decoding_failures).sum()
    }

    /// Delivery-weighted mean latency across flows; zero if nothing
    /// arrived anywhere.
    pub fn mean_delay_s(&self) -> f64 {
        let delivered: u64 = self.total_delivered();
        if delivered == 0 {
            return 0.0;
        }
        let weighted: f64 =
            self.flows.iter().map(|f| f.mean_delay_s * f.delivered as f64).sum();
        weighted / delivered as f64
    }

    /// generated == delivered + dropped + stranded, per flow.
    pub fn conservation_holds(&self) -> bool {
        self.flows
            .iter()
            .all(|f| f.generated == f.delivered + f.dropped + f.stranded)
    }
}

/// Relative throughput gain of `value` over `baseline`; `None` marks a
/// zero baseline, where the ratio is undefined.
pub fn throughput_gain(value: f64, baseline: f64) -> Option<f64> {
    if baseline == 0.0 {
        None
    } else {
        Some((value - baseline) / baseline)
    }
}

/// Fixed-point-free decimal with six significant figures; integers render
/// exactly.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Column names of [`to_csv`], one row per (run, flow).
pub const CSV_HEADER: &str = "scheme,seed,flow_src,flow_dst,flow_num,generated,delivered,duplicates,throughput_bps,mean_delay_s,retransmissions,nacks,dropped,stranded,run_decoding_failures,run_undecodable_overhears,run_coding_opportunities,run_backup_firings,run_lost_acks,run_coded_sent,run_coded_intended,run_coded_backup_only,run_coded_timed_out,run_switch_activations,trace_hash";

/// Render runs as CSV, one row per flow with the run-level counters
/// repeated. Floats carry six significant figures.
pub fn to_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let undecodable: u64 = r.nodes.iter().map(|n| n.undecodable_overhears).sum();
        let opportunities: u64 = r.nodes.iter().map(|n| n.coding_opportunities).sum();
        for f in &r.flows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:016x}\n",
                r.scheme,
                r.seed,
                f.flow.src.0,
                f.flow.dst.0,
                f.flow.num,
                f.generated,
                f.delivered,
                f.duplicates,
                sig6(f.throughput_bps),
                sig6(f.mean_delay_s),
                f.retransmissions,
                f.nacks,
                f.dropped,
                f.stranded,
                r.total_decoding_failures(),
                undecodable,
                opportunities,
                r.total_backup_firings(),
                r.lost_acks,
                r.coded.sent,
                r.coded.intended,
                r.coded.backup_only,
                r.coded.timed_out_unheard,
                r.switch_activations.len(),
                r.trace_hash,
            ));
        }
    }
    out
}

/// Render runs as pretty JSON.
pub fn to_json(records: &[MetricsRecord]) -> String {
    serde_json::to_string_pretty(records).expect("metrics are always serializable")
}
