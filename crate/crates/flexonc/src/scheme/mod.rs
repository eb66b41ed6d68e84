//! The forwarding schemes a run can use, and their tuning knobs.

use crate::coding::SwitchParams;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub mod baselines;
pub mod flexonc;

/// Which forwarding/coding discipline every node runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Shortest-path store-and-forward with acknowledgments; no coding.
    #[serde(rename = "non-coding")]
    NonCoding,
    /// Inter-flow coding out of the forwarding queue only; overheard
    /// traffic feeds decoding buffers but is never forwarded for others.
    #[serde(rename = "cope")]
    Cope,
    /// Adds the helper queue: bystanders keep overheard natives and mix
    /// them into coded frames on their neighbors' behalf.
    #[serde(rename = "bend")]
    Bend,
    /// Opportunistic forwarding with coding-aware duty timers and no
    /// acknowledgments.
    #[serde(rename = "core")]
    Core,
    /// Helper mixing plus cooperative recovery of coded frames: eligible
    /// bystanders acknowledge and forward when the intended forwarder
    /// stays silent.
    #[serde(rename = "flexonc")]
    FlexOnc,
    /// FlexONC with the pairing-rule switch armed: nodes abandon the loose
    /// coding test for flows that keep collecting negative
    /// acknowledgments.
    #[serde(rename = "flexonc-sr")]
    FlexOncSwitchRule,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::NonCoding,
        SchemeKind::Cope,
        SchemeKind::Bend,
        SchemeKind::Core,
        SchemeKind::FlexOnc,
        SchemeKind::FlexOncSwitchRule,
    ];

    /// The set compared by default when no schemes are named.
    pub const DEFAULT_SET: [SchemeKind; 5] = [
        SchemeKind::NonCoding,
        SchemeKind::Cope,
        SchemeKind::Bend,
        SchemeKind::Core,
        SchemeKind::FlexOnc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::NonCoding => "non-coding",
            SchemeKind::Cope => "cope",
            SchemeKind::Bend => "bend",
            SchemeKind::Core => "core",
            SchemeKind::FlexOnc => "flexonc",
            SchemeKind::FlexOncSwitchRule => "flexonc-sr",
        }
    }

    /// Builds coded frames at all.
    pub fn codes(self) -> bool {
        !matches!(self, SchemeKind::NonCoding)
    }

    /// Keeps overheard natives to mix on neighbors' behalf.
    pub fn uses_helper_queue(self) -> bool {
        matches!(self, SchemeKind::Bend | SchemeKind::FlexOnc | SchemeKind::FlexOncSwitchRule)
    }

    /// Reserves backup slots and lets eligible bystanders take over
    /// unacknowledged coded partners.
    pub fn uses_backups(self) -> bool {
        matches!(self, SchemeKind::FlexOnc | SchemeKind::FlexOncSwitchRule)
    }

    /// Runs the acknowledgment / retransmission machinery.
    pub fn uses_acks(self) -> bool {
        !matches!(self, SchemeKind::Core)
    }

    /// Arms the pairing-rule switch.
    pub fn switch_rule(self) -> bool {
        matches!(self, SchemeKind::FlexOncSwitchRule)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("unknown scheme {0:?}; expected one of non-coding, cope, bend, core, flexonc, flexonc-sr")]
pub struct UnknownScheme(String);

impl FromStr for SchemeKind {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| UnknownScheme(s.to_string()))
    }
}

/// Protocol tuning shared by every node of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeParams {
    /// Retransmissions allowed per packet after its first transmission.
    pub max_retries: u32,
    /// Packets one coded frame may carry, including the head.
    pub max_coding_partners: usize,
    /// Seconds a decoding-buffer entry stays usable.
    pub buffer_retention_s: f64,
    /// Decoding-buffer entries per node.
    pub buffer_capacity: usize,
    /// Remembered acknowledged packet ids per node.
    pub ack_cache_size: usize,
    pub switch: SwitchParams,
    /// Base wait before an opportunistic forwarder fires its duty.
    pub core_base_duty_s: f64,
    /// Per-node-index stagger added to duty waits to break ties.
    pub core_tie_eps_s: f64,
    /// Hold-down between generating a packet and offering it to the
    /// channel under the opportunistic scheme.
    pub core_release_delay_s: f64,
    /// Queue prefix scanned for coding partners at transmit time under the
    /// opportunistic scheme.
    pub core_scan_depth: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            max_retries: 4,
            max_coding_partners: 4,
            buffer_retention_s: 2.0,
            buffer_capacity: 200,
            ack_cache_size: 256,
            switch: SwitchParams::default(),
            core_base_duty_s: 2.0e-3,
            core_tie_eps_s: 1.0e-4,
            core_release_delay_s: 5.0e-3,
            core_scan_depth: 8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.name().parse::<SchemeKind>(), Ok(kind));
            assert_eq!(kind.to_string(), kind.name());
        }
        assert_eq!("FLEXONC".parse::<SchemeKind>(), Ok(SchemeKind::FlexOnc));
        assert!("flexsonc".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn serde_names_match_display_names() {
        for kind in SchemeKind::ALL {
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
            assert_eq!(serde_json::from_str::<SchemeKind>(&json).unwrap(), kind);
        }
    }

    #[test]
    fn capability_table() {
        use SchemeKind::*;
        assert!(!NonCoding.codes());
        assert!(Cope.codes() && !Cope.uses_helper_queue() && !Cope.uses_backups());
        assert!(Bend.uses_helper_queue() && !Bend.uses_backups());
        assert!(FlexOnc.uses_helper_queue() && FlexOnc.uses_backups() && !FlexOnc.switch_rule());
        assert!(FlexOncSwitchRule.uses_backups() && FlexOncSwitchRule.switch_rule());
        assert!(!Core.uses_acks() && Core.codes());
        for k in SchemeKind::ALL {
            if k != Core {
                assert!(k.uses_acks());
            }
        }
    }
}
