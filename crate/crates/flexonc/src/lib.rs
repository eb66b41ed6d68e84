//! Discrete-event simulator for multi-hop wireless mesh networks running
//! FlexONC-style joint cooperative forwarding and inter-flow network coding,
//! next to four baselines: plain unicast forwarding (NonCoding), COPE-like
//! coding on fixed routes, BEND-like coding with overhearing helpers, and a
//! simplified CORE with timer-arbitrated broadcast forwarding.
//!
//! The crate is a library first. Each major capability has a runnable
//! example; start there rather than with the API docs:
//!
//! | Example | What it shows |
//! |---|---|
//! | `basic_run` | run one bundled scenario with one scheme, print the metrics |
//! | `compare_schemes` | all five schemes side by side on the 8-node relay scenario |
//! | `ber_sweep` | sweep bit-error rates and tabulate throughput gain over the baselines |
//! | `switch_rule` | the 12-node coding-failure study: NACK-driven rule switching in action |
//! | `delivery_probability` | closed-form delivery probabilities vs Monte-Carlo, and the BEND/FlexONC gap |
//! | `coded_packet_fates` | who ends up forwarding coded packets as links degrade |
//! | `build_topologies` | bundled topologies, routing tables, eligible forwarder sets |
//! | `custom_scenario` | assemble a scenario in code, run it, check determinism |
//!
//! Run one with `cargo run --release --example compare_schemes`.
//!
//! There is also a thin CLI over the same machinery:
//! `flexonc run <scenario>`, `flexonc analyze`, `flexonc list-scenarios`.
//!
//! Simulation model in one paragraph: a single collision-free channel
//! serializes data frames; every data frame is a broadcast that each
//! neighbor receives independently with probability `(1-BER)^(8*len)`.
//! Coded frames are symbolic XORs (a set of packet ids); a receiver decodes
//! when it already holds all but one of the combined packets. Acknowledgment
//! slots follow each data frame inside a reserved window, ordered so that
//! intended forwarders answer first and eligible non-intended forwarders
//! answer in fixed ranks after them, which is what makes backup forwarding
//! duplicate-free when acknowledgments are not lost.

pub mod analysis;
pub mod coding;
pub mod metrics;
pub mod phy;
pub mod scheme;
pub mod topology;
pub mod types;

pub use types::{FlowId, NodeId, PacketId};
