//! Static topologies, shortest-path routing, and forwarder-set geometry.
//!
//! Nodes sit at fixed planar positions; two nodes are adjacent when their
//! distance is within transmission range. Grid builders place nodes on a
//! uniform lattice where the range covers horizontal, vertical and diagonal
//! neighbors (offsets of at most one cell on each axis) and nothing further.
//!
//! Routing is minimum-hop with lowest-node-index tie-breaking, computed once
//! at setup. Every node also carries replicas of its neighbors' forwarding
//! tables, which is what lets a node answer "where would my neighbor send
//! this packet next" without any protocol exchange.

use crate::types::NodeId;
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("topology needs at least one node")]
    Empty,
    #[error("topologies are limited to 64 nodes, got {0}")]
    TooManyNodes(usize),
    #[error("grid dimensions must be nonzero")]
    ZeroDimension,
    #[error("spacing and range must be positive")]
    BadGeometry,
}

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("no route from {from} to {to}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("{node} has no forwarding entry for destination {dest}")]
    NoEntry { node: NodeId, dest: NodeId },
    #[error("{node} is not a neighbor of {of}")]
    NotANeighbor { node: NodeId, of: NodeId },
    #[error("pinned route step {from}->{to} is not an adjacency")]
    PinNotAdjacent { from: NodeId, to: NodeId },
    #[error("pinned route for destination {dest} conflicts at {node}: {old} vs {new}")]
    PinConflict { node: NodeId, dest: NodeId, old: NodeId, new: NodeId },
    #[error("pinned route must have at least two nodes and end at the destination")]
    PinMalformed,
}

/// Immutable node placement and adjacency.
#[derive(Clone, Debug)]
pub struct Topology {
    positions: Vec<(f64, f64)>,
    range: f64,
    neighbors: Vec<Vec<NodeId>>,
}

impl Topology {
    /// Adjacency from positions: nodes within `range` of each other hear
    /// each other. Symmetric and irreflexive.
    pub fn from_positions(positions: Vec<(f64, f64)>, range: f64) -> Result<Self, TopologyError> {
        if positions.is_empty() {
            return Err(TopologyError::Empty);
        }
        if positions.len() > 64 {
            return Err(TopologyError::TooManyNodes(positions.len()));
        }
        if !(range > 0.0) {
            return Err(TopologyError::BadGeometry);
        }
        let n = positions.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dx = positions[i].0 - positions[j].0;
                let dy = positions[i].1 - positions[j].1;
                if (dx * dx + dy * dy).sqrt() <= range {
                    neighbors[i].push(NodeId(j as u16));
                }
            }
        }
        Ok(Topology { positions, range, neighbors })
    }

    /// `rows x cols` lattice with `spacing` meters between adjacent cells on
    /// each axis, numbered row-major from the bottom-left corner. The range
    /// is set so a node hears exactly the cells offset by at most one row
    /// and one column.
    pub fn build_grid(rows: usize, cols: usize, spacing: f64) -> Result<Self, TopologyError> {
        if rows == 0 || cols == 0 {
            return Err(TopologyError::ZeroDimension);
        }
        if !(spacing > 0.0) {
            return Err(TopologyError::BadGeometry);
        }
        let mut positions = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                positions.push((c as f64 * spacing, r as f64 * spacing));
            }
        }
        // Diagonal is spacing*sqrt(2) ~ 1.415*spacing; two cells straight is
        // 2*spacing. Anything in between covers exactly the 8-cell ring.
        Self::from_positions(positions, spacing * 1.5)
    }

    /// The two-row relay scenario: five nodes N0..N4 spaced 150 m along the
    /// bottom, three nodes N5..N7 above the gaps at columns 1..3. N1 hears
    /// N0, N2, N5, N6; the chain N0-N1-N2-N3-N4 is the only 4-hop route.
    pub fn eight_node() -> Self {
        let s = 150.0;
        let positions = vec![
            (0.0, 0.0),
            (s, 0.0),
            (2.0 * s, 0.0),
            (3.0 * s, 0.0),
            (4.0 * s, 0.0),
            (s, s),
            (2.0 * s, s),
            (3.0 * s, s),
        ];
        Topology::from_positions(positions, 250.0).expect("static layout")
    }

    /// 3x4 lattice, 150 m spacing, numbered row-major from the bottom-left:
    /// N0..N3 bottom, N4..N7 middle, N8..N11 top.
    pub fn twelve_node() -> Self {
        Topology::build_grid(3, 4, 150.0).expect("static layout")
    }

    /// Two crossing two-hop flows that share one relay. Sources and sinks
    /// hear the opposite flow's source but not their own peer:
    /// N0->N3 and N1->N4, both relayed by N2; N3 hears N1, N4 hears N0.
    pub fn x_topology() -> Self {
        let s = 150.0;
        let positions = vec![
            (0.0, s),       // N0: source of flow a
            (s, 2.0 * s),   // N1: source of flow b
            (s, s),         // N2: relay
            (2.0 * s, s),   // N3: sink of flow a
            (s, 0.0),       // N4: sink of flow b
        ];
        Topology::from_positions(positions, 250.0).expect("static layout")
    }

    /// Four sources around a hub, each sending to its diametric opposite
    /// through the center N2. Every node hears all others except its
    /// opposite, so the hub can combine up to four packets at once.
    pub fn cross_topology() -> Self {
        let s = 150.0;
        let positions = vec![
            (s, 2.0 * s),   // N0: north
            (0.0, s),       // N1: west
            (s, s),         // N2: hub
            (2.0 * s, s),   // N3: east
            (s, 0.0),       // N4: south
        ];
        Topology::from_positions(positions, 250.0).expect("static layout")
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count() as u16).map(NodeId)
    }

    pub fn position(&self, n: NodeId) -> (f64, f64) {
        self.positions[n.idx()]
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// Neighbors of `n` in ascending node-index order.
    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.neighbors[n.idx()]
    }

    pub fn are_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.neighbors[a.idx()].binary_search(&b).is_ok()
    }

    /// BFS hop counts from `from` to every node; `None` where unreachable.
    pub fn hop_distances(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        dist[from.idx()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.idx()].unwrap();
            for &v in self.neighbors(u) {
                if dist[v.idx()].is_none() {
                    dist[v.idx()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Next-hop entries of one node, keyed by destination.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardingTable {
    pub owner: NodeId,
    entries: BTreeMap<NodeId, NodeId>,
}

impl ForwardingTable {
    pub fn next_hop(&self, dest: NodeId) -> Option<NodeId> {
        self.entries.get(&dest).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.entries.iter().map(|(&d, &h)| (d, h))
    }
}

/// All forwarding tables of one run, plus the per-node neighbor replicas.
#[derive(Clone, Debug)]
pub struct Routing {
    tables: Vec<ForwardingTable>,
}

/// One node's routing knowledge: its own table and exact replicas of every
/// neighbor's table, populated consistently at setup.
#[derive(Clone, Debug)]
pub struct RoutingView {
    pub owner: NodeId,
    pub own: ForwardingTable,
    pub neighbor_tables: BTreeMap<NodeId, ForwardingTable>,
}

impl Routing {
    pub fn table(&self, node: NodeId) -> &ForwardingTable {
        &self.tables[node.idx()]
    }

    pub fn view(&self, topo: &Topology, node: NodeId) -> RoutingView {
        let neighbor_tables = topo
            .neighbors(node)
            .iter()
            .map(|&nb| (nb, self.tables[nb.idx()].clone()))
            .collect();
        RoutingView { owner: node, own: self.tables[node.idx()].clone(), neighbor_tables }
    }
}

/// Minimum-hop next hops toward every destination in `dests`, for every
/// node that can reach it. Among equally short next hops the lowest node
/// index wins, so routes are unique and reproducible.
pub fn compute_routes(topo: &Topology, dests: &[NodeId]) -> Routing {
    let mut tables: Vec<ForwardingTable> = topo
        .nodes()
        .map(|n| ForwardingTable { owner: n, entries: BTreeMap::new() })
        .collect();
    for &dest in dests {
        let dist = topo.hop_distances(dest);
        for node in topo.nodes() {
            if node == dest {
                continue;
            }
            let Some(dn) = dist[node.idx()] else { continue };
            // Neighbors are in ascending index order, so the first one
            // strictly closer to the destination is the tie-break winner.
            let hop = topo
                .neighbors(node)
                .iter()
                .copied()
                .find(|&v| dist[v.idx()] == Some(dn - 1));
            if let Some(h) = hop {
                tables[node.idx()].entries.insert(dest, h);
            }
        }
    }
    Routing { tables }
}

/// Overwrite the tables along an explicit path so traffic to `path.last()`
/// follows it. Steps must be adjacencies; conflicting pins are an error.
pub fn pin_route(routing: &mut Routing, topo: &Topology, path: &[NodeId]) -> Result<(), RoutingError> {
    if path.len() < 2 {
        return Err(RoutingError::PinMalformed);
    }
    let dest = *path.last().unwrap();
    for w in path.windows(2) {
        if !topo.are_adjacent(w[0], w[1]) {
            return Err(RoutingError::PinNotAdjacent { from: w[0], to: w[1] });
        }
    }
    // Validate before touching anything so a failed pin leaves no partial
    // edits. A path visiting the same node twice with different exits can
    // not be expressed as a forwarding table.
    let mut seen: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for w in path.windows(2) {
        let (node, hop) = (w[0], w[1]);
        if let Some(&prev) = seen.get(&node) {
            if prev != hop {
                return Err(RoutingError::PinConflict { node, dest, old: prev, new: hop });
            }
        }
        seen.insert(node, hop);
    }
    for (node, hop) in seen {
        routing.tables[node.idx()].entries.insert(dest, hop);
    }
    Ok(())
}

/// Where `intended` would forward a packet for `destination` next, answered
/// from the caller's replica of the neighbor's table. When `intended` is the
/// destination itself the packet is already home and the answer is the
/// destination, which is what final-hop helper checks need.
pub fn second_next_hop(
    view: &RoutingView,
    intended: NodeId,
    destination: NodeId,
) -> Result<NodeId, RoutingError> {
    if intended == destination {
        return Ok(destination);
    }
    let table = view
        .neighbor_tables
        .get(&intended)
        .ok_or(RoutingError::NotANeighbor { node: intended, of: view.owner })?;
    table
        .next_hop(destination)
        .ok_or(RoutingError::NoEntry { node: intended, dest: destination })
}

/// Non-intended forwarders able to take over for `partner_next_hop`: nodes
/// adjacent to the sender (they can hear the frame), adjacent to the
/// intended forwarder (they can hear its acknowledgment), and adjacent to
/// the hop after it (they can forward on its behalf). The sender and the
/// intended forwarder themselves are excluded.
pub fn eligible_forwarders(
    view: &RoutingView,
    topo: &Topology,
    sender: NodeId,
    partner_next_hop: NodeId,
    partner_destination: NodeId,
) -> Vec<NodeId> {
    let Ok(second) = second_next_hop(view, partner_next_hop, partner_destination) else {
        return Vec::new();
    };
    topo.neighbors(sender)
        .iter()
        .copied()
        .filter(|&n| {
            n != partner_next_hop
                && topo.are_adjacent(n, partner_next_hop)
                && topo.are_adjacent(n, second)
        })
        .collect()
}
