//! Undirected, connected, integer-weighted graphs with port numbering.
//!
//! Nodes are kept sorted by identity, so the dense index of a node (its
//! position in [`WeightedGraph::ids`]) orders nodes exactly like their
//! identities do. Every algorithm in this crate relies on that.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

/// Identity of a node. Identities are distinct within a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Port number of an incident edge, in `1..=deg(v)` at its owning node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port(pub u32);

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected edge as given by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: u64,
}

impl Edge {
    pub fn new(a: u64, b: u64, weight: u64) -> Self {
        Edge {
            a: NodeId(a),
            b: NodeId(b),
            weight,
        }
    }
}

/// Explicit port assignment for the edge `{node, neighbor}` at `node`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortOverride {
    pub node: NodeId,
    pub neighbor: NodeId,
    pub port: Port,
}

/// One incident edge seen from its owning node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    /// Dense index of the other endpoint.
    pub neighbor: usize,
    pub weight: u64,
    /// Port of this edge at the owning node.
    pub port: Port,
    /// Port of this edge at the neighbor.
    pub back_port: Port,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    Empty,
    SelfLoop(NodeId),
    DuplicateEdge(NodeId, NodeId),
    NonPositiveWeight(NodeId, NodeId),
    UnknownNode(NodeId),
    Disconnected { reachable: usize, total: usize },
    PortNotBijective(NodeId),
    UnknownPortEdge(NodeId, NodeId),
}

impl GraphError {
    /// Stable machine-readable code, one per failure class.
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::Empty => "empty-graph",
            GraphError::SelfLoop(_) => "self-loop",
            GraphError::DuplicateEdge(..) => "duplicate-edge",
            GraphError::NonPositiveWeight(..) => "non-positive-weight",
            GraphError::UnknownNode(_) => "unknown-node",
            GraphError::Disconnected { .. } => "disconnected",
            GraphError::PortNotBijective(_) => "port-non-bijection",
            GraphError::UnknownPortEdge(..) => "unknown-port-edge",
        }
    }
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::Empty => write!(f, "graph has no nodes"),
            GraphError::SelfLoop(v) => write!(f, "self-loop at node {v}"),
            GraphError::DuplicateEdge(a, b) => write!(f, "edge {{{a}, {b}}} listed twice"),
            GraphError::NonPositiveWeight(a, b) => {
                write!(f, "edge {{{a}, {b}}} has a non-positive weight")
            }
            GraphError::UnknownNode(v) => write!(f, "node {v} is not part of the graph"),
            GraphError::Disconnected { reachable, total } => {
                write!(f, "graph is disconnected ({reachable} of {total} nodes reachable)")
            }
            GraphError::PortNotBijective(v) => {
                write!(f, "ports at node {v} are not a bijection onto 1..deg")
            }
            GraphError::UnknownPortEdge(a, b) => {
                write!(f, "port override for non-existent edge {{{a}, {b}}}")
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// A validated graph: connected, simple, positive weights, bijective ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    ids: Vec<NodeId>,
    /// Incidences of each node, sorted by port (`adj[v][p - 1].port == p`).
    adj: Vec<Vec<Incidence>>,
}

impl WeightedGraph {
    /// Builds and validates a graph. Nodes are the union of `nodes` and the
    /// edge endpoints. Edges without an override get the free ports of their
    /// endpoint in ascending neighbor-id order.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: &[Edge],
        overrides: &[PortOverride],
    ) -> Result<Self, GraphError> {
        let mut id_set: BTreeSet<NodeId> = nodes.into_iter().collect();
        for e in edges {
            id_set.insert(e.a);
            id_set.insert(e.b);
        }
        if id_set.is_empty() {
            return Err(GraphError::Empty);
        }
        let ids: Vec<NodeId> = id_set.into_iter().collect();
        let index = |id: NodeId| ids.binary_search(&id).map_err(|_| GraphError::UnknownNode(id));

        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        // neighbor lists keyed by neighbor index: (neighbor, weight)
        let mut raw: Vec<BTreeMap<usize, u64>> = alloc::vec![BTreeMap::new(); ids.len()];
        for e in edges {
            if e.a == e.b {
                return Err(GraphError::SelfLoop(e.a));
            }
            if e.weight == 0 {
                return Err(GraphError::NonPositiveWeight(e.a.min(e.b), e.a.max(e.b)));
            }
            let (a, b) = (index(e.a)?, index(e.b)?);
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(ids[key.0], ids[key.1]));
            }
            raw[a].insert(b, e.weight);
            raw[b].insert(a, e.weight);
        }

        let mut fixed: Vec<BTreeMap<usize, u32>> = alloc::vec![BTreeMap::new(); ids.len()];
        for o in overrides {
            let (v, u) = (index(o.node)?, index(o.neighbor)?);
            if !raw[v].contains_key(&u) {
                return Err(GraphError::UnknownPortEdge(o.node, o.neighbor));
            }
            fixed[v].insert(u, o.port.0);
        }

        // port assignment per node
        let mut ports: Vec<BTreeMap<usize, u32>> = Vec::with_capacity(ids.len());
        for v in 0..ids.len() {
            let deg = raw[v].len() as u32;
            let mut used = BTreeSet::new();
            for &p in fixed[v].values() {
                if p == 0 || p > deg || !used.insert(p) {
                    return Err(GraphError::PortNotBijective(ids[v]));
                }
            }
            let mut free = (1..=deg).filter(|p| !used.contains(p));
            let mut assigned = BTreeMap::new();
            for &u in raw[v].keys() {
                let p = match fixed[v].get(&u) {
                    Some(&p) => p,
                    None => free.next().ok_or(GraphError::PortNotBijective(ids[v]))?,
                };
                assigned.insert(u, p);
            }
            ports.push(assigned);
        }

        let mut adj: Vec<Vec<Incidence>> = Vec::with_capacity(ids.len());
        for v in 0..ids.len() {
            let mut list: Vec<Incidence> = raw[v]
                .iter()
                .map(|(&u, &w)| Incidence {
                    neighbor: u,
                    weight: w,
                    port: Port(ports[v][&u]),
                    back_port: Port(ports[u][&v]),
                })
                .collect();
            list.sort_by_key(|i| i.port);
            adj.push(list);
        }

        let g = WeightedGraph { ids, adj };
        let reachable = g.reachable_from(0);
        if reachable != g.n() {
            return Err(GraphError::Disconnected {
                reachable,
                total: g.n(),
            });
        }
        Ok(g)
    }

    fn reachable_from(&self, start: usize) -> usize {
        let mut seen = alloc::vec![false; self.n()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for inc in &self.adj[v] {
                if !seen[inc.neighbor] {
                    seen[inc.neighbor] = true;
                    count += 1;
                    queue.push_back(inc.neighbor);
                }
            }
        }
        count
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// All identities, ascending.
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, ix: usize) -> NodeId {
        self.ids[ix]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn degree(&self, ix: usize) -> usize {
        self.adj[ix].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Incident edges of `ix`, sorted by port.
    pub fn incident(&self, ix: usize) -> &[Incidence] {
        &self.adj[ix]
    }

    pub fn via_port(&self, ix: usize, port: Port) -> Option<&Incidence> {
        let p = port.0 as usize;
        if p == 0 {
            return None;
        }
        self.adj[ix].get(p - 1)
    }

    pub fn port_to(&self, ix: usize, neighbor: usize) -> Option<Port> {
        self.adj[ix]
            .iter()
            .find(|i| i.neighbor == neighbor)
            .map(|i| i.port)
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<u64> {
        self.adj[a].iter().find(|i| i.neighbor == b).map(|i| i.weight)
    }

    /// Edges in canonical order: sorted by (min id, max id).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (v, list) in self.adj.iter().enumerate() {
            for inc in list {
                if v < inc.neighbor {
                    out.push(Edge {
                        a: self.ids[v],
                        b: self.ids[inc.neighbor],
                        weight: inc.weight,
                    });
                }
            }
        }
        out.sort_by_key(|e| (e.a, e.b));
        out
    }

    /// Whether the ports at `ix` follow the canonical rule (ascending
    /// neighbor id gives ascending port).
    pub fn has_canonical_ports(&self, ix: usize) -> bool {
        let mut by_neighbor: Vec<&Incidence> = self.adj[ix].iter().collect();
        by_neighbor.sort_by_key(|i| i.neighbor);
        by_neighbor
            .iter()
            .enumerate()
            .all(|(k, i)| i.port.0 as usize == k + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn path3() -> WeightedGraph {
        WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 3, 1)], &[]).unwrap()
    }

    #[test]
    fn path_has_ports_one_and_two_at_middle() {
        let g = path3();
        let mid = g.index_of(NodeId(2)).unwrap();
        assert_eq!(g.degree(mid), 2);
        let ports: Vec<u32> = g.incident(mid).iter().map(|i| i.port.0).collect();
        assert_eq!(ports, vec![1, 2]);
        // ascending neighbor id => ascending port
        assert_eq!(g.port_to(mid, 0), Some(Port(1)));
        assert_eq!(g.port_to(mid, 2), Some(Port(2)));
    }

    #[test]
    fn single_node_is_valid() {
        let g = WeightedGraph::new([NodeId(7)], &[], &[]).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn rejects_each_invalid_input_with_its_own_code() {
        let dup = WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 1, 3)], &[]);
        assert_eq!(dup.unwrap_err().code(), "duplicate-edge");
        let zero = WeightedGraph::new([], &[Edge::new(1, 2, 0)], &[]);
        assert_eq!(zero.unwrap_err().code(), "non-positive-weight");
        let split = WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(3, 4, 1)], &[]);
        assert_eq!(split.unwrap_err().code(), "disconnected");
        let lonely = WeightedGraph::new([NodeId(9)], &[Edge::new(1, 2, 1)], &[]);
        assert_eq!(lonely.unwrap_err().code(), "disconnected");
        let clash = WeightedGraph::new(
            [],
            &[Edge::new(1, 2, 1), Edge::new(2, 3, 1)],
            &[
                PortOverride { node: NodeId(2), neighbor: NodeId(1), port: Port(1) },
                PortOverride { node: NodeId(2), neighbor: NodeId(3), port: Port(1) },
            ],
        );
        assert_eq!(clash.unwrap_err().code(), "port-non-bijection");
        let out_of_range = WeightedGraph::new(
            [],
            &[Edge::new(1, 2, 1)],
            &[PortOverride { node: NodeId(1), neighbor: NodeId(2), port: Port(2) }],
        );
        assert_eq!(out_of_range.unwrap_err().code(), "port-non-bijection");
        assert_eq!(WeightedGraph::new([], &[], &[]).unwrap_err().code(), "empty-graph");
        let lp = WeightedGraph::new([], &[Edge::new(1, 1, 1)], &[]);
        assert_eq!(lp.unwrap_err().code(), "self-loop");
    }

    #[test]
    fn overrides_fill_remaining_ports_in_neighbor_order() {
        let g = WeightedGraph::new(
            [],
            &[Edge::new(1, 2, 1), Edge::new(1, 3, 1), Edge::new(1, 4, 1)],
            &[PortOverride { node: NodeId(1), neighbor: NodeId(4), port: Port(1) }],
        )
        .unwrap();
        let hub = g.index_of(NodeId(1)).unwrap();
        assert_eq!(g.port_to(hub, g.index_of(NodeId(4)).unwrap()), Some(Port(1)));
        assert_eq!(g.port_to(hub, g.index_of(NodeId(2)).unwrap()), Some(Port(2)));
        assert_eq!(g.port_to(hub, g.index_of(NodeId(3)).unwrap()), Some(Port(3)));
        assert!(!g.has_canonical_ports(hub));
        let leaf = g.index_of(NodeId(4)).unwrap();
        assert_eq!(g.incident(leaf)[0].back_port, Port(1));
    }
}
