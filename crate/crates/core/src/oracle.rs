//! Exact all-pairs distances and the canonical next-hop rule.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::graph::{NodeId, Port, WeightedGraph};

pub const INFINITE: u64 = u64::MAX;

/// All-pairs shortest path distances, plus the smallest shortest-path port
/// for every ordered pair.
#[derive(Clone, Debug)]
pub struct DistanceOracle {
    n: usize,
    dist: Vec<u64>,
    /// `next[u * n + t]`: smallest port at `u` on a shortest `u`-`t` path;
    /// 0 on the diagonal.
    next: Vec<u32>,
}

impl DistanceOracle {
    /// One Dijkstra run per source.
    pub fn build(g: &WeightedGraph) -> Self {
        let n = g.n();
        let mut dist = alloc::vec![INFINITE; n * n];
        let mut heap = BinaryHeap::new();
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            heap.push(Reverse((0u64, s)));
            while let Some(Reverse((d, v))) = heap.pop() {
                if d > row[v] {
                    continue;
                }
                for inc in g.incident(v) {
                    let nd = d + inc.weight;
                    if nd < row[inc.neighbor] {
                        row[inc.neighbor] = nd;
                        heap.push(Reverse((nd, inc.neighbor)));
                    }
                }
            }
        }
        let mut next = alloc::vec![0u32; n * n];
        for u in 0..n {
            for t in 0..n {
                if u == t {
                    continue;
                }
                let target = dist[u * n + t];
                // incidences are sorted by port, so the first hit is minimal
                let port = g
                    .incident(u)
                    .iter()
                    .find(|i| i.weight + dist[i.neighbor * n + t] == target)
                    .map(|i| i.port.0)
                    .expect("connected graph has a shortest-path neighbor");
                next[u * n + t] = port;
            }
        }
        DistanceOracle { n, dist, next }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> u64 {
        self.dist[u * self.n + v]
    }

    pub fn dist_ids(&self, g: &WeightedGraph, u: NodeId, v: NodeId) -> Option<u64> {
        Some(self.dist(g.index_of(u)?, g.index_of(v)?))
    }

    /// Smallest port at `u` of an edge on a shortest `u`-`t` path, `None`
    /// when `u == t`.
    #[inline]
    pub fn next_min(&self, u: usize, t: usize) -> Option<Port> {
        if u == t {
            None
        } else {
            Some(Port(self.next[u * self.n + t]))
        }
    }

    /// Every port at `u` lying on some shortest `u`-`t` path, ascending.
    pub fn shortest_ports(&self, g: &WeightedGraph, u: usize, t: usize) -> Vec<Port> {
        if u == t {
            return Vec::new();
        }
        let target = self.dist(u, t);
        g.incident(u)
            .iter()
            .filter(|i| i.weight + self.dist(i.neighbor, t) == target)
            .map(|i| i.port)
            .collect()
    }

    /// Nodes on the canonical shortest path from `u` to `t` (following
    /// `next_min`), both endpoints included.
    pub fn canonical_path(&self, g: &WeightedGraph, u: usize, t: usize) -> Vec<usize> {
        let mut path = alloc::vec![u];
        let mut cur = u;
        while let Some(p) = self.next_min(cur, t) {
            cur = g.via_port(cur, p).expect("valid port").neighbor;
            path.push(cur);
        }
        path
    }

    /// The neighbor reached from `u` through `next_min(u, t)`.
    pub fn next_node(&self, g: &WeightedGraph, u: usize, t: usize) -> Option<usize> {
        self.next_min(u, t)
            .map(|p| g.via_port(u, p).expect("valid port").neighbor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn path_distances_and_next() {
        let g = WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 3, 1)], &[]).unwrap();
        let o = DistanceOracle::build(&g);
        assert_eq!(o.dist(0, 2), 2);
        assert_eq!(o.next_min(0, 2), g.port_to(0, 1));
        assert_eq!(o.next_min(1, 1), None);
        assert_eq!(o.canonical_path(&g, 0, 2), alloc::vec![0, 1, 2]);
    }

    #[test]
    fn min_rule_picks_the_smaller_of_two_shortest_ports() {
        // 1 has two shortest routes to 4: via 2 and via 3 (both length 2).
        // Force ports so that the route via 3 has port 2 and via 2 has port 5.
        use crate::graph::{NodeId, PortOverride};
        let edges = [
            Edge::new(1, 2, 1),
            Edge::new(1, 3, 1),
            Edge::new(2, 4, 1),
            Edge::new(3, 4, 1),
            Edge::new(1, 5, 9),
            Edge::new(1, 6, 9),
            Edge::new(1, 7, 9),
        ];
        let ov = |nb: u64, p: u32| PortOverride { node: NodeId(1), neighbor: NodeId(nb), port: Port(p) };
        let g = WeightedGraph::new([], &edges, &[ov(2, 5), ov(3, 2), ov(5, 1), ov(6, 3), ov(7, 4)])
            .unwrap();
        let o = DistanceOracle::build(&g);
        let (u, t) = (g.index_of(NodeId(1)).unwrap(), g.index_of(NodeId(4)).unwrap());
        assert_eq!(o.shortest_ports(&g, u, t), alloc::vec![Port(2), Port(5)]);
        assert_eq!(o.next_min(u, t), Some(Port(2)));
    }
}
