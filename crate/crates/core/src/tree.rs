//! Shortest-path trees with depth-first interval labels.
//!
//! A member's label is its preorder index; its subtree covers the labels
//! `label..end`. Children are visited in port order at the parent.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::graph::{NodeId, Port, WeightedGraph};
use crate::oracle::DistanceOracle;
use crate::sim::ForwardError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeChild {
    pub start: u32,
    pub end: u32,
    pub port: Port,
}

/// Routing state of one member of the tree rooted at `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeTable {
    pub root: NodeId,
    pub label: u32,
    pub end: u32,
    /// `None` at the root.
    pub parent: Option<Port>,
    /// Ascending by port, hence by interval.
    pub children: Vec<TreeChild>,
}

impl TreeTable {
    pub fn covers(&self, label: u32) -> bool {
        self.label <= label && label < self.end
    }

    pub fn bits(&self) -> usize {
        64 + 32 + 32 + 33 + self.children.len() * (32 + 32 + 32)
    }
}

/// Tables of the shortest-path tree toward `root` over `members` (dense
/// indices, including `root`). Each member's parent is its smallest-port
/// shortest-path neighbor toward the root, which must itself be a member.
///
/// # Panics
/// If the member set is not closed under parents.
pub fn build_tree(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    root: usize,
    members: &[usize],
) -> BTreeMap<usize, TreeTable> {
    let mut kids: BTreeMap<usize, Vec<(Port, usize)>> = BTreeMap::new();
    let mut parent_port: BTreeMap<usize, Option<Port>> = BTreeMap::new();
    for &v in members {
        parent_port.insert(v, oracle.next_min(v, root));
        kids.entry(v).or_default();
    }
    for &v in members {
        if v == root {
            continue;
        }
        let p = oracle.next_node(g, v, root).expect("non-root member has a parent");
        let port = g.port_to(p, v).expect("adjacent");
        kids.get_mut(&p).expect("member set closed under parents").push((port, v));
    }
    for list in kids.values_mut() {
        list.sort_unstable();
    }

    let mut label: BTreeMap<usize, u32> = BTreeMap::new();
    let mut end: BTreeMap<usize, u32> = BTreeMap::new();
    let mut next = 0u32;
    // (node, index of the next child to visit)
    let mut stack = alloc::vec![(root, 0usize)];
    label.insert(root, next);
    next += 1;
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        let list = &kids[&v];
        if *i < list.len() {
            let c = list[*i].1;
            *i += 1;
            label.insert(c, next);
            next += 1;
            stack.push((c, 0));
        } else {
            end.insert(v, next);
            stack.pop();
        }
    }

    let root_id = g.id(root);
    members
        .iter()
        .map(|&v| {
            let children = kids[&v]
                .iter()
                .map(|&(port, c)| TreeChild { start: label[&c], end: end[&c], port })
                .collect();
            let table = TreeTable {
                root: root_id,
                label: label[&v],
                end: end[&v],
                parent: parent_port[&v],
                children,
            };
            (v, table)
        })
        .collect()
}

/// Next port toward the member labelled `label`, or `None` on arrival.
pub fn tree_forward(table: &TreeTable, label: u32) -> Result<Option<Port>, ForwardError> {
    if label == table.label {
        return Ok(None);
    }
    if table.covers(label) {
        let i = table.children.partition_point(|c| c.end <= label);
        return match table.children.get(i) {
            Some(c) if c.start <= label => Ok(Some(c.port)),
            _ => Err(ForwardError::MalformedHeader),
        };
    }
    table.parent.map(Some).ok_or(ForwardError::MalformedHeader)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn route(g: &WeightedGraph, tables: &BTreeMap<usize, TreeTable>, from: usize, to: usize) -> u64 {
        let label = tables[&to].label;
        let mut at = from;
        let mut len = 0;
        while let Some(p) = tree_forward(&tables[&at], label).unwrap() {
            let inc = g.via_port(at, p).unwrap();
            len += inc.weight;
            at = inc.neighbor;
        }
        assert_eq!(at, to);
        len
    }

    #[test]
    fn path_rooted_at_an_end_is_linear() {
        let g = WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 3, 1), Edge::new(3, 4, 1)], &[]).unwrap();
        let o = DistanceOracle::build(&g);
        let t = build_tree(&g, &o, 0, &[0, 1, 2, 3]);
        assert_eq!((t[&0].label, t[&0].end), (0, 4));
        assert_eq!((t[&3].label, t[&3].end), (3, 4));
        assert_eq!(route(&g, &t, 3, 0), 3);
        assert_eq!(route(&g, &t, 0, 3), 3);
    }

    #[test]
    fn star_routes_in_one_or_two_hops() {
        let edges: Vec<Edge> = (2..=6).map(|i| Edge::new(1, i, 1)).collect();
        let g = WeightedGraph::new([], &edges, &[]).unwrap();
        let o = DistanceOracle::build(&g);
        let all: Vec<usize> = (0..6).collect();
        let t = build_tree(&g, &o, 0, &all);
        assert_eq!(t[&0].children.len(), 5);
        assert_eq!(route(&g, &t, 0, 4), 1);
        assert_eq!(route(&g, &t, 2, 5), 2);
    }

    #[test]
    fn labels_outside_the_tree_are_refused_at_the_root() {
        let g = WeightedGraph::new([], &[Edge::new(1, 2, 1)], &[]).unwrap();
        let o = DistanceOracle::build(&g);
        let t = build_tree(&g, &o, 0, &[0, 1]);
        assert_eq!(tree_forward(&t[&0], 7), Err(ForwardError::MalformedHeader));
        assert_eq!(tree_forward(&t[&1], 7), Ok(t[&1].parent));
    }
}
