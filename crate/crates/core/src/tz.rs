//! The landmark/cluster stretch-3 routing scheme.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BuildError;
use crate::graph::{NodeId, Port, WeightedGraph};
use crate::oracle::DistanceOracle;
use crate::params;
use crate::sim::{Decision, ForwardError, RoutingScheme};

/// A landmark set with every node's nearest landmark. Indices are dense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LandmarkSet {
    /// Ascending.
    pub members: Vec<usize>,
    pub is_landmark: Vec<bool>,
    /// `nearest[v]`: closest landmark, ties to the smallest id.
    pub nearest: Vec<usize>,
    /// Sampling rounds used (1 for a set given directly).
    pub rounds: u32,
}

impl LandmarkSet {
    /// # Panics
    /// If `members` is empty.
    pub fn from_members(oracle: &DistanceOracle, members: impl IntoIterator<Item = usize>) -> Self {
        let n = oracle.n();
        let mut is_landmark = alloc::vec![false; n];
        for m in members {
            is_landmark[m] = true;
        }
        let members: Vec<usize> = (0..n).filter(|&v| is_landmark[v]).collect();
        assert!(!members.is_empty(), "landmark set must be nonempty");
        let nearest = (0..n).map(|v| nearest_in(oracle, v, &members)).collect();
        LandmarkSet { members, is_landmark, nearest, rounds: 1 }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `delta(v, l_v)`.
    pub fn radius(&self, oracle: &DistanceOracle, v: usize) -> u64 {
        oracle.dist(v, self.nearest[v])
    }
}

/// Closest member of `set` to `v`; ties go to the smallest index, which is
/// the smallest id.
pub fn nearest_in(oracle: &DistanceOracle, v: usize, set: &[usize]) -> usize {
    *set.iter()
        .min_by_key(|&&l| (oracle.dist(v, l), l))
        .expect("nonempty set")
}

/// `bunch(v) = {u : d(v,u) < d(v,l_v)}` and
/// `cluster(v) = {u : d(v,u) < d(u,l_u)}`, both ascending.
pub fn compute_bunch_cluster(oracle: &DistanceOracle, ls: &LandmarkSet) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = oracle.n();
    let radius: Vec<u64> = (0..n).map(|v| ls.radius(oracle, v)).collect();
    let bunches = (0..n)
        .map(|v| (0..n).filter(|&u| oracle.dist(v, u) < radius[v]).collect())
        .collect();
    let clusters = (0..n)
        .map(|v| (0..n).filter(|&u| oracle.dist(v, u) < radius[u]).collect())
        .collect();
    (bunches, clusters)
}

fn clusters_within_bound(oracle: &DistanceOracle, ls: &LandmarkSet) -> bool {
    let n = oracle.n();
    let radius: Vec<u64> = (0..n).map(|v| ls.radius(oracle, v)).collect();
    (0..n).all(|v| {
        let size = (0..n).filter(|&u| oracle.dist(v, u) < radius[u]).count();
        params::cluster_within_bound(size, n)
    })
}

/// Samples landmarks from `seed`; see [`sample_landmarks_with`].
pub fn sample_landmarks(oracle: &DistanceOracle, seed: u64) -> Result<LandmarkSet, BuildError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_landmarks_with(oracle, &mut rng)
}

/// Draws rounds from `rng`, each including every node independently with
/// probability `min(1, sqrt(n) ln n / n)`, until the set is nonempty, every
/// cluster is below `4 sqrt(n)` and `|L| <= 2 log n sqrt(n)`.
pub fn sample_landmarks_with(oracle: &DistanceOracle, rng: &mut ChaCha8Rng) -> Result<LandmarkSet, BuildError> {
    let n = oracle.n();
    let p = params::landmark_probability(n);
    let bound = params::landmark_bound(n);
    for round in 1..=params::LANDMARK_ROUNDS {
        let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
        if members.is_empty() || members.len() > bound {
            continue;
        }
        let mut ls = LandmarkSet::from_members(oracle, members);
        ls.rounds = round;
        if clusters_within_bound(oracle, &ls) {
            return Ok(ls);
        }
    }
    Err(BuildError::RetryLimitExceeded {
        stage: "landmark sampling",
        attempts: params::LANDMARK_ROUNDS,
    })
}

/// Routing table of one node. A `None` port marks the node's own entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TzTable {
    pub node: NodeId,
    pub landmarks: BTreeMap<NodeId, Option<Port>>,
    pub cluster: BTreeMap<NodeId, Option<Port>>,
}

impl TzTable {
    pub fn is_landmark(&self) -> bool {
        self.landmarks.contains_key(&self.node)
    }

    pub fn entry_count(&self) -> usize {
        self.landmarks.len() + self.cluster.len()
    }

    /// Identity plus one (id, port) pair per entry.
    pub fn bits(&self) -> usize {
        64 + self.entry_count() * (64 + 32)
    }
}

/// `(t, l_t, next(l_t, t))`; the port is `None` when `t` is a landmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TzName {
    pub node: NodeId,
    pub landmark: NodeId,
    pub port: Option<Port>,
}

impl TzName {
    pub const BITS: usize = 64 + 64 + 33;
}

#[derive(Clone, Debug)]
pub struct TzScheme {
    pub landmarks: LandmarkSet,
    pub bunches: Vec<Vec<usize>>,
    pub clusters: Vec<Vec<usize>>,
    pub tables: Vec<TzTable>,
    pub names: Vec<TzName>,
}

pub fn build_tz(g: &WeightedGraph, oracle: &DistanceOracle, seed: u64) -> Result<TzScheme, BuildError> {
    let ls = sample_landmarks(oracle, seed)?;
    Ok(TzScheme::from_landmarks(g, oracle, ls))
}

impl TzScheme {
    pub fn from_landmarks(g: &WeightedGraph, oracle: &DistanceOracle, ls: LandmarkSet) -> Self {
        let (bunches, clusters) = compute_bunch_cluster(oracle, &ls);
        let tables = tz_tables(g, oracle, &ls, &clusters);
        let names = (0..g.n())
            .map(|t| {
                let l = ls.nearest[t];
                TzName {
                    node: g.id(t),
                    landmark: g.id(l),
                    port: oracle.next_min(l, t),
                }
            })
            .collect();
        TzScheme { landmarks: ls, bunches, clusters, tables, names }
    }

    pub fn max_entries(&self) -> usize {
        self.tables.iter().map(TzTable::entry_count).max().unwrap_or(0)
    }

    pub fn router(&self) -> TzRouter<'_> {
        TzRouter { tables: &self.tables, names: &self.names }
    }
}

/// Tables holding exactly `L`, `cluster(v)` and the minimal next pointers.
pub fn tz_tables(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    ls: &LandmarkSet,
    clusters: &[Vec<usize>],
) -> Vec<TzTable> {
    (0..g.n())
        .map(|v| TzTable {
            node: g.id(v),
            landmarks: ls.members.iter().map(|&l| (g.id(l), oracle.next_min(v, l))).collect(),
            cluster: clusters[v].iter().map(|&t| (g.id(t), oracle.next_min(v, t))).collect(),
        })
        .collect()
}

/// Forwarding rule at the node owning `table`.
pub fn tz_forward(table: &TzTable, name: &TzName) -> Result<Decision<TzName>, ForwardError> {
    let v = table.node;
    let t = name.node;
    if t == v {
        return Ok(Decision::Deliver);
    }
    let direct = table.landmarks.get(&t).or_else(|| table.cluster.get(&t));
    if let Some(entry) = direct {
        let port = entry.ok_or(ForwardError::MissingEntry(t))?;
        return Ok(Decision::Forward(port, *name));
    }
    if v == name.landmark {
        let port = name.port.ok_or(ForwardError::MalformedHeader)?;
        return Ok(Decision::Forward(port, *name));
    }
    match table.landmarks.get(&name.landmark) {
        Some(Some(port)) => Ok(Decision::Forward(*port, *name)),
        _ => Err(ForwardError::MissingEntry(name.landmark)),
    }
}

/// Routes over any set of tables and names (possibly tampered ones).
#[derive(Clone, Copy, Debug)]
pub struct TzRouter<'a> {
    pub tables: &'a [TzTable],
    pub names: &'a [TzName],
}

impl RoutingScheme for TzRouter<'_> {
    type Header = TzName;

    fn header_for(&self, _s: NodeId, t: NodeId) -> Result<TzName, ForwardError> {
        self.names
            .binary_search_by_key(&t, |nm| nm.node)
            .map(|i| self.names[i])
            .map_err(|_| ForwardError::UnknownNode(t))
    }

    fn forward(&self, at: NodeId, header: &TzName) -> Result<Decision<TzName>, ForwardError> {
        let i = self
            .tables
            .binary_search_by_key(&at, |tb| tb.node)
            .map_err(|_| ForwardError::UnknownNode(at))?;
        tz_forward(&self.tables[i], header)
    }

    fn header_bits(&self, _header: &TzName) -> usize {
        TzName::BITS
    }

    fn max_header_bits(&self) -> usize {
        TzName::BITS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::sim::simulate;

    fn path3() -> WeightedGraph {
        WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 3, 1)], &[]).unwrap()
    }

    #[test]
    fn names_and_clusters_on_a_path_with_middle_landmark() {
        let g = path3();
        let o = DistanceOracle::build(&g);
        let tz = TzScheme::from_landmarks(&g, &o, LandmarkSet::from_members(&o, [1]));
        assert_eq!(
            tz.names[0],
            TzName { node: NodeId(1), landmark: NodeId(2), port: g.port_to(1, 0) }
        );
        assert_eq!(tz.names[1].port, None);
        // a non-landmark is its own cluster member, a landmark has none
        assert_eq!(tz.clusters[0], alloc::vec![0]);
        assert!(tz.clusters[1].is_empty());
        assert_eq!(tz.tables[0].cluster.get(&NodeId(1)), Some(&None));
        let tr = simulate(&g, &tz.router(), NodeId(1), NodeId(3), 9);
        assert!(tr.delivered());
        assert_eq!(tr.total_length, 2);
    }

    #[test]
    fn single_node() {
        let g = WeightedGraph::new([NodeId(5)], &[], &[]).unwrap();
        let o = DistanceOracle::build(&g);
        let tz = build_tz(&g, &o, 1).unwrap();
        assert_eq!(tz.landmarks.members, alloc::vec![0]);
        assert!(tz.clusters[0].is_empty());
        let tr = simulate(&g, &tz.router(), NodeId(5), NodeId(5), 1);
        assert!(tr.delivered());
    }

    #[test]
    fn forwarding_cases() {
        let mut table = TzTable {
            node: NodeId(4),
            landmarks: BTreeMap::from([(NodeId(1), Some(Port(2)))]),
            cluster: BTreeMap::from([(NodeId(4), None), (NodeId(9), Some(Port(3)))]),
        };
        let to = |t: u64, l: u64, p: Option<u32>| TzName { node: NodeId(t), landmark: NodeId(l), port: p.map(Port) };
        assert_eq!(tz_forward(&table, &to(4, 1, Some(1))), Ok(Decision::Deliver));
        assert!(matches!(tz_forward(&table, &to(9, 1, Some(1))), Ok(Decision::Forward(Port(3), _))));
        assert!(matches!(tz_forward(&table, &to(7, 1, Some(1))), Ok(Decision::Forward(Port(2), _))));
        assert_eq!(
            tz_forward(&table, &to(7, 8, Some(1))),
            Err(ForwardError::MissingEntry(NodeId(8)))
        );
        table.node = NodeId(1);
        table.landmarks.insert(NodeId(1), None);
        assert!(matches!(tz_forward(&table, &to(7, 1, Some(5))), Ok(Decision::Forward(Port(5), _))));
    }
}
