//! The hierarchical scheme: a k-level landmark hierarchy, bunches and
//! clusters per level, shortest-path trees toward bunch members and
//! landmarks, and routing of stretch `4k - 5` (`2k - 1` with handshaking).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BuildError;
use crate::graph::{NodeId, Port, WeightedGraph};
use crate::oracle::{DistanceOracle, INFINITE};
use crate::params;
use crate::sim::{Decision, ForwardError, RoutingScheme};
use crate::tree::{build_tree, tree_forward, TreeTable};
use crate::tz::{nearest_in, sample_landmarks};

/// Sampling rounds tried before giving up on a hierarchy.
pub const HK_ROUNDS: u32 = 256;

/// `V = L_0 ⊇ L_1 ⊇ ... ⊇ L_{k-1}`, nonempty, with `L_k` empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LandmarkHierarchy {
    pub k: u32,
    /// `sets[i]` is `L_i`, ascending.
    pub sets: Vec<Vec<usize>>,
    /// Largest `i` with `v` in `L_i`.
    pub level: Vec<u32>,
    /// `nearest[i][v]` is `l_i(v)`, ties to the smallest id.
    pub nearest: Vec<Vec<usize>>,
    pub rounds: u32,
}

impl LandmarkHierarchy {
    /// From `L_1, ..., L_{k-1}`; `L_0` is every node.
    ///
    /// # Panics
    /// If `k < 2`, the sets are not nested, or the top set is empty.
    pub fn from_sets(oracle: &DistanceOracle, upper: Vec<Vec<usize>>) -> Self {
        let n = oracle.n();
        let k = upper.len() as u32 + 1;
        assert!(k >= 2, "hierarchy needs at least two levels");
        let mut sets: Vec<Vec<usize>> = alloc::vec![(0..n).collect()];
        for mut s in upper {
            s.sort_unstable();
            s.dedup();
            let below: BTreeSet<usize> = sets.last().unwrap().iter().copied().collect();
            assert!(s.iter().all(|v| below.contains(v)), "levels must be nested");
            sets.push(s);
        }
        assert!(!sets.last().unwrap().is_empty(), "top level must be nonempty");
        let mut level = alloc::vec![0u32; n];
        for (i, s) in sets.iter().enumerate() {
            for &v in s {
                level[v] = i as u32;
            }
        }
        let nearest = sets
            .iter()
            .map(|s| (0..n).map(|v| nearest_in(oracle, v, s)).collect())
            .collect();
        LandmarkHierarchy { k, sets, level, nearest, rounds: 1 }
    }

    pub fn top(&self) -> &[usize] {
        self.sets.last().expect("nonempty hierarchy")
    }

    /// `delta(v, l_i(v))`, infinite for `i >= k`.
    pub fn radius(&self, oracle: &DistanceOracle, v: usize, i: u32) -> u64 {
        if i >= self.k {
            INFINITE
        } else {
            oracle.dist(v, self.nearest[i as usize][v])
        }
    }
}

/// `bunch(v) = {u : d(v,u) < d(v, l_{level(u)+1}(v))}` and
/// `cluster(v) = {u : d(v,u) < d(u, l_{level(u)+1}(u))}`, both ascending.
/// Both contain `v` and the whole top level.
pub fn compute_hk_sets(oracle: &DistanceOracle, h: &LandmarkHierarchy) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = oracle.n();
    // radius[i][v] = d(v, l_i(v)) for i in 1..=k
    let radius: Vec<Vec<u64>> = (0..=h.k).map(|i| (0..n).map(|v| h.radius(oracle, v, i)).collect()).collect();
    let bunches = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| oracle.dist(v, u) < radius[h.level[u] as usize + 1][v])
                .collect()
        })
        .collect();
    let clusters = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| oracle.dist(v, u) < radius[h.level[u] as usize + 1][u])
                .collect()
        })
        .collect();
    (bunches, clusters)
}

fn non_top(set: &[usize], h: &LandmarkHierarchy) -> usize {
    set.iter().filter(|&&u| h.level[u] + 1 < h.k).count()
}

fn within_bounds(oracle: &DistanceOracle, h: &LandmarkHierarchy) -> bool {
    let n = oracle.n();
    if h.top().len() > params::hk_top_bound(n, h.k) {
        return false;
    }
    let (bunches, clusters) = compute_hk_sets(oracle, h);
    clusters
        .iter()
        .all(|c| params::hk_cluster_within_bound(non_top(c, h), n, h.k))
        && bunches
            .iter()
            .all(|b| non_top(b, h) <= params::hk_bunch_bound(n, h.k))
}

/// For `k = 2` the top level is drawn exactly as [`sample_landmarks`] draws
/// it. Otherwise each level keeps every node of the level below with
/// probability `n^(-1/k)`, and a draw is kept when the top level is
/// nonempty and within bound and all bunches and clusters are within bound.
pub fn build_hierarchy(oracle: &DistanceOracle, k: u32, seed: u64) -> Result<LandmarkHierarchy, BuildError> {
    if k < 2 {
        return Err(BuildError::InvalidDepth(k));
    }
    if k == 2 {
        let ls = sample_landmarks(oracle, seed)?;
        let mut h = LandmarkHierarchy::from_sets(oracle, alloc::vec![ls.members]);
        h.rounds = ls.rounds;
        return Ok(h);
    }
    let n = oracle.n();
    let p = libm::pow(n as f64, -1.0 / k as f64).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for round in 1..=HK_ROUNDS {
        let mut upper: Vec<Vec<usize>> = Vec::with_capacity(k as usize - 1);
        let mut cur: Vec<usize> = (0..n).collect();
        for _ in 1..k {
            cur.retain(|_| rng.gen_bool(p));
            upper.push(cur.clone());
        }
        if cur.is_empty() {
            continue;
        }
        let mut h = LandmarkHierarchy::from_sets(oracle, upper);
        h.rounds = round;
        if within_bounds(oracle, &h) {
            return Ok(h);
        }
    }
    Err(BuildError::RetryLimitExceeded { stage: "landmark hierarchy", attempts: HK_ROUNDS })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkTable {
    pub node: NodeId,
    /// `l_0(v), ..., l_{k-1}(v)`, with `l_0(v) = v`.
    pub levels: Vec<NodeId>,
    /// Bunch members and their levels.
    pub bunch: BTreeMap<NodeId, u32>,
    /// Cluster members with next pointers; `None` on the node itself.
    pub cluster: BTreeMap<NodeId, Option<Port>>,
    /// The node's tables in the trees rooted at its bunch members and at its `l_i(v)`.
    pub trees: BTreeMap<NodeId, TreeTable>,
}

impl HkTable {
    pub fn k(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Largest `i` with `l_i(v) = v`.
    pub fn level(&self) -> u32 {
        self.levels.iter().rposition(|&l| l == self.node).unwrap_or(0) as u32
    }

    /// Members of the top level, read from the bunch.
    pub fn top(&self) -> impl Iterator<Item = NodeId> + '_ {
        let top = self.k().saturating_sub(1);
        self.bunch.iter().filter(move |(_, &l)| l == top).map(|(&u, _)| u)
    }

    /// `name(v) = ((l_i(v), label of v in T(l_i(v))))_i`.
    pub fn name(&self) -> HkName {
        HkName {
            node: self.node,
            parts: self
                .levels
                .iter()
                .map(|l| (*l, self.trees.get(l).map_or(u32::MAX, |t| t.label)))
                .collect(),
        }
    }

    pub fn entry_count(&self) -> usize {
        self.levels.len()
            + self.bunch.len()
            + self.cluster.len()
            + self.trees.values().map(|t| 1 + t.children.len()).sum::<usize>()
    }

    pub fn bits(&self) -> usize {
        64 + self.levels.len() * 64
            + self.bunch.len() * (64 + 32)
            + self.cluster.len() * (64 + 33)
            + self.trees.values().map(TreeTable::bits).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HkName {
    pub node: NodeId,
    pub parts: Vec<(NodeId, u32)>,
}

impl HkName {
    pub fn bits(&self) -> usize {
        64 + self.parts.len() * (64 + 32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HkRoute {
    /// Along cluster pointers toward the target.
    Cluster,
    /// Within the tree of `root`, toward `label`.
    Tree { root: NodeId, label: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HkHeader {
    pub target: NodeId,
    pub route: HkRoute,
}

impl HkHeader {
    pub const BITS: usize = 64 + 1 + 64 + 32;
}

#[derive(Clone, Debug)]
pub struct HkScheme {
    pub hierarchy: LandmarkHierarchy,
    pub bunches: Vec<Vec<usize>>,
    pub clusters: Vec<Vec<usize>>,
    pub tables: Vec<HkTable>,
}

pub fn build_hk(g: &WeightedGraph, oracle: &DistanceOracle, k: u32, seed: u64) -> Result<HkScheme, BuildError> {
    let h = build_hierarchy(oracle, k, seed)?;
    Ok(HkScheme::from_hierarchy(g, oracle, h))
}

impl HkScheme {
    pub fn from_hierarchy(g: &WeightedGraph, oracle: &DistanceOracle, h: LandmarkHierarchy) -> Self {
        let n = g.n();
        let (bunches, clusters) = compute_hk_sets(oracle, &h);
        let mut tables: Vec<HkTable> = (0..n)
            .map(|v| HkTable {
                node: g.id(v),
                levels: h.nearest.iter().map(|l| g.id(l[v])).collect(),
                bunch: bunches[v].iter().map(|&u| (g.id(u), h.level[u])).collect(),
                cluster: clusters[v].iter().map(|&u| (g.id(u), oracle.next_min(v, u))).collect(),
                trees: BTreeMap::new(),
            })
            .collect();

        let mut members: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for v in 0..n {
            for &w in &bunches[v] {
                members.entry(w).or_default().insert(v);
            }
            for l in &h.nearest {
                members.entry(l[v]).or_default().insert(v);
            }
        }
        for (root, set) in members {
            let list: Vec<usize> = set.into_iter().collect();
            for (v, t) in build_tree(g, oracle, root, &list) {
                tables[v].trees.insert(g.id(root), t);
            }
        }
        HkScheme { hierarchy: h, bunches, clusters, tables }
    }

    pub fn k(&self) -> u32 {
        self.hierarchy.k
    }

    pub fn max_entries(&self) -> usize {
        self.tables.iter().map(HkTable::entry_count).max().unwrap_or(0)
    }

    pub fn router(&self, handshake: bool) -> HkRouter<'_> {
        HkRouter::new(&self.tables, handshake)
    }
}

fn first_in_bunch(parts: &[NodeId], table: &HkTable) -> Option<usize> {
    parts.iter().position(|l| table.bunch.contains_key(l))
}

/// Header chosen at the source. `target` is the target's table when the
/// source may handshake with it.
pub fn hk_source_header(source: &HkTable, name: &HkName, target: Option<&HkTable>) -> Result<HkHeader, ForwardError> {
    let t = name.node;
    let header = |route| Ok(HkHeader { target: t, route });
    if t == source.node || source.cluster.contains_key(&t) {
        return header(HkRoute::Cluster);
    }
    if source.bunch.contains_key(&t) || source.levels.contains(&t) {
        return header(HkRoute::Tree { root: t, label: 0 });
    }
    let landmarks: Vec<NodeId> = name.parts.iter().map(|p| p.0).collect();
    let i = first_in_bunch(&landmarks, source).ok_or(ForwardError::MalformedHeader)?;
    if let Some(tt) = target {
        if let Some(j) = first_in_bunch(&source.levels, tt) {
            if j < i {
                let root = source.levels[j];
                let label = tt.trees.get(&root).ok_or(ForwardError::MissingEntry(root))?.label;
                return header(HkRoute::Tree { root, label });
            }
        }
    }
    let (root, label) = name.parts[i];
    header(HkRoute::Tree { root, label })
}

pub fn hk_forward(table: &HkTable, header: &HkHeader) -> Result<Decision<HkHeader>, ForwardError> {
    if header.target == table.node {
        return Ok(Decision::Deliver);
    }
    match header.route {
        HkRoute::Cluster => match table.cluster.get(&header.target) {
            Some(Some(p)) => Ok(Decision::Forward(*p, *header)),
            _ => Err(ForwardError::MissingEntry(header.target)),
        },
        HkRoute::Tree { root, label } => {
            let tt = table.trees.get(&root).ok_or(ForwardError::MissingEntry(root))?;
            match tree_forward(tt, label)? {
                Some(p) => Ok(Decision::Forward(p, *header)),
                None => Ok(Decision::Deliver),
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct HkRouter<'a> {
    pub tables: &'a [HkTable],
    pub names: Vec<HkName>,
    pub handshake: bool,
}

impl<'a> HkRouter<'a> {
    /// Names are read from the tables.
    pub fn new(tables: &'a [HkTable], handshake: bool) -> Self {
        HkRouter { tables, names: tables.iter().map(HkTable::name).collect(), handshake }
    }

    fn index(&self, v: NodeId) -> Result<usize, ForwardError> {
        self.tables
            .binary_search_by_key(&v, |t| t.node)
            .map_err(|_| ForwardError::UnknownNode(v))
    }
}

impl RoutingScheme for HkRouter<'_> {
    type Header = HkHeader;

    fn header_for(&self, s: NodeId, t: NodeId) -> Result<HkHeader, ForwardError> {
        let si = self.index(s)?;
        let ti = self.index(t)?;
        let target = self.handshake.then(|| &self.tables[ti]);
        hk_source_header(&self.tables[si], &self.names[ti], target)
    }

    fn forward(&self, at: NodeId, header: &HkHeader) -> Result<Decision<HkHeader>, ForwardError> {
        hk_forward(&self.tables[self.index(at)?], header)
    }

    fn header_bits(&self, _header: &HkHeader) -> usize {
        HkHeader::BITS
    }

    fn max_header_bits(&self) -> usize {
        HkHeader::BITS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_graph, GenParams, GraphKind};
    use crate::sim::{measure_stretch, PairSelection};

    fn graph(n: usize, seed: u64) -> (WeightedGraph, DistanceOracle) {
        let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap();
        let o = DistanceOracle::build(&g);
        (g, o)
    }

    #[test]
    fn depth_below_two_is_refused() {
        let (_, o) = graph(8, 1);
        assert_eq!(build_hierarchy(&o, 1, 0), Err(BuildError::InvalidDepth(1)));
    }

    #[test]
    fn hierarchy_is_nested_and_top_is_in_every_bunch() {
        let (g, o) = graph(64, 3);
        let s = build_hk(&g, &o, 3, 5).unwrap();
        let h = &s.hierarchy;
        for w in h.sets.windows(2) {
            assert!(w[1].iter().all(|v| w[0].contains(v)));
        }
        for (v, b) in s.bunches.iter().enumerate() {
            assert!(b.contains(&v));
            assert!(h.top().iter().all(|l| b.contains(l)));
        }
    }

    #[test]
    fn routes_within_bounds_on_a_small_graph() {
        let (g, o) = graph(48, 6);
        for k in [2, 3, 4] {
            let s = build_hk(&g, &o, k, 2).unwrap();
            let plain = measure_stretch(&g, &o, &s.router(false), PairSelection::All);
            assert!(plain.all_delivered());
            assert!(plain.within(4 * k as u64 - 5, 1));
            let hs = measure_stretch(&g, &o, &s.router(true), PairSelection::All);
            assert!(hs.all_delivered());
            assert!(hs.within(2 * k as u64 - 1, 1));
        }
    }
}
