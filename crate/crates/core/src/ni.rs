//! The name-independent scheme: landmarks and clusters as in [`crate::tz`],
//! plus vicinity balls, a color hash over identities and per-color
//! directories of `(v, l_v, next(l_v, v))` triples.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::color::ColorHash;
use crate::error::BuildError;
use crate::graph::{NodeId, Port, WeightedGraph};
use crate::oracle::DistanceOracle;
use crate::params;
use crate::sim::{Decision, ForwardError, RoutingScheme};
use crate::tz::{compute_bunch_cluster, sample_landmarks_with, tz_tables, LandmarkSet, TzTable};

/// Hash draws tried per landmark set before the landmarks are resampled.
pub const COLOR_ATTEMPTS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NiParams {
    /// Ball size is `min(n, ceil(ball_factor * ln n * sqrt n))`.
    pub ball_factor: f64,
    /// Color classes hold at most `color_balance * ceil(log2 n) * ceil(sqrt n)` nodes.
    pub color_balance: usize,
    /// The certificate carries `beta * ceil(log2 n)` fingerprint functions.
    pub beta: u32,
}

impl Default for NiParams {
    fn default() -> Self {
        NiParams {
            ball_factor: params::DEFAULT_BALL_FACTOR,
            color_balance: params::DEFAULT_COLOR_BALANCE,
            beta: params::DEFAULT_BETA,
        }
    }
}

impl NiParams {
    pub fn ball_size(&self, n: usize) -> usize {
        params::ball_size(n, self.ball_factor)
    }

    pub fn class_bound(&self, n: usize) -> usize {
        params::color_class_bound(n, self.color_balance)
    }

    pub fn hash_count(&self, n: usize) -> usize {
        params::hash_count(n, self.beta)
    }
}

/// `(v, l_v, next(l_v, v))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirTriple {
    pub node: NodeId,
    pub landmark: NodeId,
    pub port: Port,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiTable {
    /// Landmarks and cluster, exactly as in the stretch-3 scheme.
    pub tz: TzTable,
    /// Vicinity ball with next pointers; `None` on the node itself.
    pub ball: BTreeMap<NodeId, Option<Port>>,
    pub hash: ColorHash,
    /// Directory of the node's own color, sorted by node; empty at landmarks.
    pub dir: Vec<DirTriple>,
}

impl NiTable {
    pub fn node(&self) -> NodeId {
        self.tz.node
    }

    pub fn is_landmark(&self) -> bool {
        self.tz.is_landmark()
    }

    pub fn color(&self) -> u32 {
        self.hash.color(self.tz.node)
    }

    pub fn dir_lookup(&self, t: NodeId) -> Option<&DirTriple> {
        self.dir
            .binary_search_by_key(&t, |d| d.node)
            .ok()
            .map(|i| &self.dir[i])
    }

    pub fn entry_count(&self) -> usize {
        self.tz.entry_count() + self.ball.len() + self.dir.len()
    }

    pub fn bits(&self) -> usize {
        self.tz.bits() + self.ball.len() * (64 + 32) + ColorHash::BITS + self.dir.len() * crate::fingerprint::TRIPLE_BITS
    }

    /// Next pointer toward `t` if `t` is a landmark, cluster or ball member.
    pub fn direct(&self, t: NodeId) -> Option<Option<Port>> {
        self.tz
            .landmarks
            .get(&t)
            .or_else(|| self.tz.cluster.get(&t))
            .or_else(|| self.ball.get(&t))
            .copied()
    }

    /// Smallest-id non-landmark ball member with the color of `t`.
    pub fn witness_for(&self, t: NodeId) -> Option<NodeId> {
        let c = self.hash.color(t);
        self.ball
            .keys()
            .copied()
            .find(|&y| !self.tz.landmarks.contains_key(&y) && self.hash.color(y) == c)
    }
}

#[derive(Clone, Debug)]
pub struct NiScheme {
    pub params: NiParams,
    pub landmarks: LandmarkSet,
    pub bunches: Vec<Vec<usize>>,
    pub clusters: Vec<Vec<usize>>,
    /// Ball members of every node, ordered by `(distance, id)`.
    pub balls: Vec<Vec<usize>>,
    pub hash: ColorHash,
    /// `directories[c - 1]` is `Dir_c`, sorted by node.
    pub directories: Vec<Vec<DirTriple>>,
    pub tables: Vec<NiTable>,
    /// Landmark draws and hash draws used.
    pub landmark_draws: u32,
    pub hash_draws: u32,
}

/// The `size` nodes closest to every node, ties broken by id.
pub fn compute_balls(oracle: &DistanceOracle, size: usize) -> Vec<Vec<usize>> {
    let n = oracle.n();
    (0..n)
        .map(|v| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_unstable_by_key(|&u| (oracle.dist(v, u), u));
            order.truncate(size);
            order
        })
        .collect()
}

/// Class sizes within the balance bound and, when non-landmarks exist,
/// a non-landmark of every color in every ball.
pub fn coloring_ok(g: &WeightedGraph, ls: &LandmarkSet, balls: &[Vec<usize>], hash: &ColorHash, class_bound: usize) -> bool {
    let colors = hash.colors as usize;
    let mut class = alloc::vec![0usize; colors];
    let mut any = false;
    for v in 0..g.n() {
        if !ls.is_landmark[v] {
            any = true;
            class[hash.color(g.id(v)) as usize - 1] += 1;
        }
    }
    if class.iter().any(|&c| c > class_bound) {
        return false;
    }
    if !any {
        return true;
    }
    let mut seen = alloc::vec![false; colors];
    balls.iter().all(|ball| {
        seen.iter_mut().for_each(|s| *s = false);
        for &u in ball {
            if !ls.is_landmark[u] {
                seen[hash.color(g.id(u)) as usize - 1] = true;
            }
        }
        seen.iter().all(|&s| s)
    })
}

/// Builds the scheme. Landmarks come from the same random stream as
/// [`crate::tz::build_tz`] with this seed; when no hash draw colors them
/// validly within [`COLOR_ATTEMPTS`], the next landmark draw is used.
pub fn build_ni(g: &WeightedGraph, oracle: &DistanceOracle, params: NiParams, seed: u64) -> Result<NiScheme, BuildError> {
    let mut landmark_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut color_rng = color_stream(seed);
    let balls = compute_balls(oracle, params.ball_size(g.n()));
    let mut hash_draws = 0;
    for draw in 1..=params::LANDMARK_ROUNDS {
        let ls = sample_landmarks_with(oracle, &mut landmark_rng)?;
        if let Some(hash) = find_coloring(g, &ls, &balls, &params, &mut color_rng, COLOR_ATTEMPTS, &mut hash_draws) {
            let mut s = NiScheme::assemble(g, oracle, params, ls, balls, hash);
            s.landmark_draws = draw;
            s.hash_draws = hash_draws;
            return Ok(s);
        }
    }
    Err(BuildError::RetryLimitExceeded {
        stage: "color hash",
        attempts: hash_draws,
    })
}

/// Builds the scheme over a fixed landmark set, drawing only the color hash.
pub fn build_ni_with_landmarks(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    params: NiParams,
    ls: LandmarkSet,
    seed: u64,
) -> Result<NiScheme, BuildError> {
    let mut color_rng = color_stream(seed);
    let balls = compute_balls(oracle, params.ball_size(g.n()));
    let attempts = COLOR_ATTEMPTS * params::LANDMARK_ROUNDS;
    let mut hash_draws = 0;
    match find_coloring(g, &ls, &balls, &params, &mut color_rng, attempts, &mut hash_draws) {
        Some(hash) => {
            let mut s = NiScheme::assemble(g, oracle, params, ls, balls, hash);
            s.hash_draws = hash_draws;
            Ok(s)
        }
        None => Err(BuildError::RetryLimitExceeded { stage: "color hash", attempts }),
    }
}

fn color_stream(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn find_coloring(
    g: &WeightedGraph,
    ls: &LandmarkSet,
    balls: &[Vec<usize>],
    params: &NiParams,
    rng: &mut ChaCha8Rng,
    attempts: u32,
    draws: &mut u32,
) -> Option<ColorHash> {
    let n = g.n();
    let colors = params::color_count(n);
    let bound = params.class_bound(n);
    for _ in 0..attempts {
        *draws += 1;
        let hash = ColorHash::random(rng, colors);
        if coloring_ok(g, ls, balls, &hash, bound) {
            return Some(hash);
        }
    }
    None
}

impl NiScheme {
    /// Tables for fixed landmarks, balls and hash; no validity check on the coloring.
    pub fn assemble(
        g: &WeightedGraph,
        oracle: &DistanceOracle,
        params: NiParams,
        ls: LandmarkSet,
        balls: Vec<Vec<usize>>,
        hash: ColorHash,
    ) -> Self {
        let n = g.n();
        let (bunches, clusters) = compute_bunch_cluster(oracle, &ls);
        let tz = tz_tables(g, oracle, &ls, &clusters);
        let mut directories = alloc::vec![Vec::new(); hash.colors as usize];
        for t in 0..n {
            if ls.is_landmark[t] {
                continue;
            }
            let l = ls.nearest[t];
            let c = hash.color(g.id(t));
            directories[c as usize - 1].push(DirTriple {
                node: g.id(t),
                landmark: g.id(l),
                port: oracle.next_min(l, t).expect("non-landmark differs from its landmark"),
            });
        }
        let tables = tz
            .into_iter()
            .enumerate()
            .map(|(v, tz)| NiTable {
                tz,
                ball: balls[v].iter().map(|&u| (g.id(u), oracle.next_min(v, u))).collect(),
                hash,
                dir: if ls.is_landmark[v] {
                    Vec::new()
                } else {
                    directories[hash.color(g.id(v)) as usize - 1].clone()
                },
            })
            .collect();
        NiScheme {
            params,
            landmarks: ls,
            bunches,
            clusters,
            balls,
            hash,
            directories,
            tables,
            landmark_draws: 1,
            hash_draws: 1,
        }
    }

    pub fn max_entries(&self) -> usize {
        self.tables.iter().map(NiTable::entry_count).max().unwrap_or(0)
    }

    pub fn router(&self, handshake: bool) -> NiRouter<'_> {
        NiRouter { tables: &self.tables, handshake }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NiHeader {
    Target(NodeId),
    /// Heading to a ball member that holds the target's directory.
    ViaWitness { target: NodeId, witness: NodeId },
    /// Heading to the target's landmark, which leaves through `port`.
    ViaLandmark { target: NodeId, landmark: NodeId, port: Port },
}

impl NiHeader {
    pub fn target(&self) -> NodeId {
        match *self {
            NiHeader::Target(t) => t,
            NiHeader::ViaWitness { target, .. } => target,
            NiHeader::ViaLandmark { target, .. } => target,
        }
    }

    pub fn bits(&self) -> usize {
        2 + match self {
            NiHeader::Target(_) => 64,
            NiHeader::ViaWitness { .. } => 128,
            NiHeader::ViaLandmark { .. } => 160,
        }
    }

    pub const MAX_BITS: usize = 162;
}

fn toward(table: &NiTable, dest: NodeId, header: NiHeader) -> Result<Decision<NiHeader>, ForwardError> {
    match table.direct(dest) {
        Some(Some(p)) => Ok(Decision::Forward(p, header)),
        _ => Err(ForwardError::MissingEntry(dest)),
    }
}

fn via_directory(table: &NiTable, t: NodeId) -> Result<Decision<NiHeader>, ForwardError> {
    let d = table.dir_lookup(t).ok_or(ForwardError::DirMiss(t))?;
    let h = NiHeader::ViaLandmark { target: t, landmark: d.landmark, port: d.port };
    toward(table, d.landmark, h)
}

/// Forwarding rule at the node owning `table`. Targets the node knows
/// directly (landmarks, cluster, ball) are always served first.
pub fn ni_forward(table: &NiTable, header: &NiHeader) -> Result<Decision<NiHeader>, ForwardError> {
    let v = table.node();
    let t = header.target();
    if t == v {
        return Ok(Decision::Deliver);
    }
    if let Some(entry) = table.direct(t) {
        let p = entry.ok_or(ForwardError::MissingEntry(t))?;
        return Ok(Decision::Forward(p, *header));
    }
    match *header {
        NiHeader::ViaLandmark { landmark, port, .. } => {
            if v == landmark {
                Ok(Decision::Forward(port, *header))
            } else {
                toward(table, landmark, *header)
            }
        }
        NiHeader::ViaWitness { witness, .. } => {
            if v == witness {
                via_directory(table, t)
            } else {
                toward(table, witness, *header)
            }
        }
        NiHeader::Target(_) => {
            if !table.is_landmark() && table.hash.color(t) == table.color() {
                via_directory(table, t)
            } else {
                let w = table.witness_for(t).ok_or(ForwardError::NoWitness(t))?;
                toward(table, w, NiHeader::ViaWitness { target: t, witness: w })
            }
        }
    }
}

/// Routes over a set of tables, optionally handshaking at the source.
#[derive(Clone, Copy, Debug)]
pub struct NiRouter<'a> {
    pub tables: &'a [NiTable],
    pub handshake: bool,
}

impl NiRouter<'_> {
    fn table(&self, v: NodeId) -> Result<&NiTable, ForwardError> {
        self.tables
            .binary_search_by_key(&v, NiTable::node)
            .map(|i| &self.tables[i])
            .map_err(|_| ForwardError::UnknownNode(v))
    }

    /// The header a source obtains by querying its color witness for the
    /// target's landmark and port, when that query applies.
    pub fn handshake_header(&self, s: NodeId, t: NodeId) -> Result<NiHeader, ForwardError> {
        let ts = self.table(s)?;
        if s == t || ts.direct(t).is_some() || (!ts.is_landmark() && ts.hash.color(t) == ts.color()) {
            return Ok(NiHeader::Target(t));
        }
        let w = ts.witness_for(t).ok_or(ForwardError::NoWitness(t))?;
        let d = self.table(w)?.dir_lookup(t).ok_or(ForwardError::DirMiss(t))?;
        Ok(NiHeader::ViaLandmark { target: t, landmark: d.landmark, port: d.port })
    }
}

impl RoutingScheme for NiRouter<'_> {
    type Header = NiHeader;

    fn header_for(&self, s: NodeId, t: NodeId) -> Result<NiHeader, ForwardError> {
        if self.handshake {
            self.handshake_header(s, t)
        } else {
            Ok(NiHeader::Target(t))
        }
    }

    fn forward(&self, at: NodeId, header: &NiHeader) -> Result<Decision<NiHeader>, ForwardError> {
        ni_forward(self.table(at)?, header)
    }

    fn header_bits(&self, header: &NiHeader) -> usize {
        header.bits()
    }

    fn max_header_bits(&self) -> usize {
        NiHeader::MAX_BITS
    }
}
