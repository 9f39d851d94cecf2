//! Certificates and the local verifier for the name-independent scheme.
//!
//! Verification runs the stretch-3 checks on landmarks and clusters (with
//! minimality deferred), three ball checks, and then seven checks on
//! landmark minimality, colors, directory ports, pointer minimality and
//! the fingerprints of the directories.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fingerprint::{encode_directory, BitString, FMatrix, HashFamily, TRIPLE_BITS};
use crate::graph::{NodeId, WeightedGraph};
use crate::ni::{DirTriple, NiParams, NiTable};
use crate::oracle::DistanceOracle;
use crate::params;
use crate::tz::TzTable;
use crate::tz_cert::{check_tz, check_witness, dist_by_id, entries_well_formed, same_keys, tz_prove_node, TzCertificate, TzRules};
use crate::verdict::{reject, verify_all, LocalView, Reason, Step, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiCertificate {
    /// Landmark distances and cluster entries `(d(v,t), l_t, d(t,l_t))`.
    pub tz: TzCertificate,
    pub ball_dist: BTreeMap<NodeId, u64>,
    pub family: Arc<HashFamily>,
    /// `F[i][c] = f_i(Dir_c)`.
    pub matrix: Arc<FMatrix>,
}

impl NiCertificate {
    pub fn entry_count(&self) -> usize {
        self.tz.entry_count() + self.ball_dist.len()
    }

    pub fn bits(&self) -> usize {
        self.tz.bits() + self.ball_dist.len() * 128 + self.family.bits() + self.matrix.bits()
    }
}

/// The directory each color is fingerprinted with: the one held by the
/// smallest-id non-landmark of that color, or by `favor` for its own color.
pub fn directories_from_tables(tables: &[NiTable], colors: u32, favor: Option<NodeId>) -> Vec<Vec<DirTriple>> {
    let mut dirs: Vec<Option<&Vec<DirTriple>>> = alloc::vec![None; colors as usize];
    let mut favored: Option<&NiTable> = None;
    for t in tables {
        if favor == Some(t.node()) {
            favored = Some(t);
        }
        if t.is_landmark() {
            continue;
        }
        let c = t.color();
        if (1..=colors).contains(&c) && dirs[c as usize - 1].is_none() {
            dirs[c as usize - 1] = Some(&t.dir);
        }
    }
    if let Some(t) = favored {
        let c = t.color();
        if (1..=colors).contains(&c) {
            dirs[c as usize - 1] = Some(&t.dir);
        }
    }
    dirs.into_iter().map(|d| d.cloned().unwrap_or_default()).collect()
}

/// A fresh family sized for `dirs`: `k = beta * ceil(log2 n)`, `r` the
/// longest encoding.
pub fn draw_family(n: usize, params: &NiParams, dirs: &[Vec<DirTriple>], seed: u64) -> HashFamily {
    let r = dirs.iter().map(Vec::len).max().unwrap_or(0) * TRIPLE_BITS;
    HashFamily::draw(params.hash_count(n), r, seed)
}

/// Certificate of one table under a given family and matrix.
pub fn ni_prove_node(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    table: &NiTable,
    family: Arc<HashFamily>,
    matrix: Arc<FMatrix>,
) -> NiCertificate {
    NiCertificate {
        tz: tz_prove_node(g, oracle, &table.tz),
        ball_dist: table.ball.keys().map(|&u| (u, dist_by_id(g, oracle, table.node(), u))).collect(),
        family,
        matrix,
    }
}

/// `F[i][c] = f_i(Dir_c)` for the given directories.
pub fn fingerprint_matrix(family: &HashFamily, dirs: &[Vec<DirTriple>]) -> FMatrix {
    let encodings: Vec<BitString> = dirs.iter().map(|d| encode_directory(d)).collect();
    FMatrix::compute(family, &encodings)
}

/// Certificates for `tables` using a given family and directories.
pub fn ni_prove_with(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    tables: &[NiTable],
    family: Arc<HashFamily>,
    dirs: &[Vec<DirTriple>],
) -> Vec<NiCertificate> {
    let matrix = Arc::new(fingerprint_matrix(&family, dirs));
    tables
        .iter()
        .map(|t| ni_prove_node(g, oracle, t, family.clone(), matrix.clone()))
        .collect()
}

/// Honest certificates; the family is drawn from `family_seed`.
pub fn ni_prove(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    tables: &[NiTable],
    params: &NiParams,
    family_seed: u64,
) -> Vec<NiCertificate> {
    let colors = params::color_count(g.n());
    let dirs = directories_from_tables(tables, colors, None);
    let family = Arc::new(draw_family(g.n(), params, &dirs, family_seed));
    ni_prove_with(g, oracle, tables, family, &dirs)
}

pub type NiView<'a> = LocalView<'a, NiTable, NiCertificate>;

pub fn ni_verify_node(view: &NiView<'_>, n: usize, params: &NiParams) -> Verdict {
    match check_ni(view, n, params) {
        Ok(()) => Verdict::Accept,
        Err(v) => v,
    }
}

pub fn ni_verify(g: &WeightedGraph, tables: &[NiTable], certs: &[NiCertificate], params: &NiParams) -> Vec<Verdict> {
    let n = g.n();
    verify_all(g, tables, certs, |view| ni_verify_node(view, n, params))
}

fn same_arc<T: PartialEq>(a: &Arc<T>, b: &Arc<T>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn own_triple(table: &NiTable) -> Option<&DirTriple> {
    table.dir_lookup(table.node())
}

pub fn check_ni(view: &NiView<'_>, n: usize, params: &NiParams) -> Result<(), Verdict> {
    let v = view.id;
    let table = view.table;
    let cert = view.cert;
    let deg = view.degree();

    // shape
    let malformed = || reject(Step::Tz(1), Reason::Malformed, None, None);
    let k = params.hash_count(n);
    let colors = params::color_count(n);
    if !entries_well_formed(&table.ball, v, deg)
        || !same_keys(&table.ball, &cert.ball_dist)
        || table.hash.colors != colors
        || table.hash.a & 1 == 0
        || !cert.family.is_well_formed()
        || cert.family.k() != k
        || !cert.matrix.is_well_formed()
        || cert.matrix.k != k
        || cert.matrix.colors != colors
        || !table.dir.windows(2).all(|w| w[0].node < w[1].node)
        || table.dir.iter().any(|d| d.port.0 == 0)
    {
        return Err(malformed());
    }

    // landmarks and clusters, minimality deferred
    let tz_view: LocalView<'_, TzTable, TzCertificate> = view.project(|t| &t.tz, |c| &c.tz);
    check_tz(&tz_view, n, TzRules::RELAXED)?;

    // ball 1: size and own entry
    if table.ball.len() != params.ball_size(n) {
        return Err(reject(Step::Ball(1), Reason::SizeBound, None, None));
    }
    match cert.ball_dist.get(&v) {
        None => return Err(reject(Step::Ball(1), Reason::SelfMissing, Some(v), None)),
        Some(&d) if d != 0 => return Err(reject(Step::Ball(1), Reason::SelfDistance, Some(v), None)),
        Some(_) => {}
    }

    // ball 2: distances and pointers
    for (&y, &ptr) in &table.ball {
        if y == v {
            continue;
        }
        let d = cert.ball_dist[&y];
        check_witness(view, d, ptr, false, |nb| {
            if nb.table.ball.contains_key(&y) {
                nb.cert.ball_dist.get(&y).copied()
            } else {
                None
            }
        })
        .map_err(|f| f.into_verdict(Step::Ball(2), y))?;
    }

    // ball 3: nothing outside the ball is closer than its farthest member
    let farthest = cert.ball_dist.iter().map(|(&y, &d)| (d, y)).max();
    for nb in &view.neighbors {
        for (&y, &dy) in &nb.cert.ball_dist {
            if table.ball.contains_key(&y) || !nb.table.ball.contains_key(&y) {
                continue;
            }
            let via = nb.weight.checked_add(dy);
            let closer = match (via, farthest) {
                (Some(via), Some(far)) => (via, y) < far,
                _ => false,
            };
            if closer {
                return Err(reject(Step::Ball(3), Reason::MissingMember, Some(y), Some(nb.id)));
            }
        }
    }

    // 1. nearest landmark has the smallest id among the closest
    let step = Step::Ni;
    let (lv, dv) = cert
        .tz
        .landmark_dist
        .iter()
        .map(|(&l, &d)| (d, l))
        .min()
        .map(|(d, l)| (l, d))
        .ok_or_else(|| reject(step(1), Reason::EmptyLandmarks, None, None))?;
    let is_landmark = table.is_landmark();
    if !is_landmark {
        let own = &cert.tz.cluster[&v];
        if own.landmark != lv {
            return Err(reject(step(1), Reason::NotNearestLandmark, Some(v), None));
        }
        if let Some(tr) = own_triple(table) {
            if tr.landmark != lv {
                return Err(reject(step(1), Reason::NotNearestLandmark, Some(v), None));
            }
        }
    }

    // 2. colors, rainbow ball, own directory
    for nb in &view.neighbors {
        if nb.table.hash != table.hash {
            return Err(reject(step(2), Reason::HashMismatch, None, Some(nb.id)));
        }
    }
    if table.tz.landmarks.len() < n {
        let mut seen = alloc::vec![false; colors as usize];
        for &y in table.ball.keys() {
            if !table.tz.landmarks.contains_key(&y) {
                seen[table.hash.color(y) as usize - 1] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(reject(step(2), Reason::NotRainbow, None, None));
        }
    }
    if table.dir.len() > params.class_bound(n) {
        return Err(reject(step(2), Reason::SizeBound, None, None));
    }
    if is_landmark {
        if let Some(d) = table.dir.first() {
            return Err(reject(step(2), Reason::LandmarkInDirectory, Some(d.node), None));
        }
    } else if own_triple(table).is_none() {
        return Err(reject(step(2), Reason::SelfMissing, Some(v), None));
    }
    let my_color = table.color();
    for d in &table.dir {
        if table.hash.color(d.node) != my_color {
            return Err(reject(step(2), Reason::WrongColor, Some(d.node), None));
        }
        if table.tz.landmarks.contains_key(&d.node) {
            return Err(reject(step(2), Reason::LandmarkInDirectory, Some(d.node), None));
        }
    }

    // 3. own directory port: the smallest port at l_v over shortest-path neighbors
    if !is_landmark {
        let mine = own_triple(table).expect("checked in step 2");
        let mut expected = None;
        for nb in &view.neighbors {
            let Some(&dn) = nb.cert.tz.landmark_dist.get(&lv) else { continue };
            if nb.weight.checked_add(dn) != Some(dv) {
                continue;
            }
            let p = if nb.id == lv {
                nb.back_port
            } else {
                match own_triple(nb.table) {
                    Some(tr) if tr.landmark == lv => tr.port,
                    _ => return Err(reject(step(3), Reason::DirectoryPort, Some(v), Some(nb.id))),
                }
            };
            expected = Some(expected.map_or(p, |e: crate::graph::Port| e.min(p)));
        }
        if expected != Some(mine.port) {
            return Err(reject(step(3), Reason::DirectoryPort, Some(v), None));
        }
    }

    // 4. every pointer is the smallest shortest-path port
    for (&l, &ptr) in &table.tz.landmarks {
        if l == v {
            continue;
        }
        let d = cert.tz.landmark_dist[&l];
        check_witness(view, d, ptr, true, |nb| nb.cert.tz.landmark_dist.get(&l).copied())
            .map_err(|f| f.into_verdict(step(4), l))?;
    }
    for (&y, &ptr) in &table.ball {
        if y == v {
            continue;
        }
        let d = cert.ball_dist[&y];
        check_witness(view, d, ptr, true, |nb| {
            if nb.table.ball.contains_key(&y) {
                nb.cert.ball_dist.get(&y).copied()
            } else {
                None
            }
        })
        .map_err(|f| f.into_verdict(step(4), y))?;
    }
    for (&t, &ptr) in &table.tz.cluster {
        if t == v {
            continue;
        }
        let d = cert.tz.cluster[&t].dist;
        check_witness(view, d, ptr, true, |nb| {
            if nb.table.tz.cluster.contains_key(&t) {
                nb.cert.tz.cluster.get(&t).map(|c| c.dist)
            } else {
                None
            }
        })
        .map_err(|f| f.into_verdict(step(4), t))?;
    }

    // 5. same fingerprint functions as the neighbors
    for nb in &view.neighbors {
        if !same_arc(&nb.cert.family, &cert.family) {
            return Err(reject(step(5), Reason::FamilyMismatch, None, Some(nb.id)));
        }
    }

    // 6. own directory matches its column of the matrix
    if !is_landmark {
        let enc = encode_directory(&table.dir);
        for i in 0..cert.family.k() {
            let Some(bit) = cert.family.eval(i, &enc) else {
                return Err(reject(step(6), Reason::FingerprintOverflow, None, None));
            };
            if Some(bit) != cert.matrix.get(i, my_color) {
                return Err(reject(step(6), Reason::FingerprintMismatch, None, None));
            }
        }
    }

    // 7. same matrix as the neighbors
    for nb in &view.neighbors {
        if !same_arc(&nb.cert.matrix, &cert.matrix) {
            return Err(reject(step(7), Reason::MatrixMismatch, None, Some(nb.id)));
        }
    }
    Ok(())
}
