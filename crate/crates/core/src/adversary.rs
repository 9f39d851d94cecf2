//! Tampering: single-field mutations of tables and certificates for each
//! scheme, and campaigns recording which node and check caught each one.
//!
//! A table mutation replaces one node's table. It is checked twice: once
//! against the honest certificates and once against certificates re-proved
//! from the tampered tables, the strongest consistent cheating prover.
//! Certificate mutations leave the tables honest. Only the closed
//! neighborhoods of nodes whose table or certificate changed are verified;
//! every other node sees exactly the honest inputs it already accepted.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fingerprint::HashFamily;
use crate::graph::{NodeId, Port, WeightedGraph};
use crate::hk::HkTable;
use crate::hk_cert::{check_hk, hk_prove_with, HkCertificate};
use crate::ni::{DirTriple, NiParams, NiScheme, NiTable};
use crate::ni_cert::{check_ni, draw_family, fingerprint_matrix, ni_prove_node, NiCertificate};
use crate::oracle::DistanceOracle;
use crate::tree::{TreeChild, TreeTable};
use crate::tz::TzTable;
use crate::tz_cert::{check_tz, tz_prove_node, TzCertificate, TzRules};
use crate::verdict::{LocalView, Reason, Step, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MutationKind {
    FlipPort,
    DropEntry,
    AddEntry,
    AlterDistance,
    AlterId,
    SwapDirTriple,
    SubstituteHashFamily,
}

impl MutationKind {
    pub const ALL: [MutationKind; 7] = [
        MutationKind::FlipPort,
        MutationKind::DropEntry,
        MutationKind::AddEntry,
        MutationKind::AlterDistance,
        MutationKind::AlterId,
        MutationKind::SwapDirTriple,
        MutationKind::SubstituteHashFamily,
    ];

    /// Kinds that change a single table field.
    pub const TABLE: [MutationKind; 4] =
        [MutationKind::FlipPort, MutationKind::DropEntry, MutationKind::AddEntry, MutationKind::AlterId];

    pub fn code(self) -> &'static str {
        match self {
            MutationKind::FlipPort => "flip-port",
            MutationKind::DropEntry => "drop-entry",
            MutationKind::AddEntry => "add-entry",
            MutationKind::AlterDistance => "alter-distance",
            MutationKind::AlterId => "alter-id",
            MutationKind::SwapDirTriple => "swap-dir-triple",
            MutationKind::SubstituteHashFamily => "substitute-hash-family",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        MutationKind::ALL.into_iter().find(|k| k.code() == code)
    }
}

/// A replacement for the honest table or certificate of `node`.
#[derive(Clone, Debug)]
pub struct Mutation<A> {
    pub node: usize,
    pub kind: MutationKind,
    /// Field path, such as `cluster[17].port`.
    pub path: String,
    pub artifact: A,
}

/// Which certificates accompany a campaign row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CertMode {
    /// Tampered table, honest certificates.
    Honest,
    /// Tampered table, certificates re-proved from the tampered tables.
    Reproved,
    /// Honest tables, one tampered certificate.
    Forged,
}

impl CertMode {
    pub fn code(self) -> &'static str {
        match self {
            CertMode::Honest => "honest",
            CertMode::Reproved => "reproved",
            CertMode::Forged => "forged",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        [CertMode::Honest, CertMode::Reproved, CertMode::Forged]
            .into_iter()
            .find(|m| m.code() == code)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Detection {
    pub node: NodeId,
    pub step: Step,
    pub reason: Reason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignRow {
    pub node: NodeId,
    pub kind: MutationKind,
    pub path: String,
    pub mode: CertMode,
    /// `None` is an escape.
    pub detected: Option<Detection>,
}

impl CampaignRow {
    pub fn escaped(&self) -> bool {
        self.detected.is_none()
    }
}

/// First rejection, by node index, among the closed neighborhoods of `changed`.
pub fn first_rejection<'a, T: 'a, C: 'a>(
    g: &WeightedGraph,
    changed: impl IntoIterator<Item = usize>,
    table_of: impl Fn(usize) -> &'a T + Copy,
    cert_of: impl Fn(usize) -> &'a C + Copy,
    check: impl Fn(&LocalView<'a, T, C>) -> Verdict,
) -> Option<Detection> {
    let mut scope = BTreeSet::new();
    for v in changed {
        scope.insert(v);
        scope.extend(g.incident(v).iter().map(|i| i.neighbor));
    }
    scope.into_iter().find_map(|ix| match check(&LocalView::with(g, ix, table_of, cert_of)) {
        Verdict::Accept => None,
        Verdict::Reject { step, witness } => Some(Detection { node: g.id(ix), step, reason: witness.reason }),
    })
}

/// Draws `count` mutations, giving up after `50 * count` failed attempts.
pub fn sample<A>(
    count: usize,
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Option<Mutation<A>>,
) -> Vec<Mutation<A>> {
    let mut out = Vec::with_capacity(count);
    let mut misses = 0;
    while out.len() < count && misses < 50 * count.max(1) {
        match draw(rng) {
            Some(m) => out.push(m),
            None => misses += 1,
        }
    }
    out
}

fn other_port(rng: &mut ChaCha8Rng, deg: usize, p: Port) -> Option<Port> {
    if deg < 2 {
        return None;
    }
    let mut q = rng.gen_range(1..deg as u32);
    if q >= p.0 {
        q += 1;
    }
    Some(Port(q))
}

fn random_port(rng: &mut ChaCha8Rng, deg: usize) -> Option<Port> {
    (deg >= 1).then(|| Port(rng.gen_range(1..=deg as u32)))
}

fn absent_id<V>(rng: &mut ChaCha8Rng, g: &WeightedGraph, map: &BTreeMap<NodeId, V>) -> Option<NodeId> {
    (0..16)
        .map(|_| g.id(rng.gen_range(0..g.n())))
        .find(|x| !map.contains_key(x))
}

fn pick_key<V>(rng: &mut ChaCha8Rng, map: &BTreeMap<NodeId, V>, except: Option<NodeId>) -> Option<NodeId> {
    let keys: Vec<NodeId> = map.keys().copied().filter(|&k| Some(k) != except).collect();
    keys.choose(rng).copied()
}

/// One mutation of a `member -> next pointer` map owned by `owner`.
fn mutate_port_map(
    rng: &mut ChaCha8Rng,
    g: &WeightedGraph,
    owner: usize,
    map: &mut BTreeMap<NodeId, Option<Port>>,
    kind: MutationKind,
    field: &str,
) -> Option<String> {
    let v = g.id(owner);
    let deg = g.degree(owner);
    match kind {
        MutationKind::FlipPort => {
            let key = pick_key(rng, map, Some(v))?;
            let old = map[&key]?;
            let new = other_port(rng, deg, old)?;
            map.insert(key, Some(new));
            Some(format!("{field}[{key}].port"))
        }
        MutationKind::DropEntry => {
            let key = pick_key(rng, map, None)?;
            map.remove(&key);
            Some(format!("{field}[{key}]"))
        }
        MutationKind::AddEntry => {
            let x = absent_id(rng, g, map)?;
            let port = if x == v { None } else { Some(random_port(rng, deg)?) };
            map.insert(x, port);
            Some(format!("{field}[{x}]"))
        }
        MutationKind::AlterId => {
            let key = pick_key(rng, map, Some(v))?;
            let x = absent_id(rng, g, map).filter(|&x| x != v)?;
            let port = map.remove(&key)?;
            map.insert(x, port);
            Some(format!("{field}[{key}].id"))
        }
        _ => None,
    }
}

fn table_kind(rng: &mut ChaCha8Rng) -> MutationKind {
    *MutationKind::TABLE.choose(rng).expect("nonempty")
}

/// One random single-field mutation of a stretch-3 table.
pub fn tz_table_mutation(g: &WeightedGraph, tables: &[TzTable], rng: &mut ChaCha8Rng) -> Option<Mutation<TzTable>> {
    let node = rng.gen_range(0..g.n());
    let kind = table_kind(rng);
    let mut t = tables[node].clone();
    let path = if rng.gen_bool(0.5) {
        mutate_port_map(rng, g, node, &mut t.landmarks, kind, "landmarks")?
    } else {
        mutate_port_map(rng, g, node, &mut t.cluster, kind, "cluster")?
    };
    (t != tables[node]).then_some(Mutation { node, kind, path, artifact: t })
}

fn port_map_edits(
    g: &WeightedGraph,
    owner: usize,
    map: &BTreeMap<NodeId, Option<Port>>,
    field: &str,
) -> Vec<(MutationKind, String, BTreeMap<NodeId, Option<Port>>)> {
    let v = g.id(owner);
    let deg = g.degree(owner) as u32;
    let mut out = Vec::new();
    for (&key, &port) in map {
        out.push((MutationKind::DropEntry, format!("{field}[{key}]"), {
            let mut m = map.clone();
            m.remove(&key);
            m
        }));
        let Some(old) = port else { continue };
        for q in (1..=deg).filter(|&q| q != old.0) {
            let mut m = map.clone();
            m.insert(key, Some(Port(q)));
            out.push((MutationKind::FlipPort, format!("{field}[{key}].port={q}"), m));
        }
        for &x in g.ids().iter().filter(|&&x| x != v && !map.contains_key(&x)) {
            let mut m = map.clone();
            m.remove(&key);
            m.insert(x, port);
            out.push((MutationKind::AlterId, format!("{field}[{key}].id={x}"), m));
        }
    }
    for &x in g.ids().iter().filter(|x| !map.contains_key(x)) {
        if x == v {
            let mut m = map.clone();
            m.insert(x, None);
            out.push((MutationKind::AddEntry, format!("{field}[{x}]"), m));
            continue;
        }
        for q in 1..=deg {
            let mut m = map.clone();
            m.insert(x, Some(Port(q)));
            out.push((MutationKind::AddEntry, format!("{field}[{x}].port={q}"), m));
        }
    }
    out
}

/// Every single-field mutation of every stretch-3 table. Meant for small graphs.
pub fn tz_all_table_mutations(g: &WeightedGraph, tables: &[TzTable]) -> Vec<Mutation<TzTable>> {
    let mut out = Vec::new();
    for (node, t) in tables.iter().enumerate() {
        for (kind, path, m) in port_map_edits(g, node, &t.landmarks, "landmarks") {
            out.push(Mutation { node, kind, path, artifact: TzTable { landmarks: m, ..t.clone() } });
        }
        for (kind, path, m) in port_map_edits(g, node, &t.cluster, "cluster") {
            out.push(Mutation { node, kind, path, artifact: TzTable { cluster: m, ..t.clone() } });
        }
    }
    out
}

fn bump(rng: &mut ChaCha8Rng, d: u64) -> u64 {
    if d == 0 || rng.gen_bool(0.5) {
        d.saturating_add(1)
    } else {
        d - 1
    }
}

fn bump_map(rng: &mut ChaCha8Rng, map: &mut BTreeMap<NodeId, u64>, field: &str) -> Option<String> {
    let key = pick_key(rng, map, None)?;
    let d = map[&key];
    map.insert(key, bump(rng, d));
    Some(format!("{field}[{key}]"))
}

fn tz_cert_bump(rng: &mut ChaCha8Rng, c: &mut TzCertificate, prefix: &str) -> Option<String> {
    match rng.gen_range(0..3) {
        0 => bump_map(rng, &mut c.landmark_dist, &format!("{prefix}landmark_dist")),
        which => {
            let key = pick_key(rng, &c.cluster, None)?;
            let e = c.cluster.get_mut(&key)?;
            if which == 1 {
                e.dist = bump(rng, e.dist);
                Some(format!("{prefix}cluster[{key}].dist"))
            } else {
                e.landmark_dist = bump(rng, e.landmark_dist);
                Some(format!("{prefix}cluster[{key}].landmark_dist"))
            }
        }
    }
}

/// One distance field of one stretch-3 certificate moved by one.
pub fn tz_cert_mutation(certs: &[TzCertificate], rng: &mut ChaCha8Rng) -> Option<Mutation<TzCertificate>> {
    let node = rng.gen_range(0..certs.len());
    let mut c = certs[node].clone();
    let path = tz_cert_bump(rng, &mut c, "")?;
    Some(Mutation { node, kind: MutationKind::AlterDistance, path, artifact: c })
}

fn tz_check(n: usize) -> impl Fn(&LocalView<'_, TzTable, TzCertificate>) -> Verdict {
    move |view| match check_tz(view, n, TzRules::STRICT) {
        Ok(()) => Verdict::Accept,
        Err(v) => v,
    }
}

/// Table mutations under honest and re-proved certificates (two rows
/// each), then certificate mutations.
pub fn tz_campaign(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    tables: &[TzTable],
    certs: &[TzCertificate],
    mutations: &[Mutation<TzTable>],
    forged: &[Mutation<TzCertificate>],
) -> Vec<CampaignRow> {
    let n = g.n();
    let mut rows = Vec::with_capacity(2 * mutations.len() + forged.len());
    for m in mutations {
        let table_of = |i: usize| if i == m.node { &m.artifact } else { &tables[i] };
        let detected = first_rejection(g, [m.node], table_of, |i| &certs[i], tz_check(n));
        rows.push(row(g, m, CertMode::Honest, detected));

        let cert = tz_prove_node(g, oracle, &m.artifact);
        let cert_of = |i: usize| if i == m.node { &cert } else { &certs[i] };
        let detected = first_rejection(g, [m.node], table_of, cert_of, tz_check(n));
        rows.push(row(g, m, CertMode::Reproved, detected));
    }
    for m in forged {
        let cert_of = |i: usize| if i == m.node { &m.artifact } else { &certs[i] };
        let detected = first_rejection(g, [m.node], |i| &tables[i], cert_of, tz_check(n));
        rows.push(row(g, m, CertMode::Forged, detected));
    }
    rows
}

fn row<A>(g: &WeightedGraph, m: &Mutation<A>, mode: CertMode, detected: Option<Detection>) -> CampaignRow {
    CampaignRow { node: g.id(m.node), kind: m.kind, path: m.path.clone(), mode, detected }
}

/// One random mutation of a name-independent table, outside the other
/// nodes' directory triples: landmarks, cluster, ball, or the node's own triple.
pub fn ni_table_mutation(g: &WeightedGraph, tables: &[NiTable], rng: &mut ChaCha8Rng) -> Option<Mutation<NiTable>> {
    let node = rng.gen_range(0..g.n());
    let kind = table_kind(rng);
    let mut t = tables[node].clone();
    let path = match rng.gen_range(0..4) {
        0 => mutate_port_map(rng, g, node, &mut t.tz.landmarks, kind, "landmarks")?,
        1 => mutate_port_map(rng, g, node, &mut t.tz.cluster, kind, "cluster")?,
        2 => mutate_port_map(rng, g, node, &mut t.ball, kind, "ball")?,
        _ => {
            let v = t.node();
            let i = t.dir.iter().position(|d| d.node == v)?;
            match kind {
                MutationKind::FlipPort => {
                    let old = t.dir[i].port;
                    t.dir[i].port = other_port(rng, g.max_degree(), old)?;
                }
                MutationKind::DropEntry => {
                    t.dir.remove(i);
                }
                MutationKind::AlterId => {
                    let l = pick_key(rng, &t.tz.landmarks, Some(t.dir[i].landmark))?;
                    t.dir[i].landmark = l;
                }
                _ => return None,
            }
            format!("dir[{v}]")
        }
    };
    (t != tables[node]).then_some(Mutation { node, kind, path, artifact: t })
}

/// One random change to another node's triple in a directory copy: drop,
/// port change, landmark change, or a swap of two triples' landmark and port.
pub fn ni_dir_mutation(g: &WeightedGraph, tables: &[NiTable], rng: &mut ChaCha8Rng) -> Option<Mutation<NiTable>> {
    let node = rng.gen_range(0..g.n());
    let mut t = tables[node].clone();
    let v = t.node();
    let others: Vec<usize> = (0..t.dir.len()).filter(|&i| t.dir[i].node != v).collect();
    let &i = others.choose(rng)?;
    let x = t.dir[i].node;
    let kind = *[
        MutationKind::DropEntry,
        MutationKind::FlipPort,
        MutationKind::AlterId,
        MutationKind::SwapDirTriple,
    ]
    .choose(rng)
    .expect("nonempty");
    let path = match kind {
        MutationKind::DropEntry => {
            t.dir.remove(i);
            format!("dir[{x}]")
        }
        MutationKind::FlipPort => {
            let old = t.dir[i].port;
            t.dir[i].port = other_port(rng, g.max_degree(), old)?;
            format!("dir[{x}].port")
        }
        MutationKind::AlterId => {
            t.dir[i].landmark = pick_key(rng, &t.tz.landmarks, Some(t.dir[i].landmark))?;
            format!("dir[{x}].landmark")
        }
        _ => {
            let &j = others.iter().filter(|&&j| j != i).copied().collect::<Vec<_>>().choose(rng)?;
            let (a, b) = (t.dir[i], t.dir[j]);
            t.dir[i] = DirTriple { node: a.node, ..b };
            t.dir[j] = DirTriple { node: b.node, ..a };
            format!("dir[{x}]<->dir[{}]", b.node)
        }
    };
    (t != tables[node]).then_some(Mutation { node, kind, path, artifact: t })
}

/// One distance field of one name-independent certificate moved by one.
pub fn ni_cert_mutation(certs: &[NiCertificate], rng: &mut ChaCha8Rng) -> Option<Mutation<NiCertificate>> {
    let node = rng.gen_range(0..certs.len());
    let mut c = certs[node].clone();
    let path = if rng.gen_bool(0.25) {
        bump_map(rng, &mut c.ball_dist, "ball_dist")?
    } else {
        tz_cert_bump(rng, &mut c.tz, "")?
    };
    Some(Mutation { node, kind: MutationKind::AlterDistance, path, artifact: c })
}

/// A fresh family at one node, with that node's matrix recomputed from the
/// honest directories under it.
pub fn ni_family_substitution(
    certs: &[NiCertificate],
    dirs: &[Vec<DirTriple>],
    node: usize,
    seed: u64,
) -> Mutation<NiCertificate> {
    let mut c = certs[node].clone();
    let family = HashFamily::draw(c.family.k(), c.family.r, seed);
    c.matrix = Arc::new(fingerprint_matrix(&family, dirs));
    c.family = Arc::new(family);
    Mutation {
        node,
        kind: MutationKind::SubstituteHashFamily,
        path: String::from("family"),
        artifact: c,
    }
}

fn ni_check(n: usize, params: NiParams) -> impl Fn(&LocalView<'_, NiTable, NiCertificate>) -> Verdict {
    move |view| match check_ni(view, n, &params) {
        Ok(()) => Verdict::Accept,
        Err(v) => v,
    }
}

/// Directories with the mutated node's copy standing for its color, when it fits the family.
fn favored_dirs(honest: &[Vec<DirTriple>], table: &NiTable, family: &HashFamily) -> Vec<Vec<DirTriple>> {
    let mut dirs = honest.to_vec();
    let c = table.color() as usize;
    let fits = table.dir.len() * crate::fingerprint::TRIPLE_BITS <= family.r;
    if !table.is_landmark() && fits && (1..=dirs.len()).contains(&c) {
        dirs[c - 1] = table.dir.clone();
    }
    dirs
}

/// Like [`tz_campaign`] for the name-independent scheme. Re-proved
/// certificates keep the family and fingerprint the mutated node's
/// directory copy for its color.
pub fn ni_campaign(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    scheme: &NiScheme,
    certs: &[NiCertificate],
    mutations: &[Mutation<NiTable>],
    forged: &[Mutation<NiCertificate>],
) -> Vec<CampaignRow> {
    let n = g.n();
    let tables = &scheme.tables;
    let check = || ni_check(n, scheme.params);
    let mut rows = Vec::new();
    for m in mutations {
        let table_of = |i: usize| if i == m.node { &m.artifact } else { &tables[i] };
        let detected = first_rejection(g, [m.node], table_of, |i| &certs[i], check());
        rows.push(row(g, m, CertMode::Honest, detected));

        let honest = &certs[m.node];
        let dirs = favored_dirs(&scheme.directories, &m.artifact, &honest.family);
        let matrix = Arc::new(fingerprint_matrix(&honest.family, &dirs));
        let detected = if *matrix == *honest.matrix {
            let cert = ni_prove_node(g, oracle, &m.artifact, honest.family.clone(), honest.matrix.clone());
            let cert_of = |i: usize| if i == m.node { &cert } else { &certs[i] };
            first_rejection(g, [m.node], table_of, cert_of, check())
        } else {
            let all: Vec<NiCertificate> = (0..n)
                .map(|i| {
                    if i == m.node {
                        ni_prove_node(g, oracle, &m.artifact, honest.family.clone(), matrix.clone())
                    } else {
                        NiCertificate { matrix: matrix.clone(), ..certs[i].clone() }
                    }
                })
                .collect();
            first_rejection(g, 0..n, table_of, |i| &all[i], check())
        };
        rows.push(row(g, m, CertMode::Reproved, detected));
    }
    for m in forged {
        let cert_of = |i: usize| if i == m.node { &m.artifact } else { &certs[i] };
        let detected = first_rejection(g, [m.node], |i| &tables[i], cert_of, check());
        rows.push(row(g, m, CertMode::Forged, detected));
    }
    rows
}

/// Escapes of one directory mutation over independent family draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirTrialRow {
    pub node: NodeId,
    pub kind: MutationKind,
    pub path: String,
    pub trials: u32,
    pub escapes: u32,
}

/// For every mutation and every family seed, honest certificates under that
/// family; a trial escapes when no node near the mutation rejects.
pub fn ni_dir_trials(
    g: &WeightedGraph,
    scheme: &NiScheme,
    certs: &[NiCertificate],
    mutations: &[Mutation<NiTable>],
    family_seeds: impl Iterator<Item = u64> + Clone,
) -> Vec<DirTrialRow> {
    let n = g.n();
    let tables = &scheme.tables;
    let params = scheme.params;
    mutations
        .iter()
        .map(|m| {
            let mut scope: Vec<usize> = alloc::vec![m.node];
            scope.extend(g.incident(m.node).iter().map(|i| i.neighbor));
            let mut trials = 0;
            let mut escapes = 0;
            for seed in family_seeds.clone() {
                let family = Arc::new(draw_family(n, &params, &scheme.directories, seed));
                let matrix = Arc::new(fingerprint_matrix(&family, &scheme.directories));
                let local: BTreeMap<usize, NiCertificate> = scope
                    .iter()
                    .map(|&i| {
                        let c = NiCertificate { family: family.clone(), matrix: matrix.clone(), ..certs[i].clone() };
                        (i, c)
                    })
                    .collect();
                let table_of = |i: usize| if i == m.node { &m.artifact } else { &tables[i] };
                let cert_of = |i: usize| local.get(&i).unwrap_or(&certs[i]);
                let detected = scope.iter().any(|&ix| {
                    let view = LocalView::with(g, ix, table_of, cert_of);
                    check_ni(&view, n, &params).is_err()
                });
                trials += 1;
                if !detected {
                    escapes += 1;
                }
            }
            DirTrialRow { node: g.id(m.node), kind: m.kind, path: m.path.clone(), trials, escapes }
        })
        .collect()
}

fn rename_tree(t: &mut HkTable, from: NodeId, to: NodeId) {
    let still_used = t.bunch.contains_key(&from) || t.levels.contains(&from);
    let template = if still_used { t.trees.get(&from).cloned() } else { t.trees.remove(&from) };
    if let Some(tt) = template {
        t.trees.entry(to).or_insert(TreeTable { root: to, ..tt });
    }
}

/// One random single-field mutation of a hierarchical table.
pub fn hk_table_mutation(g: &WeightedGraph, tables: &[HkTable], rng: &mut ChaCha8Rng) -> Option<Mutation<HkTable>> {
    let node = rng.gen_range(0..g.n());
    let kind = table_kind(rng);
    let mut t = tables[node].clone();
    let v = t.node;
    let deg = g.degree(node);
    let path = match (rng.gen_range(0..4), kind) {
        (0, _) => mutate_port_map(rng, g, node, &mut t.cluster, kind, "cluster")?,
        (1, MutationKind::DropEntry) => {
            let u = pick_key(rng, &t.bunch, Some(v))?;
            t.bunch.remove(&u);
            if !t.levels.contains(&u) {
                t.trees.remove(&u);
            }
            format!("bunch[{u}]")
        }
        (1, MutationKind::AddEntry) => {
            let u = absent_id(rng, g, &t.bunch)?;
            let level = rng.gen_range(0..t.k());
            t.bunch.insert(u, level);
            if u != v && !t.trees.contains_key(&u) {
                let label = rng.gen_range(0..g.n() as u32);
                let parent = Some(random_port(rng, deg)?);
                t.trees.insert(u, TreeTable { root: u, label, end: label + 1, parent, children: Vec::new() });
            }
            format!("bunch[{u}]")
        }
        (1, MutationKind::AlterId) => {
            let u = pick_key(rng, &t.bunch, Some(v))?;
            let x = absent_id(rng, g, &t.bunch).filter(|&x| x != v)?;
            let level = t.bunch.remove(&u)?;
            t.bunch.insert(x, level);
            rename_tree(&mut t, u, x);
            format!("bunch[{u}].id")
        }
        (1, _) => {
            let u = pick_key(rng, &t.bunch, None)?;
            let level = t.bunch[&u];
            let new = (level + rng.gen_range(1..t.k())) % t.k();
            t.bunch.insert(u, new);
            format!("bunch[{u}].level")
        }
        (2, MutationKind::AlterId) | (2, MutationKind::AddEntry) | (2, MutationKind::DropEntry) => {
            if t.k() < 2 {
                return None;
            }
            let i = rng.gen_range(1..t.k() as usize);
            let old = t.levels[i];
            let x = g.id(rng.gen_range(0..g.n()));
            if x == old {
                return None;
            }
            t.levels[i] = x;
            rename_tree(&mut t, old, x);
            if x == v {
                t.trees.insert(v, TreeTable { parent: None, label: 0, ..t.trees[&v].clone() });
            }
            format!("levels[{i}]")
        }
        _ => {
            let roots: Vec<NodeId> = t.trees.keys().copied().collect();
            let &w = roots.choose(rng)?;
            let tt = t.trees.get_mut(&w)?;
            if rng.gen_bool(0.5) || tt.children.is_empty() {
                let old = tt.parent?;
                tt.parent = Some(other_port(rng, deg, old)?);
                format!("trees[{w}].parent")
            } else {
                let j = rng.gen_range(0..tt.children.len());
                let old = tt.children[j].port;
                let new = other_port(rng, deg, old)?;
                if tt.children.iter().any(|c| c.port == new) {
                    return None;
                }
                tt.children[j] = TreeChild { port: new, ..tt.children[j] };
                tt.children.sort_unstable_by_key(|c| c.port);
                format!("trees[{w}].children[{j}].port")
            }
        }
    };
    let kind = if path.ends_with(".level") { MutationKind::AlterId } else { kind };
    (t != tables[node]).then_some(Mutation { node, kind, path, artifact: t })
}

/// One distance field of one hierarchical certificate moved by one.
pub fn hk_cert_mutation(certs: &[HkCertificate], rng: &mut ChaCha8Rng) -> Option<Mutation<HkCertificate>> {
    let node = rng.gen_range(0..certs.len());
    let mut c = certs[node].clone();
    let path = match rng.gen_range(0..4) {
        0 => {
            let i = rng.gen_range(0..c.level_dist.len());
            c.level_dist[i] = bump(rng, c.level_dist[i]);
            format!("level_dist[{i}]")
        }
        1 => bump_map(rng, &mut c.bunch_dist, "bunch_dist")?,
        which => {
            let key = pick_key(rng, &c.cluster, None)?;
            let e = c.cluster.get_mut(&key)?;
            if which == 2 {
                e.dist = bump(rng, e.dist);
                format!("cluster[{key}].dist")
            } else {
                e.bound = Some(bump(rng, e.bound?));
                format!("cluster[{key}].bound")
            }
        }
    };
    Some(Mutation { node, kind: MutationKind::AlterDistance, path, artifact: c })
}

fn hk_check(n: usize, k: u32) -> impl Fn(&LocalView<'_, HkTable, HkCertificate>) -> Verdict {
    move |view| match check_hk(view, n, k) {
        Ok(()) => Verdict::Accept,
        Err(v) => v,
    }
}

/// Like [`tz_campaign`] for the hierarchical scheme. Re-proving touches the
/// mutated node and every node listing it as a cluster member.
pub fn hk_campaign(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    k: u32,
    tables: &[HkTable],
    certs: &[HkCertificate],
    mutations: &[Mutation<HkTable>],
    forged: &[Mutation<HkCertificate>],
) -> Vec<CampaignRow> {
    let n = g.n();
    let mut rows = Vec::new();
    for m in mutations {
        let table_of = |i: usize| if i == m.node { &m.artifact } else { &tables[i] };
        let detected = first_rejection(g, [m.node], table_of, |i| &certs[i], hk_check(n, k));
        rows.push(row(g, m, CertMode::Honest, detected));

        let v = g.id(m.node);
        let mut reproved: BTreeMap<usize, HkCertificate> = BTreeMap::new();
        for i in 0..n {
            if i == m.node || tables[i].cluster.contains_key(&v) {
                let c = hk_prove_with(g, oracle, table_of(i), table_of);
                if c != certs[i] || i == m.node {
                    reproved.insert(i, c);
                }
            }
        }
        let cert_of = |i: usize| reproved.get(&i).unwrap_or(&certs[i]);
        let changed: Vec<usize> = reproved.keys().copied().collect();
        let detected = first_rejection(g, changed, table_of, cert_of, hk_check(n, k));
        rows.push(row(g, m, CertMode::Reproved, detected));
    }
    for m in forged {
        let cert_of = |i: usize| if i == m.node { &m.artifact } else { &certs[i] };
        let detected = first_rejection(g, [m.node], |i| &tables[i], cert_of, hk_check(n, k));
        rows.push(row(g, m, CertMode::Forged, detected));
    }
    rows
}

/// Seeded generator for campaigns.
pub fn campaign_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
