//! Certificates and the local verifier for the hierarchical scheme.
//!
//! Five checks: own levels and sizes, the top level shared by all
//! neighbors, nearest landmarks per level, bunches, and clusters. Between
//! the bunch and cluster checks every tree table is checked against the
//! neighbors: root, parent pointer, children and intervals.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::graph::{NodeId, WeightedGraph};
use crate::hk::HkTable;
use crate::oracle::DistanceOracle;
use crate::params;
use crate::tz_cert::{check_witness, dist_by_id, entries_well_formed, port_in_range, same_keys};
use crate::verdict::{reject, verify_all, LocalView, Reason, Step, Verdict};

/// `d(v,u)` for a cluster member `u`, and `d(u, l_{level(u)+1}(u))`
/// (`None` for the top level).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HkClusterCert {
    pub dist: u64,
    pub bound: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkCertificate {
    pub node: NodeId,
    /// `d(v, l_i(v))` per level.
    pub level_dist: Vec<u64>,
    pub bunch_dist: BTreeMap<NodeId, u64>,
    pub cluster: BTreeMap<NodeId, HkClusterCert>,
}

impl HkCertificate {
    pub fn entry_count(&self) -> usize {
        self.level_dist.len() + self.bunch_dist.len() + self.cluster.len()
    }

    pub fn bits(&self) -> usize {
        64 + self.level_dist.len() * 64 + self.bunch_dist.len() * 128 + self.cluster.len() * (64 + 64 + 65)
    }
}

/// Certificate of `tables[ix]`. Cluster bounds are read from the members'
/// own tables, so tampered tables yield the re-proved certificates.
pub fn hk_prove_node(g: &WeightedGraph, oracle: &DistanceOracle, tables: &[HkTable], ix: usize) -> HkCertificate {
    hk_prove_with(g, oracle, &tables[ix], |i| &tables[i])
}

/// Certificate of `table`, with other nodes' tables read through `table_of`.
pub fn hk_prove_with<'a>(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    table: &HkTable,
    table_of: impl Fn(usize) -> &'a HkTable,
) -> HkCertificate {
    let v = table.node;
    let bound = |u: NodeId| -> Option<u64> {
        let ut = table_of(g.index_of(u)?);
        let l = ut.levels.get(ut.level() as usize + 1)?;
        Some(dist_by_id(g, oracle, u, *l))
    };
    HkCertificate {
        node: v,
        level_dist: table.levels.iter().map(|&l| dist_by_id(g, oracle, v, l)).collect(),
        bunch_dist: table.bunch.keys().map(|&u| (u, dist_by_id(g, oracle, v, u))).collect(),
        cluster: table
            .cluster
            .keys()
            .map(|&u| (u, HkClusterCert { dist: dist_by_id(g, oracle, v, u), bound: bound(u) }))
            .collect(),
    }
}

pub fn hk_prove(g: &WeightedGraph, oracle: &DistanceOracle, tables: &[HkTable]) -> Vec<HkCertificate> {
    (0..tables.len()).map(|ix| hk_prove_node(g, oracle, tables, ix)).collect()
}

pub type HkView<'a> = LocalView<'a, HkTable, HkCertificate>;

pub fn hk_verify_node(view: &HkView<'_>, n: usize, k: u32) -> Verdict {
    match check_hk(view, n, k) {
        Ok(()) => Verdict::Accept,
        Err(v) => v,
    }
}

pub fn hk_verify(g: &WeightedGraph, tables: &[HkTable], certs: &[HkCertificate], k: u32) -> Vec<Verdict> {
    let n = g.n();
    verify_all(g, tables, certs, |view| hk_verify_node(view, n, k))
}

/// Claimed distance from the owner to the root of one of its trees.
fn root_dist(table: &HkTable, cert: &HkCertificate, root: NodeId) -> Option<u64> {
    if let Some(&d) = cert.bunch_dist.get(&root) {
        return Some(d);
    }
    let i = table.levels.iter().position(|&l| l == root)?;
    cert.level_dist.get(i).copied()
}

fn radius(cert: &HkCertificate, level: u32) -> Option<u64> {
    cert.level_dist.get(level as usize + 1).copied()
}

fn well_formed(view: &HkView<'_>, k: u32) -> bool {
    let v = view.id;
    let t = view.table;
    let c = view.cert;
    let deg = view.degree();
    if t.node != v || c.node != v || t.levels.len() != k as usize || c.level_dist.len() != k as usize {
        return false;
    }
    if !entries_well_formed(&t.cluster, v, deg)
        || !same_keys(&t.cluster, &c.cluster)
        || !same_keys(&t.bunch, &c.bunch_dist)
        || t.bunch.values().any(|&l| l >= k)
    {
        return false;
    }
    let roots: BTreeSet<NodeId> = t.bunch.keys().chain(t.levels.iter()).copied().collect();
    if !roots.iter().eq(t.trees.keys()) {
        return false;
    }
    t.trees.iter().all(|(&w, tt)| {
        tt.root == w
            && tt.parent.is_none() == (w == v)
            && port_in_range(tt.parent, deg)
            && tt.children.iter().all(|ch| port_in_range(Some(ch.port), deg))
            && tt.children.windows(2).all(|p| p[0].port < p[1].port)
    })
}

pub fn check_hk(view: &HkView<'_>, n: usize, k: u32) -> Result<(), Verdict> {
    let v = view.id;
    let table = view.table;
    let cert = view.cert;

    if k < 2 || !well_formed(view, k) {
        return Err(reject(Step::Hk(1), Reason::Malformed, None, None));
    }

    // 1. own levels and sizes
    let step = Step::Hk;
    if table.levels[0] != v {
        return Err(reject(step(1), Reason::LevelMismatch, Some(table.levels[0]), None));
    }
    for i in 1..table.levels.len() {
        if table.levels[i] == v && table.levels[i - 1] != v {
            return Err(reject(step(1), Reason::Nesting, Some(v), None));
        }
    }
    let level = table.level();
    match table.bunch.get(&v) {
        None => return Err(reject(step(1), Reason::SelfMissing, Some(v), None)),
        Some(&l) if l != level => return Err(reject(step(1), Reason::LevelMismatch, Some(v), None)),
        Some(_) => {}
    }
    if cert.bunch_dist[&v] != 0 {
        return Err(reject(step(1), Reason::SelfDistance, Some(v), None));
    }
    let top: Vec<NodeId> = table.top().collect();
    if top.is_empty() {
        return Err(reject(step(1), Reason::EmptyLandmarks, None, None));
    }
    let outside_top = |u: &NodeId| top.binary_search(u).is_err();
    let cluster_size = table.cluster.keys().filter(|u| outside_top(u)).count();
    if top.len() > params::hk_top_bound(n, k)
        || table.bunch.len() - top.len() > params::hk_bunch_bound(n, k)
        || !params::hk_cluster_within_bound(cluster_size, n, k)
    {
        return Err(reject(step(1), Reason::SizeBound, None, None));
    }

    // 2. same top level as every neighbor
    for nb in &view.neighbors {
        if !nb.table.top().eq(top.iter().copied()) {
            return Err(reject(step(2), Reason::LandmarkSetMismatch, None, Some(nb.id)));
        }
    }

    // 3. nearest landmark per level: itself, or the best offer of a neighbor
    for (i, &l) in table.levels.iter().enumerate() {
        let d = cert.level_dist[i];
        if l == v {
            if d != 0 {
                return Err(reject(step(3), Reason::SelfDistance, Some(l), None));
            }
            continue;
        }
        let best = view
            .neighbors
            .iter()
            .filter_map(|nb| {
                let dn = nb.weight.checked_add(*nb.cert.level_dist.get(i)?)?;
                Some((dn, *nb.table.levels.get(i)?, nb.id))
            })
            .min();
        let Some((bd, bl, via)) = best else {
            return Err(reject(step(3), Reason::NoEqualityWitness, Some(l), None));
        };
        if bd < d {
            return Err(reject(step(3), Reason::ShorterViaNeighbor, Some(l), Some(via)));
        }
        if bd > d {
            return Err(reject(step(3), Reason::NoEqualityWitness, Some(l), None));
        }
        if bl != l {
            return Err(reject(step(3), Reason::NotNearestLandmark, Some(l), Some(via)));
        }
    }

    // 4. bunch: distances, levels, strictness, nothing missing
    for (&u, &lu) in &table.bunch {
        if u == v {
            continue;
        }
        let d = cert.bunch_dist[&u];
        for nb in &view.neighbors {
            if let Some(&ln) = nb.table.bunch.get(&u) {
                if ln != lu {
                    return Err(reject(step(4), Reason::LevelMismatch, Some(u), Some(nb.id)));
                }
            }
        }
        if radius(cert, lu).is_some_and(|r| d >= r) {
            return Err(reject(step(4), Reason::NotCloser, Some(u), None));
        }
        check_witness(view, d, None, false, |nb| {
            if nb.table.bunch.contains_key(&u) {
                nb.cert.bunch_dist.get(&u).copied()
            } else {
                None
            }
        })
        .map_err(|f| f.into_verdict(step(4), u))?;
    }
    for nb in &view.neighbors {
        for (&u, &lu) in &nb.table.bunch {
            if table.bunch.contains_key(&u) {
                continue;
            }
            let Some(&du) = nb.cert.bunch_dist.get(&u) else { continue };
            let Some(via) = nb.weight.checked_add(du) else { continue };
            if radius(cert, lu).is_none_or(|r| via < r) {
                return Err(reject(step(4), Reason::MissingMember, Some(u), Some(nb.id)));
            }
        }
    }

    check_trees(view)?;

    // 5. cluster: own entry, distances, bounds, nothing missing
    let own_bound = radius(cert, level);
    match cert.cluster.get(&v) {
        None => return Err(reject(step(5), Reason::SelfMissing, Some(v), None)),
        Some(c) if c.dist != 0 => return Err(reject(step(5), Reason::SelfDistance, Some(v), None)),
        Some(c) if c.bound != own_bound => return Err(reject(step(5), Reason::AnnotationMismatch, Some(v), None)),
        Some(_) => {}
    }
    for (&u, &ptr) in &table.cluster {
        let c = cert.cluster[&u];
        for nb in &view.neighbors {
            if !nb.table.cluster.contains_key(&u) {
                continue;
            }
            if let Some(cn) = nb.cert.cluster.get(&u) {
                if cn.bound != c.bound {
                    return Err(reject(step(5), Reason::AnnotationMismatch, Some(u), Some(nb.id)));
                }
            }
        }
        if c.bound.is_some_and(|b| c.dist >= b) {
            return Err(reject(step(5), Reason::NotCloser, Some(u), None));
        }
        if u == v {
            continue;
        }
        check_witness(view, c.dist, ptr, true, |nb| {
            if nb.table.cluster.contains_key(&u) {
                nb.cert.cluster.get(&u).map(|c| c.dist)
            } else {
                None
            }
        })
        .map_err(|f| f.into_verdict(step(5), u))?;
    }
    for nb in &view.neighbors {
        for u in nb.table.cluster.keys() {
            if table.cluster.contains_key(u) {
                continue;
            }
            let Some(cu) = nb.cert.cluster.get(u) else { continue };
            let Some(via) = nb.weight.checked_add(cu.dist) else { continue };
            if cu.bound.is_none_or(|b| via < b) {
                return Err(reject(step(5), Reason::MissingMember, Some(*u), Some(nb.id)));
            }
        }
    }
    Ok(())
}

/// Root label, minimal parent pointers, children agreeing with the
/// neighbors that point back, and contiguous intervals.
fn check_trees(view: &HkView<'_>) -> Result<(), Verdict> {
    let v = view.id;
    let step = Step::Tree;
    for (&w, tt) in &view.table.trees {
        if w == v && tt.label != 0 {
            return Err(reject(step(1), Reason::TreeRoot, Some(w), None));
        }

        if w != v {
            let d = root_dist(view.table, view.cert, w).expect("roots are bunch members or levels");
            check_witness(view, d, tt.parent, true, |nb| {
                nb.table.trees.get(&w)?;
                root_dist(nb.table, nb.cert, w)
            })
            .map_err(|f| f.into_verdict(step(2), w))?;
        }

        let mut expected: Vec<(u32, u32, u32)> = view
            .neighbors
            .iter()
            .filter_map(|nb| {
                let nt = nb.table.trees.get(&w)?;
                (nt.parent == Some(nb.back_port)).then_some((nb.port.0, nt.label, nt.end))
            })
            .collect();
        expected.sort_unstable();
        let listed = tt.children.iter().map(|c| (c.port.0, c.start, c.end));
        if !listed.eq(expected.iter().copied()) {
            let culprit = tt
                .children
                .iter()
                .find(|c| !expected.iter().any(|e| (e.0, e.1, e.2) == (c.port.0, c.start, c.end)))
                .and_then(|c| view.via_port(c.port))
                .map(|nb| nb.id);
            return Err(reject(step(3), Reason::TreeChildren, Some(w), culprit));
        }

        let mut next = tt.label.checked_add(1);
        for c in &tt.children {
            if next != Some(c.start) || c.end <= c.start {
                return Err(reject(step(4), Reason::TreeInterval, Some(w), None));
            }
            next = Some(c.end);
        }
        if next != Some(tt.end) {
            return Err(reject(step(4), Reason::TreeInterval, Some(w), None));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_graph, GenParams, GraphKind};
    use crate::hk::build_hk;

    #[test]
    fn honest_tables_are_accepted() {
        let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n: 40, weights: (1, 10), seed: 4 }).unwrap();
        let o = DistanceOracle::build(&g);
        for k in [2, 3] {
            let s = build_hk(&g, &o, k, 9).unwrap();
            let certs = hk_prove(&g, &o, &s.tables);
            let verdicts = hk_verify(&g, &s.tables, &certs, k);
            assert!(verdicts.iter().all(Verdict::is_accept), "{verdicts:?}");
        }
    }

    #[test]
    fn farther_landmark_is_rejected_at_check_three() {
        let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n: 40, weights: (1, 10), seed: 4 }).unwrap();
        let o = DistanceOracle::build(&g);
        let s = build_hk(&g, &o, 3, 9).unwrap();
        let mut tables = s.tables.clone();
        let (ix, far) = (0..g.n())
            .find_map(|v| {
                let l1 = tables[v].levels[1];
                if l1 == g.id(v) {
                    return None;
                }
                let other = s.hierarchy.sets[1].iter().map(|&l| g.id(l)).find(|&l| l != l1)?;
                Some((v, other))
            })
            .unwrap();
        let t = &mut tables[ix];
        let old = t.levels[1];
        t.levels[1] = far;
        let template = t.trees[&old].clone();
        if !t.bunch.contains_key(&old) && !t.levels.contains(&old) {
            t.trees.remove(&old);
        }
        t.trees.entry(far).or_insert(crate::tree::TreeTable { root: far, ..template });
        let certs = hk_prove(&g, &o, &tables);
        let v = hk_verify_node(&LocalView::of(&g, ix, &tables, &certs), g.n(), 3);
        assert_eq!(v.step(), Some(Step::Hk(3)));
    }
}
