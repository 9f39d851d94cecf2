//! Certificates and the eight-step local verifier for the stretch-3 scheme.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::graph::{NodeId, Port, WeightedGraph};
use crate::oracle::{DistanceOracle, INFINITE};
use crate::params;
use crate::tz::TzTable;
use crate::verdict::{reject, verify_all, LocalView, NeighborView, Reason, Step, Verdict};

/// Certificate entry of a cluster member `t`: `d(v,t)`, the claimed
/// nearest landmark `l_t` and `d(t,l_t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterCert {
    pub dist: u64,
    pub landmark: NodeId,
    pub landmark_dist: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TzCertificate {
    pub node: NodeId,
    pub landmark_dist: BTreeMap<NodeId, u64>,
    pub cluster: BTreeMap<NodeId, ClusterCert>,
}

impl TzCertificate {
    pub fn entry_count(&self) -> usize {
        self.landmark_dist.len() + self.cluster.len()
    }

    pub fn bits(&self) -> usize {
        64 + self.landmark_dist.len() * (64 + 64) + self.cluster.len() * (64 + 64 + 64 + 64)
    }
}

pub(crate) fn dist_by_id(g: &WeightedGraph, oracle: &DistanceOracle, a: NodeId, b: NodeId) -> u64 {
    oracle.dist_ids(g, a, b).unwrap_or(INFINITE)
}

/// Nearest of `landmarks` to `t` by `(distance, id)`.
pub(crate) fn annotate<'a>(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    t: NodeId,
    landmarks: impl Iterator<Item = &'a NodeId>,
) -> (NodeId, u64) {
    landmarks
        .map(|&l| (dist_by_id(g, oracle, t, l), l))
        .min()
        .map(|(d, l)| (l, d))
        .unwrap_or((t, INFINITE))
}

/// Certificate of one node, computed from its table alone: exact distances
/// to every listed id and nearest-landmark annotations over the listed
/// landmarks. Applied to tampered tables this is the re-proving adversary.
pub fn tz_prove_node(g: &WeightedGraph, oracle: &DistanceOracle, table: &TzTable) -> TzCertificate {
    let v = table.node;
    TzCertificate {
        node: v,
        landmark_dist: table
            .landmarks
            .keys()
            .map(|&l| (l, dist_by_id(g, oracle, v, l)))
            .collect(),
        cluster: table
            .cluster
            .keys()
            .map(|&t| {
                let (landmark, landmark_dist) = annotate(g, oracle, t, table.landmarks.keys());
                (t, ClusterCert { dist: dist_by_id(g, oracle, v, t), landmark, landmark_dist })
            })
            .collect(),
    }
}

pub fn tz_prove(g: &WeightedGraph, oracle: &DistanceOracle, tables: &[TzTable]) -> Vec<TzCertificate> {
    tables.iter().map(|t| tz_prove_node(g, oracle, t)).collect()
}

/// How strictly the inherited checks treat ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TzRules {
    /// Pointers must be the smallest-port shortest-path edge.
    pub minimal_ports: bool,
    /// A node's own nearest-landmark annotation must break ties by id.
    pub canonical_landmark: bool,
}

impl TzRules {
    pub const STRICT: TzRules = TzRules { minimal_ports: true, canonical_landmark: true };
    pub const RELAXED: TzRules = TzRules { minimal_ports: false, canonical_landmark: false };
}

pub type TzView<'a> = LocalView<'a, TzTable, TzCertificate>;

pub fn tz_verify_node(view: &TzView<'_>, n: usize) -> Verdict {
    match check_tz(view, n, TzRules::STRICT) {
        Ok(()) => Verdict::Accept,
        Err(v) => v,
    }
}

pub fn tz_verify(g: &WeightedGraph, tables: &[TzTable], certs: &[TzCertificate]) -> Vec<Verdict> {
    let n = g.n();
    verify_all(g, tables, certs, |view| tz_verify_node(view, n))
}

/// Result of checking one distance claim against the neighbors.
pub(crate) enum WitnessFailure {
    Shorter(NodeId),
    None,
    PointerNotWitness(Option<NodeId>),
    PointerNotMinimal(NodeId),
}

impl WitnessFailure {
    pub(crate) fn into_verdict(self, step: Step, entry: NodeId) -> Verdict {
        match self {
            WitnessFailure::Shorter(nb) => reject(step, Reason::ShorterViaNeighbor, Some(entry), Some(nb)),
            WitnessFailure::None => reject(step, Reason::NoEqualityWitness, Some(entry), None),
            WitnessFailure::PointerNotWitness(nb) => reject(step, Reason::PointerNotWitness, Some(entry), nb),
            WitnessFailure::PointerNotMinimal(nb) => reject(step, Reason::PointerNotMinimal, Some(entry), Some(nb)),
        }
    }
}

/// Checks `d` against `weight + d_u` over eligible neighbors (`dist_of`
/// returns `Some` for those): some neighbor attains it, none beats it, and
/// `pointer` leads to one that attains it (the smallest such port when
/// `minimal`).
pub(crate) fn check_witness<T, C>(
    view: &LocalView<'_, T, C>,
    d: u64,
    pointer: Option<Port>,
    minimal: bool,
    dist_of: impl Fn(&NeighborView<'_, T, C>) -> Option<u64>,
) -> Result<(), WitnessFailure> {
    let mut best: Option<Port> = None;
    for nb in &view.neighbors {
        let Some(dn) = dist_of(nb) else { continue };
        let Some(c) = nb.weight.checked_add(dn) else { continue };
        if c < d {
            return Err(WitnessFailure::Shorter(nb.id));
        }
        if c == d && best.is_none() {
            best = Some(nb.port);
        }
    }
    let Some(best) = best else { return Err(WitnessFailure::None) };
    if let Some(p) = pointer {
        let Some(nb) = view.via_port(p) else {
            return Err(WitnessFailure::PointerNotWitness(None));
        };
        let attains = dist_of(nb).and_then(|dn| nb.weight.checked_add(dn)) == Some(d);
        if !attains {
            return Err(WitnessFailure::PointerNotWitness(Some(nb.id)));
        }
        if minimal && p != best {
            return Err(WitnessFailure::PointerNotMinimal(nb.id));
        }
    }
    Ok(())
}

pub(crate) fn port_in_range(p: Option<Port>, deg: usize) -> bool {
    match p {
        None => true,
        Some(p) => p.0 >= 1 && (p.0 as usize) <= deg,
    }
}

/// `None` ports exactly on the owner's entry, other ports within `1..=deg`.
pub(crate) fn entries_well_formed(map: &BTreeMap<NodeId, Option<Port>>, owner: NodeId, deg: usize) -> bool {
    map.iter()
        .all(|(&k, &p)| (p.is_none() == (k == owner)) && port_in_range(p, deg))
}

pub(crate) fn same_keys<A, B>(a: &BTreeMap<NodeId, A>, b: &BTreeMap<NodeId, B>) -> bool {
    a.len() == b.len() && a.keys().eq(b.keys())
}

/// The eight checks, in order; the first failure is returned.
pub fn check_tz(view: &TzView<'_>, n: usize, rules: TzRules) -> Result<(), Verdict> {
    let v = view.id;
    let table = view.table;
    let cert = view.cert;
    let deg = view.degree();
    let step = Step::Tz;

    let malformed = || reject(step(1), Reason::Malformed, None, None);
    if table.node != v || cert.node != v {
        return Err(malformed());
    }
    if !entries_well_formed(&table.landmarks, v, deg)
        || !entries_well_formed(&table.cluster, v, deg)
        || !same_keys(&table.landmarks, &cert.landmark_dist)
        || !same_keys(&table.cluster, &cert.cluster)
    {
        return Err(malformed());
    }

    // 1. sizes
    if table.landmarks.is_empty() {
        return Err(reject(step(1), Reason::EmptyLandmarks, None, None));
    }
    if !params::cluster_within_bound(table.cluster.len(), n) || table.landmarks.len() > params::landmark_bound(n) {
        return Err(reject(step(1), Reason::SizeBound, None, None));
    }

    // 2. same landmarks as every neighbor
    for nb in &view.neighbors {
        if !same_keys(&table.landmarks, &nb.table.landmarks) {
            return Err(reject(step(2), Reason::LandmarkSetMismatch, None, Some(nb.id)));
        }
    }

    // 3. landmark distances and pointers
    for (&l, &ptr) in &table.landmarks {
        let d = cert.landmark_dist[&l];
        if l == v {
            if d != 0 {
                return Err(reject(step(3), Reason::SelfDistance, Some(l), None));
            }
            continue;
        }
        check_witness(view, d, ptr, rules.minimal_ports, |nb| nb.cert.landmark_dist.get(&l).copied())
            .map_err(|f| f.into_verdict(step(3), l))?;
    }

    // 4. landmarks have empty clusters
    let is_landmark = table.landmarks.contains_key(&v);
    if is_landmark && !table.cluster.is_empty() {
        return Err(reject(step(4), Reason::LandmarkHasCluster, None, None));
    }

    // 5. own membership, cluster distances and pointers
    if !is_landmark {
        match cert.cluster.get(&v) {
            None => return Err(reject(step(5), Reason::SelfMissing, Some(v), None)),
            Some(c) if c.dist != 0 => return Err(reject(step(5), Reason::SelfDistance, Some(v), None)),
            Some(_) => {}
        }
    }
    for (&t, &ptr) in &table.cluster {
        if t == v {
            continue;
        }
        let d = cert.cluster[&t].dist;
        check_witness(view, d, ptr, rules.minimal_ports, |nb| {
            if nb.table.cluster.contains_key(&t) {
                nb.cert.cluster.get(&t).map(|c| c.dist)
            } else {
                None
            }
        })
        .map_err(|f| f.into_verdict(step(5), t))?;
    }

    // 6. landmark annotations agree along clusters, and are right at the member itself
    for (&t, c) in &cert.cluster {
        if t == v && !own_annotation_ok(cert, c, rules.canonical_landmark) {
            return Err(reject(step(6), Reason::AnnotationMismatch, Some(t), None));
        }
        for nb in &view.neighbors {
            if !nb.table.cluster.contains_key(&t) {
                continue;
            }
            if let Some(cu) = nb.cert.cluster.get(&t) {
                if (cu.landmark, cu.landmark_dist) != (c.landmark, c.landmark_dist) {
                    return Err(reject(step(6), Reason::AnnotationMismatch, Some(t), Some(nb.id)));
                }
            }
        }
    }

    // 7. members are strictly closer than their landmark
    for (&t, c) in &cert.cluster {
        if c.dist >= c.landmark_dist {
            return Err(reject(step(7), Reason::NotCloser, Some(t), None));
        }
    }

    // 8. nothing missing
    for nb in &view.neighbors {
        for t in nb.table.cluster.keys() {
            if table.cluster.contains_key(t) {
                continue;
            }
            let Some(cu) = nb.cert.cluster.get(t) else { continue };
            if let Some(via) = nb.weight.checked_add(cu.dist) {
                if via < cu.landmark_dist {
                    return Err(reject(step(8), Reason::MissingMember, Some(*t), Some(nb.id)));
                }
            }
        }
    }
    Ok(())
}

/// The node's own cluster entry names a landmark at minimum distance.
fn own_annotation_ok(cert: &TzCertificate, own: &ClusterCert, canonical: bool) -> bool {
    let Some((&best_l, &best_d)) = cert.landmark_dist.iter().min_by_key(|(&l, &d)| (d, l)) else {
        return false;
    };
    if canonical {
        own.landmark == best_l && own.landmark_dist == best_d
    } else {
        cert.landmark_dist.get(&own.landmark) == Some(&best_d) && own.landmark_dist == best_d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::tz::{LandmarkSet, TzScheme};

    fn path3() -> (WeightedGraph, DistanceOracle) {
        let g = WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 3, 1)], &[]).unwrap();
        let o = DistanceOracle::build(&g);
        (g, o)
    }

    #[test]
    fn path_certificate_and_acceptance() {
        let (g, o) = path3();
        let tz = TzScheme::from_landmarks(&g, &o, LandmarkSet::from_members(&o, [1]));
        let certs = tz_prove(&g, &o, &tz.tables);
        assert_eq!(certs[0].landmark_dist[&NodeId(2)], 1);
        assert!(tz_verify(&g, &tz.tables, &certs).iter().all(Verdict::is_accept));
    }

    #[test]
    fn single_node_certificate() {
        let g = WeightedGraph::new([NodeId(0)], &[], &[]).unwrap();
        let o = DistanceOracle::build(&g);
        let tz = crate::tz::build_tz(&g, &o, 3).unwrap();
        let certs = tz_prove(&g, &o, &tz.tables);
        assert!(certs[0].cluster.is_empty());
        assert_eq!(certs[0].landmark_dist[&NodeId(0)], 0);
        assert!(tz_verify(&g, &tz.tables, &certs)[0].is_accept());
    }

    #[test]
    fn inflated_landmark_distance_is_rejected_at_step_3() {
        let (g, o) = path3();
        let tz = TzScheme::from_landmarks(&g, &o, LandmarkSet::from_members(&o, [1]));
        let mut certs = tz_prove(&g, &o, &tz.tables);
        *certs[0].landmark_dist.get_mut(&NodeId(2)).unwrap() += 1;
        let verdicts = tz_verify(&g, &tz.tables, &certs);
        assert_eq!(verdicts[0].step(), Some(Step::Tz(3)));
    }
}
