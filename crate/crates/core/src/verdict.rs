//! Verification outcomes and the one-round local view a verifier runs on.

use alloc::vec::Vec;
use core::fmt;

use crate::graph::{NodeId, Port, WeightedGraph};

/// The check that rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// Stretch-3 checks 1..=8, also run first by the name-independent verifier.
    Tz(u8),
    /// Vicinity ball checks 1..=3.
    Ball(u8),
    /// Name-independent checks 1..=7.
    Ni(u8),
    /// Hierarchical checks 1..=5.
    Hk(u8),
    /// Per-tree checks 1..=4 of the hierarchical scheme.
    Tree(u8),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Tz(s) => write!(f, "tz.{s}"),
            Step::Ball(s) => write!(f, "ball.{s}"),
            Step::Ni(s) => write!(f, "ni.{s}"),
            Step::Hk(s) => write!(f, "hk.{s}"),
            Step::Tree(s) => write!(f, "tree.{s}"),
        }
    }
}

impl Step {
    pub fn parse(s: &str) -> Option<Step> {
        let (kind, num) = s.split_once('.')?;
        let num: u8 = num.parse().ok()?;
        Some(match kind {
            "tz" => Step::Tz(num),
            "ball" => Step::Ball(num),
            "ni" => Step::Ni(num),
            "hk" => Step::Hk(num),
            "tree" => Step::Tree(num),
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reason {
    Malformed,
    SizeBound,
    EmptyLandmarks,
    LandmarkSetMismatch,
    SelfDistance,
    NoEqualityWitness,
    ShorterViaNeighbor,
    PointerNotWitness,
    PointerNotMinimal,
    LandmarkHasCluster,
    SelfMissing,
    AnnotationMismatch,
    NotCloser,
    MissingMember,
    NotNearestLandmark,
    HashMismatch,
    NotRainbow,
    WrongColor,
    LandmarkInDirectory,
    DirectoryPort,
    FamilyMismatch,
    FingerprintMismatch,
    FingerprintOverflow,
    MatrixMismatch,
    LevelMismatch,
    Nesting,
    TreeRoot,
    TreeChildren,
    TreeInterval,
}

impl Reason {
    pub const ALL: [Reason; 29] = [
        Reason::Malformed,
        Reason::SizeBound,
        Reason::EmptyLandmarks,
        Reason::LandmarkSetMismatch,
        Reason::SelfDistance,
        Reason::NoEqualityWitness,
        Reason::ShorterViaNeighbor,
        Reason::PointerNotWitness,
        Reason::PointerNotMinimal,
        Reason::LandmarkHasCluster,
        Reason::SelfMissing,
        Reason::AnnotationMismatch,
        Reason::NotCloser,
        Reason::MissingMember,
        Reason::NotNearestLandmark,
        Reason::HashMismatch,
        Reason::NotRainbow,
        Reason::WrongColor,
        Reason::LandmarkInDirectory,
        Reason::DirectoryPort,
        Reason::FamilyMismatch,
        Reason::FingerprintMismatch,
        Reason::FingerprintOverflow,
        Reason::MatrixMismatch,
        Reason::LevelMismatch,
        Reason::Nesting,
        Reason::TreeRoot,
        Reason::TreeChildren,
        Reason::TreeInterval,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Reason::Malformed => "malformed",
            Reason::SizeBound => "size-bound",
            Reason::EmptyLandmarks => "empty-landmarks",
            Reason::LandmarkSetMismatch => "landmark-set-mismatch",
            Reason::SelfDistance => "self-distance",
            Reason::NoEqualityWitness => "no-equality-witness",
            Reason::ShorterViaNeighbor => "shorter-via-neighbor",
            Reason::PointerNotWitness => "pointer-not-witness",
            Reason::PointerNotMinimal => "pointer-not-minimal",
            Reason::LandmarkHasCluster => "landmark-has-cluster",
            Reason::SelfMissing => "self-missing",
            Reason::AnnotationMismatch => "annotation-mismatch",
            Reason::NotCloser => "not-closer",
            Reason::MissingMember => "missing-member",
            Reason::NotNearestLandmark => "not-nearest-landmark",
            Reason::HashMismatch => "hash-mismatch",
            Reason::NotRainbow => "not-rainbow",
            Reason::WrongColor => "wrong-color",
            Reason::LandmarkInDirectory => "landmark-in-directory",
            Reason::DirectoryPort => "directory-port",
            Reason::FamilyMismatch => "family-mismatch",
            Reason::FingerprintMismatch => "fingerprint-mismatch",
            Reason::FingerprintOverflow => "fingerprint-overflow",
            Reason::MatrixMismatch => "matrix-mismatch",
            Reason::LevelMismatch => "level-mismatch",
            Reason::Nesting => "nesting",
            Reason::TreeRoot => "tree-root",
            Reason::TreeChildren => "tree-children",
            Reason::TreeInterval => "tree-interval",
        }
    }

    pub fn parse(code: &str) -> Option<Reason> {
        Reason::ALL.iter().copied().find(|r| r.code() == code)
    }
}

/// What made a node reject: the neighbor it compared against and the
/// table entry under test, when there is one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub neighbor: Option<NodeId>,
    pub entry: Option<NodeId>,
    pub reason: Reason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject { step: Step, witness: Witness },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn step(&self) -> Option<Step> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject { step, .. } => Some(*step),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => write!(f, "accept"),
            Verdict::Reject { step, witness } => {
                write!(f, "reject {step} {}", witness.reason.code())?;
                if let Some(e) = witness.entry {
                    write!(f, " entry={e}")?;
                }
                if let Some(nb) = witness.neighbor {
                    write!(f, " neighbor={nb}")?;
                }
                Ok(())
            }
        }
    }
}

/// Builds a rejection; used as `Err(reject(..))` inside verifiers.
pub(crate) fn reject(step: Step, reason: Reason, entry: Option<NodeId>, neighbor: Option<NodeId>) -> Verdict {
    Verdict::Reject {
        step,
        witness: Witness { neighbor, entry, reason },
    }
}

/// A neighbor as seen from the verifying node.
#[derive(Debug)]
pub struct NeighborView<'a, T, C> {
    pub id: NodeId,
    /// Length of the connecting edge.
    pub weight: u64,
    /// Port of the edge at the verifying node.
    pub port: Port,
    /// Port of the edge at the neighbor.
    pub back_port: Port,
    pub table: &'a T,
    pub cert: &'a C,
}

impl<T, C> Clone for NeighborView<'_, T, C> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T, C> Copy for NeighborView<'_, T, C> {}

/// Everything a node may read during the verification round: its own
/// table and certificate and those of its neighbors, in port order.
#[derive(Debug)]
pub struct LocalView<'a, T, C> {
    pub id: NodeId,
    pub table: &'a T,
    pub cert: &'a C,
    pub neighbors: Vec<NeighborView<'a, T, C>>,
}

impl<'a, T, C> LocalView<'a, T, C> {
    /// The view of node `ix`, with tables and certificates indexed densely.
    pub fn of(g: &WeightedGraph, ix: usize, tables: &'a [T], certs: &'a [C]) -> Self {
        LocalView::with(g, ix, |i| &tables[i], |i| &certs[i])
    }

    /// The view of node `ix`, reading tables and certificates through lookups.
    pub fn with(
        g: &WeightedGraph,
        ix: usize,
        table_of: impl Fn(usize) -> &'a T,
        cert_of: impl Fn(usize) -> &'a C,
    ) -> Self {
        let neighbors = g
            .incident(ix)
            .iter()
            .map(|inc| NeighborView {
                id: g.id(inc.neighbor),
                weight: inc.weight,
                port: inc.port,
                back_port: inc.back_port,
                table: table_of(inc.neighbor),
                cert: cert_of(inc.neighbor),
            })
            .collect();
        LocalView {
            id: g.id(ix),
            table: table_of(ix),
            cert: cert_of(ix),
            neighbors,
        }
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn via_port(&self, p: Port) -> Option<&NeighborView<'a, T, C>> {
        let i = (p.0 as usize).checked_sub(1)?;
        self.neighbors.get(i).filter(|nb| nb.port == p)
    }

    /// Projects every table and certificate through `ft` and `fc`.
    pub fn project<T2, C2>(
        &self,
        ft: impl Fn(&'a T) -> &'a T2,
        fc: impl Fn(&'a C) -> &'a C2,
    ) -> LocalView<'a, T2, C2> {
        LocalView {
            id: self.id,
            table: ft(self.table),
            cert: fc(self.cert),
            neighbors: self
                .neighbors
                .iter()
                .map(|nb| NeighborView {
                    id: nb.id,
                    weight: nb.weight,
                    port: nb.port,
                    back_port: nb.back_port,
                    table: ft(nb.table),
                    cert: fc(nb.cert),
                })
                .collect(),
        }
    }
}

/// Runs `check` at every node.
pub fn verify_all<T, C>(
    g: &WeightedGraph,
    tables: &[T],
    certs: &[C],
    check: impl Fn(&LocalView<'_, T, C>) -> Verdict,
) -> Vec<Verdict> {
    (0..g.n())
        .map(|ix| check(&LocalView::of(g, ix, tables, certs)))
        .collect()
}

/// Nodes that rejected, with their verdicts.
pub fn rejections(g: &WeightedGraph, verdicts: &[Verdict]) -> Vec<(NodeId, Verdict)> {
    verdicts
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_accept())
        .map(|(ix, v)| (g.id(ix), *v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_reason_codes_round_trip() {
        for s in [Step::Tz(3), Step::Ball(2), Step::Ni(7), Step::Hk(5), Step::Tree(1)] {
            assert_eq!(Step::parse(&alloc::format!("{s}")), Some(s));
        }
        for r in Reason::ALL {
            assert_eq!(Reason::parse(r.code()), Some(r));
        }
    }
}
