//! Hand-built graphs realizing two known bad routes, with the distances
//! each construction relies on and a scripted forwarding policy that
//! reproduces the route.
//!
//! `stretch7` models routing that always goes through the target's landmark
//! after a vicinity-ball miss: the source first detours to the ball member
//! holding the target's directory entry, then heads to the landmark, passing
//! the target on the way, and comes back. `handshake5` replays a route
//! `s -> w -> l* -> t` where `w` is the only node knowing how to reach `t`;
//! only the route arithmetic is reproduced, not tables that would force it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::{Edge, NodeId, WeightedGraph};
use crate::oracle::DistanceOracle;
use crate::sim::{simulate, Decision, ForwardError, RoutingScheme, SimTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureName {
    Stretch7,
    Handshake5,
}

impl FixtureName {
    pub const ALL: [FixtureName; 2] = [FixtureName::Stretch7, FixtureName::Handshake5];

    pub fn code(self) -> &'static str {
        match self {
            FixtureName::Stretch7 => "stretch7",
            FixtureName::Handshake5 => "handshake5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        FixtureName::ALL.into_iter().find(|f| f.code() == s)
    }
}

/// A distance the construction needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatedDistance {
    pub label: &'static str,
    pub a: NodeId,
    pub b: NodeId,
    pub expected: u64,
}

#[derive(Clone, Debug)]
pub struct FixtureGraph {
    pub name: FixtureName,
    pub graph: WeightedGraph,
    pub s: NodeId,
    pub t: NodeId,
    /// Nodes the scripted route visits in order, ending at `t`.
    pub waypoints: Vec<NodeId>,
    pub distances: Vec<StatedDistance>,
    pub expected_route: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditRow {
    pub label: &'static str,
    pub expected: u64,
    pub actual: u64,
}

impl AuditRow {
    pub fn ok(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug)]
pub struct FixtureRun {
    pub audit: Vec<AuditRow>,
    /// Present only when the audit passed.
    pub trace: Option<SimTrace<usize>>,
    pub delta: u64,
    pub expected_route: u64,
}

impl FixtureRun {
    pub fn audit_ok(&self) -> bool {
        self.audit.iter().all(AuditRow::ok)
    }

    pub fn route_length(&self) -> Option<u64> {
        self.trace.as_ref().filter(|t| t.delivered()).map(|t| t.total_length)
    }

    pub fn passed(&self) -> bool {
        self.audit_ok() && self.route_length() == Some(self.expected_route)
    }

    pub fn summary(&self) -> String {
        alloc::format!(
            "audit {}/{} route {:?} expected {} delta {}",
            self.audit.iter().filter(|r| r.ok()).count(),
            self.audit.len(),
            self.route_length(),
            self.expected_route,
            self.delta
        )
    }
}

fn stated(label: &'static str, a: u64, b: u64, expected: u64) -> StatedDistance {
    StatedDistance { label, a: NodeId(a), b: NodeId(b), expected }
}

/// Ids: landmark `l = 1`, detour `u = 2`, `a = 3`, source `s = 4`, target `t = 5`.
/// With a ball of two nodes, `s` sees `{s, u}`: `u`, `a` and `t` tie at 50 and
/// `u` has the smallest id, so `t` is missed. `l = 1` is the only landmark.
pub fn stretch7() -> FixtureGraph {
    let edges = [Edge::new(2, 4, 50), Edge::new(3, 4, 50), Edge::new(4, 5, 50), Edge::new(5, 1, 100)];
    let graph = WeightedGraph::new([], &edges, &[]).expect("valid fixture");
    FixtureGraph {
        name: FixtureName::Stretch7,
        graph,
        s: NodeId(4),
        t: NodeId(5),
        waypoints: alloc::vec![NodeId(2), NodeId(1), NodeId(5)],
        distances: alloc::vec![
            stated("d(s,t)", 4, 5, 50),
            stated("d(s,u)", 4, 2, 50),
            stated("d(s,a)", 4, 3, 50),
            stated("d(t,l)", 5, 1, 100),
            stated("d(u,l)", 2, 1, 200),
        ],
        expected_route: 350,
    }
}

/// `x = 100`, `eps = 1`. Ids: `s = 1`, `w = 2`, `l* = 3`, `t = 4`.
pub fn handshake5() -> FixtureGraph {
    let (x, eps) = (100, 1);
    let edges = [
        Edge::new(1, 2, x),
        Edge::new(2, 3, 2 * x - eps),
        Edge::new(3, 4, 2 * x + eps),
        Edge::new(1, 4, x + eps),
    ];
    let graph = WeightedGraph::new([], &edges, &[]).expect("valid fixture");
    FixtureGraph {
        name: FixtureName::Handshake5,
        graph,
        s: NodeId(1),
        t: NodeId(4),
        waypoints: alloc::vec![NodeId(2), NodeId(3), NodeId(4)],
        distances: alloc::vec![
            stated("d(s,w)", 1, 2, x),
            stated("d(w,l*)", 2, 3, 2 * x - eps),
            stated("d(l*,t)", 3, 4, 2 * x + eps),
            stated("d(s,t)", 1, 4, x + eps),
        ],
        expected_route: 5 * x,
    }
}

pub fn build_fixture(name: FixtureName) -> FixtureGraph {
    match name {
        FixtureName::Stretch7 => stretch7(),
        FixtureName::Handshake5 => handshake5(),
    }
}

/// Visits the waypoints in order along shortest paths. The header is the
/// index of the next waypoint.
pub struct ScriptedPolicy<'a> {
    pub graph: &'a WeightedGraph,
    pub oracle: &'a DistanceOracle,
    pub waypoints: &'a [NodeId],
}

impl RoutingScheme for ScriptedPolicy<'_> {
    type Header = usize;

    fn header_for(&self, _s: NodeId, _t: NodeId) -> Result<usize, ForwardError> {
        Ok(0)
    }

    fn forward(&self, at: NodeId, header: &usize) -> Result<Decision<usize>, ForwardError> {
        let mut i = *header;
        while self.waypoints.get(i) == Some(&at) {
            i += 1;
        }
        let Some(&next) = self.waypoints.get(i) else {
            return Ok(Decision::Deliver);
        };
        let here = self.graph.index_of(at).ok_or(ForwardError::UnknownNode(at))?;
        let there = self.graph.index_of(next).ok_or(ForwardError::UnknownNode(next))?;
        let port = self.oracle.next_min(here, there).ok_or(ForwardError::MalformedHeader)?;
        Ok(Decision::Forward(port, i))
    }

    fn header_bits(&self, _header: &usize) -> usize {
        32
    }

    fn max_header_bits(&self) -> usize {
        32
    }
}

/// Audits the stated distances, then, only if they all hold, routes `s -> t`.
pub fn run_fixture(f: &FixtureGraph) -> FixtureRun {
    let o = DistanceOracle::build(&f.graph);
    let audit: Vec<AuditRow> = f
        .distances
        .iter()
        .map(|d| AuditRow {
            label: d.label,
            expected: d.expected,
            actual: o.dist_ids(&f.graph, d.a, d.b).unwrap_or(u64::MAX),
        })
        .collect();
    let delta = o.dist_ids(&f.graph, f.s, f.t).unwrap_or(u64::MAX);
    let trace = audit.iter().all(AuditRow::ok).then(|| {
        let policy = ScriptedPolicy { graph: &f.graph, oracle: &o, waypoints: &f.waypoints };
        simulate(&f.graph, &policy, f.s, f.t, f.graph.n() * f.graph.n())
    });
    FixtureRun { audit, trace, delta, expected_route: f.expected_route }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretch7_route_is_seven_times_the_distance() {
        let run = run_fixture(&stretch7());
        assert!(run.audit_ok());
        assert_eq!(run.route_length(), Some(350));
        assert_eq!(run.route_length(), Some(7 * run.delta));
        let nodes = run.trace.unwrap().nodes();
        assert_eq!(nodes, [4, 2, 4, 5, 1, 5].map(NodeId));
    }

    #[test]
    fn handshake5_route_is_five_x() {
        let run = run_fixture(&handshake5());
        assert!(run.passed());
        assert_eq!(run.delta, 101);
    }

    #[test]
    fn a_failed_audit_skips_the_route() {
        let mut f = handshake5();
        f.distances[0].expected = 99;
        let run = run_fixture(&f);
        assert!(!run.audit_ok());
        assert!(run.trace.is_none());
        assert!(!run.passed());
    }
}
