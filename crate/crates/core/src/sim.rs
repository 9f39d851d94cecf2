//! Hop-by-hop message forwarding with modifiable headers, and stretch
//! measurement against exact distances.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{NodeId, Port, WeightedGraph};
use crate::oracle::DistanceOracle;

/// What a node does with a message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision<H> {
    Deliver,
    /// Send through `port`, carrying the (possibly rewritten) header.
    Forward(Port, H),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForwardError {
    UnknownNode(NodeId),
    MalformedHeader,
    /// The table lacks an entry the forwarding rule needs.
    MissingEntry(NodeId),
    /// Same-color directory lookup failed for this target.
    DirMiss(NodeId),
    /// No vicinity-ball member carries the target's color.
    NoWitness(NodeId),
}

impl fmt::Display for ForwardError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForwardError::UnknownNode(v) => write!(f, "unknown node {v}"),
            ForwardError::MalformedHeader => write!(f, "malformed header"),
            ForwardError::MissingEntry(v) => write!(f, "no table entry for {v}"),
            ForwardError::DirMiss(t) => write!(f, "directory has no triple for {t}"),
            ForwardError::NoWitness(t) => write!(f, "no ball member with the color of {t}"),
        }
    }
}

/// A routing scheme as a pure forwarding function over per-node tables.
pub trait RoutingScheme {
    type Header: Clone + Ord + fmt::Debug;

    /// Header attached at the source.
    fn header_for(&self, s: NodeId, t: NodeId) -> Result<Self::Header, ForwardError>;

    /// Forwarding decision at `at`, reading only the table of `at` and the header.
    fn forward(&self, at: NodeId, header: &Self::Header) -> Result<Decision<Self::Header>, ForwardError>;

    fn header_bits(&self, header: &Self::Header) -> usize;

    fn max_header_bits(&self) -> usize;
}

/// One traversed edge: the node it left, the port taken, the header it carried.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hop<H> {
    pub node: NodeId,
    pub port: Port,
    pub header: H,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Delivered,
    /// Delivered at a node other than the target.
    Misdelivered(NodeId),
    LoopDetected,
    StepLimit,
    ForwardingError(ForwardError),
    /// The port does not exist at the node.
    InvalidPort(NodeId, Port),
    HeaderOverflow { bits: usize, max: usize },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Delivered => "delivered",
            Outcome::Misdelivered(_) => "misdelivered",
            Outcome::LoopDetected => "loop-detected",
            Outcome::StepLimit => "step-limit",
            Outcome::ForwardingError(_) | Outcome::InvalidPort(..) => "forwarding-error",
            Outcome::HeaderOverflow { .. } => "header-overflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimTrace<H> {
    pub source: NodeId,
    pub target: NodeId,
    pub hops: Vec<Hop<H>>,
    /// Node where the message stopped.
    pub end: NodeId,
    pub total_length: u64,
    pub outcome: Outcome,
}

impl<H> SimTrace<H> {
    pub fn delivered(&self) -> bool {
        self.outcome == Outcome::Delivered
    }

    /// Visited nodes in order, source first.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.hops.iter().map(|h| h.node).collect();
        out.push(self.end);
        out
    }
}

/// Default step limit, `n^2`.
pub fn default_step_limit(g: &WeightedGraph) -> usize {
    g.n().saturating_mul(g.n()).max(1)
}

/// Routes one message from `s` to `t`.
///
/// Revisiting a (node, header) pair aborts with [`Outcome::LoopDetected`]:
/// forwarding is deterministic, so the message would cycle forever.
pub fn simulate<S: RoutingScheme + ?Sized>(
    g: &WeightedGraph,
    scheme: &S,
    s: NodeId,
    t: NodeId,
    step_limit: usize,
) -> SimTrace<S::Header> {
    let mut trace = SimTrace {
        source: s,
        target: t,
        hops: Vec::new(),
        end: s,
        total_length: 0,
        outcome: Outcome::Delivered,
    };
    let (Some(mut at), Some(_)) = (g.index_of(s), g.index_of(t)) else {
        let missing = if g.contains(s) { t } else { s };
        trace.outcome = Outcome::ForwardingError(ForwardError::UnknownNode(missing));
        return trace;
    };
    let mut header = match scheme.header_for(s, t) {
        Ok(h) => h,
        Err(e) => {
            trace.outcome = Outcome::ForwardingError(e);
            return trace;
        }
    };
    let max_bits = scheme.max_header_bits();
    let mut seen: BTreeSet<(usize, S::Header)> = BTreeSet::new();
    loop {
        let here = g.id(at);
        trace.end = here;
        let bits = scheme.header_bits(&header);
        if bits > max_bits {
            trace.outcome = Outcome::HeaderOverflow { bits, max: max_bits };
            return trace;
        }
        if !seen.insert((at, header.clone())) {
            trace.outcome = Outcome::LoopDetected;
            return trace;
        }
        match scheme.forward(here, &header) {
            Err(e) => {
                trace.outcome = Outcome::ForwardingError(e);
                return trace;
            }
            Ok(Decision::Deliver) => {
                trace.outcome = if here == t {
                    Outcome::Delivered
                } else {
                    Outcome::Misdelivered(here)
                };
                return trace;
            }
            Ok(Decision::Forward(port, next)) => {
                if trace.hops.len() >= step_limit {
                    trace.outcome = Outcome::StepLimit;
                    return trace;
                }
                let Some(inc) = g.via_port(at, port) else {
                    trace.outcome = Outcome::InvalidPort(here, port);
                    return trace;
                };
                trace.hops.push(Hop { node: here, port, header });
                trace.total_length += inc.weight;
                at = inc.neighbor;
                header = next;
            }
        }
    }
}

/// Which ordered pairs to measure. Pairs with `s == t` are never included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSelection {
    All,
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRecord {
    pub s: NodeId,
    pub t: NodeId,
    pub delta: u64,
    /// Route length, `None` when the message was not delivered.
    pub realized: Option<u64>,
    pub outcome: &'static str,
}

impl PairRecord {
    pub fn ratio(&self) -> Option<f64> {
        self.realized.map(|r| r as f64 / self.delta as f64)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StretchReport {
    pub pairs: Vec<PairRecord>,
}

impl StretchReport {
    pub fn all_delivered(&self) -> bool {
        self.pairs.iter().all(|p| p.realized.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairRecord> {
        self.pairs.iter().filter(|p| p.realized.is_none())
    }

    /// Largest realized/delta as an exact fraction.
    pub fn max_ratio_exact(&self) -> Option<(u64, u64)> {
        self.pairs
            .iter()
            .filter_map(|p| p.realized.map(|r| (r, p.delta)))
            .max_by(|a, b| ((a.0 as u128) * (b.1 as u128)).cmp(&((b.0 as u128) * (a.1 as u128))))
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.max_ratio_exact().map(|(r, d)| r as f64 / d as f64)
    }

    /// Every delivered pair satisfies `realized <= num/den * delta`, exactly.
    pub fn within(&self, num: u64, den: u64) -> bool {
        self.pairs.iter().all(|p| match p.realized {
            Some(r) => (r as u128) * (den as u128) <= (num as u128) * (p.delta as u128),
            None => true,
        })
    }

    pub fn mean_ratio(&self) -> Option<f64> {
        let ratios: Vec<f64> = self.pairs.iter().filter_map(PairRecord::ratio).collect();
        if ratios.is_empty() {
            None
        } else {
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }

    /// Ratio at quantile `q` in `[0, 1]` (nearest rank).
    pub fn quantile(&self, q: f64) -> Option<f64> {
        let mut ratios: Vec<f64> = self.pairs.iter().filter_map(PairRecord::ratio).collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(f64::total_cmp);
        let rank = libm::ceil(q.clamp(0.0, 1.0) * ratios.len() as f64) as usize;
        Some(ratios[rank.saturating_sub(1).min(ratios.len() - 1)])
    }

    /// Counts of delivered pairs per ratio bucket; bucket `i` holds ratios
    /// in `[edges[i-1], edges[i])`, with open ends.
    pub fn histogram(&self, edges: &[f64]) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; edges.len() + 1];
        for r in self.pairs.iter().filter_map(PairRecord::ratio) {
            let b = edges.iter().position(|e| r < *e).unwrap_or(edges.len());
            counts[b] += 1;
        }
        counts
    }

    pub fn merge(&mut self, other: StretchReport) {
        self.pairs.extend(other.pairs);
    }
}

pub fn measure_stretch<S: RoutingScheme + ?Sized>(
    g: &WeightedGraph,
    oracle: &DistanceOracle,
    scheme: &S,
    pairs: PairSelection,
) -> StretchReport {
    let n = g.n();
    let limit = default_step_limit(g);
    let chosen: Vec<(usize, usize)> = match pairs {
        PairSelection::All => (0..n)
            .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
            .collect(),
        PairSelection::Sample { count, seed } => {
            if n < 2 {
                Vec::new()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let s = rng.gen_range(0..n);
                        let mut t = rng.gen_range(0..n - 1);
                        if t >= s {
                            t += 1;
                        }
                        (s, t)
                    })
                    .collect()
            }
        }
    };
    let pairs = chosen
        .into_iter()
        .map(|(s, t)| {
            let trace = simulate(g, scheme, g.id(s), g.id(t), limit);
            PairRecord {
                s: g.id(s),
                t: g.id(t),
                delta: oracle.dist(s, t),
                realized: trace.delivered().then_some(trace.total_length),
                outcome: trace.outcome.label(),
            }
        })
        .collect();
    StretchReport { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    /// Shortest-path routing straight from the oracle.
    struct Exact<'a> {
        g: &'a WeightedGraph,
        o: &'a DistanceOracle,
    }

    impl RoutingScheme for Exact<'_> {
        type Header = NodeId;
        fn header_for(&self, _s: NodeId, t: NodeId) -> Result<NodeId, ForwardError> {
            Ok(t)
        }
        fn forward(&self, at: NodeId, t: &NodeId) -> Result<Decision<NodeId>, ForwardError> {
            let (a, b) = (self.g.index_of(at).unwrap(), self.g.index_of(*t).unwrap());
            Ok(match self.o.next_min(a, b) {
                None => Decision::Deliver,
                Some(p) => Decision::Forward(p, *t),
            })
        }
        fn header_bits(&self, _h: &NodeId) -> usize {
            64
        }
        fn max_header_bits(&self) -> usize {
            64
        }
    }

    /// Always bounces back through port 1.
    struct Bounce;

    impl RoutingScheme for Bounce {
        type Header = u8;
        fn header_for(&self, _s: NodeId, _t: NodeId) -> Result<u8, ForwardError> {
            Ok(0)
        }
        fn forward(&self, _at: NodeId, h: &u8) -> Result<Decision<u8>, ForwardError> {
            Ok(Decision::Forward(Port(1), *h))
        }
        fn header_bits(&self, _h: &u8) -> usize {
            8
        }
        fn max_header_bits(&self) -> usize {
            8
        }
    }

    fn path3() -> WeightedGraph {
        WeightedGraph::new([], &[Edge::new(1, 2, 1), Edge::new(2, 3, 1)], &[]).unwrap()
    }

    #[test]
    fn source_equals_target_is_delivered_immediately() {
        let g = path3();
        let o = DistanceOracle::build(&g);
        let tr = simulate(&g, &Exact { g: &g, o: &o }, NodeId(2), NodeId(2), 9);
        assert!(tr.delivered());
        assert!(tr.hops.is_empty());
        assert_eq!(tr.total_length, 0);
    }

    #[test]
    fn exact_routing_on_a_path() {
        let g = path3();
        let o = DistanceOracle::build(&g);
        let tr = simulate(&g, &Exact { g: &g, o: &o }, NodeId(1), NodeId(3), 9);
        assert!(tr.delivered());
        assert_eq!(tr.total_length, 2);
        assert_eq!(tr.nodes(), alloc::vec![NodeId(1), NodeId(2), NodeId(3)]);
        let rep = measure_stretch(&g, &o, &Exact { g: &g, o: &o }, PairSelection::All);
        assert_eq!(rep.pairs.len(), 6);
        assert_eq!(rep.max_ratio_exact(), Some((1, 1)));
        assert!(rep.within(1, 1));
    }

    #[test]
    fn bouncing_is_a_loop() {
        let g = path3();
        let tr = simulate(&g, &Bounce, NodeId(1), NodeId(3), 100);
        assert_eq!(tr.outcome, Outcome::LoopDetected);
        assert_eq!(tr.nodes().first(), Some(&NodeId(1)));
    }

    #[test]
    fn histogram_and_quantiles() {
        let rep = StretchReport {
            pairs: alloc::vec![
                PairRecord { s: NodeId(0), t: NodeId(1), delta: 2, realized: Some(2), outcome: "delivered" },
                PairRecord { s: NodeId(0), t: NodeId(2), delta: 2, realized: Some(5), outcome: "delivered" },
                PairRecord { s: NodeId(1), t: NodeId(2), delta: 1, realized: None, outcome: "loop-detected" },
            ],
        };
        assert_eq!(rep.histogram(&[1.5, 3.0]), alloc::vec![1, 1, 0]);
        assert_eq!(rep.quantile(1.0), Some(2.5));
        assert_eq!(rep.max_ratio_exact(), Some((5, 2)));
        assert!(!rep.all_delivered());
        assert!(rep.within(5, 2));
        assert!(!rep.within(2, 1));
    }
}
