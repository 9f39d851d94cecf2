//! Deterministic graph generators.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, GraphError, NodeId, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    RandomConnected,
    Grid,
    Ring,
    Star,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::RandomConnected => "random-connected",
            GraphKind::Grid => "grid",
            GraphKind::Ring => "ring",
            GraphKind::Star => "star",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random-connected" | "random" => Some(GraphKind::RandomConnected),
            "grid" => Some(GraphKind::Grid),
            "ring" => Some(GraphKind::Ring),
            "star" => Some(GraphKind::Star),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub kind: GraphKind,
    pub n: usize,
    /// Inclusive weight range.
    pub weights: (u64, u64),
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenError {
    NoNodes,
    BadWeightRange(u64, u64),
    Graph(GraphError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::NoNodes => write!(f, "n must be at least 1"),
            GenError::BadWeightRange(lo, hi) => {
                write!(f, "weight range [{lo}, {hi}] is not within the positive integers")
            }
            GenError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GenError {}

/// Generates a connected graph with ids `0..n`. Output is a pure function
/// of `params`.
pub fn generate_graph(params: &GenParams) -> Result<WeightedGraph, GenError> {
    let GenParams { kind, n, weights: (lo, hi), seed } = *params;
    if n == 0 {
        return Err(GenError::NoNodes);
    }
    if lo == 0 || lo > hi {
        return Err(GenError::BadWeightRange(lo, hi));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let n64 = n as u64;
    match kind {
        GraphKind::Ring => {
            if n == 2 {
                pairs.push((0, 1));
            } else if n > 2 {
                pairs.extend((0..n64).map(|i| (i, (i + 1) % n64)));
            }
        }
        GraphKind::Star => pairs.extend((1..n64).map(|i| (0, i))),
        GraphKind::Grid => {
            let cols = ceil_sqrt(n) as u64;
            for i in 0..n64 {
                if (i + 1) % cols != 0 && i + 1 < n64 {
                    pairs.push((i, i + 1));
                }
                if i + cols < n64 {
                    pairs.push((i, i + cols));
                }
            }
        }
        GraphKind::RandomConnected => {
            // random recursive tree over a shuffled order, plus n extra chords
            let mut order: Vec<u64> = (0..n64).collect();
            for i in (1..order.len()).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut present = alloc::collections::BTreeSet::new();
            for i in 1..n {
                let j = rng.gen_range(0..i);
                let (a, b) = (order[i], order[j]);
                present.insert((a.min(b), a.max(b)));
                pairs.push((a, b));
            }
            if n >= 3 {
                let max_edges = n * (n - 1) / 2;
                let extra = n.min(max_edges - (n - 1));
                let mut added = 0;
                while added < extra {
                    let a = rng.gen_range(0..n64);
                    let b = rng.gen_range(0..n64);
                    if a == b || !present.insert((a.min(b), a.max(b))) {
                        continue;
                    }
                    pairs.push((a, b));
                    added += 1;
                }
            }
        }
    }
    let edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(a, b)| Edge::new(a, b, rng.gen_range(lo..=hi)))
        .collect();
    WeightedGraph::new((0..n64).map(NodeId), &edges, &[]).map_err(GenError::Graph)
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r < n {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r.max(1)
}
