#![allow(dead_code)]

use certroute_core::generate::{generate_graph, GenParams, GraphKind};
use certroute_core::WeightedGraph;

pub fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap()
}

/// Plain O(n^3) all-pairs distances over dense indices.
pub fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<u64>> {
    let n = g.n();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
        for inc in g.incident(v) {
            row[inc.neighbor] = row[inc.neighbor].min(inc.weight);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Graph seeds of the test suite for size `n`.
pub fn suite(n: usize, count: u64) -> impl Iterator<Item = (u64, WeightedGraph)> {
    (0..count).map(move |i| {
        let seed = 1000 * n as u64 + i;
        (seed, random_graph(n, seed))
    })
}
