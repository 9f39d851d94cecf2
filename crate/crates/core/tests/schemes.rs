mod common;

use std::collections::BTreeMap;

use certroute_core::hk::{build_hk, HkScheme};
use certroute_core::ni::{build_ni, build_ni_with_landmarks, NiParams};
use certroute_core::sim::{measure_stretch, PairSelection};
use certroute_core::tree::tree_forward;
use certroute_core::tz::{build_tz, LandmarkSet};
use certroute_core::{DistanceOracle, NodeId, WeightedGraph};
use proptest::prelude::*;

fn tree_members(s: &HkScheme) -> BTreeMap<NodeId, Vec<usize>> {
    let mut out: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (v, t) in s.tables.iter().enumerate() {
        for &w in t.trees.keys() {
            out.entry(w).or_default().push(v);
        }
    }
    out
}

fn check_trees(g: &WeightedGraph, o: &DistanceOracle, s: &HkScheme) {
    for (w, members) in tree_members(s) {
        let root = g.index_of(w).unwrap();
        let mut labels: Vec<u32> = members.iter().map(|&v| s.tables[v].trees[&w].label).collect();
        labels.sort_unstable();
        assert_eq!(labels, (0..members.len() as u32).collect::<Vec<_>>());
        let by_label: BTreeMap<u32, usize> = members.iter().map(|&v| (s.tables[v].trees[&w].label, v)).collect();
        for &from in &members {
            for (&label, &to) in &by_label {
                let mut at = from;
                let mut len = 0;
                while let Some(p) = tree_forward(&s.tables[at].trees[&w], label).unwrap() {
                    let inc = g.via_port(at, p).unwrap();
                    len += inc.weight;
                    at = inc.neighbor;
                }
                assert_eq!(at, to);
                if to == root {
                    assert_eq!(len, o.dist(from, root));
                }
            }
        }
    }
}

#[test]
fn tz_stretch_is_at_most_three() {
    for n in [16, 64] {
        for (seed, g) in common::suite(n, 5) {
            let o = DistanceOracle::build(&g);
            let s = build_tz(&g, &o, seed).unwrap();
            let r = measure_stretch(&g, &o, &s.router(), PairSelection::All);
            assert!(r.all_delivered());
            assert!(r.within(3, 1), "{:?}", r.max_ratio_exact());
        }
    }
}

#[test]
fn ni_stretch_is_at_most_five_and_three_with_handshake() {
    for n in [16, 64] {
        for (seed, g) in common::suite(n, 5) {
            let o = DistanceOracle::build(&g);
            let s = build_ni(&g, &o, NiParams::default(), seed).unwrap();
            let plain = measure_stretch(&g, &o, &s.router(false), PairSelection::All);
            let hs = measure_stretch(&g, &o, &s.router(true), PairSelection::All);
            assert!(plain.all_delivered() && hs.all_delivered());
            assert!(plain.within(5, 1), "{:?}", plain.max_ratio_exact());
            assert!(hs.within(3, 1), "{:?}", hs.max_ratio_exact());
        }
    }
}

#[test]
fn hk_stretch_and_trees_at_k3() {
    for (seed, g) in common::suite(64, 3) {
        let o = DistanceOracle::build(&g);
        let s = build_hk(&g, &o, 3, seed).unwrap();
        check_trees(&g, &o, &s);
        let plain = measure_stretch(&g, &o, &s.router(false), PairSelection::All);
        let hs = measure_stretch(&g, &o, &s.router(true), PairSelection::All);
        assert!(plain.all_delivered() && hs.all_delivered());
        assert!(plain.within(7, 1), "{:?}", plain.max_ratio_exact());
        assert!(hs.within(5, 1), "{:?}", hs.max_ratio_exact());
    }
}

#[test]
fn hk_with_two_levels_shares_landmarks_with_tz() {
    for (seed, g) in common::suite(64, 5) {
        let o = DistanceOracle::build(&g);
        let tz = build_tz(&g, &o, seed).unwrap();
        let hk = build_hk(&g, &o, 2, seed).unwrap();
        assert_eq!(hk.hierarchy.top(), &tz.landmarks.members[..]);
        let a = measure_stretch(&g, &o, &tz.router(), PairSelection::All);
        let b = measure_stretch(&g, &o, &hk.router(false), PairSelection::All);
        assert!(a.within(3, 1) && b.within(3, 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_scheme_delivers_within_its_bound(n in 2usize..40, seed: u64, k in 2u32..5) {
        let g = common::random_graph(n, seed);
        let o = DistanceOracle::build(&g);
        let tz = build_tz(&g, &o, seed).unwrap();
        let r = measure_stretch(&g, &o, &tz.router(), PairSelection::All);
        prop_assert!(r.all_delivered() && r.within(3, 1));

        let hk = build_hk(&g, &o, k, seed).unwrap();
        let plain = measure_stretch(&g, &o, &hk.router(false), PairSelection::All);
        let hs = measure_stretch(&g, &o, &hk.router(true), PairSelection::All);
        prop_assert!(plain.all_delivered() && plain.within(4 * k as u64 - 5, 1));
        prop_assert!(hs.all_delivered() && hs.within(2 * k as u64 - 1, 1));
        check_trees(&g, &o, &hk);
    }

    #[test]
    fn colored_routing_stays_within_bounds(n in 12usize..48, seed: u64, a in 0usize..1000, b in 0usize..1000) {
        let g = common::random_graph(n, seed);
        let o = DistanceOracle::build(&g);
        let ls = LandmarkSet::from_members(&o, [a % n, b % n]);
        let params = NiParams { ball_factor: 1.0, ..NiParams::default() };
        let s = build_ni_with_landmarks(&g, &o, params, ls, seed);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let plain = measure_stretch(&g, &o, &s.router(false), PairSelection::All);
        let hs = measure_stretch(&g, &o, &s.router(true), PairSelection::All);
        prop_assert!(plain.all_delivered() && plain.within(5, 1));
        prop_assert!(hs.all_delivered() && hs.within(3, 1));
    }
}
