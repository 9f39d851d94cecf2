use certroute::experiment::{run, ExperimentConfig, SchemeKind};
use certroute::graph_io::{parse_graph, write_graph};
use certroute::report::{Campaign, ExperimentReport};
use certroute::text::Canonical;
use certroute_core::generate::{generate_graph, GenParams, GraphKind};
use certroute_core::hk::{build_hk, HkTable};
use certroute_core::tz::{build_tz, TzTable};
use certroute_core::{DistanceOracle, Edge, NodeId, Port, PortOverride, WeightedGraph};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_files_round_trip(n in 1usize..40, seed: u64, hi in 1u64..100) {
        let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, hi), seed }).unwrap();
        let text = write_graph(&g);
        prop_assert_eq!(&parse_graph(&text).unwrap(), &g);
        prop_assert_eq!(write_graph(&parse_graph(&text).unwrap()), text);
    }

    #[test]
    fn reversed_ports_survive_a_round_trip(n in 3usize..12) {
        let edges: Vec<Edge> = (1..n as u64).map(|i| Edge::new(0, i, i)).collect();
        let overrides: Vec<PortOverride> = (1..n as u64)
            .map(|i| PortOverride { node: NodeId(0), neighbor: NodeId(i), port: Port(n as u32 - i as u32) })
            .collect();
        let g = WeightedGraph::new([], &edges, &overrides).unwrap();
        prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn tables_round_trip(n in 2usize..30, seed: u64) {
        let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap();
        let o = DistanceOracle::build(&g);
        for t in &build_tz(&g, &o, seed).unwrap().tables {
            prop_assert_eq!(&TzTable::from_text(&t.to_text()).unwrap(), t);
        }
        for t in &build_hk(&g, &o, 3, seed).unwrap().tables {
            prop_assert_eq!(&HkTable::from_text(&t.to_text()).unwrap(), t);
        }
    }
}

#[test]
fn report_records_round_trip() {
    for scheme in [SchemeKind::Tz, SchemeKind::Ni, SchemeKind::Hk] {
        let mut cfg = ExperimentConfig::new(scheme, 24, 5);
        cfg.mutations = 12;
        cfg.trials = 3;
        cfg.dir_mutations = 2;
        let r = run(&cfg).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(ExperimentReport::from_record(&r.to_record()).unwrap(), r);
    }
}

#[test]
fn empty_campaign_has_only_its_header() {
    let mut cfg = ExperimentConfig::new(SchemeKind::Tz, 10, 2);
    cfg.mutations = 0;
    let r = run(&cfg).unwrap();
    assert_eq!(r.campaign, Campaign { seed: r.campaign.seed, rows: vec![] });
    let text = r.to_text();
    assert!(text.contains("campaign seed=") && text.contains("mutations=0"));
    assert!(!text.contains("\nrow "));
}

#[test]
fn reports_are_deterministic() {
    let cfg = ExperimentConfig::new(SchemeKind::Hk, 20, 9);
    assert_eq!(run(&cfg).unwrap().to_text(), run(&cfg).unwrap().to_text());
}
