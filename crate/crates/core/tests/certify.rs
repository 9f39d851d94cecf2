mod common;

use certroute_core::adversary::*;
use certroute_core::hk::build_hk;
use certroute_core::hk_cert::{hk_prove, hk_verify};
use certroute_core::ni::{build_ni, NiParams};
use certroute_core::ni_cert::{ni_prove, ni_verify};
use certroute_core::tz::build_tz;
use certroute_core::tz_cert::{tz_prove, tz_verify};
use certroute_core::{DistanceOracle, Verdict};
use proptest::prelude::*;

fn all_accept(v: &[Verdict]) -> bool {
    v.iter().all(Verdict::is_accept)
}

#[test]
fn honest_builds_are_accepted_everywhere() {
    for n in [16, 64] {
        for (seed, g) in common::suite(n, 5) {
            let o = DistanceOracle::build(&g);
            let tz = build_tz(&g, &o, seed).unwrap();
            assert!(all_accept(&tz_verify(&g, &tz.tables, &tz_prove(&g, &o, &tz.tables))));
            let ni = build_ni(&g, &o, NiParams::default(), seed).unwrap();
            let certs = ni_prove(&g, &o, &ni.tables, &ni.params, seed);
            assert!(all_accept(&ni_verify(&g, &ni.tables, &certs, &ni.params)));
            for k in 2..=3 {
                let hk = build_hk(&g, &o, k, seed).unwrap();
                assert!(all_accept(&hk_verify(&g, &hk.tables, &hk_prove(&g, &o, &hk.tables), k)));
            }
        }
    }
}

#[test]
fn every_single_field_tz_mutation_is_caught_on_small_graphs() {
    for (seed, g) in common::suite(12, 4) {
        let o = DistanceOracle::build(&g);
        let s = build_tz(&g, &o, seed).unwrap();
        let certs = tz_prove(&g, &o, &s.tables);
        let muts = tz_all_table_mutations(&g, &s.tables);
        assert!(muts.len() > 100);
        let rows = tz_campaign(&g, &o, &s.tables, &certs, &muts, &[]);
        let escaped: Vec<_> = rows.iter().filter(|r| r.escaped()).collect();
        assert!(escaped.is_empty(), "{escaped:?}");
    }
}

#[test]
fn directory_tampering_rarely_escapes() {
    let g = common::random_graph(64, 7);
    let o = DistanceOracle::build(&g);
    let s = build_ni(&g, &o, NiParams::default(), 7).unwrap();
    let certs = ni_prove(&g, &o, &s.tables, &s.params, 7);
    let mut rng = campaign_rng(11);
    let muts = sample(10, &mut rng, |r| ni_dir_mutation(&g, &s.tables, r));
    assert_eq!(muts.len(), 10);
    let rows = ni_dir_trials(&g, &s, &certs, &muts, 0..50);
    let escapes: u32 = rows.iter().map(|r| r.escapes).sum();
    assert_eq!(rows.iter().map(|r| r.trials).sum::<u32>(), 500);
    assert!(escapes <= 2, "{escapes} escapes");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_mutations_never_escape(n in 8usize..40, seed: u64, mseed: u64) {
        let g = common::random_graph(n, seed);
        let o = DistanceOracle::build(&g);
        let mut rng = campaign_rng(mseed);

        let tz = build_tz(&g, &o, seed).unwrap();
        let certs = tz_prove(&g, &o, &tz.tables);
        let muts = sample(30, &mut rng, |r| tz_table_mutation(&g, &tz.tables, r));
        let forged = sample(20, &mut rng, |r| tz_cert_mutation(&certs, r));
        let rows = tz_campaign(&g, &o, &tz.tables, &certs, &muts, &forged);
        prop_assert!(rows.iter().all(|r| !r.escaped()), "{:?}", rows.iter().find(|r| r.escaped()));

        let hk = build_hk(&g, &o, 3, seed).unwrap();
        let certs = hk_prove(&g, &o, &hk.tables);
        let muts = sample(30, &mut rng, |r| hk_table_mutation(&g, &hk.tables, r));
        let forged = sample(20, &mut rng, |r| hk_cert_mutation(&certs, r));
        let rows = hk_campaign(&g, &o, 3, &hk.tables, &certs, &muts, &forged);
        prop_assert!(rows.iter().all(|r| !r.escaped()), "{:?}", rows.iter().find(|r| r.escaped()));
    }

    #[test]
    fn deterministic_ni_mutations_never_escape(n in 8usize..40, seed: u64, mseed: u64) {
        let g = common::random_graph(n, seed);
        let o = DistanceOracle::build(&g);
        let s = build_ni(&g, &o, NiParams::default(), seed).unwrap();
        let certs = ni_prove(&g, &o, &s.tables, &s.params, seed);
        let mut rng = campaign_rng(mseed);
        let muts = sample(30, &mut rng, |r| ni_table_mutation(&g, &s.tables, r));
        let forged = sample(20, &mut rng, |r| ni_cert_mutation(&certs, r));
        let rows = ni_campaign(&g, &o, &s, &certs, &muts, &forged);
        prop_assert!(rows.iter().all(|r| !r.escaped()), "{:?}", rows.iter().find(|r| r.escaped()));
    }
}
