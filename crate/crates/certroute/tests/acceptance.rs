//! One line per acceptance criterion, then a single assertion over all of them.

use std::time::Instant;

use certroute::report::escape_bound;
use certroute_core::adversary::*;
use certroute_core::fingerprint::{BitString, HashFamily};
use certroute_core::fixture::{run_fixture, FixtureName};
use certroute_core::generate::{generate_graph, GenParams, GraphKind};
use certroute_core::hk::{build_hk, compute_hk_sets};
use certroute_core::hk_cert::{hk_prove, hk_verify};
use certroute_core::ni::{build_ni, NiParams};
use certroute_core::ni_cert::ni_prove;
use certroute_core::params::{landmark_bound, log2_ceil, sqrt_ceil, DEFAULT_BALL_FACTOR, DEFAULT_COLOR_BALANCE};
use certroute_core::sim::{measure_stretch, PairSelection};
use certroute_core::tz::{build_tz, compute_bunch_cluster, LandmarkSet};
use certroute_core::{DistanceOracle, Verdict, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 4] = [16, 64, 128, 256];
const GRAPHS: u64 = 20;

struct Suite {
    graphs: Vec<(usize, u64, WeightedGraph, DistanceOracle)>,
}

impl Suite {
    fn new() -> Self {
        let graphs = SIZES
            .iter()
            .flat_map(|&n| (0..GRAPHS).map(move |i| (n, 1000 * n as u64 + i)))
            .map(|(n, seed)| {
                let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap();
                let o = DistanceOracle::build(&g);
                (n, seed, g, o)
            })
            .collect();
        Suite { graphs }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn all_accept(v: &[Verdict]) -> bool {
    v.iter().all(Verdict::is_accept)
}

fn fmt_ratio(r: Option<(u64, u64)>) -> String {
    r.map_or("-".into(), |(a, b)| format!("{a}/{b}"))
}

fn worse(a: Option<(u64, u64)>, b: Option<(u64, u64)>) -> Option<(u64, u64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x.0 as u128 * y.1 as u128 >= y.0 as u128 * x.1 as u128 { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn tz_stretch(s: &Suite) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut worst = None;
    for (_, seed, g, o) in &s.graphs {
        let tz = build_tz(g, o, *seed).unwrap();
        let r = measure_stretch(g, o, &tz.router(), PairSelection::All);
        pass &= r.all_delivered() && r.within(3, 1);
        worst = worse(worst, r.max_ratio_exact());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome { pass: pass && secs < 60.0, detail: format!("max {} in {secs:.1}s", fmt_ratio(worst)) }
}

fn tz_certification(s: &Suite) -> Outcome {
    let mut complete = true;
    let mut per_n = std::collections::BTreeMap::<usize, (usize, usize)>::new();
    for (n, seed, g, o) in &s.graphs {
        let tz = build_tz(g, o, *seed).unwrap();
        let certs = tz_prove(g, o, &tz.tables);
        complete &= all_accept(&tz_verify(g, &tz.tables, &certs));
        let mut rng = campaign_rng(*seed);
        let muts = sample(25, &mut rng, |r| tz_table_mutation(g, &tz.tables, r));
        let rows = tz_campaign(g, o, &tz.tables, &certs, &muts, &[]);
        let e = per_n.entry(*n).or_default();
        e.0 += muts.len();
        e.1 += rows.iter().filter(|r| r.escaped()).count();
    }
    let enough = per_n.values().all(|&(m, _)| m >= 500);
    let escapes: usize = per_n.values().map(|&(_, e)| e).sum();
    let counts: Vec<String> = per_n.iter().map(|(n, (m, e))| format!("n={n}:{m}/{e}")).collect();
    Outcome {
        pass: complete && enough && escapes == 0,
        detail: format!("complete={complete} mutations/escapes {}", counts.join(" ")),
    }
}

fn tz_prove(g: &WeightedGraph, o: &DistanceOracle, t: &[certroute_core::tz::TzTable]) -> Vec<certroute_core::tz_cert::TzCertificate> {
    certroute_core::tz_cert::tz_prove(g, o, t)
}

fn tz_verify(
    g: &WeightedGraph,
    t: &[certroute_core::tz::TzTable],
    c: &[certroute_core::tz_cert::TzCertificate],
) -> Vec<Verdict> {
    certroute_core::tz_cert::tz_verify(g, t, c)
}

fn ni_stretch(s: &Suite) -> Outcome {
    let mut pass = true;
    let (mut plain, mut hs) = (None, None);
    for (_, seed, g, o) in &s.graphs {
        let ni = build_ni(g, o, NiParams::default(), *seed).unwrap();
        let a = measure_stretch(g, o, &ni.router(false), PairSelection::All);
        let b = measure_stretch(g, o, &ni.router(true), PairSelection::All);
        pass &= a.all_delivered() && b.all_delivered() && a.within(5, 1) && b.within(3, 1);
        plain = worse(plain, a.max_ratio_exact());
        hs = worse(hs, b.max_ratio_exact());
    }
    Outcome { pass, detail: format!("plain max {} handshake max {}", fmt_ratio(plain), fmt_ratio(hs)) }
}

fn ni_soundness() -> Outcome {
    let n = 64;
    let seed = 64_000;
    let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap();
    let o = DistanceOracle::build(&g);
    let params = NiParams { beta: 2, ..NiParams::default() };
    let ni = build_ni(&g, &o, params, seed).unwrap();
    let certs = ni_prove(&g, &o, &ni.tables, &ni.params, seed);
    let mut rng = campaign_rng(seed);

    let dir = sample(50, &mut rng, |r| ni_dir_mutation(&g, &ni.tables, r));
    let rows = ni_dir_trials(&g, &ni, &certs, &dir, 1..=200);
    let trials: u64 = rows.iter().map(|r| r.trials as u64).sum();
    let escapes: u64 = rows.iter().map(|r| r.escapes as u64).sum();
    let bound = escape_bound(n, 2, trials);
    let rate = escapes as f64 / trials as f64;

    let muts = sample(300, &mut rng, |r| ni_table_mutation(&g, &ni.tables, r));
    let mut forged = sample(100, &mut rng, |r| ni_cert_mutation(&certs, r));
    forged.extend((0..20).map(|i| ni_family_substitution(&certs, &ni.directories, rng.gen_range(0..n), 10_000 + i)));
    let det = ni_campaign(&g, &o, &ni, &certs, &muts, &forged);
    let det_escapes = det.iter().filter(|r| r.escaped()).count();
    Outcome {
        pass: dir.len() >= 50 && trials >= 50 * 200 && rate <= bound && det_escapes == 0,
        detail: format!(
            "dir {} mutations, {escapes}/{trials} escapes, rate {rate:.6} <= {bound:.6}; other {} rows, {det_escapes} escapes",
            dir.len(),
            det.len()
        ),
    }
}

fn collision_rate() -> Outcome {
    let trials = 10_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut hits = 0;
    for seed in 0..trials {
        let len = rng.gen_range(1..=640);
        let mut a = BitString::zeros(len);
        let mut b = BitString::zeros(len);
        for i in 0..len {
            a.set(i, rng.gen());
            b.set(i, rng.gen());
        }
        if a == b {
            b.set(0, !b.get(0));
        }
        let f = HashFamily::draw(1, len, seed);
        hits += (f.eval(0, &a) == f.eval(0, &b)) as u64;
    }
    let rate = hits as f64 / trials as f64;
    Outcome { pass: (rate - 0.5).abs() <= 0.05, detail: format!("rate {rate:.4} over {trials}") }
}

fn sizes() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    // Entry budgets per sqrt(n) log2(n): landmarks (2) plus cluster (at most 1) for
    // the stretch-3 scheme; the name-independent one adds the ball (4 ln 2) and
    // its directory (the class bound).
    let tz_c = 3.0;
    let ni_c = tz_c + DEFAULT_BALL_FACTOR * std::f64::consts::LN_2 + DEFAULT_COLOR_BALANCE as f64;
    for n in [64usize, 256, 1024] {
        let seed = 7 * n as u64;
        let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap();
        let o = DistanceOracle::build(&g);
        let scale = sqrt_ceil(n) as f64 * log2_ceil(n) as f64;
        let tz = build_tz(&g, &o, seed).unwrap();
        let ni = build_ni(&g, &o, NiParams::default(), seed).unwrap();
        let tz_r = tz.max_entries() as f64 / scale;
        let ni_r = ni.max_entries() as f64 / scale;
        let root = (n as f64).sqrt();
        let max_cluster = tz.clusters.iter().chain(&ni.clusters).map(Vec::len).max().unwrap();
        let landmarks = tz.landmarks.len().max(ni.landmarks.len());
        pass &= tz_r <= tz_c && ni_r <= ni_c && (max_cluster as f64) < 4.0 * root && landmarks <= landmark_bound(n);
        parts.push(format!("n={n} tz {tz_r:.2} ni {ni_r:.2} cluster {max_cluster} |L| {landmarks}"));
    }
    Outcome { pass, detail: format!("{} (limits {tz_c:.2}, {ni_c:.2})", parts.join("; ")) }
}

fn fixtures() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in FixtureName::ALL {
        let run = run_fixture(&certroute_core::fixture::build_fixture(name));
        pass &= run.audit_ok() && run.passed();
        parts.push(format!("{} {}", name.code(), run.summary()));
    }
    let s7 = run_fixture(&certroute_core::fixture::stretch7());
    pass &= s7.route_length() == Some(7 * s7.delta);
    let h5 = run_fixture(&certroute_core::fixture::handshake5());
    pass &= h5.route_length() == Some(500);
    Outcome { pass, detail: parts.join("; ") }
}

fn hierarchical() -> Outcome {
    let n = 64;
    let seed = 64_001;
    let g = generate_graph(&GenParams { kind: GraphKind::RandomConnected, n, weights: (1, 10), seed }).unwrap();
    let o = DistanceOracle::build(&g);
    let hk = build_hk(&g, &o, 3, seed).unwrap();
    let plain = measure_stretch(&g, &o, &hk.router(false), PairSelection::All);
    let hs = measure_stretch(&g, &o, &hk.router(true), PairSelection::All);
    let stretch_ok = plain.all_delivered() && hs.all_delivered() && plain.within(7, 1) && hs.within(5, 1);

    let tz = build_tz(&g, &o, seed).unwrap();
    let hk2 = build_hk(&g, &o, 2, seed).unwrap();
    let ls = LandmarkSet::from_members(&o, hk2.hierarchy.top().to_vec());
    let (tb, tc) = compute_bunch_cluster(&o, &ls);
    let (hb, hc) = compute_hk_sets(&o, &hk2.hierarchy);
    let with_top = |s: &[usize]| {
        let mut s: Vec<usize> = s.iter().chain(hk2.hierarchy.top()).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let sets_ok = tz.landmarks == ls
        && (0..n).all(|v| hb[v] == with_top(&tb[v]) && hc[v] == with_top(&tc[v]) && tc[v] == tz.clusters[v]);
    let tz_r = measure_stretch(&g, &o, &tz.router(), PairSelection::All);
    let hk2_r = measure_stretch(&g, &o, &hk2.router(false), PairSelection::All);
    let k2_ok = sets_ok && tz_r.within(3, 1) && hk2_r.all_delivered() && hk2_r.within(3, 1);

    let certs = hk_prove(&g, &o, &hk.tables);
    let complete = all_accept(&hk_verify(&g, &hk.tables, &certs, 3));
    let mut rng = campaign_rng(seed);
    let muts = sample(200, &mut rng, |r| hk_table_mutation(&g, &hk.tables, r));
    let forged = sample(50, &mut rng, |r| hk_cert_mutation(&certs, r));
    let rows = hk_campaign(&g, &o, 3, &hk.tables, &certs, &muts, &forged);
    let escapes = rows.iter().filter(|r| r.escaped()).count();
    Outcome {
        pass: stretch_ok && k2_ok && complete && muts.len() == 200 && escapes == 0,
        detail: format!(
            "k=3 plain {} handshake {}; k=2 sets {sets_ok} tz {} hk {}; complete={complete}; {} rows {escapes} escapes",
            fmt_ratio(plain.max_ratio_exact()),
            fmt_ratio(hs.max_ratio_exact()),
            fmt_ratio(tz_r.max_ratio_exact()),
            fmt_ratio(hk2_r.max_ratio_exact()),
            rows.len()
        ),
    }
}

fn lemmas(s: &Suite) -> Outcome {
    let mut failures = Vec::new();
    let mut graphs = 0;
    for (n, seed, g, o) in s.graphs.iter().filter(|(n, ..)| *n <= 128) {
        graphs += 1;
        let tz = build_tz(g, o, *seed).unwrap();
        let ls = &tz.landmarks;
        let (b, c) = (&tz.bunches, &tz.clusters);
        for v in 0..*n {
            for &u in &c[v] {
                let path = o.canonical_path(g, v, u);
                if path.iter().any(|&w| c[w].binary_search(&u).is_err()) {
                    failures.push(format!("cluster sub-path {seed}:{v}->{u}"));
                }
            }
            let l = ls.nearest[v];
            if o.canonical_path(g, v, l).iter().any(|&u| ls.nearest[u] != l) {
                failures.push(format!("l_u = l_v {seed}:{v}"));
            }
            if l != v {
                let first = o.next_min(l, v);
                if o.canonical_path(g, l, v).iter().skip(1).any(|&u| o.next_min(l, u) != first) {
                    failures.push(format!("next(l_v,u) = next(l_v,v) {seed}:{v}"));
                }
            }
            for u in 0..*n {
                if c[v].binary_search(&u).is_ok() != b[u].binary_search(&v).is_ok() {
                    failures.push(format!("duality {seed}:{v},{u}"));
                }
            }
        }
        for k in 2..=4 {
            let hk = build_hk(g, o, k, *seed).unwrap();
            let (hb, _) = compute_hk_sets(o, &hk.hierarchy);
            if hb.iter().any(|bv| hk.hierarchy.top().iter().any(|l| bv.binary_search(l).is_err())) {
                failures.push(format!("top in bunch {seed} k={k}"));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{graphs} graphs, {} violations {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    }
}

#[test]
fn acceptance() {
    let suite = Suite::new();
    let results = [
        ("1 tz stretch <= 3", tz_stretch(&suite)),
        ("2 tz completeness and soundness", tz_certification(&suite)),
        ("3 name-independent stretch <= 5 / <= 3", ni_stretch(&suite)),
        ("4 fingerprint soundness", ni_soundness()),
        ("5 fingerprint collision rate", collision_rate()),
        ("6 size scaling", sizes()),
        ("7 fixtures", fixtures()),
        ("8 hierarchical scheme", hierarchical()),
        ("9 structural lemmas", lemmas(&suite)),
    ];
    for (name, r) in &results {
        println!("{} criterion {name}: {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|(_, r)| !r.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
