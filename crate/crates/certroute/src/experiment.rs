//! One experiment: build a scheme on a generated graph, certify it, measure
//! stretch, tamper with it, and collect everything into a report.

use certroute_core::adversary::{
    campaign_rng, hk_campaign, hk_cert_mutation, hk_table_mutation, ni_campaign, ni_cert_mutation,
    ni_dir_mutation, ni_dir_trials, ni_table_mutation, sample, tz_campaign, tz_cert_mutation, tz_table_mutation,
    CampaignRow,
};
use certroute_core::generate::{generate_graph, GenParams, GraphKind};
use certroute_core::hk::build_hk;
use certroute_core::hk_cert::{hk_prove, hk_verify};
use certroute_core::ni::{build_ni, NiParams};
use certroute_core::ni_cert::{ni_prove, ni_verify};
use certroute_core::params::log2_ceil;
use certroute_core::sim::{measure_stretch, PairSelection};
use certroute_core::tz::build_tz;
use certroute_core::tz_cert::{tz_prove, tz_verify};
use certroute_core::{DistanceOracle, Verdict, WeightedGraph};

use crate::error::Error;
use crate::report::{
    Campaign, DirTrials, ExperimentReport, GraphInfo, Rejection, Row, SizeStat, Sizes, StretchStats, Verification,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeKind {
    Tz,
    Ni,
    Hk,
}

impl SchemeKind {
    pub fn code(self) -> &'static str {
        match self {
            SchemeKind::Tz => "tz",
            SchemeKind::Ni => "ni",
            SchemeKind::Hk => "hk",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub kind: GraphKind,
    pub n: usize,
    pub seed: u64,
    pub weights: (u64, u64),
    /// Hierarchy depth.
    pub k: u32,
    pub beta: u32,
    /// Sampled table mutations; a quarter as many certificate forgeries are added.
    pub mutations: usize,
    /// Hash family draws per directory mutation; 0 skips the directory trials.
    pub trials: u32,
    pub dir_mutations: usize,
    pub pairs: PairSelection,
}

impl ExperimentConfig {
    pub fn new(scheme: SchemeKind, n: usize, seed: u64) -> Self {
        ExperimentConfig {
            scheme,
            kind: GraphKind::RandomConnected,
            n,
            seed,
            weights: (1, 10),
            k: 3,
            beta: certroute_core::params::DEFAULT_BETA,
            mutations: 100,
            trials: 0,
            dir_mutations: 50,
            pairs: PairSelection::All,
        }
    }

    pub fn graph(&self) -> Result<WeightedGraph, Error> {
        Ok(generate_graph(&GenParams { kind: self.kind, n: self.n, weights: self.weights, seed: self.seed })?)
    }

    pub fn ni_params(&self) -> NiParams {
        NiParams { beta: self.beta, ..NiParams::default() }
    }
}

fn verification(g: &WeightedGraph, verdicts: &[Verdict]) -> Verification {
    let rejections = verdicts
        .iter()
        .enumerate()
        .filter_map(|(i, v)| match v {
            Verdict::Accept => None,
            Verdict::Reject { step, witness } => Some(Rejection {
                node: g.id(i).0,
                step: step.to_string(),
                reason: witness.reason.code().to_string(),
            }),
        })
        .collect();
    Verification { nodes: verdicts.len(), accepted: verdicts.iter().filter(|v| v.is_accept()).count(), rejections }
}

fn campaign(seed: u64, rows: &[CampaignRow]) -> Campaign {
    Campaign { seed, rows: rows.iter().map(Row::from).collect() }
}

fn per_root_log(n: usize, entries: usize) -> f64 {
    let scale = (n as f64).sqrt() * (log2_ceil(n).max(1) as f64);
    entries as f64 / scale
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, Error> {
    let g = cfg.graph()?;
    run_on(cfg, &g)
}

/// Runs on a given graph; `cfg.n` and `cfg.kind` only label the report.
pub fn run_on(cfg: &ExperimentConfig, g: &WeightedGraph) -> Result<ExperimentReport, Error> {
    let o = DistanceOracle::build(g);
    let n = g.n();
    let mseed = cfg.seed ^ 0x5eed;
    let mut rng = campaign_rng(mseed);
    let forged = cfg.mutations / 4;
    let info = GraphInfo {
        kind: cfg.kind.name().to_string(),
        n,
        m: g.edge_count(),
        seed: cfg.seed,
        weights: cfg.weights,
    };
    let mut report = ExperimentReport {
        scheme: cfg.scheme.code().to_string(),
        graph: info,
        k: None,
        beta: None,
        sizes: Sizes::default(),
        stretch: Vec::new(),
        verification: Verification::default(),
        campaign: Campaign::default(),
        dir_trials: None,
    };
    match cfg.scheme {
        SchemeKind::Tz => {
            let s = build_tz(g, &o, cfg.seed)?;
            let certs = tz_prove(g, &o, &s.tables);
            report.sizes = Sizes {
                table_entries: SizeStat::of(s.tables.iter().map(|t| t.entry_count())),
                table_bits: SizeStat::of(s.tables.iter().map(|t| t.bits())),
                cert_entries: SizeStat::of(certs.iter().map(|c| c.entry_count())),
                cert_bits: SizeStat::of(certs.iter().map(|c| c.bits())),
                landmarks: s.landmarks.len(),
                max_cluster: s.clusters.iter().map(Vec::len).max().unwrap_or(0),
                entries_per_root_log: per_root_log(n, s.max_entries()),
            };
            let r = measure_stretch(g, &o, &s.router(), cfg.pairs);
            report.stretch.push(StretchStats::of("plain", &r, 3));
            report.verification = verification(g, &tz_verify(g, &s.tables, &certs));
            let muts = sample(cfg.mutations, &mut rng, |r| tz_table_mutation(g, &s.tables, r));
            let fs = sample(forged, &mut rng, |r| tz_cert_mutation(&certs, r));
            report.campaign = campaign(mseed, &tz_campaign(g, &o, &s.tables, &certs, &muts, &fs));
        }
        SchemeKind::Ni => {
            let s = build_ni(g, &o, cfg.ni_params(), cfg.seed)?;
            let certs = ni_prove(g, &o, &s.tables, &s.params, cfg.seed);
            report.beta = Some(cfg.beta);
            report.sizes = Sizes {
                table_entries: SizeStat::of(s.tables.iter().map(|t| t.entry_count())),
                table_bits: SizeStat::of(s.tables.iter().map(|t| t.bits())),
                cert_entries: SizeStat::of(certs.iter().map(|c| c.entry_count())),
                cert_bits: SizeStat::of(certs.iter().map(|c| c.bits())),
                landmarks: s.landmarks.len(),
                max_cluster: s.clusters.iter().map(Vec::len).max().unwrap_or(0),
                entries_per_root_log: per_root_log(n, s.max_entries()),
            };
            let plain = measure_stretch(g, &o, &s.router(false), cfg.pairs);
            let hs = measure_stretch(g, &o, &s.router(true), cfg.pairs);
            report.stretch.push(StretchStats::of("plain", &plain, 5));
            report.stretch.push(StretchStats::of("handshake", &hs, 3));
            report.verification = verification(g, &ni_verify(g, &s.tables, &certs, &s.params));
            let muts = sample(cfg.mutations, &mut rng, |r| ni_table_mutation(g, &s.tables, r));
            let fs = sample(forged, &mut rng, |r| ni_cert_mutation(&certs, r));
            report.campaign = campaign(mseed, &ni_campaign(g, &o, &s, &certs, &muts, &fs));
            if cfg.trials > 0 {
                let dm = sample(cfg.dir_mutations, &mut rng, |r| ni_dir_mutation(g, &s.tables, r));
                let base = cfg.seed.wrapping_mul(1_000_003);
                let rows = ni_dir_trials(g, &s, &certs, &dm, (0..cfg.trials as u64).map(|i| base.wrapping_add(i + 1)));
                report.dir_trials = Some(DirTrials::of(&rows, n, cfg.beta));
            }
        }
        SchemeKind::Hk => {
            let s = build_hk(g, &o, cfg.k, cfg.seed)?;
            let certs = hk_prove(g, &o, &s.tables);
            let k = s.k();
            report.k = Some(k);
            report.sizes = Sizes {
                table_entries: SizeStat::of(s.tables.iter().map(|t| t.entry_count())),
                table_bits: SizeStat::of(s.tables.iter().map(|t| t.bits())),
                cert_entries: SizeStat::of(certs.iter().map(|c| c.entry_count())),
                cert_bits: SizeStat::of(certs.iter().map(|c| c.bits())),
                landmarks: s.hierarchy.top().len(),
                max_cluster: s.clusters.iter().map(Vec::len).max().unwrap_or(0),
                entries_per_root_log: per_root_log(n, s.max_entries()),
            };
            let plain = measure_stretch(g, &o, &s.router(false), cfg.pairs);
            let hs = measure_stretch(g, &o, &s.router(true), cfg.pairs);
            report.stretch.push(StretchStats::of("plain", &plain, 4 * k as u64 - 5));
            report.stretch.push(StretchStats::of("handshake", &hs, 2 * k as u64 - 1));
            report.verification = verification(g, &hk_verify(g, &s.tables, &certs, k));
            let muts = sample(cfg.mutations, &mut rng, |r| hk_table_mutation(g, &s.tables, r));
            let fs = sample(forged, &mut rng, |r| hk_cert_mutation(&certs, r));
            report.campaign = campaign(mseed, &hk_campaign(g, &o, k, &s.tables, &certs, &muts, &fs));
        }
    }
    Ok(report)
}

