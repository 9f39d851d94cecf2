//! Experiment reports: a line-oriented text form and a JSON record form.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use certroute_core::adversary::{CampaignRow, DirTrialRow};
use certroute_core::sim::StretchReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub kind: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub weights: (u64, u64),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeStat {
    pub max: usize,
    pub mean: f64,
}

impl SizeStat {
    pub fn of(values: impl IntoIterator<Item = usize>) -> Self {
        let v: Vec<usize> = values.into_iter().collect();
        let max = v.iter().copied().max().unwrap_or(0);
        let mean = if v.is_empty() { 0.0 } else { v.iter().sum::<usize>() as f64 / v.len() as f64 };
        SizeStat { max, mean }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sizes {
    pub table_entries: SizeStat,
    pub table_bits: SizeStat,
    pub cert_entries: SizeStat,
    pub cert_bits: SizeStat,
    /// Top-level landmarks.
    pub landmarks: usize,
    pub max_cluster: usize,
    /// `max table entries / (sqrt(n) * log2 n)`.
    pub entries_per_root_log: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchStats {
    pub mode: String,
    pub pairs: usize,
    pub delivered: usize,
    /// Largest realized/delta as `(realized, delta)`.
    pub max: Option<(u64, u64)>,
    pub mean: Option<f64>,
    pub bound: u64,
}

impl StretchStats {
    pub fn of(mode: &str, r: &StretchReport, bound: u64) -> Self {
        StretchStats {
            mode: mode.to_string(),
            pairs: r.pairs.len(),
            delivered: r.pairs.iter().filter(|p| p.realized.is_some()).count(),
            max: r.max_ratio_exact(),
            mean: r.mean_ratio(),
            bound,
        }
    }

    pub fn holds(&self) -> bool {
        self.delivered == self.pairs && self.max.is_none_or(|(r, d)| r <= self.bound * d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub node: u64,
    pub step: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub nodes: usize,
    pub accepted: usize,
    pub rejections: Vec<Rejection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub node: u64,
    pub kind: String,
    pub path: String,
    pub mode: String,
    /// `None` is an escape.
    pub detected: Option<Rejection>,
}

impl From<&CampaignRow> for Row {
    fn from(r: &CampaignRow) -> Self {
        Row {
            node: r.node.0,
            kind: r.kind.code().to_string(),
            path: r.path.clone(),
            mode: r.mode.code().to_string(),
            detected: r.detected.map(|d| Rejection {
                node: d.node.0,
                step: d.step.to_string(),
                reason: d.reason.code().to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub seed: u64,
    pub rows: Vec<Row>,
}

impl Campaign {
    pub fn escapes(&self) -> usize {
        self.rows.iter().filter(|r| r.detected.is_none()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirTrials {
    pub mutations: usize,
    pub trials: u64,
    pub escapes: u64,
    /// `1/n^beta + 3 sigma` for `trials` Bernoulli draws.
    pub bound: f64,
    pub rows: Vec<(u64, String, String, u32, u32)>,
}

impl DirTrials {
    pub fn of(rows: &[DirTrialRow], n: usize, beta: u32) -> Self {
        let trials: u64 = rows.iter().map(|r| r.trials as u64).sum();
        let escapes: u64 = rows.iter().map(|r| r.escapes as u64).sum();
        DirTrials {
            mutations: rows.len(),
            trials,
            escapes,
            bound: escape_bound(n, beta, trials),
            rows: rows
                .iter()
                .map(|r| (r.node.0, r.kind.code().to_string(), r.path.clone(), r.trials, r.escapes))
                .collect(),
        }
    }

    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.escapes as f64 / self.trials as f64
        }
    }

    pub fn holds(&self) -> bool {
        self.rate() <= self.bound
    }
}

/// `p + 3 sqrt(p (1 - p) / trials)` with `p = n^-beta`.
pub fn escape_bound(n: usize, beta: u32, trials: u64) -> f64 {
    let p = (n as f64).powi(-(beta as i32));
    p + 3.0 * (p * (1.0 - p) / trials.max(1) as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scheme: String,
    pub graph: GraphInfo,
    pub k: Option<u32>,
    pub beta: Option<u32>,
    pub sizes: Sizes,
    pub stretch: Vec<StretchStats>,
    pub verification: Verification,
    pub campaign: Campaign,
    pub dir_trials: Option<DirTrials>,
}

impl ExperimentReport {
    /// Every bound holds, every honest node accepts, and nothing escaped
    /// beyond the allowed rate.
    pub fn passed(&self) -> bool {
        self.stretch.iter().all(StretchStats::holds)
            && self.verification.accepted == self.verification.nodes
            && self.campaign.escapes() == 0
            && self.dir_trials.as_ref().is_none_or(DirTrials::holds)
    }

    pub fn to_record(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_record(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let g = &self.graph;
        write!(o, "report {}", self.scheme).unwrap();
        if let Some(k) = self.k {
            write!(o, " k={k}").unwrap();
        }
        if let Some(b) = self.beta {
            write!(o, " beta={b}").unwrap();
        }
        writeln!(o).unwrap();
        writeln!(o, "graph {} n={} m={} seed={} weights={}..{}", g.kind, g.n, g.m, g.seed, g.weights.0, g.weights.1).unwrap();
        let s = &self.sizes;
        for (name, st) in [
            ("table-entries", &s.table_entries),
            ("table-bits", &s.table_bits),
            ("cert-entries", &s.cert_entries),
            ("cert-bits", &s.cert_bits),
        ] {
            writeln!(o, "size {name} max={} mean={:.2}", st.max, st.mean).unwrap();
        }
        writeln!(
            o,
            "size landmarks={} max-cluster={} entries/(sqrt(n)log2(n))={:.4}",
            s.landmarks, s.max_cluster, s.entries_per_root_log
        )
        .unwrap();
        for st in &self.stretch {
            let max = st.max.map_or("-".to_string(), |(r, d)| format!("{r}/{d}={:.4}", r as f64 / d as f64));
            let mean = st.mean.map_or("-".to_string(), |m| format!("{m:.4}"));
            writeln!(
                o,
                "stretch {} pairs={} delivered={} max={max} mean={mean} bound={} {}",
                st.mode,
                st.pairs,
                st.delivered,
                st.bound,
                if st.holds() { "ok" } else { "VIOLATED" }
            )
            .unwrap();
        }
        let v = &self.verification;
        writeln!(o, "verify nodes={} accepted={}", v.nodes, v.accepted).unwrap();
        for r in &v.rejections {
            writeln!(o, "reject {} {} {}", r.node, r.step, r.reason).unwrap();
        }
        let c = &self.campaign;
        writeln!(
            o,
            "campaign seed={} mutations={} detected={} escapes={}",
            c.seed,
            c.rows.len(),
            c.rows.len() - c.escapes(),
            c.escapes()
        )
        .unwrap();
        for r in &c.rows {
            let by = r.detected.as_ref().map_or("ESCAPE".to_string(), |d| format!("{} {} {}", d.node, d.step, d.reason));
            writeln!(o, "row {} {} {} {} {by}", r.node, r.kind, r.path, r.mode).unwrap();
        }
        if let Some(d) = &self.dir_trials {
            writeln!(
                o,
                "dir-trials mutations={} trials={} escapes={} rate={:.6} bound={:.6} {}",
                d.mutations,
                d.trials,
                d.escapes,
                d.rate(),
                d.bound,
                if d.holds() { "ok" } else { "VIOLATED" }
            )
            .unwrap();
        }
        writeln!(o, "result {}", if self.passed() { "pass" } else { "fail" }).unwrap();
        o
    }
}
