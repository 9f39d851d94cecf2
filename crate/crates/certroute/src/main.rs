use std::fmt::Debug;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use certroute::experiment::{run_on, ExperimentConfig, SchemeKind};
use certroute::graph_io::{parse_graph, write_graph};
use certroute::report::StretchStats;
use certroute::text::{verify_bundle, write_bundle, BundleKind};
use certroute::Error;
use certroute_core::fixture::{build_fixture, run_fixture, FixtureName};
use certroute_core::generate::{generate_graph, GenParams, GraphKind};
use certroute_core::hk::build_hk;
use certroute_core::hk_cert::hk_prove;
use certroute_core::ni::build_ni;
use certroute_core::ni_cert::ni_prove;
use certroute_core::sim::{default_step_limit, measure_stretch, simulate, PairSelection, RoutingScheme, SimTrace};
use certroute_core::tz::build_tz;
use certroute_core::tz_cert::tz_prove;
use certroute_core::{DistanceOracle, NodeId, WeightedGraph};

#[derive(Parser)]
#[command(name = "certroute", version, about = "Compact routing schemes with locally verifiable certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Record,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Read the graph from a file instead of generating it.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// random-connected, grid, ring or star.
    #[arg(long, default_value = "random-connected")]
    kind: String,
    #[arg(long, default_value_t = 10)]
    max_weight: u64,
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 2)]
    beta: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Print a generated graph.
    Gen {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Print the tables and certificates of every node.
    Build {
        scheme: SchemeKind,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: SchemeArgs,
    },
    /// Run every node's verifier on a bundle.
    Verify {
        #[arg(long)]
        bundle: PathBuf,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Route one message and print the hops.
    Route {
        s: u64,
        t: u64,
        #[arg(long, value_enum, default_value = "tz")]
        scheme: SchemeKind,
        #[arg(long)]
        handshake: bool,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: SchemeArgs,
    },
    /// Measure stretch over all ordered pairs.
    Stretch {
        scheme: SchemeKind,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: SchemeArgs,
    },
    /// Tamper with tables and certificates and report what was caught.
    Attack {
        scheme: SchemeKind,
        #[arg(long, default_value_t = 100)]
        mutations: usize,
        /// Hash family draws per directory mutation (name-independent scheme).
        #[arg(long, default_value_t = 0)]
        trials: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: SchemeArgs,
    },
    /// Audit and route one of the counterexample graphs.
    Fixture { name: String },
    /// Full experiment report.
    Report {
        scheme: SchemeKind,
        #[arg(long, default_value_t = 100)]
        mutations: usize,
        #[arg(long, default_value_t = 0)]
        trials: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: SchemeArgs,
    },
}

fn load_graph(a: &GraphArgs) -> Result<(WeightedGraph, GraphKind), Error> {
    let kind = GraphKind::parse(&a.kind).ok_or_else(|| Error::Usage(format!("unknown graph kind `{}`", a.kind)))?;
    if let Some(path) = &a.graph {
        return Ok((parse_graph(&std::fs::read_to_string(path)?)?, kind));
    }
    let g = generate_graph(&GenParams { kind, n: a.n, weights: (1, a.max_weight), seed: a.seed })?;
    Ok((g, kind))
}

fn config(scheme: SchemeKind, g: &GraphArgs, kind: GraphKind, p: &SchemeArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(scheme, g.n, g.seed);
    cfg.kind = kind;
    cfg.weights = (1, g.max_weight);
    cfg.k = p.k;
    cfg.beta = p.beta;
    cfg
}

fn print_trace<H: Debug>(t: &SimTrace<H>, delta: u64) {
    for h in &t.hops {
        println!("hop {} port {} header {:?}", h.node, h.port.0, h.header);
    }
    println!("end {} outcome {} length {} delta {}", t.end, t.outcome.label(), t.total_length, delta);
}

fn route<S: RoutingScheme>(g: &WeightedGraph, scheme: &S, s: u64, t: u64) -> Result<bool, Error> {
    let o = DistanceOracle::build(g);
    let (si, ti) = match (g.index_of(NodeId(s)), g.index_of(NodeId(t))) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Usage("both endpoints must be graph nodes".into())),
    };
    let trace = simulate(g, scheme, NodeId(s), NodeId(t), default_step_limit(g));
    print_trace(&trace, o.dist(si, ti));
    Ok(trace.delivered())
}

fn run(cmd: Command) -> Result<bool, Error> {
    match cmd {
        Command::Gen { graph } => {
            let (g, _) = load_graph(&graph)?;
            print!("{}", write_graph(&g));
            Ok(true)
        }
        Command::Build { scheme, graph, params } => {
            let (g, _) = load_graph(&graph)?;
            let o = DistanceOracle::build(&g);
            let text = match scheme {
                SchemeKind::Tz => {
                    let s = build_tz(&g, &o, graph.seed)?;
                    write_bundle(BundleKind::Tz, &s.tables, &tz_prove(&g, &o, &s.tables))
                }
                SchemeKind::Ni => {
                    let cfg = config(scheme, &graph, GraphKind::RandomConnected, &params);
                    let s = build_ni(&g, &o, cfg.ni_params(), graph.seed)?;
                    let certs = ni_prove(&g, &o, &s.tables, &s.params, graph.seed);
                    write_bundle(BundleKind::Ni(s.params), &s.tables, &certs)
                }
                SchemeKind::Hk => {
                    let s = build_hk(&g, &o, params.k, graph.seed)?;
                    write_bundle(BundleKind::Hk { k: params.k }, &s.tables, &hk_prove(&g, &o, &s.tables))
                }
            };
            print!("{text}");
            Ok(true)
        }
        Command::Verify { bundle, graph } => {
            let (g, _) = load_graph(&graph)?;
            let verdicts = verify_bundle(&g, &std::fs::read_to_string(bundle)?)?;
            let mut ok = true;
            for (i, v) in verdicts.iter().enumerate().filter(|(_, v)| !v.is_accept()) {
                println!("node {} {v}", g.id(i));
                ok = false;
            }
            let accepted = verdicts.iter().filter(|v| v.is_accept()).count();
            println!("accepted {accepted}/{}", verdicts.len());
            Ok(ok)
        }
        Command::Route { s, t, scheme, handshake, graph, params } => {
            let (g, _) = load_graph(&graph)?;
            let o = DistanceOracle::build(&g);
            match scheme {
                SchemeKind::Tz => route(&g, &build_tz(&g, &o, graph.seed)?.router(), s, t),
                SchemeKind::Ni => {
                    let cfg = config(scheme, &graph, GraphKind::RandomConnected, &params);
                    route(&g, &build_ni(&g, &o, cfg.ni_params(), graph.seed)?.router(handshake), s, t)
                }
                SchemeKind::Hk => route(&g, &build_hk(&g, &o, params.k, graph.seed)?.router(handshake), s, t),
            }
        }
        Command::Stretch { scheme, graph, params } => {
            let (g, _) = load_graph(&graph)?;
            let o = DistanceOracle::build(&g);
            let all = PairSelection::All;
            let stats = match scheme {
                SchemeKind::Tz => {
                    vec![StretchStats::of("plain", &measure_stretch(&g, &o, &build_tz(&g, &o, graph.seed)?.router(), all), 3)]
                }
                SchemeKind::Ni => {
                    let cfg = config(scheme, &graph, GraphKind::RandomConnected, &params);
                    let s = build_ni(&g, &o, cfg.ni_params(), graph.seed)?;
                    vec![
                        StretchStats::of("plain", &measure_stretch(&g, &o, &s.router(false), all), 5),
                        StretchStats::of("handshake", &measure_stretch(&g, &o, &s.router(true), all), 3),
                    ]
                }
                SchemeKind::Hk => {
                    let s = build_hk(&g, &o, params.k, graph.seed)?;
                    let k = params.k as u64;
                    vec![
                        StretchStats::of("plain", &measure_stretch(&g, &o, &s.router(false), all), 4 * k - 5),
                        StretchStats::of("handshake", &measure_stretch(&g, &o, &s.router(true), all), 2 * k - 1),
                    ]
                }
            };
            for st in &stats {
                let max = st.max.map_or("-".into(), |(r, d)| format!("{r}/{d}"));
                println!("{} pairs {} delivered {} max {max} bound {}", st.mode, st.pairs, st.delivered, st.bound);
            }
            Ok(stats.iter().all(StretchStats::holds))
        }
        Command::Attack { scheme, mutations, trials, format, graph, params } => {
            let (g, kind) = load_graph(&graph)?;
            let mut cfg = config(scheme, &graph, kind, &params);
            cfg.mutations = mutations;
            cfg.trials = trials;
            let report = run_on(&cfg, &g)?;
            match format {
                Format::Record => print!("{}", serde_json::to_string_pretty(&(&report.campaign, &report.dir_trials))? + "\n"),
                Format::Text => {
                    for line in report.to_text().lines().filter(|l| {
                        l.starts_with("campaign") || l.starts_with("row") || l.starts_with("dir-trials")
                    }) {
                        println!("{line}");
                    }
                }
            }
            Ok(report.campaign.escapes() == 0 && report.dir_trials.as_ref().is_none_or(|d| d.holds()))
        }
        Command::Fixture { name } => {
            let name = FixtureName::parse(&name)
                .ok_or_else(|| Error::Usage(format!("unknown fixture `{name}` (stretch7, handshake5)")))?;
            let run = run_fixture(&build_fixture(name));
            for a in &run.audit {
                println!("audit {} expected {} actual {} {}", a.label, a.expected, a.actual, if a.ok() { "ok" } else { "FAIL" });
            }
            if let Some(t) = &run.trace {
                let path: Vec<String> = t.nodes().iter().map(|v| v.to_string()).collect();
                println!("route {} length {} delta {}", path.join(" "), t.total_length, run.delta);
            }
            println!("{} {}", name.code(), if run.passed() { "pass" } else { "fail" });
            Ok(run.passed())
        }
        Command::Report { scheme, mutations, trials, format, graph, params } => {
            let (g, kind) = load_graph(&graph)?;
            let mut cfg = config(scheme, &graph, kind, &params);
            cfg.mutations = mutations;
            cfg.trials = trials;
            let report = run_on(&cfg, &g)?;
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Record => print!("{}", report.to_record()),
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
