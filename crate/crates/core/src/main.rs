use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use cycadj::bench::{run_benchmark, write_report, BenchConfig};
use cycadj::ci::{CiProvider, DEFAULT_ALPHA};
use cycadj::graph::io::GraphFile;
use cycadj::graph::{
    acyclify, intervention_node_check, is_backdoor_adjustment_set, is_separated, markov_blanket,
    DirectedGraph,
};
use cycadj::lsas::{run_lsas, LsasOptions, NoEffectEvidence, Verdict};
use cycadj::mb::{discover_mb, MbAlgorithm};
use cycadj::par::Exec;
use cycadj::sim::io::{load_scm, save_scm};
use cycadj::sim::{generate_scm, sample, sample_interventional, Dataset, GenConfig};
use cycadj::{Error, NodeSet, SeparationKind};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "cycadj", version, about = "Local adjustment-set search for acyclic and cyclic causal models")]
struct Cli {
    /// Increase log verbosity (repeatable); logs go to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random SCM from a config and write graph.json and scm.json.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw observational or interventional samples from an SCM file.
    Sample {
        #[arg(long)]
        scm: PathBuf,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `LABEL=VALUE` to sample under an intervention.
        #[arg(long)]
        intervene: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discover the Markov blanket of one variable.
    DiscoverMb {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        target: String,
        #[arg(long)]
        mb: Option<MbArg>,
    },
    /// Run the adjustment-set search for a treatment/outcome pair.
    Estimate {
        #[command(flatten)]
        source: Source,
        /// Defaults to the treatment recorded in the graph or SCM file.
        #[arg(long)]
        treatment: Option<String>,
        #[arg(long)]
        outcome: Option<String>,
        #[arg(long)]
        mb: Option<MbArg>,
        #[arg(long)]
        max_z: Option<usize>,
        /// Also write the outcome record to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer graph queries exactly.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        #[command(subcommand)]
        query: OracleQuery,
    },
    /// Run a benchmark grid and write metrics.csv, instances.jsonl and plot data.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        ci: Option<CiArg>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        mb: Option<MbArg>,
        #[arg(long)]
        max_z: Option<usize>,
    },
}

#[derive(Subcommand)]
enum OracleQuery {
    /// Separation of two nodes given a set.
    Sep {
        a: String,
        b: String,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
        #[arg(long, value_enum, default_value_t = KindArg::Sigma)]
        kind: KindArg,
    },
    /// Backdoor validity of a set, by both the direct criterion and the
    /// intervention-node check.
    Backdoor {
        #[arg(long)]
        treatment: Option<String>,
        #[arg(long)]
        outcome: Option<String>,
        #[arg(long, value_delimiter = ',')]
        z: Vec<String>,
    },
    /// Markov blanket of a node.
    Mb {
        node: String,
        #[arg(long, value_enum, default_value_t = KindArg::Sigma)]
        kind: KindArg,
    },
    /// Write the σ-acyclification of the graph.
    Acyclify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    #[arg(long, value_enum, default_value_t = CiArg::Fisherz)]
    ci: CiArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Data CSV for Fisher-Z tests.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Graph file for oracle runs.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// SCM file: oracle over its graph, or sample `--n` rows for Fisher-Z.
    #[arg(long)]
    scm: Option<PathBuf>,
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiArg {
    Oracle,
    Fisherz,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    D,
    Sigma,
}

impl From<KindArg> for SeparationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::D => SeparationKind::DSeparation,
            KindArg::Sigma => SeparationKind::SigmaSeparation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MbArg {
    Tc,
    FastIamb,
    Iamb,
    Hiton,
}

impl From<MbArg> for MbAlgorithm {
    fn from(m: MbArg) -> Self {
        match m {
            MbArg::Tc => MbAlgorithm::Tc,
            MbArg::FastIamb => MbAlgorithm::FastIamb,
            MbArg::Iamb => MbAlgorithm::Iamb,
            MbArg::Hiton => MbAlgorithm::HitonMb,
        }
    }
}

/// Input problems exit with [`EXIT_CONFIG`], everything else with
/// [`EXIT_RUNTIME`].
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<Error>() {
            Some(
                Error::Config(_)
                | Error::Parse(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::UnknownLabel(_)
                | Error::DuplicateLabel(_)
                | Error::SelfLoop(_)
                | Error::InvalidModel(_)
                | Error::InvalidOrder(_)
                | Error::InvalidQuery(_)
                | Error::LatentNode(_)
                | Error::NodeOutOfRange { .. }
                | Error::CyclicGraph
                | Error::Precondition(_),
            ) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Failure { code, err }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        anyhow::Error::new(err).into()
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, err: anyhow!(msg.into()) }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Generate { config, out, seed } => generate(&config, &out, seed),
        Command::Sample { scm, n, seed, intervene, out } => {
            sample_cmd(&scm, n, seed, intervene.as_deref(), &out)
        }
        Command::DiscoverMb { source, target, mb } => discover(&source, &target, mb),
        Command::Estimate { source, treatment, outcome, mb, max_z, out } => {
            estimate(&source, treatment, outcome, mb, max_z, out.as_deref())
        }
        Command::Oracle { graph, query } => oracle(&graph, query),
        Command::Bench { config, out, seed, jobs, ci, alpha, mb, max_z } => {
            let mut cfg: BenchConfig = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(ci) = ci {
                cfg.ci = match ci {
                    CiArg::Oracle => cycadj::bench::CiKind::Oracle,
                    CiArg::Fisherz => cycadj::bench::CiKind::FisherZ,
                };
            }
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(m) = mb {
                cfg.mb_alg = Some(m.into());
            }
            if max_z.is_some() {
                cfg.max_z = max_z;
            }
            if let Some(j) = jobs {
                configure_jobs(&mut cfg, j)?;
            }
            cfg.validate()?;
            let report = run_benchmark(&cfg)?;
            write_report(&report, &out).with_context(|| format!("writing {}", out.display()))?;
            let failed = report.instances.iter().filter(|r| r.error.is_some()).count();
            log::info!("{} instances, {failed} failed", report.instances.len());
            print_json(&serde_json::json!({
                "out": out.display().to_string(),
                "rows": report.rows.len(),
                "instances": report.instances.len(),
                "failed": failed,
            }))
        }
    }
}

fn configure_jobs(cfg: &mut BenchConfig, jobs: usize) -> CliResult<()> {
    if jobs == 0 {
        return Err(config_error("--jobs must be at least 1"));
    }
    if jobs == 1 {
        cfg.exec = Exec::Sequential;
        return Ok(());
    }
    cfg.exec = Exec::Parallel;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Failure { code: EXIT_RUNTIME, err: anyhow!(e) })?;
    Ok(())
}

fn load_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("reading {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| config_error(format!("parsing {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    println!("{text}");
    Ok(())
}

fn generate(config: &Path, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let mut cfg: GenConfig = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let scm = generate_scm(&cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    GraphFile::from_graph(scm.graph(), scm.treatment(), scm.outcome()).save(out.join("graph.json"))?;
    save_scm(&scm, out.join("scm.json"))?;
    for &n in &cfg.sample_sizes {
        let data = sample(&scm, n, cycadj::seed::derive(cfg.seed, &[n as u64]))?;
        data.save_csv(out.join(format!("data_{n}.csv")))?;
    }
    print_json(&serde_json::json!({
        "graph": out.join("graph.json").display().to_string(),
        "scm": out.join("scm.json").display().to_string(),
        "nodes": scm.graph().node_count(),
        "edges": scm.graph().edge_count(),
    }))
}

fn load_scm_checked(path: &Path) -> CliResult<cycadj::sim::Scm> {
    if !path.exists() {
        return Err(config_error(format!("{} does not exist", path.display())));
    }
    Ok(load_scm(path)?)
}

fn sample_cmd(scm: &Path, n: usize, seed: u64, intervene: Option<&str>, out: &Path) -> CliResult<()> {
    let scm = load_scm_checked(scm)?;
    if n == 0 {
        return Err(config_error("-n must be at least 1"));
    }
    let data = match intervene {
        None => sample(&scm, n, seed)?,
        Some(spec) => {
            let (label, value) = spec
                .split_once('=')
                .ok_or_else(|| config_error("--intervene expects LABEL=VALUE"))?;
            let value: f64 =
                value.trim().parse().map_err(|_| config_error(format!("bad value `{value}`")))?;
            sample_interventional(&scm, scm.graph().index_of(label.trim())?, value, n, seed)?
        }
    };
    data.save_csv(out).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

/// The provider plus the treatment and outcome recorded in the source, if
/// any, and the node count used to pick a default blanket algorithm.
struct Loaded {
    provider: CiProvider,
    roles: (Option<String>, Option<String>),
    nodes: usize,
}

fn load_source(src: &Source) -> CliResult<Loaded> {
    match src.ci {
        CiArg::Oracle => {
            let (g, t, o) = if let Some(path) = &src.graph {
                let doc: GraphFile = load_config(path)?;
                doc.to_graph()?
            } else if let Some(path) = &src.scm {
                let scm = load_scm_checked(path)?;
                (scm.graph().clone(), scm.treatment(), scm.outcome())
            } else {
                return Err(config_error("--ci oracle needs --graph or --scm"));
            };
            let roles = (t.map(|v| g.label(v).to_string()), o.map(|v| g.label(v).to_string()));
            let nodes = g.node_count();
            Ok(Loaded { provider: CiProvider::oracle(g), roles, nodes })
        }
        CiArg::Fisherz => {
            let (data, roles, nodes) = if let Some(path) = &src.data {
                if !path.exists() {
                    return Err(config_error(format!("{} does not exist", path.display())));
                }
                let d = Dataset::load_csv(path)?;
                let p = d.n_vars();
                (d, (None, None), p)
            } else if let Some(path) = &src.scm {
                let n = src.n.ok_or_else(|| config_error("--scm with Fisher-Z needs -n"))?;
                let scm = load_scm_checked(path)?;
                let g = scm.graph();
                let roles = (
                    scm.treatment().map(|v| g.label(v).to_string()),
                    scm.outcome().map(|v| g.label(v).to_string()),
                );
                (sample(&scm, n, src.seed)?, roles, g.node_count())
            } else {
                return Err(config_error("--ci fisherz needs --data or --scm"));
            };
            Ok(Loaded { provider: CiProvider::fisher_z(Arc::new(data), src.alpha)?, roles, nodes })
        }
    }
}

fn labels(p: &CiProvider, s: &NodeSet) -> Vec<String> {
    s.iter().map(|v| p.label(v).to_string()).collect()
}

fn discover(src: &Source, target: &str, mb: Option<MbArg>) -> CliResult<()> {
    let loaded = load_source(src)?;
    let p = &loaded.provider;
    let alg = mb.map_or_else(|| MbAlgorithm::default_for(loaded.nodes), Into::into);
    let t = p.index_of(target)?;
    let found = discover_mb(alg, p, t, &p.variables())?;
    print_json(&serde_json::json!({
        "target": target,
        "algorithm": alg.name(),
        "markov_blanket": labels(p, &found),
        "tests_used": p.tests_performed(),
    }))
}

fn estimate(
    src: &Source,
    treatment: Option<String>,
    outcome: Option<String>,
    mb: Option<MbArg>,
    max_z: Option<usize>,
    out: Option<&Path>,
) -> CliResult<()> {
    let loaded = load_source(src)?;
    let p = &loaded.provider;
    let x_label = treatment
        .or(loaded.roles.0.clone())
        .ok_or_else(|| config_error("no treatment given and none recorded in the input"))?;
    let y_label = outcome
        .or(loaded.roles.1.clone())
        .ok_or_else(|| config_error("no outcome given and none recorded in the input"))?;
    let (x, y) = (p.index_of(&x_label)?, p.index_of(&y_label)?);
    let alg = mb.map_or_else(|| MbAlgorithm::default_for(loaded.nodes), Into::into);
    let opts = LsasOptions { mb_alg: alg, max_z, ..LsasOptions::default() };
    let res = run_lsas(p, x, y, &opts)?;
    let mut record = serde_json::json!({
        "treatment": x_label,
        "outcome": y_label,
        "status": res.verdict.status(),
        "effect": null,
        "adjustment_set": null,
        "witness": null,
        "evidence": null,
        "mb_treatment": labels(p, &res.mb_x),
        "mb_outcome": labels(p, &res.mb_y),
        "tests_used": res.tests_used,
    });
    match &res.verdict {
        Verdict::Identified { effect, z, witness } => {
            record["effect"] = serde_json::json!(effect);
            record["adjustment_set"] = serde_json::json!(labels(p, z));
            record["witness"] = serde_json::json!(p.label(*witness));
        }
        Verdict::NoEffect(ev) => {
            record["effect"] = serde_json::json!(0.0);
            let (kind, z, w) = match ev {
                NoEffectEvidence::SeparatingSet { z } => ("separating_set", z, None),
                NoEffectEvidence::Witness { witness, z } => ("witness", z, Some(*witness)),
            };
            record["evidence"] = serde_json::json!(kind);
            record["adjustment_set"] = serde_json::json!(labels(p, z));
            record["witness"] = serde_json::json!(w.map(|w| p.label(w)));
        }
        Verdict::Undecidable => {}
    }
    if let Some(path) = out {
        let mut text = serde_json::to_string_pretty(&record).map_err(Error::from)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    print_json(&record)
}

fn node_set(g: &DirectedGraph, labels: &[String]) -> CliResult<NodeSet> {
    labels
        .iter()
        .filter(|l| !l.is_empty())
        .map(|l| g.index_of(l).map_err(Failure::from))
        .collect()
}

fn oracle(path: &Path, query: OracleQuery) -> CliResult<()> {
    let doc: GraphFile = load_config(path)?;
    let (g, t, o) = doc.to_graph()?;
    match query {
        OracleQuery::Sep { a, b, given, kind } => {
            let s = node_set(&g, &given)?;
            let sep = is_separated(&g, kind.into(), g.index_of(&a)?, g.index_of(&b)?, &s)?;
            print_json(&serde_json::json!({ "a": a, "b": b, "given": given, "separated": sep }))
        }
        OracleQuery::Backdoor { treatment, outcome, z } => {
            let x = match treatment {
                Some(l) => g.index_of(&l)?,
                None => t.ok_or_else(|| config_error("no treatment given or recorded"))?,
            };
            let y = match outcome {
                Some(l) => g.index_of(&l)?,
                None => o.ok_or_else(|| config_error("no outcome given or recorded"))?,
            };
            let zs = node_set(&g, &z)?;
            let backdoor = is_backdoor_adjustment_set(&g, x, y, &zs)?;
            let intervention = intervention_node_check(&g, x, y, &zs)?;
            print_json(&serde_json::json!({
                "treatment": g.label(x),
                "outcome": g.label(y),
                "z": z,
                "backdoor": backdoor,
                "intervention_node": intervention,
            }))
        }
        OracleQuery::Mb { node, kind } => {
            let mb = markov_blanket(&g, g.index_of(&node)?, kind.into())?;
            let names: Vec<&str> = mb.iter().map(|v| g.label(v)).collect();
            print_json(&serde_json::json!({ "node": node, "markov_blanket": names }))
        }
        OracleQuery::Acyclify { out } => {
            let acy = acyclify(&g, None)?;
            let text = GraphFile::from_graph(&acy, t, o).to_canonical_string()?;
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}
