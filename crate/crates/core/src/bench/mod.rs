//! Benchmark grid: generate models, sample, run the search and score the
//! outcome against the generating graph.
//!
//! The unit of parallel work is one (graph, sample size) instance. Seeds are
//! derived from the master seed, the cell index and the repetition, and
//! results are folded in instance order, so reports do not depend on the
//! thread count.

pub mod metrics;
mod report;

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use report::{write_report, MetricRow, PlotPoint};

use crate::ci::{CiProvider, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::graph::{is_backdoor_adjustment_set, Node, NodeSet};
use crate::lsas::{run_lsas, LsasOptions, NoEffectEvidence, Verdict};
use crate::mb::MbAlgorithm;
use crate::par::{self, Exec};
use crate::seed;
use crate::sim::{generate_scm, sample, true_causal_effect, Form, GenConfig, GraphSize, NoiseMode, Scm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiKind {
    Oracle,
    #[serde(rename = "fisherz")]
    FisherZ,
}

/// A graph size given either as a node count with the reference edge and
/// latent counts, or spelled out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    Nodes(usize),
    Full(GraphSize),
}

impl SizeSpec {
    pub fn resolve(self) -> Result<GraphSize> {
        match self {
            SizeSpec::Full(s) => Ok(s),
            SizeSpec::Nodes(n) => GraphSize::reference_default(n).ok_or_else(|| {
                Error::Config(format!(
                    "no default edge and latent counts for {n} nodes; give them explicitly"
                ))
            }),
        }
    }
}

fn default_cyclic() -> Vec<bool> {
    vec![false, true]
}
fn default_forms() -> Vec<Form> {
    vec![Form::Linear]
}
fn default_noise() -> Vec<NoiseMode> {
    vec![NoiseMode::Gaussian, NoiseMode::NonGaussian, NoiseMode::Mixed]
}
fn default_edge() -> Vec<bool> {
    vec![false, true]
}
fn default_sample_sizes() -> Vec<usize> {
    vec![1_000, 5_000, 10_000, 15_000]
}
fn default_reps() -> usize {
    25
}
fn default_ci() -> CiKind {
    CiKind::FisherZ
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<SizeSpec>,
    #[serde(default = "default_cyclic")]
    pub cyclic: Vec<bool>,
    #[serde(default = "default_forms")]
    pub forms: Vec<Form>,
    #[serde(default = "default_noise")]
    pub noise_modes: Vec<NoiseMode>,
    #[serde(default = "default_edge")]
    pub edge_xy: Vec<bool>,
    #[serde(default = "default_sample_sizes")]
    pub sample_sizes: Vec<usize>,
    /// Graphs per cell (per noise mode).
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_ci")]
    pub ci: CiKind,
    /// `None` picks per graph size.
    #[serde(default)]
    pub mb_alg: Option<MbAlgorithm>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub max_z: Option<usize>,
    pub seed: u64,
    /// Record wall-clock times; off by default so reports are reproducible
    /// byte for byte.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub exec: Exec,
}

impl BenchConfig {
    /// Defaults for everything but the sizes and the seed.
    pub fn new(sizes: Vec<SizeSpec>, seed: u64) -> Self {
        Self {
            sizes,
            cyclic: default_cyclic(),
            forms: default_forms(),
            noise_modes: default_noise(),
            edge_xy: default_edge(),
            sample_sizes: default_sample_sizes(),
            reps: default_reps(),
            ci: default_ci(),
            mb_alg: None,
            alpha: default_alpha(),
            max_z: None,
            seed,
            timing: false,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("sizes", self.sizes.is_empty()),
            ("cyclic", self.cyclic.is_empty()),
            ("forms", self.forms.is_empty()),
            ("noise_modes", self.noise_modes.is_empty()),
            ("edge_xy", self.edge_xy.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::Config(format!("`{name}` must not be empty")));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.ci == CiKind::FisherZ && self.sample_sizes.is_empty() {
            return Err(Error::Config("sample_sizes must not be empty for data runs".into()));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        for cell in self.cells()? {
            cell.gen_config(0).validate()?;
        }
        Ok(())
    }

    /// Cells in grid order: size, cyclic, form, noise, edge.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        for spec in &self.sizes {
            let size = spec.resolve()?;
            for &cyclic in &self.cyclic {
                for &form in &self.forms {
                    for &noise in &self.noise_modes {
                        for &edge_xy in &self.edge_xy {
                            out.push(Cell { index: out.len(), size, cyclic, form, noise, edge_xy });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn sample_points(&self) -> Vec<Option<usize>> {
        match self.ci {
            CiKind::Oracle => vec![None],
            CiKind::FisherZ => self.sample_sizes.iter().map(|&n| Some(n)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub index: usize,
    pub size: GraphSize,
    pub cyclic: bool,
    pub form: Form,
    pub noise: NoiseMode,
    pub edge_xy: bool,
}

impl Cell {
    fn gen_config(&self, seed: u64) -> GenConfig {
        GenConfig::new(self.size, self.cyclic, self.form, self.noise, self.edge_xy, seed)
    }
}

/// One line of `instances.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub nodes: usize,
    pub edges: usize,
    pub latents: usize,
    pub cyclic: bool,
    pub form: Form,
    pub noise: NoiseMode,
    pub edge_xy: bool,
    pub rep: usize,
    pub graph_seed: u64,
    /// `None` for oracle runs.
    pub n_samples: Option<usize>,
    pub status: String,
    pub effect: Option<f64>,
    pub true_effect: Option<f64>,
    pub relative_error: Option<f64>,
    pub adjustment_set: Option<Vec<String>>,
    pub witness: Option<String>,
    pub evidence: Option<String>,
    pub set_valid: Option<bool>,
    pub true_edge: bool,
    pub decided_edge: Option<bool>,
    pub tests_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time: Option<f64>,
    pub error: Option<String>,
}

pub struct BenchReport {
    pub rows: Vec<MetricRow>,
    pub plots: Vec<(&'static str, Vec<PlotPoint>)>,
    pub instances: Vec<InstanceRecord>,
}

struct Job<'a> {
    cell: &'a Cell,
    rep: usize,
    graph_seed: u64,
    scm: &'a Result<Scm>,
    n: Option<usize>,
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let graph_keys: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..cfg.reps).map(move |r| (c, r))).collect();
    let scms: Vec<(u64, Result<Scm>)> = par::map_slice(cfg.exec, &graph_keys, |&(c, r)| {
        let gs = seed::derive(cfg.seed, &[c as u64, r as u64]);
        (gs, generate_scm(&cells[c].gen_config(gs)))
    });
    let points = cfg.sample_points();
    let mut jobs: Vec<Job> = Vec::with_capacity(scms.len() * points.len());
    for (&(c, rep), (gs, scm)) in graph_keys.iter().zip(&scms) {
        for &n in &points {
            jobs.push(Job { cell: &cells[c], rep, graph_seed: *gs, scm, n });
        }
    }
    log::info!("running {} instances over {} cells", jobs.len(), cells.len());
    let instances = par::map_slice(cfg.exec, &jobs, |job| run_instance(cfg, job));
    let failed = instances.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} instances failed", instances.len());
    }
    let (rows, plots) = report::aggregate(cfg, &cells, &points, &instances);
    Ok(BenchReport { rows, plots, instances })
}

fn run_instance(cfg: &BenchConfig, job: &Job) -> InstanceRecord {
    let cell = job.cell;
    let mut rec = InstanceRecord {
        nodes: cell.size.nodes,
        edges: cell.size.edges,
        latents: cell.size.latents,
        cyclic: cell.cyclic,
        form: cell.form,
        noise: cell.noise,
        edge_xy: cell.edge_xy,
        rep: job.rep,
        graph_seed: job.graph_seed,
        n_samples: job.n,
        status: "error".into(),
        effect: None,
        true_effect: None,
        relative_error: None,
        adjustment_set: None,
        witness: None,
        evidence: None,
        set_valid: None,
        true_edge: cell.edge_xy,
        decided_edge: None,
        tests_used: None,
        wall_time: None,
        error: None,
    };
    let started = Instant::now();
    if let Err(e) = score_instance(cfg, job, &mut rec) {
        log::warn!(
            "instance cell {} rep {} n {:?} failed: {e}",
            cell.index,
            job.rep,
            job.n
        );
        rec.status = "error".into();
        rec.error = Some(e.to_string());
    }
    if cfg.timing {
        rec.wall_time = Some(started.elapsed().as_secs_f64());
    }
    rec
}

fn score_instance(cfg: &BenchConfig, job: &Job, rec: &mut InstanceRecord) -> Result<()> {
    let scm = job.scm.as_ref().map_err(|e| Error::InvalidModel(e.to_string()))?;
    let g = scm.graph();
    let (x, y) = match (scm.treatment(), scm.outcome()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::InvalidModel("model has no treatment/outcome".into())),
    };
    rec.true_edge = g.has_edge(x, y);
    let linear = scm.form() == Form::Linear;
    if linear {
        rec.true_effect = Some(true_causal_effect(scm, x, y)?);
    }

    // Provider variables and their graph nodes.
    let observed = g.observed();
    let (provider, to_graph): (CiProvider, Vec<Node>) = match job.n {
        None => (CiProvider::oracle(g.clone()), (0..g.node_count()).collect()),
        Some(n) => {
            let data = sample(scm, n, seed::derive(job.graph_seed, &[n as u64]))?;
            (CiProvider::fisher_z(Arc::new(data), cfg.alpha)?, observed.iter().collect())
        }
    };
    let position = |v: Node| -> Node {
        to_graph.iter().position(|&u| u == v).expect("treatment and outcome are observed")
    };
    let (px, py) = (position(x), position(y));
    let opts = LsasOptions {
        mb_alg: cfg.mb_alg.unwrap_or_else(|| MbAlgorithm::default_for(cell_nodes(job))),
        max_z: cfg.max_z,
        estimate: linear,
        ..LsasOptions::default()
    };
    let out = run_lsas(&provider, px, py, &opts)?;
    let map_set = |z: &NodeSet| -> NodeSet { z.iter().map(|v| to_graph[v]).collect() };
    let labels = |z: &NodeSet| -> Vec<String> { z.iter().map(|v| g.label(v).to_string()).collect() };

    rec.status = out.verdict.status().into();
    rec.decided_edge = out.verdict.decided_edge();
    rec.tests_used = Some(out.tests_used);
    match &out.verdict {
        Verdict::Identified { effect, z, witness } => {
            let gz = map_set(z);
            rec.set_valid = Some(is_backdoor_adjustment_set(g, x, y, &gz)?);
            rec.adjustment_set = Some(labels(&gz));
            rec.witness = Some(g.label(to_graph[*witness]).to_string());
            rec.effect = if job.n.is_none() { rec.true_effect } else { *effect };
            if let (Some(est), Some(truth)) = (rec.effect, rec.true_effect) {
                rec.relative_error = metrics::relative_error(est, truth);
                if rec.relative_error.is_none() {
                    log::info!(
                        "cell {} rep {}: effect identified but true effect is zero; excluded from RE",
                        job.cell.index,
                        job.rep
                    );
                }
            }
        }
        Verdict::NoEffect(ev) => {
            let (kind, z, w) = match ev {
                NoEffectEvidence::SeparatingSet { z } => ("separating_set", z, None),
                NoEffectEvidence::Witness { witness, z } => ("witness", z, Some(*witness)),
            };
            rec.evidence = Some(kind.into());
            rec.adjustment_set = Some(labels(&map_set(z)));
            rec.witness = w.map(|w| g.label(to_graph[w]).to_string());
        }
        Verdict::Undecidable => {}
    }
    Ok(())
}

fn cell_nodes(job: &Job) -> usize {
    job.cell.size.nodes
}
