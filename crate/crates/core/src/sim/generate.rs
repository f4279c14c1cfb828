use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{spectral_norm, Form, NoiseFamily, NoiseMode, NoiseSpec, Scm, DET_TOLERANCE};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Node};

const WEIGHT_MIN: f64 = 0.3;
const WEIGHT_MAX: f64 = 0.9;
const NOISE_SD_MIN: f64 = 0.5;
const NOISE_SD_MAX: f64 = 1.0;
const RESAMPLE_ATTEMPTS: usize = 100;
const SHRINK: f64 = 0.9;
const TANH_TARGET_NORM: f64 = 0.95;

/// Node, edge and latent counts of one benchmark graph size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSize {
    pub nodes: usize,
    pub edges: usize,
    pub latents: usize,
}

/// The six graph sizes of the reference experiments.
pub const REFERENCE_GRAPH_SIZES: [GraphSize; 6] = [
    GraphSize { nodes: 8, edges: 12, latents: 2 },
    GraphSize { nodes: 15, edges: 19, latents: 3 },
    GraphSize { nodes: 25, edges: 40, latents: 4 },
    GraphSize { nodes: 50, edges: 78, latents: 10 },
    GraphSize { nodes: 100, edges: 150, latents: 10 },
    GraphSize { nodes: 250, edges: 360, latents: 30 },
];

impl GraphSize {
    /// Reference edge and latent counts for a node count, if it is one of the six grid sizes.
    pub fn reference_default(nodes: usize) -> Option<Self> {
        REFERENCE_GRAPH_SIZES.iter().copied().find(|s| s.nodes == nodes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub node_count: usize,
    pub edge_count: usize,
    pub latent_count: usize,
    pub cyclic: bool,
    pub form: Form,
    pub noise_mode: NoiseMode,
    pub edge_xy: bool,
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(size: GraphSize, cyclic: bool, form: Form, noise_mode: NoiseMode, edge_xy: bool, seed: u64) -> Self {
        Self {
            node_count: size.nodes,
            edge_count: size.edges,
            latent_count: size.latents,
            cyclic,
            form,
            noise_mode,
            edge_xy,
            sample_sizes: Vec::new(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.node_count;
        if n < 3 {
            return Err(Error::Config("need at least one covariate besides treatment and outcome".into()));
        }
        if self.latent_count > n - 2 {
            return Err(Error::Config(format!(
                "latent_count {} exceeds node_count - 2 = {}",
                self.latent_count,
                n - 2
            )));
        }
        let k = n - 2;
        let xy = usize::from(self.edge_xy);
        let available = if self.cyclic { k * (k - 1) } else { k * (k - 1) / 2 } + 2 * k + xy;
        if self.edge_count > available {
            return Err(Error::Config(format!(
                "{} edges requested but only {available} are admissible",
                self.edge_count
            )));
        }
        if self.edge_count < xy {
            return Err(Error::Config("edge_count must include the treatment edge".into()));
        }
        if self.cyclic && (k < 2 || self.edge_count < 2 + xy) {
            return Err(Error::Config("too few covariates or edges to form a cycle".into()));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        Ok(())
    }
}

/// Random SCM in pre-treatment shape.
///
/// Covariates are `V1..Vk`, followed by the treatment `X` and outcome `Y`.
/// Covariates may point at each other, at `X` and at `Y`; `X -> Y` is present
/// iff `edge_xy`. Cyclic models start from a directed ring over 2-4 random
/// covariates; acyclic ones only use covariate edges consistent with a random
/// topological order. Latents are drawn among covariates.
pub fn generate_scm(cfg: &GenConfig) -> Result<Scm> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.node_count - 2;
    let (x, y) = (k, k + 1);

    let mut edges: Vec<(Node, Node)> = Vec::with_capacity(cfg.edge_count);
    if cfg.edge_xy {
        edges.push((x, y));
    }

    let mut covs: Vec<Node> = (0..k).collect();
    let mut candidates: Vec<(Node, Node)> = Vec::new();
    if cfg.cyclic {
        let longest = k.min(4).min(cfg.edge_count - usize::from(cfg.edge_xy));
        let ring_len = rng.random_range(2..=longest);
        covs.shuffle(&mut rng);
        for i in 0..ring_len {
            edges.push((covs[i], covs[(i + 1) % ring_len]));
        }
        for a in 0..k {
            for b in 0..k {
                if a != b && !edges.contains(&(a, b)) {
                    candidates.push((a, b));
                }
            }
        }
    } else {
        covs.shuffle(&mut rng);
        for i in 0..k {
            for j in i + 1..k {
                candidates.push((covs[i], covs[j]));
            }
        }
    }
    for c in 0..k {
        candidates.push((c, x));
        candidates.push((c, y));
    }
    candidates.sort_unstable();
    candidates.shuffle(&mut rng);
    let missing = cfg.edge_count.saturating_sub(edges.len());
    edges.extend(candidates.into_iter().take(missing));

    let mut latent: Vec<Node> = (0..k).collect();
    latent.shuffle(&mut rng);
    latent.truncate(cfg.latent_count);
    let observed = (0..cfg.node_count).filter(|v| !latent.contains(v));

    let mut labels: Vec<String> = (1..=k).map(|i| format!("V{i}")).collect();
    labels.push("X".into());
    labels.push("Y".into());
    let graph = DirectedGraph::new(labels, edges, observed)?;

    let noise: Vec<NoiseSpec> = (0..cfg.node_count)
        .map(|_| {
            let family = match cfg.noise_mode {
                NoiseMode::Gaussian => NoiseFamily::Gaussian,
                NoiseMode::NonGaussian => NoiseFamily::Uniform,
                NoiseMode::Mixed => {
                    if rng.random_bool(0.5) {
                        NoiseFamily::Gaussian
                    } else {
                        NoiseFamily::Uniform
                    }
                }
            };
            NoiseSpec { family, scale: rng.random_range(NOISE_SD_MIN..NOISE_SD_MAX) }
        })
        .collect();

    let weights = draw_weights(&graph, cfg.form, &mut rng)?;
    Scm::new(graph, weights, cfg.form, noise)?.with_roles(x, y)
}

fn random_weights(g: &DirectedGraph, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = g.node_count();
    let mut w = DMatrix::zeros(n, n);
    for (i, j) in g.edges() {
        let mag = rng.random_range(WEIGHT_MIN..WEIGHT_MAX);
        w[(j, i)] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    w
}

fn draw_weights(g: &DirectedGraph, form: Form, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let n = g.node_count();
    let mut w = random_weights(g, rng);
    match form {
        Form::Linear => {
            let invertible =
                |w: &DMatrix<f64>| (DMatrix::identity(n, n) - w).determinant().abs() > DET_TOLERANCE;
            let mut attempts = 0;
            while !invertible(&w) && attempts < RESAMPLE_ATTEMPTS {
                w = random_weights(g, rng);
                attempts += 1;
            }
            let mut shrinks = 0;
            while !invertible(&w) {
                w *= SHRINK;
                shrinks += 1;
                if shrinks > 1000 {
                    return Err(Error::InvalidModel("could not make I - W invertible".into()));
                }
            }
        }
        Form::Tanh => {
            let norm = spectral_norm(&w);
            if norm >= 1.0 {
                w /= norm / TANH_TARGET_NORM;
            }
        }
    }
    Ok(w)
}
