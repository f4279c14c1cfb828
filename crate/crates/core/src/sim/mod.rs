//! Simple structural causal models: generation, sampling and ground truth.

mod dataset;
mod generate;
pub mod io;
mod sample;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use dataset::Dataset;
pub use generate::{generate_scm, GenConfig, GraphSize, REFERENCE_GRAPH_SIZES};
pub use sample::{sample, sample_interventional, sample_with_exec, sample_with_noise, true_causal_effect, FIXED_POINT_MAX_ITERS, FIXED_POINT_TOL};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Node};

/// Smallest admissible `|det(I - W)|` for linear models.
pub const DET_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `V = W V + U`
    Linear,
    /// `V = tanh(W V) + U`
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Gaussian,
    Uniform,
}

/// Exogenous noise; `scale` is the standard deviation for both families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    Gaussian,
    NonGaussian,
    Mixed,
}

impl NoiseMode {
    pub fn name(self) -> &'static str {
        match self {
            NoiseMode::Gaussian => "gaussian",
            NoiseMode::NonGaussian => "non-gaussian",
            NoiseMode::Mixed => "mixed",
        }
    }
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Linear => "linear",
            Form::Tanh => "tanh",
        }
    }
}

/// A simple SCM over a directed graph. `weights[(j, i)]` is the coefficient
/// of node `i` in the structural equation of node `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scm {
    graph: DirectedGraph,
    weights: DMatrix<f64>,
    form: Form,
    noise: Vec<NoiseSpec>,
    treatment: Option<Node>,
    outcome: Option<Node>,
}

impl Scm {
    /// Validates the sparsity pattern, noise specs and the solvability
    /// condition of the chosen form.
    pub fn new(
        graph: DirectedGraph,
        weights: DMatrix<f64>,
        form: Form,
        noise: Vec<NoiseSpec>,
    ) -> Result<Self> {
        let n = graph.node_count();
        if weights.nrows() != n || weights.ncols() != n {
            return Err(Error::InvalidModel(format!(
                "weight matrix is {}x{}, expected {n}x{n}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        for j in 0..n {
            for i in 0..n {
                let w = weights[(j, i)];
                if !w.is_finite() {
                    return Err(Error::InvalidModel("non-finite weight".into()));
                }
                if (w != 0.0) != graph.has_edge(i, j) {
                    return Err(Error::InvalidModel(format!(
                        "weight pattern disagrees with graph at {} -> {}",
                        graph.label(i),
                        graph.label(j)
                    )));
                }
            }
        }
        if noise.len() != n {
            return Err(Error::InvalidModel(format!("{} noise specs for {n} nodes", noise.len())));
        }
        if noise.iter().any(|s| !(s.scale.is_finite() && s.scale > 0.0)) {
            return Err(Error::InvalidModel("noise scale must be positive".into()));
        }
        match form {
            Form::Linear => {
                let det = (DMatrix::identity(n, n) - &weights).determinant();
                if det.is_nan() || det.abs() <= DET_TOLERANCE {
                    return Err(Error::InvalidModel(format!("I - W is singular (det = {det:e})")));
                }
            }
            Form::Tanh => {
                let norm = spectral_norm(&weights);
                if norm.is_nan() || norm >= 1.0 {
                    return Err(Error::InvalidModel(format!(
                        "spectral norm {norm} of W is not below 1"
                    )));
                }
            }
        }
        Ok(Self { graph, weights, form, noise, treatment: None, outcome: None })
    }

    pub fn with_roles(mut self, treatment: Node, outcome: Node) -> Result<Self> {
        self.graph.check_node(treatment)?;
        self.graph.check_node(outcome)?;
        self.treatment = Some(treatment);
        self.outcome = Some(outcome);
        Ok(self)
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, from: Node, to: Node) -> f64 {
        self.weights[(to, from)]
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn noise(&self) -> &[NoiseSpec] {
        &self.noise
    }

    pub fn treatment(&self) -> Option<Node> {
        self.treatment
    }

    pub fn outcome(&self) -> Option<Node> {
        self.outcome
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}
