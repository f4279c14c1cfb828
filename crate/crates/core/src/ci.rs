//! Conditional-independence answering over an exact graph oracle or
//! Fisher-Z partial-correlation tests on data.
//!
//! Each distinct query `(a, b, s)` is answered once and cached under a
//! symmetric key; [`CiProvider::tests_performed`] counts distinct queries.
//! Fisher-Z caches the statistic rather than the verdict, so asking the same
//! question at another significance level is free.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Node, NodeSet, SeparationKind, Separator};
use crate::sim::Dataset;

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Above this condition number the correlation submatrix is inverted with
/// a pseudo-inverse.
const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug)]
enum Backend {
    Oracle(DirectedGraph),
    FisherZ { data: Arc<Dataset>, corr: DMatrix<f64> },
}

#[derive(Clone, Copy, Debug)]
enum Answer {
    Separated(bool),
    Z(f64),
}

type Key = (Node, Node, NodeSet);

#[derive(Debug)]
pub struct CiProvider {
    backend: Backend,
    alpha: f64,
    tests: AtomicUsize,
    cache: Mutex<HashMap<Key, Answer>>,
}

impl CiProvider {
    /// σ-separation over the observed nodes of `graph`.
    pub fn oracle(graph: DirectedGraph) -> Self {
        Self::with_backend(Backend::Oracle(graph), DEFAULT_ALPHA)
    }

    /// Fisher-Z tests on `data`; variables are column indices.
    pub fn fisher_z(data: impl Into<Arc<Dataset>>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let data = data.into();
        let corr = correlation(data.values())?;
        Ok(Self::with_backend(Backend::FisherZ { data, corr }, alpha))
    }

    fn with_backend(backend: Backend, alpha: f64) -> Self {
        Self { backend, alpha, tests: AtomicUsize::new(0), cache: Mutex::new(HashMap::new()) }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self.backend, Backend::Oracle(_))
    }

    /// Number of rows behind a data-backed provider.
    pub fn sample_size(&self) -> Option<usize> {
        match &self.backend {
            Backend::Oracle(_) => None,
            Backend::FisherZ { data, .. } => Some(data.n_samples()),
        }
    }

    pub fn dataset(&self) -> Option<&Dataset> {
        match &self.backend {
            Backend::Oracle(_) => None,
            Backend::FisherZ { data, .. } => Some(data),
        }
    }

    pub fn graph(&self) -> Option<&DirectedGraph> {
        match &self.backend {
            Backend::Oracle(g) => Some(g),
            Backend::FisherZ { .. } => None,
        }
    }

    /// The variables queries may mention.
    pub fn variables(&self) -> NodeSet {
        match &self.backend {
            Backend::Oracle(g) => g.observed(),
            Backend::FisherZ { data, .. } => (0..data.n_vars()).collect(),
        }
    }

    pub fn label(&self, v: Node) -> &str {
        match &self.backend {
            Backend::Oracle(g) => g.label(v),
            Backend::FisherZ { data, .. } => &data.columns()[v],
        }
    }

    pub fn index_of(&self, label: &str) -> Result<Node> {
        match &self.backend {
            Backend::Oracle(g) => g.index_of(label),
            Backend::FisherZ { data, .. } => data.column_index(label),
        }
    }

    /// Distinct queries answered so far.
    pub fn tests_performed(&self) -> usize {
        self.tests.load(Ordering::Relaxed)
    }

    pub fn independent(&self, a: Node, b: Node, s: &NodeSet) -> Result<bool> {
        self.independent_at(a, b, s, self.alpha)
    }

    /// Verdict at a significance level other than the provider's own. The
    /// oracle ignores `alpha`.
    pub fn independent_at(&self, a: Node, b: Node, s: &NodeSet, alpha: f64) -> Result<bool> {
        check_alpha(alpha)?;
        Ok(match self.answer(a, b, s)? {
            Answer::Separated(sep) => sep,
            Answer::Z(z) => z.abs() < critical_value(alpha),
        })
    }

    /// Strength of dependence, `|z|`; `None` for the oracle.
    pub fn association(&self, a: Node, b: Node, s: &NodeSet) -> Result<Option<f64>> {
        Ok(match self.answer(a, b, s)? {
            Answer::Separated(_) => None,
            Answer::Z(z) => Some(z.abs()),
        })
    }

    fn answer(&self, a: Node, b: Node, s: &NodeSet) -> Result<Answer> {
        self.validate(a, b, s)?;
        let key = (a.min(b), a.max(b), s.clone());
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*hit);
        }
        let answer = match &self.backend {
            Backend::Oracle(g) => {
                Answer::Separated(Separator::new(g, SeparationKind::SigmaSeparation)?.separated(a, b, s)?)
            }
            Backend::FisherZ { data, corr } => {
                Answer::Z(fisher_z_statistic(corr, data.n_samples(), a, b, s, data.columns())?)
            }
        };
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.insert(key, answer).is_none() {
            self.tests.fetch_add(1, Ordering::Relaxed);
        }
        Ok(answer)
    }

    fn validate(&self, a: Node, b: Node, s: &NodeSet) -> Result<()> {
        if a == b {
            return Err(Error::InvalidQuery("independence of a variable with itself".into()));
        }
        if s.contains(a) || s.contains(b) {
            return Err(Error::InvalidQuery("conditioning set contains a tested variable".into()));
        }
        match &self.backend {
            Backend::Oracle(g) => {
                for v in [a, b].into_iter().chain(s.iter()) {
                    g.check_node(v)?;
                    if !g.is_observed(v) {
                        return Err(Error::LatentNode(g.label(v).to_string()));
                    }
                }
            }
            Backend::FisherZ { data, .. } => {
                let p = data.n_vars();
                if let Some(v) = [a, b].into_iter().chain(s.iter()).find(|&v| v >= p) {
                    return Err(Error::NodeOutOfRange { index: v, count: p });
                }
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Two-sided standard normal quantile `Φ⁻¹(1 - α/2)`.
pub fn critical_value(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

/// Pearson correlation matrix of the columns.
pub fn correlation(values: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = values.nrows();
    if n < 2 {
        return Err(Error::SampleTooSmall { n, cond: 0 });
    }
    let mut centered = values.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    let sd: Vec<f64> = (0..cov.nrows()).map(|i| cov[(i, i)].sqrt()).collect();
    if let Some(j) = sd.iter().position(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::Degenerate(format!("column {j} has zero variance")));
    }
    Ok(DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| {
        if i == j { 1.0 } else { cov[(i, j)] / (sd[i] * sd[j]) }
    }))
}

/// Partial correlation of `a` and `b` given `s` from the inverse of the
/// correlation submatrix over `{a, b} ∪ s`.
pub fn partial_correlation(corr: &DMatrix<f64>, a: Node, b: Node, s: &NodeSet) -> f64 {
    if s.is_empty() {
        return corr[(a, b)];
    }
    let idx: Vec<usize> = [a, b].into_iter().chain(s.iter()).collect();
    let sub = corr.select_rows(&idx).select_columns(&idx);
    let eig = sub.symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let bottom = eig.eigenvalues.min();
    let cutoff = if bottom <= 0.0 || top / bottom > CONDITION_LIMIT {
        log::warn!("near-singular conditioning set of size {}; using pseudo-inverse", s.len());
        top / CONDITION_LIMIT
    } else {
        0.0
    };
    // Only the leading 2x2 block of the (pseudo-)inverse is needed.
    let (mut paa, mut pbb, mut pab) = (0.0, 0.0, 0.0);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let (ua, ub) = (eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]);
        paa += ua * ua / lambda;
        pbb += ub * ub / lambda;
        pab += ua * ub / lambda;
    }
    -pab / (paa * pbb).sqrt()
}

fn fisher_z_statistic(
    corr: &DMatrix<f64>,
    n: usize,
    a: Node,
    b: Node,
    s: &NodeSet,
    labels: &[String],
) -> Result<f64> {
    let dof = n as f64 - s.len() as f64 - 3.0;
    if dof <= 0.0 {
        return Err(Error::SampleTooSmall { n, cond: s.len() });
    }
    let r = partial_correlation(corr, a, b, s);
    if !r.is_finite() {
        log::warn!(
            "partial correlation of {} and {} is undefined; treating as dependent",
            labels[a],
            labels[b]
        );
        return Ok(f64::INFINITY);
    }
    let r = r.clamp(-1.0, 1.0);
    Ok(dof.sqrt() * r.atanh())
}
