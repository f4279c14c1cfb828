use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Form, NoiseFamily, NoiseSpec, Scm};
use crate::error::{Error, Result};
use crate::graph::Node;
use crate::par::{self, Exec};
use crate::seed;

/// Stop once one fixed-point step moves the state by less than this
/// (sup norm).
pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITERS: usize = 10_000;

/// Rows per independently seeded block; keeps output independent of thread
/// count.
const BLOCK: usize = 4096;

enum Solver {
    /// `V = A U`
    Linear(DMatrix<f64>),
    /// `V = tanh(W V) + U`
    Tanh(DMatrix<f64>),
}

impl Solver {
    fn build(scm: &Scm, clamp: Option<Node>) -> Result<Self> {
        let n = scm.graph().node_count();
        let mut w = scm.weights().clone();
        if let Some(x) = clamp {
            w.row_mut(x).fill(0.0);
        }
        match scm.form() {
            Form::Linear => {
                let a = (DMatrix::identity(n, n) - w)
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidModel("I - W is singular".into()))?;
                Ok(Solver::Linear(a))
            }
            Form::Tanh => Ok(Solver::Tanh(w)),
        }
    }

    fn solve(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Solver::Linear(a) => Ok(a * u),
            Solver::Tanh(w) => fixed_point(w, u),
        }
    }
}

/// Iterates `V <- tanh(W V) + U` from `V = U`. The returned state satisfies
/// `|tanh(W V) + U - V|_inf < FIXED_POINT_TOL`.
fn fixed_point(w: &DMatrix<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
    let mut v = u.clone();
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let next = (w * &v).map(f64::tanh) + u;
        let step = (&next - &v).amax();
        if step < FIXED_POINT_TOL {
            return Ok(v);
        }
        v = next;
    }
    Err(Error::NoConvergence(FIXED_POINT_MAX_ITERS))
}

fn draw(spec: &NoiseSpec, rng: &mut ChaCha8Rng) -> f64 {
    match spec.family {
        NoiseFamily::Gaussian => {
            Normal::new(0.0, spec.scale).expect("positive scale").sample(rng)
        }
        NoiseFamily::Uniform => {
            let h = spec.scale * 3f64.sqrt();
            rng.random_range(-h..h)
        }
    }
}

/// Full `n x |V|` sample including latent nodes.
pub(crate) fn sample_full(
    scm: &Scm,
    n: usize,
    seed: u64,
    intervention: Option<(Node, f64)>,
    exec: Exec,
) -> Result<DMatrix<f64>> {
    Ok(sample_blocks(scm, n, seed, intervention, exec, false)?.0)
}

/// Full observational sample of all nodes together with the exogenous noise
/// that produced it, both `n x |V|`.
pub fn sample_with_noise(scm: &Scm, n: usize, seed: u64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (v, u) = sample_blocks(scm, n, seed, None, Exec::default(), true)?;
    Ok((v, u.expect("noise requested")))
}

fn sample_blocks(
    scm: &Scm,
    n: usize,
    seed: u64,
    intervention: Option<(Node, f64)>,
    exec: Exec,
    keep_noise: bool,
) -> Result<(DMatrix<f64>, Option<DMatrix<f64>>)> {
    if n == 0 {
        return Err(Error::InvalidQuery("sample size must be at least 1".into()));
    }
    if let Some((x, value)) = intervention {
        scm.graph().check_node(x)?;
        if !value.is_finite() {
            return Err(Error::InvalidQuery("intervention value must be finite".into()));
        }
    }
    let solver = Solver::build(scm, intervention.map(|(x, _)| x))?;
    let p = scm.graph().node_count();
    let blocks = n.div_ceil(BLOCK);
    let parts = par::map_indexed(exec, blocks, |b| -> Result<(Vec<f64>, Vec<f64>)> {
        let rows = BLOCK.min(n - b * BLOCK);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[b as u64]));
        let mut out = Vec::with_capacity(rows * p);
        let mut noise = Vec::with_capacity(if keep_noise { rows * p } else { 0 });
        let mut u = DVector::zeros(p);
        for _ in 0..rows {
            for (v, spec) in scm.noise().iter().enumerate() {
                u[v] = draw(spec, &mut rng);
            }
            if let Some((x, value)) = intervention {
                u[x] = value;
            }
            out.extend(solver.solve(&u)?.iter());
            if keep_noise {
                noise.extend(u.iter());
            }
        }
        Ok((out, noise))
    });
    let mut flat = Vec::with_capacity(n * p);
    let mut flat_noise = Vec::with_capacity(if keep_noise { n * p } else { 0 });
    for part in parts {
        let (v, u) = part?;
        flat.extend(v);
        flat_noise.extend(u);
    }
    let values = DMatrix::from_row_slice(n, p, &flat);
    let noise = keep_noise.then(|| DMatrix::from_row_slice(n, p, &flat_noise));
    Ok((values, noise))
}

fn observed_dataset(scm: &Scm, full: DMatrix<f64>, seed: u64) -> Result<Dataset> {
    let obs = scm.graph().observed();
    let cols: Vec<usize> = obs.iter().collect();
    let values = full.select_columns(&cols);
    let labels = cols.iter().map(|&v| scm.graph().label(v).to_string()).collect();
    Dataset::new(labels, values, Some(seed))
}

/// `n` observational samples of the observed variables.
pub fn sample(scm: &Scm, n: usize, seed: u64) -> Result<Dataset> {
    sample_with_exec(scm, n, seed, Exec::default())
}

/// [`sample`] with an explicit execution mode; the output does not depend
/// on it.
pub fn sample_with_exec(scm: &Scm, n: usize, seed: u64, exec: Exec) -> Result<Dataset> {
    let full = sample_full(scm, n, seed, None, exec)?;
    observed_dataset(scm, full, seed)
}

/// `n` samples under `do(x = value)`. Shares its noise stream with
/// [`sample`] for the same seed, so differences between two interventions
/// with one seed are free of sampling noise.
pub fn sample_interventional(scm: &Scm, x: Node, value: f64, n: usize, seed: u64) -> Result<Dataset> {
    let full = sample_full(scm, n, seed, Some((x, value)), Exec::default())?;
    observed_dataset(scm, full, seed)
}

/// Total effect `d/dx E[Y | do(X = x)]` of a linear model:
/// `e_y' (I - W_KK)^{-1} W_KX` with `K = V \ {x}`.
pub fn true_causal_effect(scm: &Scm, x: Node, y: Node) -> Result<f64> {
    if scm.form() != Form::Linear {
        return Err(Error::Unsupported(
            "nonlinear models have no scalar causal effect".into(),
        ));
    }
    let g = scm.graph();
    g.check_node(x)?;
    g.check_node(y)?;
    if x == y {
        return Err(Error::InvalidQuery("treatment and outcome must differ".into()));
    }
    let keep: Vec<Node> = g.nodes().filter(|&v| v != x).collect();
    let w = scm.weights();
    let w_kk = w.select_rows(&keep).select_columns(&keep);
    let w_kx = DVector::from_iterator(keep.len(), keep.iter().map(|&k| w[(k, x)]));
    let m = DMatrix::identity(keep.len(), keep.len()) - w_kk;
    let solved = m
        .lu()
        .solve(&w_kx)
        .ok_or_else(|| Error::InvalidModel("I - W_KK is singular".into()))?;
    let pos = keep.iter().position(|&v| v == y).expect("y is in K");
    Ok(solved[pos])
}
