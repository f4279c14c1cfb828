//! Local search for adjustment sets.
//!
//! Witnesses `W` are drawn from the Markov blanket of the treatment `X` and
//! candidate sets `Z` from the blanket of the outcome `Y`. Two rules decide:
//!
//! * R1: `W ⊥̸ Y | Z` and `W ⊥ Y | Z ∪ {X}` proves `X -> Y` and makes `Z` a
//!   valid adjustment set.
//! * R2: `X ⊥ Y | Z` for some `Z ⊆ MB(Y) \ {X}`, or `W ⊥̸ X | Z` together
//!   with `W ⊥ Y | Z`, proves there is no edge `X -> Y`.
//!
//! Both rules only consult independence answers and therefore apply to
//! cyclic models as they are.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ci::CiProvider;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};
use crate::mb::{discover_mb, MbAlgorithm};
use crate::sim::Dataset;

/// Blankets up to this size are searched without a cap on `|Z|`.
pub const UNCAPPED_BLANKET: usize = 12;
/// Cap on `|Z|` for larger blankets.
pub const LARGE_BLANKET_MAX_Z: usize = 10;

/// Default cap on `|Z|` for an outcome blanket of the given size.
pub fn default_max_z(mb_y_len: usize) -> Option<usize> {
    if mb_y_len <= UNCAPPED_BLANKET { None } else { Some(LARGE_BLANKET_MAX_Z) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoEffectEvidence {
    SeparatingSet { z: NodeSet },
    Witness { witness: Node, z: NodeSet },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// `effect` is `None` when no estimate was requested or possible.
    Identified { effect: Option<f64>, z: NodeSet, witness: Node },
    NoEffect(NoEffectEvidence),
    Undecidable,
}

impl Verdict {
    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Identified { .. } => "identified",
            Verdict::NoEffect(_) => "no_effect",
            Verdict::Undecidable => "undecidable",
        }
    }

    /// Edge decision: `Some(true)` for R1, `Some(false)` for R2.
    pub fn decided_edge(&self) -> Option<bool> {
        match self {
            Verdict::Identified { .. } => Some(true),
            Verdict::NoEffect(_) => Some(false),
            Verdict::Undecidable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsasOutcome {
    pub verdict: Verdict,
    pub mb_x: NodeSet,
    pub mb_y: NodeSet,
    pub tests_used: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchOrder {
    /// Witnesses ascending, sets by size then lexicographically.
    #[default]
    Canonical,
    /// Witnesses and sets shuffled with the given seed.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LsasOptions {
    pub mb_alg: MbAlgorithm,
    /// `None` applies [`default_max_z`].
    pub max_z: Option<usize>,
    /// Regress `Y` on `[1, X, Z]` after an R1 hit when data are available.
    pub estimate: bool,
    pub order: SearchOrder,
}

impl Default for LsasOptions {
    fn default() -> Self {
        Self { mb_alg: MbAlgorithm::Tc, max_z: None, estimate: true, order: SearchOrder::Canonical }
    }
}

fn check_pair(p: &CiProvider, x: Node, y: Node) -> Result<NodeSet> {
    if x == y {
        return Err(Error::InvalidQuery("treatment and outcome must differ".into()));
    }
    let vars = p.variables();
    for v in [x, y] {
        if !vars.contains(v) {
            return Err(Error::InvalidQuery(format!("variable {v} is not available to the provider")));
        }
    }
    Ok(vars)
}

fn r1_holds(p: &CiProvider, x: Node, y: Node, w: Node, z: &NodeSet) -> Result<bool> {
    Ok(!p.independent(w, y, z)? && p.independent(w, y, &z.with(x))?)
}

fn r2_witness_holds(p: &CiProvider, x: Node, y: Node, w: Node, z: &NodeSet) -> Result<bool> {
    Ok(!p.independent(w, x, z)? && p.independent(w, y, z)?)
}

fn cap(max_z: Option<usize>, pool: &NodeSet) -> usize {
    max_z.unwrap_or(usize::MAX).min(pool.len())
}

/// First `(W, Z)` satisfying R1, witnesses outer and sets inner.
pub fn check_r1(
    p: &CiProvider,
    x: Node,
    y: Node,
    mb_x: &NodeSet,
    mb_y: &NodeSet,
    max_z: Option<usize>,
) -> Result<Option<(Node, NodeSet)>> {
    check_pair(p, x, y)?;
    for w in mb_x.without(y).iter() {
        let pool = mb_y.without(x).without(w);
        for z in pool.subsets_up_to(cap(max_z, &pool)) {
            if r1_holds(p, x, y, w, &z)? {
                return Ok(Some((w, z)));
            }
        }
    }
    Ok(None)
}

/// First R2 evidence. At each set size the separating-set clause is tried
/// before the witness clause.
pub fn check_r2(
    p: &CiProvider,
    x: Node,
    y: Node,
    mb_x: &NodeSet,
    mb_y: &NodeSet,
    max_z: Option<usize>,
) -> Result<Option<NoEffectEvidence>> {
    check_pair(p, x, y)?;
    let pool = mb_y.without(x);
    for k in 0..=cap(max_z, &pool) {
        for z in pool.subsets_of_size(k) {
            if p.independent(x, y, &z)? {
                return Ok(Some(NoEffectEvidence::SeparatingSet { z }));
            }
        }
        for w in mb_x.without(y).iter() {
            for z in pool.without(w).subsets_of_size(k) {
                if r2_witness_holds(p, x, y, w, &z)? {
                    return Ok(Some(NoEffectEvidence::Witness { witness: w, z }));
                }
            }
        }
    }
    Ok(None)
}

fn ordered<T>(mut items: Vec<T>, order: SearchOrder, salt: u64) -> Vec<T> {
    if let SearchOrder::Shuffled(seed) = order {
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, &[salt])));
    }
    items
}

/// Discovers both blankets, then walks witnesses and candidate sets. At
/// each `(W, Z)` R1 is tried first and returns on success; R2 returns
/// no-effect. A final sweep tries the separating-set clause of R2 on its own
/// so that it also applies when the treatment blanket offers no witness.
pub fn run_lsas(p: &CiProvider, x: Node, y: Node, opts: &LsasOptions) -> Result<LsasOutcome> {
    let vars = check_pair(p, x, y)?;
    let start = p.tests_performed();
    let mb_x = discover_mb(opts.mb_alg, p, x, &vars)?;
    let mb_y = discover_mb(opts.mb_alg, p, y, &vars)?;
    let max_z = opts.max_z.or_else(|| default_max_z(mb_y.len()));
    let witnesses = ordered(mb_x.without(y).into_vec(), opts.order, 0);

    let mut verdict = None;
    'search: for (i, &w) in witnesses.iter().enumerate() {
        let pool = mb_y.without(x).without(w);
        let sets = ordered(pool.subsets_up_to(cap(max_z, &pool)).collect(), opts.order, i as u64 + 1);
        for z in sets {
            if r1_holds(p, x, y, w, &z)? {
                let effect = match (opts.estimate, p.dataset()) {
                    (true, Some(data)) => Some(estimate_effect(data, x, y, &z)?),
                    _ => None,
                };
                verdict = Some(Verdict::Identified { effect, z, witness: w });
                break 'search;
            }
            if p.independent(x, y, &z)? {
                verdict = Some(Verdict::NoEffect(NoEffectEvidence::SeparatingSet { z }));
                break 'search;
            }
            if r2_witness_holds(p, x, y, w, &z)? {
                verdict = Some(Verdict::NoEffect(NoEffectEvidence::Witness { witness: w, z }));
                break 'search;
            }
        }
    }
    if verdict.is_none() {
        let pool = mb_y.without(x);
        let sets = ordered(pool.subsets_up_to(cap(max_z, &pool)).collect(), opts.order, u64::MAX);
        for z in sets {
            if p.independent(x, y, &z)? {
                verdict = Some(Verdict::NoEffect(NoEffectEvidence::SeparatingSet { z }));
                break;
            }
        }
    }
    Ok(LsasOutcome {
        verdict: verdict.unwrap_or(Verdict::Undecidable),
        mb_x,
        mb_y,
        tests_used: p.tests_performed() - start,
    })
}

/// Coefficient of `x` in the least-squares regression of `y` on `[1, x, z]`.
pub fn estimate_effect(data: &Dataset, x: Node, y: Node, z: &NodeSet) -> Result<f64> {
    let p = data.n_vars();
    for v in [x, y].into_iter().chain(z.iter()) {
        if v >= p {
            return Err(Error::NodeOutOfRange { index: v, count: p });
        }
    }
    if x == y || z.contains(x) || z.contains(y) {
        return Err(Error::InvalidQuery("x, y and z must be disjoint".into()));
    }
    let n = data.n_samples();
    let k = z.len() + 2;
    if n <= k {
        return Err(Error::SampleTooSmall { n, cond: z.len() });
    }
    let v = data.values();
    let cols: Vec<usize> = [x].into_iter().chain(z.iter()).collect();
    let design = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { v[(i, cols[j - 1])] });
    let target = DVector::from_iterator(n, v.column(y).iter().copied());

    let svd = design.clone().svd(true, true);
    let top = svd.singular_values.max();
    let tol = top * n.max(k) as f64 * f64::EPSILON;
    if svd.rank(tol) < k {
        return Err(Error::RankDeficient);
    }
    let beta = svd.solve(&target, tol).map_err(|e| Error::Degenerate(e.to_string()))?;
    let resid = &target - &design * &beta;
    let centered = target.add_scalar(-target.mean());
    if resid.norm_squared() <= 1e-20 * centered.norm_squared().max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("outcome is an exact linear function of the regressors".into()));
    }
    Ok(beta[1])
}
