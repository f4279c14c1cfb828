//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use common::{graph_corpus, pre_treatment_graph, random_graph, rng, subsets};
use cycadj::bench::{run_benchmark, BenchConfig, MetricRow, SizeSpec};
use cycadj::ci::CiProvider;
use cycadj::graph::{
    acyclify, acyclify_preserving, intervention_node_check, is_backdoor_adjustment_set, markov_blanket, Separator,
};
use cycadj::lsas::{run_lsas, LsasOptions, Verdict};
use cycadj::mb::{discover_mb, MbAlgorithm};
use cycadj::par::Exec;
use cycadj::sim::{
    generate_scm, sample_interventional, sample_with_noise, true_causal_effect, Dataset, Form, GenConfig, GraphSize,
    NoiseFamily, NoiseMode, NoiseSpec, Scm,
};
use cycadj::{seed, DirectedGraph, Node, NodeSet, SeparationKind};
use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const CORPUS_SEED: u64 = 1;
const CORPUS_SIZE: usize = 200;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn corpus() -> Vec<DirectedGraph> {
    graph_corpus(CORPUS_SEED, CORPUS_SIZE, 8)
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.1}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn transfer() -> Outcome {
    let start = Instant::now();
    let graphs = corpus();
    let cyclic = graphs.iter().filter(|g| !g.is_acyclic()).count();
    let (mut queries, mut mismatches) = (0usize, 0usize);
    for g in &graphs {
        let acy = acyclify(g, None).unwrap();
        let sigma = Separator::new(g, SeparationKind::SigmaSeparation).unwrap();
        let d = Separator::new(&acy, SeparationKind::DSeparation).unwrap();
        for a in g.nodes() {
            for b in g.nodes().filter(|&b| b > a) {
                let rest: Vec<Node> = g.nodes().filter(|&v| v != a && v != b).collect();
                for s in subsets(&rest) {
                    queries += 1;
                    if sigma.separated(a, b, &s).unwrap() != d.separated(a, b, &s).unwrap() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(120), start);
    outcome(
        mismatches == 0 && 2 * cyclic >= graphs.len() && fast,
        format!("{queries} queries, {mismatches} mismatches, {cyclic}/{} cyclic, {time}", graphs.len()),
    )
}

fn blanket_transfer() -> Outcome {
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for g in corpus() {
        let acy = acyclify(&g, None).unwrap();
        for x in g.observed().iter() {
            checked += 1;
            let sigma = markov_blanket(&g, x, SeparationKind::SigmaSeparation).unwrap();
            if sigma != markov_blanket(&acy, x, SeparationKind::DSeparation).unwrap() {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{checked} blankets, {mismatches} mismatches"))
}

fn preserving_acyclification() -> Outcome {
    let mut r = rng(3);
    let (mut bad, mut cyclic) = (0usize, 0usize);
    for _ in 0..200 {
        let k = r.random_range(2..=6);
        let latents = r.random_range(0..=1);
        let (g, x, y) = pre_treatment_graph(&mut r, k, latents);
        cyclic += usize::from(!g.is_acyclic());
        let acy = acyclify_preserving(&g, x, y).unwrap();
        let ok = acy.is_acyclic() && acy.children(y).is_empty() && acy.has_edge(x, y) == g.has_edge(x, y);
        bad += usize::from(!ok);
    }
    outcome(bad == 0, format!("200 graphs ({cyclic} cyclic), {bad} violations"))
}

fn backdoor_routes() -> Outcome {
    let mut r = rng(4);
    let (mut disagreements, mut valid) = (0usize, 0usize);
    let mut done = 0;
    while done < 10_000 {
        let n = r.random_range(3..=8);
        let latents = r.random_range(0..=2).min(n - 2);
        let p = r.random_range(0.1..0.4);
        let cyc = r.random_bool(0.5);
        let g = random_graph(&mut r, n, p, cyc, latents);
        let obs: Vec<Node> = g.observed().into_vec();
        for _ in 0..20 {
            let pair: Vec<Node> = obs.choose_multiple(&mut r, 2).copied().collect();
            let (x, y) = (pair[0], pair[1]);
            let z: NodeSet = obs.iter().copied().filter(|&v| v != x && v != y && r.random_bool(0.4)).collect();
            let a = is_backdoor_adjustment_set(&g, x, y, &z).unwrap();
            let b = intervention_node_check(&g, x, y, &z).unwrap();
            valid += usize::from(a);
            disagreements += usize::from(a != b);
            done += 1;
        }
    }
    outcome(disagreements == 0, format!("{done} queries ({valid} valid), {disagreements} disagreements"))
}

fn oracle_soundness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(5);
    let (mut violations, mut decided, mut identified, mut errors) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..500u64 {
        let nodes = r.random_range(4..=10);
        let latents = r.random_range(1..=2).min(nodes - 3);
        let (cyclic, edge_xy) = (i % 2 == 0, i / 2 % 2 == 0);
        let k = nodes - 2;
        let admissible = if cyclic { k * (k - 1) } else { k * (k - 1) / 2 } + 2 * k + usize::from(edge_xy);
        let edges = r.random_range(nodes..=nodes + nodes / 2).min(admissible);
        let size = GraphSize { nodes, edges, latents };
        let cfg = GenConfig::new(size, cyclic, Form::Linear, NoiseMode::Gaussian, edge_xy, seed::derive(5, &[i]));
        let Ok(scm) = generate_scm(&cfg) else {
            errors += 1;
            continue;
        };
        let g = scm.graph();
        let (x, y) = (scm.treatment().unwrap(), scm.outcome().unwrap());
        let p = CiProvider::oracle(g.clone());
        let Ok(out) = run_lsas(&p, x, y, &LsasOptions::default()) else {
            errors += 1;
            continue;
        };
        match out.verdict {
            Verdict::Identified { z, .. } => {
                decided += 1;
                identified += 1;
                let valid = is_backdoor_adjustment_set(g, x, y, &z).unwrap()
                    && intervention_node_check(g, x, y, &z).unwrap();
                violations += usize::from(!g.has_edge(x, y) || !valid);
            }
            Verdict::NoEffect(_) => {
                decided += 1;
                violations += usize::from(g.has_edge(x, y));
            }
            Verdict::Undecidable => {}
        }
    }
    let ef = (decided - violations.min(decided)) as f64 / decided.max(1) as f64;
    let (fast, time) = within(Duration::from_secs(600), start);
    outcome(
        violations == 0 && errors == 0 && decided > 0 && fast,
        format!("{decided} decided ({identified} identified), {violations} violations, {errors} errors, EF {ef:.3}, {time}"),
    )
}

fn blanket_discovery() -> Outcome {
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for g in corpus() {
        let p = CiProvider::oracle(g.clone());
        let vars = p.variables();
        for t in vars.iter() {
            let truth = markov_blanket(&g, t, SeparationKind::SigmaSeparation).unwrap();
            for alg in MbAlgorithm::ALL {
                checked += 1;
                mismatches += usize::from(discover_mb(alg, &p, t, &vars).unwrap() != truth);
            }
        }
    }
    outcome(mismatches == 0, format!("{checked} runs over 4 algorithms, {mismatches} mismatches"))
}

fn random_linear_cyclic(r: &mut impl Rng) -> Scm {
    loop {
        let n = r.random_range(3..=6);
        let g = random_graph(&mut common::rng(r.random()), n, 0.3, true, 0);
        let mut w = DMatrix::zeros(n, n);
        for (a, b) in g.edges() {
            w[(b, a)] = r.random_range(0.2..0.8) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let noise = (0..n)
            .map(|_| NoiseSpec {
                family: if r.random_bool(0.5) { NoiseFamily::Gaussian } else { NoiseFamily::Uniform },
                scale: r.random_range(0.5..1.0),
            })
            .collect();
        if let Ok(scm) = Scm::new(g, w, Form::Linear, noise) {
            return scm;
        }
    }
}

fn numerics() -> Outcome {
    let start = Instant::now();
    let mut r = rng(7);
    let (h, n) = (0.5, 100_000);
    let mut close = 0;
    let mut worst = 0f64;
    for i in 0..50u64 {
        let scm = random_linear_cyclic(&mut r);
        let g = scm.graph();
        let proper = |v: Node| g.descendants(v).unwrap().without(v).into_vec();
        let sources: Vec<Node> = g.nodes().filter(|&v| !proper(v).is_empty()).collect();
        let x = *sources.choose(&mut r).unwrap();
        let y = *proper(x).choose(&mut r).unwrap();
        let truth = true_causal_effect(&scm, x, y).unwrap();
        let hi = sample_interventional(&scm, x, h, n, i).unwrap();
        let lo = sample_interventional(&scm, x, 0.0, n, i).unwrap();
        let fd = (hi.mean(y) - lo.mean(y)) / h;
        let re = (fd - truth).abs() / truth.abs();
        worst = worst.max(re);
        close += usize::from(re <= 0.02);
    }
    let mut residual = 0f64;
    for i in 0..20u64 {
        let size = GraphSize { nodes: 8, edges: 12, latents: 2 };
        let cfg = GenConfig::new(size, true, Form::Tanh, NoiseMode::Mixed, i % 2 == 0, seed::derive(70, &[i]));
        let scm = generate_scm(&cfg).unwrap();
        let (v, u) = sample_with_noise(&scm, 2_000, i).unwrap();
        let w = scm.weights();
        for row in 0..v.nrows() {
            let vr = v.row(row).transpose();
            let ur = u.row(row).transpose();
            residual = residual.max(((w * &vr).map(f64::tanh) + ur - vr).amax());
        }
    }
    let (fast, time) = within(Duration::from_secs(300), start);
    outcome(
        close >= 48 && residual < 1e-10 && fast,
        format!("{close}/50 within 2% (worst {worst:.2e}), tanh residual {residual:.1e}, {time}"),
    )
}

fn pooled(rows: &[MetricRow], cyclic: bool, n: usize) -> &MetricRow {
    rows.iter()
        .find(|r| r.noise == "all" && r.edge_xy == "all" && r.cyclic == cyclic && r.n_samples == Some(n))
        .expect("pooled row")
}

fn reproduction() -> Outcome {
    let start = Instant::now();
    let mut cfg = BenchConfig::new(vec![SizeSpec::Nodes(8)], 2026);
    cfg.exec = Exec::Sequential;
    let report = run_benchmark(&cfg).unwrap();
    let rows = &report.rows;
    let re = |c, n| pooled(rows, c, n).re_mean.unwrap_or(f64::NAN);
    let trend_acyclic = re(false, 15_000) < re(false, 1_000);
    let trend_cyclic = re(true, 15_000) < re(true, 1_000);
    let ef = pooled(rows, true, 15_000).ef.unwrap_or(0.0);
    let sizes = &cfg.sample_sizes;
    let (empty, total) = sizes.iter().fold((0.0, 0usize), |(e, t), &n| {
        let row = pooled(rows, true, n);
        let ok = row.instances - row.failed;
        (e + row.empty_fraction.unwrap_or(1.0) * ok as f64, t + ok)
    });
    let empty = empty / total as f64;
    let (fast, time) = within(Duration::from_secs(1800), start);
    outcome(
        trend_acyclic && trend_cyclic && ef >= 0.75 && empty <= 0.35 && fast,
        format!(
            "RE acyclic {:.3} -> {:.3}, RE cyclic {:.3} -> {:.3}, cyclic EF@15k {ef:.3}, cyclic empty {empty:.3}, {time}",
            re(false, 1_000),
            re(false, 15_000),
            re(true, 1_000),
            re(true, 15_000)
        ),
    )
}

fn calibration() -> Outcome {
    let trials = 2_000u64;
    let n = 5_000;
    let mut rejected = 0;
    for t in 0..trials {
        let mut r = rng(seed::derive(9, &[t]));
        let values = DMatrix::from_fn(n, 2, |_, _| StandardNormal.sample(&mut r));
        let data = Dataset::new(vec!["A".into(), "B".into()], values, None).unwrap();
        let p = CiProvider::fisher_z(data, 0.01).unwrap();
        rejected += usize::from(!p.independent(0, 1, &NodeSet::new()).unwrap());
    }
    let rate = rejected as f64 / trials as f64;
    outcome((0.005..=0.02).contains(&rate), format!("type-I rate {rate:.4} ({rejected}/{trials})"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    std::fs::write(
        &cfg,
        r#"{"sizes": [8], "reps": 4, "sample_sizes": [1000, 5000], "seed": 77}"#,
    )
    .unwrap();
    let run = |name: &str, extra: &[&str]| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_cycadj"))
            .args(["bench", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .args(extra)
            .stdout(Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("metrics.csv")).unwrap()
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    let c = run("c", &["--jobs", "1"]);
    outcome(a == b && a == c, format!("{} bytes; repeat identical {}, sequential identical {}", a.len(), a == b, a == c))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sigma separation equals d-separation after acyclification", transfer),
        ("Markov blankets survive acyclification", blanket_transfer),
        ("pre-treatment acyclification keeps the outcome a sink and the edge", preserving_acyclification),
        ("backdoor criterion equals intervention-node check", backdoor_routes),
        ("oracle LSAS soundness", oracle_soundness),
        ("Markov blanket algorithms on the oracle", blanket_discovery),
        ("closed-form effects and fixed-point sampling", numerics),
        ("8-node benchmark trends", reproduction),
        ("Fisher-Z calibration", calibration),
        ("benchmark determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked"));
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("criterion {:>2} {verdict}: {name}: {}", i + 1, result.detail);
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
