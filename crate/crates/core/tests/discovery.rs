mod common;

use common::{graph_corpus, rng};
use cycadj::ci::CiProvider;
use cycadj::graph::markov_blanket;
use cycadj::mb::{discover_mb, MbAlgorithm};
use cycadj::sim::{generate_scm, sample, Form, GenConfig, GraphSize, NoiseMode};
use cycadj::SeparationKind;
use rand::Rng;

#[test]
fn oracle_discovery_recovers_blankets() {
    for g in graph_corpus(41, 120, 7) {
        let p = CiProvider::oracle(g.clone());
        let vars = p.variables();
        for t in vars.iter() {
            let truth = markov_blanket(&g, t, SeparationKind::SigmaSeparation).unwrap();
            for alg in MbAlgorithm::ALL {
                assert_eq!(discover_mb(alg, &p, t, &vars).unwrap(), truth, "{alg} on node {t}");
            }
        }
    }
}

#[test]
fn blankets_are_symmetric() {
    for g in graph_corpus(42, 60, 8) {
        for a in g.observed().iter() {
            let mb = markov_blanket(&g, a, SeparationKind::SigmaSeparation).unwrap();
            for b in mb.iter() {
                assert!(markov_blanket(&g, b, SeparationKind::SigmaSeparation).unwrap().contains(a));
            }
        }
    }
}

#[test]
fn data_driven_discovery_on_large_samples() {
    // Strong weights and many samples: Fisher-Z should reproduce the oracle
    // blanket for most targets.
    let mut r = rng(43);
    let (mut hits, mut total) = (0, 0);
    for rep in 0..6 {
        let size = GraphSize { nodes: 8, edges: 10, latents: 0 };
        let cfg = GenConfig::new(size, rep % 2 == 0, Form::Linear, NoiseMode::Gaussian, true, r.random());
        let scm = generate_scm(&cfg).unwrap();
        let data = sample(&scm, 20_000, r.random()).unwrap();
        let p = CiProvider::fisher_z(data, 0.01).unwrap();
        let vars = p.variables();
        for t in vars.iter() {
            let truth = markov_blanket(scm.graph(), t, SeparationKind::SigmaSeparation).unwrap();
            for alg in MbAlgorithm::ALL {
                total += 1;
                hits += usize::from(discover_mb(alg, &p, t, &vars).unwrap() == truth);
            }
        }
    }
    assert!(hits as f64 >= 0.6 * total as f64, "{hits}/{total}");
}
