use pilot::corpus::{enumerate_processes, reduce_symmetry, GeneratorSpec};
use pilot::formula::has_private_mobility;
use pilot::process::{Flat, Process};
use pilot::prover::{prove_progress, Limits, ProverError};
use pilot::semantics::{oracle_deadlock_free, oracle_progress, oracle_race_free};
use pilot::syntax::parse_process;
use rayon::prelude::*;

fn p(s: &str) -> Process {
    parse_process(s).unwrap()
}

fn sub_corpus() -> Vec<Process> {
    let spec = GeneratorSpec {
        max_components: 2,
        max_total_prefixes: 3,
        ..GeneratorSpec::default()
    };
    reduce_symmetry(&spec, enumerate_processes(spec))
        .into_par_iter()
        .filter(|q| Flat::of(q).threads.len() <= 2 && !has_private_mobility(q) && oracle_race_free(q).is_none())
        .collect()
}

#[test]
fn prover_agrees_with_the_open_oracle() {
    let corpus = sub_corpus();
    assert!(corpus.len() > 1_000);
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|q| {
            let oracle = oracle_progress(q);
            match prove_progress(q, Limits::default()) {
                Ok(v) if v.progress == oracle => None,
                other => Some(format!("{q}: oracle {oracle}, prover {:?}", other.map(|v| v.progress))),
            }
        })
        .collect();
    assert!(failures.is_empty(), "{} failures, e.g. {:?}", failures.len(), &failures[..failures.len().min(5)]);
}

#[test]
fn deadlock_freedom_implies_progress() {
    for q in sub_corpus().iter().filter(|q| oracle_deadlock_free(q).is_deadlock_free()) {
        assert!(oracle_progress(q), "{q}");
        assert!(prove_progress(q, Limits::default()).unwrap().progress, "{q}");
    }
}

#[test]
fn small_cases() {
    let yes = ["y!c.0", "0", "x?b.y!b.0", "new x.(x!a.y?c.0 | x?b.0)", "x bra{l: 0, m: y!c.0}"];
    let no = ["new x. x!a.0", "new x.(x?b.0 | x sel{l: 0})", "new x.(x!a.0 | y?b.x?c.0 | x sel{l: 0})"];
    for s in yes {
        assert!(oracle_progress(&p(s)), "{s}");
        assert!(prove_progress(&p(s), Limits::default()).unwrap().progress, "{s}");
    }
    for s in no {
        assert!(!oracle_progress(&p(s)), "{s}");
        assert!(!prove_progress(&p(s), Limits::default()).unwrap().progress, "{s}");
    }
}

#[test]
fn private_mobility_is_refused() {
    for s in ["new a.(b!a.a!c.0)", "new a.(x!a.0 | a?b.0)"] {
        assert!(matches!(prove_progress(&p(s), Limits::default()), Err(ProverError::PrivateMobility)), "{s}");
    }
}
