use pilot::corpus::{enumerate_processes, reduce_symmetry, GeneratorSpec};
use pilot::process::{is_unambiguous, Process};
use pilot::prover::{check_derivation, prove_encoding, Derivation, EncodingVerdict, ProverError, Rule};
use pilot::semantics::{oracle_deadlock_free, oracle_race_free};
use rayon::prelude::*;

fn small_corpus() -> Vec<Process> {
    let spec = GeneratorSpec {
        max_total_prefixes: 3,
        ..GeneratorSpec::default()
    };
    reduce_symmetry(&spec, enumerate_processes(spec))
}

fn encoding_fragment(d: &Derivation) -> bool {
    use Rule::*;
    matches!(d.rule, Unit | Ax | Par | Mix | Prec | With | Oplus | Ex | NewUnit)
        && d.conclusion.store.is_empty()
        && d.premises.iter().all(encoding_fragment)
}

#[test]
fn prover_agrees_with_the_state_space() {
    let corpus = small_corpus();
    assert!(corpus.len() > 10_000);
    let failures: Vec<String> = corpus
        .par_iter()
        .filter(|p| oracle_race_free(p).is_none())
        .filter_map(|p| {
            let oracle = oracle_deadlock_free(p).is_deadlock_free();
            match prove_encoding(p) {
                Ok(EncodingVerdict::DeadlockFree(d)) => {
                    if !oracle {
                        return Some(format!("proved but deadlocks: {p}"));
                    }
                    if let Err(e) = check_derivation(&d) {
                        return Some(format!("invalid derivation for {p}: {e:?}"));
                    }
                    (!encoding_fragment(&d)).then(|| format!("left the encoding fragment: {p}"))
                }
                Ok(EncodingVerdict::Stuck { witness, .. }) => {
                    if oracle {
                        Some(format!("refuted but deadlock-free: {p}"))
                    } else if oracle_deadlock_free(&witness).is_deadlock_free() {
                        Some(format!("witness {witness} of {p} is deadlock-free"))
                    } else {
                        None
                    }
                }
                Err(e) => Some(format!("{p}: {e}")),
            }
        })
        .collect();
    assert!(failures.is_empty(), "{} failures, e.g. {:?}", failures.len(), &failures[..failures.len().min(5)]);
}

#[test]
fn races_are_rejected_before_search() {
    let racy: Vec<Process> = small_corpus()
        .into_iter()
        .filter(|p| oracle_race_free(p).is_some())
        .collect();
    assert!(!racy.is_empty());
    for p in &racy {
        assert!(matches!(prove_encoding(p), Err(ProverError::Race(_))), "{p}");
    }
}

#[test]
fn corpus_is_unambiguous() {
    assert!(small_corpus().iter().all(is_unambiguous));
}
