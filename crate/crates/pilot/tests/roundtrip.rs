use pilot::choreography::{epp, Network};
use pilot::chorl::{chorl_prove, expand_to_pil, extract, extract_choreography, ChorlError};
use pilot::corpus::{enumerate_processes, reduce_symmetry, GeneratorSpec};
use pilot::process::{precongruence_normalize, struct_equiv, Process};
use pilot::prover::check_derivation;
use pilot::semantics::{oracle_deadlock_free, oracle_race_free};
use rayon::prelude::*;

fn race_free_corpus() -> Vec<Process> {
    let spec = GeneratorSpec {
        max_total_prefixes: 3,
        ..GeneratorSpec::default()
    };
    reduce_symmetry(&spec, enumerate_processes(spec))
        .into_par_iter()
        .filter(|p| oracle_race_free(p).is_none())
        .collect()
}

fn round_trip(p: &Process) -> Result<bool, String> {
    let n = Network::from_flat(p).map_err(|e| e.to_string())?;
    let deadlock_free = oracle_deadlock_free(p).is_deadlock_free();
    match extract(&n) {
        Ok((d, c)) => {
            if !deadlock_free {
                return Err(format!("extracted a deadlocking network {p}"));
            }
            check_derivation(&expand_to_pil(&d).map_err(|e| e.to_string())?).map_err(|e| format!("{p}: {e:?}"))?;
            let back = epp(&c).map_err(|e| format!("{p} -> {c}: {e}"))?;
            let l = precongruence_normalize(&back.to_process());
            let r = precongruence_normalize(&n.to_process());
            if struct_equiv(&l, &r) {
                Ok(true)
            } else {
                Err(format!("{p} -> {c} -> {back}"))
            }
        }
        Err(ChorlError::Stuck { .. }) if !deadlock_free => Ok(false),
        Err(e) => Err(format!("{p}: {e}")),
    }
}

#[test]
fn extraction_then_projection_is_the_identity() {
    let corpus = race_free_corpus();
    let results: Vec<Result<bool, String>> = corpus.par_iter().map(round_trip).collect();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    assert!(failures.is_empty(), "{} failures, e.g. {:?}", failures.len(), &failures[..failures.len().min(5)]);
    let extracted = results.iter().filter(|r| matches!(r, Ok(true))).count();
    assert!(extracted > 50, "{extracted}");
}

#[test]
fn extraction_is_deterministic() {
    let n = pilot::syntax::parse_network("new x, y. p[x!a. y sel{l: y!b.0}] | q[x?a. y bra{l: y?b.0, m: z!c.0}]").unwrap();
    let d1 = chorl_prove(&n).unwrap();
    let d2 = chorl_prove(&n).unwrap();
    assert_eq!(d1, d2);
    assert_eq!(extract_choreography(&d1).unwrap(), extract_choreography(&d2).unwrap());
}
