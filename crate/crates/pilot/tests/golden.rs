use pilot::choreography::{chor_alpha_equiv, epp, network_equiv, Network};
use pilot::chorl::{extract, ChorlError};
use pilot::corpus::{golden_cases, Expectation, EQ1, EQ13};
use pilot::formula::encode;
use pilot::process::{struct_equiv, Process};
use pilot::prover::{prove_encoding, prove_progress, EncodingVerdict, Limits, ProverError};
use pilot::semantics::{oracle_deadlock_free, oracle_progress, Status};
use pilot::syntax::{parse_choreography, parse_network, parse_process, parse_process_or_network, ProcessInput};

fn network_of(text: &str) -> Network {
    match parse_process_or_network(text).unwrap() {
        ProcessInput::Network(n) => n,
        ProcessInput::Process(p) => Network::from_flat(&p).unwrap(),
    }
}

#[test]
fn every_golden_case_meets_its_expectation() {
    for case in golden_cases() {
        let name = &case.name;
        match &case.expectation {
            Expectation::DeadlockFree => {
                let p = parse_process(&case.input).unwrap();
                assert!(prove_encoding(&p).unwrap().is_deadlock_free(), "{name}");
                assert!(oracle_deadlock_free(&p).is_deadlock_free(), "{name}");
            }
            Expectation::Deadlocked { witness } => {
                let p = parse_process(&case.input).unwrap();
                let want = parse_process(witness).unwrap();
                match prove_encoding(&p).unwrap() {
                    EncodingVerdict::Stuck { witness, .. } => assert!(struct_equiv(&witness, &want), "{name}: {witness}"),
                    EncodingVerdict::DeadlockFree(_) => panic!("{name}: proved"),
                }
                match oracle_deadlock_free(&p).status {
                    Status::Deadlocked { witness, .. } => assert!(struct_equiv(&witness, &want), "{name}: {witness}"),
                    other => panic!("{name}: {other:?}"),
                }
            }
            Expectation::Race => {
                let p = parse_process(&case.input).unwrap();
                assert!(matches!(prove_encoding(&p), Err(ProverError::Race(_))), "{name}");
            }
            Expectation::Progress(want) => {
                let p = parse_process(&case.input).unwrap();
                assert_eq!(prove_progress(&p, Limits::default()).unwrap().progress, *want, "{name}");
                assert_eq!(oracle_progress(&p), *want, "{name}");
            }
            Expectation::PrivateMobility => {
                let p = parse_process(&case.input).unwrap();
                assert!(matches!(prove_progress(&p, Limits::default()), Err(ProverError::PrivateMobility)), "{name}");
            }
            Expectation::Choreography(want) => {
                let (_, c) = extract(&network_of(&case.input)).unwrap();
                let want = parse_choreography(want).unwrap();
                assert!(chor_alpha_equiv(&c, &want), "{name}: got {c}");
            }
            Expectation::Network(want) => {
                let n = epp(&parse_choreography(&case.input).unwrap()).unwrap();
                assert!(network_equiv(&n, &parse_network(want).unwrap()), "{name}: got {n}");
            }
            Expectation::Unprojectable => {
                assert!(epp(&parse_choreography(&case.input).unwrap()).is_err(), "{name}");
            }
            Expectation::Formula(want) => {
                let p = parse_process(&case.input).unwrap();
                assert_eq!(encode(&p).unwrap().to_string(), *want, "{name}");
            }
        }
    }
}

#[test]
fn headline_examples_are_deadlock_free() {
    for text in [EQ1, EQ13] {
        let p = parse_process(text).unwrap();
        assert!(prove_encoding(&p).unwrap().is_deadlock_free());
    }
}

#[test]
fn deadlocked_network_does_not_extract() {
    let n = network_of("new x. p[x!a.0] | q[x?b.0] | r[y!c.0]");
    match extract(&n) {
        Err(ChorlError::Stuck { residual, .. }) => {
            assert!(struct_equiv(&residual.to_process(), &parse_process("y!c.0").unwrap()));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn nil_is_trivially_fine() {
    assert!(prove_encoding(&Process::Nil).unwrap().is_deadlock_free());
    assert!(oracle_progress(&Process::Nil));
}
