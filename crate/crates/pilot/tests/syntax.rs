use pilot::corpus::{alpha_key, enumerate_choreographies, enumerate_processes, formulas_up_to_depth, golden_cases, GeneratorSpec};
use pilot::prover::{prove_encoding, prove_identity, EncodingVerdict};
use pilot::syntax::{
    parse_choreography, parse_derivation, parse_formula, parse_process, parse_process_or_network, print_choreography,
    print_derivation, print_formula, print_network, print_process, ProcessInput,
};

#[test]
fn golden_inputs_round_trip() {
    for case in golden_cases() {
        let text = &case.input;
        if let Ok(c) = parse_choreography(text) {
            if !matches!(c, pilot::choreography::Choreography::End) {
                assert_eq!(parse_choreography(&print_choreography(&c)).unwrap(), c, "{}", case.name);
                continue;
            }
        }
        match parse_process_or_network(text).unwrap() {
            ProcessInput::Process(p) => assert_eq!(parse_process(&print_process(&p)).unwrap(), p, "{}", case.name),
            ProcessInput::Network(n) => {
                let again = pilot::syntax::parse_network(&print_network(&n)).unwrap();
                assert_eq!(again, n, "{}", case.name);
            }
        }
    }
}

#[test]
fn corpus_processes_round_trip() {
    let spec = GeneratorSpec {
        max_total_prefixes: 3,
        ..GeneratorSpec::default()
    };
    let all = enumerate_processes(spec);
    let mut keys = std::collections::HashSet::new();
    for p in &all {
        assert_eq!(&parse_process(&print_process(p)).unwrap(), p);
        assert!(keys.insert(alpha_key(p)), "α-duplicate {p}");
    }
}

#[test]
fn formulas_round_trip() {
    for f in formulas_up_to_depth(2) {
        assert_eq!(parse_formula(&print_formula(&f)).unwrap(), f);
    }
}

#[test]
fn choreographies_round_trip() {
    for c in enumerate_choreographies(3) {
        assert_eq!(parse_choreography(&print_choreography(&c)).unwrap(), c);
    }
}

#[test]
fn derivations_round_trip() {
    let p = parse_process("new x. new y. (x!a. y sel{l: y!b.0} | x?a. y bra{l: y?b.0, m: z!c.0})").unwrap();
    let EncodingVerdict::DeadlockFree(d) = prove_encoding(&p).unwrap() else {
        panic!("expected a proof")
    };
    assert_eq!(parse_derivation(&print_derivation(&d)).unwrap(), d);
    let f = parse_formula("with{all y.(x!y par (ya y. x?y)), ex y. x?y}").unwrap();
    let d = prove_identity(&f).unwrap();
    assert_eq!(parse_derivation(&print_derivation(&d)).unwrap(), d);
}

#[test]
fn parse_errors_carry_positions() {
    for bad in ["x!", "x?b.", "new .0", "x sel{l 0}", "(0"] {
        let e = parse_process(bad).unwrap_err();
        assert!(!e.to_string().is_empty(), "{bad}");
    }
}
