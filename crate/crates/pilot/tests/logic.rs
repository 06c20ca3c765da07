use pilot::corpus::{feq_implications, formulas_up_to_depth, monotonicity_contexts, transitivity_family};
use pilot::formula::{negate, Formula, FormulaContext};
use pilot::prover::{check_derivation, prove_bounded, prove_identity, prove_implication, Judgement, Limits, SearchOutcome};
use pilot::syntax::parse_formula;
use proptest::prelude::*;

fn proved(a: &Formula, b: &Formula) -> bool {
    match prove_implication(a, b, Limits::default()) {
        SearchOutcome::Proved(d) => {
            check_derivation(&d).unwrap();
            true
        }
        _ => false,
    }
}

#[test]
fn feq_family_is_provable() {
    let family = feq_implications();
    assert!(family.len() > 40);
    for (name, l, r) in &family {
        assert!(proved(l, r), "{name}: {l} -o {r}");
    }
}

#[test]
fn identity_exhaustive_depth_two() {
    let all = formulas_up_to_depth(2);
    assert_eq!(all.len(), 18_243);
    for a in &all {
        let d = prove_identity(a).unwrap();
        check_derivation(&d).unwrap();
        assert!(d.conclusion.store.is_empty());
        let mut got = d.conclusion.sequent.clone();
        let mut want = vec![negate(a), a.clone()];
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn transitivity_as_search() {
    let family = transitivity_family();
    assert_eq!(family.len(), 50);
    for (a, b, c) in &family {
        assert!(proved(a, b), "{a} -o {b}");
        assert!(proved(b, c), "{b} -o {c}");
        assert!(proved(a, c), "{a} -o {c}");
    }
}

#[test]
fn context_monotonicity() {
    let contexts: Vec<FormulaContext> = monotonicity_contexts()
        .into_iter()
        .map(|c| FormulaContext::new(c).unwrap())
        .collect();
    for (a, b, _) in transitivity_family().iter().step_by(5) {
        for ctx in &contexts {
            assert!(proved(&ctx.plug(a), &ctx.plug(b)), "{} -o {}", ctx.plug(a), ctx.plug(b));
        }
    }
}

#[test]
fn non_theorems_are_refuted() {
    for s in [vec!["x!y", "x!y"], vec!["x!y seq x?y"], vec!["x!y tens x?y"]] {
        let seq: Vec<Formula> = s.iter().map(|t| parse_formula(t).unwrap()).collect();
        assert_eq!(prove_bounded(&Judgement::new(seq), Limits::default()), SearchOutcome::Unprovable);
    }
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::send("x", "y")),
        Just(Formula::recv("x", "y")),
        Just(Formula::Unit),
    ];
    leaf.prop_recursive(4, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::par(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::tensor(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::prec(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Oplus(vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::With(vec![a, b])),
            inner.clone().prop_map(|a| Formula::forall("y", a)),
            inner.clone().prop_map(|a| Formula::exists("y", a)),
            inner.clone().prop_map(|a| Formula::new_("y", a)),
            inner.prop_map(|a| Formula::ya("y", a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn identity_depth_four(a in formula_strategy()) {
        let d = prove_identity(&a).unwrap();
        prop_assert!(check_derivation(&d).is_ok());
        prop_assert!(d.conclusion.store.is_empty());
    }

    #[test]
    fn negation_is_involutive(a in formula_strategy()) {
        prop_assert_eq!(negate(&negate(&a)), a);
    }
}
