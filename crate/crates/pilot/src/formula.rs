//! PiL formulas: De Morgan negation, cleanliness, contexts, the process
//! encoding, unitization and decoding of sequential images.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::{is_unambiguous, Name, Process};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Unit,
    Send(Name, Name),
    Recv(Name, Name),
    Par(Box<Formula>, Box<Formula>),
    Tensor(Box<Formula>, Box<Formula>),
    Prec(Box<Formula>, Box<Formula>),
    Oplus(Vec<Formula>),
    With(Vec<Formula>),
    Forall(Name, Box<Formula>),
    Exists(Name, Box<Formula>),
    New(Name, Box<Formula>),
    Ya(Name, Box<Formula>),
    /// The hole of a context.
    Hole,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("process is ambiguous: bound names must be unique and distinct from free names")]
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula is not the encoding of a sequential process: {0}")]
pub struct DecodeError(pub String);

impl Formula {
    pub fn send(x: impl Into<Name>, y: impl Into<Name>) -> Self {
        Formula::Send(x.into(), y.into())
    }
    pub fn recv(x: impl Into<Name>, y: impl Into<Name>) -> Self {
        Formula::Recv(x.into(), y.into())
    }
    pub fn par(a: Formula, b: Formula) -> Self {
        Formula::Par(Box::new(a), Box::new(b))
    }
    pub fn tensor(a: Formula, b: Formula) -> Self {
        Formula::Tensor(Box::new(a), Box::new(b))
    }
    pub fn prec(a: Formula, b: Formula) -> Self {
        Formula::Prec(Box::new(a), Box::new(b))
    }
    pub fn forall(x: impl Into<Name>, a: Formula) -> Self {
        Formula::Forall(x.into(), Box::new(a))
    }
    pub fn exists(x: impl Into<Name>, a: Formula) -> Self {
        Formula::Exists(x.into(), Box::new(a))
    }
    pub fn new_(x: impl Into<Name>, a: Formula) -> Self {
        Formula::New(x.into(), Box::new(a))
    }
    pub fn ya(x: impl Into<Name>, a: Formula) -> Self {
        Formula::Ya(x.into(), Box::new(a))
    }

    /// `A ⊸ B`, that is `¬A ⅋ B`.
    pub fn lolli(a: &Formula, b: &Formula) -> Self {
        Formula::par(negate(a), b.clone())
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Send(..) | Formula::Recv(..))
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Formula::Unit)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Unit | Formula::Hole => {}
            Formula::Send(x, y) | Formula::Recv(x, y) => {
                for n in [x, y] {
                    if !bound.contains(n) {
                        out.insert(n.clone());
                    }
                }
            }
            Formula::Par(a, b) | Formula::Tensor(a, b) | Formula::Prec(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Oplus(items) | Formula::With(items) => {
                for a in items {
                    a.collect_free(bound, out);
                }
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) | Formula::New(x, a) | Formula::Ya(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit_binders(&mut |x, _| {
            out.insert(x.clone());
        });
        out
    }

    /// Calls `f(var, is_nominal)` for every quantifier.
    pub fn visit_binders(&self, f: &mut impl FnMut(&Name, bool)) {
        match self {
            Formula::Unit | Formula::Hole | Formula::Send(..) | Formula::Recv(..) => {}
            Formula::Par(a, b) | Formula::Tensor(a, b) | Formula::Prec(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            Formula::Oplus(items) | Formula::With(items) => {
                for a in items {
                    a.visit_binders(f);
                }
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                f(x, false);
                a.visit_binders(f);
            }
            Formula::New(x, a) | Formula::Ya(x, a) => {
                f(x, true);
                a.visit_binders(f);
            }
        }
    }

    /// `self{replacement/target}`, stopping under binders of `target`.
    pub fn subst(&self, replacement: &str, target: &str) -> Formula {
        let rn = |n: &Name| {
            if n == target {
                replacement.to_string()
            } else {
                n.clone()
            }
        };
        match self {
            Formula::Unit => Formula::Unit,
            Formula::Hole => Formula::Hole,
            Formula::Send(x, y) => Formula::Send(rn(x), rn(y)),
            Formula::Recv(x, y) => Formula::Recv(rn(x), rn(y)),
            Formula::Par(a, b) => Formula::par(a.subst(replacement, target), b.subst(replacement, target)),
            Formula::Tensor(a, b) => {
                Formula::tensor(a.subst(replacement, target), b.subst(replacement, target))
            }
            Formula::Prec(a, b) => Formula::prec(a.subst(replacement, target), b.subst(replacement, target)),
            Formula::Oplus(items) => {
                Formula::Oplus(items.iter().map(|a| a.subst(replacement, target)).collect())
            }
            Formula::With(items) => {
                Formula::With(items.iter().map(|a| a.subst(replacement, target)).collect())
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) | Formula::New(x, a) | Formula::Ya(x, a) => {
                let body = if x == target {
                    (**a).clone()
                } else {
                    a.subst(replacement, target)
                };
                self.rebuild_quant(x.clone(), body)
            }
        }
    }

    fn rebuild_quant(&self, x: Name, body: Formula) -> Formula {
        match self {
            Formula::Forall(..) => Formula::forall(x, body),
            Formula::Exists(..) => Formula::exists(x, body),
            Formula::New(..) => Formula::new_(x, body),
            Formula::Ya(..) => Formula::ya(x, body),
            _ => unreachable!("rebuild_quant on a non-quantifier"),
        }
    }

    /// Number of connectives and atoms.
    pub fn size(&self) -> usize {
        match self {
            Formula::Unit | Formula::Hole | Formula::Send(..) | Formula::Recv(..) => 1,
            Formula::Par(a, b) | Formula::Tensor(a, b) | Formula::Prec(a, b) => 1 + a.size() + b.size(),
            Formula::Oplus(items) | Formula::With(items) => 1 + items.iter().map(|a| a.size()).sum::<usize>(),
            Formula::Forall(_, a) | Formula::Exists(_, a) | Formula::New(_, a) | Formula::Ya(_, a) => {
                1 + a.size()
            }
        }
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Formula::Hole => 1,
            Formula::Unit | Formula::Send(..) | Formula::Recv(..) => 0,
            Formula::Par(a, b) | Formula::Tensor(a, b) | Formula::Prec(a, b) => {
                a.hole_count() + b.hole_count()
            }
            Formula::Oplus(items) | Formula::With(items) => items.iter().map(|a| a.hole_count()).sum(),
            Formula::Forall(_, a) | Formula::Exists(_, a) | Formula::New(_, a) | Formula::Ya(_, a) => {
                a.hole_count()
            }
        }
    }

    pub fn contains_nominal(&self) -> bool {
        let mut found = false;
        self.visit_binders(&mut |_, nominal| found |= nominal);
        found
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_formula(self))
    }
}

pub fn negate(a: &Formula) -> Formula {
    match a {
        Formula::Unit => Formula::Unit,
        Formula::Hole => Formula::Hole,
        Formula::Send(x, y) => Formula::Recv(x.clone(), y.clone()),
        Formula::Recv(x, y) => Formula::Send(x.clone(), y.clone()),
        Formula::Par(a, b) => Formula::tensor(negate(a), negate(b)),
        Formula::Tensor(a, b) => Formula::par(negate(a), negate(b)),
        Formula::Prec(a, b) => Formula::prec(negate(a), negate(b)),
        Formula::Oplus(items) => Formula::With(items.iter().map(negate).collect()),
        Formula::With(items) => Formula::Oplus(items.iter().map(negate).collect()),
        Formula::Forall(x, a) => Formula::exists(x.clone(), negate(a)),
        Formula::Exists(x, a) => Formula::forall(x.clone(), negate(a)),
        Formula::New(x, a) => Formula::ya(x.clone(), negate(a)),
        Formula::Ya(x, a) => Formula::new_(x.clone(), negate(a)),
    }
}

/// Cleanliness, mirroring process unambiguity: no bound variable occurs
/// free, no quantifier shadows another, and nominal binders are unique and
/// distinct from first-order binders.
pub fn is_clean(f: &Formula) -> bool {
    let free = f.free_vars();
    let mut nominal = HashSet::new();
    let mut first_order = HashSet::new();
    let mut ok = true;
    f.visit_binders(&mut |x, is_nominal| {
        if free.contains(x) {
            ok = false;
        }
        if is_nominal {
            if !nominal.insert(x.clone()) {
                ok = false;
            }
        } else {
            first_order.insert(x.clone());
        }
    });
    if !ok || !nominal.is_disjoint(&first_order) {
        return false;
    }
    fn no_shadow(f: &Formula, scope: &mut Vec<Name>) -> bool {
        match f {
            Formula::Unit | Formula::Hole | Formula::Send(..) | Formula::Recv(..) => true,
            Formula::Par(a, b) | Formula::Tensor(a, b) | Formula::Prec(a, b) => {
                no_shadow(a, scope) && no_shadow(b, scope)
            }
            Formula::Oplus(items) | Formula::With(items) => items.iter().all(|a| no_shadow(a, scope)),
            Formula::Forall(x, a) | Formula::Exists(x, a) | Formula::New(x, a) | Formula::Ya(x, a) => {
                if scope.contains(x) {
                    return false;
                }
                scope.push(x.clone());
                let ok = no_shadow(a, scope);
                scope.pop();
                ok
            }
        }
    }
    no_shadow(f, &mut Vec::new())
}

/// A formula with exactly one hole.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormulaContext {
    formula: Formula,
}

impl FormulaContext {
    pub fn new(formula: Formula) -> Option<Self> {
        (formula.hole_count() == 1).then_some(FormulaContext { formula })
    }

    /// `Иx1…Иxn ([] ⅋ A)`.
    pub fn nu_par(binders: &[Name], rest: Formula) -> Self {
        let inner = Formula::par(Formula::Hole, rest);
        let formula = binders
            .iter()
            .rev()
            .fold(inner, |acc, x| Formula::new_(x.clone(), acc));
        FormulaContext { formula }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn plug(&self, a: &Formula) -> Formula {
        fn go(f: &Formula, a: &Formula) -> Formula {
            match f {
                Formula::Hole => a.clone(),
                Formula::Unit | Formula::Send(..) | Formula::Recv(..) => f.clone(),
                Formula::Par(x, y) => Formula::par(go(x, a), go(y, a)),
                Formula::Tensor(x, y) => Formula::tensor(go(x, a), go(y, a)),
                Formula::Prec(x, y) => Formula::prec(go(x, a), go(y, a)),
                Formula::Oplus(items) => Formula::Oplus(items.iter().map(|x| go(x, a)).collect()),
                Formula::With(items) => Formula::With(items.iter().map(|x| go(x, a)).collect()),
                Formula::Forall(v, x) => Formula::forall(v.clone(), go(x, a)),
                Formula::Exists(v, x) => Formula::exists(v.clone(), go(x, a)),
                Formula::New(v, x) => Formula::new_(v.clone(), go(x, a)),
                Formula::Ya(v, x) => Formula::ya(v.clone(), go(x, a)),
            }
        }
        go(&self.formula, a)
    }
}

/// The process encoding `⦃P⦄`.
pub fn encode(p: &Process) -> Result<Formula, EncodeError> {
    if !is_unambiguous(p) {
        return Err(EncodeError::Ambiguous);
    }
    Ok(encode_unchecked(p))
}

pub(crate) fn encode_unchecked(p: &Process) -> Formula {
    match p {
        Process::Nil => Formula::Unit,
        Process::Send {
            subject,
            object,
            cont,
        } => Formula::prec(Formula::send(subject.clone(), object.clone()), encode_unchecked(cont)),
        Process::Recv {
            subject,
            binder,
            cont,
        } => Formula::exists(
            binder.clone(),
            Formula::prec(Formula::recv(subject.clone(), binder.clone()), encode_unchecked(cont)),
        ),
        Process::Par(l, r) => Formula::par(encode_unchecked(l), encode_unchecked(r)),
        Process::Res { binder, body } => Formula::new_(binder.clone(), encode_unchecked(body)),
        Process::LabelSend { subject, branches } => Formula::With(
            branches
                .iter()
                .map(|(l, q)| Formula::prec(Formula::send(subject.clone(), l.clone()), encode_unchecked(q)))
                .collect(),
        ),
        Process::LabelRecv { subject, branches } => Formula::Oplus(
            branches
                .iter()
                .map(|(l, q)| Formula::prec(Formula::recv(subject.clone(), l.clone()), encode_unchecked(q)))
                .collect(),
        ),
    }
}

/// Inverse of the encoding on sequential processes.
pub fn decode_sequential(f: &Formula) -> Result<Process, DecodeError> {
    decode_with(f, false)
}

/// Inverse of the encoding on its whole image.
pub fn decode(f: &Formula) -> Result<Process, DecodeError> {
    decode_with(f, true)
}

fn decode_with(f: &Formula, general: bool) -> Result<Process, DecodeError> {
    match f {
        Formula::Unit => Ok(Process::Nil),
        Formula::Par(a, b) if general => Ok(Process::par(decode_with(a, general)?, decode_with(b, general)?)),
        Formula::New(x, a) if general => Ok(Process::res(x.clone(), decode_with(a, general)?)),
        Formula::Prec(head, cont) => match &**head {
            Formula::Send(x, y) => Ok(Process::send(x.clone(), y.clone(), decode_with(cont, general)?)),
            other => Err(DecodeError(format!("unexpected prefix {}", other))),
        },
        Formula::Exists(y, body) => match &**body {
            Formula::Prec(head, cont) => match &**head {
                Formula::Recv(x, z) if z == y => {
                    Ok(Process::recv(x.clone(), y.clone(), decode_with(cont, general)?))
                }
                other => Err(DecodeError(format!("unexpected receive prefix {}", other))),
            },
            other => Err(DecodeError(format!("unexpected quantified body {}", other))),
        },
        Formula::With(items) => {
            let (subject, branches) = decode_branches(items, true, general)?;
            Ok(Process::sel(subject, branches))
        }
        Formula::Oplus(items) => {
            let (subject, branches) = decode_branches(items, false, general)?;
            Ok(Process::bra(subject, branches))
        }
        other => Err(DecodeError(format!("unexpected connective in {}", other))),
    }
}

fn decode_branches(
    items: &[Formula],
    sending: bool,
    general: bool,
) -> Result<(Name, Vec<(Name, Process)>), DecodeError> {
    let mut subject: Option<Name> = None;
    let mut out = Vec::new();
    for item in items {
        let Formula::Prec(head, cont) = item else {
            return Err(DecodeError(format!("branch {} is not a prefix", item)));
        };
        let (x, l) = match (&**head, sending) {
            (Formula::Send(x, l), true) | (Formula::Recv(x, l), false) => (x, l),
            (other, _) => return Err(DecodeError(format!("unexpected branch prefix {}", other))),
        };
        match &subject {
            Some(s) if s != x => return Err(DecodeError(format!("branches on {} and {}", s, x))),
            _ => subject = Some(x.clone()),
        }
        if out.iter().any(|(m, _): &(Name, Process)| m == l) {
            return Err(DecodeError(format!("duplicate label {}", l)));
        }
        out.push((l.clone(), decode_with(cont, general)?));
    }
    let subject = subject.ok_or_else(|| DecodeError("empty choice".into()))?;
    Ok((subject, out))
}

/// `⦃P⦄^{names}`: atoms on the given subjects become units, then left units
/// of `◁` and units under `⅋` are simplified away.
pub fn unitize(f: &Formula, names: &BTreeSet<Name>) -> Formula {
    match f {
        Formula::Send(x, _) | Formula::Recv(x, _) if names.contains(x) => Formula::Unit,
        Formula::Unit | Formula::Hole | Formula::Send(..) | Formula::Recv(..) => f.clone(),
        Formula::Prec(a, b) => {
            let (a, b) = (unitize(a, names), unitize(b, names));
            if a.is_unit() {
                b
            } else {
                Formula::prec(a, b)
            }
        }
        Formula::Par(a, b) => {
            let (a, b) = (unitize(a, names), unitize(b, names));
            match (a.is_unit(), b.is_unit()) {
                (_, true) => a,
                (true, false) => b,
                _ => Formula::par(a, b),
            }
        }
        Formula::Tensor(a, b) => Formula::tensor(unitize(a, names), unitize(b, names)),
        Formula::Oplus(items) => Formula::Oplus(items.iter().map(|a| unitize(a, names)).collect()),
        Formula::With(items) => Formula::With(items.iter().map(|a| unitize(a, names)).collect()),
        Formula::Forall(x, a) => Formula::forall(x.clone(), unitize(a, names)),
        Formula::Exists(x, a) => Formula::exists(x.clone(), unitize(a, names)),
        Formula::New(x, a) => Formula::new_(x.clone(), unitize(a, names)),
        Formula::Ya(x, a) => Formula::ya(x.clone(), unitize(a, names)),
    }
}

/// Some send carries a ν-bound name as its object.
pub fn has_private_mobility(p: &Process) -> bool {
    fn go(p: &Process, restricted: &mut Vec<Name>) -> bool {
        match p {
            Process::Nil => false,
            Process::Send { object, cont, .. } => restricted.contains(object) || go(cont, restricted),
            Process::Recv { binder, cont, .. } => {
                let hidden = restricted.iter().position(|n| n == binder);
                let mut scope = restricted.clone();
                if let Some(i) = hidden {
                    scope.remove(i);
                }
                go(cont, &mut scope)
            }
            Process::Par(l, r) => go(l, restricted) || go(r, restricted),
            Process::Res { binder, body } => {
                restricted.push(binder.clone());
                let found = go(body, restricted);
                restricted.pop();
                found
            }
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                branches.iter().any(|(_, q)| go(q, restricted))
            }
        }
    }
    go(p, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_process};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }
    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn negation_table() {
        assert_eq!(negate(&Formula::Unit), Formula::Unit);
        assert_eq!(negate(&f("x!y")), f("x?y"));
        assert_eq!(negate(&f("(x!y seq 1)")), f("(x?y seq 1)"));
        assert_eq!(negate(&f("new a.(a!b par 1)")), f("ya a.(a?b tens 1)"));
        assert_eq!(negate(&f("oplus{x!a, all z.(x?z seq 1)}")), f("with{x?a, ex z.(x!z seq 1)}"));
    }

    #[test]
    fn encode_rows() {
        assert_eq!(encode(&p("0")).unwrap(), Formula::Unit);
        assert_eq!(
            encode(&p("x!y.0 | x?z.0")).unwrap(),
            f("(x!y seq 1) par ex z.(x?z seq 1)")
        );
        assert_eq!(
            encode(&p("x sel{l: 0, m: y!a.0}")).unwrap(),
            f("with{(x!l seq 1), (x!m seq (y!a seq 1))}")
        );
        assert_eq!(encode(&p("x?y.0 | y!a.0")), Err(EncodeError::Ambiguous));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_sequential(&Formula::Unit).unwrap(), Process::Nil);
        assert_eq!(decode_sequential(&f("(x!y seq 1)")).unwrap(), p("x!y.0"));
        assert!(decode_sequential(&f("(x!y tens 1)")).is_err());
        let s = p("x bra{l: y?b.b!c.0, m: x!a.0}");
        assert_eq!(decode_sequential(&encode(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn unitize_examples() {
        let names: BTreeSet<Name> = ["y".to_string()].into();
        assert_eq!(unitize(&encode(&p("y!c.0")).unwrap(), &names), Formula::Unit);
        let unchanged = encode(&p("x!a.0")).unwrap();
        assert_eq!(unitize(&unchanged, &BTreeSet::new()), unchanged);
        let names: BTreeSet<Name> = ["b".to_string()].into();
        assert_eq!(
            unitize(&encode(&p("new a.(b!a.a!c.0)")).unwrap(), &names),
            f("new a.(a!c seq 1)")
        );
    }

    #[test]
    fn private_mobility_reading() {
        assert!(has_private_mobility(&p("new a.(b!a.a!c.0)")));
        assert!(!has_private_mobility(&p("x!a.0 | x?b.0")));
        assert!(!has_private_mobility(&p("new x.(x!a.0 | x?a.0)")));
    }

    #[test]
    fn cleanliness() {
        assert!(is_clean(&encode(&p("new x.(x!a.0 | x?b.b!c.0)")).unwrap()));
        assert!(!is_clean(&f("(x!y par ex y.(x?y seq 1))")));
        assert!(!is_clean(&f("ex y.ex y.(x?y seq 1)")));
    }

    #[test]
    fn contexts() {
        let k = FormulaContext::nu_par(&["a".into()], f("x!a"));
        assert_eq!(k.plug(&Formula::Unit), f("new a.(1 par x!a)"));
        assert!(FormulaContext::new(f("(1 par 1)")).is_none());
    }
}
