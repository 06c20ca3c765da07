//! PiL judgements and derivations, a rule checker, identity derivations, a
//! bounded cut-free prover and the block prover for process encodings.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{encode, has_private_mobility, negate, unitize, Formula};
use crate::process::{find_race_shape, is_unambiguous, make_unambiguous, Name, NameSupply, Process, RaceWitness};
use crate::semantics::oracle_race_free;
use crate::syntax::{parse_formula, print_formula, ParseError, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Nu,
    Ya,
}

pub type Store = BTreeMap<Name, Tag>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Judgement {
    pub store: Store,
    pub sequent: Vec<Formula>,
}

impl Judgement {
    pub fn new(sequent: Vec<Formula>) -> Self {
        Judgement {
            store: Store::new(),
            sequent,
        }
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let store: Vec<String> = self
            .store
            .iter()
            .map(|(x, t)| match t {
                Tag::Nu => format!("new {}", x),
                Tag::Ya => format!("ya {}", x),
            })
            .collect();
        let seq: Vec<String> = self.sequent.iter().map(print_formula).collect();
        if store.is_empty() {
            write!(f, "|- {}", seq.join(", "))
        } else {
            write!(f, "{} |- {}", store.join(", "), seq.join(", "))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "ax")]
    Ax,
    #[serde(rename = "par")]
    Par,
    #[serde(rename = "tens")]
    Tens,
    #[serde(rename = "unit")]
    Unit,
    #[serde(rename = "mix")]
    Mix,
    #[serde(rename = "oplus")]
    Oplus,
    #[serde(rename = "with")]
    With,
    #[serde(rename = "all")]
    All,
    #[serde(rename = "ex")]
    Ex,
    #[serde(rename = "prec")]
    Prec,
    #[serde(rename = "prec-unit")]
    PrecUnit,
    #[serde(rename = "cut")]
    Cut,
    #[serde(rename = "new-unit")]
    NewUnit,
    #[serde(rename = "new-load")]
    NewLoad,
    #[serde(rename = "new-pop")]
    NewPop,
    #[serde(rename = "ya-unit")]
    YaUnit,
    #[serde(rename = "ya-load")]
    YaLoad,
    #[serde(rename = "ya-pop")]
    YaPop,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

/// The rules a deadlock-freedom derivation may use.
pub const ENCODING_FRAGMENT: &[Rule] = &[
    Rule::Unit,
    Rule::Ax,
    Rule::Par,
    Rule::Mix,
    Rule::Prec,
    Rule::With,
    Rule::Oplus,
    Rule::Ex,
    Rule::NewUnit,
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Judgement,
    pub premises: Vec<Derivation>,
}

#[derive(Serialize, Deserialize)]
struct DerivationJson {
    rule: Rule,
    store: Store,
    sequent: Vec<String>,
    premises: Vec<DerivationJson>,
}

impl Derivation {
    pub fn leaf(rule: Rule, conclusion: Judgement) -> Self {
        Derivation {
            rule,
            conclusion,
            premises: Vec::new(),
        }
    }

    pub fn node(rule: Rule, store: &Store, sequent: Vec<Formula>, premises: Vec<Derivation>) -> Self {
        Derivation {
            rule,
            conclusion: Judgement {
                store: store.clone(),
                sequent,
            },
            premises,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }

    pub fn rules_used(&self) -> BTreeSet<Rule> {
        let mut out = BTreeSet::new();
        self.walk(&mut |d| {
            out.insert(d.rule);
        });
        out
    }

    pub fn stores_empty(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |d| ok &= d.conclusion.store.is_empty());
        ok
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Derivation)) {
        f(self);
        for p in &self.premises {
            p.walk(f);
        }
    }

    fn to_dto(&self) -> DerivationJson {
        DerivationJson {
            rule: self.rule,
            store: self.conclusion.store.clone(),
            sequent: self.conclusion.sequent.iter().map(print_formula).collect(),
            premises: self.premises.iter().map(Derivation::to_dto).collect(),
        }
    }

    fn from_dto(dto: &DerivationJson) -> Result<Self, ParseError> {
        let sequent = dto
            .sequent
            .iter()
            .map(|s| parse_formula(s))
            .collect::<Result<Vec<_>, _>>()?;
        let premises = dto
            .premises
            .iter()
            .map(Derivation::from_dto)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation {
            rule: dto.rule,
            conclusion: Judgement {
                store: dto.store.clone(),
                sequent,
            },
            premises,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_dto()).unwrap_or(serde_json::Value::Null)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ParseError> {
        let dto: DerivationJson = serde_json::from_value(value.clone()).map_err(|e| ParseError {
            span: SourceSpan {
                file: "<input>".into(),
                line: 1,
                column: 1,
            },
            expected: "a derivation node {rule, store, sequent, premises}".into(),
            found: e.to_string(),
        })?;
        Derivation::from_dto(&dto)
    }
}

impl Serialize for Derivation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_dto().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Derivation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let dto = DerivationJson::deserialize(deserializer)?;
        Derivation::from_dto(&dto).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule {rule} does not apply to {conclusion}: {reason}")]
pub struct RuleError {
    pub rule: Rule,
    pub conclusion: String,
    pub reason: String,
}

fn sorted(v: &[Formula]) -> Vec<Formula> {
    let mut v = v.to_vec();
    v.sort();
    v
}

fn ms_eq(a: &[Formula], b: &[Formula]) -> bool {
    a.len() == b.len() && sorted(a) == sorted(b)
}

/// `whole - part` as multisets, if `part` is contained.
fn ms_minus(whole: &[Formula], part: &[&Formula]) -> Option<Vec<Formula>> {
    let mut rest = whole.to_vec();
    for f in part {
        let i = rest.iter().position(|g| g == *f)?;
        rest.remove(i);
    }
    Some(rest)
}

fn without(seq: &[Formula], idx: &[usize]) -> Vec<Formula> {
    seq.iter()
        .enumerate()
        .filter(|(i, _)| !idx.contains(i))
        .map(|(_, f)| f.clone())
        .collect()
}

fn concat(a: &[Formula], b: &[Formula]) -> Vec<Formula> {
    a.iter().chain(b.iter()).cloned().collect()
}

fn fv_seq(seq: &[Formula]) -> BTreeSet<Name> {
    seq.iter().flat_map(|f| f.free_vars()).collect()
}

fn store_split(whole: &Store, a: &Store, b: &Store) -> bool {
    a.keys().all(|k| !b.contains_key(k))
        && a.len() + b.len() == whole.len()
        && a.iter().chain(b.iter()).all(|(k, t)| whole.get(k) == Some(t))
}

/// The name `A` carries where `x` occurs free, given `f = A{z/x}`.
/// `Some(None)` means `x` does not occur free and `f == A`.
fn instance_of(a: &Formula, x: &str, f: &Formula) -> Option<Option<Name>> {
    fn name(n: &Name, m: &Name, x: &str, shadowed: bool, found: &mut Option<Name>) -> bool {
        if n == x && !shadowed {
            match found {
                Some(z) => z == m,
                None => {
                    *found = Some(m.clone());
                    true
                }
            }
        } else {
            n == m
        }
    }
    fn go(a: &Formula, f: &Formula, x: &str, shadowed: bool, found: &mut Option<Name>) -> bool {
        match (a, f) {
            (Formula::Unit, Formula::Unit) | (Formula::Hole, Formula::Hole) => true,
            (Formula::Send(p, q), Formula::Send(r, s)) | (Formula::Recv(p, q), Formula::Recv(r, s)) => {
                name(p, r, x, shadowed, found) && name(q, s, x, shadowed, found)
            }
            (Formula::Par(a1, b1), Formula::Par(a2, b2))
            | (Formula::Tensor(a1, b1), Formula::Tensor(a2, b2))
            | (Formula::Prec(a1, b1), Formula::Prec(a2, b2)) => {
                go(a1, a2, x, shadowed, found) && go(b1, b2, x, shadowed, found)
            }
            (Formula::Oplus(i1), Formula::Oplus(i2)) | (Formula::With(i1), Formula::With(i2)) => {
                i1.len() == i2.len() && i1.iter().zip(i2).all(|(p, q)| go(p, q, x, shadowed, found))
            }
            (Formula::Forall(v1, b1), Formula::Forall(v2, b2))
            | (Formula::Exists(v1, b1), Formula::Exists(v2, b2))
            | (Formula::New(v1, b1), Formula::New(v2, b2))
            | (Formula::Ya(v1, b1), Formula::Ya(v2, b2)) => {
                v1 == v2 && go(b1, b2, x, shadowed || v1 == x, found)
            }
            _ => false,
        }
    }
    let mut found = None;
    if !go(a, f, x, false, &mut found) {
        return None;
    }
    if let Some(z) = &found {
        if z != x && a.bound_vars().contains(z) {
            return None;
        }
    }
    Some(found)
}

fn quant_parts(f: &Formula) -> Option<(&Name, &Formula)> {
    match f {
        Formula::Forall(x, a) | Formula::Exists(x, a) | Formula::New(x, a) | Formula::Ya(x, a) => Some((x, a)),
        _ => None,
    }
}

/// Validates one inference against its rule, ignoring the premises' own
/// correctness.
pub fn check_rule(d: &Derivation) -> Result<(), RuleError> {
    let fail = |reason: &str| RuleError {
        rule: d.rule,
        conclusion: d.conclusion.to_string(),
        reason: reason.to_string(),
    };
    let seq = &d.conclusion.sequent;
    let store = &d.conclusion.store;
    let ps = &d.premises;
    let arity = |n: usize| {
        if ps.len() == n {
            Ok(())
        } else {
            Err(fail(&format!("expected {} premises, found {}", n, ps.len())))
        }
    };
    let same_store = |i: usize| {
        if ps[i].conclusion.store == *store {
            Ok(())
        } else {
            Err(fail("premise store differs from the conclusion store"))
        }
    };
    let split = || {
        if store_split(store, &ps[0].conclusion.store, &ps[1].conclusion.store) {
            Ok(())
        } else {
            Err(fail("premise stores are not a disjoint split of the conclusion store"))
        }
    };
    match d.rule {
        Rule::Ax => {
            arity(0)?;
            let ok = match seq.as_slice() {
                [Formula::Send(a, b), Formula::Recv(c, e)] | [Formula::Recv(c, e), Formula::Send(a, b)] => {
                    a == c && b == e
                }
                _ => false,
            };
            ok.then_some(()).ok_or_else(|| fail("sequent is not a pair of dual atoms"))
        }
        Rule::Unit => {
            arity(0)?;
            (seq.as_slice() == [Formula::Unit])
                .then_some(())
                .ok_or_else(|| fail("sequent is not a single unit"))
        }
        Rule::Par => {
            arity(1)?;
            same_store(0)?;
            let p = &ps[0].conclusion.sequent;
            let ok = seq.iter().enumerate().any(|(i, f)| match f {
                Formula::Par(a, b) => ms_eq(p, &concat(&without(seq, &[i]), &[(**a).clone(), (**b).clone()])),
                _ => false,
            });
            ok.then_some(()).ok_or_else(|| fail("no par formula decomposes into the premise"))
        }
        Rule::Tens => {
            arity(2)?;
            split()?;
            let (p0, p1) = (&ps[0].conclusion.sequent, &ps[1].conclusion.sequent);
            let ok = seq.iter().enumerate().any(|(i, f)| match f {
                Formula::Tensor(a, b) => match (ms_minus(p0, &[a]), ms_minus(p1, &[b])) {
                    (Some(g), Some(dl)) => ms_eq(&concat(&g, &dl), &without(seq, &[i])),
                    _ => false,
                },
                _ => false,
            });
            ok.then_some(()).ok_or_else(|| fail("no tensor formula splits into the premises"))
        }
        Rule::Mix => {
            arity(2)?;
            split()?;
            ms_eq(&concat(&ps[0].conclusion.sequent, &ps[1].conclusion.sequent), seq)
                .then_some(())
                .ok_or_else(|| fail("premise sequents do not partition the conclusion"))
        }
        Rule::Oplus => {
            arity(1)?;
            same_store(0)?;
            let p = &ps[0].conclusion.sequent;
            let ok = seq.iter().enumerate().any(|(i, f)| match f {
                Formula::Oplus(items) => {
                    let rest = without(seq, &[i]);
                    items.iter().any(|a| ms_eq(p, &concat(&rest, std::slice::from_ref(a))))
                }
                _ => false,
            });
            ok.then_some(()).ok_or_else(|| fail("premise does not pick an oplus operand"))
        }
        Rule::With => {
            if ps.is_empty() {
                return Err(fail("with needs at least one premise"));
            }
            for i in 0..ps.len() {
                same_store(i)?;
            }
            let ok = seq.iter().enumerate().any(|(i, f)| match f {
                Formula::With(items) if items.len() == ps.len() => {
                    let rest = without(seq, &[i]);
                    items
                        .iter()
                        .zip(ps)
                        .all(|(a, p)| ms_eq(&p.conclusion.sequent, &concat(&rest, std::slice::from_ref(a))))
                }
                _ => false,
            });
            ok.then_some(()).ok_or_else(|| fail("premises do not match the with operands in order"))
        }
        Rule::All | Rule::NewUnit | Rule::YaUnit | Rule::NewLoad | Rule::YaLoad => {
            arity(1)?;
            let p = &ps[0].conclusion;
            let ok = seq.iter().enumerate().any(|(i, f)| {
                let kind_ok = matches!(
                    (d.rule, f),
                    (Rule::All, Formula::Forall(..))
                        | (Rule::NewUnit | Rule::NewLoad, Formula::New(..))
                        | (Rule::YaUnit | Rule::YaLoad, Formula::Ya(..))
                );
                if !kind_ok {
                    return false;
                }
                let (x, a) = quant_parts(f).expect("quantifier");
                let rest = without(seq, &[i]);
                let Some(mut added) = ms_minus(&p.sequent, &rest.iter().collect::<Vec<_>>()) else {
                    return false;
                };
                if added.len() != 1 {
                    return false;
                }
                let g = added.pop().expect("one formula");
                let Some(inst) = instance_of(a, x, &g) else {
                    return false;
                };
                let z = match inst {
                    Some(z) => z,
                    // vacuous: any fresh variable would do
                    None => match d.rule {
                        Rule::NewLoad | Rule::YaLoad => {
                            let mut loaded = p.store.keys().filter(|k| !store.contains_key(*k));
                            match (loaded.next(), loaded.next()) {
                                (Some(k), None) => k.clone(),
                                _ => return false,
                            }
                        }
                        _ => return p.store == *store,
                    },
                };
                if fv_seq(&rest).contains(&z) || store.contains_key(&z) || (z != *x && f.free_vars().contains(&z)) {
                    return false;
                }
                match d.rule {
                    Rule::NewLoad | Rule::YaLoad => {
                        let tag = if d.rule == Rule::NewLoad { Tag::Nu } else { Tag::Ya };
                        let mut expected = store.clone();
                        expected.insert(z, tag);
                        p.store == expected
                    }
                    _ => p.store == *store,
                }
            });
            ok.then_some(())
                .ok_or_else(|| fail("no quantifier matches the premise with a fresh variable"))
        }
        Rule::Ex => {
            arity(1)?;
            same_store(0)?;
            let p = &ps[0].conclusion.sequent;
            let ok = seq.iter().enumerate().any(|(i, f)| match f {
                Formula::Exists(x, a) => {
                    let rest = without(seq, &[i]);
                    match ms_minus(p, &rest.iter().collect::<Vec<_>>()) {
                        Some(added) if added.len() == 1 => instance_of(a, x, &added[0]).is_some(),
                        _ => false,
                    }
                }
                _ => false,
            });
            ok.then_some(()).ok_or_else(|| fail("premise is not an instance of an existential"))
        }
        Rule::NewPop | Rule::YaPop => {
            arity(1)?;
            let p = &ps[0].conclusion;
            let (tag, want_ya) = if d.rule == Rule::NewPop {
                (Tag::Nu, true)
            } else {
                (Tag::Ya, false)
            };
            let ok = seq.iter().enumerate().any(|(i, f)| {
                let (x, a) = match (f, want_ya) {
                    (Formula::Ya(x, a), true) | (Formula::New(x, a), false) => (x, a),
                    _ => return false,
                };
                let rest = without(seq, &[i]);
                let Some(added) = ms_minus(&p.sequent, &rest.iter().collect::<Vec<_>>()) else {
                    return false;
                };
                if added.len() != 1 {
                    return false;
                }
                let Some(inst) = instance_of(a, x, &added[0]) else {
                    return false;
                };
                store.iter().any(|(y, t)| {
                    if *t != tag || inst.as_ref().is_some_and(|z| z != y) {
                        return false;
                    }
                    let mut expected = store.clone();
                    expected.remove(y);
                    p.store == expected
                })
            });
            ok.then_some(())
                .ok_or_else(|| fail("no dual nominal variable in the store witnesses the quantifier"))
        }
        Rule::Prec => {
            arity(2)?;
            split()?;
            let (p0, p1) = (&ps[0].conclusion.sequent, &ps[1].conclusion.sequent);
            let mut ok = false;
            for (i, f) in seq.iter().enumerate() {
                for (j, g) in seq.iter().enumerate() {
                    if i == j || ok {
                        continue;
                    }
                    if let (Formula::Prec(a, b), Formula::Prec(c, e)) = (f, g) {
                        if let (Some(gm), Some(dl)) = (ms_minus(p0, &[a, c]), ms_minus(p1, &[b, e])) {
                            ok = ms_eq(&concat(&gm, &dl), &without(seq, &[i, j]));
                        }
                    }
                }
            }
            ok.then_some(()).ok_or_else(|| fail("no pair of seq formulas splits into the premises"))
        }
        Rule::PrecUnit => {
            arity(2)?;
            split()?;
            let (p0, p1) = (&ps[0].conclusion.sequent, &ps[1].conclusion.sequent);
            let ok = seq.iter().enumerate().any(|(i, f)| match f {
                Formula::Prec(a, b) => match (ms_minus(p0, &[a]), ms_minus(p1, &[b])) {
                    (Some(g), Some(dl)) => ms_eq(&concat(&g, &dl), &without(seq, &[i])),
                    _ => false,
                },
                _ => false,
            });
            ok.then_some(()).ok_or_else(|| fail("no seq formula splits into the premises"))
        }
        Rule::Cut => {
            arity(2)?;
            split()?;
            let (p0, p1) = (&ps[0].conclusion.sequent, &ps[1].conclusion.sequent);
            let ok = p0.iter().enumerate().any(|(i, a)| {
                let g = without(p0, &[i]);
                match ms_minus(p1, &[&negate(a)]) {
                    Some(dl) => ms_eq(&concat(&g, &dl), seq),
                    None => false,
                }
            });
            ok.then_some(()).ok_or_else(|| fail("premises do not share a cut formula and its dual"))
        }
    }
}

/// Checks every node; the error carries the path of premise indices.
pub fn check_derivation(d: &Derivation) -> Result<(), (Vec<usize>, RuleError)> {
    fn go(d: &Derivation, path: &mut Vec<usize>) -> Result<(), (Vec<usize>, RuleError)> {
        check_rule(d).map_err(|e| (path.clone(), e))?;
        for (i, p) in d.premises.iter().enumerate() {
            path.push(i);
            go(p, path)?;
            path.pop();
        }
        Ok(())
    }
    go(d, &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("formula contains a context hole")]
    Hole,
    #[error("process has a race ({0:?}); deadlock-freedom by proof search requires race-freedom")]
    Race(Box<RaceWitness>),
    #[error("process has private mobility; the progress characterisation requires that no restricted name is sent")]
    PrivateMobility,
    #[error("proof search budget exhausted after {0} nodes")]
    Budget(usize),
}

/// A cut-free derivation of `⊢ ¬A, A`.
pub fn prove_identity(a: &Formula) -> Result<Derivation, ProverError> {
    let empty = Store::new();
    let na = negate(a);
    let seq = vec![na.clone(), a.clone()];
    let d = match a {
        Formula::Hole => return Err(ProverError::Hole),
        Formula::Send(..) | Formula::Recv(..) => Derivation::node(Rule::Ax, &empty, seq, vec![]),
        Formula::Unit => {
            let unit = || Derivation::node(Rule::Unit, &empty, vec![Formula::Unit], vec![]);
            Derivation::node(Rule::Mix, &empty, seq, vec![unit(), unit()])
        }
        Formula::Par(x, y) | Formula::Tensor(x, y) => {
            let (tensor, left, right) = match a {
                Formula::Par(..) => (na.clone(), (**x).clone(), (**y).clone()),
                _ => (a.clone(), negate(x), negate(y)),
            };
            let tens = Derivation::node(
                Rule::Tens,
                &empty,
                vec![tensor, left, right],
                vec![prove_identity(x)?, prove_identity(y)?],
            );
            Derivation::node(Rule::Par, &empty, seq, vec![tens])
        }
        Formula::Prec(x, y) => Derivation::node(Rule::Prec, &empty, seq, vec![prove_identity(x)?, prove_identity(y)?]),
        Formula::Oplus(items) | Formula::With(items) => {
            let (with_f, plus_f) = match a {
                Formula::Oplus(_) => (na.clone(), a.clone()),
                _ => (a.clone(), na.clone()),
            };
            let Formula::With(with_items) = &with_f else { unreachable!() };
            let premises = items
                .iter()
                .zip(with_items)
                .map(|(item, w)| {
                    let inner = prove_identity(item)?;
                    Ok(Derivation::node(Rule::Oplus, &empty, vec![w.clone(), plus_f.clone()], vec![inner]))
                })
                .collect::<Result<Vec<_>, ProverError>>()?;
            Derivation::node(Rule::With, &empty, vec![with_f, plus_f], premises)
        }
        Formula::Forall(_, body) | Formula::Exists(_, body) => {
            let (all_f, ex_f) = match a {
                Formula::Forall(..) => (a.clone(), na.clone()),
                _ => (na.clone(), a.clone()),
            };
            let Formula::Forall(_, all_body) = &all_f else { unreachable!() };
            let ex = Derivation::node(Rule::Ex, &empty, vec![ex_f, (**all_body).clone()], vec![prove_identity(body)?]);
            Derivation::node(Rule::All, &empty, seq, vec![ex])
        }
        Formula::New(x, body) | Formula::Ya(x, body) => {
            let (nu_f, ya_f) = match a {
                Formula::New(..) => (a.clone(), na.clone()),
                _ => (na.clone(), a.clone()),
            };
            let Formula::Ya(_, ya_body) = &ya_f else { unreachable!() };
            let mut loaded = Store::new();
            loaded.insert(x.clone(), Tag::Ya);
            let pop = Derivation::node(
                Rule::YaPop,
                &loaded,
                vec![(**ya_body).clone(), nu_f],
                vec![prove_identity(body)?],
            );
            Derivation::node(Rule::YaLoad, &empty, seq, vec![pop])
        }
    };
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub depth: usize,
    pub nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            depth: 64,
            nodes: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Proved(Derivation),
    /// The finite search space was exhausted.
    Unprovable,
    BudgetExhausted,
}

impl SearchOutcome {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            SearchOutcome::Proved(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, SearchOutcome::Proved(_))
    }
}

type MemoKey = (Vec<(Name, Tag)>, Vec<Formula>);

struct Search {
    limits: Limits,
    nodes: usize,
    budget_hit: bool,
    failed: HashSet<MemoKey>,
    proved: HashMap<MemoKey, Derivation>,
    fresh: usize,
    excluded: BTreeSet<Name>,
}

/// Exhaustive cut-free backtracking search.
pub fn prove_bounded(j: &Judgement, limits: Limits) -> SearchOutcome {
    prove_bounded_excluding(j, limits, BTreeSet::new())
}

/// Search in which the given names never witness an existential.
pub fn prove_bounded_excluding(j: &Judgement, limits: Limits, excluded: BTreeSet<Name>) -> SearchOutcome {
    let mut s = Search {
        limits,
        nodes: 0,
        budget_hit: false,
        failed: HashSet::new(),
        proved: HashMap::new(),
        fresh: 0,
        excluded,
    };
    match s.prove(&j.store, &j.sequent, 0) {
        Some(d) => SearchOutcome::Proved(d),
        None if s.budget_hit => SearchOutcome::BudgetExhausted,
        None => SearchOutcome::Unprovable,
    }
}

/// Proves `A ⊸ B`.
pub fn prove_implication(a: &Formula, b: &Formula, limits: Limits) -> SearchOutcome {
    prove_bounded(&Judgement::new(vec![Formula::lolli(a, b)]), limits)
}

fn subsets(n: usize) -> impl Iterator<Item = u64> {
    0..(1u64 << n)
}

fn pick<T: Clone>(items: &[T], mask: u64, inside: bool) -> Vec<T> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| ((mask >> i) & 1 == 1) == inside)
        .map(|(_, x)| x.clone())
        .collect()
}

impl Search {
    fn fresh_name(&mut self, avoid: &BTreeSet<Name>) -> Name {
        loop {
            self.fresh += 1;
            let n = format!("v_{}", self.fresh);
            if !avoid.contains(&n) {
                return n;
            }
        }
    }

    fn all_names(store: &Store, seq: &[Formula]) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = store.keys().cloned().collect();
        for f in seq {
            out.extend(f.free_vars());
            out.extend(f.bound_vars());
        }
        out
    }

    fn prove(&mut self, store: &Store, seq: &[Formula], depth: usize) -> Option<Derivation> {
        let key: MemoKey = (
            store.iter().map(|(k, t)| (k.clone(), *t)).collect(),
            sorted(seq),
        );
        if let Some(d) = self.proved.get(&key) {
            return Some(d.clone());
        }
        if self.failed.contains(&key) {
            return None;
        }
        self.nodes += 1;
        if self.nodes > self.limits.nodes || depth > self.limits.depth {
            self.budget_hit = true;
            return None;
        }
        let outer_hit = self.budget_hit;
        self.budget_hit = false;
        let result = self.try_rules(store, seq, depth);
        match &result {
            Some(d) => {
                self.proved.insert(key, d.clone());
            }
            None if !self.budget_hit => {
                self.failed.insert(key);
            }
            None => {}
        }
        self.budget_hit |= outer_hit;
        result
    }

    fn try_rules(&mut self, store: &Store, seq: &[Formula], depth: usize) -> Option<Derivation> {
        if seq.is_empty() {
            return None;
        }
        let node = |rule, premises| Derivation::node(rule, store, seq.to_vec(), premises);
        // invertible rules first
        for (i, f) in seq.iter().enumerate() {
            match f {
                Formula::Par(a, b) => {
                    let prem = concat(&without(seq, &[i]), &[(**a).clone(), (**b).clone()]);
                    return self.prove(store, &prem, depth + 1).map(|p| node(Rule::Par, vec![p]));
                }
                Formula::With(items) => {
                    let rest = without(seq, &[i]);
                    let mut premises = Vec::new();
                    for a in items {
                        premises.push(self.prove(store, &concat(&rest, std::slice::from_ref(a)), depth + 1)?);
                    }
                    return Some(node(Rule::With, premises));
                }
                Formula::Forall(x, a) => {
                    let rest = without(seq, &[i]);
                    let (z, body) = self.eigen(store, &rest, x, a);
                    let _ = z;
                    let prem = concat(&rest, &[body]);
                    return self.prove(store, &prem, depth + 1).map(|p| node(Rule::All, vec![p]));
                }
                _ => {}
            }
        }
        if seq.len() == 1 && seq[0] == Formula::Unit {
            return Some(node(Rule::Unit, vec![]));
        }
        if let [Formula::Send(a, b), Formula::Recv(c, e)] | [Formula::Recv(c, e), Formula::Send(a, b)] = seq {
            if a == c && b == e {
                return Some(node(Rule::Ax, vec![]));
            }
        }
        let witnesses = {
            let mut w: BTreeSet<Name> = fv_seq(seq);
            w.extend(store.keys().cloned());
            let avoid = Self::all_names(store, seq);
            let mut v: Vec<Name> = w.into_iter().collect();
            v.push(self.fresh_name(&avoid));
            v
        };
        for (i, f) in seq.iter().enumerate() {
            let rest = without(seq, &[i]);
            match f {
                Formula::Oplus(items) => {
                    for a in items {
                        if let Some(p) = self.prove(store, &concat(&rest, std::slice::from_ref(a)), depth + 1) {
                            return Some(node(Rule::Oplus, vec![p]));
                        }
                    }
                }
                Formula::Exists(x, a) => {
                    let bound = a.bound_vars();
                    for y in &witnesses {
                        if bound.contains(y) || self.excluded.contains(y) {
                            continue;
                        }
                        let prem = concat(&rest, &[a.subst(y, x)]);
                        if let Some(p) = self.prove(store, &prem, depth + 1) {
                            return Some(node(Rule::Ex, vec![p]));
                        }
                    }
                }
                Formula::New(x, a) | Formula::Ya(x, a) => {
                    let is_new = matches!(f, Formula::New(..));
                    let (unit_rule, load_rule, tag) = if is_new {
                        (Rule::NewUnit, Rule::NewLoad, Tag::Nu)
                    } else {
                        (Rule::YaUnit, Rule::YaLoad, Tag::Ya)
                    };
                    let (z, body) = self.eigen(store, &rest, x, a);
                    let prem = concat(&rest, std::slice::from_ref(&body));
                    if let Some(p) = self.prove(store, &prem, depth + 1) {
                        return Some(node(unit_rule, vec![p]));
                    }
                    let mut loaded = store.clone();
                    loaded.insert(z, tag);
                    if let Some(p) = self.prove(&loaded, &prem, depth + 1) {
                        return Some(node(load_rule, vec![p]));
                    }
                    // pop: a dual variable in the store witnesses the quantifier
                    let (pop_rule, dual) = if is_new {
                        (Rule::YaPop, Tag::Ya)
                    } else {
                        (Rule::NewPop, Tag::Nu)
                    };
                    let bound = a.bound_vars();
                    for (y, t) in store {
                        if *t != dual || bound.contains(y) {
                            continue;
                        }
                        let mut popped = store.clone();
                        popped.remove(y);
                        let prem = concat(&rest, &[a.subst(y, x)]);
                        if let Some(p) = self.prove(&popped, &prem, depth + 1) {
                            return Some(node(pop_rule, vec![p]));
                        }
                    }
                }
                _ => {}
            }
        }
        let store_items: Vec<(Name, Tag)> = store.iter().map(|(k, t)| (k.clone(), *t)).collect();
        let store_masks: Vec<u64> = subsets(store_items.len()).collect();
        let to_store = |items: Vec<(Name, Tag)>| items.into_iter().collect::<Store>();
        // prec on pairs, prec-unit, tensor
        for i in 0..seq.len() {
            match &seq[i] {
                Formula::Prec(a, b) => {
                    for j in 0..seq.len() {
                        if i == j {
                            continue;
                        }
                        if let Formula::Prec(c, e) = &seq[j] {
                            let rest = without(seq, &[i, j]);
                            for mask in subsets(rest.len()) {
                                let left = concat(&pick(&rest, mask, true), &[(**a).clone(), (**c).clone()]);
                                let right = concat(&pick(&rest, mask, false), &[(**b).clone(), (**e).clone()]);
                                for &sm in &store_masks {
                                    let (s1, s2) = (to_store(pick(&store_items, sm, true)), to_store(pick(&store_items, sm, false)));
                                    if let Some(l) = self.prove(&s1, &left, depth + 1) {
                                        if let Some(r) = self.prove(&s2, &right, depth + 1) {
                                            return Some(node(Rule::Prec, vec![l, r]));
                                        }
                                    }
                                }
                            }
                        }
                    }
                    let rest = without(seq, &[i]);
                    for mask in subsets(rest.len()) {
                        let left = concat(&pick(&rest, mask, true), &[(**a).clone()]);
                        let right = concat(&pick(&rest, mask, false), &[(**b).clone()]);
                        for &sm in &store_masks {
                            let (s1, s2) = (to_store(pick(&store_items, sm, true)), to_store(pick(&store_items, sm, false)));
                            if let Some(l) = self.prove(&s1, &left, depth + 1) {
                                if let Some(r) = self.prove(&s2, &right, depth + 1) {
                                    return Some(node(Rule::PrecUnit, vec![l, r]));
                                }
                            }
                        }
                    }
                }
                Formula::Tensor(a, b) => {
                    let rest = without(seq, &[i]);
                    for mask in subsets(rest.len()) {
                        let left = concat(&pick(&rest, mask, true), &[(**a).clone()]);
                        let right = concat(&[(**b).clone()], &pick(&rest, mask, false));
                        for &sm in &store_masks {
                            let (s1, s2) = (to_store(pick(&store_items, sm, true)), to_store(pick(&store_items, sm, false)));
                            if let Some(l) = self.prove(&s1, &left, depth + 1) {
                                if let Some(r) = self.prove(&s2, &right, depth + 1) {
                                    return Some(node(Rule::Tens, vec![l, r]));
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        // mix: the first formula always goes left, both sides nonempty
        if seq.len() >= 2 {
            let n = seq.len();
            for mask in subsets(n) {
                if mask & 1 == 0 || mask == (1u64 << n) - 1 {
                    continue;
                }
                let left = pick(seq, mask, true);
                let right = pick(seq, mask, false);
                for &sm in &store_masks {
                    let (s1, s2) = (to_store(pick(&store_items, sm, true)), to_store(pick(&store_items, sm, false)));
                    if let Some(l) = self.prove(&s1, &left, depth + 1) {
                        if let Some(r) = self.prove(&s2, &right, depth + 1) {
                            return Some(node(Rule::Mix, vec![l, r]));
                        }
                    }
                }
            }
        }
        None
    }

    /// A variable satisfying `x ∉ fv(rest) ∪ dom(store)`, renaming if needed.
    fn eigen(&mut self, store: &Store, rest: &[Formula], x: &Name, a: &Formula) -> (Name, Formula) {
        if !fv_seq(rest).contains(x) && !store.contains_key(x) {
            return (x.clone(), a.clone());
        }
        let mut avoid = Self::all_names(store, rest);
        avoid.extend(a.free_vars());
        avoid.extend(a.bound_vars());
        let z = self.fresh_name(&avoid);
        let body = a.subst(&z, x);
        (z, body)
    }
}

/// Verdict of the block prover on a process encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodingVerdict {
    DeadlockFree(Derivation),
    Stuck { witness: Process, trace: Vec<String> },
}

impl EncodingVerdict {
    pub fn is_deadlock_free(&self) -> bool {
        matches!(self, EncodingVerdict::DeadlockFree(_))
    }
}

struct BlockProver {
    stripped: Vec<Name>,
    trace: Vec<String>,
}

struct Stuck {
    residual: Vec<Formula>,
    trace: Vec<String>,
}

/// Decides deadlock-freedom of a race-free process by block-directed search
/// for a derivation of its encoding.
pub fn prove_encoding(p: &Process) -> Result<EncodingVerdict, ProverError> {
    let p = if is_unambiguous(p) {
        p.clone()
    } else {
        make_unambiguous(p, &mut NameSupply::from_env())
    };
    if let Some(w) = find_race_shape(&p).or_else(|| oracle_race_free(&p).map(|r| r.witness)) {
        return Err(ProverError::Race(Box::new(w)));
    }
    Ok(prove_encoding_unchecked(&p))
}

/// The block search without the race precondition check.
pub fn prove_encoding_unchecked(p: &Process) -> EncodingVerdict {
    let f = encode(p).expect("unambiguous input");
    let mut bp = BlockProver {
        stripped: Vec::new(),
        trace: Vec::new(),
    };
    match bp.go(vec![f]) {
        Ok(d) => EncodingVerdict::DeadlockFree(d),
        Err(stuck) => {
            let threads: Vec<Process> = stuck
                .residual
                .iter()
                .filter(|f| !f.is_unit())
                .map(|f| crate::formula::decode(f).expect("residual formulas decode"))
                .collect();
            let body = Process::par_all(threads);
            let fns = body.free_names();
            let binders: Vec<Name> = bp.stripped.iter().filter(|x| fns.contains(*x)).cloned().collect();
            EncodingVerdict::Stuck {
                witness: Process::res_all(&binders, body),
                trace: stuck.trace,
            }
        }
    }
}

fn close_units(seq: &[Formula]) -> Derivation {
    let empty = Store::new();
    if seq.len() == 1 {
        return Derivation::node(Rule::Unit, &empty, seq.to_vec(), vec![]);
    }
    Derivation::node(
        Rule::Mix,
        &empty,
        seq.to_vec(),
        vec![close_units(&seq[..1]), close_units(&seq[1..])],
    )
}

enum Block {
    Com { send: usize, recv: usize },
    Sel { send: usize, recv: usize },
}

fn find_block(seq: &[Formula]) -> Option<Block> {
    for (i, f) in seq.iter().enumerate() {
        match f {
            Formula::Prec(head, _) => {
                let Formula::Send(k, _) = &**head else { continue };
                for (j, g) in seq.iter().enumerate() {
                    if let Formula::Exists(y, body) = g {
                        if let Formula::Prec(h, _) = &**body {
                            if matches!(&**h, Formula::Recv(k2, y2) if k2 == k && y2 == y) {
                                return Some(Block::Com { send: i, recv: j });
                            }
                        }
                    }
                }
            }
            Formula::With(items) => {
                let Some(k) = choice_subject(items, true) else { continue };
                for (j, g) in seq.iter().enumerate() {
                    if let Formula::Oplus(other) = g {
                        if choice_subject(other, false).as_ref() == Some(&k) {
                            return Some(Block::Sel { send: i, recv: j });
                        }
                    }
                }
            }
            _ => {}
        }
    }
    None
}

fn choice_subject(items: &[Formula], sending: bool) -> Option<Name> {
    match items.first()? {
        Formula::Prec(h, _) => match (&**h, sending) {
            (Formula::Send(k, _), true) | (Formula::Recv(k, _), false) => Some(k.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn branch_parts(f: &Formula) -> Option<(&Name, &Name, &Formula)> {
    match f {
        Formula::Prec(h, cont) => match &**h {
            Formula::Send(k, l) | Formula::Recv(k, l) => Some((k, l, cont)),
            _ => None,
        },
        _ => None,
    }
}

impl BlockProver {
    fn go(&mut self, seq: Vec<Formula>) -> Result<Derivation, Stuck> {
        let empty = Store::new();
        for (i, f) in seq.iter().enumerate() {
            match f {
                Formula::Par(a, b) => {
                    let prem = concat(&without(&seq, &[i]), &[(**a).clone(), (**b).clone()]);
                    let p = self.go(prem)?;
                    return Ok(Derivation::node(Rule::Par, &empty, seq, vec![p]));
                }
                Formula::New(x, a) => {
                    self.stripped.push(x.clone());
                    let mut prem = seq.clone();
                    prem[i] = (**a).clone();
                    let p = self.go(prem)?;
                    return Ok(Derivation::node(Rule::NewUnit, &empty, seq, vec![p]));
                }
                _ => {}
            }
        }
        if seq.iter().all(Formula::is_unit) {
            return Ok(close_units(&seq));
        }
        match find_block(&seq) {
            None => Err(Stuck {
                residual: seq,
                trace: self.trace.clone(),
            }),
            Some(Block::Com { send, recv }) => {
                let (Formula::Prec(sh, a), Formula::Exists(y, body)) = (&seq[send], &seq[recv]) else {
                    unreachable!("communication block shape")
                };
                let Formula::Send(k, obj) = &**sh else { unreachable!() };
                let Formula::Prec(_, b) = &**body else { unreachable!() };
                let rest = without(&seq, &[send, recv]);
                let received = Formula::prec(Formula::recv(k.clone(), obj.clone()), b.subst(obj, y));
                let depth = self.trace.len();
                self.trace.push(format!("Com on {} carrying {}", k, obj));
                let cont = self.go(concat(&rest, &[(**a).clone(), b.subst(obj, y)]))?;
                self.trace.truncate(depth);
                let ax = Derivation::node(
                    Rule::Ax,
                    &empty,
                    vec![Formula::send(k.clone(), obj.clone()), Formula::recv(k.clone(), obj.clone())],
                    vec![],
                );
                let prec = Derivation::node(
                    Rule::Prec,
                    &empty,
                    concat(&rest, &[seq[send].clone(), received]),
                    vec![ax, cont],
                );
                Ok(Derivation::node(Rule::Ex, &empty, seq, vec![prec]))
            }
            Some(Block::Sel { send, recv }) => {
                let (Formula::With(sends), Formula::Oplus(recvs)) = (&seq[send], &seq[recv]) else {
                    unreachable!("selection block shape")
                };
                let rest = without(&seq, &[send, recv]);
                let mut premises = Vec::new();
                for sb in sends {
                    let (k, l, a) = branch_parts(sb).expect("selection branch");
                    let depth = self.trace.len();
                    if sends.len() > 1 {
                        self.trace.push(format!("Choice {} on {}", l, k));
                    }
                    let chosen = concat(&rest, &[sb.clone(), seq[recv].clone()]);
                    let Some(rb) = recvs.iter().find(|r| branch_parts(r).is_some_and(|(_, m, _)| m == l)) else {
                        return Err(Stuck {
                            residual: concat(&rest, &[Formula::With(vec![sb.clone()]), seq[recv].clone()]),
                            trace: self.trace.clone(),
                        });
                    };
                    let (_, _, b) = branch_parts(rb).expect("branch shape");
                    self.trace.push(format!("Label {} on {}", l, k));
                    let cont = self.go(concat(&rest, &[a.clone(), b.clone()]))?;
                    self.trace.truncate(depth);
                    let ax = Derivation::node(
                        Rule::Ax,
                        &empty,
                        vec![Formula::send(k.clone(), l.clone()), Formula::recv(k.clone(), l.clone())],
                        vec![],
                    );
                    let prec = Derivation::node(Rule::Prec, &empty, concat(&rest, &[sb.clone(), rb.clone()]), vec![ax, cont]);
                    premises.push(Derivation::node(Rule::Oplus, &empty, chosen, vec![prec]));
                }
                Ok(Derivation::node(Rule::With, &empty, seq, premises))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgressVerdict {
    pub progress: bool,
    pub outcome: SearchOutcome,
}

/// Progress via provability of the unitized encoding.
pub fn prove_progress(p: &Process, limits: Limits) -> Result<ProgressVerdict, ProverError> {
    let p = if is_unambiguous(p) {
        p.clone()
    } else {
        make_unambiguous(p, &mut NameSupply::from_env())
    };
    if let Some(w) = find_race_shape(&p).or_else(|| oracle_race_free(&p).map(|r| r.witness)) {
        return Err(ProverError::Race(Box::new(w)));
    }
    if has_private_mobility(&p) {
        return Err(ProverError::PrivateMobility);
    }
    let f = unitize(&encode(&p).expect("unambiguous input"), &p.free_names());
    let names = p.names();
    let labels = p.labels().into_iter().filter(|l| !names.contains(l)).collect();
    let outcome = prove_bounded_excluding(&Judgement::new(vec![f]), limits, labels);
    match outcome {
        SearchOutcome::BudgetExhausted => Err(ProverError::Budget(limits.nodes)),
        other => Ok(ProgressVerdict {
            progress: other.is_proved(),
            outcome: other,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::struct_equiv;
    use crate::syntax::parse_process;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    const EQ1: &str = "new x. new y. ( x!a. y sel{l: y!b.0} | x?a. y bra{l: y?b.0, m: z!c.0} )";

    #[test]
    fn identity_derivations_check() {
        for s in [
            "x!y",
            "1",
            "x!y par x?z",
            "x!y tens (x?z seq 1)",
            "oplus{x!y, with{1, y?x}}",
            "all y. ex z. (y!z seq z?y)",
            "new x. (x!y seq 1)",
            "ya x. new z. (x!z par z?x)",
        ] {
            let d = prove_identity(&f(s)).unwrap();
            assert_eq!(d.conclusion.sequent, vec![negate(&f(s)), f(s)]);
            check_derivation(&d).unwrap_or_else(|e| panic!("{}: {:?}", s, e));
        }
    }

    #[test]
    fn rule_checks() {
        let empty = Store::new();
        let bad = Derivation::node(Rule::Ax, &empty, vec![f("x!y"), f("x!y")], vec![]);
        assert!(check_rule(&bad).is_err());

        let mut s = Store::new();
        s.insert("x".into(), Tag::Nu);
        let ax = Derivation::node(Rule::Ax, &empty, vec![f("x!y"), f("x?y")], vec![]);
        let pop = Derivation::node(Rule::NewPop, &s, vec![f("ya z. z!y"), f("x?y")], vec![ax.clone()]);
        let load = Derivation::node(Rule::NewLoad, &empty, vec![f("ya z. z!y"), f("new w. w?y")], vec![pop]);
        check_derivation(&load).unwrap();

        let pop_empty = Derivation::node(Rule::NewPop, &empty, vec![f("ya z. z!y"), f("x?y")], vec![ax]);
        assert!(check_rule(&pop_empty).is_err());
    }

    #[test]
    fn com_block_for_nil_continuations() {
        let d = match prove_encoding(&p("x!a.0 | x?b.0")).unwrap() {
            EncodingVerdict::DeadlockFree(d) => d,
            other => panic!("{:?}", other),
        };
        check_derivation(&d).unwrap();
        assert!(d.rules_used().iter().all(|r| ENCODING_FRAGMENT.contains(r)));
    }

    #[test]
    fn encoding_examples() {
        let d = match prove_encoding(&p(EQ1)).unwrap() {
            EncodingVerdict::DeadlockFree(d) => d,
            other => panic!("{:?}", other),
        };
        check_derivation(&d).unwrap();
        assert!(d.stores_empty());

        match prove_encoding(&p("new x.(x!a.0 | x?b.0 | y!c.0)")).unwrap() {
            EncodingVerdict::Stuck { witness, .. } => assert!(struct_equiv(&witness, &p("y!c.0"))),
            other => panic!("{:?}", other),
        }

        let d = match prove_encoding(&p("0 | 0")).unwrap() {
            EncodingVerdict::DeadlockFree(d) => d,
            other => panic!("{:?}", other),
        };
        assert_eq!(d.rule, Rule::Par);
        assert_eq!(d.premises[0].rule, Rule::Mix);

        assert!(matches!(prove_encoding(&p("x!a.0 | x?b.0 | x?c.0")), Err(ProverError::Race(_))));
    }

    #[test]
    fn bounded_search() {
        let out = prove_bounded(&Judgement::new(vec![Formula::Unit]), Limits::default());
        assert_eq!(out.derivation().unwrap().size(), 1);
        for (a, b) in [
            ("x!y par 1", "x!y"),
            ("x!y seq 1", "x!y"),
            ("new x. new y. (x!y par y?x)", "new y. new x. (x!y par y?x)"),
            ("with{new x. x!y, new x. x?y}", "new x. with{x!y, x?y}"),
        ] {
            for (l, r) in [(a, b), (b, a)] {
                let out = prove_implication(&f(l), &f(r), Limits::default());
                let d = out.derivation().unwrap_or_else(|| panic!("{} -o {}: {:?}", l, r, out));
                check_derivation(d).unwrap();
            }
        }
        let out = prove_bounded(&Judgement::new(vec![f("x!y"), f("x!y")]), Limits::default());
        assert_eq!(out, SearchOutcome::Unprovable);
    }

    #[test]
    fn progress_examples() {
        assert!(prove_progress(&p("y!c.0"), Limits::default()).unwrap().progress);
        assert!(prove_progress(&p("0"), Limits::default()).unwrap().progress);
        assert_eq!(
            prove_progress(&p("new a.(b!a.a!c.0)"), Limits::default()),
            Err(ProverError::PrivateMobility)
        );
    }

    #[test]
    fn derivation_json_round_trip() {
        let d = prove_identity(&f("new x. (x!y seq 1)")).unwrap();
        let back = Derivation::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert_eq!(d.to_json()["rule"], "ya-load");
        assert_eq!(d.premises[0].to_json()["store"]["x"], "ya");
    }
}
