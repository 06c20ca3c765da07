//! Sequents annotated with process names, ChorL proof search over endpoint
//! networks, expansion of ChorL derivations into PiL, and choreography
//! extraction.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::choreography::{Choreography, Network};
use crate::formula::{decode_sequential, encode_unchecked, Formula};
use crate::process::{branch, Name, Process, RaceWitness};
use crate::prover::{Derivation, Rule, Store};
use crate::semantics::oracle_race_free;
use crate::syntax::print_annotated;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotatedFormula {
    pub formula: Formula,
    pub owner: Name,
}

impl fmt::Display for AnnotatedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_annotated(&self.formula, &self.owner))
    }
}

/// `⊢ Иx1…Иxm ([A1]p1 ⅋ … ⅋ [An]pn)` when `restricted` is nonempty,
/// otherwise the plain sequent `⊢ [A1]p1, …, [An]pn`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSequent {
    pub restricted: Vec<Name>,
    pub formulas: Vec<AnnotatedFormula>,
}

impl AnnotatedSequent {
    /// The unannotated PiL formulas of this sequent.
    pub fn pil_sequent(&self) -> Vec<Formula> {
        if self.restricted.is_empty() {
            return self.formulas.iter().map(|a| a.formula.clone()).collect();
        }
        let body = par_all(self.formulas.iter().map(|a| a.formula.clone()).collect());
        let f = self
            .restricted
            .iter()
            .rev()
            .fold(body, |acc, x| Formula::new_(x.clone(), acc));
        vec![f]
    }
}

impl fmt::Display for AnnotatedSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.formulas.iter().map(|a| a.to_string()).collect();
        if self.restricted.is_empty() {
            write!(f, "|- {}", items.join(", "))
        } else {
            write!(f, "|- new {}. ({})", self.restricted.join(", "), items.join(" par "))
        }
    }
}

fn par_all(mut items: Vec<Formula>) -> Formula {
    let Some(mut acc) = items.pop() else {
        return Formula::Unit;
    };
    while let Some(f) = items.pop() {
        acc = Formula::par(f, acc);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ChorLRule {
    #[serde(rename = "C-flat")]
    Flat,
    #[serde(rename = "C-init")]
    Init,
    #[serde(rename = "C-com")]
    Com {
        sender: Name,
        object: Name,
        receiver: Name,
        binder: Name,
        channel: Name,
    },
    #[serde(rename = "C-sel")]
    Sel {
        sender: Name,
        receiver: Name,
        channel: Name,
        selected: Vec<Name>,
        offered: Vec<Name>,
    },
}

impl ChorLRule {
    pub fn name(&self) -> &'static str {
        match self {
            ChorLRule::Flat => "C-flat",
            ChorLRule::Init => "C-init",
            ChorLRule::Com { .. } => "C-com",
            ChorLRule::Sel { .. } => "C-sel",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChorLDerivation {
    pub rule: ChorLRule,
    pub conclusion: AnnotatedSequent,
    pub premises: Vec<ChorLDerivation>,
}

impl ChorLDerivation {
    /// Rule names in pre-order.
    pub fn shape(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule.name()];
        for p in &self.premises {
            out.extend(p.shape());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChorlError {
    #[error("network has a race ({0:?}); ChorL search requires race-freedom")]
    Race(Box<RaceWitness>),
    #[error("no ChorL rule applies: the network gets stuck at {residual}")]
    Stuck { residual: Network, trace: Vec<String> },
    #[error("invalid ChorL derivation: {0}")]
    Invalid(String),
}

/// The annotated sequent of a race-free network. Receive binders are renamed
/// to the name their partners send when all partners agree on it.
pub fn annotate(n: &Network) -> Result<AnnotatedSequent, ChorlError> {
    if let Some(r) = oracle_race_free(&n.to_process()) {
        return Err(ChorlError::Race(Box::new(r.witness)));
    }
    Ok(annotate_unchecked(n))
}

pub fn annotate_unchecked(n: &Network) -> AnnotatedSequent {
    let mut sends: Vec<(Name, Name)> = Vec::new();
    let mut bound: BTreeSet<Name> = BTreeSet::new();
    for (_, body) in &n.components {
        collect_sends(body, &mut sends);
        bound.extend(body.bound_names());
    }
    let formulas = n
        .components
        .iter()
        .map(|(owner, body)| AnnotatedFormula {
            formula: {
                let mut taken: BTreeSet<Name> = bound.iter().cloned().chain(body.free_names()).collect();
                encode_unchecked(&rename_receives(body, &sends, &mut taken))
            },
            owner: owner.clone(),
        })
        .collect();
    AnnotatedSequent {
        restricted: n.restricted.clone(),
        formulas,
    }
}

fn collect_sends(p: &Process, out: &mut Vec<(Name, Name)>) {
    match p {
        Process::Nil => {}
        Process::Send {
            subject,
            object,
            cont,
        } => {
            out.push((subject.clone(), object.clone()));
            collect_sends(cont, out);
        }
        Process::Recv { cont, .. } => collect_sends(cont, out),
        Process::Par(l, r) => {
            collect_sends(l, out);
            collect_sends(r, out);
        }
        Process::Res { body, .. } => collect_sends(body, out),
        Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
            for (_, q) in branches {
                collect_sends(q, out);
            }
        }
    }
}

fn rename_receives(p: &Process, sends: &[(Name, Name)], bound: &mut BTreeSet<Name>) -> Process {
    match p {
        Process::Recv {
            subject,
            binder,
            cont,
        } => {
            let objects: BTreeSet<&Name> = sends.iter().filter(|(k, _)| k == subject).map(|(_, o)| o).collect();
            let target = match objects.iter().next() {
                Some(&o)
                    if objects.len() == 1
                        && o != binder
                        && o != subject
                        && !bound.contains(o)
                        && sends.iter().all(|(k, x)| x != o || k == subject) =>
                {
                    let fresh = !cont.free_names().contains(o) && !cont.bound_names().contains(o);
                    fresh.then(|| o.clone())
                }
                _ => None,
            };
            match target {
                Some(o) => {
                    bound.insert(o.clone());
                    let cont = cont.subst_unchecked(&o, binder);
                    Process::recv(subject.clone(), o, rename_receives(&cont, sends, bound))
                }
                None => Process::recv(subject.clone(), binder.clone(), rename_receives(cont, sends, bound)),
            }
        }
        Process::Send {
            subject,
            object,
            cont,
        } => Process::send(subject.clone(), object.clone(), rename_receives(cont, sends, bound)),
        Process::LabelSend { subject, branches } => Process::sel(
            subject.clone(),
            branches
                .iter()
                .map(|(l, q)| (l.clone(), rename_receives(q, sends, bound)))
                .collect(),
        ),
        Process::LabelRecv { subject, branches } => Process::bra(
            subject.clone(),
            branches
                .iter()
                .map(|(l, q)| (l.clone(), rename_receives(q, sends, bound)))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Searches a ChorL derivation for a race-free network.
pub fn chorl_prove(n: &Network) -> Result<ChorLDerivation, ChorlError> {
    let conclusion = annotate(n)?;
    let mut trace = Vec::new();
    let inner = search(&conclusion.formulas, &mut trace).map_err(|residual| ChorlError::Stuck {
        residual: residual_network(n, &residual),
        trace: trace.clone(),
    })?;
    if conclusion.restricted.is_empty() {
        return Ok(inner);
    }
    Ok(ChorLDerivation {
        rule: ChorLRule::Flat,
        conclusion,
        premises: vec![inner],
    })
}

fn residual_network(n: &Network, residual: &[AnnotatedFormula]) -> Network {
    let components: Vec<(Name, Process)> = residual
        .iter()
        .map(|a| {
            let body = decode_sequential(&a.formula).expect("residual formulas are sequential encodings");
            (a.owner.clone(), body)
        })
        .collect();
    let used: BTreeSet<Name> = components.iter().flat_map(|(_, p)| p.free_names()).collect();
    Network {
        restricted: n.restricted.iter().filter(|x| used.contains(*x)).cloned().collect(),
        components,
    }
}

fn sel_parts(f: &Formula) -> Option<(&Name, &Name, &Formula)> {
    match f {
        Formula::Prec(h, cont) => match &**h {
            Formula::Send(k, l) | Formula::Recv(k, l) => Some((k, l, cont)),
            _ => None,
        },
        _ => None,
    }
}

fn choice_channel(items: &[Formula]) -> Option<&Name> {
    sel_parts(items.first()?).map(|(k, _, _)| k)
}

fn replaced(seq: &[AnnotatedFormula], updates: &[(usize, Formula)]) -> Vec<AnnotatedFormula> {
    let mut out = seq.to_vec();
    for (i, f) in updates {
        out[*i].formula = f.clone();
    }
    out
}

/// Leftmost-first block search; the error carries the stuck residual.
fn search(seq: &[AnnotatedFormula], trace: &mut Vec<String>) -> Result<ChorLDerivation, Vec<AnnotatedFormula>> {
    let conclusion = AnnotatedSequent {
        restricted: Vec::new(),
        formulas: seq.to_vec(),
    };
    if seq.iter().all(|a| a.formula.is_unit()) {
        return Ok(ChorLDerivation {
            rule: ChorLRule::Init,
            conclusion,
            premises: Vec::new(),
        });
    }
    for i in 0..seq.len() {
        for j in 0..seq.len() {
            if i == j {
                continue;
            }
            match (&seq[i].formula, &seq[j].formula) {
                (Formula::Prec(h, t), Formula::Exists(z, body)) => {
                    let Formula::Send(k, x) = &**h else { continue };
                    let Formula::Prec(rh, t2) = &**body else { continue };
                    if !matches!(&**rh, Formula::Recv(k2, z2) if k2 == k && z2 == z) {
                        continue;
                    }
                    let (p, q) = (&seq[i].owner, &seq[j].owner);
                    trace.push(format!("C-com {}.{} -> {}.{} : {}", p, x, q, z, k));
                    let premise = search(&replaced(seq, &[(i, (**t).clone()), (j, t2.subst(x, z))]), trace)?;
                    trace.pop();
                    return Ok(ChorLDerivation {
                        rule: ChorLRule::Com {
                            sender: p.clone(),
                            object: x.clone(),
                            receiver: q.clone(),
                            binder: z.clone(),
                            channel: k.clone(),
                        },
                        conclusion,
                        premises: vec![premise],
                    });
                }
                (Formula::With(sends), Formula::Oplus(recvs)) => {
                    let (Some(k), Some(k2)) = (choice_channel(sends), choice_channel(recvs)) else { continue };
                    if k != k2 {
                        continue;
                    }
                    let selected: Vec<Name> = sends.iter().filter_map(|s| sel_parts(s).map(|(_, l, _)| l.clone())).collect();
                    let offered: Vec<Name> = recvs.iter().filter_map(|s| sel_parts(s).map(|(_, l, _)| l.clone())).collect();
                    if !selected.iter().all(|l| offered.contains(l)) {
                        return Err(seq.to_vec());
                    }
                    let (p, q) = (&seq[i].owner, &seq[j].owner);
                    let mut premises = Vec::new();
                    for s in sends {
                        let (_, l, t) = sel_parts(s).expect("selection branch");
                        let (_, _, t2) = recvs
                            .iter()
                            .filter_map(sel_parts)
                            .find(|(_, m, _)| *m == l)
                            .expect("offered label");
                        trace.push(format!("C-sel {} -> {} : {} [{}]", p, q, k, l));
                        premises.push(search(&replaced(seq, &[(i, t.clone()), (j, t2.clone())]), trace)?);
                        trace.pop();
                    }
                    return Ok(ChorLDerivation {
                        rule: ChorLRule::Sel {
                            sender: p.clone(),
                            receiver: q.clone(),
                            channel: k.clone(),
                            selected,
                            offered,
                        },
                        conclusion,
                        premises,
                    });
                }
                _ => {}
            }
        }
    }
    Err(seq.to_vec())
}

fn units(seq: &[Formula]) -> Derivation {
    let empty = Store::new();
    if seq.len() == 1 {
        return Derivation::node(Rule::Unit, &empty, seq.to_vec(), vec![]);
    }
    Derivation::node(Rule::Mix, &empty, seq.to_vec(), vec![units(&seq[..1]), units(&seq[1..])])
}

fn invalid(d: &ChorLDerivation, why: &str) -> ChorlError {
    ChorlError::Invalid(format!("{} at {}: {}", d.rule.name(), d.conclusion, why))
}

/// Replaces every ChorL rule by the PiL block deriving it.
pub fn expand_to_pil(d: &ChorLDerivation) -> Result<Derivation, ChorlError> {
    let empty = Store::new();
    let seq = d.conclusion.pil_sequent();
    match &d.rule {
        ChorLRule::Init => {
            if !seq.iter().all(Formula::is_unit) || seq.is_empty() {
                return Err(invalid(d, "C-init needs a nonempty sequent of units"));
            }
            Ok(units(&seq))
        }
        ChorLRule::Flat => {
            let [premise] = d.premises.as_slice() else {
                return Err(invalid(d, "C-flat has one premise"));
            };
            let mut top = expand_to_pil(premise)?;
            // ⅋ chain, innermost first
            let items: Vec<Formula> = d.conclusion.formulas.iter().map(|a| a.formula.clone()).collect();
            for cut in (1..items.len()).rev() {
                let mut s = items[..cut - 1].to_vec();
                s.push(par_all(items[cut - 1..].to_vec()));
                top = Derivation::node(Rule::Par, &empty, s, vec![top]);
            }
            let body = par_all(items);
            let mut formulas = Vec::new();
            let mut acc = body;
            for x in d.conclusion.restricted.iter().rev() {
                acc = Formula::new_(x.clone(), acc);
                formulas.push(acc.clone());
            }
            for f in formulas {
                top = Derivation::node(Rule::NewUnit, &empty, vec![f], vec![top]);
            }
            Ok(top)
        }
        ChorLRule::Com {
            sender,
            receiver,
            object,
            channel,
            ..
        } => {
            let [premise] = d.premises.as_slice() else {
                return Err(invalid(d, "C-com has one premise"));
            };
            let i = d.conclusion.formulas.iter().position(|a| &a.owner == sender);
            let j = d.conclusion.formulas.iter().position(|a| &a.owner == receiver);
            let (Some(i), Some(j)) = (i, j) else {
                return Err(invalid(d, "unknown process name"));
            };
            let Formula::Exists(z, body) = &seq[j] else {
                return Err(invalid(d, "receiver formula is not an existential"));
            };
            let received = body.subst(object, z);
            let mut mid = seq.clone();
            mid[j] = received;
            let ax = Derivation::node(
                Rule::Ax,
                &empty,
                vec![Formula::send(channel.clone(), object.clone()), Formula::recv(channel.clone(), object.clone())],
                vec![],
            );
            let _ = i;
            let prec = Derivation::node(Rule::Prec, &empty, mid, vec![ax, expand_to_pil(premise)?]);
            Ok(Derivation::node(Rule::Ex, &empty, seq, vec![prec]))
        }
        ChorLRule::Sel {
            sender,
            receiver,
            channel,
            selected,
            ..
        } => {
            let i = d.conclusion.formulas.iter().position(|a| &a.owner == sender);
            let j = d.conclusion.formulas.iter().position(|a| &a.owner == receiver);
            let (Some(i), Some(j)) = (i, j) else {
                return Err(invalid(d, "unknown process name"));
            };
            let (Formula::With(sends), Formula::Oplus(recvs)) = (&seq[i], &seq[j]) else {
                return Err(invalid(d, "expected a with against an oplus"));
            };
            if sends.len() != d.premises.len() || selected.len() != sends.len() {
                return Err(invalid(d, "one premise per selected label"));
            }
            let mut branches = Vec::new();
            for (s, premise) in sends.iter().zip(&d.premises) {
                let (_, l, _) = sel_parts(s).ok_or_else(|| invalid(d, "malformed selection branch"))?;
                let r = recvs
                    .iter()
                    .find(|r| sel_parts(r).is_some_and(|(_, m, _)| m == l))
                    .ok_or_else(|| invalid(d, "label not offered"))?;
                let mut chosen = seq.clone();
                chosen[i] = s.clone();
                let mut picked = chosen.clone();
                picked[j] = r.clone();
                let ax = Derivation::node(
                    Rule::Ax,
                    &empty,
                    vec![Formula::send(channel.clone(), l.clone()), Formula::recv(channel.clone(), l.clone())],
                    vec![],
                );
                let prec = Derivation::node(Rule::Prec, &empty, picked, vec![ax, expand_to_pil(premise)?]);
                branches.push(Derivation::node(Rule::Oplus, &empty, chosen, vec![prec]));
            }
            Ok(Derivation::node(Rule::With, &empty, seq, branches))
        }
    }
}

/// Re-reads `q`'s actions in `c` from its original behaviour `t`, undoing
/// the substitution a C-com applied to `q`'s continuation.
fn relabel(c: &Choreography, q: &Name, t: &Process) -> Choreography {
    match c {
        Choreography::End => Choreography::End,
        Choreography::Res { binder, body } => Choreography::res(binder.clone(), relabel(body, q, t)),
        Choreography::Com {
            sender,
            object,
            receiver,
            binder,
            channel,
            cont,
        } => {
            let mut next = Choreography::Com {
                sender: sender.clone(),
                object: object.clone(),
                receiver: receiver.clone(),
                binder: binder.clone(),
                channel: channel.clone(),
                cont: cont.clone(),
            };
            let Choreography::Com {
                object: o,
                binder: b,
                channel: k,
                cont: rest,
                ..
            } = &mut next
            else {
                unreachable!()
            };
            match t {
                Process::Send {
                    subject,
                    object: obj,
                    cont: t2,
                } if sender == q => {
                    *k = subject.clone();
                    *o = obj.clone();
                    **rest = relabel(cont, q, t2);
                }
                Process::Recv {
                    subject,
                    binder: w,
                    cont: t2,
                } if receiver == q => {
                    *k = subject.clone();
                    *b = w.clone();
                    **rest = relabel(cont, q, t2);
                }
                _ => **rest = relabel(cont, q, t),
            }
            next
        }
        Choreography::Choice {
            sender,
            receiver,
            channel,
            selectable,
            garbage,
        } => {
            let (k, sel, gar) = match t {
                Process::LabelSend { subject, branches } if sender == q => (
                    subject.clone(),
                    selectable
                        .iter()
                        .map(|(l, cl)| (l.clone(), branch(branches, l).map_or_else(|| cl.clone(), |tl| relabel(cl, q, tl))))
                        .collect(),
                    garbage.clone(),
                ),
                Process::LabelRecv { subject, branches } if receiver == q => (
                    subject.clone(),
                    selectable
                        .iter()
                        .map(|(l, cl)| (l.clone(), branch(branches, l).map_or_else(|| cl.clone(), |tl| relabel(cl, q, tl))))
                        .collect(),
                    garbage
                        .iter()
                        .map(|(l, g)| (l.clone(), branch(branches, l).cloned().unwrap_or_else(|| g.clone())))
                        .collect(),
                ),
                _ => (
                    channel.clone(),
                    selectable.iter().map(|(l, cl)| (l.clone(), relabel(cl, q, t))).collect(),
                    garbage.clone(),
                ),
            };
            Choreography::Choice {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: k,
                selectable: sel,
                garbage: gar,
            }
        }
    }
}

/// The choreography a ChorL derivation denotes.
pub fn extract_choreography(d: &ChorLDerivation) -> Result<Choreography, ChorlError> {
    match &d.rule {
        ChorLRule::Init => Ok(Choreography::End),
        ChorLRule::Flat => {
            let [premise] = d.premises.as_slice() else {
                return Err(invalid(d, "C-flat has one premise"));
            };
            Ok(Choreography::res_all(&d.conclusion.restricted, extract_choreography(premise)?))
        }
        ChorLRule::Com {
            sender,
            object,
            receiver,
            binder,
            channel,
        } => {
            let [premise] = d.premises.as_slice() else {
                return Err(invalid(d, "C-com has one premise"));
            };
            let q_formula = d
                .conclusion
                .formulas
                .iter()
                .find(|a| &a.owner == receiver)
                .ok_or_else(|| invalid(d, "unknown receiver"))?;
            let Formula::Exists(_, body) = &q_formula.formula else {
                return Err(invalid(d, "receiver formula is not an existential"));
            };
            let Formula::Prec(_, t) = &**body else {
                return Err(invalid(d, "receiver formula is not a prefix"));
            };
            let original = decode_sequential(t).map_err(|e| invalid(d, &e.to_string()))?;
            let cont = relabel(&extract_choreography(premise)?, receiver, &original);
            Ok(Choreography::Com {
                sender: sender.clone(),
                object: object.clone(),
                receiver: receiver.clone(),
                binder: binder.clone(),
                channel: channel.clone(),
                cont: Box::new(cont),
            })
        }
        ChorLRule::Sel {
            sender,
            receiver,
            channel,
            selected,
            offered,
        } => {
            let q_formula = d
                .conclusion
                .formulas
                .iter()
                .find(|a| &a.owner == receiver)
                .ok_or_else(|| invalid(d, "unknown receiver"))?;
            let Formula::Oplus(recvs) = &q_formula.formula else {
                return Err(invalid(d, "receiver formula is not an oplus"));
            };
            let mut selectable = Vec::new();
            for (l, premise) in selected.iter().zip(&d.premises) {
                selectable.push((l.clone(), extract_choreography(premise)?));
            }
            let mut garbage = Vec::new();
            for l in offered.iter().filter(|l| !selected.contains(l)) {
                let (_, _, t) = recvs
                    .iter()
                    .filter_map(sel_parts)
                    .find(|(_, m, _)| *m == l)
                    .ok_or_else(|| invalid(d, "offered label missing"))?;
                garbage.push((l.clone(), decode_sequential(t).map_err(|e| invalid(d, &e.to_string()))?));
            }
            Ok(Choreography::Choice {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                selectable,
                garbage,
            })
        }
    }
}

/// Search followed by extraction.
pub fn extract(n: &Network) -> Result<(ChorLDerivation, Choreography), ChorlError> {
    let d = chorl_prove(n)?;
    let c = extract_choreography(&d)?;
    Ok((d, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choreography::{epp, network_equiv};
    use crate::prover::check_derivation;
    use crate::syntax::{parse_choreography, parse_network};

    const EQ11: &str = "new x, y. p[x!a. y sel{l: y!b.0}] | q[x?a. y bra{l: y?b.0, m: z!c.0}]";
    const EQ_CHOREO: &str = "new x. new y. p.a -> q.a : x ; p -> q : y { l: p.b -> q.b : y ; 0 | m: z!c.0 }";

    #[test]
    fn annotate_examples() {
        let s = annotate(&parse_network("p[x!y.0] | q[x?y.0]").unwrap()).unwrap();
        assert_eq!(s.to_string(), "|- [x!y seq 1]p, [ex y.(x?y seq 1)]q");
        let s = annotate(&parse_network("p[0]").unwrap()).unwrap();
        assert_eq!(s.formulas[0].formula, Formula::Unit);
        let s = annotate(&parse_network("p[x!y.0] | q[x?w.w!c.0]").unwrap()).unwrap();
        assert!(s.formulas[1].to_string().contains("x?y"));
    }

    #[test]
    fn eq11_extracts_eq_choreo() {
        let n = parse_network(EQ11).unwrap();
        let (d, c) = extract(&n).unwrap();
        assert_eq!(d.shape(), vec!["C-flat", "C-com", "C-sel", "C-com", "C-init"]);
        let pil = expand_to_pil(&d).unwrap();
        check_derivation(&pil).unwrap();
        assert!(pil.stores_empty());
        let expected = parse_choreography(EQ_CHOREO).unwrap();
        assert!(network_equiv(&epp(&c).unwrap(), &epp(&expected).unwrap()));
        assert!(network_equiv(&epp(&c).unwrap(), &n));
    }

    #[test]
    fn trivial_init() {
        let d = chorl_prove(&parse_network("p[0] | q[0]").unwrap()).unwrap();
        assert_eq!(d.shape(), vec!["C-init"]);
        assert_eq!(extract_choreography(&d).unwrap(), Choreography::End);
        let pil = expand_to_pil(&d).unwrap();
        assert_eq!(pil.rule, Rule::Mix);
    }

    #[test]
    fn forwarding_round_trips() {
        let n = parse_network("p[x!a.0] | q[x?b.y!b.a!c.0] | r[y?d.0] | s[a?e.0]").unwrap();
        let (d, c) = extract(&n).unwrap();
        check_derivation(&expand_to_pil(&d).unwrap()).unwrap();
        assert!(network_equiv(&epp(&c).unwrap(), &n), "{}", c);
    }

    #[test]
    fn stuck_residual() {
        match chorl_prove(&parse_network("new x. p[x!a.0] | q[x?b.0] | r[y!c.0]").unwrap()) {
            Err(ChorlError::Stuck { residual, .. }) => {
                assert_eq!(residual.components.len(), 3);
                assert_eq!(residual.component("r").unwrap().to_string(), "y!c.0");
            }
            other => panic!("{:?}", other),
        }
    }
}
