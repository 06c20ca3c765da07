//! Reduction semantics with oriented structural pre-rewriting, core/entropy
//! bookkeeping, execution trees and exhaustive semantic oracles.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::process::{
    alpha_equiv, canonical_key, find_race_shape, is_unambiguous, make_unambiguous, precongruence_normalize, Flat,
    NameSupply, Process, RaceWitness,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoreRule {
    Com,
    Choice,
    Label,
}

impl fmt::Display for CoreRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoreRule::Com => "Com",
            CoreRule::Choice => "Choice",
            CoreRule::Label => "Label",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub source: Process,
    pub target: Process,
    pub core_rule: CoreRule,
    pub core_redex: Process,
    pub core_reductum: Process,
    pub entropy: u64,
}

impl ReductionStep {
    /// One trace line: `entropy=<n> rule=<rule> redex=<core>`.
    pub fn trace_line(&self) -> String {
        format!("entropy={} rule={} redex={}", self.entropy, self.core_rule, self.core_redex)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTree {
    pub root: Process,
    pub children: Vec<(ReductionStep, ExecutionTree)>,
}

impl ExecutionTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|(_, t)| t.size()).sum::<usize>()
    }

    pub fn leaves(&self) -> Vec<&Process> {
        if self.children.is_empty() {
            return vec![&self.root];
        }
        self.children.iter().flat_map(|(_, t)| t.leaves()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    DeadlockFree,
    Deadlocked { witness: Process, trace: Vec<ReductionStep> },
    RaceFound(RaceWitness),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub tree: Option<ExecutionTree>,
}

impl Verdict {
    pub fn is_deadlock_free(&self) -> bool {
        matches!(self.status, Status::DeadlockFree)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceReport {
    pub witness: RaceWitness,
    pub trace: Vec<ReductionStep>,
}

struct Core {
    rule: CoreRule,
    redex: Process,
    reductum: Process,
}

fn com(send: &Process, recv: &Process) -> Option<Core> {
    match (send, recv) {
        (
            Process::Send {
                subject: x,
                object: a,
                cont: p,
            },
            Process::Recv {
                subject: y,
                binder: b,
                cont: q,
            },
        ) if x == y => Some(Core {
            rule: CoreRule::Com,
            redex: Process::par(send.clone(), recv.clone()),
            reductum: Process::par((**p).clone(), q.subst_unchecked(a, b)),
        }),
        _ => None,
    }
}

fn label(sel: &Process, bra: &Process) -> Option<Core> {
    match (sel, bra) {
        (
            Process::LabelSend {
                subject: x,
                branches: sends,
            },
            Process::LabelRecv {
                subject: y,
                branches: recvs,
            },
        ) if x == y && sends.len() == 1 => {
            let (l, p) = &sends[0];
            let q = crate::process::branch(recvs, l)?;
            Some(Core {
                rule: CoreRule::Label,
                redex: Process::par(sel.clone(), bra.clone()),
                reductum: Process::par(p.clone(), q.clone()),
            })
        }
        _ => None,
    }
}

/// A selection among two or more labels commits to one of them.
fn choices(p: &Process) -> Vec<Core> {
    match p {
        Process::LabelSend { subject, branches } if branches.len() >= 2 => branches
            .iter()
            .map(|(l, q)| Core {
                rule: CoreRule::Choice,
                redex: p.clone(),
                reductum: Process::sel(subject.clone(), vec![(l.clone(), q.clone())]),
            })
            .collect(),
        _ => Vec::new(),
    }
}

fn cores_at(p: &Process) -> Vec<Core> {
    let mut out = choices(p);
    if let Process::Par(l, r) = p {
        out.extend(com(l, r));
        out.extend(label(l, r));
    }
    out
}

fn direct_steps(p: &Process, out: &mut Vec<ReductionStep>) {
    for c in cores_at(p) {
        out.push(ReductionStep {
            source: p.clone(),
            target: c.reductum.clone(),
            core_rule: c.rule,
            core_redex: c.redex,
            core_reductum: c.reductum,
            entropy: 1,
        });
    }
    match p {
        Process::Par(l, r) => {
            let mut inner = Vec::new();
            direct_steps(l, &mut inner);
            for s in inner {
                out.push(ReductionStep {
                    source: p.clone(),
                    target: Process::par(s.target, (**r).clone()),
                    entropy: s.entropy * 2,
                    ..s
                });
            }
        }
        Process::Res { binder, body } => {
            let mut inner = Vec::new();
            direct_steps(body, &mut inner);
            for s in inner {
                out.push(ReductionStep {
                    source: p.clone(),
                    target: Process::res(binder.clone(), s.target),
                    entropy: s.entropy * 2,
                    ..s
                });
            }
        }
        _ => {}
    }
}

/// All one-step reductions of `p`. Redexes reachable only after oriented
/// structural rewriting yield one canonical step each.
pub fn enumerate_steps(p: &Process) -> Vec<ReductionStep> {
    let mut out = Vec::new();
    direct_steps(p, &mut out);
    let direct_keys: Vec<(CoreRule, Process, String)> = out
        .iter()
        .map(|s| (s.core_rule, s.core_redex.clone(), canonical_key(&s.target)))
        .collect();
    let flat = Flat::of(p);
    let threads = &flat.threads;
    let mut emit = |core: Core, used: &[usize]| {
        let others: Vec<Process> = threads
            .iter()
            .enumerate()
            .filter(|(i, _)| !used.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        let has_rest = !others.is_empty();
        let body = if has_rest {
            Process::par(core.reductum.clone(), Process::par_all(others))
        } else {
            core.reductum.clone()
        };
        let target = Process::res_all(&flat.binders, body);
        let key = canonical_key(&target);
        if direct_keys
            .iter()
            .any(|(r, redex, k)| *r == core.rule && *k == key && alpha_equiv(redex, &core.redex))
        {
            return;
        }
        let entropy = 3 * (1u64 << flat.binders.len()) * if has_rest { 2 } else { 1 };
        out.push(ReductionStep {
            source: p.clone(),
            target,
            core_rule: core.rule,
            core_redex: core.redex,
            core_reductum: core.reductum,
            entropy,
        });
    };
    for i in 0..threads.len() {
        for c in choices(&threads[i]) {
            emit(c, &[i]);
        }
        for j in 0..threads.len() {
            if i == j {
                continue;
            }
            if let Some(c) = com(&threads[i], &threads[j]).or_else(|| label(&threads[i], &threads[j])) {
                emit(c, &[i, j]);
            }
        }
    }
    out
}

pub fn is_stuck(p: &Process) -> bool {
    !Flat::of(p).is_nil() && enumerate_steps(p).is_empty()
}

fn prepare(p: &Process) -> Process {
    if is_unambiguous(p) {
        p.clone()
    } else {
        make_unambiguous(p, &mut NameSupply::from_env())
    }
}

/// The reachable state space, de-duplicated modulo structural equivalence.
pub struct StateSpace {
    pub states: Vec<Process>,
    pub edges: Vec<Vec<(ReductionStep, usize)>>,
    pub parent: Vec<Option<(usize, usize)>>,
}

impl StateSpace {
    pub fn explore(p: &Process) -> StateSpace {
        let mut space = StateSpace {
            states: vec![p.clone()],
            edges: Vec::new(),
            parent: vec![None],
        };
        let mut index: HashMap<String, usize> = HashMap::new();
        index.insert(canonical_key(p), 0);
        let mut next = 0;
        while next < space.states.len() {
            let steps = enumerate_steps(&space.states[next]);
            let mut out = Vec::new();
            for (k, s) in steps.into_iter().enumerate() {
                let key = canonical_key(&s.target);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = space.states.len();
                        index.insert(key, id);
                        space.states.push(s.target.clone());
                        space.parent.push(Some((next, k)));
                        id
                    }
                };
                out.push((s, id));
            }
            space.edges.push(out);
            next += 1;
        }
        space
    }

    /// The steps leading from the root to state `id`.
    pub fn trace_to(&self, id: usize) -> Vec<ReductionStep> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some((from, k)) = self.parent[cur] {
            out.push(self.edges[from][k].0.clone());
            cur = from;
        }
        out.reverse();
        out
    }

    pub fn stuck_states(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| self.edges[i].is_empty() && !Flat::of(&self.states[i]).is_nil())
            .collect()
    }
}

const TREE_NODE_CAP: usize = 20_000;

/// A maximal execution tree: one step per node, except that a Choice node
/// carries every alternative of the same selection.
pub fn execution_tree(p: &Process) -> Option<ExecutionTree> {
    let mut budget = TREE_NODE_CAP;
    build_tree(p, &mut budget)
}

fn build_tree(p: &Process, budget: &mut usize) -> Option<ExecutionTree> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let steps = enumerate_steps(p);
    let Some(first) = steps.first() else {
        return Some(ExecutionTree {
            root: p.clone(),
            children: Vec::new(),
        });
    };
    let chosen: Vec<&ReductionStep> = if first.core_rule == CoreRule::Choice {
        steps
            .iter()
            .filter(|s| s.core_rule == CoreRule::Choice && s.core_redex == first.core_redex)
            .collect()
    } else {
        vec![first]
    };
    let mut children = Vec::new();
    for s in chosen {
        children.push((s.clone(), build_tree(&s.target, budget)?));
    }
    Some(ExecutionTree {
        root: p.clone(),
        children,
    })
}

/// Exhaustive deadlock check over the reachable states.
pub fn oracle_deadlock_free(p: &Process) -> Verdict {
    let p = prepare(p);
    let space = StateSpace::explore(&p);
    if let Some(&id) = space.stuck_states().first() {
        return Verdict {
            status: Status::Deadlocked {
                witness: precongruence_normalize(&space.states[id]),
                trace: space.trace_to(id),
            },
            tree: None,
        };
    }
    Verdict {
        status: Status::DeadlockFree,
        tree: execution_tree(&p),
    }
}

/// Full verdict including the race precondition of the logical checks.
pub fn oracle_verdict(p: &Process) -> Verdict {
    if let Some(r) = oracle_race_free(p) {
        return Verdict {
            status: Status::RaceFound(r.witness),
            tree: None,
        };
    }
    oracle_deadlock_free(p)
}

/// The first reachable race, if any.
pub fn oracle_race_free(p: &Process) -> Option<RaceReport> {
    let p = prepare(p);
    let space = StateSpace::explore(&p);
    space.states.iter().enumerate().find_map(|(i, s)| {
        find_race_shape(s).map(|witness| RaceReport {
            witness,
            trace: space.trace_to(i),
        })
    })
}

fn dual_prefix(t: &Process, supply: &mut NameSupply) -> Option<Process> {
    match t {
        Process::Send { subject, .. } => Some(Process::recv(subject.clone(), supply.fresh("d"), Process::Nil)),
        Process::Recv { subject, .. } => Some(Process::send(subject.clone(), supply.fresh("d"), Process::Nil)),
        Process::LabelSend { subject, branches } => Some(Process::bra(
            subject.clone(),
            branches.iter().map(|(l, _)| (l.clone(), Process::Nil)).collect(),
        )),
        Process::LabelRecv { subject, branches } => {
            let l = branches.first()?.0.clone();
            Some(Process::sel(subject.clone(), vec![(l, Process::Nil)]))
        }
        _ => None,
    }
}

const PROGRESS_ROUNDS: usize = 8;

/// Progress as an open-system property: every way of getting stuck is due
/// to a missing action on a free channel that the environment can provide.
///
/// Explores states in which prefixes on free subjects fire on their own
/// (the environment answers them) while restricted channels interact as
/// usual. Selections, internal or from the process to the environment, must
/// succeed on every branch; the environment picks the branch it offers and
/// sends fresh names. Restricted names sent to the environment become free.
pub fn oracle_progress(p: &Process) -> bool {
    let p = prepare(p);
    let mut supply = NameSupply::new(1);
    supply.reserve(p.names());
    let mut memo = HashMap::new();
    open_good(&Flat::of(&p), &mut supply, &mut memo)
}

/// Progress read literally: deadlock-free, or deadlock-free in parallel with
/// some stuck partner, searched among partners of dual prefixes.
pub fn oracle_progress_partner(p: &Process) -> bool {
    progress_partner(p).is_some()
}

fn with_thread(state: &Flat, i: usize, t: Process) -> Flat {
    let mut threads = state.threads.clone();
    threads[i] = t;
    Flat::of(&Flat { binders: state.binders.clone(), threads }.to_process())
}

fn with_threads(state: &Flat, i: usize, ti: Process, j: usize, tj: Process) -> Flat {
    let mut threads = state.threads.clone();
    threads[i] = ti;
    threads[j] = tj;
    Flat::of(&Flat { binders: state.binders.clone(), threads }.to_process())
}

/// Each move is a list of outcomes that must all be good.
fn open_moves(state: &Flat, supply: &mut NameSupply) -> Vec<Vec<Flat>> {
    let mut moves = Vec::new();
    for (i, t) in state.threads.iter().enumerate() {
        let Some(x) = t.subject() else { continue };
        let restricted = state.binders.contains(x);
        match t {
            Process::Send { object, cont, .. } if !restricted => {
                // the environment learns a restricted object, so its scope extrudes
                let binders = state.binders.iter().filter(|b| *b != object).cloned().collect();
                let threads = state.threads.clone();
                let opened = Flat { binders, threads };
                moves.push(vec![with_thread(&opened, i, (**cont).clone())]);
            }
            Process::Recv { binder, cont, .. } if !restricted => {
                let fresh = supply.fresh("e");
                moves.push(vec![with_thread(state, i, cont.subst_unchecked(&fresh, binder))]);
            }
            Process::LabelRecv { branches, .. } if !restricted => {
                for (_, q) in branches {
                    moves.push(vec![with_thread(state, i, q.clone())]);
                }
            }
            Process::LabelSend { branches, .. } if !restricted || branches.len() >= 2 => {
                if restricted {
                    let commits = branches
                        .iter()
                        .map(|(l, q)| with_thread(state, i, Process::sel(x.clone(), vec![(l.clone(), q.clone())])))
                        .collect();
                    moves.push(commits);
                } else {
                    moves.push(branches.iter().map(|(_, q)| with_thread(state, i, q.clone())).collect());
                }
            }
            _ => {}
        }
        if !restricted {
            continue;
        }
        for (j, u) in state.threads.iter().enumerate() {
            if i == j || u.subject() != Some(x) {
                continue;
            }
            match (t, u) {
                (
                    Process::Send { object, cont, .. },
                    Process::Recv {
                        binder, cont: rest, ..
                    },
                ) => moves.push(vec![with_threads(
                    state,
                    i,
                    (**cont).clone(),
                    j,
                    rest.subst_unchecked(object, binder),
                )]),
                (Process::LabelSend { branches, .. }, Process::LabelRecv { branches: offers, .. })
                    if branches.len() == 1 =>
                {
                    let (l, q) = &branches[0];
                    if let Some(r) = crate::process::branch(offers, l) {
                        moves.push(vec![with_threads(state, i, q.clone(), j, r.clone())]);
                    }
                }
                _ => {}
            }
        }
    }
    moves
}

fn open_good(state: &Flat, supply: &mut NameSupply, memo: &mut HashMap<String, bool>) -> bool {
    if state.threads.iter().all(Process::is_nil) {
        return true;
    }
    let key = canonical_key(&state.to_process());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let moves = open_moves(state, supply);
    let good = moves
        .iter()
        .any(|outcomes| outcomes.iter().all(|s| open_good(s, supply, memo)));
    memo.insert(key, good);
    good
}

/// Replaces every nil leaf of a partner chain with `tail`.
fn append(chain: &Process, tail: &Process) -> Process {
    match chain {
        Process::Nil => tail.clone(),
        Process::Send { subject, object, cont } => Process::send(subject.clone(), object.clone(), append(cont, tail)),
        Process::Recv { subject, binder, cont } => Process::recv(subject.clone(), binder.clone(), append(cont, tail)),
        Process::LabelSend { subject, branches } => Process::sel(
            subject.clone(),
            branches.iter().map(|(l, q)| (l.clone(), append(q, tail))).collect(),
        ),
        Process::LabelRecv { subject, branches } => Process::bra(
            subject.clone(),
            branches.iter().map(|(l, q)| (l.clone(), append(q, tail))).collect(),
        ),
        other => other.clone(),
    }
}

fn with_subject(t: &Process, x: &str) -> Process {
    match t {
        Process::Send { object, cont, .. } => Process::send(x, object.clone(), (**cont).clone()),
        Process::Recv { binder, cont, .. } => Process::recv(x, binder.clone(), (**cont).clone()),
        Process::LabelSend { branches, .. } => Process::sel(x, branches.clone()),
        Process::LabelRecv { branches, .. } => Process::bra(x, branches.clone()),
        other => other.clone(),
    }
}

/// The partner witnessing progress; `Some(Nil)` when `p` is deadlock-free.
///
/// Free-subject prefixes left in stuck states get a fresh dual partner. A
/// prefix on a restricted name that a partner received is answered by
/// extending that partner after its receive.
pub fn progress_partner(p: &Process) -> Option<Process> {
    let p = prepare(p);
    if oracle_deadlock_free(&p).is_deadlock_free() {
        return Some(Process::Nil);
    }
    let mut supply = NameSupply::new(1);
    supply.reserve(p.names());
    let mut partners: Vec<Process> = Vec::new();
    let mut owner: HashMap<String, usize> = HashMap::new();
    for _ in 0..PROGRESS_ROUNDS {
        let whole = Process::par(p.clone(), Process::par_all(partners.clone()));
        let space = StateSpace::explore(&whole);
        let stuck = space.stuck_states();
        if stuck.is_empty() {
            let q = Process::par_all(partners.clone());
            return is_stuck(&q).then_some(q);
        }
        let mut changed = false;
        'states: for id in stuck {
            let flat = Flat::of(&space.states[id]);
            let trace = space.trace_to(id);
            for t in &flat.threads {
                let Some(x) = t.subject().cloned() else { continue };
                if flat.binders.contains(&x) {
                    // the partner that received `x` continues with the dual
                    let receiver = trace.iter().find_map(|s| match &s.core_redex {
                        Process::Par(l, r) => match (&**l, &**r) {
                            (Process::Send { object, .. }, Process::Recv { binder, .. }) if *object == x => {
                                owner.get(binder).map(|&i| (i, binder.clone()))
                            }
                            _ => None,
                        },
                        _ => None,
                    });
                    let Some((i, binder)) = receiver else { continue };
                    let Some(d) = dual_prefix(t, &mut supply) else { continue };
                    if let Process::Recv { binder: b, .. } = &d {
                        owner.insert(b.clone(), i);
                    }
                    partners[i] = append(&partners[i], &with_subject(&d, &binder));
                    changed = true;
                    break 'states;
                }
                let clash = partners.iter().any(|q| {
                    q.subject() == Some(&x) && std::mem::discriminant(q) != std::mem::discriminant(t)
                });
                let present = partners.iter().any(|q| alpha_equiv(q, t));
                if clash || present {
                    continue;
                }
                let Some(d) = dual_prefix(t, &mut supply) else { continue };
                if partners
                    .iter()
                    .any(|q| q.subject() == d.subject() && std::mem::discriminant(q) == std::mem::discriminant(&d))
                {
                    continue;
                }
                if let Process::Recv { binder, .. } = &d {
                    owner.insert(binder.clone(), partners.len());
                }
                partners.push(d);
                changed = true;
            }
        }
        if !changed {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::struct_equiv;
    use crate::syntax::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    const EQ1: &str = "new x. new y. ( x!a. y sel{l: y!b.0} | x?a. y bra{l: y?b.0, m: z!c.0} )";

    #[test]
    fn entropy_examples() {
        let s = enumerate_steps(&p("(x!a.0 | x?y.0) | r!s.0"));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].core_rule, CoreRule::Com);
        assert_eq!(s[0].entropy, 2);

        let s = enumerate_steps(&p("(new a. b!a.0) | b?c.c!e.0"));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].entropy, 6);
        assert!(struct_equiv(&s[0].target, &p("new a. a!e.0")));

        assert!(enumerate_steps(&p("0")).is_empty());
    }

    #[test]
    fn stuckness() {
        assert!(is_stuck(&p("y!c.0")));
        assert!(!is_stuck(&p("0 | 0")));
        assert!(!is_stuck(&p("x!a.0 | x?b.0")));
    }

    #[test]
    fn choice_branches_and_label() {
        let s = enumerate_steps(&p("x sel{l: 0, m: 0} | x bra{l: 0, m: 0}"));
        assert_eq!(s.iter().filter(|s| s.core_rule == CoreRule::Choice).count(), 2);
        let s = enumerate_steps(&p("x sel{l: 0} | x bra{l: 0, m: 0}"));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].core_rule, CoreRule::Label);
    }

    #[test]
    fn deadlock_oracle() {
        assert!(oracle_deadlock_free(&p(EQ1)).is_deadlock_free());
        let v = oracle_deadlock_free(&p("new x.(x!a.0 | x?b.0 | y!c.0)"));
        match v.status {
            Status::Deadlocked { witness, trace } => {
                assert!(struct_equiv(&witness, &p("y!c.0")));
                assert_eq!(trace.len(), 1);
            }
            other => panic!("{:?}", other),
        }
        let v = oracle_deadlock_free(&p("new x. new y.(x!a.y?b.0 | x?a.y!b.0)"));
        assert!(v.is_deadlock_free());
        let tree = v.tree.unwrap();
        assert!(tree.leaves().iter().all(|l| Flat::of(l).is_nil()));
    }

    #[test]
    fn race_oracle() {
        let r = oracle_race_free(&p("x!a.0 | x?b.0 | x?c.0")).unwrap();
        assert!(r.trace.is_empty());
        assert!(oracle_race_free(&p(EQ1)).is_none());
        assert!(oracle_race_free(&p("0")).is_none());
    }

    #[test]
    fn progress_oracle() {
        assert!(oracle_progress(&p("y!c.0")));
        assert!(oracle_progress(&p("new a.(b!a.a!c.0)")));
        assert!(oracle_progress(&p("0")));
        assert!(!oracle_progress(&p("new x. x!a.0")));
    }
}
