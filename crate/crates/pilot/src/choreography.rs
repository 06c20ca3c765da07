//! Choreographies, endpoint networks, their labelled semantics, merge and
//! endpoint projection.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::{alpha_equiv, branch, Flat, Name, Process};

/// Component name used for the projection of the terminated choreography.
pub const RESERVED_PROCESS: &str = "p0";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choreography {
    End,
    /// `p.x -> q.y : k ; cont`
    Com {
        sender: Name,
        object: Name,
        receiver: Name,
        binder: Name,
        channel: Name,
        cont: Box<Choreography>,
    },
    /// `p -> q : k { selectable | garbage }`
    Choice {
        sender: Name,
        receiver: Name,
        channel: Name,
        selectable: Vec<(Name, Choreography)>,
        garbage: Vec<(Name, Process)>,
    },
    Res {
        binder: Name,
        body: Box<Choreography>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Network {
    pub restricted: Vec<Name>,
    pub components: Vec<(Name, Process)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReductionLabel {
    Com { from: Name, to: Name, channel: Name },
    Bra { from: Name, channel: Name },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EppError {
    #[error("choreography is not flat: restriction of {0} occurs under a communication or choice")]
    NotFlat(Name),
    #[error("merge undefined for process {process} between branches {left} and {right}")]
    MergeUndefined {
        process: Name,
        left: Name,
        right: Name,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("component {0} is not sequential")]
    NotSequential(String),
    #[error("duplicate process name {0}")]
    DuplicateName(Name),
}

impl ReductionLabel {
    pub fn names(&self) -> Vec<&Name> {
        match self {
            ReductionLabel::Com { from, to, channel } => vec![from, to, channel],
            ReductionLabel::Bra { from, channel } => vec![from, channel],
        }
    }

    fn disjoint_from(&self, names: &[&Name]) -> bool {
        self.names().iter().all(|n| !names.contains(n))
    }
}

impl fmt::Display for ReductionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionLabel::Com { from, to, channel } => write!(f, "Com({},{},{})", from, to, channel),
            ReductionLabel::Bra { from, channel } => write!(f, "Bra({},{})", from, channel),
        }
    }
}

impl fmt::Display for Choreography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_choreography(self))
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_network(self))
    }
}

fn com_label(from: &Name, to: &Name, channel: &Name) -> ReductionLabel {
    ReductionLabel::Com {
        from: from.clone(),
        to: to.clone(),
        channel: channel.clone(),
    }
}

impl Choreography {
    pub fn com(
        sender: impl Into<Name>,
        object: impl Into<Name>,
        receiver: impl Into<Name>,
        binder: impl Into<Name>,
        channel: impl Into<Name>,
        cont: Choreography,
    ) -> Self {
        Choreography::Com {
            sender: sender.into(),
            object: object.into(),
            receiver: receiver.into(),
            binder: binder.into(),
            channel: channel.into(),
            cont: Box::new(cont),
        }
    }

    pub fn res(binder: impl Into<Name>, body: Choreography) -> Self {
        Choreography::Res {
            binder: binder.into(),
            body: Box::new(body),
        }
    }

    pub fn res_all(binders: &[Name], body: Choreography) -> Self {
        binders
            .iter()
            .rev()
            .fold(body, |acc, x| Choreography::res(x.clone(), acc))
    }

    /// Splits the top-level restriction prefix.
    pub fn split_restrictions(&self) -> (Vec<Name>, &Choreography) {
        let mut binders = Vec::new();
        let mut c = self;
        while let Choreography::Res { binder, body } = c {
            binders.push(binder.clone());
            c = body;
        }
        (binders, c)
    }

    pub fn is_restriction_free(&self) -> bool {
        match self {
            Choreography::End => true,
            Choreography::Res { .. } => false,
            Choreography::Com { cont, .. } => cont.is_restriction_free(),
            Choreography::Choice { selectable, .. } => {
                selectable.iter().all(|(_, c)| c.is_restriction_free())
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        self.split_restrictions().1.is_restriction_free()
    }

    /// Process names in order of first appearance.
    pub fn process_names(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        fn push(out: &mut Vec<Name>, n: &Name) {
            if !out.contains(n) {
                out.push(n.clone());
            }
        }
        fn go(c: &Choreography, out: &mut Vec<Name>) {
            match c {
                Choreography::End => {}
                Choreography::Res { body, .. } => go(body, out),
                Choreography::Com {
                    sender,
                    receiver,
                    cont,
                    ..
                } => {
                    push(out, sender);
                    push(out, receiver);
                    go(cont, out);
                }
                Choreography::Choice {
                    sender,
                    receiver,
                    selectable,
                    ..
                } => {
                    push(out, sender);
                    push(out, receiver);
                    for (_, c) in selectable {
                        go(c, out);
                    }
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// `self{replacement/target}` on channel and value positions.
    pub fn subst(&self, replacement: &str, target: &str) -> Choreography {
        let rn = |n: &Name| {
            if n == target {
                replacement.to_string()
            } else {
                n.clone()
            }
        };
        match self {
            Choreography::End => Choreography::End,
            Choreography::Res { binder, body } => {
                if binder == target {
                    self.clone()
                } else {
                    Choreography::res(binder.clone(), body.subst(replacement, target))
                }
            }
            Choreography::Com {
                sender,
                object,
                receiver,
                binder,
                channel,
                cont,
            } => Choreography::Com {
                sender: sender.clone(),
                object: rn(object),
                receiver: receiver.clone(),
                binder: binder.clone(),
                channel: rn(channel),
                cont: Box::new(if binder == target {
                    (**cont).clone()
                } else {
                    cont.subst(replacement, target)
                }),
            },
            Choreography::Choice {
                sender,
                receiver,
                channel,
                selectable,
                garbage,
            } => Choreography::Choice {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: rn(channel),
                selectable: selectable
                    .iter()
                    .map(|(l, c)| (l.clone(), c.subst(replacement, target)))
                    .collect(),
                garbage: garbage
                    .iter()
                    .map(|(l, s)| (l.clone(), s.subst_unchecked(replacement, target)))
                    .collect(),
            },
        }
    }

    /// Number of communications and choices, counting every branch.
    pub fn size(&self) -> usize {
        match self {
            Choreography::End => 0,
            Choreography::Res { body, .. } => body.size(),
            Choreography::Com { cont, .. } => 1 + cont.size(),
            Choreography::Choice { selectable, .. } => {
                1 + selectable.iter().map(|(_, c)| c.size()).sum::<usize>()
            }
        }
    }
}

/// All labelled one-step reductions.
pub fn chor_steps(c: &Choreography) -> Vec<(ReductionLabel, Choreography)> {
    let mut out: Vec<(ReductionLabel, Choreography)> = Vec::new();
    let push = |step: (ReductionLabel, Choreography), out: &mut Vec<_>| {
        if !out.contains(&step) {
            out.push(step);
        }
    };
    match c {
        Choreography::End => {}
        Choreography::Res { binder, body } => {
            for (mu, next) in chor_steps(body) {
                push((mu, Choreography::res(binder.clone(), next)), &mut out);
            }
        }
        Choreography::Com {
            sender,
            object,
            receiver,
            binder,
            channel,
            cont,
        } => {
            push((com_label(sender, receiver, channel), cont.subst(object, binder)), &mut out);
            let blocked = [sender, receiver, channel];
            for (mu, next) in chor_steps(cont) {
                if mu.disjoint_from(&blocked) {
                    let delayed = Choreography::Com {
                        sender: sender.clone(),
                        object: object.clone(),
                        receiver: receiver.clone(),
                        binder: binder.clone(),
                        channel: channel.clone(),
                        cont: Box::new(next),
                    };
                    push((mu, delayed), &mut out);
                }
            }
        }
        Choreography::Choice {
            sender,
            receiver,
            channel,
            selectable,
            garbage,
        } => {
            let rebuild = |sel: Vec<(Name, Choreography)>| Choreography::Choice {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                selectable: sel,
                garbage: garbage.clone(),
            };
            if selectable.len() >= 2 {
                for (l, cl) in selectable {
                    let label = ReductionLabel::Bra {
                        from: sender.clone(),
                        channel: channel.clone(),
                    };
                    push((label, rebuild(vec![(l.clone(), cl.clone())])), &mut out);
                }
            } else if let Some((_, cl)) = selectable.first() {
                push((com_label(sender, receiver, channel), cl.clone()), &mut out);
            }
            let blocked = [sender, receiver, channel];
            let per_branch: Vec<Vec<(ReductionLabel, Choreography)>> =
                selectable.iter().map(|(_, cl)| chor_steps(cl)).collect();
            let Some(first) = per_branch.first() else {
                return out;
            };
            let mut labels: Vec<ReductionLabel> = Vec::new();
            for (mu, _) in first {
                if mu.disjoint_from(&blocked)
                    && !labels.contains(mu)
                    && per_branch.iter().all(|steps| steps.iter().any(|(m, _)| m == mu))
                {
                    labels.push(mu.clone());
                }
            }
            for mu in labels {
                let options: Vec<Vec<&Choreography>> = per_branch
                    .iter()
                    .map(|steps| steps.iter().filter(|(m, _)| *m == mu).map(|(_, c)| c).collect())
                    .collect();
                for combo in cartesian(&options) {
                    let sel = selectable
                        .iter()
                        .zip(combo)
                        .map(|((l, _), c)| (l.clone(), c.clone()))
                        .collect();
                    push((mu.clone(), rebuild(sel)), &mut out);
                }
            }
        }
    }
    out
}

fn cartesian<'a, T>(options: &[Vec<&'a T>]) -> Vec<Vec<&'a T>> {
    let mut acc: Vec<Vec<&'a T>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::new();
        for prefix in &acc {
            for o in opts {
                let mut v = prefix.clone();
                v.push(*o);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// `a ⊔ b` on sequential processes.
pub fn merge(a: &Process, b: &Process) -> Option<Process> {
    match (a, b) {
        (Process::Nil, Process::Nil) => Some(Process::Nil),
        (
            Process::Send {
                subject: x1,
                object: y1,
                cont: c1,
            },
            Process::Send {
                subject: x2,
                object: y2,
                cont: c2,
            },
        ) if x1 == x2 && y1 == y2 => Some(Process::send(x1.clone(), y1.clone(), merge(c1, c2)?)),
        (
            Process::Recv {
                subject: x1,
                binder: y1,
                cont: c1,
            },
            Process::Recv {
                subject: x2,
                binder: y2,
                cont: c2,
            },
        ) if x1 == x2 && y1 == y2 => Some(Process::recv(x1.clone(), y1.clone(), merge(c1, c2)?)),
        (
            Process::LabelRecv {
                subject: x1,
                branches: b1,
            },
            Process::LabelRecv {
                subject: x2,
                branches: b2,
            },
        ) if x1 == x2 => {
            let mut out = Vec::new();
            for (l, p) in b1 {
                match branch(b2, l) {
                    Some(q) => out.push((l.clone(), merge(p, q)?)),
                    None => out.push((l.clone(), p.clone())),
                }
            }
            for (l, q) in b2 {
                if branch(b1, l).is_none() {
                    out.push((l.clone(), q.clone()));
                }
            }
            Some(Process::bra(x1.clone(), out))
        }
        (
            Process::LabelSend {
                subject: x1,
                branches: b1,
            },
            Process::LabelSend {
                subject: x2,
                branches: b2,
            },
        ) if x1 == x2 && b1.len() == b2.len() => {
            let mut out = Vec::new();
            for (l, p) in b1 {
                out.push((l.clone(), merge(p, branch(b2, l)?)?));
            }
            Some(Process::sel(x1.clone(), out))
        }
        _ => None,
    }
}

/// `a ⊒ b`: merging `b` into `a` changes nothing.
pub fn merge_order(a: &Process, b: &Process) -> bool {
    merge(a, b).is_some_and(|m| alpha_equiv(&m, a))
}

impl Network {
    pub fn new(restricted: Vec<Name>, components: Vec<(Name, Process)>) -> Result<Self, NetworkError> {
        let mut seen = HashSet::new();
        for (name, body) in &components {
            if !seen.insert(name.clone()) {
                return Err(NetworkError::DuplicateName(name.clone()));
            }
            if !body.is_sequential() {
                return Err(NetworkError::NotSequential(name.clone()));
            }
        }
        Ok(Network {
            restricted,
            components,
        })
    }

    /// Names the sequential components of a flat process `p1…pn` left to right.
    pub fn from_flat(p: &Process) -> Result<Self, NetworkError> {
        let flat = Flat::of(p);
        for t in &flat.threads {
            if !t.is_sequential() {
                return Err(NetworkError::NotSequential(t.to_string()));
            }
        }
        let mut components: Vec<(Name, Process)> = flat
            .threads
            .into_iter()
            .enumerate()
            .map(|(i, t)| (format!("p{}", i + 1), t))
            .collect();
        if components.is_empty() {
            components.push(("p1".to_string(), Process::Nil));
        }
        Ok(Network {
            restricted: flat.binders,
            components,
        })
    }

    pub fn to_process(&self) -> Process {
        Process::res_all(
            &self.restricted,
            Process::par_all(self.components.iter().map(|(_, s)| s.clone()).collect()),
        )
    }

    pub fn component(&self, name: &str) -> Option<&Process> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    fn body_or_nil(&self, name: &str) -> Process {
        self.component(name).cloned().unwrap_or(Process::Nil)
    }

    /// Component names that carry a non-Nil body.
    fn live_names(&self) -> Vec<&Name> {
        self.components
            .iter()
            .filter(|(_, s)| !s.is_nil())
            .map(|(n, _)| n)
            .collect()
    }

    fn all_names<'a>(&'a self, other: &'a Network) -> Vec<&'a Name> {
        let mut names: Vec<&Name> = self.components.iter().map(|(n, _)| n).collect();
        for (n, _) in &other.components {
            if !names.contains(&n) {
                names.push(n);
            }
        }
        names
    }
}

fn same_restrictions(a: &Network, b: &Network) -> bool {
    let sa: HashSet<&Name> = a.restricted.iter().collect();
    let sb: HashSet<&Name> = b.restricted.iter().collect();
    sa == sb
}

/// Network equality up to component order, Nil components and α on bodies.
pub fn network_equiv(a: &Network, b: &Network) -> bool {
    same_restrictions(a, b)
        && a
            .all_names(b)
            .into_iter()
            .all(|n| alpha_equiv(&a.body_or_nil(n), &b.body_or_nil(n)))
}

/// Choreography equality up to renaming of received names; restricted
/// names are compared as a set.
pub fn chor_alpha_equiv(a: &Choreography, b: &Choreography) -> bool {
    let (ra, ba) = a.split_restrictions();
    let (rb, bb) = b.split_restrictions();
    let sa: HashSet<&Name> = ra.iter().collect();
    let sb: HashSet<&Name> = rb.iter().collect();
    sa == sb && chor_alpha_body(ba, bb, 0)
}

fn chor_alpha_body(a: &Choreography, b: &Choreography, depth: usize) -> bool {
    match (a, b) {
        (Choreography::End, Choreography::End) => true,
        (
            Choreography::Com {
                sender: s1,
                object: o1,
                receiver: r1,
                binder: y1,
                channel: k1,
                cont: c1,
            },
            Choreography::Com {
                sender: s2,
                object: o2,
                receiver: r2,
                binder: y2,
                channel: k2,
                cont: c2,
            },
        ) => {
            let fresh = format!("\u{1}{depth}");
            s1 == s2
                && o1 == o2
                && r1 == r2
                && k1 == k2
                && chor_alpha_body(&c1.subst(&fresh, y1), &c2.subst(&fresh, y2), depth + 1)
        }
        (
            Choreography::Choice {
                sender: s1,
                receiver: r1,
                channel: k1,
                selectable: l1,
                garbage: g1,
            },
            Choreography::Choice {
                sender: s2,
                receiver: r2,
                channel: k2,
                selectable: l2,
                garbage: g2,
            },
        ) => {
            s1 == s2
                && r1 == r2
                && k1 == k2
                && l1.len() == l2.len()
                && g1.len() == g2.len()
                && l1.iter().all(|(l, c)| {
                    l2.iter()
                        .find(|(m, _)| m == l)
                        .is_some_and(|(_, d)| chor_alpha_body(c, d, depth))
                })
                && g1.iter().all(|(l, p)| branch(g2, l).is_some_and(|q| alpha_equiv(p, q)))
        }
        (Choreography::Res { binder: x1, body: c1 }, Choreography::Res { binder: x2, body: c2 }) => {
            let fresh = format!("\u{1}{depth}");
            chor_alpha_body(&c1.subst(&fresh, x1), &c2.subst(&fresh, x2), depth + 1)
        }
        _ => false,
    }
}

/// Componentwise merge; absent components count as Nil.
pub fn merge_network(a: &Network, b: &Network) -> Option<Network> {
    if !same_restrictions(a, b) {
        return None;
    }
    let mut components = Vec::new();
    for n in a.all_names(b) {
        components.push((n.clone(), merge(&a.body_or_nil(n), &b.body_or_nil(n))?));
    }
    Some(Network {
        restricted: a.restricted.clone(),
        components,
    })
}

pub fn merge_order_network(a: &Network, b: &Network) -> bool {
    merge_network(a, b).is_some_and(|m| network_equiv(&m, a))
}

/// Endpoint projection of a flat choreography.
pub fn epp(c: &Choreography) -> Result<Network, EppError> {
    let (binders, body) = c.split_restrictions();
    if let Some(x) = first_restriction(body) {
        return Err(EppError::NotFlat(x));
    }
    if *body == Choreography::End {
        return Ok(Network {
            restricted: binders,
            components: vec![(RESERVED_PROCESS.to_string(), Process::Nil)],
        });
    }
    let mut components = Vec::new();
    for name in body.process_names() {
        let proj = project(&name, body)?;
        components.push((name, proj));
    }
    Ok(Network {
        restricted: binders,
        components,
    })
}

fn first_restriction(c: &Choreography) -> Option<Name> {
    match c {
        Choreography::End => None,
        Choreography::Res { binder, .. } => Some(binder.clone()),
        Choreography::Com { cont, .. } => first_restriction(cont),
        Choreography::Choice { selectable, .. } => selectable.iter().find_map(|(_, c)| first_restriction(c)),
    }
}

/// The behaviour of process `r` in a restriction-free choreography.
pub fn project(r: &Name, c: &Choreography) -> Result<Process, EppError> {
    match c {
        Choreography::End => Ok(Process::Nil),
        Choreography::Res { binder, .. } => Err(EppError::NotFlat(binder.clone())),
        Choreography::Com {
            sender,
            object,
            receiver,
            binder,
            channel,
            cont,
        } => {
            let rest = project(r, cont)?;
            Ok(if r == sender {
                Process::send(channel.clone(), object.clone(), rest)
            } else if r == receiver {
                Process::recv(channel.clone(), binder.clone(), rest)
            } else {
                rest
            })
        }
        Choreography::Choice {
            sender,
            receiver,
            channel,
            selectable,
            garbage,
        } => {
            if r == sender {
                let branches = selectable
                    .iter()
                    .map(|(l, cl)| Ok((l.clone(), project(r, cl)?)))
                    .collect::<Result<_, EppError>>()?;
                Ok(Process::sel(channel.clone(), branches))
            } else if r == receiver {
                let mut branches: Vec<(Name, Process)> = selectable
                    .iter()
                    .map(|(l, cl)| Ok((l.clone(), project(r, cl)?)))
                    .collect::<Result<_, EppError>>()?;
                branches.extend(garbage.iter().cloned());
                Ok(Process::bra(channel.clone(), branches))
            } else {
                let mut acc: Option<(Name, Process)> = None;
                for (l, cl) in selectable {
                    let proj = project(r, cl)?;
                    acc = Some(match acc {
                        None => (l.clone(), proj),
                        Some((first, so_far)) => {
                            let merged = merge(&so_far, &proj).ok_or_else(|| EppError::MergeUndefined {
                                process: r.clone(),
                                left: first.clone(),
                                right: l.clone(),
                            })?;
                            (first, merged)
                        }
                    });
                }
                Ok(acc.map(|(_, p)| p).unwrap_or(Process::Nil))
            }
        }
    }
}

/// All labelled steps of an endpoint network.
pub fn network_steps(n: &Network) -> Vec<(ReductionLabel, Network)> {
    let mut out: Vec<(ReductionLabel, Network)> = Vec::new();
    let with = |updates: &[(usize, Process)]| {
        let mut m = n.clone();
        for (i, body) in updates {
            m.components[*i].1 = body.clone();
        }
        m
    };
    let comps = &n.components;
    for (i, (p, si)) in comps.iter().enumerate() {
        if let Process::LabelSend { subject, branches } = si {
            if branches.len() >= 2 {
                for (l, s) in branches {
                    let label = ReductionLabel::Bra {
                        from: p.clone(),
                        channel: subject.clone(),
                    };
                    let next = with(&[(i, Process::sel(subject.clone(), vec![(l.clone(), s.clone())]))]);
                    out.push((label, next));
                }
            }
        }
        for (j, (q, sj)) in comps.iter().enumerate() {
            if i == j {
                continue;
            }
            match (si, sj) {
                (
                    Process::Send {
                        subject: k1,
                        object,
                        cont: s,
                    },
                    Process::Recv {
                        subject: k2,
                        binder,
                        cont: t,
                    },
                ) if k1 == k2 => {
                    let next = with(&[(i, (**s).clone()), (j, t.subst_unchecked(object, binder))]);
                    out.push((com_label(p, q, k1), next));
                }
                (
                    Process::LabelSend {
                        subject: k1,
                        branches: b1,
                    },
                    Process::LabelRecv {
                        subject: k2,
                        branches: b2,
                    },
                ) if k1 == k2 && b1.len() == 1 => {
                    let (l, s) = &b1[0];
                    if let Some(t) = branch(b2, l) {
                        let next = with(&[(i, s.clone()), (j, t.clone())]);
                        out.push((com_label(p, q, k1), next));
                    }
                }
                _ => {}
            }
        }
    }
    let mut dedup: Vec<(ReductionLabel, Network)> = Vec::new();
    for step in out {
        if !dedup.iter().any(|(m, t)| *m == step.0 && network_equiv(t, &step.1)) {
            dedup.push(step);
        }
    }
    dedup
}

/// A network is finished when every component is Nil.
pub fn network_is_done(n: &Network) -> bool {
    n.live_names().is_empty()
}

/// States reachable from `c` under the choreography semantics, in BFS order.
pub fn reachable_choreographies(c: &Choreography, limit: usize) -> Vec<Choreography> {
    let mut seen: HashSet<Choreography> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([c.clone()]);
    while let Some(cur) = queue.pop_front() {
        if order.len() >= limit {
            break;
        }
        if !seen.insert(cur.clone()) {
            continue;
        }
        for (_, next) in chor_steps(&cur) {
            if !seen.contains(&next) {
                queue.push_back(next);
            }
        }
        order.push(cur);
    }
    order
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrespondenceError {
    #[error("projection failed: {0}")]
    Projection(#[from] EppError),
    #[error("completeness fails at {choreography} --{label}--> {target}")]
    Completeness {
        choreography: String,
        label: String,
        target: String,
    },
    #[error("soundness fails: network step {label} from {network} has no matching choreography step from {choreography}")]
    Soundness {
        network: String,
        label: String,
        choreography: String,
    },
    #[error("state space exceeds {0} states")]
    TooLarge(usize),
}

/// Every choreography step is matched by a projection step into a ⊒-larger
/// network. Returns the number of choreography states visited.
pub fn check_completeness(c: &Choreography, limit: usize) -> Result<usize, CorrespondenceError> {
    let states = reachable_choreographies(c, limit + 1);
    if states.len() > limit {
        return Err(CorrespondenceError::TooLarge(limit));
    }
    for cur in &states {
        let projected = epp(cur)?;
        let net_steps = network_steps(&projected);
        for (mu, next) in chor_steps(cur) {
            let target = epp(&next)?;
            let matched = net_steps
                .iter()
                .any(|(m, n)| *m == mu && merge_order_network(n, &target));
            if !matched {
                return Err(CorrespondenceError::Completeness {
                    choreography: cur.to_string(),
                    label: mu.to_string(),
                    target: next.to_string(),
                });
            }
        }
    }
    Ok(states.len())
}

/// Every network step from a state ⊒ the projection is matched by a
/// choreography step. Explores the joint transition system from
/// `(epp(c), c)` and returns the number of joint states.
pub fn check_soundness(c: &Choreography, limit: usize) -> Result<usize, CorrespondenceError> {
    let start = epp(c)?;
    let mut seen: Vec<(Network, Choreography)> = Vec::new();
    let mut queue = VecDeque::from([(start, c.clone())]);
    while let Some((n, cur)) = queue.pop_front() {
        if seen.iter().any(|(m, d)| *d == cur && network_equiv(m, &n)) {
            continue;
        }
        if seen.len() >= limit {
            return Err(CorrespondenceError::TooLarge(limit));
        }
        let csteps = chor_steps(&cur);
        for (mu, next_n) in network_steps(&n) {
            let mut matched = false;
            for (m, next_c) in &csteps {
                if *m != mu {
                    continue;
                }
                if let Ok(proj) = epp(next_c) {
                    if merge_order_network(&next_n, &proj) {
                        matched = true;
                        queue.push_back((next_n.clone(), next_c.clone()));
                    }
                }
            }
            if !matched {
                return Err(CorrespondenceError::Soundness {
                    network: n.to_string(),
                    label: mu.to_string(),
                    choreography: cur.to_string(),
                });
            }
        }
        seen.push((n, cur));
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_choreography, parse_network, parse_process};

    fn c(s: &str) -> Choreography {
        parse_choreography(s).unwrap()
    }
    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    const CHOREO: &str = "p.a -> q.a : x ; p -> q : y { l: p.b -> q.b : y ; 0 | m: z!c.0 }";

    #[test]
    fn choreo_steps_follow_com_then_label() {
        let steps = chor_steps(&c(CHOREO));
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0.to_string(), "Com(p,q,x)");
        let steps = chor_steps(&steps[0].1);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0.to_string(), "Com(p,q,y)");
        assert!(chor_steps(&Choreography::End).is_empty());
    }

    #[test]
    fn delayed_communication() {
        let steps = chor_steps(&c("p.a -> q.b : x ; r.c -> s.d : y ; 0"));
        let labels: Vec<String> = steps.iter().map(|(m, _)| m.to_string()).collect();
        assert_eq!(labels, vec!["Com(p,q,x)", "Com(r,s,y)"]);
    }

    #[test]
    fn merge_table() {
        assert_eq!(merge(&Process::Nil, &Process::Nil), Some(Process::Nil));
        assert_eq!(
            merge(&p("x bra{l: 0}"), &p("x bra{m: y!a.0}")),
            Some(p("x bra{l: 0, m: y!a.0}"))
        );
        assert_eq!(merge(&p("x sel{l: 0}"), &p("x sel{m: 0}")), None);
        assert!(merge_order(&p("x bra{l: 0, m: 0}"), &p("x bra{l: 0}")));
        assert!(!merge_order(&p("x sel{l: 0}"), &p("x sel{m: 0}")));
    }

    #[test]
    fn epp_of_example() {
        let n = epp(&c(&format!("new x. new y. {}", CHOREO))).unwrap();
        let expected = parse_network(
            "new x, y. p[x!a. y sel{l: y!b.0}] | q[x?a. y bra{l: y?b.0, m: z!c.0}]",
        )
        .unwrap();
        assert!(network_equiv(&n, &expected));
        assert_eq!(epp(&Choreography::End).unwrap().components[0].0, "p0");
    }

    #[test]
    fn network_choice_steps() {
        let n = parse_network("p[x sel{l: 0, m: 0}]").unwrap();
        let steps = network_steps(&n);
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|(m, _)| m.to_string() == "Bra(p,x)"));
        assert!(network_steps(&parse_network("p[0]").unwrap()).is_empty());
    }

    #[test]
    fn correspondence_on_example() {
        let chor = c(&format!("new x. new y. {}", CHOREO));
        assert!(check_completeness(&chor, 1000).is_ok());
        assert!(check_soundness(&chor, 1000).is_ok());
    }
}
