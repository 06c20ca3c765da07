//! Process terms of the π-calculus: names, substitution, α-equivalence,
//! the precongruence normal form, structural equivalence and race shapes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Name = String;

/// Label-indexed continuations, kept in source order.
pub type Branches = Vec<(Name, Process)>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Process {
    Nil,
    Send {
        subject: Name,
        object: Name,
        cont: Box<Process>,
    },
    Recv {
        subject: Name,
        binder: Name,
        cont: Box<Process>,
    },
    Par(Box<Process>, Box<Process>),
    Res {
        binder: Name,
        body: Box<Process>,
    },
    LabelSend {
        subject: Name,
        branches: Branches,
    },
    LabelRecv {
        subject: Name,
        branches: Branches,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("substituting {replacement} for {target} would capture {replacement}; alpha-rename the term first")]
    Capture { replacement: Name, target: Name },
}

impl Process {
    pub fn send(subject: impl Into<Name>, object: impl Into<Name>, cont: Process) -> Self {
        Process::Send {
            subject: subject.into(),
            object: object.into(),
            cont: Box::new(cont),
        }
    }

    pub fn recv(subject: impl Into<Name>, binder: impl Into<Name>, cont: Process) -> Self {
        Process::Recv {
            subject: subject.into(),
            binder: binder.into(),
            cont: Box::new(cont),
        }
    }

    pub fn par(left: Process, right: Process) -> Self {
        Process::Par(Box::new(left), Box::new(right))
    }

    pub fn res(binder: impl Into<Name>, body: Process) -> Self {
        Process::Res {
            binder: binder.into(),
            body: Box::new(body),
        }
    }

    pub fn sel(subject: impl Into<Name>, branches: Branches) -> Self {
        Process::LabelSend {
            subject: subject.into(),
            branches,
        }
    }

    pub fn bra(subject: impl Into<Name>, branches: Branches) -> Self {
        Process::LabelRecv {
            subject: subject.into(),
            branches,
        }
    }

    /// Right-nested parallel composition; the empty list is `Nil`.
    pub fn par_all(items: Vec<Process>) -> Self {
        let mut iter = items.into_iter().rev();
        match iter.next() {
            None => Process::Nil,
            Some(last) => iter.fold(last, |acc, p| Process::par(p, acc)),
        }
    }

    /// Restrictions in list order around `body`.
    pub fn res_all(binders: &[Name], body: Process) -> Self {
        binders
            .iter()
            .rev()
            .fold(body, |acc, x| Process::res(x.clone(), acc))
    }

    /// The operands of a maximal parallel spine.
    pub fn par_components(&self) -> Vec<&Process> {
        let mut out = Vec::new();
        fn walk<'a>(p: &'a Process, out: &mut Vec<&'a Process>) {
            match p {
                Process::Par(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Nil)
    }

    /// No parallel composition and no restriction anywhere.
    pub fn is_sequential(&self) -> bool {
        match self {
            Process::Nil => true,
            Process::Send { cont, .. } | Process::Recv { cont, .. } => cont.is_sequential(),
            Process::Par(..) | Process::Res { .. } => false,
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                branches.iter().all(|(_, p)| p.is_sequential())
            }
        }
    }

    /// Prefix-guarded: the head is an action.
    pub fn is_prefixed(&self) -> bool {
        matches!(
            self,
            Process::Send { .. }
                | Process::Recv { .. }
                | Process::LabelSend { .. }
                | Process::LabelRecv { .. }
        )
    }

    pub fn subject(&self) -> Option<&Name> {
        match self {
            Process::Send { subject, .. }
            | Process::Recv { subject, .. }
            | Process::LabelSend { subject, .. }
            | Process::LabelRecv { subject, .. } => Some(subject),
            _ => None,
        }
    }

    /// Number of action prefixes, counting every branch.
    pub fn prefix_count(&self) -> usize {
        match self {
            Process::Nil => 0,
            Process::Send { cont, .. } | Process::Recv { cont, .. } => 1 + cont.prefix_count(),
            Process::Par(l, r) => l.prefix_count() + r.prefix_count(),
            Process::Res { body, .. } => body.prefix_count(),
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                1 + branches.iter().map(|(_, p)| p.prefix_count()).sum::<usize>()
            }
        }
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let mut add = |n: &Name, bound: &Vec<Name>| {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            Process::Nil => {}
            Process::Send {
                subject,
                object,
                cont,
            } => {
                add(subject, bound);
                add(object, bound);
                cont.collect_free(bound, out);
            }
            Process::Recv {
                subject,
                binder,
                cont,
            } => {
                add(subject, bound);
                bound.push(binder.clone());
                cont.collect_free(bound, out);
                bound.pop();
            }
            Process::Par(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Process::Res { binder, body } => {
                bound.push(binder.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Process::LabelSend { subject, branches } | Process::LabelRecv { subject, branches } => {
                add(subject, bound);
                for (_, p) in branches {
                    p.collect_free(bound, out);
                }
            }
        }
    }

    pub fn bound_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit_binders(&mut |b, _| {
            out.insert(b.clone());
        });
        out
    }

    /// Calls `f(binder, is_restriction)` for every binding occurrence.
    pub fn visit_binders(&self, f: &mut impl FnMut(&Name, bool)) {
        match self {
            Process::Nil => {}
            Process::Send { cont, .. } => cont.visit_binders(f),
            Process::Recv { binder, cont, .. } => {
                f(binder, false);
                cont.visit_binders(f);
            }
            Process::Par(l, r) => {
                l.visit_binders(f);
                r.visit_binders(f);
            }
            Process::Res { binder, body } => {
                f(binder, true);
                body.visit_binders(f);
            }
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                for (_, p) in branches {
                    p.visit_binders(f);
                }
            }
        }
    }

    /// Every name occurring in the term, free or bound.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = self.free_names();
        out.extend(self.bound_names());
        out
    }

    /// Labels used by selections and branchings.
    pub fn labels(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut BTreeSet<Name>) {
        match self {
            Process::Nil => {}
            Process::Send { cont, .. } | Process::Recv { cont, .. } => cont.collect_labels(out),
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                for (l, q) in branches {
                    out.insert(l.clone());
                    q.collect_labels(out);
                }
            }
            Process::Par(a, b) => {
                a.collect_labels(out);
                b.collect_labels(out);
            }
            Process::Res { body, .. } => body.collect_labels(out),
        }
    }

    /// `self{replacement/target}`.
    pub fn substitute(&self, replacement: &str, target: &str) -> Result<Process, SubstError> {
        if replacement == target || !self.free_names().contains(target) {
            return Ok(self.clone());
        }
        if self.bound_names().contains(replacement) {
            return Err(SubstError::Capture {
                replacement: replacement.to_string(),
                target: target.to_string(),
            });
        }
        Ok(self.subst_unchecked(replacement, target))
    }

    pub(crate) fn subst_unchecked(&self, replacement: &str, target: &str) -> Process {
        let rn = |n: &Name| {
            if n == target {
                replacement.to_string()
            } else {
                n.clone()
            }
        };
        match self {
            Process::Nil => Process::Nil,
            Process::Send {
                subject,
                object,
                cont,
            } => Process::send(rn(subject), rn(object), cont.subst_unchecked(replacement, target)),
            Process::Recv {
                subject,
                binder,
                cont,
            } => {
                if binder == target {
                    Process::recv(rn(subject), binder.clone(), (**cont).clone())
                } else {
                    Process::recv(
                        rn(subject),
                        binder.clone(),
                        cont.subst_unchecked(replacement, target),
                    )
                }
            }
            Process::Par(l, r) => Process::par(
                l.subst_unchecked(replacement, target),
                r.subst_unchecked(replacement, target),
            ),
            Process::Res { binder, body } => {
                if binder == target {
                    self.clone()
                } else {
                    Process::res(binder.clone(), body.subst_unchecked(replacement, target))
                }
            }
            Process::LabelSend { subject, branches } => Process::sel(
                rn(subject),
                branches
                    .iter()
                    .map(|(l, p)| (l.clone(), p.subst_unchecked(replacement, target)))
                    .collect(),
            ),
            Process::LabelRecv { subject, branches } => Process::bra(
                rn(subject),
                branches
                    .iter()
                    .map(|(l, p)| (l.clone(), p.subst_unchecked(replacement, target)))
                    .collect(),
            ),
        }
    }

    /// Renames free occurrences of names through `map`, leaving binders alone.
    pub fn rename_free(&self, map: &HashMap<Name, Name>) -> Process {
        let mut out = self.clone();
        let staged: Vec<(String, &Name)> = map.iter().enumerate().map(|(i, (_, to))| (format!("\u{0}{i}"), to)).collect();
        for ((from, _), (tmp, _)) in map.iter().zip(&staged) {
            out = out.subst_unchecked(tmp, from);
        }
        for (tmp, to) in &staged {
            out = out.subst_unchecked(to, tmp);
        }
        out
    }

    pub fn label_set(&self) -> Vec<&Name> {
        match self {
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                branches.iter().map(|(l, _)| l).collect()
            }
            _ => Vec::new(),
        }
    }
}

pub fn branch<'a>(branches: &'a Branches, label: &str) -> Option<&'a Process> {
    branches.iter().find(|(l, _)| l == label).map(|(_, p)| p)
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_process(self))
    }
}

/// α-equivalence: equality up to consistent renaming of bound names.
pub fn alpha_equiv(p: &Process, q: &Process) -> bool {
    fn eq_name(a: &Name, b: &Name, env: &[(Name, Name)]) -> bool {
        for (x, y) in env.iter().rev() {
            if x == a || y == b {
                return x == a && y == b;
            }
        }
        a == b
    }
    fn go(p: &Process, q: &Process, env: &mut Vec<(Name, Name)>) -> bool {
        match (p, q) {
            (Process::Nil, Process::Nil) => true,
            (
                Process::Send {
                    subject: s1,
                    object: o1,
                    cont: c1,
                },
                Process::Send {
                    subject: s2,
                    object: o2,
                    cont: c2,
                },
            ) => eq_name(s1, s2, env) && eq_name(o1, o2, env) && go(c1, c2, env),
            (
                Process::Recv {
                    subject: s1,
                    binder: b1,
                    cont: c1,
                },
                Process::Recv {
                    subject: s2,
                    binder: b2,
                    cont: c2,
                },
            ) => {
                if !eq_name(s1, s2, env) {
                    return false;
                }
                env.push((b1.clone(), b2.clone()));
                let ok = go(c1, c2, env);
                env.pop();
                ok
            }
            (Process::Par(l1, r1), Process::Par(l2, r2)) => go(l1, l2, env) && go(r1, r2, env),
            (Process::Res { binder: b1, body: p1 }, Process::Res { binder: b2, body: p2 }) => {
                env.push((b1.clone(), b2.clone()));
                let ok = go(p1, p2, env);
                env.pop();
                ok
            }
            (
                Process::LabelSend {
                    subject: s1,
                    branches: b1,
                },
                Process::LabelSend {
                    subject: s2,
                    branches: b2,
                },
            )
            | (
                Process::LabelRecv {
                    subject: s1,
                    branches: b1,
                },
                Process::LabelRecv {
                    subject: s2,
                    branches: b2,
                },
            ) => {
                eq_name(s1, s2, env)
                    && b1.len() == b2.len()
                    && b1.iter().all(|(l, p1)| match branch(b2, l) {
                        Some(p2) => go(p1, p2, env),
                        None => false,
                    })
            }
            _ => false,
        }
    }
    go(p, q, &mut Vec::new())
}

/// Every binder is bound exactly once and no bound name occurs free.
pub fn binders_unique(p: &Process) -> bool {
    let free = p.free_names();
    let mut seen = HashSet::new();
    let mut ok = true;
    p.visit_binders(&mut |b, _| {
        if free.contains(b) || !seen.insert(b.clone()) {
            ok = false;
        }
    });
    ok
}

/// The working notion of unambiguity: restriction binders are unique and
/// distinct from receive binders, no bound name occurs free, and no binder
/// is shadowed. Receive binders may repeat across alternative branches or
/// independent components.
pub fn is_unambiguous(p: &Process) -> bool {
    let free = p.free_names();
    let mut res_binders = HashSet::new();
    let mut recv_binders = HashSet::new();
    let mut ok = true;
    p.visit_binders(&mut |b, is_res| {
        if free.contains(b) {
            ok = false;
        }
        if is_res {
            if !res_binders.insert(b.clone()) {
                ok = false;
            }
        } else {
            recv_binders.insert(b.clone());
        }
    });
    if !ok || !res_binders.is_disjoint(&recv_binders) {
        return false;
    }
    fn no_shadow(p: &Process, scope: &mut Vec<Name>) -> bool {
        match p {
            Process::Nil => true,
            Process::Send { cont, .. } => no_shadow(cont, scope),
            Process::Recv { binder, cont, .. } | Process::Res { binder, body: cont } => {
                if scope.contains(binder) {
                    return false;
                }
                scope.push(binder.clone());
                let ok = no_shadow(cont, scope);
                scope.pop();
                ok
            }
            Process::Par(l, r) => no_shadow(l, scope) && no_shadow(r, scope),
            Process::LabelSend { branches, .. } | Process::LabelRecv { branches, .. } => {
                branches.iter().all(|(_, q)| no_shadow(q, scope))
            }
        }
    }
    no_shadow(p, &mut Vec::new())
}

/// Deterministic source of fresh names of the form `base_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameSupply {
    pub counter: u64,
    pub reserved: BTreeSet<Name>,
}

impl Default for NameSupply {
    fn default() -> Self {
        Self::new(1)
    }
}

impl NameSupply {
    pub fn new(start: u64) -> Self {
        NameSupply {
            counter: start,
            reserved: BTreeSet::new(),
        }
    }

    /// Starts from `PILOT_SEED` when set, so fresh-name numbering can be pinned.
    pub fn from_env() -> Self {
        let start = std::env::var("PILOT_SEED")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(1);
        Self::new(start)
    }

    pub fn reserve<I: IntoIterator<Item = Name>>(&mut self, names: I) {
        self.reserved.extend(names);
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        loop {
            let candidate = format!("{}_{}", base, self.counter);
            self.counter += 1;
            if !self.reserved.contains(&candidate) {
                self.reserved.insert(candidate.clone());
                return candidate;
            }
        }
    }
}

/// α-renames `p` so that every binder is unique and no bound name occurs free.
pub fn make_unambiguous(p: &Process, supply: &mut NameSupply) -> Process {
    supply.reserve(p.names());
    let free = p.free_names();
    let mut seen: HashSet<Name> = HashSet::new();
    fn go(
        p: &Process,
        free: &BTreeSet<Name>,
        seen: &mut HashSet<Name>,
        supply: &mut NameSupply,
    ) -> Process {
        let rebind = |b: &Name, cont: &Process, seen: &mut HashSet<Name>, supply: &mut NameSupply| {
            let (name, body) = if free.contains(b) || seen.contains(b) {
                let fresh = supply.fresh(b);
                (fresh.clone(), cont.subst_unchecked(&fresh, b))
            } else {
                (b.clone(), cont.clone())
            };
            seen.insert(name.clone());
            (name, body)
        };
        match p {
            Process::Nil => Process::Nil,
            Process::Send {
                subject,
                object,
                cont,
            } => Process::send(subject.clone(), object.clone(), go(cont, free, seen, supply)),
            Process::Recv {
                subject,
                binder,
                cont,
            } => {
                let (b, body) = rebind(binder, cont, seen, supply);
                Process::recv(subject.clone(), b, go(&body, free, seen, supply))
            }
            Process::Res { binder, body } => {
                let (b, body) = rebind(binder, body, seen, supply);
                Process::res(b, go(&body, free, seen, supply))
            }
            Process::Par(l, r) => {
                let l = go(l, free, seen, supply);
                let r = go(r, free, seen, supply);
                Process::par(l, r)
            }
            Process::LabelSend { subject, branches } => Process::sel(
                subject.clone(),
                branches
                    .iter()
                    .map(|(l, q)| (l.clone(), go(q, free, seen, supply)))
                    .collect(),
            ),
            Process::LabelRecv { subject, branches } => Process::bra(
                subject.clone(),
                branches
                    .iter()
                    .map(|(l, q)| (l.clone(), go(q, free, seen, supply)))
                    .collect(),
            ),
        }
    }
    go(p, &free, &mut seen, supply)
}

/// A top-level decomposition `ν binders (threads)` where every thread is
/// prefix-guarded and continuations are themselves normalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flat {
    pub binders: Vec<Name>,
    pub threads: Vec<Process>,
}

impl Flat {
    /// Flattens the outer parallel/restriction structure. Vacuous restrictions
    /// are dropped; continuations are left untouched.
    pub fn of(p: &Process) -> Flat {
        let mut binders = Vec::new();
        let mut threads = Vec::new();
        fn walk(p: &Process, binders: &mut Vec<Name>, threads: &mut Vec<Process>) {
            match p {
                Process::Nil => {}
                Process::Par(l, r) => {
                    walk(l, binders, threads);
                    walk(r, binders, threads);
                }
                Process::Res { binder, body } => {
                    binders.push(binder.clone());
                    walk(body, binders, threads);
                }
                other => threads.push(other.clone()),
            }
        }
        walk(p, &mut binders, &mut threads);
        let mut flat = Flat { binders, threads };
        flat.drop_vacuous();
        flat
    }

    pub fn drop_vacuous(&mut self) {
        let used: BTreeSet<Name> = self
            .threads
            .iter()
            .flat_map(|t| t.free_names().into_iter())
            .collect();
        self.binders.retain(|b| used.contains(b));
    }

    /// Adds a process to the thread pool, flattening its outer structure.
    pub fn absorb(&mut self, p: &Process) {
        let inner = Flat::of(p);
        self.binders.extend(inner.binders);
        self.threads.extend(inner.threads);
    }

    pub fn is_nil(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn to_process(&self) -> Process {
        Process::res_all(&self.binders, Process::par_all(self.threads.clone()))
    }
}

/// A ⇛-maximal form: nil components collapsed, vacuous restrictions dropped
/// and every restriction extruded to the top, recursively under prefixes.
pub fn precongruence_normalize(p: &Process) -> Process {
    let flat = Flat::of(p);
    let threads = flat.threads.iter().map(normalize_thread).collect();
    Process::res_all(&flat.binders, Process::par_all(threads))
}

fn normalize_thread(t: &Process) -> Process {
    match t {
        Process::Send {
            subject,
            object,
            cont,
        } => Process::send(subject.clone(), object.clone(), precongruence_normalize(cont)),
        Process::Recv {
            subject,
            binder,
            cont,
        } => Process::recv(subject.clone(), binder.clone(), precongruence_normalize(cont)),
        Process::LabelSend { subject, branches } => Process::sel(
            subject.clone(),
            branches
                .iter()
                .map(|(l, p)| (l.clone(), precongruence_normalize(p)))
                .collect(),
        ),
        Process::LabelRecv { subject, branches } => Process::bra(
            subject.clone(),
            branches
                .iter()
                .map(|(l, p)| (l.clone(), precongruence_normalize(p)))
                .collect(),
        ),
        other => precongruence_normalize(other),
    }
}

#[derive(Clone, Default)]
struct Bijection {
    fwd: HashMap<Name, Name>,
    bwd: HashMap<Name, Name>,
    pending_left: HashSet<Name>,
    pending_right: HashSet<Name>,
}

impl Bijection {
    fn eq(&mut self, a: &Name, b: &Name) -> bool {
        if let Some(t) = self.fwd.get(a) {
            return t == b;
        }
        if self.bwd.contains_key(b) {
            return false;
        }
        let pa = self.pending_left.contains(a);
        let pb = self.pending_right.contains(b);
        if pa && pb {
            self.pending_left.remove(a);
            self.pending_right.remove(b);
            self.fwd.insert(a.clone(), b.clone());
            self.bwd.insert(b.clone(), a.clone());
            true
        } else {
            !pa && !pb && a == b
        }
    }

    fn bind(&mut self, a: &Name, b: &Name) -> (Option<Name>, Option<Name>) {
        let old_f = self.fwd.insert(a.clone(), b.clone());
        let old_b = self.bwd.insert(b.clone(), a.clone());
        (old_f, old_b)
    }

    fn unbind(&mut self, a: &Name, b: &Name, old: (Option<Name>, Option<Name>)) {
        match old.0 {
            Some(v) => self.fwd.insert(a.clone(), v),
            None => self.fwd.remove(a),
        };
        match old.1 {
            Some(v) => self.bwd.insert(b.clone(), v),
            None => self.bwd.remove(b),
        };
    }
}

fn match_flat(a: &Process, b: &Process, st: &Bijection) -> Option<Bijection> {
    let fa = Flat::of(a);
    let fb = Flat::of(b);
    if fa.binders.len() != fb.binders.len() || fa.threads.len() != fb.threads.len() {
        return None;
    }
    let mut st = st.clone();
    st.pending_left.extend(fa.binders.iter().cloned());
    st.pending_right.extend(fb.binders.iter().cloned());
    let mut used = vec![false; fb.threads.len()];
    let result = match_threads(&fa.threads, &fb.threads, 0, &mut used, st)?;
    let mut result = result;
    for x in &fa.binders {
        result.pending_left.remove(x);
        if let Some(y) = result.fwd.remove(x) {
            result.bwd.remove(&y);
        }
    }
    for y in &fb.binders {
        result.pending_right.remove(y);
    }
    Some(result)
}

fn match_threads(
    ta: &[Process],
    tb: &[Process],
    i: usize,
    used: &mut Vec<bool>,
    st: Bijection,
) -> Option<Bijection> {
    if i == ta.len() {
        return Some(st);
    }
    for j in 0..tb.len() {
        if used[j] {
            continue;
        }
        if let Some(st2) = match_thread(&ta[i], &tb[j], &st) {
            used[j] = true;
            if let Some(done) = match_threads(ta, tb, i + 1, used, st2) {
                used[j] = false;
                return Some(done);
            }
            used[j] = false;
        }
    }
    None
}

fn match_thread(a: &Process, b: &Process, st: &Bijection) -> Option<Bijection> {
    let mut st = st.clone();
    match (a, b) {
        (
            Process::Send {
                subject: s1,
                object: o1,
                cont: c1,
            },
            Process::Send {
                subject: s2,
                object: o2,
                cont: c2,
            },
        ) => {
            if st.eq(s1, s2) && st.eq(o1, o2) {
                match_flat(c1, c2, &st)
            } else {
                None
            }
        }
        (
            Process::Recv {
                subject: s1,
                binder: b1,
                cont: c1,
            },
            Process::Recv {
                subject: s2,
                binder: b2,
                cont: c2,
            },
        ) => {
            if !st.eq(s1, s2) {
                return None;
            }
            let old = st.bind(b1, b2);
            let mut out = match_flat(c1, c2, &st)?;
            out.unbind(b1, b2, old);
            Some(out)
        }
        (
            Process::LabelSend {
                subject: s1,
                branches: b1,
            },
            Process::LabelSend {
                subject: s2,
                branches: b2,
            },
        )
        | (
            Process::LabelRecv {
                subject: s1,
                branches: b1,
            },
            Process::LabelRecv {
                subject: s2,
                branches: b2,
            },
        ) => {
            if !st.eq(s1, s2) || b1.len() != b2.len() {
                return None;
            }
            for (l, p1) in b1 {
                let p2 = branch(b2, l)?;
                st = match_flat(p1, p2, &st)?;
            }
            Some(st)
        }
        _ => None,
    }
}

/// Structural equivalence on the recursion-free fragment.
pub fn struct_equiv(p: &Process, q: &Process) -> bool {
    match_flat(p, q, &Bijection::default()).is_some()
}

/// A canonical string for `p` modulo ≡ used to de-duplicate states. Equal
/// keys imply structural equivalence; the converse holds up to symmetric
/// ties between components.
pub fn canonical_key(p: &Process) -> String {
    let mut out = String::new();
    key_flat(&Flat::of(p), &mut HashMap::new(), 0, &mut out);
    out
}

fn key_flat(flat: &Flat, env: &mut HashMap<Name, String>, depth: usize, out: &mut String) {
    let placeholder: HashMap<Name, String> = flat
        .binders
        .iter()
        .map(|b| (b.clone(), "#".to_string()))
        .collect();
    let mut order: Vec<(String, usize)> = flat
        .threads
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut e = env.clone();
            e.extend(placeholder.clone());
            let mut s = String::new();
            key_thread(t, &mut e, depth, &mut s);
            (s, i)
        })
        .collect();
    order.sort();
    let mut naming: HashMap<Name, String> = HashMap::new();
    for (_, i) in &order {
        for n in occurrence_order(&flat.threads[*i]) {
            if flat.binders.contains(&n) && !naming.contains_key(&n) {
                let k = naming.len();
                naming.insert(n, format!("v{}_{}", depth, k));
            }
        }
    }
    let mut rendered: Vec<String> = flat
        .threads
        .iter()
        .map(|t| {
            let mut e = env.clone();
            e.extend(naming.clone());
            let mut s = String::new();
            key_thread(t, &mut e, depth, &mut s);
            s
        })
        .collect();
    rendered.sort();
    out.push_str(&format!("new{}[", naming.len()));
    out.push_str(&rendered.join("|"));
    out.push(']');
}

fn occurrence_order(p: &Process) -> Vec<Name> {
    let mut out = Vec::new();
    fn go(p: &Process, out: &mut Vec<Name>) {
        match p {
            Process::Nil => {}
            Process::Send {
                subject,
                object,
                cont,
            } => {
                out.push(subject.clone());
                out.push(object.clone());
                go(cont, out);
            }
            Process::Recv { subject, cont, .. } => {
                out.push(subject.clone());
                go(cont, out);
            }
            Process::Par(l, r) => {
                go(l, out);
                go(r, out);
            }
            Process::Res { body, .. } => go(body, out),
            Process::LabelSend { subject, branches } | Process::LabelRecv { subject, branches } => {
                out.push(subject.clone());
                let mut sorted: Vec<&(Name, Process)> = branches.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                for (_, q) in sorted {
                    go(q, out);
                }
            }
        }
    }
    go(p, &mut out);
    out
}

fn key_name(n: &Name, env: &HashMap<Name, String>) -> String {
    env.get(n).cloned().unwrap_or_else(|| n.clone())
}

fn key_thread(t: &Process, env: &mut HashMap<Name, String>, depth: usize, out: &mut String) {
    match t {
        Process::Send {
            subject,
            object,
            cont,
        } => {
            out.push_str(&format!("{}!{}.", key_name(subject, env), key_name(object, env)));
            key_flat(&Flat::of(cont), env, depth + 1, out);
        }
        Process::Recv {
            subject,
            binder,
            cont,
        } => {
            out.push_str(&format!("{}?.", key_name(subject, env)));
            let old = env.insert(binder.clone(), format!("r{}", depth));
            key_flat(&Flat::of(cont), env, depth + 1, out);
            match old {
                Some(v) => env.insert(binder.clone(), v),
                None => env.remove(binder),
            };
        }
        Process::LabelSend { subject, branches } | Process::LabelRecv { subject, branches } => {
            let tag = if matches!(t, Process::LabelSend { .. }) {
                "sel"
            } else {
                "bra"
            };
            out.push_str(&format!("{}{}{{", key_name(subject, env), tag));
            let mut sorted: Vec<&(Name, Process)> = branches.iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            for (l, q) in sorted {
                out.push_str(l);
                out.push(':');
                key_flat(&Flat::of(q), env, depth + 1, out);
                out.push(',');
            }
            out.push('}');
        }
        other => key_flat(&Flat::of(other), env, depth, out),
    }
}

/// Which of the four race shapes a pair of threads exhibits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RaceKind {
    Sends,
    Receives,
    Selections,
    Branchings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceWitness {
    pub kind: RaceKind,
    pub subject: Name,
    pub first: Process,
    pub second: Process,
}

fn thread_kind(t: &Process) -> Option<RaceKind> {
    match t {
        Process::Send { .. } => Some(RaceKind::Sends),
        Process::Recv { .. } => Some(RaceKind::Receives),
        Process::LabelSend { .. } => Some(RaceKind::Selections),
        Process::LabelRecv { .. } => Some(RaceKind::Branchings),
        _ => None,
    }
}

/// Finds two competing actions on one subject inside a network context.
pub fn find_race_shape(p: &Process) -> Option<RaceWitness> {
    race_in_threads(&Flat::of(p).threads)
}

pub(crate) fn race_in_threads(threads: &[Process]) -> Option<RaceWitness> {
    for i in 0..threads.len() {
        for j in (i + 1)..threads.len() {
            let (a, b) = (&threads[i], &threads[j]);
            if let (Some(ka), Some(kb)) = (thread_kind(a), thread_kind(b)) {
                if ka == kb && a.subject() == b.subject() {
                    return Some(RaceWitness {
                        kind: ka,
                        subject: a.subject().cloned().unwrap_or_default(),
                        first: a.clone(),
                        second: b.clone(),
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<Name> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn free_and_bound_names() {
        assert_eq!(p("x!y.0").free_names(), set(&["x", "y"]));
        assert_eq!(p("new x. x!y.0").free_names(), set(&["y"]));
        assert_eq!(p("x?y.0 | new z.0").bound_names(), set(&["y", "z"]));
    }

    #[test]
    fn substitution_rows() {
        assert_eq!(p("z?b.0").substitute("a", "b").unwrap(), p("z?b.0"));
        assert_eq!(p("y!c.0").substitute("x", "y").unwrap(), p("x!c.0"));
        assert_eq!(p("0").substitute("a", "b").unwrap(), p("0"));
        assert_eq!(p("x!b.b?c.c!b.0").substitute("a", "b").unwrap(), p("x!a.a?c.c!a.0"));
        assert!(matches!(
            p("x!b.a?c.0 | new a.a!b.0").substitute("a", "b"),
            Err(SubstError::Capture { .. })
        ));
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_equiv(&p("x?y.0"), &p("x?z.0")));
        assert!(alpha_equiv(&p("x?y.y!a.0"), &p("x?z.z!a.0")));
        assert!(!alpha_equiv(&p("x!y.0"), &p("x!z.0")));
        assert!(!alpha_equiv(&p("x?y.y!z.0"), &p("x?z.z!z.0")));
    }

    #[test]
    fn unambiguous_renaming() {
        let mut s = NameSupply::default();
        let out = make_unambiguous(&p("new x.0 | new x.0"), &mut s);
        assert_eq!(out, p("new x.0 | new x_1.0"));
        let mut s = NameSupply::default();
        let out = make_unambiguous(&p("x?y.0 | y!a.0"), &mut s);
        assert_eq!(out, p("x?y_1.0 | y!a.0"));
        assert!(binders_unique(&out));
        assert_eq!(make_unambiguous(&p("0"), &mut NameSupply::default()), p("0"));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            precongruence_normalize(&p("new a.(b!a.0) | b?c.0")),
            p("new a.(b!a.0 | b?c.0)")
        );
        assert_eq!(precongruence_normalize(&p("x!y.0 | 0")), p("x!y.0"));
        assert_eq!(precongruence_normalize(&p("new x. 0")), p("0"));
    }

    #[test]
    fn struct_equiv_examples() {
        assert!(struct_equiv(&p("x!a.0 | y?b.0"), &p("y?b.0 | x!a.0")));
        assert!(struct_equiv(
            &p("new x.new y.(x!y.0 | y?z.0)"),
            &p("new y.new x.(x!y.0 | y?z.0)")
        ));
        assert!(!struct_equiv(&p("x!y.0"), &p("x?y.0")));
        assert!(struct_equiv(&p("new a.(x!a.0) | new b.(x!b.0)"), &p("new c.new d.(x!d.0 | x!c.0)")));
        assert!(!struct_equiv(&p("new a.(x!a.a!a.0)"), &p("new a.(x!a.0) | a!a.0")));
        assert!(struct_equiv(&p("x?y.(y!a.0 | 0)"), &p("x?w.w!a.0")));
        assert!(struct_equiv(&p("0 | 0"), &p("0")));
    }

    #[test]
    fn race_examples() {
        let w = find_race_shape(&p("x!a.0 | x?b.0 | x?c.0")).unwrap();
        assert_eq!(w.kind, RaceKind::Receives);
        assert_eq!((w.first, w.second), (p("x?b.0"), p("x?c.0")));
        assert!(find_race_shape(&p("new x.(x?b.0 | x?c.0)")).is_some());
        assert!(find_race_shape(&p("x!a.0 | x?b.0")).is_none());
    }

    #[test]
    fn canonical_key_is_alpha_and_order_invariant() {
        let a = canonical_key(&p("new a.(x!a.0 | x?b.b!c.0)"));
        let b = canonical_key(&p("x?z.z!c.0 | new q.x!q.0"));
        assert_eq!(a, b);
        assert_ne!(canonical_key(&p("x!a.0")), canonical_key(&p("x!b.0")));
    }
}
