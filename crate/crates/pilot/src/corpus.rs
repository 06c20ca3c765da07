//! Golden inputs and exhaustive generators for processes, choreographies and
//! endpoint behaviours.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::choreography::Choreography;
use crate::formula::Formula;
use crate::process::{Name, Process};

/// Channel names in alphabet order; a spec with `channels = n` uses the first n.
pub const CHANNELS: &[&str] = &["x", "a", "y", "z"];
/// Label names in alphabet order.
pub const LABELS: &[&str] = &["l", "m", "n"];
/// Names given to receive binders, in order of occurrence.
pub const BINDERS: &[&str] = &[
    "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "o", "r", "s", "t", "u", "v", "w",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Prefixes per component, branches of one choice counted together.
    pub max_prefixes: usize,
    pub max_components: usize,
    pub max_restrictions: usize,
    pub labels: usize,
    pub channels: usize,
    /// Prefixes across all components.
    pub max_total_prefixes: usize,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            max_prefixes: 4,
            max_components: 3,
            max_restrictions: 2,
            labels: 2,
            channels: 2,
            max_total_prefixes: 4,
        }
    }
}

impl GeneratorSpec {
    pub fn zero() -> Self {
        GeneratorSpec {
            max_prefixes: 0,
            max_components: 0,
            max_restrictions: 0,
            labels: 0,
            channels: 0,
            max_total_prefixes: 0,
        }
    }

    fn channel_names(&self) -> Vec<Name> {
        CHANNELS.iter().take(self.channels).map(|s| s.to_string()).collect()
    }

    fn label_names(&self) -> Vec<Name> {
        LABELS.iter().take(self.labels).map(|s| s.to_string()).collect()
    }
}

fn local(i: usize) -> Name {
    format!("v{i}")
}

/// Sequential processes with at most `budget` prefixes. Subjects are free
/// channels; objects are channels or received names in scope.
pub fn sequential_processes(spec: &GeneratorSpec, budget: usize) -> Vec<Process> {
    let gen = SeqGen {
        channels: spec.channel_names(),
        label_sets: nonempty_subsets(&spec.label_names()),
    };
    let mut out = Vec::new();
    gen.fill(budget, &[], &mut out);
    out
}

struct SeqGen {
    channels: Vec<Name>,
    label_sets: Vec<Vec<Name>>,
}

impl SeqGen {
    fn fill(&self, budget: usize, scope: &[Name], out: &mut Vec<Process>) {
        out.push(Process::Nil);
        if budget == 0 {
            return;
        }
        let mut conts = Vec::new();
        self.fill(budget - 1, scope, &mut conts);
        for k in &self.channels {
            for o in self.channels.iter().chain(scope) {
                for c in &conts {
                    out.push(Process::send(k.clone(), o.clone(), c.clone()));
                }
            }
            let b = local(scope.len());
            let mut inner_scope = scope.to_vec();
            inner_scope.push(b.clone());
            let mut inner = Vec::new();
            self.fill(budget - 1, &inner_scope, &mut inner);
            for c in inner {
                out.push(Process::recv(k.clone(), b.clone(), c));
            }
            for labels in &self.label_sets {
                for branches in self.branchings(labels, budget - 1, scope) {
                    out.push(Process::sel(k.clone(), branches.clone()));
                    out.push(Process::bra(k.clone(), branches));
                }
            }
        }
    }

    fn branchings(&self, labels: &[Name], budget: usize, scope: &[Name]) -> Vec<Vec<(Name, Process)>> {
        let Some((first, rest)) = labels.split_first() else {
            return vec![Vec::new()];
        };
        let mut out = Vec::new();
        let mut heads = Vec::new();
        self.fill(budget, scope, &mut heads);
        for h in heads {
            let used = h.prefix_count();
            for mut tail in self.branchings(rest, budget - used, scope) {
                tail.insert(0, (first.clone(), h.clone()));
                out.push(tail);
            }
        }
        out
    }
}

fn nonempty_subsets(items: &[Name]) -> Vec<Vec<Name>> {
    let mut out: Vec<Vec<Name>> = Vec::new();
    for mask in 1u32..(1 << items.len()) {
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| s.clone())
                .collect(),
        );
    }
    out.sort_by_key(|s| s.len());
    out
}

/// Renames every receive binder, in order of occurrence, to the next name
/// of [`BINDERS`].
pub fn rename_binders(p: &Process) -> Process {
    let mut next = 0;
    rename_walk(p, &mut next)
}

fn rename_walk(p: &Process, next: &mut usize) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Send {
            subject,
            object,
            cont,
        } => Process::send(subject.clone(), object.clone(), rename_walk(cont, next)),
        Process::Recv {
            subject,
            binder,
            cont,
        } => {
            let fresh = BINDERS[*next].to_string();
            *next += 1;
            let cont = cont.subst_unchecked(&fresh, binder);
            Process::recv(subject.clone(), fresh, rename_walk(&cont, next))
        }
        Process::Par(l, r) => {
            let l = rename_walk(l, next);
            Process::par(l, rename_walk(r, next))
        }
        Process::Res { binder, body } => Process::res(binder.clone(), rename_walk(body, next)),
        Process::LabelSend { subject, branches } => Process::sel(
            subject.clone(),
            branches.iter().map(|(l, q)| (l.clone(), rename_walk(q, next))).collect(),
        ),
        Process::LabelRecv { subject, branches } => Process::bra(
            subject.clone(),
            branches.iter().map(|(l, q)| (l.clone(), rename_walk(q, next))).collect(),
        ),
    }
}

/// A string equal for two processes iff they are α-equivalent.
pub fn alpha_key(p: &Process) -> String {
    alpha_normal(p).to_string()
}

/// Renames all binders to reserved names in order of occurrence.
fn alpha_normal(p: &Process) -> Process {
    let mut next = 0;
    alpha_walk(p, &mut next)
}

fn alpha_walk(p: &Process, next: &mut usize) -> Process {
    let mut fresh = || {
        *next += 1;
        format!("_{}", *next - 1)
    };
    match p {
        Process::Recv {
            subject,
            binder,
            cont,
        } => {
            let f = fresh();
            let cont = cont.subst_unchecked(&f, binder);
            Process::recv(subject.clone(), f, alpha_walk(&cont, next))
        }
        Process::Res { binder, body } => {
            let f = fresh();
            let body = body.subst_unchecked(&f, binder);
            Process::res(f, alpha_walk(&body, next))
        }
        Process::Nil => Process::Nil,
        Process::Send {
            subject,
            object,
            cont,
        } => Process::send(subject.clone(), object.clone(), alpha_walk(cont, next)),
        Process::Par(l, r) => {
            let l = alpha_walk(l, next);
            Process::par(l, alpha_walk(r, next))
        }
        Process::LabelSend { subject, branches } => Process::sel(
            subject.clone(),
            branches.iter().map(|(l, q)| (l.clone(), alpha_walk(q, next))).collect(),
        ),
        Process::LabelRecv { subject, branches } => Process::bra(
            subject.clone(),
            branches.iter().map(|(l, q)| (l.clone(), alpha_walk(q, next))).collect(),
        ),
    }
}

/// Every process `new k1..kr. (S1 | … | Sn)` within the bounds, in a fixed
/// order. Components form a multiset of non-nil sequential processes (the
/// single process `0` aside) and every restriction binds a name of the body.
/// Duplicates modulo α are dropped.
pub fn enumerate_processes(spec: GeneratorSpec) -> Vec<Process> {
    let mut out = vec![Process::Nil];
    let mut seen = HashSet::new();
    if spec.max_components == 0 {
        return out;
    }
    let per_component = spec.max_prefixes.min(spec.max_total_prefixes);
    let pool: Vec<Process> = sequential_processes(&spec, per_component)
        .into_iter()
        .filter(|p| !p.is_nil())
        .collect();
    let sizes: Vec<usize> = pool.iter().map(Process::prefix_count).collect();
    let channels = spec.channel_names();
    let mut stack: Vec<usize> = Vec::new();
    combine(&pool, &sizes, &spec, 0, 0, &mut stack, &mut |items| {
        let body = rename_binders(&Process::par_all(items.iter().map(|&i| pool[i].clone()).collect()));
        let fns = body.free_names();
        let candidates: Vec<Name> = channels.iter().filter(|c| fns.contains(*c)).cloned().collect();
        for mask in 0u32..(1 << candidates.len()) {
            if mask.count_ones() as usize > spec.max_restrictions {
                continue;
            }
            let bound: Vec<Name> = candidates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| c.clone())
                .collect();
            let p = Process::res_all(&bound, body.clone());
            if seen.insert(alpha_key(&p)) {
                out.push(p);
            }
        }
    });
    out
}

/// The sweeps making up the agreement corpus: every shape with up to three
/// prefixes in total, and label-free shapes with up to four.
pub fn agreement_sweeps() -> Vec<GeneratorSpec> {
    vec![
        GeneratorSpec {
            max_total_prefixes: 3,
            ..GeneratorSpec::default()
        },
        GeneratorSpec {
            labels: 0,
            ..GeneratorSpec::default()
        },
    ]
}

/// Union of the agreement sweeps, reduced by symmetry. Races are not filtered.
pub fn agreement_corpus() -> Vec<Process> {
    let sweeps = agreement_sweeps();
    let all = sweeps.iter().flat_map(|spec| enumerate_processes(*spec)).collect();
    reduce_symmetry(&sweeps[0], all)
}

/// Keeps the first process of each class modulo α and permutations of the
/// channel and label alphabets. Verdicts are invariant under such renamings.
pub fn reduce_symmetry(spec: &GeneratorSpec, ps: Vec<Process>) -> Vec<Process> {
    let channel_perms = permutations(&spec.channel_names());
    let label_perms = permutations(&spec.label_names());
    let mut seen = HashSet::new();
    ps.into_iter()
        .filter(|p| {
            let p = alpha_normal(p);
            let key = channel_perms
                .iter()
                .flat_map(|cm| label_perms.iter().map(move |lm| (cm, lm)))
                .map(|(cm, lm)| alpha_key(&relabel(&p.rename_free(cm), lm)))
                .min()
                .expect("identity permutation");
            seen.insert(key)
        })
        .collect()
}

fn permutations(items: &[Name]) -> Vec<HashMap<Name, Name>> {
    fn orders(items: &[Name]) -> Vec<Vec<Name>> {
        if items.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in orders(&rest) {
                tail.insert(0, head.clone());
                out.push(tail);
            }
        }
        out
    }
    orders(items)
        .into_iter()
        .map(|o| items.iter().cloned().zip(o).collect())
        .collect()
}

fn relabel(p: &Process, map: &HashMap<Name, Name>) -> Process {
    let go = |q: &Process| relabel(q, map);
    let rn = |branches: &crate::process::Branches| -> crate::process::Branches {
        let mut out: crate::process::Branches = branches
            .iter()
            .map(|(l, q)| (map.get(l).cloned().unwrap_or_else(|| l.clone()), go(q)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    };
    match p {
        Process::Nil => Process::Nil,
        Process::Send {
            subject,
            object,
            cont,
        } => Process::send(subject.clone(), object.clone(), go(cont)),
        Process::Recv {
            subject,
            binder,
            cont,
        } => Process::recv(subject.clone(), binder.clone(), go(cont)),
        Process::Par(l, r) => Process::par(go(l), go(r)),
        Process::Res { binder, body } => Process::res(binder.clone(), go(body)),
        Process::LabelSend { subject, branches } => Process::sel(subject.clone(), rn(branches)),
        Process::LabelRecv { subject, branches } => Process::bra(subject.clone(), rn(branches)),
    }
}

fn combine(
    pool: &[Process],
    sizes: &[usize],
    spec: &GeneratorSpec,
    from: usize,
    used: usize,
    stack: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if !stack.is_empty() {
        emit(stack);
    }
    if stack.len() == spec.max_components {
        return;
    }
    for i in from..pool.len() {
        if used + sizes[i] > spec.max_total_prefixes {
            continue;
        }
        stack.push(i);
        combine(pool, sizes, spec, i, used + sizes[i], stack, emit);
        stack.pop();
    }
}

/// What a golden case is expected to produce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Expectation {
    DeadlockFree,
    Deadlocked { witness: String },
    Race,
    Progress(bool),
    PrivateMobility,
    /// Extraction result, compared modulo α.
    Choreography(String),
    /// Projection result, compared up to struct_equiv.
    Network(String),
    Unprojectable,
    Formula(String),
}

impl Expectation {
    /// The CLI command exercising this expectation.
    pub fn command(&self) -> &'static str {
        match self {
            Expectation::DeadlockFree | Expectation::Deadlocked { .. } | Expectation::Race => "check",
            Expectation::Progress(_) | Expectation::PrivateMobility => "progress",
            Expectation::Choreography(_) => "extract",
            Expectation::Network(_) | Expectation::Unprojectable => "project",
            Expectation::Formula(_) => "encode",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Expectation::DeadlockFree
            | Expectation::Progress(true)
            | Expectation::Choreography(_)
            | Expectation::Network(_)
            | Expectation::Formula(_) => 0,
            Expectation::Deadlocked { .. } | Expectation::Progress(false) => 2,
            Expectation::Race => 3,
            Expectation::PrivateMobility => 4,
            Expectation::Unprojectable => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenCase {
    pub name: String,
    pub input: String,
    pub expectation: Expectation,
}

pub const EQ1: &str = "new x. new y. (x!a. y sel{l: y!b.0} | x?a. y bra{l: y?b.0, m: z!c.0})";
pub const EQ13: &str = "new x. new y. (x!a. y?b.0 | x?a. y!b.0)";
pub const EQ11_NETWORK: &str = "new x, y. p[x!a. y sel{l: y!b.0}] | q[x?a. y bra{l: y?b.0, m: z!c.0}]";
pub const EQ_CHOREO: &str = "new x. new y. p.a -> q.a : x ; p -> q : y { l: p.b -> q.b : y ; 0 | m: z!c.0 }";
pub const APPB_CHOREOGRAPHY: &str = "p -> q : kpq { \
    l1: q.x1 -> r.a : kqr ; q -> r : kqr { n1: r.y1 -> p.z : kpr ; 0 }, \
    l2: q.x2 -> r.a : kqr ; q -> r : kqr { n2: r.y2 -> p.z : kpr ; 0 } }";
pub const APPB_UNPROJECTABLE: &str = "p -> q : kpq { \
    l1: q.x1 -> r.a : kqr ; r.y1 -> p.z : kpr ; 0, \
    l2: q.x2 -> r.a : kqr ; r.y2 -> p.z : kpr ; 0 }";
pub const APPB_NETWORK: &str = "p[kpq sel{l1: kpr?z.0, l2: kpr?z.0}] \
    | q[kpq bra{l1: kqr!x1. kqr sel{n1: 0}, l2: kqr!x2. kqr sel{n2: 0}}] \
    | r[kqr?a. kqr bra{n1: kpr!y1.0, n2: kpr!y2.0}]";
/// Extraction keeps the branch `r` offers but `q` never selects.
pub const APPB_EXTRACTED: &str = "p -> q : kpq { \
    l1: q.x1 -> r.a : kqr ; q -> r : kqr { n1: r.y1 -> p.z : kpr ; 0 | n2: kpr!y2.0 }, \
    l2: q.x2 -> r.a : kqr ; q -> r : kqr { n2: r.y2 -> p.z : kpr ; 0 | n1: kpr!y1.0 } }";

fn case(name: &str, input: &str, expectation: Expectation) -> GoldenCase {
    GoldenCase {
        name: name.to_string(),
        input: input.to_string(),
        expectation,
    }
}

/// The worked examples with their expected outcomes.
pub fn golden_cases() -> Vec<GoldenCase> {
    use Expectation::*;
    vec![
        case("nil", "0", DeadlockFree),
        case("eq1", EQ1, DeadlockFree),
        case("eq13", EQ13, DeadlockFree),
        case(
            "deadlock-witness",
            "new x.(x!a.0 | x?b.0 | y!c.0)",
            Deadlocked {
                witness: "y!c.0".into(),
            },
        ),
        case("race-com", "x!a.0 | x?b.0 | x?c.0", Race),
        case("race-stuck", "new x.(x?b.0 | x?c.0)", Race),
        case("restriction-scope", "(new a. x!a.0) | x?a.0", DeadlockFree),
        case("progress-stuck-output", "y!c.0", Progress(true)),
        case("progress-nil", "0", Progress(true)),
        case("progress-private-mobility", "new a.(b!a.a!c.0)", PrivateMobility),
        case("eq11-extract", EQ11_NETWORK, Choreography(EQ_CHOREO.into())),
        case("eq-choreo-project", EQ_CHOREO, Network(EQ11_NETWORK.into())),
        case("appB-project", APPB_CHOREOGRAPHY, Network(APPB_NETWORK.into())),
        case("appB-extract", APPB_NETWORK, Choreography(APPB_EXTRACTED.into())),
        case("appB-unprojectable", APPB_UNPROJECTABLE, Unprojectable),
        case("encode-nil", "0", Formula("1".into())),
    ]
}

/// Flat choreographies over processes `p`, `q`, `r`: interaction sequences
/// of length ≤ `depth`, with binary choices whose branches are generated
/// recursively. Channels are shared by a fixed pair of processes.
pub fn enumerate_choreographies(depth: usize) -> Vec<Choreography> {
    let mut out = Vec::new();
    chor_fill(depth, 0, &mut out);
    out
}

const ROLES: &[&str] = &["p", "q", "r"];

fn pair_channel(s: usize, r: usize) -> Name {
    let (lo, hi) = (s.min(r), s.max(r));
    format!("k{}{}", ROLES[lo], ROLES[hi])
}

fn chor_fill(depth: usize, bound: usize, out: &mut Vec<Choreography>) {
    out.push(Choreography::End);
    if depth == 0 {
        return;
    }
    let mut conts = Vec::new();
    chor_fill(depth - 1, bound + 1, &mut conts);
    for (s, &sender) in ROLES.iter().enumerate() {
        for (r, &receiver) in ROLES.iter().enumerate() {
            if s == r {
                continue;
            }
            let k = pair_channel(s, r);
            for c in &conts {
                out.push(Choreography::Com {
                    sender: sender.into(),
                    object: "u".into(),
                    receiver: receiver.into(),
                    binder: BINDERS[bound].into(),
                    channel: k.clone(),
                    cont: Box::new(c.clone()),
                });
            }
            if depth >= 2 {
                let mut branch_pool = Vec::new();
                chor_fill((depth - 1).min(1), bound, &mut branch_pool);
                for l in &branch_pool {
                    for m in &branch_pool {
                        out.push(Choreography::Choice {
                            sender: sender.into(),
                            receiver: receiver.into(),
                            channel: k.clone(),
                            selectable: vec![("l".into(), l.clone()), ("m".into(), m.clone())],
                            garbage: Vec::new(),
                        });
                    }
                }
            }
        }
    }
}

/// Sequential endpoint behaviours over one channel pair and two labels,
/// used to exercise merge.
pub fn endpoint_pool(budget: usize) -> Vec<Process> {
    let spec = GeneratorSpec {
        max_prefixes: budget,
        max_components: 1,
        max_restrictions: 0,
        labels: 2,
        channels: 2,
        max_total_prefixes: budget,
    };
    let mut seen = BTreeSet::new();
    sequential_processes(&spec, budget)
        .into_iter()
        .map(|p| rename_binders(&p))
        .filter(|p| seen.insert(p.to_string()))
        .collect()
}

/// Every formula of depth ≤ `depth` over the atoms `x!y`, `x?y` and the unit,
/// with binary `⅋ ⊗ ◁ ⊕ &` and the four quantifiers binding `y`.
pub fn formulas_up_to_depth(depth: usize) -> Vec<Formula> {
    let mut levels: Vec<Formula> = vec![Formula::send("x", "y"), Formula::recv("x", "y"), Formula::Unit];
    for _ in 0..depth {
        let prev = levels.clone();
        let mut next = vec![Formula::send("x", "y"), Formula::recv("x", "y"), Formula::Unit];
        for a in &prev {
            for b in &prev {
                next.push(Formula::par(a.clone(), b.clone()));
                next.push(Formula::tensor(a.clone(), b.clone()));
                next.push(Formula::prec(a.clone(), b.clone()));
                next.push(Formula::Oplus(vec![a.clone(), b.clone()]));
                next.push(Formula::With(vec![a.clone(), b.clone()]));
            }
        }
        for a in &prev {
            next.push(Formula::forall("y", a.clone()));
            next.push(Formula::exists("y", a.clone()));
            next.push(Formula::new_("y", a.clone()));
            next.push(Formula::ya("y", a.clone()));
        }
        levels = next;
    }
    levels
}

/// A named pair `(left, right)` such that `left ⊸ right` should be provable.
pub type Implication = (String, Formula, Formula);

fn permutations_of<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// The standard logical equivalences, each as two implications, instantiated
/// with atoms `A = x!a`, `B = x?b`, `D = y!c` and arities 1 to 3, plus the
/// one-directional distribution of `&` over `⅋`.
pub fn feq_implications() -> Vec<Implication> {
    let a = Formula::send("x", "a");
    let b = Formula::recv("x", "b");
    let d = Formula::send("y", "c");
    let atoms = [a.clone(), b.clone(), d.clone()];
    let mut eqs: Vec<(String, Formula, Formula)> = vec![
        ("par-unit".into(), Formula::par(a.clone(), Formula::Unit), a.clone()),
        ("seq-unit".into(), Formula::prec(a.clone(), Formula::Unit), a.clone()),
        (
            "par-assoc".into(),
            Formula::par(Formula::par(a.clone(), b.clone()), d.clone()),
            Formula::par(a.clone(), Formula::par(b.clone(), d.clone())),
        ),
        ("par-comm".into(), Formula::par(a.clone(), b.clone()), Formula::par(b.clone(), a.clone())),
        (
            "new-swap".into(),
            Formula::new_("x", Formula::new_("y", Formula::send("x", "y"))),
            Formula::new_("y", Formula::new_("x", Formula::send("x", "y"))),
        ),
        (
            "new-par".into(),
            Formula::new_("x", Formula::par(a.clone(), d.clone())),
            Formula::par(Formula::new_("x", a.clone()), d.clone()),
        ),
        ("new-vacuous".into(), Formula::new_("x", d.clone()), d.clone()),
    ];
    for n in 1..=3 {
        let items = &atoms[..n];
        for sigma in permutations_of(items) {
            eqs.push((
                format!("oplus-perm-{n}"),
                Formula::Oplus(items.to_vec()),
                Formula::Oplus(sigma.clone()),
            ));
            eqs.push((format!("with-perm-{n}"), Formula::With(items.to_vec()), Formula::With(sigma)));
        }
        let news: Vec<Formula> = items.iter().map(|f| Formula::new_("x", f.clone())).collect();
        eqs.push((
            format!("with-new-{n}"),
            Formula::With(news.clone()),
            Formula::new_("x", Formula::With(items.to_vec())),
        ));
        eqs.push((
            format!("oplus-new-{n}"),
            Formula::Oplus(news),
            Formula::new_("x", Formula::Oplus(items.to_vec())),
        ));
    }
    let mut out = Vec::new();
    for (name, l, r) in eqs {
        out.push((format!("{name} ->"), l.clone(), r.clone()));
        out.push((format!("{name} <-"), r, l));
    }
    for n in 1..=3 {
        let unit = Formula::send("z", "e");
        let items = &atoms[..n];
        out.push((
            format!("with-par-{n}"),
            Formula::With(items.iter().map(|f| Formula::par(f.clone(), unit.clone())).collect()),
            Formula::par(Formula::With(items.to_vec()), unit),
        ));
    }
    out
}

/// Rewrites preserving logical equivalence.
fn rewrites() -> Vec<fn(Formula) -> Formula> {
    vec![
        |f| Formula::par(f, Formula::Unit),
        |f| Formula::par(Formula::Unit, f),
        |f| Formula::prec(f, Formula::Unit),
        |f| Formula::new_("w", f),
        |f| Formula::With(vec![f]),
    ]
}

/// Fifty triples `(A, B, C)` with `A ⊸ B` and `B ⊸ C` provable.
pub fn transitivity_family() -> Vec<(Formula, Formula, Formula)> {
    let bases = [
        Formula::send("x", "a"),
        Formula::par(Formula::send("x", "a"), Formula::recv("x", "b")),
        Formula::prec(Formula::send("x", "a"), Formula::recv("y", "c")),
        Formula::With(vec![Formula::send("x", "a"), Formula::recv("x", "b")]),
        Formula::exists("b", Formula::prec(Formula::recv("x", "b"), Formula::Unit)),
    ];
    let rw = rewrites();
    let mut out = Vec::new();
    for base in &bases {
        for i in 0..rw.len() {
            for j in (i + 1)..rw.len() {
                let b = rw[i](base.clone());
                let c = rw[j](b.clone());
                out.push((base.clone(), b, c));
            }
        }
    }
    out
}

/// One-hole contexts for monotonicity checks; the hole is [`Formula::Hole`].
pub fn monotonicity_contexts() -> Vec<Formula> {
    let d = Formula::send("y", "d");
    let h = Formula::Hole;
    vec![
        Formula::par(h.clone(), d.clone()),
        Formula::par(d.clone(), h.clone()),
        Formula::tensor(h.clone(), d.clone()),
        Formula::prec(h.clone(), d.clone()),
        Formula::prec(d.clone(), h.clone()),
        Formula::With(vec![h.clone(), d.clone()]),
        Formula::Oplus(vec![d.clone(), h.clone()]),
        Formula::exists("v", h.clone()),
        Formula::forall("v", h.clone()),
        Formula::new_("v", h),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{alpha_equiv, is_unambiguous};
    use crate::syntax::parse_process;

    #[test]
    fn zero_spec_is_nil() {
        assert_eq!(enumerate_processes(GeneratorSpec::zero()), vec![Process::Nil]);
    }

    #[test]
    fn one_prefix_one_channel() {
        let spec = GeneratorSpec {
            max_prefixes: 1,
            max_components: 1,
            max_restrictions: 0,
            labels: 0,
            channels: 1,
            max_total_prefixes: 1,
        };
        let got: Vec<String> = enumerate_processes(spec).iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["0", "x!x.0", "x?b.0"]);
    }

    #[test]
    fn membership() {
        let spec = GeneratorSpec {
            max_prefixes: 2,
            max_components: 2,
            max_restrictions: 1,
            labels: 0,
            channels: 2,
            max_total_prefixes: 2,
        };
        let all = enumerate_processes(spec);
        let target = parse_process("new x.(x!a.0 | x?b.0)").unwrap();
        assert!(all.iter().any(|p| alpha_equiv(p, &target)));
        assert!(all.iter().all(is_unambiguous));
        for (i, p) in all.iter().enumerate() {
            for q in &all[..i] {
                assert!(!alpha_equiv(p, q), "{p} duplicates {q}");
            }
        }
    }

    #[test]
    fn symmetry_reduction() {
        let spec = GeneratorSpec {
            max_prefixes: 1,
            max_components: 1,
            max_restrictions: 0,
            labels: 0,
            channels: 2,
            max_total_prefixes: 1,
        };
        let all = enumerate_processes(spec);
        let got: Vec<String> = reduce_symmetry(&spec, all).iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["0", "x!x.0", "x!a.0", "x?b.0"]);
    }

    #[test]
    fn choreography_pool() {
        let cs = enumerate_choreographies(3);
        assert!(cs.len() > 200);
        assert!(cs.iter().all(Choreography::is_flat));
    }
}
