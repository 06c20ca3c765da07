use pilot::choreography::{
    check_completeness, check_soundness, epp, merge, merge_order, merge_order_network, Choreography, Network,
};
use pilot::corpus::{endpoint_pool, enumerate_choreographies, APPB_CHOREOGRAPHY, EQ_CHOREO};
use pilot::process::Process;
use pilot::syntax::parse_choreography;
use rayon::prelude::*;

fn projectable(depth: usize) -> Vec<Choreography> {
    let mut out: Vec<Choreography> = [EQ_CHOREO, APPB_CHOREOGRAPHY]
        .iter()
        .map(|s| parse_choreography(s).unwrap())
        .collect();
    out.extend(enumerate_choreographies(depth).into_iter().filter(|c| epp(c).is_ok()));
    out
}

#[test]
fn projection_is_complete_and_sound() {
    let pool = projectable(3);
    assert!(pool.len() >= 200, "{}", pool.len());
    let failures: Vec<String> = pool
        .par_iter()
        .filter_map(|c| {
            let a = check_completeness(c, 1000);
            let b = check_soundness(c, 1000);
            (a.is_err() || b.is_err()).then(|| format!("{c}: {:?} {:?}", a.err(), b.err()))
        })
        .collect();
    assert!(failures.is_empty(), "{failures:?}");
}

/// The endpoint pool closed under one round of merging.
fn merge_closure() -> Vec<Process> {
    let pool = endpoint_pool(2);
    let mut out = pool.clone();
    let mut seen: std::collections::HashSet<Process> = pool.iter().cloned().collect();
    for a in &pool {
        for b in &pool {
            if let Some(m) = merge(a, b) {
                if seen.insert(m.clone()) {
                    out.push(m);
                }
            }
        }
    }
    out
}

fn ordered_pairs(items: &[Process]) -> Vec<(Process, Process)> {
    items
        .par_iter()
        .flat_map_iter(|a| {
            items
                .iter()
                .filter(move |b| merge_order(a, b))
                .map(move |b| (a.clone(), b.clone()))
        })
        .collect()
}

#[test]
fn merge_algebra() {
    let items = merge_closure();
    let pairs = ordered_pairs(&items);
    assert!(pairs.len() >= 1_000, "{}", pairs.len());

    // Componentwise order on networks.
    let net = |p: &Process, q: &Process| {
        Network::new(Vec::new(), vec![("p".into(), p.clone()), ("q".into(), q.clone())]).unwrap()
    };
    for (i, (a, b)) in pairs.iter().enumerate().step_by(7).take(1_000) {
        let (c, d) = &pairs[(i * 31 + 5) % pairs.len()];
        assert!(merge_order_network(&net(a, c), &net(b, d)));
        let (e, f) = (&items[i % items.len()], &items[(i * 13 + 1) % items.len()]);
        let expected = merge_order(a, e) && merge_order(c, f);
        assert_eq!(merge_order_network(&net(a, c), &net(e, f)), expected, "{a} | {c} vs {e} | {f}");
    }

    // Prefixing preserves the order.
    for (a, b) in &pairs {
        let recv = |p: &Process| Process::recv("x", "b", p.clone());
        let send = |p: &Process| Process::send("x", "a", p.clone());
        assert!(merge_order(&recv(a), &recv(b)), "{a} {b}");
        assert!(merge_order(&send(a), &send(b)), "{a} {b}");
    }

    // An upper bound of two processes bounds their merge.
    let mut triples = 0;
    for (i, (p, q)) in pairs.iter().enumerate() {
        for (p2, r) in pairs[i..].iter().take(40) {
            if p2 != p {
                continue;
            }
            let m = merge(q, r).unwrap_or_else(|| panic!("{q} and {r} below {p} do not merge"));
            assert!(merge_order(p, &m), "{p} vs {m}");
            triples += 1;
        }
    }
    assert!(triples >= 1_000, "{triples}");

    // Merge is monotone.
    let mut checked = 0;
    'outer: for (i, (p, q)) in pairs.iter().enumerate().step_by(3) {
        for (r, s) in pairs.iter().skip(i % 11).step_by(11) {
            if p == q && r == s {
                continue;
            }
            if let (Some(pr), Some(qs)) = (merge(p, r), merge(q, s)) {
                assert!(merge_order(&pr, &qs), "{p} ⊔ {r} vs {q} ⊔ {s}");
                checked += 1;
                if checked == 2_000 {
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(checked, 2_000);
}
