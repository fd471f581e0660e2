//! Brute-force oracles for basis generation and zero detection.
//!
//! Graphs are enumerated naively as edge multisets and hair distributions
//! on a fixed vertex set, identified by minimizing over all vertex
//! permutations, and declared zero when some automorphism acts by -1. None
//! of this shares code with the canonical labeling in the library.

use std::collections::BTreeSet;

use hgc_core::enumerate::{generate_basis, GenOptions};
use hgc_core::graph::{FlavorParams, Graph, ValenceRule};
use hgc_core::lincomb::LinComb;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn sign_of(p: &[usize]) -> i32 {
    let mut seen = vec![false; p.len()];
    let mut s = 1;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

type Key = (Vec<(u8, u8)>, Vec<u8>);

fn relabel(g: &Graph, sigma: &[usize]) -> Key {
    let mut es: Vec<(u8, u8)> = g
        .edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (sigma[a as usize] as u8, sigma[b as usize] as u8);
            (x.min(y), x.max(y))
        })
        .collect();
    es.sort_unstable();
    let mut hs = vec![0u8; g.v];
    for (i, &h) in g.hairs.iter().enumerate() {
        hs[sigma[i]] = h;
    }
    (es, hs)
}

fn brute_canon(g: &Graph, perms: &[Vec<usize>]) -> Key {
    perms.iter().map(|s| relabel(g, s)).min().unwrap()
}

/// Sign by which the automorphism `sigma` acts, with parallel edges and
/// hairs at a vertex matched in their stored order.
fn automorphism_sign(g: &Graph, f: &FlavorParams, sigma: &[usize]) -> Option<i32> {
    if relabel(g, sigma) != (g.edges.clone(), g.hairs.clone()) {
        return None;
    }
    let mut used = vec![false; g.edges.len()];
    let mut pi = vec![0; g.edges.len()];
    let mut reversed = 0;
    for (i, &(a, b)) in g.edges.iter().enumerate() {
        let (x, y) = (sigma[a as usize] as u8, sigma[b as usize] as u8);
        let target = (x.min(y), x.max(y));
        let j = (0..g.edges.len()).find(|&j| !used[j] && g.edges[j] == target).unwrap();
        used[j] = true;
        pi[i] = j;
        if x > y {
            reversed += 1;
        }
    }
    let mut offsets = vec![0usize; g.v + 1];
    for i in 0..g.v {
        offsets[i + 1] = offsets[i] + g.hairs[i] as usize;
    }
    let mut hp = vec![0; offsets[g.v]];
    for i in 0..g.v {
        for k in 0..g.hairs[i] as usize {
            hp[offsets[i] + k] = offsets[sigma[i]] + k;
        }
    }
    let mut s = 1;
    if f.edges_odd() {
        s *= sign_of(&pi);
    }
    if f.vertices_odd() {
        s *= sign_of(sigma);
    }
    if f.edges_directed() && reversed % 2 == 1 {
        s = -s;
    }
    if f.hairs_odd() {
        s *= sign_of(&hp);
    }
    Some(s)
}

fn oracle_is_zero(g: &Graph, f: &FlavorParams, perms: &[Vec<usize>]) -> bool {
    let parallel = g.edges.windows(2).any(|w| w[0] == w[1]);
    if parallel && f.edges_odd() {
        return true;
    }
    if f.edges_directed() && g.edges.iter().any(|&(a, b)| a == b) {
        return true;
    }
    if f.hairs_odd() && g.hairs.iter().any(|&h| h >= 2) {
        return true;
    }
    perms.iter().any(|s| automorphism_sign(g, f, s) == Some(-1))
}

fn edge_multisets(pairs: &[(u8, u8)], k: usize, start: usize, cur: &mut Vec<(u8, u8)>, out: &mut Vec<Vec<(u8, u8)>>) {
    if k == 0 {
        out.push(cur.clone());
        return;
    }
    for i in start..pairs.len() {
        cur.push(pairs[i]);
        edge_multisets(pairs, k - 1, i, cur, out);
        cur.pop();
    }
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<u8>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first as u8);
            out.push(rest);
        }
    }
    out
}

/// All valid graphs with the given hairs and loops on `v` vertices, one per
/// isomorphism class, split into (nonzero, zero).
fn naive(f: &FlavorParams, hairs: usize, loops: usize, v: usize) -> (BTreeSet<Key>, BTreeSet<Key>) {
    let perms = permutations(v);
    let mut pairs = Vec::new();
    for a in 0..v as u8 {
        for b in a..v as u8 {
            if a != b || f.tadpoles {
                pairs.push((a, b));
            }
        }
    }
    let e = loops + v - 1;
    let mut sets = Vec::new();
    edge_multisets(&pairs, e, 0, &mut Vec::new(), &mut sets);
    let mut nonzero = BTreeSet::new();
    let mut zero = BTreeSet::new();
    for hs in compositions(hairs, v) {
        for es in &sets {
            let g = Graph::new(v, es, &hs);
            if g.validate(f).is_err() {
                continue;
            }
            let key = brute_canon(&g, &perms);
            if nonzero.contains(&key) || zero.contains(&key) {
                continue;
            }
            if oracle_is_zero(&g, f, &perms) {
                zero.insert(key);
            } else {
                nonzero.insert(key);
            }
        }
    }
    (nonzero, zero)
}

fn flavors() -> Vec<FlavorParams> {
    let mut out = Vec::new();
    for m in 0..2 {
        for n in 0..2 {
            out.push(FlavorParams::hairy(m, n));
            out.push(FlavorParams::hairy(m, n).with_tadpoles());
        }
    }
    out
}

#[test]
fn generated_bases_match_naive_enumeration() {
    let mut cases = Vec::new();
    for f in flavors() {
        for (h, l) in [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 0), (3, 1), (4, 0)] {
            cases.push((f, h, l));
        }
    }
    for n in 0..2 {
        for l in 2..=4 {
            cases.push((FlavorParams::bald(n), 0, l));
            cases.push((FlavorParams::bald(n).with_tadpoles(), 0, l));
        }
        for l in 1..=3 {
            cases.push((FlavorParams::bald_bivalent(n), 0, l));
        }
    }
    for (f, h, l) in cases {
        let mut expected = BTreeSet::new();
        for v in 1..=5 {
            expected.extend(naive(&f, h, l, v).0);
        }
        let mut got = BTreeSet::new();
        let opts = match f.valence {
            ValenceRule::Bivalent => GenOptions::default().with_max_v(5),
            ValenceRule::Trivalent => GenOptions::default(),
        };
        for (_, b) in generate_basis(&f, h, l, &opts).unwrap() {
            for g in b.graphs.iter().filter(|g| !g.is_line() && g.v <= 5) {
                let key = brute_canon(g, &permutations(g.v));
                assert!(got.insert(key), "duplicate class {g} in {} ({h},{l})", f.token());
            }
        }
        assert_eq!(got, expected, "{} hairs={h} loops={l}", f.token());
    }
}

#[test]
fn zero_detection_matches_automorphism_signs() {
    let mut checked = 0;
    let mut cases: Vec<(FlavorParams, usize, usize, usize)> = Vec::new();
    for f in flavors() {
        for (h, l) in [(1, 2), (2, 1), (2, 2), (3, 1), (1, 3)] {
            for v in 1..=5 {
                cases.push((f, h, l, v));
            }
        }
    }
    for n in 0..4 {
        cases.push((FlavorParams::bald(n), 0, 3, 4));
        cases.push((FlavorParams::bald(n).with_tadpoles(), 0, 3, 4));
        cases.push((FlavorParams::bald_bivalent(n), 0, 2, 6));
        cases.push((FlavorParams::bald(n), 0, 4, 6));
    }
    for (f, h, l, v) in cases {
        let perms = permutations(v);
        let (nonzero, zero) = naive(&f, h, l, v);
        for (key, expect_zero) in nonzero.iter().map(|k| (k, false)).chain(zero.iter().map(|k| (k, true))) {
            let g = Graph::new(v, &key.0, &key.1);
            assert_eq!(LinComb::from_graph(f, &g).is_zero(), expect_zero, "{g} in {}", f.token());
            assert_eq!(oracle_is_zero(&g, &f, &perms), expect_zero);
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} graphs checked");
}
