//! Orientations, relabeling signs and canonical forms.
//!
//! An orientation is a word listing every odd object of a graph exactly
//! once (internal vertices when `n` is odd, internal edges when `n` is even,
//! hairs when `m + 1 - n` is odd), together with edge directions when `n` is
//! odd. The standard orientation of a labeled graph lists vertices by label,
//! edges in sorted order, hairs grouped by vertex label, and directs every
//! edge from the smaller to the larger label.
//!
//! Canonical forms come from colour refinement followed by an exhaustive
//! search over individualizations, keeping the lexicographically smallest
//! relabeled graph. All leaves that reach the minimum are kept; they give
//! the full automorphism group.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{HgcError, Result};
use crate::graph::{FlavorParams, Graph};

/// One odd object in an orientation word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Obj {
    V(u16),
    E(u16),
    H(u16),
}

/// A labeled graph with an explicit orientation. Edges are kept in the given
/// order and direction `(tail, head)`; `hairs[t]` is the vertex carrying hair
/// `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oriented {
    pub v: usize,
    pub edges: Vec<(u8, u8)>,
    pub hairs: Vec<u8>,
    pub word: Vec<Obj>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

impl Sign {
    pub fn from_i8(s: i8) -> Sign {
        match s {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            _ => Sign::Zero,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
            Sign::Zero => 0,
        }
    }
}

/// Canonical representative with the sign relating the input orientation to
/// the standard orientation of the representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedCanonical {
    pub graph: Graph,
    pub sign: Sign,
}

impl SignedCanonical {
    pub fn key(&self) -> String {
        self.graph.to_string()
    }
}

impl Oriented {
    pub fn standard(g: &Graph, f: &FlavorParams) -> Oriented {
        let mut hairs = Vec::new();
        for (x, &h) in g.hairs.iter().enumerate() {
            for _ in 0..h {
                hairs.push(x as u8);
            }
        }
        let mut word = Vec::new();
        if f.vertices_odd() {
            word.extend((0..g.v).map(|x| Obj::V(x as u16)));
        }
        if f.edges_odd() {
            word.extend((0..g.edges.len()).map(|t| Obj::E(t as u16)));
        }
        if f.hairs_odd() {
            word.extend((0..hairs.len()).map(|t| Obj::H(t as u16)));
        }
        Oriented {
            v: g.v,
            edges: g.edges.clone(),
            hairs,
            word,
        }
    }

    pub fn line() -> Oriented {
        Oriented {
            v: 0,
            edges: Vec::new(),
            hairs: Vec::new(),
            word: Vec::new(),
        }
    }

    pub fn is_line(&self) -> bool {
        self.v == 0
    }

    pub fn plain(&self) -> Graph {
        if self.is_line() {
            return Graph::line();
        }
        let mut counts = vec![0u8; self.v];
        for &x in &self.hairs {
            counts[x as usize] += 1;
        }
        Graph::new(self.v, &self.edges, &counts)
    }

    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0usize; self.v];
        for &(a, b) in &self.edges {
            val[a as usize] += 1;
            val[b as usize] += 1;
        }
        for &x in &self.hairs {
            val[x as usize] += 1;
        }
        val
    }

    /// Admissible for `f`: connected, valence rule, hair presence.
    pub fn admissible(&self, f: &FlavorParams) -> bool {
        if self.is_line() {
            return f.is_hairy();
        }
        if f.is_hairy() == self.hairs.is_empty() {
            return false;
        }
        if !f.tadpoles && self.edges.iter().any(|&(a, b)| a == b) {
            return false;
        }
        let min = f.min_valence();
        self.valences().iter().all(|&d| d >= min)
            && crate::graph::connected_without(self.v, &self.edges, None)
    }
}

fn permutation_parity(seq: &[usize]) -> i8 {
    let mut seen = vec![false; seq.len()];
    let mut sign = 1i8;
    for start in 0..seq.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = seq[x];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Relabels the vertices of `o` by `sigma` (old label -> new label) and
/// returns the resulting plain graph with the sign of the transported
/// orientation relative to that graph's standard orientation.
///
/// Structural zeros (parallel odd edges, odd tadpoles, repeated odd hairs)
/// are not detected here; see [`canonicalize_oriented`].
pub fn relabel_sign(o: &Oriented, sigma: &[usize], f: &FlavorParams) -> (Graph, i8) {
    let mut sign = 1i8;
    let mut keyed: Vec<(u8, u8, usize)> = Vec::with_capacity(o.edges.len());
    for (t, &(a, b)) in o.edges.iter().enumerate() {
        let (na, nb) = (sigma[a as usize] as u8, sigma[b as usize] as u8);
        if f.edges_directed() && na > nb {
            sign = -sign;
        }
        keyed.push((na.min(nb), na.max(nb), t));
    }
    keyed.sort_unstable();
    let mut pos_e = vec![0usize; o.edges.len()];
    for (p, &(_, _, t)) in keyed.iter().enumerate() {
        pos_e[t] = p;
    }
    let mut hk: Vec<(u8, usize)> = o
        .hairs
        .iter()
        .enumerate()
        .map(|(t, &x)| (sigma[x as usize] as u8, t))
        .collect();
    hk.sort_unstable();
    let mut pos_h = vec![0usize; o.hairs.len()];
    let mut counts = vec![0u8; o.v];
    for (p, &(x, t)) in hk.iter().enumerate() {
        pos_h[t] = p;
        counts[x as usize] += 1;
    }
    let off_e = if f.vertices_odd() { o.v } else { 0 };
    let off_h = off_e + if f.edges_odd() { o.edges.len() } else { 0 };
    let seq: Vec<usize> = o
        .word
        .iter()
        .map(|obj| match *obj {
            Obj::V(x) => sigma[x as usize],
            Obj::E(t) => off_e + pos_e[t as usize],
            Obj::H(t) => off_h + pos_h[t as usize],
        })
        .collect();
    debug_assert_eq!(
        seq.len(),
        off_h + if f.hairs_odd() { o.hairs.len() } else { 0 }
    );
    sign *= permutation_parity(&seq);
    let edges: Vec<(u8, u8)> = keyed.iter().map(|&(a, b, _)| (a, b)).collect();
    (
        Graph {
            v: o.v,
            edges,
            hairs: counts,
        },
        sign,
    )
}

/// Zero classes forced by a symmetry that moves no vertex.
fn structural_zero(g: &Graph, f: &FlavorParams) -> bool {
    if f.edges_odd() && g.has_multi_edge() {
        return true;
    }
    if f.edges_directed() && g.edges.iter().any(|&(a, b)| a == b) {
        return true;
    }
    if f.hairs_odd() && g.hairs.iter().any(|&h| h >= 2) {
        return true;
    }
    false
}

fn relabel_plain(g: &Graph, sigma: &[usize]) -> Graph {
    let mut edges: Vec<(u8, u8)> = g
        .edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (sigma[a as usize] as u8, sigma[b as usize] as u8);
            (x.min(y), x.max(y))
        })
        .collect();
    edges.sort_unstable();
    let mut hairs = vec![0u8; g.v];
    for (x, &h) in g.hairs.iter().enumerate() {
        hairs[sigma[x]] = h;
    }
    Graph {
        v: g.v,
        edges,
        hairs,
    }
}

struct Search<'a> {
    g: &'a Graph,
    adj: Vec<Vec<(usize, usize)>>,
    best: Option<Graph>,
    leaves: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph) -> Self {
        let mut mult: Vec<HashMap<usize, usize>> = vec![HashMap::new(); g.v];
        for &(a, b) in &g.edges {
            if a != b {
                *mult[a as usize].entry(b as usize).or_default() += 1;
                *mult[b as usize].entry(a as usize).or_default() += 1;
            }
        }
        let adj = mult.into_iter().map(|m| m.into_iter().collect()).collect();
        Search {
            g,
            adj,
            best: None,
            leaves: Vec::new(),
        }
    }

    /// Rank-compresses keys into colours, preserving key order.
    fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
        let mut sorted: Vec<K> = keys.to_vec();
        sorted.sort();
        sorted.dedup();
        keys.iter()
            .map(|k| sorted.binary_search(k).unwrap())
            .collect()
    }

    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut ncol = count_distinct(&colors);
        loop {
            let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..self.g.v)
                .map(|x| {
                    let mut nb: Vec<(usize, usize)> =
                        self.adj[x].iter().map(|&(y, k)| (colors[y], k)).collect();
                    nb.sort_unstable();
                    (colors[x], nb)
                })
                .collect();
            let next = Self::rank(&sigs);
            let nn = count_distinct(&next);
            colors = next;
            if nn == ncol {
                return colors;
            }
            ncol = nn;
        }
    }

    fn run(&mut self, colors: Vec<usize>) {
        let v = self.g.v;
        let mut sizes = vec![0usize; v];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = (0..v).find(|&c| sizes[c] > 1);
        match target {
            None => {
                let h = relabel_plain(self.g, &colors);
                match &self.best {
                    Some(b) if h > *b => {}
                    Some(b) if h == *b => self.leaves.push(colors),
                    _ => {
                        self.best = Some(h);
                        self.leaves.clear();
                        self.leaves.push(colors);
                    }
                }
            }
            Some(cell) => {
                let members: Vec<usize> = (0..v).filter(|&x| colors[x] == cell).collect();
                for x in members {
                    let keys: Vec<(usize, usize)> =
                        (0..v).map(|y| (colors[y], usize::from(y != x))).collect();
                    let next = self.refine(Self::rank(&keys));
                    self.run(next);
                }
            }
        }
    }
}

fn count_distinct(c: &[usize]) -> usize {
    let mut s = c.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// Canonical form of a plain graph: the labeling `sigma` (old -> new) that
/// produces the representative, the representative itself, and the
/// automorphism group of the representative as vertex permutations.
pub fn canonical_form(g: &Graph) -> (Vec<usize>, Graph, Vec<Vec<usize>>) {
    if g.v == 0 {
        return (Vec::new(), g.clone(), vec![Vec::new()]);
    }
    let mut search = Search::new(g);
    let tad = g.tadpoles();
    let val = g.valences();
    let keys: Vec<(usize, u8, usize)> = (0..g.v).map(|x| (val[x], g.hairs[x], tad[x])).collect();
    let start = search.refine(Search::rank(&keys));
    search.run(start);
    let best = search.best.take().unwrap();
    let sigma0 = search.leaves[0].clone();
    let mut inv0 = vec![0usize; g.v];
    for (x, &y) in sigma0.iter().enumerate() {
        inv0[y] = x;
    }
    let auts = search
        .leaves
        .iter()
        .map(|s| (0..g.v).map(|y| s[inv0[y]]).collect())
        .collect();
    (sigma0, best, auts)
}

type ZeroKey = (bool, bool, bool, Graph);

fn zero_cache() -> &'static RwLock<HashMap<ZeroKey, bool>> {
    static CACHE: std::sync::OnceLock<RwLock<HashMap<ZeroKey, bool>>> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Whether the canonical graph `h` (with automorphisms `auts`) has an
/// orientation-reversing automorphism.
fn odd_symmetry(h: &Graph, auts: &[Vec<usize>], f: &FlavorParams) -> bool {
    let key = (f.vertices_odd(), f.edges_odd(), f.hairs_odd(), h.clone());
    if let Some(&z) = zero_cache().read().unwrap().get(&key) {
        return z;
    }
    let std = Oriented::standard(h, f);
    let z = auts.iter().any(|a| relabel_sign(&std, a, f).1 < 0);
    zero_cache().write().unwrap().insert(key, z);
    z
}

/// Canonical representative of an oriented graph, or `None` if the class is
/// zero. The caller is responsible for admissibility.
pub fn canonicalize_oriented(o: &Oriented, f: &FlavorParams) -> Option<(Graph, i8)> {
    if o.is_line() {
        return line_nonzero(f).then(|| (Graph::line(), 1));
    }
    let g = o.plain();
    if structural_zero(&g, f) {
        return None;
    }
    let (sigma, h, auts) = canonical_form(&g);
    if odd_symmetry(&h, &auts, f) {
        return None;
    }
    let (h2, s) = relabel_sign(o, &sigma, f);
    debug_assert_eq!(h, h2);
    Some((h2, s))
}

/// The line's end-swap acts by `(-1)^m` on its univalent vertices and by
/// `(-1)^n` through the edge reversal.
pub fn line_nonzero(f: &FlavorParams) -> bool {
    f.is_hairy() && (f.m + f.n).rem_euclid(2) == 0
}

/// Canonical form of a graph in its standard orientation.
pub fn canonicalize(g: &Graph, f: &FlavorParams) -> Result<SignedCanonical> {
    g.validate(f)?;
    let o = if g.is_line() {
        Oriented::line()
    } else {
        Oriented::standard(g, f)
    };
    Ok(match canonicalize_oriented(&o, f) {
        Some((graph, s)) => SignedCanonical {
            graph,
            sign: Sign::from_i8(s),
        },
        None => {
            let graph = if g.is_line() {
                Graph::line()
            } else {
                canonical_form(g).1
            };
            SignedCanonical {
                graph,
                sign: Sign::Zero,
            }
        }
    })
}

/// Full automorphism group of a plain graph as vertex permutations.
pub fn automorphisms(g: &Graph) -> Vec<Vec<usize>> {
    let (sigma, _, auts_h) = canonical_form(g);
    let mut inv = vec![0usize; g.v];
    for (x, &y) in sigma.iter().enumerate() {
        inv[y] = x;
    }
    auts_h
        .iter()
        .map(|a| (0..g.v).map(|x| inv[a[sigma[x]]]).collect())
        .collect()
}

fn check_bijection(p: &[usize], n: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; n];
    if p.len() != n {
        return Err(HgcError::NotBijective(format!(
            "{what}: length {} != {n}",
            p.len()
        )));
    }
    for &x in p {
        if x >= n || seen[x] {
            return Err(HgcError::NotBijective(format!("{what}: {p:?}")));
        }
        seen[x] = true;
    }
    Ok(())
}

/// Transports the standard orientation of `g` along an isomorphism given by
/// a vertex permutation, an optional permutation of edge slots and of hair
/// slots, and a set of reversed edges. Returns the image graph and the sign
/// of the transported orientation relative to the image's standard one.
pub fn apply_permutation(
    g: &Graph,
    f: &FlavorParams,
    vperm: &[usize],
    eperm: Option<&[usize]>,
    hperm: Option<&[usize]>,
    flips: &[usize],
) -> Result<(Graph, i8)> {
    check_bijection(vperm, g.v, "vertex permutation")?;
    let std = Oriented::standard(g, f);
    let ne = g.edges.len();
    let nh = std.hairs.len();
    let id_e: Vec<usize> = (0..ne).collect();
    let id_h: Vec<usize> = (0..nh).collect();
    let ep = eperm.unwrap_or(&id_e);
    let hp = hperm.unwrap_or(&id_h);
    check_bijection(ep, ne, "edge permutation")?;
    check_bijection(hp, nh, "hair permutation")?;
    if let Some(&t) = flips.iter().find(|&&t| t >= ne) {
        return Err(HgcError::NotBijective(format!("flip of missing edge {t}")));
    }
    let mut edges = vec![(0u8, 0u8); ne];
    for (t, &(a, b)) in std.edges.iter().enumerate() {
        let (x, y) = (vperm[a as usize] as u8, vperm[b as usize] as u8);
        edges[ep[t]] = if flips.contains(&t) { (y, x) } else { (x, y) };
    }
    let mut hairs = vec![0u8; nh];
    for (t, &x) in std.hairs.iter().enumerate() {
        hairs[hp[t]] = vperm[x as usize] as u8;
    }
    let word = std
        .word
        .iter()
        .map(|o| match *o {
            Obj::V(x) => Obj::V(vperm[x as usize] as u16),
            Obj::E(t) => Obj::E(ep[t as usize] as u16),
            Obj::H(t) => Obj::H(hp[t as usize] as u16),
        })
        .collect();
    let moved = Oriented {
        v: g.v,
        edges,
        hairs,
        word,
    };
    let id: Vec<usize> = (0..g.v).collect();
    Ok(relabel_sign(&moved, &id, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Graph {
        Graph::new(
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            &[0; 4],
        )
    }

    #[test]
    fn triangle_key_is_relabeling_invariant() {
        let f = FlavorParams::hairy(2, 3);
        let t = Graph::new(3, &[(0, 1), (0, 2), (1, 2)], &[1, 1, 1]);
        let c = canonicalize(&t, &f).unwrap();
        for p in [[1, 2, 0], [2, 0, 1], [1, 0, 2]] {
            let (g2, _) = apply_permutation(&t, &f, &p, None, None, &[]).unwrap();
            assert_eq!(canonicalize(&g2, &f).unwrap().graph, c.graph);
        }
    }

    #[test]
    fn double_edge_vanishes_for_even_n() {
        let g = Graph::new(2, &[(0, 1), (0, 1)], &[1, 1]);
        assert_eq!(
            canonicalize(&g, &FlavorParams::hairy(1, 2)).unwrap().sign,
            Sign::Zero
        );
        // End swap: odd vertices and odd hairs both transpose.
        assert_ne!(
            canonicalize(&g, &FlavorParams::hairy(1, 3)).unwrap().sign,
            Sign::Zero
        );
        assert_eq!(
            canonicalize(&g, &FlavorParams::hairy(0, 3)).unwrap().sign,
            Sign::Zero
        );
        let (_, s) = apply_permutation(
            &g,
            &FlavorParams::hairy(1, 2),
            &[0, 1],
            Some(&[1, 0]),
            None,
            &[],
        )
        .unwrap();
        assert_eq!(s, -1);
    }

    #[test]
    fn tadpole_with_hair_vanishes_for_odd_n() {
        let g = Graph::new(1, &[(0, 0)], &[1]);
        assert_eq!(
            canonicalize(&g, &FlavorParams::hairy(0, 1).with_tadpoles()).unwrap().sign,
            Sign::Zero
        );
        assert_eq!(
            canonicalize(&g, &FlavorParams::hairy(0, 2).with_tadpoles()).unwrap().sign,
            Sign::Plus
        );
    }

    #[test]
    fn identity_and_hair_swaps() {
        let f = FlavorParams::hairy(0, 1);
        let g = Graph::new(1, &[], &[3]);
        let (_, s) = apply_permutation(&g, &f, &[0], None, None, &[]).unwrap();
        assert_eq!(s, 1);
        let (_, s) = apply_permutation(&g, &f, &[0], None, Some(&[1, 0, 2]), &[]).unwrap();
        assert_eq!(s, 1);
        let f = FlavorParams::hairy(0, 0);
        let (_, s) = apply_permutation(&g, &f, &[0], None, Some(&[1, 0, 2]), &[]).unwrap();
        assert_eq!(s, -1);
    }

    #[test]
    fn non_bijection_rejected() {
        let f = FlavorParams::hairy(0, 1);
        let g = Graph::new(2, &[(0, 1), (0, 1)], &[1, 1]);
        assert!(apply_permutation(&g, &f, &[0, 0], None, None, &[]).is_err());
    }

    #[test]
    fn k4_automorphism_group() {
        assert_eq!(automorphisms(&k4()).len(), 24);
        assert_eq!(
            canonicalize(&k4(), &FlavorParams::bald(2)).unwrap().sign,
            Sign::Plus
        );
    }

    #[test]
    fn canonical_is_idempotent() {
        let f = FlavorParams::bald(3);
        let g = Graph::new(
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            &[0; 4],
        );
        let c = canonicalize(&g, &f).unwrap();
        if c.sign != Sign::Zero {
            assert_eq!(canonicalize(&c.graph, &f).unwrap().sign, Sign::Plus);
        }
    }
}
