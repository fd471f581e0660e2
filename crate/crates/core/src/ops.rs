//! Graph operators on linear combinations.
//!
//! Every operator acts on a graph in its standard orientation and edits the
//! orientation word directly:
//!
//! * splitting a vertex `x` keeps `x`, adds a new vertex `y` and an edge
//!   `x -> y`, and prepends the new odd object (`y` for odd `n`, the edge for
//!   even `n`);
//! * a new hair is prepended when hairs are odd;
//! * turning a hair into an edge keeps its word slot when both have the same
//!   parity; otherwise the odd one is prepended or removed from the front;
//! * deleting an odd vertex first moves it to the front of the word.
//!
//! Hairy graphs with even `m` are read as graphs with one external vertex
//! that all hairs end on. Splitting that external vertex gives the extra
//! terms of the deformed differential `D`.

use num_traits::Zero;

use crate::canon::{Obj, Oriented};
use crate::error::{HgcError, Result};
use crate::graph::{FlavorParams, Graph, Kind};
use crate::lincomb::{q, q_frac, LinComb, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Half {
    Tail(usize),
    Head(usize),
    Hair(usize),
}

fn halves_at(o: &Oriented, x: u8) -> Vec<Half> {
    let mut hs = Vec::new();
    for (t, &(a, b)) in o.edges.iter().enumerate() {
        if a == x {
            hs.push(Half::Tail(t));
        }
        if b == x {
            hs.push(Half::Head(t));
        }
    }
    for (t, &h) in o.hairs.iter().enumerate() {
        if h == x {
            hs.push(Half::Hair(t));
        }
    }
    hs
}

fn prepend(o: &mut Oriented, obj: Obj) {
    o.word.insert(0, obj);
}

fn word_pos(o: &Oriented, obj: Obj) -> usize {
    o.word.iter().position(|&w| w == obj).expect("object missing from orientation word")
}

/// Moves `obj` to the front of the word and drops it; returns the sign.
fn remove_front(o: &mut Oriented, obj: Obj) -> i8 {
    let p = word_pos(o, obj);
    o.word.remove(p);
    if p % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Removes hairs whose `dead` flag is set, renumbering the survivors. Dead
/// hairs must already be absent from the word.
fn compact_hairs(o: &mut Oriented, dead: &[bool]) {
    let mut map = vec![usize::MAX; o.hairs.len()];
    let mut kept = Vec::new();
    for (t, &x) in o.hairs.iter().enumerate() {
        if !dead[t] {
            map[t] = kept.len();
            kept.push(x);
        }
    }
    o.hairs = kept;
    for w in o.word.iter_mut() {
        if let Obj::H(t) = *w {
            debug_assert!(map[t as usize] != usize::MAX);
            *w = Obj::H(map[t as usize] as u16);
        }
    }
}

/// Removes vertex `x`, which must have no incident edges or hairs left.
/// Returns the sign of removing it from the word.
fn drop_vertex(o: &mut Oriented, x: u8, f: &FlavorParams) -> i8 {
    let mut sign = 1;
    if f.vertices_odd() {
        sign = remove_front(o, Obj::V(x as u16));
    }
    let shift = |y: u8| if y > x { y - 1 } else { y };
    for e in o.edges.iter_mut() {
        *e = (shift(e.0), shift(e.1));
    }
    for h in o.hairs.iter_mut() {
        *h = shift(*h);
    }
    for w in o.word.iter_mut() {
        if let Obj::V(y) = *w {
            if y as u8 > x {
                *w = Obj::V(y - 1);
            }
        }
    }
    o.v -= 1;
    sign
}

/// Adds a hair at `x`.
fn add_hair(o: &mut Oriented, x: u8, f: &FlavorParams) {
    o.hairs.push(x);
    if f.hairs_odd() {
        prepend(o, Obj::H((o.hairs.len() - 1) as u16));
    }
}

/// Adds a new vertex (prepended when odd) and returns its label.
fn add_vertex(o: &mut Oriented, f: &FlavorParams) -> u8 {
    let y = o.v as u8;
    o.v += 1;
    if f.vertices_odd() {
        prepend(o, Obj::V(y as u16));
    }
    y
}

/// Adds an edge `a -> b` (prepended when odd).
fn add_edge(o: &mut Oriented, a: u8, b: u8, f: &FlavorParams) {
    o.edges.push((a, b));
    if f.edges_odd() {
        prepend(o, Obj::E((o.edges.len() - 1) as u16));
    }
}

/// Turns hair `t` into an edge from its vertex to `target`, in a flavor with
/// the given `m` parity. The hair is not removed from `hairs`; the caller
/// compacts. Returns the sign.
fn hair_to_edge(o: &mut Oriented, t: usize, target: u8, f: &FlavorParams) -> i8 {
    let a = o.hairs[t];
    o.edges.push((a, target));
    let e = Obj::E((o.edges.len() - 1) as u16);
    let h = Obj::H(t as u16);
    match (f.hairs_odd(), f.edges_odd()) {
        (true, true) => {
            let p = word_pos(o, h);
            o.word[p] = e;
            1
        }
        (false, false) => 1,
        (true, false) => remove_front(o, h),
        (false, true) => {
            prepend(o, e);
            -1
        }
    }
}

fn admissible_push(out: &mut LinComb, o: &Oriented, c: &Q, sign: i8) {
    if !o.admissible(&out.flavor) {
        return;
    }
    let c = if sign < 0 { -c.clone() } else { c.clone() };
    out.add_oriented(o, c);
}

fn source_orientation(g: &Graph, f: &FlavorParams) -> Oriented {
    if g.is_line() {
        Oriented::line()
    } else {
        Oriented::standard(g, f)
    }
}

/// Splits vertex `x` with `k` edges between the two halves, over all
/// ordered assignments of the incident half-edges. Emits each result with
/// weight 1/2.
fn splits(o: &Oriented, x: u8, k: usize, f: &FlavorParams, emit: &mut dyn FnMut(Oriented, Q, i8)) {
    let hs = halves_at(o, x);
    let half = q_frac(1, 2);
    for mask in 0u32..(1u32 << hs.len()) {
        let mut r = o.clone();
        let y = r.v as u8;
        r.v += 1;
        for (i, h) in hs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                match *h {
                    Half::Tail(t) => r.edges[t].0 = y,
                    Half::Head(t) => r.edges[t].1 = y,
                    Half::Hair(t) => r.hairs[t] = y,
                }
            }
        }
        for _ in 0..k {
            r.edges.push((x, y));
            if f.edges_odd() {
                let e = Obj::E((r.edges.len() - 1) as u16);
                prepend(&mut r, e);
            }
        }
        if f.vertices_odd() {
            prepend(&mut r, Obj::V(y as u16));
        }
        emit(r, half.clone(), 1);
    }
}

/// Splits the external vertex: hairs with a set bit in `mask` move to a new
/// internal vertex `w` (becoming edges to it), and `k` new hairs join `w` to
/// the external vertex.
fn external_split(o: &Oriented, mask: u64, k: usize, f: &FlavorParams) -> (Oriented, i8) {
    let mut r = o.clone();
    let w = r.v as u8;
    r.v += 1;
    let mut sign = 1i8;
    let nh = r.hairs.len();
    let mut dead = vec![false; nh];
    for (t, d) in dead.iter_mut().enumerate() {
        if mask >> t & 1 == 1 {
            sign *= hair_to_edge(&mut r, t, w, f);
            *d = true;
        }
    }
    compact_hairs(&mut r, &dead);
    for _ in 0..k {
        add_hair(&mut r, w, f);
        if f.edges_directed() {
            sign = -sign;
        }
    }
    if f.vertices_odd() {
        prepend(&mut r, Obj::V(w as u16));
    }
    (r, sign)
}

fn map_terms(
    x: &LinComb,
    target: FlavorParams,
    mut body: impl FnMut(&Oriented, &Q, &mut LinComb),
) -> LinComb {
    let mut out = LinComb::zero(target);
    for (g, c) in x.iter() {
        let o = source_orientation(g, &x.flavor);
        body(&o, c, &mut out);
    }
    out
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(HgcError::FlavorMismatch(msg.into()))
    }
}

/// The vertex-splitting differential. On bald flavors this is
/// `sum_x (1/2 s_x - a_x)`; the antenna terms are exactly the splittings
/// with a univalent half and are left out.
pub fn delta(x: &LinComb) -> LinComb {
    let f = x.flavor;
    map_terms(x, f, |o, c, out| {
        for v in 0..o.v as u8 {
            splits(o, v, 1, &f, &mut |r, w, s| admissible_push(out, &r, &(c * w), s));
        }
    })
}

/// Adds one edge between two distinct vertices, in all ways.
pub fn nabla(x: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(f.kind == Kind::Bald && !f.n_parity().is_odd(), "nabla needs a bald flavor with even n")?;
    Ok(map_terms(x, f, |o, c, out| {
        for a in 0..o.v as u8 {
            for b in a + 1..o.v as u8 {
                let mut r = o.clone();
                add_edge(&mut r, a, b, &f);
                admissible_push(out, &r, c, 1);
            }
        }
    }))
}

/// Ways of attaching `k` items to `targets` slots, with multiplicity. Even
/// items are interchangeable, so only sorted tuples are produced, weighted by
/// the multinomial count; odd items are enumerated in every order.
fn assignments(k: usize, targets: usize, odd: bool) -> Vec<(Vec<usize>, i64)> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let lo = if odd { 0 } else { p.last().copied().unwrap_or(0) };
                (lo..targets).map(move |t| {
                    let mut p = p.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|p| {
            if odd {
                return (p, 1);
            }
            let mut w = factorial(k);
            let mut i = 0;
            while i < p.len() {
                let j = p[i..].iter().take_while(|&&t| t == p[i]).count();
                w /= factorial(j);
                i += j;
            }
            (p, w)
        })
        .collect()
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// The bracket with the `(2k+1)`-fold two-vertex multi-edge: vertex
/// substitution at every vertex plus attaching a new vertex through `2k+1`
/// edges, before admissibility filtering. With `k = 0` it reproduces
/// [`delta`] on bald graphs.
pub fn theta_term(x: &LinComb, k: usize) -> LinComb {
    let f = x.flavor;
    let edges = 2 * k + 1;
    map_terms(x, f, |o, c, out| {
        let mut raw = LinComb::zero(f);
        for v in 0..o.v as u8 {
            splits(o, v, edges, &f, &mut |r, w, s| {
                let cc = if s < 0 { -(c * w) } else { c * w };
                raw.add_oriented(&r, cc);
            });
        }
        for (targets, mult) in assignments(edges, o.v, f.edges_odd()) {
            let mut r = o.clone();
            let cv = add_vertex(&mut r, &f);
            for &t in &targets {
                add_edge(&mut r, cv, t as u8, &f);
            }
            raw.add_oriented(&r, c * q(mult));
        }
        for (g, d) in raw.iter() {
            if g.validate(&f).is_ok() {
                out.add_canonical(g.clone(), d.clone());
            }
        }
    })
}

/// Truncation window for operators given by infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Window {
    pub max_hairs: Option<usize>,
    pub max_loops: Option<usize>,
}

impl Window {
    pub fn loops(max_loops: usize) -> Self {
        Window { max_hairs: None, max_loops: Some(max_loops) }
    }

    pub fn hairs(max_hairs: usize) -> Self {
        Window { max_hairs: Some(max_hairs), max_loops: None }
    }
}

/// `delta + sum_{k>=1} 1/(2k+1)! [Theta_k, .]`, keeping every term whose
/// loop order stays within the window.
pub fn delta_theta(x: &LinComb, window: Window) -> Result<LinComb> {
    let f = x.flavor;
    require(f.kind == Kind::Bald && f.n_parity().is_odd(), "delta_theta needs a bald flavor with odd n")?;
    let lmax = window
        .max_loops
        .ok_or_else(|| HgcError::Window("delta_theta needs a loop window".into()))?;
    let mut out = delta(x);
    let base = x.iter().map(|(g, _)| g.loops()).min().unwrap_or(0);
    let mut k = 1;
    while base + 2 * k <= lmax {
        let t = theta_term(x, k);
        let w = q_frac(THETA_SIGN, factorial(2 * k + 1));
        for (g, d) in t.iter() {
            if g.loops() <= lmax {
                out.add_canonical(g.clone(), d * &w);
            }
        }
        k += 1;
    }
    Ok(out)
}

/// Relative sign of the Theta terms against `delta`.
const THETA_SIGN: i64 = 1;

/// Extra terms of `D`: hairs in a subset `S` (|S| >= 2) are joined to a new
/// vertex carrying one new hair.
pub fn d_extra(x: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(f.is_hairy() && !f.m_parity().is_odd(), "D needs a hairy flavor with even m")?;
    Ok(map_terms(x, f, |o, c, out| {
        if o.is_line() {
            return;
        }
        let nh = o.hairs.len();
        for mask in 0u64..(1u64 << nh) {
            if mask.count_ones() < 2 {
                continue;
            }
            let (r, s) = external_split(o, mask, 1, &f);
            admissible_push(out, &r, c, s * D_SIGN);
        }
    }))
}

/// Relative sign of the external-vertex terms of `D` against `delta`.
const D_SIGN: i8 = 1;

/// The deformed differential `D = delta + (extra terms)` on even-`m` hairy
/// graphs.
pub fn big_d(x: &LinComb) -> Result<LinComb> {
    delta(x).add(&d_extra(x)?)
}

/// Reconnects one hair to a vertex other than its own (odd `m`).
pub fn delta_odd(x: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(f.is_hairy() && f.m_parity().is_odd(), "Delta needs a hairy flavor with odd m")?;
    Ok(map_terms(x, f, |o, c, out| {
        if o.is_line() || o.hairs.len() < 2 {
            return;
        }
        for t in 0..o.hairs.len() {
            for b in 0..o.v as u8 {
                if b == o.hairs[t] {
                    continue;
                }
                let mut r = o.clone();
                let s = hair_to_edge(&mut r, t, b, &f);
                let mut dead = vec![false; r.hairs.len()];
                dead[t] = true;
                compact_hairs(&mut r, &dead);
                admissible_push(out, &r, c, s * DELTA_ODD_SIGN);
            }
        }
    }))
}

const DELTA_ODD_SIGN: i8 = 1;

/// Number of odd objects in the orientation word, mod 2.
fn word_parity(g: &Graph, f: &FlavorParams) -> i64 {
    let d = if g.is_line() {
        2 * f.m + 1 - f.n
    } else {
        f.n * g.v as i64 + (1 - f.n) * (g.edges.len() + g.num_hairs()) as i64 + f.m * g.num_hairs() as i64
    };
    d.rem_euclid(2)
}

fn disjoint_union(a: &Oriented, b: &Oriented) -> Oriented {
    let off_v = a.v as u8;
    let off_e = a.edges.len() as u16;
    let off_h = a.hairs.len() as u16;
    let mut r = a.clone();
    r.v += b.v;
    r.edges.extend(b.edges.iter().map(|&(x, y)| (x + off_v, y + off_v)));
    r.hairs.extend(b.hairs.iter().map(|&x| x + off_v));
    r.word.extend(b.word.iter().map(|w| match *w {
        Obj::V(x) => Obj::V(x + off_v as u16),
        Obj::E(t) => Obj::E(t + off_e),
        Obj::H(t) => Obj::H(t + off_h),
    }));
    r
}

/// Sum over attaching one hair of `a` to an internal vertex of `b`.
fn attach(a: &Oriented, b: &Oriented, c: &Q, f: &FlavorParams, out: &mut LinComb) {
    if a.is_line() || b.is_line() {
        return;
    }
    let u = disjoint_union(a, b);
    for t in 0..a.hairs.len() {
        for y in 0..b.v {
            let mut r = u.clone();
            let s = hair_to_edge(&mut r, t, (a.v + y) as u8, f);
            let mut dead = vec![false; r.hairs.len()];
            dead[t] = true;
            compact_hairs(&mut r, &dead);
            admissible_push(out, &r, c, s);
        }
    }
}

/// Lie bracket of hairy graphs: attach a hair of the first to a vertex of
/// the second, minus the swapped attachment with sign
/// `(-1)^(|w_x| |w_y| + m)` for orientation words `w`. The degenerate line contributes
/// through its hairs only, so `[line, g]` adds one hair at each vertex.
pub fn bracket(x: &LinComb, y: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(f.is_hairy(), "bracket needs a hairy flavor")?;
    require(f.same_parities(&y.flavor), "bracket operands differ in flavor")?;
    let mut out = LinComb::zero(f);
    for (g, c) in x.iter() {
        for (h, d) in y.iter() {
            let cd = c * d;
            let e = word_parity(g, &f) * word_parity(h, &f) + f.m;
            let swap = if e.rem_euclid(2) == 1 { q(1) } else { q(-1) };
            let og = source_orientation(g, &f);
            let oh = source_orientation(h, &f);
            if g.is_line() {
                attach_line(&oh, &cd, &f, &mut out);
            } else {
                attach(&og, &oh, &cd, &f, &mut out);
            }
            if h.is_line() {
                attach_line(&og, &(&cd * &swap), &f, &mut out);
            } else {
                attach(&oh, &og, &(&cd * &swap), &f, &mut out);
            }
        }
    }
    Ok(out)
}

/// Attaching either end of the line to a vertex adds a hair there.
fn attach_line(o: &Oriented, c: &Q, f: &FlavorParams, out: &mut LinComb) {
    if o.is_line() {
        return;
    }
    for y in 0..o.v as u8 {
        let mut r = o.clone();
        add_hair(&mut r, y, f);
        admissible_push(out, &r, &(c * q(2)), 1);
    }
}

/// `[h0, x]` with `h0` the line graph.
pub fn h0_twist(x: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(f.is_hairy() && f.m_parity() == f.n_parity(), "h0 twist needs HGC_{n,n}")?;
    let h0 = LinComb::single(f, Graph::line(), q(1));
    bracket(&h0, x)
}

/// `(2k+1)`-hair hedgehog.
pub fn hedgehog(f: FlavorParams, hairs: usize) -> LinComb {
    LinComb::from_graph(f, &Graph::new(1, &[], &[hairs as u8]))
}

/// `h1 = sum_{k>=1} 1/(2k+1)! hedgehog(2k+1)` truncated to `max_hairs`.
pub fn h1_element(f: FlavorParams, max_hairs: usize) -> LinComb {
    let mut out = LinComb::zero(f);
    let mut k = 1;
    while 2 * k + 1 <= max_hairs {
        out.add_assign_scaled(&hedgehog(f, 2 * k + 1), &q_frac(1, factorial(2 * k + 1))).unwrap();
        k += 1;
    }
    out
}

/// `[h1, x]` keeping every term with at most `window.max_hairs` hairs.
pub fn h1_twist(x: &LinComb, window: Window) -> Result<LinComb> {
    let f = x.flavor;
    require(
        f.is_hairy() && f.m_parity() != f.n_parity(),
        "h1 twist needs HGC_{n-1,n}",
    )?;
    let hmax = window
        .max_hairs
        .ok_or_else(|| HgcError::Window("h1 twist needs a hair window".into()))?;
    let base = x.iter().map(|(g, _)| g.num_hairs()).min().unwrap_or(0);
    let mut out = LinComb::zero(f);
    let mut k = 1;
    while base + 2 * k <= hmax {
        let hk = hedgehog(f, 2 * k + 1).scale(&q_frac(1, factorial(2 * k + 1)));
        let t = bracket(&hk, x)?;
        for (g, d) in t.iter() {
            if g.num_hairs() <= hmax {
                out.add_canonical(g.clone(), d.clone());
            }
        }
        k += 1;
    }
    Ok(out)
}

/// Hairy flavor `HGC_{m,n}` receiving bald graphs of `GC_n`.
fn hairy_target(bald: &FlavorParams, m: i64) -> FlavorParams {
    let mut t = FlavorParams::hairy(m, bald.n);
    t.tadpoles = bald.tadpoles;
    t
}

/// Adds one hair at every vertex in turn.
pub fn f_map(x: &LinComb, m: i64) -> Result<LinComb> {
    let f = x.flavor;
    require(f.kind == Kind::Bald, "F needs a bald input")?;
    let t = hairy_target(&f, m);
    Ok(map_terms(x, t, |o, c, out| {
        for y in 0..o.v as u8 {
            let mut r = o.clone();
            add_hair(&mut r, y, &t);
            admissible_push(out, &r, c, 1);
        }
    }))
}

/// `sum_k 1/(2k+1)! (attach 2k+1 hairs in all ways)` up to `window.max_hairs`.
pub fn f_prime(x: &LinComb, m: i64, window: Window) -> Result<LinComb> {
    let f = x.flavor;
    require(f.kind == Kind::Bald && f.n_parity().is_odd(), "F' needs a bald input with odd n")?;
    let hmax = window
        .max_hairs
        .ok_or_else(|| HgcError::Window("F' needs a hair window".into()))?;
    let t = hairy_target(&f, m);
    Ok(map_terms(x, t, |o, c, out| {
        let mut k = 0;
        while 2 * k + 1 <= hmax {
            let w = c * q_frac(1, factorial(2 * k + 1));
            for (targets, mult) in assignments(2 * k + 1, o.v, t.hairs_odd()) {
                let mut r = o.clone();
                for &y in &targets {
                    add_hair(&mut r, y as u8, &t);
                }
                admissible_push(out, &r, &(&w * q(mult)), 1);
            }
            k += 1;
        }
    }))
}

/// `gamma -> gamma_1`: delete each vertex in turn, its edges becoming hairs
/// on the neighbours. A tadpole at the deleted vertex kills the term.
pub fn vertex_delete(x: &LinComb) -> Result<LinComb> {
    for (g, _) in x.iter() {
        if !g.is_one_vertex_irreducible() {
            return Err(HgcError::NotOneVertexIrreducible(g.to_string()));
        }
    }
    vertex_delete_any(x)
}

/// [`vertex_delete`] without the irreducibility check; disconnected results
/// are dropped.
pub fn vertex_delete_any(x: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(f.kind == Kind::Bald, "vertex deletion needs a bald input")?;
    let t = hairy_target(&f, 0);
    Ok(map_terms(x, t, |o, c, out| {
        for v in 0..o.v as u8 {
            if o.edges.iter().any(|&(a, b)| a == v && b == v) {
                continue;
            }
            let mut r = o.clone();
            let mut sign = 1i8;
            let mut keep = Vec::new();
            let mut new_word_edge = vec![None; r.edges.len()];
            for (e, &(a, b)) in r.edges.iter().enumerate() {
                if a == v || b == v {
                    let other = if a == v { b } else { a };
                    if t.edges_directed() && a == v {
                        sign = -sign;
                    }
                    new_word_edge[e] = Some(r.hairs.len());
                    r.hairs.push(other);
                } else {
                    keep.push(e);
                }
            }
            let mut emap = vec![usize::MAX; r.edges.len()];
            for (i, &e) in keep.iter().enumerate() {
                emap[e] = i;
            }
            r.edges = keep.iter().map(|&e| r.edges[e]).collect();
            for w in r.word.iter_mut() {
                if let Obj::E(e) = *w {
                    *w = match new_word_edge[e as usize] {
                        Some(h) => Obj::H(h as u16),
                        None => Obj::E(emap[e as usize] as u16),
                    };
                }
            }
            sign *= drop_vertex(&mut r, v, &t);
            admissible_push(out, &r, c, sign);
        }
    }))
}

/// Twist terms of `D~` for even `n`: one new edge between distinct internal
/// vertices, or one new hair.
pub fn mu_twist(x: &LinComb) -> Result<LinComb> {
    let f = x.flavor;
    require(
        f.is_hairy() && !f.m_parity().is_odd() && !f.n_parity().is_odd(),
        "mu twist needs HGC_{0,n} with even n",
    )?;
    Ok(map_terms(x, f, |o, c, out| {
        if o.is_line() {
            return;
        }
        for a in 0..o.v as u8 {
            for b in a + 1..o.v as u8 {
                let mut r = o.clone();
                add_edge(&mut r, a, b, &f);
                admissible_push(out, &r, c, 1);
            }
            let mut r = o.clone();
            add_hair(&mut r, a, &f);
            admissible_push(out, &r, c, MU_HAIR_SIGN);
        }
    }))
}

const MU_HAIR_SIGN: i8 = 1;

/// `(2k+1)`-fold multi-edge insertion read through the one-external-vertex
/// picture, before admissibility filtering: internal splittings, splittings
/// of the external vertex, and a new vertex joined by `2k+1` edges to any
/// vertices (edges to the external vertex are hairs).
pub fn theta_term_external(x: &LinComb, k: usize) -> LinComb {
    let f = x.flavor;
    let edges = 2 * k + 1;
    map_terms(x, f, |o, c, out| {
        if o.is_line() {
            return;
        }
        let mut raw = Vec::<(Oriented, Q)>::new();
        for v in 0..o.v as u8 {
            splits(o, v, edges, &f, &mut |r, w, s| {
                let cc = if s < 0 { -(c * w) } else { c * w };
                raw.push((r, cc));
            });
        }
        let nh = o.hairs.len();
        for mask in 0u64..(1u64 << nh) {
            let (r, s) = external_split(o, mask, edges, &f);
            raw.push((r, if s < 0 { -c.clone() } else { c.clone() }));
        }
        let odd = f.edges_odd() || f.hairs_odd();
        for (targets, mult) in assignments(edges, o.v + 1, odd) {
            let mut r = o.clone();
            let cv = add_vertex(&mut r, &f);
            for &t in &targets {
                if t == o.v {
                    add_hair(&mut r, cv, &f);
                } else {
                    add_edge(&mut r, cv, t as u8, &f);
                }
            }
            raw.push((r, c * q(mult)));
        }
        for (r, cc) in raw {
            if r.admissible(&f) {
                out.add_oriented(&r, cc);
            }
        }
    })
}

/// `D~` on `HGC_{0,n}`: `D` plus the tadpole twist (even `n`) or the Theta
/// twist (odd `n`, truncated to the loop window of the image graphs, i.e.
/// `loops + hairs - 1`).
pub fn d_tilde(x: &LinComb, window: Window) -> Result<LinComb> {
    let f = x.flavor;
    require(f.is_hairy() && !f.m_parity().is_odd(), "D~ needs a hairy flavor with even m")?;
    let mut out = big_d(x)?;
    if !f.n_parity().is_odd() {
        return out.add(&mu_twist(x)?);
    }
    let lmax = window
        .max_loops
        .ok_or_else(|| HgcError::Window("D~ with odd n needs a loop window".into()))?;
    let image = |g: &Graph| g.loops() + g.num_hairs() - 1;
    let base = x.iter().map(|(g, _)| image(g)).min().unwrap_or(0);
    let mut k = 1;
    while base + 2 * k <= lmax {
        let t = theta_term_external(x, k);
        let w = q_frac(THETA_SIGN, factorial(2 * k + 1));
        for (g, d) in t.iter() {
            if image(g) <= lmax {
                out.add_canonical(g.clone(), d * &w);
            }
        }
        k += 1;
    }
    Ok(out)
}

pub fn is_zero_all(xs: &[LinComb]) -> bool {
    xs.iter().all(|x| x.iter().all(|(_, c)| c.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: usize, e: &[(u8, u8)], h: &[u8]) -> Graph {
        Graph::new(v, e, h)
    }

    #[test]
    fn tripod_and_line_are_cocycles() {
        for (m, n) in [(0, 1), (1, 2), (0, 3)] {
            let f = FlavorParams::hairy(m, n);
            assert!(delta(&LinComb::from_graph(f, &g(1, &[], &[3]))).is_zero());
        }
        let f = FlavorParams::hairy(2, 2);
        assert!(delta(&LinComb::single(f, Graph::line(), q(1))).is_zero());
    }

    #[test]
    fn one_hair_graphs_have_no_extra_d_terms() {
        let f = FlavorParams::hairy(0, 2);
        let x = LinComb::from_graph(f, &g(2, &[(0, 1), (0, 1), (0, 1)], &[1, 0]));
        assert!(d_extra(&x).unwrap().is_zero());
    }

    #[test]
    fn delta_odd_kills_one_hair_and_single_vertex() {
        let f = FlavorParams::hairy(1, 3);
        let x = LinComb::from_graph(f, &g(2, &[(0, 1), (0, 1), (0, 1)], &[1, 0]));
        assert!(delta_odd(&x).unwrap().is_zero());
        let f = FlavorParams::hairy(1, 2);
        let y = LinComb::from_graph(f, &g(1, &[(0, 0)], &[2]));
        assert!(delta_odd(&y).unwrap().is_zero());
    }

    #[test]
    fn nabla_on_tadpole_vanishes() {
        let f = FlavorParams::bald_bivalent(0);
        let mu = LinComb::from_graph(f, &g(1, &[(0, 0)], &[0]));
        assert!(nabla(&mu).unwrap().is_zero());
    }

    #[test]
    fn flavor_checks() {
        let f = FlavorParams::hairy(1, 2);
        assert!(big_d(&LinComb::zero(f)).is_err());
        assert!(delta_odd(&LinComb::zero(FlavorParams::hairy(0, 2))).is_err());
        assert!(nabla(&LinComb::zero(FlavorParams::bald(1))).is_err());
        assert!(h1_twist(&LinComb::zero(FlavorParams::hairy(1, 2)), Window::default()).is_err());
    }

    fn image_loops_at_most(x: LinComb, l: usize) -> LinComb {
        let mut z = LinComb::zero(x.flavor);
        for (g, c) in x.iter() {
            let il = if g.num_hairs() > 0 { g.loops() + g.num_hairs() - 1 } else { g.loops() };
            if il <= l {
                z.add_canonical(g.clone(), c.clone());
            }
        }
        z
    }

    fn trivalent_1vi(f: &FlavorParams, l: usize) -> Vec<LinComb> {
        let mut out = Vec::new();
        for v in 1..=2 * (l - 1) {
            for gr in crate::enumerate::graphs_with_vertices(f, 0, l, v) {
                if gr.is_one_vertex_irreducible() {
                    let x = LinComb::from_graph(*f, &gr);
                    if !x.is_zero() {
                        out.push(x);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn delta_and_big_d_square_to_zero() {
        for n in 0..4 {
            let f = FlavorParams::hairy(0, n);
            for (h, l) in [(2, 1), (3, 1), (2, 2), (1, 2)] {
                for v in 1..=4 {
                    for gr in crate::enumerate::graphs_with_vertices(&f, h, l, v) {
                        let x = LinComb::from_graph(f, &gr);
                        assert!(delta(&delta(&x)).is_zero(), "delta^2 on {gr}");
                        assert!(big_d(&big_d(&x).unwrap()).unwrap().is_zero(), "D^2 on {gr}");
                    }
                }
            }
        }
    }

    #[test]
    fn vertex_deletion_intertwines_delta_and_d() {
        for n in 0..4 {
            let f = FlavorParams::bald(n);
            let sign = if n.rem_euclid(2) == 1 { -1 } else { 1 };
            for l in 2..=3 {
                for x in trivalent_1vi(&f, l) {
                    let lhs = vertex_delete_any(&delta(&x)).unwrap();
                    let d1 = big_d(&vertex_delete(&x).unwrap()).unwrap().scale(&q(sign));
                    let rhs = d1.sub(&f_map(&x, 0).unwrap()).unwrap();
                    assert_eq!(lhs, rhs, "n={n} on {x}");
                }
            }
        }
    }

    #[test]
    fn vertex_deletion_intertwines_twisted_differentials() {
        for n in 0..4 {
            let f = FlavorParams::bald(n);
            for l in 2..=3 {
                let lmax = l + 2;
                for x in trivalent_1vi(&f, l) {
                    let lhs = image_loops_at_most(
                        d_tilde(&vertex_delete(&x).unwrap(), Window::loops(lmax)).unwrap(),
                        lmax,
                    );
                    let rhs = if n.rem_euclid(2) == 0 {
                        let inner = delta(&x).add(&nabla(&x).unwrap()).unwrap();
                        vertex_delete_any(&inner).unwrap().add(&f_map(&x, 0).unwrap()).unwrap()
                    } else {
                        let inner = delta_theta(&x, Window::loops(lmax)).unwrap();
                        let fp = f_prime(&x, 0, Window::hairs(lmax - l + 1)).unwrap();
                        vertex_delete_any(&inner).unwrap().neg().sub(&fp).unwrap()
                    };
                    assert_eq!(lhs, image_loops_at_most(rhs, lmax), "n={n} on {x}");
                }
            }
        }
    }
}
