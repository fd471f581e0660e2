//! Graphs, flavors and gradings.
//!
//! A [`Graph`] is a connected multigraph on internal vertices `0..v` with
//! per-vertex hair counts. Hairs are stored as counts, not as explicit
//! univalent vertices. The graph with `v == 0` is the degenerate single edge
//! (two hairs joined directly), written `v=0;e=;h=LINE`.

use std::fmt;
use std::str::FromStr;

use crate::error::{HgcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(x: i64) -> Parity {
        if x.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn token(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Hairy,
    Bald,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValenceRule {
    /// Internal vertices at least trivalent (`GC`, `HGC`).
    Trivalent,
    /// Internal vertices at least bivalent (`GC2`).
    Bivalent,
}

/// Selects one of the complexes `GC_n`, `GC2_n` or `HGC_{m,n}`.
///
/// Only the parities of `m` and `n` affect signs; the integers themselves
/// enter the degree formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlavorParams {
    pub m: i64,
    pub n: i64,
    pub kind: Kind,
    pub valence: ValenceRule,
    /// Constant added to every reported degree.
    pub degree_shift: i64,
    /// Whether self-loops on internal vertices are admissible.
    pub tadpoles: bool,
}

impl FlavorParams {
    pub fn hairy(m: i64, n: i64) -> Self {
        FlavorParams {
            m,
            n,
            kind: Kind::Hairy,
            valence: ValenceRule::Trivalent,
            degree_shift: 0,
            tadpoles: false,
        }
    }

    pub fn bald(n: i64) -> Self {
        FlavorParams {
            m: 0,
            n,
            kind: Kind::Bald,
            valence: ValenceRule::Trivalent,
            degree_shift: 0,
            tadpoles: false,
        }
    }

    pub fn bald_bivalent(n: i64) -> Self {
        FlavorParams {
            m: 0,
            n,
            kind: Kind::Bald,
            valence: ValenceRule::Bivalent,
            degree_shift: 0,
            tadpoles: true,
        }
    }

    pub fn with_shift(mut self, shift: i64) -> Self {
        self.degree_shift = shift;
        self
    }

    pub fn without_tadpoles(mut self) -> Self {
        self.tadpoles = false;
        self
    }

    pub fn with_tadpoles(mut self) -> Self {
        self.tadpoles = true;
        self
    }

    /// Shift under which degrees agree with the Lie-algebra grading: `-m` for
    /// hairy flavors, `-n` for bald ones. This is the normalization the
    /// published tables use.
    pub fn with_lie_shift(self) -> Self {
        match self.kind {
            Kind::Hairy => self.with_shift(-self.m),
            Kind::Bald => self.with_shift(-self.n),
        }
    }

    pub fn m_parity(&self) -> Parity {
        Parity::of(self.m)
    }

    pub fn n_parity(&self) -> Parity {
        Parity::of(self.n)
    }

    pub fn is_hairy(&self) -> bool {
        self.kind == Kind::Hairy
    }

    pub fn min_valence(&self) -> usize {
        match self.valence {
            ValenceRule::Trivalent => 3,
            ValenceRule::Bivalent => 2,
        }
    }

    pub fn vertices_odd(&self) -> bool {
        self.n_parity().is_odd()
    }

    pub fn edges_odd(&self) -> bool {
        !self.n_parity().is_odd()
    }

    pub fn edges_directed(&self) -> bool {
        self.n_parity().is_odd()
    }

    /// A hair (its edge together with its univalent endpoint) has degree
    /// `m + 1 - n`.
    pub fn hairs_odd(&self) -> bool {
        self.is_hairy() && Parity::of(self.m + 1 - self.n).is_odd()
    }

    /// Same complex up to the degree shift.
    pub fn same_parities(&self, other: &FlavorParams) -> bool {
        self.kind == other.kind
            && self.valence == other.valence
            && self.n_parity() == other.n_parity()
            && self.tadpoles == other.tadpoles
            && (self.kind == Kind::Bald || self.m_parity() == other.m_parity())
    }

    pub fn degree(&self, vertices: usize, edges: usize, hairs: usize) -> i64 {
        let (v, e, h) = (vertices as i64, edges as i64, hairs as i64);
        self.n * v + (1 - self.n) * (e + h) + self.m * h + self.degree_shift
    }

    /// Degree of the degenerate single edge: one edge, two univalent vertices.
    pub fn line_degree(&self) -> i64 {
        2 * self.m + (1 - self.n) + self.degree_shift
    }

    pub fn token(&self) -> String {
        let rule = match self.valence {
            ValenceRule::Trivalent => "GC",
            ValenceRule::Bivalent => "GC2",
        };
        let kind = match self.kind {
            Kind::Hairy => "hairy",
            Kind::Bald => "bald",
        };
        // Tadpoles are the default only for bivalent flavors.
        let tad = match (self.tadpoles, self.valence) {
            (true, ValenceRule::Trivalent) => ",tad",
            (false, ValenceRule::Bivalent) => ",notad",
            _ => "",
        };
        format!(
            "{},{},{},{}{tad}",
            self.m_parity().token(),
            self.n_parity().token(),
            kind,
            rule
        )
    }

    pub fn dir_name(&self) -> String {
        self.token().replace(',', "_")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grading {
    pub degree: i64,
    pub hairs: usize,
    pub loops: usize,
}

/// Labeled multigraph with hair counts. Edges are stored normalized
/// (`i <= j`) and sorted; the derived ordering is the lexicographic order
/// used to pick canonical representatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    pub v: usize,
    pub edges: Vec<(u8, u8)>,
    pub hairs: Vec<u8>,
}

impl Graph {
    pub fn new(v: usize, edges: &[(u8, u8)], hairs: &[u8]) -> Self {
        let mut es: Vec<(u8, u8)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        es.sort_unstable();
        Graph {
            v,
            edges: es,
            hairs: hairs.to_vec(),
        }
    }

    pub fn line() -> Self {
        Graph {
            v: 0,
            edges: Vec::new(),
            hairs: Vec::new(),
        }
    }

    pub fn is_line(&self) -> bool {
        self.v == 0
    }

    pub fn num_hairs(&self) -> usize {
        if self.is_line() {
            2
        } else {
            self.hairs.iter().map(|&h| h as usize).sum()
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// First Betti number of the internal graph (hairs excluded).
    pub fn loops(&self) -> usize {
        if self.is_line() {
            return 0;
        }
        self.edges.len() + 1 - self.v
    }

    /// Valence: incident internal edge ends plus hairs.
    pub fn valences(&self) -> Vec<usize> {
        let mut val: Vec<usize> = self.hairs.iter().map(|&h| h as usize).collect();
        val.resize(self.v, 0);
        for &(a, b) in &self.edges {
            val[a as usize] += 1;
            val[b as usize] += 1;
        }
        val
    }

    pub fn tadpoles(&self) -> Vec<usize> {
        let mut t = vec![0; self.v];
        for &(a, b) in &self.edges {
            if a == b {
                t[a as usize] += 1;
            }
        }
        t
    }

    pub fn is_connected(&self) -> bool {
        if self.v == 0 {
            return true;
        }
        connected_without(self.v, &self.edges, None)
    }

    pub fn has_multi_edge(&self) -> bool {
        self.edges.windows(2).any(|w| w[0] == w[1])
    }

    pub fn grading(&self, f: &FlavorParams) -> Grading {
        if self.is_line() {
            return Grading {
                degree: f.line_degree(),
                hairs: 2,
                loops: 0,
            };
        }
        Grading {
            degree: f.degree(self.v, self.edges.len(), self.num_hairs()),
            hairs: self.num_hairs(),
            loops: self.loops(),
        }
    }

    /// Checks connectivity, index ranges and the valence rule of `f`.
    pub fn validate(&self, f: &FlavorParams) -> Result<()> {
        if self.is_line() {
            if !f.is_hairy() {
                return Err(HgcError::InvalidGraph("line graph in a bald flavor".into()));
            }
            if !self.edges.is_empty() || !self.hairs.is_empty() {
                return Err(HgcError::InvalidGraph("v=0 must be the bare line".into()));
            }
            return Ok(());
        }
        if self.hairs.len() != self.v {
            return Err(HgcError::InvalidGraph(format!(
                "{} hair counts for {} vertices",
                self.hairs.len(),
                self.v
            )));
        }
        if self
            .edges
            .iter()
            .any(|&(a, b)| a as usize >= self.v || b as usize >= self.v)
        {
            return Err(HgcError::InvalidGraph(format!(
                "edge index out of range in {self}"
            )));
        }
        if !f.is_hairy() && self.num_hairs() > 0 {
            return Err(HgcError::InvalidGraph(format!(
                "hairs in bald flavor: {self}"
            )));
        }
        if f.is_hairy() && self.num_hairs() == 0 {
            return Err(HgcError::InvalidGraph(format!(
                "hairy flavor needs a hair: {self}"
            )));
        }
        if !self.is_connected() {
            return Err(HgcError::InvalidGraph(format!("disconnected: {self}")));
        }
        if !f.tadpoles && self.edges.iter().any(|&(a, b)| a == b) {
            return Err(HgcError::InvalidGraph(format!(
                "tadpole not allowed: {self}"
            )));
        }
        let min = f.min_valence();
        if let Some(x) = self.valences().iter().position(|&d| d < min) {
            return Err(HgcError::InvalidGraph(format!(
                "vertex {x} has valence < {min} in {self}"
            )));
        }
        Ok(())
    }

    /// Remains connected after deleting any one vertex.
    pub fn is_one_vertex_irreducible(&self) -> bool {
        if !self.is_connected() {
            return false;
        }
        (0..self.v).all(|x| connected_without(self.v, &self.edges, Some(x)))
    }
}

/// Connectivity of the vertex set `0..v` (minus `skip`) under `edges`.
pub(crate) fn connected_without(v: usize, edges: &[(u8, u8)], skip: Option<usize>) -> bool {
    let live = v - usize::from(skip.is_some());
    if live <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..v).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let mut comps = live;
    for &(a, b) in edges {
        let (a, b) = (a as usize, b as usize);
        if Some(a) == skip || Some(b) == skip {
            continue;
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_line() {
            return write!(f, "v=0;e=;h=LINE");
        }
        write!(f, "v={};e=", self.v)?;
        for (i, (a, b)) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        write!(f, ";h=")?;
        for (i, h) in self.hairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{h}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = HgcError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || HgcError::Parse(format!("malformed graph line '{s}'"));
        let mut parts = s.trim().split(';');
        let v: usize = parts
            .next()
            .and_then(|p| p.strip_prefix("v="))
            .and_then(|p| p.parse().ok())
            .ok_or_else(bad)?;
        let e = parts
            .next()
            .and_then(|p| p.strip_prefix("e="))
            .ok_or_else(bad)?;
        let h = parts
            .next()
            .and_then(|p| p.strip_prefix("h="))
            .ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        if v == 0 {
            return if e.is_empty() && h == "LINE" {
                Ok(Graph::line())
            } else {
                Err(bad())
            };
        }
        let mut edges = Vec::new();
        if !e.is_empty() {
            for tok in e.split(',') {
                let (a, b) = tok.split_once('-').ok_or_else(bad)?;
                edges.push((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?));
            }
        }
        let hairs = h
            .split(',')
            .map(|x| x.parse::<u8>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if hairs.len() != v {
            return Err(bad());
        }
        Ok(Graph::new(v, &edges, &hairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradings_of_small_graphs() {
        let f = FlavorParams::hairy(2, 2);
        let line = Graph::line();
        assert_eq!(line.grading(&f).hairs, 2);
        assert_eq!(line.grading(&f).loops, 0);
        let tripod = Graph::new(1, &[], &[3]);
        assert_eq!(tripod.grading(&f).loops, 0);
        let tad = Graph::new(1, &[(0, 0)], &[1]);
        assert_eq!(tad.grading(&f).loops, 1);
        assert_eq!(tad.grading(&f).hairs, 1);
    }

    #[test]
    fn encoding_roundtrip() {
        let g = Graph::new(3, &[(1, 2), (0, 1), (0, 2)], &[1, 1, 1]);
        assert_eq!(g.to_string(), "v=3;e=0-1,0-2,1-2;h=1,1,1");
        assert_eq!(g.to_string().parse::<Graph>().unwrap(), g);
        assert_eq!("v=0;e=;h=LINE".parse::<Graph>().unwrap(), Graph::line());
        assert!("v=2;e=0-1".parse::<Graph>().is_err());
    }

    #[test]
    fn validation_rejects_bad_graphs() {
        let f = FlavorParams::hairy(0, 2);
        assert!(Graph::new(2, &[(0, 1)], &[1, 2]).validate(&f).is_err());
        assert!(Graph::new(2, &[], &[3, 3]).validate(&f).is_err());
        assert!(Graph::new(1, &[], &[3]).validate(&f).is_ok());
        assert!(Graph::new(1, &[], &[3])
            .validate(&FlavorParams::bald(2))
            .is_err());
    }

    #[test]
    fn one_vertex_irreducibility() {
        let k4 = Graph::new(
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            &[0; 4],
        );
        assert!(k4.is_one_vertex_irreducible());
        let bowtie = Graph::new(
            5,
            &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)],
            &[0; 5],
        );
        assert!(!bowtie.is_one_vertex_irreducible());
        assert!(Graph::new(2, &[(0, 1), (0, 1)], &[0, 0]).is_one_vertex_irreducible());
    }

    #[test]
    fn hair_parity_by_flavor() {
        assert!(FlavorParams::hairy(2, 2).hairs_odd());
        assert!(!FlavorParams::hairy(2, 3).hairs_odd());
        assert!(!FlavorParams::hairy(1, 2).hairs_odd());
        assert!(FlavorParams::hairy(1, 3).hairs_odd());
    }
}
