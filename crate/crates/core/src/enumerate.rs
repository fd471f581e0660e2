//! Bases of canonical, nonzero graphs per grading.
//!
//! Generation runs over vertex counts; for each count it enumerates sorted
//! (valence, hairs) sequences, fills in edge multiplicities vertex by vertex,
//! and deduplicates by canonical form.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;

use crate::canon::{canonicalize_oriented, line_nonzero, Oriented};
use crate::error::{HgcError, Result};
use crate::graph::{FlavorParams, Grading, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_v: usize,
    pub max_e: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_v: 14,
            max_e: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    pub caps: Caps,
    /// Include the degenerate single-edge graph at (hairs 2, loops 0).
    pub include_line: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            caps: Caps::default(),
            include_line: true,
        }
    }
}

impl GenOptions {
    pub fn without_line(mut self) -> Self {
        self.include_line = false;
        self
    }

    pub fn with_max_v(mut self, max_v: usize) -> Self {
        self.caps.max_v = max_v;
        self
    }
}

/// Ordered basis of one grading. The order defines matrix indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub flavor: FlavorParams,
    pub grading: Grading,
    pub graphs: Vec<Graph>,
}

impl Basis {
    pub fn new(flavor: FlavorParams, grading: Grading, mut graphs: Vec<Graph>) -> Self {
        graphs.sort();
        graphs.dedup();
        Basis {
            flavor,
            grading,
            graphs,
        }
    }

    pub fn dim(&self) -> usize {
        self.graphs.len()
    }

    pub fn index(&self) -> HashMap<Graph, usize> {
        self.graphs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, g)| (g, i))
            .collect()
    }

    /// Header line plus one graph per line.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "flavor={} hairs={} loops={} degree={} dim={}\n",
            self.flavor.token(),
            self.grading.hairs,
            self.grading.loops,
            self.grading.degree,
            self.dim()
        );
        for g in &self.graphs {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(flavor: FlavorParams, text: &str) -> Result<Basis> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| HgcError::Parse("empty basis file".into()))?;
        let mut fields = HashMap::new();
        for tok in header.split_whitespace() {
            if let Some((k, v)) = tok.split_once('=') {
                fields.insert(k, v);
            }
        }
        let get = |k: &str| -> Result<i64> {
            fields
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| HgcError::Parse(format!("basis header lacks {k}")))
        };
        if fields.get("flavor").copied() != Some(flavor.token().as_str()) {
            return Err(HgcError::Parse(format!(
                "basis header flavor mismatch: {header}"
            )));
        }
        let grading = Grading {
            degree: get("degree")?,
            hairs: get("hairs")? as usize,
            loops: get("loops")? as usize,
        };
        let dim = get("dim")? as usize;
        let graphs = lines.map(|l| l.parse()).collect::<Result<Vec<Graph>>>()?;
        if graphs.len() != dim {
            return Err(HgcError::Parse(format!(
                "basis lists {} graphs, header says {dim}",
                graphs.len()
            )));
        }
        Ok(Basis {
            flavor,
            grading,
            graphs,
        })
    }
}

/// Largest vertex count of an admissible graph with these hairs and loops
/// under the trivalent rule (`None` if no graph with a vertex exists).
pub fn max_vertices(hairs: usize, loops: usize) -> Option<usize> {
    (2 * loops + hairs).checked_sub(2).filter(|&v| v >= 1)
}

/// All canonical nonzero graphs with exactly `v` vertices.
pub fn graphs_with_vertices(f: &FlavorParams, hairs: usize, loops: usize, v: usize) -> Vec<Graph> {
    if v == 0 || loops + v < 1 {
        return Vec::new();
    }
    let e = loops + v - 1;
    let total = 2 * e + hairs;
    let min = f.min_valence();
    if total < min * v {
        return Vec::new();
    }
    let max_hairs_per_vertex = if f.hairs_odd() { 1 } else { hairs };
    let mut seqs = Vec::new();
    valence_sequences(
        v,
        total,
        hairs,
        min,
        max_hairs_per_vertex,
        &mut Vec::new(),
        &mut seqs,
    );
    let found: Vec<HashSet<Graph>> = seqs
        .par_iter()
        .map(|seq| {
            let mut out = HashSet::new();
            let stubs: Vec<usize> = seq.iter().map(|&(d, h)| d - h).collect();
            let hcounts: Vec<u8> = seq.iter().map(|&(_, h)| h as u8).collect();
            let mut edges = Vec::new();
            fill_edges(f, 0, stubs, &mut edges, &mut |es| {
                let g = Graph::new(v, es, &hcounts);
                if !g.is_connected() {
                    return;
                }
                let o = Oriented::standard(&g, f);
                if let Some((c, _)) = canonicalize_oriented(&o, f) {
                    out.insert(c);
                }
            });
            out
        })
        .collect();
    let mut all: Vec<Graph> = found
        .into_iter()
        .flatten()
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    all.sort();
    all
}

/// Nonincreasing sequences of (valence, hairs) pairs.
fn valence_sequences(
    v: usize,
    total: usize,
    hairs: usize,
    min: usize,
    max_h: usize,
    cur: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let used_d: usize = cur.iter().map(|p| p.0).sum();
    let used_h: usize = cur.iter().map(|p| p.1).sum();
    let left = v - cur.len();
    if left == 0 {
        if used_d == total && used_h == hairs {
            out.push(cur.clone());
        }
        return;
    }
    let rem_d = total - used_d;
    let rem_h = hairs - used_h;
    if rem_d < min * left {
        return;
    }
    let hi_d = rem_d - min * (left - 1);
    for d in (min..=hi_d).rev() {
        for h in (0..=rem_h.min(max_h).min(d)).rev() {
            if let Some(&last) = cur.last() {
                if (d, h) > last {
                    continue;
                }
            }
            cur.push((d, h));
            valence_sequences(v, total, hairs, min, max_h, cur, out);
            cur.pop();
        }
    }
}

/// Assigns tadpoles at `i` and multiplicities from `i` to later vertices so
/// that every stub is used.
fn fill_edges(
    f: &FlavorParams,
    i: usize,
    mut stubs: Vec<usize>,
    edges: &mut Vec<(u8, u8)>,
    emit: &mut dyn FnMut(&[(u8, u8)]),
) {
    let v = stubs.len();
    if i == v {
        emit(edges);
        return;
    }
    let r = stubs[i];
    let later: usize = stubs[i + 1..].iter().sum();
    let max_tad = if f.edges_directed() || !f.tadpoles {
        0
    } else if f.edges_odd() {
        1
    } else {
        r / 2
    };
    for t in 0..=max_tad.min(r / 2) {
        let rest = r - 2 * t;
        if rest > later {
            continue;
        }
        for _ in 0..t {
            edges.push((i as u8, i as u8));
        }
        stubs[i] = 0;
        distribute(f, i, i + 1, rest, &mut stubs, edges, emit);
        stubs[i] = r;
        for _ in 0..t {
            edges.pop();
        }
    }
}

fn distribute(
    f: &FlavorParams,
    i: usize,
    j: usize,
    rest: usize,
    stubs: &mut Vec<usize>,
    edges: &mut Vec<(u8, u8)>,
    emit: &mut dyn FnMut(&[(u8, u8)]),
) {
    if rest == 0 {
        fill_edges(f, i + 1, stubs.clone(), edges, emit);
        return;
    }
    let v = stubs.len();
    if j == v {
        return;
    }
    let cap_after: usize = stubs[j + 1..].iter().sum();
    let max_mult = if f.edges_odd() { 1 } else { rest };
    let hi = max_mult.min(stubs[j]).min(rest);
    for k in (0..=hi).rev() {
        if rest - k > cap_after {
            break;
        }
        stubs[j] -= k;
        for _ in 0..k {
            edges.push((i as u8, j as u8));
        }
        distribute(f, i, j + 1, rest - k, stubs, edges, emit);
        for _ in 0..k {
            edges.pop();
        }
        stubs[j] += k;
    }
}

/// Every basis with the given hairs and loops, keyed by degree.
///
/// Trivalent flavors are finite and generated completely (or rejected with
/// [`HgcError::Overflow`]). Bivalent flavors have unbounded vertex counts
/// and are generated for `v <= caps.max_v`.
pub fn generate_basis(
    f: &FlavorParams,
    hairs: usize,
    loops: usize,
    opts: &GenOptions,
) -> Result<BTreeMap<i64, Basis>> {
    if !f.is_hairy() && hairs > 0 {
        return Err(HgcError::FlavorMismatch("bald flavor with hairs".into()));
    }
    let mut out = BTreeMap::new();
    if f.is_hairy() && hairs == 2 && loops == 0 && opts.include_line && line_nonzero(f) {
        let g = Graph::line();
        let gr = g.grading(f);
        out.insert(gr.degree, Basis::new(*f, gr, vec![g]));
    }
    if f.is_hairy() && hairs == 0 {
        return Ok(out);
    }
    let vmax = match f.valence {
        crate::graph::ValenceRule::Trivalent => {
            let Some(vm) = max_vertices(hairs, loops) else {
                return Ok(out);
            };
            if vm > opts.caps.max_v || loops + vm - 1 > opts.caps.max_e {
                return Err(HgcError::Overflow(format!(
                    "hairs={hairs} loops={loops} needs v<={vm}, e<={} (caps v<={}, e<={})",
                    loops + vm - 1,
                    opts.caps.max_v,
                    opts.caps.max_e
                )));
            }
            vm
        }
        crate::graph::ValenceRule::Bivalent => opts.caps.max_v,
    };
    for v in 1..=vmax {
        if loops + v < 1 || loops + v - 1 > opts.caps.max_e {
            continue;
        }
        let gs = graphs_with_vertices(f, hairs, loops, v);
        let gr = Grading {
            degree: f.degree(v, loops + v - 1, hairs),
            hairs,
            loops,
        };
        if !gs.is_empty() || !out.contains_key(&gr.degree) {
            out.entry(gr.degree)
                .or_insert_with(|| Basis::new(*f, gr, Vec::new()))
                .graphs
                .extend(gs);
        }
    }
    for b in out.values_mut() {
        b.graphs.sort();
        b.graphs.dedup();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSpec {
    FixedHairsLoops {
        hairs: usize,
        loops: usize,
    },
    /// hairs + loops = s, hairs >= 1 (hairy flavors).
    FixedS {
        s: usize,
    },
    /// Fixed loops, hairs in `min_hairs..=max_hairs`.
    FixedLoopsHairRange {
        loops: usize,
        min_hairs: usize,
        max_hairs: usize,
    },
}

impl BlockSpec {
    /// (hairs, loops) cells covered by the block.
    pub fn cells(&self, f: &FlavorParams) -> Vec<(usize, usize)> {
        match *self {
            BlockSpec::FixedHairsLoops { hairs, loops } => vec![(hairs, loops)],
            BlockSpec::FixedS { s } => {
                let lo = usize::from(f.is_hairy());
                (lo..=s).map(|h| (h, s - h)).collect()
            }
            BlockSpec::FixedLoopsHairRange {
                loops,
                min_hairs,
                max_hairs,
            } => (min_hairs..=max_hairs).map(|h| (h, loops)).collect(),
        }
    }
}

/// All bases of a block, keyed by grading.
#[derive(Debug, Clone)]
pub struct Block {
    pub flavor: FlavorParams,
    pub spec: BlockSpec,
    pub cells: BTreeMap<Grading, Basis>,
}

impl Block {
    pub fn by_degree(&self) -> BTreeMap<i64, Vec<&Basis>> {
        let mut m: BTreeMap<i64, Vec<&Basis>> = BTreeMap::new();
        for (g, b) in &self.cells {
            m.entry(g.degree).or_default().push(b);
        }
        m
    }

    pub fn total_dim(&self) -> usize {
        self.cells.values().map(|b| b.dim()).sum()
    }
}

pub fn generate_block(f: &FlavorParams, spec: BlockSpec, opts: &GenOptions) -> Result<Block> {
    let mut cells = BTreeMap::new();
    for (h, l) in spec.cells(f) {
        for (_, b) in generate_basis(f, h, l, opts)? {
            cells.insert(b.grading, b);
        }
    }
    Ok(Block {
        flavor: *f,
        spec,
        cells,
    })
}

/// Keeps the one-vertex irreducible graphs of a bald basis.
pub fn filter_one_vertex_irreducible(b: &Basis) -> Result<Basis> {
    if b.flavor.is_hairy() {
        return Err(HgcError::FlavorMismatch(
            "one-vertex irreducibility needs a bald flavor".into(),
        ));
    }
    let graphs = b
        .graphs
        .iter()
        .filter(|g| g.is_one_vertex_irreducible())
        .cloned()
        .collect();
    Ok(Basis {
        flavor: b.flavor,
        grading: b.grading,
        graphs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tripod_in_symmetric_hair_flavor() {
        let b = generate_basis(&FlavorParams::hairy(0, 1), 3, 0, &GenOptions::default()).unwrap();
        let all: Vec<&Graph> = b.values().flat_map(|x| &x.graphs).collect();
        assert_eq!(all, vec![&Graph::new(1, &[], &[3])]);
    }

    #[test]
    fn tripod_vanishes_when_hairs_are_odd() {
        let b = generate_basis(&FlavorParams::hairy(2, 2), 3, 0, &GenOptions::default()).unwrap();
        assert_eq!(b.values().map(|x| x.dim()).sum::<usize>(), 0);
    }

    #[test]
    fn k4_is_the_three_loop_gc2_basis() {
        let f = FlavorParams::bald(2);
        let b = generate_basis(&f, 0, 3, &GenOptions::default()).unwrap();
        let all: Vec<&Graph> = b.values().flat_map(|x| &x.graphs).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].v, 4);
        let with = generate_basis(&f.with_tadpoles(), 0, 3, &GenOptions::default()).unwrap();
        assert_eq!(with.values().map(|b| b.dim()).sum::<usize>(), 3);
    }

    #[test]
    fn tadpole_hair_vanishes_for_odd_n() {
        let b = generate_basis(&FlavorParams::hairy(0, 1), 1, 1, &GenOptions::default()).unwrap();
        assert_eq!(b.values().map(|x| x.dim()).sum::<usize>(), 0);
    }

    #[test]
    fn overflow_is_an_error() {
        let opts = GenOptions {
            caps: Caps {
                max_v: 3,
                max_e: 20,
            },
            include_line: true,
        };
        assert!(matches!(
            generate_basis(&FlavorParams::hairy(0, 2), 1, 3, &opts),
            Err(HgcError::Overflow(_))
        ));
    }

    #[test]
    fn block_cells() {
        let f = FlavorParams::hairy(0, 0);
        assert_eq!(BlockSpec::FixedS { s: 2 }.cells(&f), vec![(1, 1), (2, 0)]);
        assert_eq!(
            BlockSpec::FixedLoopsHairRange {
                loops: 3,
                min_hairs: 1,
                max_hairs: 4
            }
            .cells(&f)
            .len(),
            4
        );
        let b = generate_block(&f, BlockSpec::FixedS { s: 1 }, &GenOptions::default()).unwrap();
        assert_eq!(b.total_dim(), 0);
    }

    #[test]
    fn line_only_where_nonzero() {
        let opts = GenOptions::default();
        let d = |f: FlavorParams| -> usize {
            generate_basis(&f, 2, 0, &opts)
                .unwrap()
                .values()
                .map(|b| b.dim())
                .sum()
        };
        assert_eq!(d(FlavorParams::hairy(2, 2)), 1);
        assert_eq!(d(FlavorParams::hairy(1, 2)), 0);
        assert_eq!(
            generate_basis(&FlavorParams::hairy(2, 2), 2, 0, &opts.without_line())
                .unwrap()
                .values()
                .map(|b| b.dim())
                .sum::<usize>(),
            0
        );
    }

    #[test]
    fn one_vertex_irreducible_filter() {
        let f = FlavorParams::bald(2);
        let bowtie = Graph::new(
            5,
            &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)],
            &[0; 5],
        );
        let k4 = Graph::new(
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            &[0; 4],
        );
        let gr = Grading {
            degree: 0,
            hairs: 0,
            loops: 3,
        };
        let b = Basis {
            flavor: f,
            grading: gr,
            graphs: vec![k4.clone(), bowtie],
        };
        assert_eq!(filter_one_vertex_irreducible(&b).unwrap().graphs, vec![k4]);
    }

    #[test]
    fn basis_text_roundtrip() {
        let f = FlavorParams::hairy(0, 1);
        for b in generate_basis(&f, 3, 1, &GenOptions::default())
            .unwrap()
            .values()
        {
            assert_eq!(&Basis::from_text(f, &b.to_text()).unwrap(), b);
        }
    }
}
