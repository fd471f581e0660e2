//! Differentials as named operators, matrix assembly and block complexes.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::enumerate::{generate_basis, Basis, GenOptions};
use crate::error::{HgcError, Result};
use crate::graph::{FlavorParams, Graph, Grading, Kind};
use crate::linalg::{rank, Coeff, SparseMatrix};
use crate::lincomb::{LinComb, Q};
use crate::ops::{self, Window};

/// The total differentials with their CLI tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiffKind {
    /// `delta`
    Delta,
    /// `nabla`: delta + nabla on bald graphs, n even.
    Nabla,
    /// `delta-theta`: bald graphs, n odd.
    DeltaTheta,
    /// `D`: hairy, m even.
    D,
    /// `D-tilde`: hairy, m even.
    DTilde,
    /// `Delta`: delta + Delta, hairy, m odd.
    DeltaOdd,
    /// `h0`: delta + [h0, .] on HGC_{n,n}.
    H0,
    /// `h1`: delta + [h1, .] on HGC_{n-1,n}.
    H1,
}

pub const ALL_DIFFS: [DiffKind; 8] = [
    DiffKind::Delta,
    DiffKind::Nabla,
    DiffKind::DeltaTheta,
    DiffKind::D,
    DiffKind::DTilde,
    DiffKind::DeltaOdd,
    DiffKind::H0,
    DiffKind::H1,
];

impl DiffKind {
    pub fn parse(s: &str) -> Result<DiffKind> {
        Ok(match s {
            "delta" => DiffKind::Delta,
            "nabla" | "delta-nabla" => DiffKind::Nabla,
            "delta-theta" => DiffKind::DeltaTheta,
            "D" => DiffKind::D,
            "D-tilde" => DiffKind::DTilde,
            "Delta" | "delta-Delta" => DiffKind::DeltaOdd,
            "h0" => DiffKind::H0,
            "h1" => DiffKind::H1,
            _ => return Err(HgcError::Parse(format!("unknown differential {s}"))),
        })
    }

    pub fn token(self) -> &'static str {
        match self {
            DiffKind::Delta => "delta",
            DiffKind::Nabla => "nabla",
            DiffKind::DeltaTheta => "delta-theta",
            DiffKind::D => "D",
            DiffKind::DTilde => "D-tilde",
            DiffKind::DeltaOdd => "Delta",
            DiffKind::H0 => "h0",
            DiffKind::H1 => "h1",
        }
    }

    pub fn is_hairy(self) -> bool {
        !matches!(self, DiffKind::Nabla | DiffKind::DeltaTheta)
    }

    /// The flavor on which the operator has degree exactly +1: `m` is moved
    /// to the representative of its class that the operator needs. Parities
    /// are checked; `f.degree_shift` is kept.
    pub fn normalize(self, f: &FlavorParams) -> Result<FlavorParams> {
        let bad = |why: &str| {
            Err(HgcError::FlavorMismatch(format!(
                "{} on {}: {why}",
                self.token(),
                f.token()
            )))
        };
        let n_odd = f.n_parity().is_odd();
        let m_odd = f.m_parity().is_odd();
        let mut g = *f;
        match self {
            DiffKind::Delta => return Ok(g),
            DiffKind::Nabla | DiffKind::DeltaTheta => {
                if f.kind != Kind::Bald {
                    return bad("needs a bald flavor");
                }
                if (self == DiffKind::Nabla) == n_odd {
                    return bad("wrong parity of n");
                }
                return Ok(g);
            }
            _ => {}
        }
        if f.kind != Kind::Hairy {
            return bad("needs a hairy flavor");
        }
        g.m = match self {
            DiffKind::D | DiffKind::DTilde if !m_odd => 0,
            DiffKind::DeltaOdd if m_odd => -1,
            DiffKind::H0 if m_odd == n_odd => f.n,
            DiffKind::H1 if m_odd != n_odd => f.n - 1,
            _ => return bad("wrong parity of m"),
        };
        Ok(g)
    }

    /// The deformed complexes live on internally connected graphs, which
    /// excludes the line graph.
    pub fn excludes_line(self) -> bool {
        matches!(self, DiffKind::D | DiffKind::DTilde | DiffKind::DeltaOdd)
    }

    /// Quantities the operator never decreases, i.e. the truncations under
    /// which a finite window is a quotient complex.
    pub fn allows(self, t: &Truncation) -> bool {
        let ok_h = t.max_hairs.is_none() || matches!(self, DiffKind::Delta | DiffKind::H0 | DiffKind::H1);
        let ok_l = t.max_loops.is_none()
            || matches!(
                self,
                DiffKind::Delta | DiffKind::Nabla | DiffKind::DeltaTheta | DiffKind::H0 | DiffKind::H1
            );
        let ok_s = t.max_s.is_none()
            || matches!(
                self,
                DiffKind::Delta | DiffKind::D | DiffKind::DTilde | DiffKind::DeltaOdd | DiffKind::H0 | DiffKind::H1
            );
        // Every operator adds at most one vertex and never removes one.
        ok_h && ok_l && ok_s
    }

    pub fn apply(self, x: &LinComb, t: &Truncation) -> Result<LinComb> {
        match self {
            DiffKind::Delta => Ok(ops::delta(x)),
            DiffKind::Nabla => ops::delta(x).add(&ops::nabla(x)?),
            DiffKind::DeltaTheta => ops::delta_theta(x, Window::loops(t.loop_bound()?)),
            DiffKind::D => ops::big_d(x),
            DiffKind::DTilde => {
                let w = match t.max_s {
                    Some(s) => Window::loops(s.saturating_sub(1)),
                    None => Window::default(),
                };
                ops::d_tilde(x, w)
            }
            DiffKind::DeltaOdd => ops::delta(x).add(&ops::delta_odd(x)?),
            DiffKind::H0 => ops::delta(x).add(&ops::h0_twist(x)?),
            DiffKind::H1 => ops::delta(x).add(&ops::h1_twist(x, Window::hairs(t.hair_bound()?))?),
        }
    }
}

/// A finite window of a complex: terms beyond any bound are dropped, which
/// is a quotient complex when the differential never decreases the bounded
/// quantities (see [`DiffKind::allows`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Truncation {
    pub max_hairs: Option<usize>,
    pub max_loops: Option<usize>,
    pub max_s: Option<usize>,
    pub max_v: Option<usize>,
}

impl Truncation {
    pub fn beyond(&self, g: &Graph) -> bool {
        let h = g.num_hairs();
        let l = g.loops();
        self.max_hairs.is_some_and(|x| h > x)
            || self.max_loops.is_some_and(|x| l > x)
            || self.max_s.is_some_and(|x| h + l > x)
            || self.max_v.is_some_and(|x| g.v > x)
    }

    fn loop_bound(&self) -> Result<usize> {
        self.max_loops
            .ok_or_else(|| HgcError::Window("this differential needs a loop bound".into()))
    }

    fn hair_bound(&self) -> Result<usize> {
        self.max_hairs
            .ok_or_else(|| HgcError::Window("this differential needs a hair bound".into()))
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(x) = self.max_hairs {
            parts.push(format!("hairs<={x}"));
        }
        if let Some(x) = self.max_loops {
            parts.push(format!("loops<={x}"));
        }
        if let Some(x) = self.max_s {
            parts.push(format!("s<={x}"));
        }
        if let Some(x) = self.max_v {
            parts.push(format!("v<={x}"));
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join(",")
        }
    }
}

/// Basis elements of one degree with their gradings.
#[derive(Debug, Clone)]
pub struct Piece {
    pub degree: i64,
    pub graphs: Vec<Graph>,
    pub gradings: Vec<Grading>,
}

impl Piece {
    pub fn dim(&self) -> usize {
        self.graphs.len()
    }
}

/// A finite complex: pieces by degree and the matrix from each degree `d`
/// to `d + 1`.
#[derive(Debug, Clone)]
pub struct BlockComplex {
    pub flavor: FlavorParams,
    pub diff: DiffKind,
    pub truncation: Truncation,
    pub pieces: BTreeMap<i64, Piece>,
    pub maps: BTreeMap<i64, SparseMatrix>,
}

/// Source of bases, so callers can put a cache in front of generation.
pub type BasisSource<'a> = dyn Fn(&FlavorParams, usize, usize) -> Result<BTreeMap<i64, Basis>> + Sync + 'a;

pub fn fresh_source(opts: GenOptions) -> impl Fn(&FlavorParams, usize, usize) -> Result<BTreeMap<i64, Basis>> + Sync {
    move |f, h, l| generate_basis(f, h, l, &opts)
}

/// Matrix of `op` from `domain` to `codomain`. Output terms that are not in
/// the codomain must lie beyond the truncation, otherwise this fails.
pub fn assemble_matrix(
    diff: DiffKind,
    f: &FlavorParams,
    domain: &[Graph],
    codomain: &[Graph],
    t: &Truncation,
) -> Result<SparseMatrix> {
    let index: HashMap<&Graph, usize> = codomain.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let columns: Vec<Result<BTreeMap<usize, Q>>> = domain
        .par_iter()
        .map(|g| {
            let x = LinComb::from_graph(*f, g);
            let y = diff.apply(&x, t)?;
            let mut col = BTreeMap::new();
            for (h, c) in y.iter() {
                match index.get(h) {
                    Some(&i) => {
                        col.insert(i, c.clone());
                    }
                    None if t.beyond(h) => {}
                    None => {
                        return Err(HgcError::MissingCodomain {
                            op: diff.token().into(),
                            graph: h.to_string(),
                        })
                    }
                }
            }
            Ok(col)
        })
        .collect();
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::from_columns(codomain.len(), columns))
}

impl BlockComplex {
    /// Builds the complex on the given (hairs, loops) cells. `f` is
    /// normalized for `diff` first.
    pub fn build(
        diff: DiffKind,
        f: &FlavorParams,
        cells: &[(usize, usize)],
        truncation: Truncation,
        source: &BasisSource,
    ) -> Result<BlockComplex> {
        let f = diff.normalize(f)?;
        if !diff.allows(&truncation) {
            return Err(HgcError::Window(format!(
                "{} is not compatible with truncation {}",
                diff.token(),
                truncation.describe()
            )));
        }
        let mut pieces: BTreeMap<i64, Piece> = BTreeMap::new();
        for &(h, l) in cells {
            for (d, b) in source(&f, h, l)? {
                let p = pieces.entry(d).or_insert_with(|| Piece {
                    degree: d,
                    graphs: Vec::new(),
                    gradings: Vec::new(),
                });
                for g in &b.graphs {
                    if truncation.beyond(g) || (g.is_line() && diff.excludes_line()) {
                        continue;
                    }
                    p.graphs.push(g.clone());
                    p.gradings.push(g.grading(&f));
                }
            }
        }
        pieces.retain(|_, p| p.dim() > 0);
        let mut maps = BTreeMap::new();
        let empty = Vec::new();
        for (&d, p) in &pieces {
            let target = pieces.get(&(d + 1)).map(|q| &q.graphs).unwrap_or(&empty);
            let m = assemble_matrix(diff, &f, &p.graphs, target, &truncation)?;
            maps.insert(d, m);
        }
        Ok(BlockComplex {
            flavor: f,
            diff,
            truncation,
            pieces,
            maps,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.pieces.values().map(Piece::dim).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.pieces
            .iter()
            .map(|(&d, p)| if d.rem_euclid(2) == 0 { p.dim() as i64 } else { -(p.dim() as i64) })
            .sum()
    }

    /// First non-zero entry of some `d_{k+1} d_k`, as (degree, column).
    pub fn verify_square_zero(&self) -> Result<Option<(i64, usize)>> {
        for (&d, m) in &self.maps {
            let Some(next) = self.maps.get(&(d + 1)) else {
                continue;
            };
            if m.rows == 0 {
                continue;
            }
            let prod = next.mul(m)?;
            if let Some(c) = prod.columns.iter().position(|col| !col.is_empty()) {
                return Ok(Some((d, c)));
            }
        }
        Ok(None)
    }

    /// `dim H^d` for every degree with a nonzero piece.
    pub fn cohomology_dims(&self, coeff: &Coeff) -> Result<BTreeMap<i64, usize>> {
        if let Some((d, c)) = self.verify_square_zero()? {
            return Err(HgcError::SquareZero(format!(
                "{} on {}: column {c} of degree {d}",
                self.diff.token(),
                self.flavor.token()
            )));
        }
        let degrees: Vec<i64> = self.maps.keys().copied().collect();
        let ranks: Vec<(i64, usize)> = degrees
            .par_iter()
            .map(|&d| rank(&self.maps[&d], coeff).map(|r| (d, r.rank)))
            .collect::<Result<Vec<_>>>()?;
        let ranks: BTreeMap<i64, usize> = ranks.into_iter().collect();
        Ok(self
            .pieces
            .iter()
            .map(|(&d, p)| {
                let out = ranks.get(&d).copied().unwrap_or(0);
                let inc = ranks.get(&(d - 1)).copied().unwrap_or(0);
                (d, p.dim() - out - inc)
            })
            .collect())
    }
}

/// δ-cohomology of one (hairs, loops) cell, by degree.
pub fn delta_cohomology(
    f: &FlavorParams,
    hairs: usize,
    loops: usize,
    coeff: &Coeff,
    source: &BasisSource,
) -> Result<BTreeMap<i64, usize>> {
    let c = BlockComplex::build(DiffKind::Delta, f, &[(hairs, loops)], Truncation::default(), source)?;
    c.cohomology_dims(coeff)
}
