//! Spectral sequences of finite filtered complexes.
//!
//! The filtration is decreasing and spanned by basis elements: `F^p` is the
//! span of basis graphs with filtration index `>= p`. Page dimensions come
//! from ranks of the restricted maps `F^q -> C / F^s`, so no quotient spaces
//! are ever built explicitly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::complex::BlockComplex;
use crate::error::{HgcError, Result};
use crate::graph::Grading;
use crate::linalg::{rank, Coeff, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filtration {
    Hairs,
    Loops,
    Constant,
}

impl Filtration {
    pub fn parse(s: &str) -> Result<Filtration> {
        match s {
            "hairs" => Ok(Filtration::Hairs),
            "loops" => Ok(Filtration::Loops),
            "constant" | "none" => Ok(Filtration::Constant),
            _ => Err(HgcError::Parse(format!("unknown filtration {s:?}"))),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Filtration::Hairs => "hairs",
            Filtration::Loops => "loops",
            Filtration::Constant => "constant",
        }
    }

    pub fn index(self, g: &Grading) -> i64 {
        match self {
            Filtration::Hairs => g.hairs as i64,
            Filtration::Loops => g.loops as i64,
            Filtration::Constant => 0,
        }
    }
}

/// Which of the two sequences of the waterfall picture a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sequence {
    First,
    Second,
}

impl Sequence {
    pub fn token(self) -> &'static str {
        match self {
            Sequence::First => "first",
            Sequence::Second => "second",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilteredComplex {
    pub complex: BlockComplex,
    pub filtration: Filtration,
    /// Filtration index of every basis element, by degree.
    pub filt: BTreeMap<i64, Vec<i64>>,
    /// Set when the complex is the quotient `C / F^N` of a larger complex by
    /// a truncation; cells that can see `F^N` are then indeterminate.
    pub quotient_from: Option<i64>,
}

impl FilteredComplex {
    pub fn new(complex: BlockComplex, filtration: Filtration, quotient_from: Option<i64>) -> Result<Self> {
        let filt = complex
            .pieces
            .iter()
            .map(|(&d, p)| (d, p.gradings.iter().map(|g| filtration.index(g)).collect()))
            .collect();
        let fc = FilteredComplex { complex, filtration, filt, quotient_from };
        if let Some((d, c, r)) = fc.check_filtration() {
            return Err(HgcError::Filtration(format!(
                "{} lowers the {} filtration: degree {d} column {c} hits row {r}",
                fc.complex.diff.token(),
                filtration.token()
            )));
        }
        Ok(fc)
    }

    /// First matrix entry mapping a basis element to a lower filtration.
    pub fn check_filtration(&self) -> Option<(i64, usize, usize)> {
        for (&d, m) in &self.complex.maps {
            let (Some(src), Some(dst)) = (self.filt.get(&d), self.filt.get(&(d + 1))) else {
                continue;
            };
            for (c, col) in m.columns.iter().enumerate() {
                for (r, _) in col {
                    if dst[*r] < src[c] {
                        return Some((d, c, *r));
                    }
                }
            }
        }
        None
    }

    fn range(&self) -> Option<(i64, i64)> {
        let all = self.filt.values().flatten();
        Some((*all.clone().min()?, *all.max()?))
    }

    /// The common (hairs, loops) of the basis elements in a cell, if unique.
    pub fn cell_grading(&self, degree: i64, p: i64) -> Option<(usize, usize)> {
        let piece = self.complex.pieces.get(&degree)?;
        let mut seen = BTreeSet::new();
        for (g, &f) in piece.gradings.iter().zip(&self.filt[&degree]) {
            if f == p {
                seen.insert((g.hairs, g.loops));
            }
        }
        if seen.len() == 1 {
            seen.into_iter().next()
        } else {
            None
        }
    }

    /// Cohomology of the associated graded piece `F^p / F^{p+1}`, by degree.
    pub fn graded_cohomology(&self, coeff: &Coeff) -> Result<BTreeMap<(i64, i64), usize>> {
        let mut out = BTreeMap::new();
        let Some((lo, hi)) = self.range() else {
            return Ok(out);
        };
        let mut ranks = HashMap::new();
        for p in lo..=hi {
            for (&d, m) in &self.complex.maps {
                let cols = indices(&self.filt[&d], |f| f == p);
                let rows = match self.filt.get(&(d + 1)) {
                    Some(t) => indices(t, |f| f == p),
                    None => Vec::new(),
                };
                ranks.insert((d, p), sub_rank(m, &rows, &cols, coeff)?);
            }
            for (&d, fs) in &self.filt {
                let dim = fs.iter().filter(|&&f| f == p).count();
                let out_r = ranks.get(&(d, p)).copied().unwrap_or(0);
                let in_r = ranks.get(&(d - 1, p)).copied().unwrap_or(0);
                out.insert((d, p), dim - out_r - in_r);
            }
        }
        Ok(out)
    }
}

fn indices(fs: &[i64], keep: impl Fn(i64) -> bool) -> Vec<usize> {
    fs.iter().enumerate().filter(|(_, &f)| keep(f)).map(|(i, _)| i).collect()
}

fn sub_rank(m: &SparseMatrix, rows: &[usize], cols: &[usize], coeff: &Coeff) -> Result<usize> {
    if rows.is_empty() || cols.is_empty() {
        return Ok(0);
    }
    Ok(rank(&m.submatrix(rows, cols), coeff)?.rank)
}

/// Page dimensions `E_r^{p,d}` for `r = 1..=last`, the differential ranks
/// `d_r: E_r^{p,d} -> E_r^{p+r,d+1}`, and `E_inf` (the page after the last
/// possible differential).
#[derive(Debug, Clone)]
pub struct Pages {
    pub filtration: Filtration,
    pub quotient_from: Option<i64>,
    pub pages: BTreeMap<usize, BTreeMap<(i64, i64), usize>>,
    pub diff_ranks: BTreeMap<usize, BTreeMap<(i64, i64), usize>>,
    pub infinity: BTreeMap<(i64, i64), usize>,
    pub gradings: BTreeMap<(i64, i64), (usize, usize)>,
}

impl Pages {
    /// Whether `E_r^p` is unaffected by the truncation. `E_1^p` is exact for
    /// `p < N`; `E_{r+1}^p` needs `E_r` exact at `p` and `p + r`, so the bound
    /// drops by `r` at each page. `r = usize::MAX` stands for `E_inf`.
    pub fn is_safe(&self, r: usize, p: i64) -> bool {
        let Some(n) = self.quotient_from else {
            return true;
        };
        if r == usize::MAX {
            return false;
        }
        let mut bound = n;
        for k in 1..r {
            bound -= k as i64;
        }
        p < bound
    }

    /// `E_r`; pages past the last differential equal `E_inf`.
    pub fn page(&self, r: usize) -> &BTreeMap<(i64, i64), usize> {
        self.pages.get(&r).unwrap_or(&self.infinity)
    }

    pub fn last_page(&self) -> usize {
        self.pages.keys().copied().max().unwrap_or(1)
    }

    pub fn total(&self, r: usize) -> usize {
        self.page(r).values().sum()
    }

    /// `page deg filt hairs loops dim status` rows for every nonzero cell;
    /// `page` is `inf` for the limit.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("page\tdeg\tfilt\thairs\tloops\tdim\tstatus\n");
        let rows = self
            .pages
            .iter()
            .map(|(&r, m)| (r, r.to_string(), m))
            .chain(std::iter::once((usize::MAX, "inf".to_string(), &self.infinity)));
        for (r, label, m) in rows {
            for (&(d, p), &dim) in m {
                if dim == 0 {
                    continue;
                }
                let (h, l) = self
                    .gradings
                    .get(&(d, p))
                    .map(|(h, l)| (h.to_string(), l.to_string()))
                    .unwrap_or(("*".into(), "*".into()));
                let status = if self.is_safe(r, p) { "exact" } else { "indeterminate" };
                let _ = writeln!(s, "{label}\t{d}\t{p}\t{h}\t{l}\t{dim}\t{status}");
            }
        }
        s
    }
}

/// Computes all pages. `E_1` is checked against the cohomology of the
/// associated graded complex.
pub fn compute_pages(fc: &FilteredComplex, coeff: &Coeff) -> Result<Pages> {
    if let Some((d, c)) = fc.complex.verify_square_zero()? {
        return Err(HgcError::SquareZero(format!("degree {d}, column {c}")));
    }
    let mut out = Pages {
        filtration: fc.filtration,
        quotient_from: fc.quotient_from,
        pages: BTreeMap::new(),
        diff_ranks: BTreeMap::new(),
        infinity: BTreeMap::new(),
        gradings: BTreeMap::new(),
    };
    let Some((lo, hi)) = fc.range() else {
        out.pages.insert(1, BTreeMap::new());
        out.diff_ranks.insert(1, BTreeMap::new());
        return Ok(out);
    };
    let top = hi + 1;

    // rank of F^q C^d -> C^{d+1} / F^s, for q in lo..=hi and q < s <= top
    let keys: Vec<(i64, i64, i64)> = fc
        .complex
        .maps
        .keys()
        .flat_map(|&d| (lo..=hi).flat_map(move |q| (q + 1..=top).map(move |s| (d, q, s))))
        .collect();
    let ranks: HashMap<(i64, i64, i64), usize> = keys
        .par_iter()
        .map(|&(d, q, s)| {
            let m = &fc.complex.maps[&d];
            let cols = indices(&fc.filt[&d], |f| f >= q);
            let rows = match fc.filt.get(&(d + 1)) {
                Some(t) => indices(t, |f| f < s),
                None => Vec::new(),
            };
            sub_rank(m, &rows, &cols, coeff).map(|r| ((d, q, s), r))
        })
        .collect::<Result<_>>()?;
    let big_r = |d: i64, q: i64, s: i64| -> usize {
        let q = q.max(lo);
        let s = s.min(top);
        if q > hi || s <= q {
            return 0;
        }
        ranks.get(&(d, q, s)).copied().unwrap_or(0)
    };
    let dim_f = |d: i64, q: i64| -> usize {
        fc.filt.get(&d).map(|fs| fs.iter().filter(|&&f| f >= q).count()).unwrap_or(0)
    };
    // Z_r^{p,d} = { x in F^p : dx in F^{p+r} }
    let dim_z = |r: i64, d: i64, p: i64| -> i64 { dim_f(d, p) as i64 - big_r(d, p, p + r) as i64 };
    // dim (d F^q C^{d-1} ∩ F^s)
    let dim_bf = |d: i64, q: i64, s: i64| -> i64 { big_r(d - 1, q, top) as i64 - big_r(d - 1, q, s) as i64 };

    let degrees: Vec<i64> = fc.filt.keys().copied().collect();
    let last = (hi - lo + 1) as usize;
    for r in 1..=last + 1 {
        let ri = r as i64;
        let mut page = BTreeMap::new();
        let mut dr = BTreeMap::new();
        for &d in &degrees {
            for p in lo..=hi {
                let e = dim_z(ri, d, p) - dim_z(ri - 1, d, p + 1) - dim_bf(d, p - ri + 1, p)
                    + dim_bf(d, p - ri + 1, p + 1);
                let k = dim_z(ri, d, p) - dim_z(ri + 1, d, p) - dim_z(ri - 1, d, p + 1) + dim_z(ri, d, p + 1);
                if e < 0 || k < 0 {
                    return Err(HgcError::Filtration(format!("negative page dimension at r={r} d={d} p={p}")));
                }
                page.insert((d, p), e as usize);
                if k > 0 {
                    dr.insert((d, p), k as usize);
                }
            }
        }
        if r == last + 1 {
            out.infinity = page;
        } else {
            out.pages.insert(r, page);
            out.diff_ranks.insert(r, dr);
        }
    }
    for &d in &degrees {
        for p in lo..=hi {
            if let Some(g) = fc.cell_grading(d, p) {
                out.gradings.insert((d, p), g);
            }
        }
    }

    let gr = fc.graded_cohomology(coeff)?;
    for (key, &dim) in &out.pages[&1] {
        let expect = gr.get(key).copied().unwrap_or(0);
        if dim != expect {
            return Err(HgcError::Filtration(format!(
                "E_1 at (deg, filt) = {key:?} is {dim}, associated graded cohomology is {expect}"
            )));
        }
    }
    Ok(out)
}

/// Comparison of `sum_p E_inf^{p,d}` with `dim H^d` of the total complex.
#[derive(Debug, Clone)]
pub struct EInfinityReport {
    pub filtration_ok: bool,
    pub truncated: bool,
    /// degree -> (sum of E_inf, dim H)
    pub by_degree: BTreeMap<i64, (usize, usize)>,
}

impl EInfinityReport {
    /// True when the filtration is valid and the sums agree in every degree.
    /// Truncated complexes are compared as they are; their `E_inf` need not
    /// match the untruncated complex.
    pub fn ok(&self) -> bool {
        self.filtration_ok && self.by_degree.values().all(|(a, b)| a == b)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("deg\te_inf\tcohomology\tstatus\n");
        if !self.filtration_ok {
            s.push_str("*\t*\t*\tfiltration-violation\n");
        }
        for (d, (a, b)) in &self.by_degree {
            let st = if a == b { "ok" } else { "mismatch" };
            let _ = writeln!(s, "{d}\t{a}\t{b}\t{st}");
        }
        s
    }
}

pub fn e_infinity_check(fc: &FilteredComplex, coeff: &Coeff) -> Result<EInfinityReport> {
    let h = fc.complex.cohomology_dims(coeff)?;
    if fc.check_filtration().is_some() {
        return Ok(EInfinityReport {
            filtration_ok: false,
            truncated: fc.quotient_from.is_some(),
            by_degree: h.iter().map(|(&d, &x)| (d, (0, x))).collect(),
        });
    }
    let pages = compute_pages(fc, coeff)?;
    let mut by_degree: BTreeMap<i64, (usize, usize)> = h.iter().map(|(&d, &x)| (d, (0, x))).collect();
    for (&(d, _), &x) in &pages.infinity {
        by_degree.entry(d).or_insert((0, 0)).0 += x;
    }
    Ok(EInfinityReport {
        filtration_ok: true,
        truncated: fc.quotient_from.is_some(),
        by_degree,
    })
}

/// One cancellation: `mult` classes at the source cell kill as many at the
/// target cell on page `page`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cancellation {
    pub page: usize,
    pub src: (i64, Option<(usize, usize)>),
    pub dst: (i64, Option<(usize, usize)>),
    pub mult: usize,
    pub sequence: Sequence,
}

/// Nonzero page differentials in exact cells, ordered by page and then by
/// source (degree, filtration).
pub fn cancellation_report(pages: &Pages, sequence: Sequence) -> Vec<Cancellation> {
    let mut out = Vec::new();
    for (&r, m) in &pages.diff_ranks {
        for (&(d, p), &k) in m {
            let q = p + r as i64;
            if !pages.is_safe(r, p) || !pages.is_safe(r, q) {
                continue;
            }
            out.push(Cancellation {
                page: r,
                src: (d, pages.gradings.get(&(d, p)).copied()),
                dst: (d + 1, pages.gradings.get(&(d + 1, q)).copied()),
                mult: k,
                sequence,
            });
        }
    }
    out
}

pub const WATERFALL_HEADER: &str = "page\tsrc_deg\tsrc_hairs\tsrc_loops\tdst_deg\tdst_hairs\tdst_loops\tmult\tsequence\n";

pub fn waterfall_tsv(rows: &[Cancellation]) -> String {
    let mut s = String::from(WATERFALL_HEADER);
    let part = |g: Option<(usize, usize)>| match g {
        Some((h, l)) => (h.to_string(), l.to_string()),
        None => ("*".into(), "*".into()),
    };
    for c in rows {
        let (sh, sl) = part(c.src.1);
        let (dh, dl) = part(c.dst.1);
        let _ = writeln!(
            s,
            "{}\t{}\t{sh}\t{sl}\t{}\t{dh}\t{dl}\t{}\t{}",
            c.page,
            c.src.0,
            c.dst.0,
            c.mult,
            c.sequence.token()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{fresh_source, DiffKind, Truncation};
    use crate::enumerate::GenOptions;
    use crate::graph::FlavorParams;

    fn block(diff: DiffKind, f: FlavorParams, s: usize) -> BlockComplex {
        let cells: Vec<(usize, usize)> = (1..=s).map(|h| (h, s - h)).collect();
        let src = fresh_source(GenOptions::default());
        BlockComplex::build(diff, &f, &cells, Truncation::default(), &src).unwrap()
    }

    #[test]
    fn constant_filtration_gives_cohomology_at_e1() {
        let c = block(DiffKind::D, FlavorParams::hairy(0, 1), 3);
        let h = c.cohomology_dims(&Coeff::ModP(crate::linalg::PRIMES[0])).unwrap();
        let fc = FilteredComplex::new(c, Filtration::Constant, None).unwrap();
        let pages = compute_pages(&fc, &Coeff::ModP(crate::linalg::PRIMES[0])).unwrap();
        for (&d, &x) in &h {
            assert_eq!(pages.pages[&1].get(&(d, 0)).copied().unwrap_or(0), x);
        }
        assert_eq!(pages.pages[&1], pages.infinity);
    }

    #[test]
    fn loop_filtration_of_d_converges_to_zero() {
        for n in 0..2 {
            let c = block(DiffKind::D, FlavorParams::hairy(0, n), 3);
            let fc = FilteredComplex::new(c, Filtration::Loops, None).unwrap();
            let coeff = Coeff::ModP(crate::linalg::PRIMES[0]);
            let pages = compute_pages(&fc, &coeff).unwrap();
            assert_eq!(pages.infinity.values().sum::<usize>(), 0);
            for r in 1..pages.last_page() {
                for (k, &x) in &pages.pages[&(r + 1)] {
                    assert!(x <= pages.pages[&r][k]);
                }
            }
            assert!(e_infinity_check(&fc, &coeff).unwrap().ok());
        }
    }

    #[test]
    fn wrong_filtration_is_rejected_and_flagged() {
        let c = block(DiffKind::D, FlavorParams::hairy(0, 1), 3);
        let mut fc = FilteredComplex::new(c, Filtration::Loops, None).unwrap();
        for fs in fc.filt.values_mut() {
            for f in fs.iter_mut() {
                *f = -*f;
            }
        }
        let rep = e_infinity_check(&fc, &Coeff::ModP(crate::linalg::PRIMES[0])).unwrap();
        assert!(!rep.filtration_ok && !rep.ok());
    }

    #[test]
    fn safety_bound_shrinks_with_page() {
        let p = Pages {
            filtration: Filtration::Hairs,
            quotient_from: Some(10),
            pages: BTreeMap::new(),
            diff_ranks: BTreeMap::new(),
            infinity: BTreeMap::new(),
            gradings: BTreeMap::new(),
        };
        assert!(p.is_safe(1, 9) && !p.is_safe(1, 10));
        assert!(p.is_safe(2, 8) && !p.is_safe(2, 9));
        assert!(p.is_safe(3, 6) && !p.is_safe(3, 7));
        assert!(!p.is_safe(usize::MAX, 0));
    }
}
