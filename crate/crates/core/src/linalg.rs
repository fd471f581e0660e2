//! Sparse matrices and ranks over Q and prime fields.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{HgcError, Result};
use crate::lincomb::Q;

/// Primes for modular ranks, tried in order; all between 2^15 and 2^31.
pub const PRIMES: [u64; 6] = [
    2_147_483_647,
    2_147_483_629,
    2_147_483_587,
    1_000_000_007,
    998_244_353,
    65_521,
];

/// Matrices with at most this many nonzeros get an exact rational check in
/// multi-prime mode.
pub const RATIONAL_CHECK_NNZ: usize = 2000;

/// Coefficient field used for ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coeff {
    Rational,
    ModP(u64),
    /// Rank mod several primes. A reduction never raises the rank, so the
    /// largest value seen is reported.
    MultiP(Vec<u64>),
}

impl Coeff {
    pub fn parse(s: &str) -> Result<Coeff> {
        match s {
            "rational" | "rat" | "Q" => Ok(Coeff::Rational),
            "modp" => Ok(Coeff::ModP(PRIMES[0])),
            "multi_p" | "multip" => Ok(Coeff::MultiP(PRIMES.to_vec())),
            _ => {
                let p = s
                    .strip_prefix("mod_p")
                    .map(|r| r.trim_start_matches([':', '=']))
                    .unwrap_or(s);
                if p.is_empty() {
                    return Ok(Coeff::ModP(PRIMES[0]));
                }
                let p: u64 = p
                    .parse()
                    .map_err(|_| HgcError::Parse(format!("bad coefficient mode {s}")))?;
                if !is_prime(p) || p >= 1 << 31 {
                    return Err(HgcError::Parse(format!("{p} is not a prime below 2^31")));
                }
                Ok(Coeff::ModP(p))
            }
        }
    }

    pub fn token(&self) -> String {
        match self {
            Coeff::Rational => "rational".into(),
            Coeff::ModP(p) => format!("mod_p:{p}"),
            Coeff::MultiP(_) => "multi_p".into(),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Column-major sparse matrix with rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `columns[c]` lists `(row, value)` sorted by row, no zeros.
    pub columns: Vec<Vec<(usize, Q)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<BTreeMap<usize, Q>>) -> Self {
        let cols = columns.len();
        let columns = columns
            .into_iter()
            .map(|c| c.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        SparseMatrix {
            rows,
            cols,
            columns,
        }
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.columns[c]
            .iter()
            .find(|(i, _)| *i == r)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut cols = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                cols[*r].push((c, v.clone()));
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            columns: cols,
        }
    }

    /// Keeps the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut rmap = vec![usize::MAX; self.rows];
        for (i, &r) in rows.iter().enumerate() {
            rmap[r] = i;
        }
        let columns = cols
            .iter()
            .map(|&c| {
                let mut col: Vec<(usize, Q)> = self.columns[c]
                    .iter()
                    .filter(|(r, _)| rmap[*r] != usize::MAX)
                    .map(|(r, v)| (rmap[*r], v.clone()))
                    .collect();
                col.sort_by_key(|(r, _)| *r);
                col
            })
            .collect();
        SparseMatrix {
            rows: rows.len(),
            cols: cols.len(),
            columns,
        }
    }

    /// `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(HgcError::GradingMismatch(format!(
                "cannot compose {}x{} after {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let columns = other
            .columns
            .iter()
            .map(|ocol| {
                let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
                for (k, b) in ocol {
                    for (r, a) in &self.columns[*k] {
                        *acc.entry(*r).or_insert_with(Q::zero) += a * b;
                    }
                }
                acc
            })
            .collect();
        Ok(SparseMatrix::from_columns(self.rows, columns))
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// Text form: a `rows=R cols=C nnz=N` header, then `r c p/q` lines
    /// (0-based, sorted by column then row).
    pub fn to_text(&self) -> String {
        let mut s = format!("rows={} cols={} nnz={}\n", self.rows, self.cols, self.nnz());
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                let _ = writeln!(s, "{r} {c} {}/{}", v.numer(), v.denom());
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<SparseMatrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| HgcError::Parse("empty matrix file".into()))?;
        let mut dims = HashMap::new();
        for part in header.split_whitespace() {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| HgcError::Parse(format!("bad header field {part}")))?;
            let v: usize = v
                .parse()
                .map_err(|_| HgcError::Parse(format!("bad header value {part}")))?;
            dims.insert(k.to_string(), v);
        }
        let get = |k: &str| {
            dims.get(k)
                .copied()
                .ok_or_else(|| HgcError::Parse(format!("missing {k} in matrix header")))
        };
        let (rows, cols, nnz) = (get("rows")?, get("cols")?, get("nnz")?);
        let mut columns: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); cols];
        let mut count = 0;
        for l in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(HgcError::Parse(format!("bad matrix line {l}")));
            }
            let r: usize = parts[0]
                .parse()
                .map_err(|_| HgcError::Parse(format!("bad row in {l}")))?;
            let c: usize = parts[1]
                .parse()
                .map_err(|_| HgcError::Parse(format!("bad column in {l}")))?;
            if r >= rows || c >= cols {
                return Err(HgcError::Parse(format!("entry out of range: {l}")));
            }
            let v = parse_q(parts[2])?;
            columns[c].insert(r, v);
            count += 1;
        }
        if count != nnz {
            return Err(HgcError::Parse(format!("expected {nnz} entries, found {count}")));
        }
        Ok(SparseMatrix::from_columns(rows, columns))
    }
}

fn parse_q(s: &str) -> Result<Q> {
    let bad = || HgcError::Parse(format!("bad rational {s}"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (p as i128, a as i128);
    while newr != 0 {
        let q = r / newr;
        (t, newt) = (newt, t - q * newt);
        (r, newr) = (newr, r - q * newr);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

fn reduce_q(v: &Q, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let d = (v.denom() % &pb).to_u64()?;
    if d == 0 {
        return None;
    }
    let n = (v.numer() % &pb + &pb) % &pb;
    Some(n.to_u64()? * inv_mod(d, p) % p)
}

/// Vectors to eliminate: the shorter side of the matrix.
fn vectors(m: &SparseMatrix) -> Vec<Vec<(usize, Q)>> {
    if m.cols <= m.rows {
        m.columns.clone()
    } else {
        m.transpose().columns
    }
}

/// Rank over `Z/p`. Fails if some denominator is divisible by `p`.
pub fn rank_mod_p(m: &SparseMatrix, p: u64) -> Result<usize> {
    let mut vs: Vec<Vec<(usize, u64)>> = Vec::new();
    for v in vectors(m) {
        let mut w = Vec::with_capacity(v.len());
        for (i, x) in v {
            let r = reduce_q(&x, p).ok_or_else(|| {
                HgcError::Overflow(format!("denominator divisible by {p}"))
            })?;
            if r != 0 {
                w.push((i, r));
            }
        }
        vs.push(w);
    }
    // Short vectors first keeps fill-in down.
    vs.sort_by_key(Vec::len);
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    for mut v in vs {
        while let Some(&(lead, a)) = v.first() {
            match pivots.get(&lead) {
                Some(pv) => v = axpy_mod(&v, pv, p - a, p),
                None => {
                    let inv = inv_mod(a, p);
                    for e in v.iter_mut() {
                        e.1 = e.1 * inv % p;
                    }
                    pivots.insert(lead, v);
                    break;
                }
            }
        }
    }
    Ok(pivots.len())
}

/// `v + c * w` over `Z/p` for sorted sparse vectors.
fn axpy_mod(v: &[(usize, u64)], w: &[(usize, u64)], c: u64, p: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(v.len() + w.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < w.len() {
        let take_v = j >= w.len() || (i < v.len() && v[i].0 < w[j].0);
        let take_w = i >= v.len() || (j < w.len() && w[j].0 < v[i].0);
        if take_v {
            out.push(v[i]);
            i += 1;
        } else if take_w {
            out.push((w[j].0, w[j].1 * c % p));
            j += 1;
        } else {
            let x = (v[i].1 + w[j].1 * c) % p;
            if x != 0 {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Exact rank over Q.
pub fn rank_rational(m: &SparseMatrix) -> usize {
    let mut vs = vectors(m);
    vs.sort_by_key(Vec::len);
    let mut pivots: HashMap<usize, Vec<(usize, Q)>> = HashMap::new();
    for mut v in vs {
        while let Some((lead, a)) = v.first().cloned() {
            match pivots.get(&lead) {
                Some(pv) => v = axpy_q(&v, pv, &-a),
                None => {
                    let inv = a.recip();
                    for e in v.iter_mut() {
                        e.1 = &e.1 * &inv;
                    }
                    pivots.insert(lead, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}

fn axpy_q(v: &[(usize, Q)], w: &[(usize, Q)], c: &Q) -> Vec<(usize, Q)> {
    let mut out = Vec::with_capacity(v.len() + w.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < w.len() {
        let take_v = j >= w.len() || (i < v.len() && v[i].0 < w[j].0);
        let take_w = i >= v.len() || (j < w.len() && w[j].0 < v[i].0);
        if take_v {
            out.push(v[i].clone());
            i += 1;
        } else if take_w {
            out.push((w[j].0, &w[j].1 * c));
            j += 1;
        } else {
            let x = &v[i].1 + &w[j].1 * c;
            if !x.is_zero() {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank with provenance of the field used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    pub rank: usize,
    /// Ranks obtained mod each prime tried.
    pub per_prime: Vec<(u64, usize)>,
    /// Exact rank when it was computed.
    pub rational: Option<usize>,
}

impl RankResult {
    /// All computed ranks agree.
    pub fn consistent(&self) -> bool {
        self.per_prime.iter().all(|&(_, r)| r == self.rank)
            && self.rational.is_none_or(|r| r == self.rank)
    }
}

pub fn rank(m: &SparseMatrix, coeff: &Coeff) -> Result<RankResult> {
    rank_with_threshold(m, coeff, RATIONAL_CHECK_NNZ)
}

/// Multi-prime mode tries primes until two agree on the largest rank seen,
/// then confirms over Q when
/// the matrix has at most `rational_nnz` nonzeros (the exact rank wins).
pub fn rank_with_threshold(m: &SparseMatrix, coeff: &Coeff, rational_nnz: usize) -> Result<RankResult> {
    let mut out = RankResult {
        rank: 0,
        per_prime: Vec::new(),
        rational: None,
    };
    if m.rows == 0 || m.cols == 0 || m.is_zero() {
        return Ok(out);
    }
    match coeff {
        Coeff::Rational => {
            out.rank = rank_rational(m);
            out.rational = Some(out.rank);
        }
        Coeff::ModP(p) => {
            out.rank = rank_mod_p(m, *p)?;
            out.per_prime.push((*p, out.rank));
        }
        Coeff::MultiP(ps) => {
            for &p in ps {
                // A prime dividing a denominator is skipped.
                let Ok(r) = rank_mod_p(m, p) else { continue };
                let best = out.per_prime.iter().map(|&(_, s)| s).max();
                out.per_prime.push((p, r));
                if best == Some(r) {
                    break;
                }
            }
            out.rank = out.per_prime.iter().map(|&(_, r)| r).max().unwrap_or(0);
            if m.nnz() <= rational_nnz || out.per_prime.is_empty() {
                let r = rank_rational(m);
                out.rational = Some(r);
                out.rank = r;
            }
        }
    }
    Ok(out)
}

/// Largest absolute numerator or denominator, as a crude size measure.
pub fn max_height(m: &SparseMatrix) -> BigInt {
    let mut h = BigInt::one();
    for col in &m.columns {
        for (_, v) in col {
            h = h.max(v.numer().abs()).max(v.denom().abs());
        }
    }
    h
}
