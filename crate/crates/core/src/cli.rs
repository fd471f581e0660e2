//! Command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cache::{Cache, CellCheck};
use crate::complex::{fresh_source, BasisSource, BlockComplex, DiffKind, Truncation};
use crate::enumerate::{Basis, GenOptions};
use crate::error::{HgcError, Result};
use crate::graph::FlavorParams;
use crate::linalg::Coeff;
use crate::specseq::{cancellation_report, compute_pages, e_infinity_check, waterfall_tsv, Filtration, FilteredComplex, Sequence, WATERFALL_HEADER};
use crate::verify;

#[derive(Parser, Debug)]
#[command(name = "hgc", version, about = "Hairy graph complexes: bases, cohomology, spectral sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Generate bases and print dimensions per grading.
    Basis {
        #[command(flatten)]
        common: Common,
        /// Print every basis graph instead of the dimensions.
        #[arg(long)]
        list: bool,
    },
    /// Cohomology dimensions for one differential.
    Cohom(Common),
    /// Run the identity suites; exits nonzero on failure.
    Verify(Common),
    /// Spectral sequence pages.
    Ss(Common),
    /// Cancellations of both spectral sequences.
    Waterfall(Common),
    /// δ-cohomology table over a range of cells.
    Table(Common),
    /// Re-derive cached bases and compare them byte for byte.
    CacheCheck(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shift {
    /// Degrees shifted by -m (hairy) or -n (bald), as in the published tables.
    Lie,
    /// The plain degree formula.
    Int,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Hair parameter; omit for the non-hairy complex.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,
    /// Bivalent vertices allowed (non-hairy only).
    #[arg(long)]
    pub bivalent: bool,
    /// Allow tadpoles (default: only for bivalent flavors).
    #[arg(long, conflicts_with = "no_tadpoles")]
    pub tadpoles: bool,
    #[arg(long)]
    pub no_tadpoles: bool,
    #[arg(long, value_enum, default_value = "lie")]
    pub shift: Shift,
    #[arg(long, default_value = "delta")]
    pub diff: String,
    #[arg(long)]
    pub hairs: Option<usize>,
    #[arg(long)]
    pub loops: Option<usize>,
    #[arg(long)]
    pub block_s: Option<usize>,
    #[arg(long)]
    pub max_s: Option<usize>,
    #[arg(long)]
    pub max_v: Option<usize>,
    /// rat, modp[:p] or multip.
    #[arg(long, default_value = "multip")]
    pub coeff: String,
    /// hairs, loops or constant (default depends on the differential).
    #[arg(long)]
    pub filtration: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
    /// Rows = hairs, columns = loops, entries `dim_deg`.
    #[arg(long)]
    pub figure_layout: bool,
}

/// One finite complex to compute: its cells and truncation.
#[derive(Debug, Clone)]
struct Job {
    label: String,
    cells: Vec<(usize, usize)>,
    truncation: Truncation,
}

impl Common {
    fn flavor(&self) -> Result<FlavorParams> {
        let n = self.n.ok_or_else(|| HgcError::Parse("--n is required".into()))?;
        let mut f = match self.m {
            Some(m) => {
                if self.bivalent {
                    return Err(HgcError::Parse("--bivalent applies to non-hairy complexes".into()));
                }
                FlavorParams::hairy(m, n)
            }
            None if self.bivalent => FlavorParams::bald_bivalent(n),
            None => FlavorParams::bald(n),
        };
        if self.tadpoles {
            f = f.with_tadpoles();
        }
        if self.no_tadpoles {
            f = f.without_tadpoles();
        }
        if self.shift == Shift::Lie {
            f = f.with_lie_shift();
        }
        Ok(f)
    }

    fn diff(&self) -> Result<DiffKind> {
        DiffKind::parse(&self.diff)
    }

    fn coeff(&self) -> Result<Coeff> {
        Coeff::parse(&self.coeff)
    }

    fn max_v(&self) -> usize {
        self.max_v.unwrap_or(8)
    }

    fn gen_options(&self) -> GenOptions {
        let mut o = GenOptions::default();
        if self.bivalent || self.max_v.is_some() {
            o = o.with_max_v(self.max_v());
        }
        o
    }

    fn cache(&self) -> Option<Cache> {
        (!self.no_cache).then(|| Cache::new(self.cache_dir.clone(), self.gen_options()))
    }

    fn cells_by_s(&self, f: &FlavorParams, s_exact: bool, s: usize) -> Vec<(usize, usize)> {
        let lo = usize::from(f.is_hairy());
        let mut out = Vec::new();
        for t in if s_exact { s..=s } else { 0..=s } {
            if !f.is_hairy() {
                if t > 0 {
                    out.push((0, t));
                }
                continue;
            }
            for h in lo..=t {
                out.push((h, t - h));
            }
        }
        out
    }

    /// Cells chosen by `--hairs/--loops`, `--block-s` or `--max-s`.
    fn plain_cells(&self, f: &FlavorParams) -> Result<Vec<(usize, usize)>> {
        if let (Some(h), Some(l)) = (self.hairs, self.loops) {
            return Ok(vec![(h, l)]);
        }
        if let Some(s) = self.block_s {
            return Ok(self.cells_by_s(f, true, s));
        }
        if let Some(s) = self.max_s {
            return Ok(self.cells_by_s(f, false, s));
        }
        if !f.is_hairy() {
            if let Some(l) = self.loops {
                return Ok(vec![(0, l)]);
            }
        }
        Err(HgcError::Parse("choose cells with --hairs and --loops, --block-s or --max-s".into()))
    }

    fn s_bound(&self) -> Result<usize> {
        self.block_s
            .or(self.max_s)
            .ok_or_else(|| HgcError::Parse("this differential needs --block-s or --max-s".into()))
    }

    /// Splits the request into complexes the differential preserves.
    fn jobs(&self, f: &FlavorParams, d: DiffKind) -> Result<Vec<Job>> {
        let none = Truncation::default();
        let job = |label: String, cells: Vec<(usize, usize)>, truncation: Truncation| Job { label, cells, truncation };
        Ok(match d {
            DiffKind::Delta => self
                .plain_cells(f)?
                .into_iter()
                .map(|(h, l)| job(format!("hairs={h} loops={l}"), vec![(h, l)], none))
                .collect(),
            DiffKind::D | DiffKind::DeltaOdd => {
                let s = self.s_bound()?;
                let blocks: Vec<usize> = if self.block_s.is_some() { vec![s] } else { (1..=s).collect() };
                blocks
                    .into_iter()
                    .map(|t| job(format!("s={t}"), self.cells_by_s(f, true, t), none))
                    .collect()
            }
            DiffKind::DTilde => {
                let s = self.s_bound()?;
                let t = Truncation { max_s: Some(s), ..none };
                vec![job(format!("s<={s}"), self.cells_by_s(f, false, s), t)]
            }
            DiffKind::H0 | DiffKind::H1 => {
                let pairs: Vec<(usize, usize)> = match (self.loops, self.hairs) {
                    (Some(l), Some(h)) => vec![(l, h)],
                    _ => {
                        let s = self.s_bound()?;
                        (0..s).map(|l| (l, s - l)).collect()
                    }
                };
                pairs
                    .into_iter()
                    .map(|(l, h)| {
                        let t = Truncation { max_hairs: Some(h), ..none };
                        job(format!("loops={l} hairs<={h}"), (1..=h).map(|x| (x, l)).collect(), t)
                    })
                    .collect()
            }
            DiffKind::Nabla | DiffKind::DeltaTheta => {
                let l = self
                    .loops
                    .or(self.max_s)
                    .ok_or_else(|| HgcError::Parse("this differential needs --loops or --max-s".into()))?;
                let t = Truncation { max_loops: Some(l), max_v: Some(self.max_v()), ..none };
                vec![job(format!("loops<={l} v<={}", self.max_v()), (1..=l).map(|x| (0, x)).collect(), t)]
            }
        })
    }
}

/// Runs `f` with a basis source honouring the cache flags.
fn with_source<T>(c: &Common, body: impl FnOnce(&BasisSource) -> Result<T>) -> Result<T> {
    match c.cache() {
        Some(cache) => {
            let src = move |f: &FlavorParams, h: usize, l: usize| cache.get_or_generate(f, h, l);
            body(&src)
        }
        None => {
            let src = fresh_source(c.gen_options());
            body(&src)
        }
    }
}

fn header(c: &Common, f: &FlavorParams, d: Option<DiffKind>) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# flavor={} m={} n={}", f.token(), c.m.map_or("-".into(), |m| m.to_string()), f.n);
    let _ = writeln!(
        s,
        "# only the parities of m and n matter; other values give isomorphic complexes with shifted degrees"
    );
    let _ = writeln!(s, "# degree shift: {:?} ({})", c.shift, f.degree_shift);
    if let Some(d) = d {
        let g = d.normalize(f)?;
        let _ = writeln!(s, "# differential={} computed on m={}", d.token(), g.m);
        if g.m != f.m && f.is_hairy() {
            let _ = writeln!(
                s,
                "# degrees below are those of m={}; add ({})*hairs for m={}",
                g.m,
                f.m - g.m,
                f.m
            );
        }
    }
    let _ = writeln!(s, "# coeff={} max_v={}", c.coeff()?.token(), c.max_v());
    Ok(s)
}

fn emit(c: &Common, text: &str) -> Result<()> {
    match &c.out {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_basis(c: &Common, list: bool) -> Result<String> {
    let f = c.flavor()?;
    let cells = c.plain_cells(&f)?;
    let mut s = header(c, &f, None)?;
    s.push_str(if list { "hairs\tloops\tdegree\tindex\tgraph\n" } else { "hairs\tloops\tdegree\tdim\n" });
    with_source(c, |src| {
        for (h, l) in cells {
            let bases: BTreeMap<i64, Basis> = src(&f, h, l)?;
            if bases.is_empty() && !list {
                let _ = writeln!(s, "{h}\t{l}\t*\t0");
            }
            for (d, b) in &bases {
                if list {
                    for (i, g) in b.graphs.iter().enumerate() {
                        let _ = writeln!(s, "{h}\t{l}\t{d}\t{i}\t{g}");
                    }
                } else {
                    let _ = writeln!(s, "{h}\t{l}\t{d}\t{}", b.dim());
                }
            }
        }
        Ok(())
    })?;
    Ok(s)
}

fn cmd_cohom(c: &Common) -> Result<String> {
    let f = c.flavor()?;
    let d = c.diff()?;
    let coeff = c.coeff()?;
    let jobs = c.jobs(&f, d)?;
    let mut s = header(c, &f, Some(d))?;
    let mut nonzero = Vec::new();
    let mut rows = String::from("hairs\tloops\tdegree\tdim\n");
    with_source(c, |src| {
        for job in &jobs {
            let cx = BlockComplex::build(d, &f, &job.cells, job.truncation, src)?;
            let h = cx.cohomology_dims(&coeff)?;
            let (hs, ls) = match job.cells.as_slice() {
                [(a, b)] => (a.to_string(), b.to_string()),
                _ => ("*".into(), "*".into()),
            };
            let _ = writeln!(rows, "# {} window={}", job.label, job.truncation.describe());
            for (deg, dim) in h {
                let _ = writeln!(rows, "{hs}\t{ls}\t{deg}\t{dim}");
                if dim > 0 {
                    nonzero.push(format!("{} degree {deg} dim {dim}", job.label));
                }
            }
        }
        Ok(())
    })?;
    if d == DiffKind::DeltaOdd && !nonzero.is_empty() {
        for x in &nonzero {
            let _ = writeln!(s, "# EVIDENCE-AGAINST-CONJECTURE: expected zero, found {x}");
        }
    }
    s.push_str(&rows);
    Ok(s)
}

fn cmd_verify(c: &Common) -> Result<(String, bool)> {
    let max_s = c.max_s.unwrap_or(5);
    let max_v = c.max_v();
    let coeff = c.coeff()?;
    let mut checks = Vec::new();
    let src = fresh_source(GenOptions::default().with_max_v(max_v));
    checks.extend(verify::square_zero_suite(max_s, max_v, &src)?);
    for n in 0..2 {
        checks.push(verify::d_preserves_s(n, max_s, &src)?);
    }
    for n in 0..4 {
        checks.push(verify::vertex_deletion_check(n, max_v.min(6), 5, -1)?);
        checks.push(verify::twisted_deletion_check(n, max_v.min(6), 4)?);
        checks.push(verify::mc_h0(n)?);
        checks.push(verify::mc_h1(n, 7)?);
    }
    let (hairy, gc, ok) = verify::two_hair_vs_gc(2, &coeff, &src)?;
    checks.push(verify::Check {
        suite: "two-hair",
        name: "hairs=2 loops=2 vs GC_3 loops=3".into(),
        ok,
        detail: format!("hairy {hairy:?} gc {gc:?}"),
    });
    let mut s = String::from(verify::CHECK_HEADER);
    s.push('\n');
    for ch in &checks {
        s.push_str(&ch.tsv_row());
        s.push('\n');
    }
    Ok((s, checks.iter().all(|c| c.ok)))
}

fn default_filtration(d: DiffKind) -> Filtration {
    match d {
        DiffKind::H0 | DiffKind::H1 => Filtration::Hairs,
        DiffKind::Delta => Filtration::Constant,
        _ => Filtration::Loops,
    }
}

/// The filtration index from which the truncation cuts the complex, when
/// the window is a quotient by a filtration step. Any other truncation makes
/// every cell indeterminate.
fn quotient_bound(t: &Truncation, fil: Filtration) -> Option<i64> {
    let other = t.max_s.is_some() || t.max_v.is_some();
    match (fil, t.max_hairs, t.max_loops) {
        (_, None, None) if !other => None,
        (Filtration::Hairs, Some(h), None) if !other => Some(h as i64 + 1),
        (Filtration::Loops, None, Some(l)) if t.max_s.is_none() => Some(l as i64 + 1),
        _ => Some(i64::MIN),
    }
}

fn filtered(
    f: &FlavorParams,
    d: DiffKind,
    fil: Filtration,
    job: &Job,
    src: &BasisSource,
) -> Result<FilteredComplex> {
    let cx = BlockComplex::build(d, f, &job.cells, job.truncation, src)?;
    FilteredComplex::new(cx, fil, quotient_bound(&job.truncation, fil))
}

fn cmd_ss(c: &Common) -> Result<String> {
    let f = c.flavor()?;
    let d = c.diff()?;
    let coeff = c.coeff()?;
    let fil = match &c.filtration {
        Some(x) => Filtration::parse(x)?,
        None => default_filtration(d),
    };
    let jobs = c.jobs(&f, d)?;
    let mut s = header(c, &f, Some(d))?;
    let _ = writeln!(s, "# filtration={} (decreasing)", fil.token());
    with_source(c, |src| {
        for job in &jobs {
            let fc = filtered(&f, d, fil, job, src)?;
            let pages = compute_pages(&fc, &coeff)?;
            let e = e_infinity_check(&fc, &coeff)?;
            let _ = writeln!(s, "# {} window={}", job.label, job.truncation.describe());
            s.push_str(&pages.to_tsv());
            let _ = writeln!(s, "# E_inf vs cohomology ({})", if e.ok() { "agree" } else { "disagree" });
            s.push_str(&e.to_tsv());
        }
        Ok(())
    })?;
    Ok(s)
}

fn cmd_waterfall(c: &Common) -> Result<String> {
    let f = c.flavor()?;
    if !f.is_hairy() {
        return Err(HgcError::Parse("waterfall needs --m".into()));
    }
    let coeff = c.coeff()?;
    let s_max = c.s_bound()?;
    let first = if f.m_parity().is_odd() { DiffKind::DeltaOdd } else { DiffKind::D };
    let second = if f.m_parity() == f.n_parity() { DiffKind::H0 } else { DiffKind::H1 };
    let mut s = header(c, &f, None)?;
    let _ = writeln!(s, "# first sequence: {} filtered by loops, blocks s<={s_max}", first.token());
    let _ = writeln!(s, "# second sequence: {} filtered by hairs, loops<{s_max}", second.token());
    let _ = writeln!(s, "# degrees are those of the flavor each differential is computed on");
    s.push_str(WATERFALL_HEADER);
    let hair_window = c.hairs.unwrap_or(s_max + 2);
    with_source(c, |src| {
        let mut rows = Vec::new();
        for t in 1..=s_max {
            let job = Job {
                label: format!("s={t}"),
                cells: c.cells_by_s(&f, true, t),
                truncation: Truncation::default(),
            };
            let fc = filtered(&f, first, Filtration::Loops, &job, src)?;
            rows.extend(cancellation_report(&compute_pages(&fc, &coeff)?, Sequence::First));
        }
        for l in 0..s_max {
            let job = Job {
                label: format!("loops={l}"),
                cells: (1..=hair_window).map(|h| (h, l)).collect(),
                truncation: Truncation { max_hairs: Some(hair_window), ..Truncation::default() },
            };
            let fc = filtered(&f, second, Filtration::Hairs, &job, src)?;
            rows.extend(cancellation_report(&compute_pages(&fc, &coeff)?, Sequence::Second));
        }
        let body = waterfall_tsv(&rows);
        s.push_str(body.strip_prefix(WATERFALL_HEADER).unwrap_or(&body));
        Ok(())
    })?;
    Ok(s)
}

fn cmd_table(c: &Common) -> Result<String> {
    let f = c.flavor()?;
    let coeff = c.coeff()?;
    let cells = c.plain_cells(&f)?;
    let mut s = header(c, &f, Some(DiffKind::Delta))?;
    let mut table: BTreeMap<(usize, usize), BTreeMap<i64, usize>> = BTreeMap::new();
    with_source(c, |src| {
        for &(h, l) in &cells {
            table.insert((h, l), crate::complex::delta_cohomology(&f, h, l, &coeff, src)?);
        }
        Ok(())
    })?;
    if c.figure_layout {
        let max_l = cells.iter().map(|&(_, l)| l).max().unwrap_or(0);
        s.push_str("hairs\\loops");
        for l in 0..=max_l {
            let _ = write!(s, "\t{l}");
        }
        s.push('\n');
        let hairs: std::collections::BTreeSet<usize> = cells.iter().map(|&(h, _)| h).collect();
        for h in hairs {
            let _ = write!(s, "{h}");
            for l in 0..=max_l {
                let entry = match table.get(&(h, l)) {
                    None => String::new(),
                    Some(m) => {
                        let toks: Vec<String> =
                            m.iter().filter(|(_, &x)| x > 0).map(|(d, x)| format!("{x}_{d}")).collect();
                        if toks.is_empty() {
                            "0".into()
                        } else {
                            toks.join(" ")
                        }
                    }
                };
                let _ = write!(s, "\t{entry}");
            }
            s.push('\n');
        }
    } else {
        s.push_str("hairs\tloops\tdegree\tdim\n");
        for ((h, l), m) in &table {
            for (d, x) in m {
                if *x > 0 {
                    let _ = writeln!(s, "{h}\t{l}\t{d}\t{x}");
                }
            }
        }
    }
    Ok(s)
}

fn cmd_cache_check(c: &Common) -> Result<(String, bool)> {
    let f = c.flavor()?;
    let cells = c.plain_cells(&f)?;
    let cache = Cache::new(c.cache_dir.clone(), c.gen_options());
    let mut s = format!("# cache={}\nhairs\tloops\tstatus\n", cache.root.display());
    let mut ok = true;
    for (h, l) in cells {
        let st = match cache.check_cell(&f, h, l)? {
            CellCheck::Missing => "missing".to_string(),
            CellCheck::Identical => "identical".to_string(),
            CellCheck::Differs(file) => {
                ok = false;
                format!("differs:{file}")
            }
        };
        let _ = writeln!(s, "{h}\t{l}\t{st}");
    }
    Ok((s, ok))
}

/// Runs a parsed command; the boolean is false when a check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let (c, text, ok) = match &cli.cmd {
        Cmd::Basis { common, list } => (common, cmd_basis(common, *list)?, true),
        Cmd::Cohom(c) => (c, cmd_cohom(c)?, true),
        Cmd::Verify(c) => {
            let (t, ok) = cmd_verify(c)?;
            (c, t, ok)
        }
        Cmd::Ss(c) => (c, cmd_ss(c)?, true),
        Cmd::Waterfall(c) => (c, cmd_waterfall(c)?, true),
        Cmd::Table(c) => (c, cmd_table(c)?, true),
        Cmd::CacheCheck(c) => {
            let (t, ok) = cmd_cache_check(c)?;
            (c, t, ok)
        }
    };
    emit(c, &text)?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::parse_from(std::iter::once("hgc").chain(args.iter().copied()))
    }

    fn common(cli: &Cli) -> &Common {
        match &cli.cmd {
            Cmd::Basis { common, .. } => common,
            Cmd::Cohom(c) | Cmd::Verify(c) | Cmd::Ss(c) | Cmd::Waterfall(c) | Cmd::Table(c) | Cmd::CacheCheck(c) => c,
        }
    }

    #[test]
    fn tripod_basis() {
        for (n, dim) in [("2", "0"), ("3", "1")] {
            let cli = parse(&["basis", "--m", "2", "--n", n, "--hairs", "3", "--loops", "0", "--no-cache"]);
            let out = cmd_basis(common(&cli), false).unwrap();
            let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].rsplit('\t').next(), Some(dim));
        }
    }

    #[test]
    fn d_block_is_acyclic() {
        let cli = parse(&["cohom", "--m", "0", "--n", "0", "--diff", "D", "--block-s", "3", "--no-cache"]);
        let out = cmd_cohom(common(&cli)).unwrap();
        for row in out.lines().filter(|l| !l.starts_with('#')).skip(1) {
            assert!(row.ends_with("\t0"), "{row}");
        }
    }

    #[test]
    fn negative_m_and_filtration_windows() {
        let cli = parse(&["cohom", "--m", "-1", "--n", "0", "--diff", "delta-Delta", "--block-s", "3", "--no-cache"]);
        let out = cmd_cohom(common(&cli)).unwrap();
        assert!(out.contains("EVIDENCE-AGAINST-CONJECTURE"));
        let t = Truncation { max_hairs: Some(4), ..Truncation::default() };
        assert_eq!(quotient_bound(&t, Filtration::Hairs), Some(5));
        assert_eq!(quotient_bound(&t, Filtration::Loops), Some(i64::MIN));
        assert_eq!(quotient_bound(&Truncation::default(), Filtration::Loops), None);
    }

    #[test]
    fn figure_layout_has_dim_deg_tokens() {
        let cli = parse(&["table", "--m", "2", "--n", "3", "--max-s", "4", "--figure-layout", "--no-cache"]);
        let out = cmd_table(common(&cli)).unwrap();
        let row3 = out.lines().find(|l| l.starts_with("3\t")).unwrap();
        assert!(row3.split('\t').nth(2).unwrap().starts_with("1_"));
    }
}
