//! On-disk cache of bases.
//!
//! Layout: `<root>/<flavor>/<h>_<l>/basis_<d>.txt` plus a manifest
//! `cell.txt` listing each file with its SHA-256. The manifest is written
//! last, so a cell without one is treated as absent. Every file is written
//! to a temporary name and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::enumerate::{generate_basis, Basis, GenOptions};
use crate::error::{HgcError, Result};
use crate::graph::{FlavorParams, ValenceRule};

pub const ENV_VAR: &str = "HGC_CACHE_DIR";
const MANIFEST: &str = "cell.txt";

#[derive(Debug, Clone)]
pub struct Cache {
    pub root: PathBuf,
    pub opts: GenOptions,
}

/// Result of re-deriving one cached cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellCheck {
    Missing,
    Identical,
    Differs(String),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().expect("cache paths have a parent");
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl Cache {
    /// `explicit`, else `$HGC_CACHE_DIR`, else `.hgc-cache`.
    pub fn new(explicit: Option<PathBuf>, opts: GenOptions) -> Cache {
        let root = explicit
            .or_else(|| std::env::var_os(ENV_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".hgc-cache"));
        Cache { root, opts }
    }

    /// Directory for one flavor. Degrees depend on `m`, `n` and the shift,
    /// and bivalent bases on the vertex cap, so all of them are in the name.
    pub fn flavor_dir(&self, f: &FlavorParams) -> PathBuf {
        let mut name = format!("{}_m{}_n{}_shift{}", f.dir_name(), f.m, f.n, f.degree_shift);
        if f.valence == ValenceRule::Bivalent {
            name.push_str(&format!("_v{}", self.opts.caps.max_v));
        }
        if !self.opts.include_line {
            name.push_str("_noline");
        }
        self.root.join(name)
    }

    pub fn cell_dir(&self, f: &FlavorParams, hairs: usize, loops: usize) -> PathBuf {
        self.flavor_dir(f).join(format!("{hairs}_{loops}"))
    }

    fn render(bases: &BTreeMap<i64, Basis>) -> (Vec<(String, String)>, String) {
        let files: Vec<(String, String)> = bases
            .iter()
            .map(|(d, b)| (format!("basis_{d}.txt"), b.to_text()))
            .collect();
        let mut manifest = String::new();
        for (name, text) in &files {
            manifest.push_str(&format!("{name} {}\n", sha256_hex(text.as_bytes())));
        }
        (files, manifest)
    }

    pub fn store(&self, f: &FlavorParams, hairs: usize, loops: usize, bases: &BTreeMap<i64, Basis>) -> Result<()> {
        let dir = self.cell_dir(f, hairs, loops);
        let (files, manifest) = Self::render(bases);
        for (name, text) in &files {
            write_atomic(&dir.join(name), text)?;
        }
        write_atomic(&dir.join(MANIFEST), &manifest)
    }

    /// Cached bases of a cell, or `None` when the cell was never completed.
    /// A file whose hash disagrees with the manifest is an error.
    pub fn load(&self, f: &FlavorParams, hairs: usize, loops: usize) -> Result<Option<BTreeMap<i64, Basis>>> {
        let dir = self.cell_dir(f, hairs, loops);
        let Ok(manifest) = fs::read_to_string(dir.join(MANIFEST)) else {
            return Ok(None);
        };
        let mut out = BTreeMap::new();
        for line in manifest.lines() {
            let (name, hash) = line
                .split_once(' ')
                .ok_or_else(|| HgcError::Parse(format!("bad manifest line {line:?}")))?;
            let text = fs::read_to_string(dir.join(name))?;
            if sha256_hex(text.as_bytes()) != hash {
                return Err(HgcError::Parse(format!("{} does not match its hash", dir.join(name).display())));
            }
            let b = Basis::from_text(*f, &text)?;
            out.insert(b.grading.degree, b);
        }
        Ok(Some(out))
    }

    pub fn get_or_generate(&self, f: &FlavorParams, hairs: usize, loops: usize) -> Result<BTreeMap<i64, Basis>> {
        if let Some(b) = self.load(f, hairs, loops)? {
            return Ok(b);
        }
        let b = generate_basis(f, hairs, loops, &self.opts)?;
        self.store(f, hairs, loops, &b)?;
        Ok(b)
    }

    /// Regenerates a cell from scratch and compares it byte for byte with
    /// the cached files.
    pub fn check_cell(&self, f: &FlavorParams, hairs: usize, loops: usize) -> Result<CellCheck> {
        let dir = self.cell_dir(f, hairs, loops);
        let Ok(manifest) = fs::read_to_string(dir.join(MANIFEST)) else {
            return Ok(CellCheck::Missing);
        };
        let fresh = generate_basis(f, hairs, loops, &self.opts)?;
        let (files, fresh_manifest) = Self::render(&fresh);
        if manifest != fresh_manifest {
            return Ok(CellCheck::Differs(MANIFEST.into()));
        }
        for (name, text) in files {
            match fs::read_to_string(dir.join(&name)) {
                Ok(t) if t == text => {}
                _ => return Ok(CellCheck::Differs(name)),
            }
        }
        Ok(CellCheck::Identical)
    }
}
