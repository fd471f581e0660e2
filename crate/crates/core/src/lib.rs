//! Exact computations in hairy and non-hairy graph complexes.

pub mod cache;
pub mod cli;
pub mod canon;
pub mod complex;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod lincomb;
pub mod ops;
pub mod specseq;
pub mod verify;

pub use error::{HgcError, Result};
