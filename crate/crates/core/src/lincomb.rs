//! Finite formal sums of canonical graphs with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::canon::{canonicalize_oriented, Oriented};
use crate::error::{HgcError, Result};
use crate::graph::{FlavorParams, Graph};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinComb {
    pub flavor: FlavorParams,
    terms: BTreeMap<Graph, Q>,
}

impl LinComb {
    pub fn zero(flavor: FlavorParams) -> Self {
        LinComb {
            flavor,
            terms: BTreeMap::new(),
        }
    }

    /// `c * g` for a graph already in canonical form.
    pub fn single(flavor: FlavorParams, g: Graph, c: Q) -> Self {
        let mut l = Self::zero(flavor);
        l.add_canonical(g, c);
        l
    }

    /// The graph `g` in its standard orientation, canonicalized.
    pub fn from_graph(flavor: FlavorParams, g: &Graph) -> Self {
        let mut l = Self::zero(flavor);
        let o = if g.is_line() {
            Oriented::line()
        } else {
            Oriented::standard(g, &flavor)
        };
        l.add_oriented(&o, q(1));
        l
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Graph, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, g: &Graph) -> Q {
        self.terms.get(g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_canonical(&mut self, g: Graph, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds `c` times an oriented graph, canonicalizing it. Zero classes are
    /// dropped.
    pub fn add_oriented(&mut self, o: &Oriented, c: Q) {
        if let Some((g, s)) = canonicalize_oriented(o, &self.flavor) {
            let c = if s < 0 { -c } else { c };
            self.add_canonical(g, c);
        }
    }

    fn check(&self, other: &LinComb) -> Result<()> {
        if !self.flavor.same_parities(&other.flavor) {
            return Err(HgcError::FlavorMismatch(format!(
                "{} vs {}",
                self.flavor.token(),
                other.flavor.token()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &LinComb) -> Result<LinComb> {
        self.check(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_canonical(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn add_assign_scaled(&mut self, other: &LinComb, c: &Q) -> Result<()> {
        self.check(other)?;
        for (g, d) in &other.terms {
            self.add_canonical(g.clone(), d * c);
        }
        Ok(())
    }

    pub fn scale(&self, c: &Q) -> LinComb {
        let mut out = LinComb::zero(self.flavor);
        if c.is_zero() {
            return out;
        }
        for (g, d) in &self.terms {
            out.terms.insert(g.clone(), d * c);
        }
        out
    }

    pub fn neg(&self) -> LinComb {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, other: &LinComb) -> Result<LinComb> {
        self.add(&other.neg())
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) [{g}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_and_scaling() {
        let f = FlavorParams::hairy(0, 1);
        let x = LinComb::from_graph(f, &Graph::new(1, &[], &[3]));
        assert!(x.add(&x.neg()).unwrap().is_zero());
        assert!(x.scale(&q(0)).is_zero());
        let y = LinComb::from_graph(f, &Graph::new(1, &[], &[4]));
        assert_eq!(x.add(&y).unwrap().len(), 2);
    }

    #[test]
    fn flavor_mismatch() {
        let a = LinComb::zero(FlavorParams::hairy(0, 1));
        let b = LinComb::zero(FlavorParams::hairy(0, 2));
        assert!(a.add(&b).is_err());
        assert!(a.add(&LinComb::zero(FlavorParams::hairy(2, 3))).is_ok());
    }
}
