//! Formal chains with exact rational coefficients.
//!
//! A simplex is an ordered vertex tuple. Two simplices are equal only when
//! their tuples agree entrywise, so `[a, b]` and `[b, a]` are different
//! simplices; orientation is never normalised implicitly. Vertices are
//! either rational points (affine simplices) or opaque labels (formal
//! simplices whose geometry is not modelled).

mod homotopy;
mod json;
mod perm;
mod prism;
mod rationalize;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use homotopy::{cone, homotopy_p, identity_simplex, mu, pushforward, MAX_MU_DIM};
pub use json::{ChainJson, VertexJson};
pub use perm::Permutation;
pub use prism::{prism, prism_chain};
pub use rationalize::{rationalize, RealChain};

/// A point of some rational affine space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| rational::int(c)).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rational) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// Affine combination `sum w_i p_i` (weights are not checked to sum to 1).
    pub fn combination(weights: &[Rational], points: &[Point]) -> Point {
        let dim = points.first().map_or(0, Point::dim);
        let mut out = vec![Rational::zero(); dim];
        for (w, p) in weights.iter().zip(points) {
            if w.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(&p.0) {
                *o += w * c;
            }
        }
        Point(out)
    }

    pub fn barycenter(points: &[Point]) -> Point {
        let w = vec![Rational::new(BigInt::one(), BigInt::from(points.len())); points.len()];
        Point::combination(&w, points)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Ordered vertex tuple of a simplex; its dimension is `len - 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex<V>(pub Vec<V>);

impl<V: Clone> Simplex<V> {
    pub fn new(vertices: Vec<V>) -> Self {
        assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
        Simplex(vertices)
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[V] {
        &self.0
    }

    /// Face opposite vertex `i`.
    pub fn face(&self, i: usize) -> Simplex<V> {
        let mut v = self.0.clone();
        v.remove(i);
        Simplex(v)
    }

    /// Precomposition with the affine vertex permutation `p`:
    /// vertex `i` of the result is vertex `p(i)` of `self`.
    pub fn permute(&self, p: &Permutation) -> Simplex<V> {
        Simplex(p.images().iter().map(|&i| self.0[i].clone()).collect())
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> Simplex<W> {
        Simplex(self.0.iter().map(f).collect())
    }
}

impl<V: PartialEq> Simplex<V> {
    /// True when two vertices coincide.
    pub fn is_degenerate(&self) -> bool {
        let v = &self.0;
        (0..v.len()).any(|i| (i + 1..v.len()).any(|j| v[i] == v[j]))
    }
}

/// A finite formal sum of simplices of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain<V: Ord> {
    dim: usize,
    terms: BTreeMap<Simplex<V>, Rational>,
}

pub type AffineChain = Chain<Point>;

impl<V: Ord + Clone> Chain<V> {
    pub fn zero(dim: usize) -> Self {
        Chain { dim, terms: BTreeMap::new() }
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Simplex<V>, Rational)>) -> Result<Self> {
        let mut c = Chain::zero(dim);
        for (s, q) in terms {
            c.add_term(s, q)?;
        }
        Ok(c)
    }

    pub fn simplex(s: Simplex<V>) -> Self {
        let dim = s.dim();
        let mut terms = BTreeMap::new();
        terms.insert(s, Rational::one());
        Chain { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex<V>, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, s: &Simplex<V>) -> Rational {
        self.terms.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, s: Simplex<V>, q: Rational) -> Result<()> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: s.dim() });
        }
        self.add_term_unchecked(s, q);
        Ok(())
    }

    fn add_term_unchecked(&mut self, s: Simplex<V>, q: Rational) {
        if q.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(s) {
            Entry::Vacant(e) => {
                e.insert(q);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += q;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn l1_norm(&self) -> Rational {
        self.terms.values().map(|q| q.abs()).sum()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Chain::zero(self.dim);
        }
        Chain {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim && !other.is_zero() && !self.is_zero() {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = if self.is_zero() { Chain::zero(other.dim) } else { self.clone() };
        for (s, q) in &other.terms {
            out.add_term_unchecked(s.clone(), q.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: &Rational) -> Result<()> {
        if other.dim != self.dim && !other.is_zero() {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        for (k, v) in &other.terms {
            self.add_term_unchecked(k.clone(), v * s);
        }
        Ok(())
    }

    /// Singular boundary `sum_i (-1)^i (face i)`.
    pub fn boundary(&self) -> Result<Self> {
        if self.dim == 0 {
            return Err(Error::BoundaryOfPoint);
        }
        let mut out = Chain::zero(self.dim - 1);
        for (s, q) in &self.terms {
            for i in 0..=self.dim {
                let c = if i % 2 == 0 { q.clone() } else { -q.clone() };
                out.add_term_unchecked(s.face(i), c);
            }
        }
        Ok(out)
    }

    /// Signed average over all vertex permutations.
    pub fn symmetrize(&self) -> Self {
        let perms = Permutation::all(self.dim + 1);
        let weight = Rational::new(BigInt::one(), BigInt::from(perms.len()));
        let mut out = Chain::zero(self.dim);
        for (s, q) in &self.terms {
            let base = q * &weight;
            for p in &perms {
                let c = if p.sign() > 0 { base.clone() } else { -base.clone() };
                out.add_term_unchecked(s.permute(p), c);
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetrize() == *self
    }

    /// Pushforward along a vertex map; merged terms add up.
    pub fn map_vertices<W: Ord + Clone>(&self, mut f: impl FnMut(&V) -> W) -> Chain<W> {
        let mut out = Chain::zero(self.dim);
        for (s, q) in &self.terms {
            out.add_term_unchecked(s.map(&mut f), q.clone());
        }
        out
    }

    /// Rewrites every simplex through `f` (e.g. a canonical lift) and re-sums.
    pub fn map_simplices(&self, mut f: impl FnMut(&Simplex<V>) -> Simplex<V>) -> Self {
        let mut out = Chain::zero(self.dim);
        for (s, q) in &self.terms {
            out.add_term_unchecked(f(s), q.clone());
        }
        out
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Simplex<V>, Rational)> {
        self.terms.into_iter()
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        rational::lcm_of_denominators(self.terms.values())
    }
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for Chain<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{q}[")?;
            for (j, v) in s.0.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}
