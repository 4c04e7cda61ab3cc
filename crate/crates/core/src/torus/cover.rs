//! Canonical lifts, transfer to a homothetic cover and projection back.

use num_traits::Zero;

use super::split_mod_one;
use crate::chains::{AffineChain, Chain, Point, Simplex};
use crate::lattice::{LatticeBasis, SublatticeMap};
use crate::rational::Rational;

/// Translates a straight simplex by a lattice vector so that vertex 0 has
/// lattice coordinates in `[0, 1)^d`.
pub fn canonical_simplex(b: &LatticeBasis, s: &Simplex<Point>) -> Simplex<Point> {
    let f = b.coords_of(s.vertices()[0].coords());
    let (shift, _) = split_mod_one(&f);
    if shift.iter().all(Zero::is_zero) {
        return s.clone();
    }
    let t = Point(b.integer_combination(&shift));
    s.map(|p| p.sub(&t))
}

/// Reduces a chain of straight simplices modulo the lattice, merging terms
/// that become equal.
pub fn canonical_chain(b: &LatticeBasis, c: &AffineChain) -> AffineChain {
    let mut out = Chain::zero(c.dim());
    for (s, q) in c.iter() {
        out.add_term(canonical_simplex(b, s), q.clone()).expect("same dimension");
    }
    out
}

/// The transfer to the cover `R^d / kL`: every simplex is replaced by the
/// average of its `k^d` lifts.
pub fn transfer(c: &AffineChain, m: &SublatticeMap) -> AffineChain {
    let weight = Rational::new(1.into(), m.index.into());
    let reps: Vec<Point> = m.coset_reps().into_iter().map(Point).collect();
    let mut out = Chain::zero(c.dim());
    for (s, q) in c.iter() {
        let base = canonical_simplex(&m.parent, s);
        let w = q * &weight;
        for r in &reps {
            let lift = canonical_simplex(&m.child, &base.map(|p| p.add(r)));
            out.add_term(lift, w.clone()).expect("same dimension");
        }
    }
    out
}

/// The covering projection on chains: reduce modulo the parent lattice.
pub fn project(c: &AffineChain, m: &SublatticeMap) -> AffineChain {
    canonical_chain(&m.parent, c)
}
