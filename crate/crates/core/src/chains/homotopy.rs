//! Cone operator, the homotopy chains `mu_n`, and the chain homotopy
//! `P` between symmetrization and the identity.
//!
//! Chains "in the model simplex" use barycentric coordinates: a point of
//! the standard n-simplex is a vector of `n + 1` nonnegative rationals
//! summing to one, and vertex `e_i` is the i-th unit vector.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{AffineChain, Chain, Permutation, Point, Simplex};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest `n` for which `mu_n` is built (it has about 31k terms at n = 6).
pub const MAX_MU_DIM: usize = 6;

fn unit(n: usize, i: usize) -> Point {
    let mut v = vec![Rational::zero(); n + 1];
    v[i] = Rational::one();
    Point(v)
}

fn model_barycenter(n: usize) -> Point {
    Point(vec![Rational::new(BigInt::one(), BigInt::from(n + 1)); n + 1])
}

fn in_model_simplex(n: usize, p: &Point) -> bool {
    p.dim() == n + 1 && p.0.iter().all(|c| !c.is_negative()) && p.0.iter().sum::<Rational>().is_one()
}

/// Identity simplex `[e_0, ..., e_n]` of the model n-simplex.
pub fn identity_simplex(n: usize) -> Simplex<Point> {
    Simplex((0..=n).map(|i| unit(n, i)).collect())
}

/// Cones every simplex of `a` to the barycenter of the model n-simplex;
/// the barycenter becomes vertex 0.
pub fn cone(n: usize, a: &AffineChain) -> Result<AffineChain> {
    let apex = model_barycenter(n);
    let mut out = Chain::zero(a.dim() + 1);
    for (s, q) in a.iter() {
        if !s.vertices().iter().all(|p| in_model_simplex(n, p)) {
            return Err(Error::NotInModelSimplex);
        }
        let mut v = Vec::with_capacity(s.vertices().len() + 1);
        v.push(apex.clone());
        v.extend(s.vertices().iter().cloned());
        out.add_term(Simplex(v), q.clone())?;
    }
    Ok(out)
}

/// Pushes a chain in the model simplex forward along the affine map
/// sending `e_i` to vertex `i` of `phi`.
pub fn pushforward(model_chain: &AffineChain, phi: &Simplex<Point>) -> Result<AffineChain> {
    let images = phi.vertices();
    let ambient = images[0].dim();
    if images.iter().any(|p| p.dim() != ambient) {
        return Err(Error::NotAffine);
    }
    let mut out = Chain::zero(model_chain.dim());
    for (s, q) in model_chain.iter() {
        let mut verts = Vec::with_capacity(s.vertices().len());
        for bary in s.vertices() {
            if bary.dim() != images.len() {
                return Err(Error::NotInModelSimplex);
            }
            verts.push(Point::combination(&bary.0, images));
        }
        out.add_term(Simplex(verts), q.clone())?;
    }
    Ok(out)
}

static MU: [OnceLock<AffineChain>; MAX_MU_DIM + 1] = [const { OnceLock::new() }; MAX_MU_DIM + 1];

/// The (n+1)-chain `mu_n` in the model n-simplex, memoized.
pub fn mu(n: usize) -> Result<&'static AffineChain> {
    if n > MAX_MU_DIM {
        return Err(Error::MuTooLarge(n));
    }
    if let Some(m) = MU[n].get() {
        return Ok(m);
    }
    let built = build_mu(n)?;
    Ok(MU[n].get_or_init(|| built))
}

fn build_mu(n: usize) -> Result<AffineChain> {
    if n == 0 {
        return Ok(Chain::zero(1));
    }
    let id = identity_simplex(n);
    let perms = Permutation::all(n + 1);
    let weight = Rational::new(BigInt::one(), BigInt::from(perms.len()));
    let mut sym = Chain::zero(n);
    for p in &perms {
        let c = if p.sign() > 0 { weight.clone() } else { -weight.clone() };
        sym.add_term(id.permute(p), c)?;
    }
    let id_chain = Chain::simplex(id);
    let p_boundary = homotopy_p(&id_chain.boundary()?)?;
    let mut out = cone(n, &sym)?;
    out.add_assign_scaled(&cone(n, &id_chain)?, &-Rational::one())?;
    out.add_assign_scaled(&cone(n, &p_boundary)?, &-Rational::one())?;
    Ok(out)
}

/// The chain homotopy: `P(phi) = phi_#(mu_n)` on each n-simplex, extended
/// linearly. Satisfies `dP(c) = S(c) - c - P(dc)` exactly.
pub fn homotopy_p(c: &AffineChain) -> Result<AffineChain> {
    let k = c.dim();
    let mut out = Chain::zero(k + 1);
    if k == 0 {
        return Ok(out);
    }
    let m = mu(k)?;
    for (s, q) in c.iter() {
        out.add_assign_scaled(&pushforward(m, s)?, q)?;
    }
    Ok(out)
}
