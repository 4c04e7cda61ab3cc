use num_traits::One;

use super::{AffineChain, Chain, Point, Simplex};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Standard triangulation of the straight-line homotopy from `bottom` to
/// `top`: `sum_i (-1)^i [a_0, ..., a_i, b_i, ..., b_s]`.
///
/// Satisfies `d prism(s) = top - bottom - sum_i (-1)^i prism(face_i)`.
pub fn prism(bottom: &Simplex<Point>, top: &Simplex<Point>) -> Result<AffineChain> {
    let s = bottom.dim();
    if top.dim() != s {
        return Err(Error::DimensionMismatch { expected: s, found: top.dim() });
    }
    let (a, b) = (bottom.vertices(), top.vertices());
    let mut out = Chain::zero(s + 1);
    for i in 0..=s {
        let mut v = Vec::with_capacity(s + 2);
        v.extend_from_slice(&a[..=i]);
        v.extend_from_slice(&b[i..]);
        let c = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
        out.add_term(Simplex(v), c)?;
    }
    Ok(out)
}

/// Applies [`prism`] linearly, pairing each simplex with `straighten(simplex)`.
pub fn prism_chain(
    bottom: &AffineChain,
    mut top_of: impl FnMut(&Simplex<Point>) -> Result<Simplex<Point>>,
) -> Result<AffineChain> {
    let mut out = Chain::zero(bottom.dim() + 1);
    for (s, q) in bottom.iter() {
        let t = top_of(s)?;
        out.add_assign_scaled(&prism(s, &t)?, q)?;
    }
    Ok(out)
}
