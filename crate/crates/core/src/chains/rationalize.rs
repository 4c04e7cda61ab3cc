use num_traits::{Signed, Zero};

use super::{Chain, Simplex};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A chain with finite-precision real coefficients.
#[derive(Clone, Debug)]
pub struct RealChain<V> {
    pub dim: usize,
    pub terms: Vec<(Simplex<V>, f64)>,
}

impl<V: Ord + Clone> RealChain<V> {
    pub fn zero(dim: usize) -> Self {
        RealChain { dim, terms: Vec::new() }
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(_, x)| x.abs()).sum()
    }

    /// Exact value of the float coefficients.
    pub fn to_exact(&self) -> Result<Chain<V>> {
        let mut c = Chain::zero(self.dim);
        for (s, x) in &self.terms {
            let q = rational::from_f64_exact(*x)
                .ok_or_else(|| Error::NotRational(format!("non-finite coefficient {x}")))?;
            c.add_term(s.clone(), q)?;
        }
        Ok(c)
    }
}

/// Largest denominator accepted when recognising a float as a rational.
const RECOGNITION_DENOMINATOR: u64 = 1_000_000;
const RECOGNITION_TOLERANCE: f64 = 1e-13;

fn snap_within(x: &Rational, tol: &Rational) -> Rational {
    let mag = x.abs();
    let xf = rational::to_f64(&mag);
    let mut den = 1u64;
    loop {
        if let Some(r) = rational::best_approximation(xf, den) {
            if (&r - &mag).abs() < *tol {
                return if x.is_negative() { -r } else { r };
            }
        }
        if den > 1 << 52 {
            return x.clone();
        }
        den *= 16;
    }
}

fn recognise(x: &Rational) -> Option<Rational> {
    let mag = x.abs();
    let xf = rational::to_f64(&mag);
    let r = rational::best_approximation(xf, RECOGNITION_DENOMINATOR)?;
    let err = rational::to_f64(&(&r - &mag).abs());
    (err <= RECOGNITION_TOLERANCE * xf.max(1.0)).then(|| if x.is_negative() { -r } else { r })
}

/// Replaces a real chain `c` that is homologous to a rational chain through
/// the witness `f` (so `c + df` is rational) by the rational chain
/// `c + d(f - f')`, where `f'` is a rational approximation of `f`.
/// The result lies within `epsilon` of `c` in l1 norm. Magnitudes are snapped
/// sign-symmetrically, so symmetric `c` and `f` give a symmetric result.
pub fn rationalize<V: Ord + Clone>(c: &RealChain<V>, f: &RealChain<V>, epsilon: &Rational) -> Result<Chain<V>> {
    if !epsilon.is_positive() {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    if !f.terms.is_empty() && f.dim != c.dim + 1 {
        return Err(Error::DimensionMismatch { expected: c.dim + 1, found: f.dim });
    }
    let c_exact = c.to_exact()?;
    let f_exact = if f.terms.is_empty() { Chain::zero(c.dim + 1) } else { f.to_exact()? };
    let df = f_exact.boundary()?;
    let target = c_exact.add(&df)?;

    let mut rational_target = Chain::zero(c.dim);
    for (s, q) in target.iter() {
        let r = recognise(q).ok_or_else(|| {
            Error::NotRational(format!("coefficient {} of c + df", rational::to_f64(q)))
        })?;
        rational_target.add_term(s.clone(), r)?;
    }

    // |d| <= n + 2 on (n+1)-chains; spend half the budget on f - f'.
    let n_terms = Rational::from_integer(f_exact.len().max(1).into());
    let tol = epsilon / (Rational::from_integer((2 * (c.dim + 2)).into()) * n_terms);
    let f_snapped = f_exact.map_coefficients(|q| snap_within(q, &tol));
    let out = rational_target.sub(&f_snapped.boundary()?)?;

    let distance = out.sub(&c_exact)?.l1_norm();
    if distance >= *epsilon {
        return Err(Error::Verification(format!(
            "rationalized chain is {} away in l1, budget {}",
            rational::to_f64(&distance),
            rational::to_f64(epsilon)
        )));
    }
    Ok(out)
}

impl<V: Ord + Clone> Chain<V> {
    pub fn map_coefficients(&self, mut f: impl FnMut(&Rational) -> Rational) -> Self {
        let mut out = Chain::zero(self.dim());
        for (s, q) in self.iter() {
            let v = f(q);
            if !v.is_zero() {
                out.add_term(s.clone(), v).expect("same dimension");
            }
        }
        out
    }
}
