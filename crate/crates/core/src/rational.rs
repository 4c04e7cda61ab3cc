//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"` exactly.
pub fn parse(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Canonical `"p/q"` string; integers keep the `/1` so the format is uniform.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator overflow f64: scale down by bit length first
        let shift = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
        let scaled = if shift > 0 {
            Rational::new(r.numer() >> shift as usize, r.denom() >> shift as usize)
        } else {
            r.clone()
        };
        scaled.to_f64().unwrap_or(f64::NAN)
    })
}

/// Exact value of a finite float.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Nearest integer, ties rounded up.
pub fn round_half_up(r: &Rational) -> BigInt {
    floor(&(r + ratio(1, 2)))
}

pub fn lcm_of_denominators<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn best_approximation(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let exact = Rational::from_float(x)?;
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let max_den = BigInt::from(max_den);
    let mut rem = exact.clone();
    loop {
        let a = floor(&rem);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > max_den {
            // semiconvergent with the largest admissible multiplier
            let k = (&max_den - &q0) / &q1;
            let ps = &k * &p1 + &p0;
            let qs = &k * &q1 + &q0;
            let conv = Rational::new(p1.clone(), q1.clone());
            if qs.is_zero() {
                return Some(conv);
            }
            let semi = Rational::new(ps, qs);
            let dc = (&conv - &exact).abs();
            let ds = (&semi - &exact).abs();
            return Some(if ds < dc { semi } else { conv });
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            return Some(Rational::new(p1, q1));
        }
        rem = frac.recip();
    }
}

/// A rational `r` with `r <= sqrt(x)`, within about `1e-12` relative.
pub fn sqrt_lower(x: &Rational) -> Rational {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    if x.is_zero() {
        return Rational::zero();
    }
    let mut r = Rational::from_float(to_f64(x).sqrt()).unwrap_or_else(Rational::zero);
    let step = &r * ratio(1, 1 << 40) + ratio(1, 1 << 60);
    while &r * &r > *x {
        r -= &step;
    }
    if r.is_negative() {
        Rational::zero()
    } else {
        r
    }
}

/// A rational `r` with `r >= sqrt(x)`, within about `1e-12` relative.
pub fn sqrt_upper(x: &Rational) -> Rational {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    if x.is_zero() {
        return Rational::zero();
    }
    let mut r = Rational::from_float(to_f64(x).sqrt()).unwrap_or_else(Rational::one);
    let step = &r * ratio(1, 1 << 40) + ratio(1, 1 << 60);
    while &r * &r < *x {
        r += &step;
    }
    r
}

/// Shortens a rational to one with a power-of-two denominator below it,
/// keeping `bits` fractional bits. Used to stop denominators from growing.
pub fn truncate_down(x: &Rational, bits: usize) -> Rational {
    let scale = BigInt::one() << bits;
    let scaled = x * Rational::from_integer(scale.clone());
    Rational::new(floor(&scaled), scale)
}

pub fn truncate_up(x: &Rational, bits: usize) -> Rational {
    -truncate_down(&-x, bits)
}

/// Rational enclosure of pi, 40 correct decimal digits.
pub fn pi_interval() -> (Rational, Rational) {
    let digits = "31415926535897932384626433832795028841971";
    let num: BigInt = digits.parse().expect("digits");
    let den = num_traits::pow(BigInt::from(10), digits.len() - 1);
    let lo = Rational::new(num.clone(), den.clone());
    let hi = Rational::new(num + 1, den);
    (lo, hi)
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}
