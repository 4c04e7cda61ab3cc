//! The Lobachevsky function, regular ideal simplex volumes, the strict
//! injectivity-radius check and the volume bound report.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeBasis, LatticeJson};
use crate::rational::{self, Rational};

/// Absolute error target of [`lobachevsky`].
pub const LOBACHEVSKY_TOL: f64 = 1e-13;

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Gauss-Kronrod 7-15 step: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn go(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, tol / 2.0, depth - 1) + go(f, m, b, tol / 2.0, depth - 1)
    }
    go(&f, a, b, tol, 40)
}

/// `log(sin t / t)`, smooth on `[0, pi/2]`.
fn log_sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        -t2 / 6.0 - t2 * t2 / 180.0
    } else {
        (t.sin() / t).ln()
    }
}

/// `Lambda(theta) = -int_0^theta log|2 sin t| dt`.
///
/// Reduced to `[0, pi/2]` by period `pi` and oddness; there the log
/// singularity is integrated in closed form and the smooth rest by
/// adaptive quadrature.
pub fn lobachevsky(theta: f64) -> f64 {
    let mut x = theta.rem_euclid(PI);
    let mut sign = 1.0;
    if x > PI / 2.0 {
        x = PI - x;
        sign = -1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    // int_0^x log(2 sin t) = x ln 2 + (x ln x - x) + int_0^x log(sin t / t)
    let smooth = integrate(log_sinc, 0.0, x, LOBACHEVSKY_TOL);
    -sign * (x * LN_2 + x * x.ln() - x + smooth)
}

/// `Lambda(theta) = 1/2 sum_n sin(2 n theta) / n^2`, summed until the Abel
/// tail bound `1 / (N^2 |sin theta|)` is below `tol` (capped).
pub fn lobachevsky_fourier(theta: f64, tol: f64) -> f64 {
    let s = theta.sin().abs();
    if s < 1e-15 {
        return 0.0;
    }
    let n = ((1.0 / (tol * s)).sqrt().ceil() as u64).clamp(1000, 200_000_000);
    // sum from the small terms up, compensated
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in (1..=n).rev() {
        let kf = k as f64;
        let y = (2.0 * kf * theta).sin() / (kf * kf) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    0.5 * sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnValue {
    pub n: usize,
    pub value: f64,
    pub provenance: String,
}

/// User-supplied `v_n`, one entry per line: `n value source`.
#[derive(Clone, Debug, Default)]
pub struct VnTable {
    entries: BTreeMap<usize, (f64, String)>,
}

impl VnTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.splitn(3, char::is_whitespace);
            let bad = || Error::Parse(format!("v_n table line {}: {line}", no + 1));
            let n: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let v: f64 = it.next().and_then(|t| t.trim().parse().ok()).ok_or_else(bad)?;
            let src = it.next().map(str::trim).filter(|s| !s.is_empty()).ok_or_else(bad)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(bad());
            }
            entries.insert(n, (v, src.to_string()));
        }
        Ok(VnTable { entries })
    }

    pub fn get(&self, n: usize) -> Option<&(f64, String)> {
        self.entries.get(&n)
    }
}

/// `v_n`: computed for `n = 2, 3`, otherwise looked up in `table`.
pub fn regular_ideal_volume(n: usize, table: Option<&VnTable>) -> Result<VnValue> {
    match n {
        0 | 1 => Err(Error::Invalid(format!("no ideal hyperbolic {n}-simplex"))),
        2 => Ok(VnValue { n, value: PI, provenance: "derived: pi".into() }),
        3 => Ok(VnValue { n, value: 2.0 * lobachevsky(PI / 6.0), provenance: "derived: 2Λ(π/6)".into() }),
        _ => table
            .and_then(|t| t.get(n))
            .map(|(v, src)| VnValue { n, value: *v, provenance: format!("table: {src}") })
            .ok_or(Error::MissingVn(n)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPiCheck {
    /// Squared injectivity radius of the subtorus (exact).
    #[serde(with = "rational::serde_str")]
    pub injectivity_radius_sq: Rational,
    pub injectivity_radius: f64,
    /// `true` only when `inj > pi` is certified.
    pub passes: bool,
    /// `inj - pi` (approximate, for reporting).
    pub margin: f64,
    /// `false` when the interval comparison could not separate `inj` from `pi`.
    pub decided: bool,
}

/// Compares the injectivity radius of the subtorus lattice with `pi` using
/// a rational enclosure of `pi`.
pub fn two_pi_check(subtorus: &LatticeBasis) -> Result<TwoPiCheck> {
    if subtorus.rank() == 0 {
        return Err(Error::Invalid("empty subtorus".into()));
    }
    let inj_sq = lattice::injectivity_radius_sq(subtorus)?;
    let (lo, hi) = rational::pi_interval();
    let above = inj_sq > &hi * &hi;
    let below = inj_sq < &lo * &lo;
    let inj = rational::to_f64(&inj_sq).sqrt();
    Ok(TwoPiCheck { injectivity_radius_sq: inj_sq, injectivity_radius: inj, passes: above, margin: inj - PI, decided: above || below })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FillingSpec {
    pub name: String,
    /// Lattice of the filling subtorus, in the flat metric of its cusp torus.
    pub subtorus: LatticeJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FillingReport {
    pub name: String,
    pub check: TwoPiCheck,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub vol: f64,
    pub v_n: VnValue,
    pub upper_bound: f64,
    /// Present only when every subtorus passes the strict check.
    pub positivity: Option<String>,
    pub fillings: Vec<FillingReport>,
}

pub const POSITIVITY_CITATION: &str =
    "positive by Mineyev-Yaman: fillings along subtori of injectivity radius > π have positive simplicial volume (cited, not computed)";

pub fn bound_report(n: usize, vol: f64, fillings: &[FillingSpec], table: Option<&VnTable>) -> Result<BoundReport> {
    if !(vol.is_finite() && vol > 0.0) {
        return Err(Error::Invalid(format!("volume must be positive, got {vol}")));
    }
    let v_n = regular_ideal_volume(n, table)?;
    let reports = fillings
        .iter()
        .map(|f| Ok(FillingReport { name: f.name.clone(), check: two_pi_check(&LatticeBasis::from_json(&f.subtorus)?)? }))
        .collect::<Result<Vec<_>>>()?;
    let positivity = reports.iter().all(|r| r.check.passes).then(|| POSITIVITY_CITATION.to_string());
    Ok(BoundReport { n, vol, upper_bound: vol / v_n.value, v_n, positivity, fillings: reports })
}

impl BoundReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dimension n        {}", self.n);
        let _ = writeln!(s, "Vol(V)             {:.12}", self.vol);
        let _ = writeln!(s, "v_n                {:.12}  ({})", self.v_n.value, self.v_n.provenance);
        let _ = writeln!(s, "upper bound        {:.12}  (Vol(V) / v_n)", self.upper_bound);
        for f in &self.fillings {
            let verdict = match (f.check.passes, f.check.decided) {
                (true, _) => "passes",
                (false, true) => "fails",
                (false, false) => "undecided",
            };
            let _ = writeln!(
                s,
                "filling {:<10} inj = {:.9}, inj - π = {:+.3e}: {verdict}",
                f.name, f.check.injectivity_radius, f.check.margin
            );
        }
        match &self.positivity {
            Some(c) => {
                let _ = writeln!(s, "lower bound        > 0, {c}");
            }
            None => {
                let _ = writeln!(s, "lower bound        not asserted (some subtorus fails the strict > π check)");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn lobachevsky_trivial_values() {
        assert_eq!(lobachevsky(0.0), 0.0);
        assert!(lobachevsky(PI).abs() < 1e-12);
        assert!(lobachevsky(PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lobachevsky_at_pi_over_six_two_ways() {
        let q = lobachevsky(PI / 6.0);
        let f = lobachevsky_fourier(PI / 6.0, 1e-12);
        assert!((q - 0.507_470_803_204_826_8).abs() < 1e-12, "{q}");
        assert!((q - f).abs() < 1e-9);
    }

    #[test]
    fn odd_periodic_and_maximal_at_pi_over_six() {
        let peak = lobachevsky(PI / 6.0);
        for i in 1..200 {
            let t = i as f64 * 0.0157;
            assert!((lobachevsky(-t) + lobachevsky(t)).abs() < 1e-12);
            assert!((lobachevsky(t + PI) - lobachevsky(t)).abs() < 1e-12);
            assert!(lobachevsky(t) <= peak + 1e-15);
        }
    }

    #[test]
    fn volumes() {
        let v2 = regular_ideal_volume(2, None).unwrap();
        let v3 = regular_ideal_volume(3, None).unwrap();
        assert_eq!(v2.value, PI);
        assert!((v3.value - 1.014_941_606_409_653_6).abs() < 1e-12);
        assert!(v3.value < v2.value);
        assert_eq!(v3.provenance, "derived: 2Λ(π/6)");
        assert!(matches!(regular_ideal_volume(4, None), Err(Error::MissingVn(4))));
        let t = VnTable::parse("# n value source\n4 0.7 test entry\n").unwrap();
        let v4 = regular_ideal_volume(4, Some(&t)).unwrap();
        assert_eq!(v4.provenance, "table: test entry");
        assert!(VnTable::parse("4 x y").is_err());
    }

    fn circle(len: Rational) -> LatticeBasis {
        LatticeBasis::new(vec![vec![len]]).unwrap()
    }

    #[test]
    fn two_pi_checks() {
        assert!(two_pi_check(&circle(int(10))).unwrap().passes);
        let c = two_pi_check(&circle(int(6))).unwrap();
        assert!(!c.passes && c.decided);
        // 2 * 355/113 exceeds 2 pi by about 5e-7
        let c = two_pi_check(&circle(ratio(710, 113))).unwrap();
        assert!(c.passes && c.decided);
        assert!(c.margin > 0.0 && c.margin < 1e-6);
    }

    #[test]
    fn figure_eight_report() {
        let v3 = regular_ideal_volume(3, None).unwrap().value;
        let filling = |name: &str, len: i64| FillingSpec { name: name.into(), subtorus: circle(int(len)).to_json() };
        let r = bound_report(3, 2.0 * v3, &[filling("a", 10)], None).unwrap();
        assert!((r.upper_bound - 2.0).abs() < 1e-9);
        assert!(r.positivity.is_some());
        let r = bound_report(3, 2.0 * v3, &[filling("a", 10), filling("b", 6)], None).unwrap();
        assert!(r.positivity.is_none());
        assert!((r.upper_bound - 2.0).abs() < 1e-9);
        assert!(r.to_text().contains("fails"));
        let r = bound_report(3, v3, &[], None).unwrap();
        assert_eq!(r.upper_bound, 1.0);
        assert!(bound_report(3, -1.0, &[], None).is_err());
    }
}
