//! Affine filling norms, the constants `C_1`, `C_2`, and certified fillings
//! of null-homologous straight cycles on flat tori.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::lp::l1_minimize;
use crate::chains::{homotopy_p, mu, AffineChain, Chain, ChainJson};
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeBasis, LatticeJson, SublatticeMap};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};
use crate::torus::{canonical_chain, is_small, project, straighten_chain, transfer, triangulate, TorusComplex};

/// Minimal l1 norm of a simplicial `(s+1)`-chain of `t` with boundary `y`.
pub fn simplicial_filling(t: &TorusComplex, s: usize, y: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
    let not_boundary = || Error::NotNullHomologous("boundary-matrix image does not contain the chain".into());
    if s >= t.dim() {
        return if y.iter().all(Zero::is_zero) { Ok((Rational::zero(), Vec::new())) } else { Err(not_boundary()) };
    }
    let d = t.dense_boundary(s + 1);
    match l1_minimize(&d, t.cell_count(s + 1), y) {
        Err(Error::Infeasible) => Err(not_boundary()),
        r => r,
    }
}

/// The affine filling norm of an affine `s`-chain `b` of `t`, with the
/// minimizing symmetric chain `i(x)` (whose boundary is `S(b)`).
pub fn filling_norm(b: &AffineChain, t: &TorusComplex) -> Result<(Rational, AffineChain)> {
    let s = b.dim();
    let y = t.to_simplicial(b)?;
    let (v, x) = simplicial_filling(t, s, &y)?;
    let w = if x.is_empty() { Chain::zero(s + 1) } else { t.from_simplicial(s + 1, &x) };
    Ok((v, w))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C2Value {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    /// `false` when `value` is only an upper bound.
    pub exact: bool,
    pub method: String,
}

/// `C_2(d, s)`: the sup of the filling norm over boundaries of l1 norm one.
///
/// For `d <= 2, s <= 1` this is exact: the sup of a convex homogeneous
/// function over the l1 unit ball of the boundary space `B` is attained at
/// a vertex of the ball, i.e. at a normalized elementary vector (circuit)
/// of `B`. Otherwise an invertible square block `M` of the boundary matrix
/// gives the bound `max column sum |M^-1|`.
pub fn c2_constant(t: &TorusComplex, s: usize) -> Result<C2Value> {
    let d = t.dim();
    if s >= d {
        return Ok(C2Value { value: Rational::zero(), exact: true, method: "no (s+1)-cells".into() });
    }
    let bd = t.dense_boundary(s + 1);
    let cols = t.cell_count(s + 1);
    let mut r = bd.clone();
    let piv = linalg::rref(&mut r);
    let basis: Matrix = bd.iter().map(|row| piv.iter().map(|&j| row[j].clone()).collect()).collect();
    if d <= 2 && s <= 1 {
        let mut best = Rational::zero();
        for b in circuits(&basis) {
            let (v, _) = l1_minimize(&bd, cols, &b)?;
            if v > best {
                best = v;
            }
        }
        return Ok(C2Value { value: best, exact: true, method: "circuit enumeration".into() });
    }
    // independent rows of the pivot block
    let mut bt = linalg::transpose(&basis);
    let rows = linalg::rref(&mut bt);
    let block: Matrix = rows.iter().map(|&i| basis[i].clone()).collect();
    let inv = linalg::inverse(&block).ok_or_else(|| Error::Verification("singular boundary block".into()))?;
    let value = (0..inv.len()).map(|j| inv.iter().map(|row| row[j].abs()).sum::<Rational>()).max().unwrap_or_default();
    Ok(C2Value { value, exact: false, method: "inverse of a basis block (upper bound)".into() })
}

/// Normalized elementary vectors (up to sign) of the column space of `m`.
fn circuits(m: &Matrix) -> Vec<Vec<Rational>> {
    let rows = m.len();
    let r = m.first().map_or(0, Vec::len);
    let mut out = BTreeSet::new();
    if r == 0 {
        return Vec::new();
    }
    for zeros in combinations(rows, r - 1) {
        let sub: Matrix = zeros.iter().map(|&i| m[i].clone()).collect();
        let ns = if sub.is_empty() {
            if r == 1 { vec![vec![Rational::one()]] } else { continue }
        } else {
            linalg::nullspace(&sub, r)
        };
        if ns.len() != 1 {
            continue;
        }
        let mut b = linalg::mat_vec(m, &ns[0]);
        let n = linalg::l1(&b);
        if n.is_zero() {
            continue;
        }
        let first_neg = b.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
        let scale = if first_neg { -n } else { n };
        for x in b.iter_mut() {
            *x /= &scale;
        }
        out.insert(b);
    }
    out.into_iter().collect()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] != i + n - k) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// `C_2(d, s)` on the standard torus. The combinatorics of `T_B` do not
/// depend on `B`, so the value serves every basis.
pub fn c2_for(d: usize, s: usize) -> Result<C2Value> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), C2Value>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache").get(&(d, s)) {
        return Ok(v.clone());
    }
    let v = c2_constant(&triangulate(&LatticeBasis::standard(d))?, s)?;
    cache.lock().expect("cache").insert((d, s), v.clone());
    Ok(v)
}

/// `C_1(s) = s + 1`: simplices per prism.
pub fn c1_constant(s: usize) -> Rational {
    rational::int(s as i64 + 1)
}

/// `K(d, s) = C_1(s) + C_2(d, s)`.
pub fn k_constant(d: usize, s: usize) -> Result<Rational> {
    Ok(c1_constant(s) + c2_for(d, s)?.value)
}

/// The real homology class of a straight `s`-cycle in `H_s(T) = Lambda^s R^d`,
/// in lattice coordinates: coefficients of `e_I` for increasing `s`-subsets
/// `I`, from the `s x s` minors of the edge vectors divided by `s!`.
pub fn homology_class(z: &AffineChain, b: &LatticeBasis) -> Vec<Rational> {
    let s = z.dim();
    if s == 0 {
        return vec![z.iter().map(|(_, q)| q.clone()).sum()];
    }
    let subsets = combinations(b.rank(), s);
    let fact: Rational = (1..=s as i64).map(rational::int).product();
    let mut out = vec![Rational::zero(); subsets.len()];
    for (simplex, q) in z.iter() {
        let v = simplex.vertices();
        let base = b.coords_of(v[0].coords());
        let edges: Matrix = v[1..]
            .iter()
            .map(|p| b.coords_of(p.coords()).iter().zip(&base).map(|(x, y)| x - y).collect())
            .collect();
        for (slot, cols) in out.iter_mut().zip(&subsets) {
            let minor: Matrix = edges.iter().map(|e| cols.iter().map(|&c| e[c].clone()).collect()).collect();
            *slot += linalg::determinant(&minor) * q / &fact;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub name: &'static str,
    pub norm: Rational,
    pub chain: AffineChain,
}

#[derive(Clone, Debug)]
pub struct FillingCertificate {
    pub input_cycle: AffineChain,
    pub filling: AffineChain,
    pub norm: Rational,
    /// `K(d, s)`, plus `|mu_s|` when the cycle was not symmetric.
    pub constant_used: Rational,
    pub c1: Rational,
    pub c2: C2Value,
    pub symmetric: bool,
    pub cover_degree: u64,
    /// The reduced basis everything is expressed in.
    pub basis: LatticeBasis,
    pub stages: Vec<Stage>,
}

/// Fills a null-homologous straight `s`-cycle `z` on `R^d / L(b)`: cover,
/// transfer, straighten, prism (`c_1`), affine fill (`c_2`), project.
///
/// A non-symmetric `z` is first replaced by `S(z)`; the homotopy `P(z)`
/// makes up the difference, at the cost of `|mu_s|` in the constant.
pub fn fill_cycle(z: &AffineChain, b: &LatticeBasis, s: usize) -> Result<FillingCertificate> {
    if z.dim() != s {
        return Err(Error::DimensionMismatch { expected: s, found: z.dim() });
    }
    if b.rank() != b.ambient_dim() {
        return Err(Error::Invalid("the torus lattice must have full rank".into()));
    }
    if let Some((simplex, _)) = z.iter().find(|(x, _)| x.vertices().iter().any(|p| p.dim() != b.ambient_dim())) {
        return Err(Error::Invalid(format!("vertex dimension of {simplex:?} differs from {}", b.ambient_dim())));
    }
    let d = b.rank();
    let br = lattice::lll_reduce(b)?;
    let zc = canonical_chain(&br, z);
    if s > 0 && !canonical_chain(&br, &zc.boundary()?).is_zero() {
        return Err(Error::NotACycle);
    }
    let class = homology_class(&zc, &br);
    if class.iter().any(|x| !x.is_zero()) {
        let f: Vec<String> = class.iter().map(ToString::to_string).collect();
        return Err(Error::NotNullHomologous(format!("[{}]", f.join(", "))));
    }

    let mut stages = Vec::new();
    let mut stage = |name, c: &AffineChain| stages.push(Stage { name, norm: c.l1_norm(), chain: c.clone() });
    stage("input", &zc);
    let zs = canonical_chain(&br, &zc.symmetrize());
    let symmetric = zs == zc;
    stage("symmetrize", &zs);

    let c1k = c1_constant(s);
    let c2 = c2_for(d, s)?;
    let (c_sym, k) = if zs.is_zero() {
        (Chain::zero(s + 1), 1)
    } else {
        fill_symmetric(&zs, &br, s, &mut stage)?
    };
    let (filling, constant_used) = if symmetric {
        (c_sym, &c1k + &c2.value)
    } else {
        let p = canonical_chain(&br, &homotopy_p(&zc)?);
        stage("homotopy", &p);
        (c_sym.sub(&p)?, &c1k + &c2.value + mu(s)?.l1_norm())
    };
    stage("filling", &filling);
    let cert = FillingCertificate {
        input_cycle: z.clone(),
        norm: filling.l1_norm(),
        filling,
        constant_used,
        c1: c1k,
        c2,
        symmetric,
        cover_degree: k,
        basis: br,
        stages,
    };
    cert.recheck()?;
    Ok(cert)
}

/// Least `k` with `(k lb)^2 > diam^2`.
fn first_degree(lb: &Rational, diam_sq: &Rational) -> u64 {
    if !lb.is_positive() {
        return 1;
    }
    let guess = (rational::to_f64(diam_sq).sqrt() / rational::to_f64(lb)).floor().max(0.0) as u64;
    let mut k = guess.saturating_sub(1).max(1);
    while Rational::from_integer((k * k).into()) * lb * lb <= *diam_sq {
        k += 1;
    }
    k
}

const MAX_COVER_DEGREE: u64 = 4096;

fn fill_symmetric(
    zs: &AffineChain,
    br: &LatticeBasis,
    s: usize,
    stage: &mut impl FnMut(&'static str, &AffineChain),
) -> Result<(AffineChain, u64)> {
    let t1 = triangulate(br)?;
    let diam = zs.iter().map(|(x, _)| diameter_sq(x)).max().unwrap_or_default();
    let mut k = first_degree(&t1.star().lebesgue_lb, &diam);
    let (t, m, zt) = loop {
        if k > MAX_COVER_DEGREE {
            return Err(Error::Verification(format!("no cover of degree <= {MAX_COVER_DEGREE} certifies smallness")));
        }
        let m = SublatticeMap::homothety(br, k)?;
        let t = triangulate(&m.child)?;
        let zt = transfer(zs, &m);
        let mut ok = true;
        for (x, _) in zt.iter() {
            match is_small(&t, x) {
                Ok(Some(_)) => {}
                Ok(None) | Err(Error::TooLargeToLift) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            break (t, m, zt);
        }
        log::debug!("cover degree {k} does not certify smallness");
        k += 1;
    };
    stage("transfer", &zt);
    let (a, c1) = straighten_chain(&t, &zt)?;
    stage("straighten", &a);
    stage("prism", &c1);
    if t.canonicalize(&c1.boundary()?) != t.canonicalize(&a.sub(&zt)?) {
        return Err(Error::Verification("prism boundary differs from a(z) - z".into()));
    }
    let y = t.to_simplicial(&a)?;
    let (_, x) = simplicial_filling(&t, s, &y)?;
    let c2 = if x.is_empty() { Chain::zero(s + 1) } else { t.from_simplicial(s + 1, &x) };
    stage("affine fill", &c2);
    if t.canonicalize(&c2.boundary()?) != a {
        return Err(Error::Verification("straightened cycle is not symmetric".into()));
    }
    let cover = t.canonicalize(&c2.sub(&c1)?);
    stage("cover filling", &cover);
    let down = project(&cover, &m);
    stage("projection", &down);
    Ok((down, k))
}

fn diameter_sq(s: &crate::chains::Simplex<crate::chains::Point>) -> Rational {
    let v = s.vertices();
    let mut best = Rational::zero();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let e = v[i].sub(&v[j]);
            let q = linalg::dot(e.coords(), e.coords());
            if q > best {
                best = q;
            }
        }
    }
    best
}

impl FillingCertificate {
    /// Re-verifies `d(filling) = input` on the torus and the norm bound.
    pub fn recheck(&self) -> Result<()> {
        let z = canonical_chain(&self.basis, &self.input_cycle);
        let bd = canonical_chain(&self.basis, &self.filling.boundary()?);
        if bd != z {
            return Err(Error::Verification("boundary of the filling differs from the cycle".into()));
        }
        if self.norm != self.filling.l1_norm() {
            return Err(Error::Verification("recorded norm differs from the filling".into()));
        }
        if self.norm > &self.constant_used * z.l1_norm() {
            return Err(Error::Verification("filling norm exceeds the constant".into()));
        }
        Ok(())
    }

    pub fn stage_norm(&self, name: &str) -> Option<&Rational> {
        self.stages.iter().find(|s| s.name == name).map(|s| &s.norm)
    }

    pub fn to_json(&self) -> FillingCertificateJson {
        FillingCertificateJson {
            input_cycle: self.input_cycle.to_json(),
            filling: self.filling.to_json(),
            norm: rational::format(&self.norm),
            constant_used: rational::format(&self.constant_used),
            c1: rational::format(&self.c1),
            c2: self.c2.clone(),
            symmetric: self.symmetric,
            cover_degree: self.cover_degree,
            basis: self.basis.to_json(),
            stages: self
                .stages
                .iter()
                .map(|s| StageJson { name: s.name.to_string(), norm: rational::format(&s.norm), chain: s.chain.to_json() })
                .collect(),
        }
    }

    pub fn from_json(j: &FillingCertificateJson) -> Result<Self> {
        let stages = j
            .stages
            .iter()
            .map(|s| {
                let name = STAGE_NAMES
                    .iter()
                    .find(|n| **n == s.name)
                    .ok_or_else(|| Error::Parse(format!("unknown stage {}", s.name)))?;
                Ok(Stage { name, norm: rational::parse(&s.norm)?, chain: Chain::from_json(&s.chain)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FillingCertificate {
            input_cycle: Chain::from_json(&j.input_cycle)?,
            filling: Chain::from_json(&j.filling)?,
            norm: rational::parse(&j.norm)?,
            constant_used: rational::parse(&j.constant_used)?,
            c1: rational::parse(&j.c1)?,
            c2: j.c2.clone(),
            symmetric: j.symmetric,
            cover_degree: j.cover_degree,
            basis: LatticeBasis::from_json(&j.basis)?,
            stages,
        })
    }
}

const STAGE_NAMES: [&str; 11] = [
    "input",
    "symmetrize",
    "transfer",
    "straighten",
    "prism",
    "affine fill",
    "cover filling",
    "projection",
    "homotopy",
    "filling",
    "other",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageJson {
    pub name: String,
    pub norm: String,
    pub chain: ChainJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FillingCertificateJson {
    pub input_cycle: ChainJson,
    pub filling: ChainJson,
    pub norm: String,
    pub constant_used: String,
    pub c1: String,
    pub c2: C2Value,
    pub symmetric: bool,
    pub cover_degree: u64,
    pub basis: LatticeJson,
    pub stages: Vec<StageJson>,
}
