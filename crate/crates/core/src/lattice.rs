//! Rational lattices: LLL reduction, Babai angles, shortest vectors and
//! homothetic covers.
//!
//! A basis may have fewer vectors than the ambient dimension (a subtorus or
//! quotient torus sitting in a larger space); everything works in terms of
//! the Gram matrix.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};

/// Ordered list of linearly independent rational vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    vectors: Vec<Vec<Rational>>,
    ambient: usize,
    gram: Matrix,
    gram_inv: Matrix,
}

impl LatticeBasis {
    pub fn new(vectors: Vec<Vec<Rational>>) -> Result<Self> {
        let ambient = vectors.first().map_or(0, Vec::len);
        Self::new_in(ambient, vectors)
    }

    /// A basis of `vectors.len()` vectors in `R^ambient` (possibly none, for
    /// the point torus).
    pub fn new_in(ambient: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::Invalid("basis vectors of different lengths".into()));
        }
        if vectors.len() > ambient {
            return Err(Error::DependentBasis);
        }
        let gram: Matrix = vectors
            .iter()
            .map(|u| vectors.iter().map(|v| linalg::dot(u, v)).collect())
            .collect();
        let gram_inv = linalg::inverse(&gram).ok_or(Error::DependentBasis)?;
        Ok(LatticeBasis { vectors, ambient, gram, gram_inv })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| rational::int(x)).collect()).collect())
    }

    /// The standard basis of Z^d.
    pub fn standard(d: usize) -> Self {
        let vectors = linalg::identity(d);
        LatticeBasis { gram: vectors.clone(), gram_inv: vectors.clone(), vectors, ambient: d }
    }

    /// Number of basis vectors (the torus dimension).
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &Matrix {
        &self.gram_inv
    }

    /// Squared covolume `det G`.
    pub fn gram_det(&self) -> Rational {
        linalg::determinant(&self.gram)
    }

    pub fn scale(&self, s: &Rational) -> Result<Self> {
        Self::new_in(self.ambient, self.vectors.iter().map(|v| v.iter().map(|x| x * s).collect()).collect())
    }

    /// Lattice coordinates of an ambient point in the span of the basis.
    pub fn coords_of(&self, x: &[Rational]) -> Vec<Rational> {
        let bx: Vec<Rational> = self.vectors.iter().map(|v| linalg::dot(v, x)).collect();
        linalg::mat_vec(&self.gram_inv, &bx)
    }

    /// Ambient point `sum c_i v_i`.
    pub fn point_of(&self, coords: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.ambient_dim()];
        for (c, v) in coords.iter().zip(&self.vectors) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }

    pub fn integer_combination(&self, coeffs: &[BigInt]) -> Vec<Rational> {
        let c: Vec<Rational> = coeffs.iter().map(|x| Rational::from_integer(x.clone())).collect();
        self.point_of(&c)
    }

    /// Squared Euclidean norm of a vector given in lattice coordinates.
    pub fn norm_sq_of_coords(&self, c: &[Rational]) -> Rational {
        linalg::dot(c, &linalg::mat_vec(&self.gram, c))
    }

    /// True when every vector of `other` is an integer combination of `self`.
    pub fn contains_lattice(&self, other: &LatticeBasis) -> bool {
        other.vectors.iter().all(|v| {
            let c = self.coords_of(v);
            self.point_of(&c) == *v && c.iter().all(|x| x.is_integer())
        })
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            dim: self.rank(),
            vectors: self.vectors.iter().map(|v| v.iter().map(rational::format).collect()).collect(),
            ambient: (self.ambient != self.rank()).then_some(self.ambient),
        }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        if j.vectors.len() != j.dim {
            return Err(Error::Parse(format!("expected {} vectors, found {}", j.dim, j.vectors.len())));
        }
        let vectors = j
            .vectors
            .iter()
            .map(|v| v.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let ambient = j.ambient.or_else(|| vectors.first().map(Vec::len)).unwrap_or(j.dim);
        Self::new_in(ambient, vectors)
    }
}

/// `{"dim": d, "vectors": [["p/q", ...], ...]}`
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct LatticeJson {
    pub dim: usize,
    pub vectors: Vec<Vec<String>>,
    /// Only needed when it differs from `dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<usize>,
}

/// Gram-Schmidt data: `mu[i][j]` for j < i and squared norms `b[i]` of the
/// orthogonalized vectors, from the Gram matrix alone.
fn gram_schmidt(gram: &Matrix) -> (Matrix, Vec<Rational>) {
    let n = gram.len();
    let mut mu = linalg::zeros(n, n);
    let mut b = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = gram[i][j].clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = gram[i][i].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b[i] = s;
        mu[i][i] = Rational::one();
    }
    (mu, b)
}

fn lovasz_delta() -> Rational {
    rational::ratio(3, 4)
}

/// LLL reduction with `delta = 3/4` in exact arithmetic.
pub fn lll_reduce(b: &LatticeBasis) -> Result<LatticeBasis> {
    Ok(lll_reduce_with_transform(b)?.0)
}

/// As [`lll_reduce`], also returning the unimodular integer matrix `U` with
/// `reduced_i = sum_j U[i][j] b_j`.
pub fn lll_reduce_with_transform(b: &LatticeBasis) -> Result<(LatticeBasis, Vec<Vec<BigInt>>)> {
    let n = b.rank();
    let mut vecs = b.vectors.clone();
    let mut u: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let delta = lovasz_delta();
    let gram_of = |vecs: &Vec<Vec<Rational>>| -> Matrix {
        vecs.iter().map(|x| vecs.iter().map(|y| linalg::dot(x, y)).collect()).collect()
    };
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&gram_of(&vecs));
            let m = &mu[k][j];
            if m.abs() > rational::ratio(1, 2) {
                let r = rational::round_half_up(m);
                let rq = Rational::from_integer(r.clone());
                let vj = vecs[j].clone();
                for (x, y) in vecs[k].iter_mut().zip(&vj) {
                    *x -= &rq * y;
                }
                let uj = u[j].clone();
                for (x, y) in u[k].iter_mut().zip(&uj) {
                    *x -= &r * y;
                }
            }
        }
        let (mu, bs) = gram_schmidt(&gram_of(&vecs));
        if bs[k] >= (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bs[k - 1] {
            k += 1;
        } else {
            vecs.swap(k, k - 1);
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok((LatticeBasis::new_in(b.ambient, vecs)?, u))
}

/// Exact check of size reduction and the Lovász condition with `delta = 3/4`.
pub fn is_lll_reduced(b: &LatticeBasis) -> bool {
    let (mu, bs) = gram_schmidt(&b.gram);
    let half = rational::ratio(1, 2);
    let delta = lovasz_delta();
    let n = b.rank();
    (0..n).all(|i| (0..i).all(|j| mu[i][j].abs() <= half))
        && (1..n).all(|k| bs[k] >= (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bs[k - 1])
}

/// `sin^2` of the angle between `v_k` and the span of the other vectors,
/// exactly: `det G / (det G_{-k} * G_kk)`.
pub fn babai_sin_squared(b: &LatticeBasis) -> Vec<Rational> {
    let n = b.rank();
    let det = b.gram_det();
    (0..n)
        .map(|k| {
            if n == 1 {
                return Rational::one();
            }
            let minor: Matrix = (0..n)
                .filter(|&i| i != k)
                .map(|i| (0..n).filter(|&j| j != k).map(|j| b.gram[i][j].clone()).collect())
                .collect();
            &det / (linalg::determinant(&minor) * &b.gram[k][k])
        })
        .collect()
}

/// Angles (radians) between each basis vector and the span of the others.
pub fn babai_angles(b: &LatticeBasis) -> Vec<f64> {
    babai_sin_squared(b).iter().map(|s| rational::to_f64(s).sqrt().min(1.0).asin()).collect()
}

/// Largest rank handled by [`shortest_vector`].
pub const MAX_SVP_DIM: usize = 6;

/// Shortest nonzero lattice vector, exactly, by Fincke-Pohst enumeration on
/// the LLL-reduced basis. Returns the vector and its squared length.
pub fn shortest_vector(b: &LatticeBasis) -> Result<(Vec<Rational>, Rational)> {
    let n = b.rank();
    if n > MAX_SVP_DIM {
        return Err(Error::DimensionTooLarge(n, MAX_SVP_DIM));
    }
    if n == 0 {
        return Err(Error::Invalid("rank-zero lattice has no nonzero vector".into()));
    }
    let red = lll_reduce(b)?;
    let (mu, bs) = gram_schmidt(&red.gram);
    // the first reduced vector is a valid starting radius
    let mut best_sq = red.gram[0][0].clone();
    let mut best: Vec<BigInt> = (0..n).map(|i| if i == 0 { BigInt::one() } else { BigInt::zero() }).collect();
    let mut x = vec![BigInt::zero(); n];
    enumerate(n, &mu, &bs, &red.gram, &mut x, &Rational::zero(), &mut best_sq, &mut best);
    Ok((red.integer_combination(&best), best_sq))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    level: usize,
    mu: &Matrix,
    bs: &[Rational],
    gram: &Matrix,
    x: &mut Vec<BigInt>,
    partial: &Rational,
    best_sq: &mut Rational,
    best: &mut Vec<BigInt>,
) {
    if level == 0 {
        if x.iter().all(Zero::is_zero) {
            return;
        }
        let c: Vec<Rational> = x.iter().map(|v| Rational::from_integer(v.clone())).collect();
        let sq = linalg::dot(&c, &linalg::mat_vec(gram, &c));
        if sq < *best_sq {
            *best_sq = sq;
            best.clone_from(x);
        }
        return;
    }
    let i = level - 1;
    let n = x.len();
    let mut center = Rational::zero();
    for j in i + 1..n {
        center -= &mu[j][i] * Rational::from_integer(x[j].clone());
    }
    let room = (&*best_sq - partial) / &bs[i];
    if room.is_negative() {
        return;
    }
    let r = rational::sqrt_upper(&room);
    let lo = -rational::floor(&-(&center - &r));
    let hi = rational::floor(&(&center + &r));
    let mut v = lo;
    while v <= hi {
        let t = Rational::from_integer(v.clone()) - &center;
        let next = partial + &t * &t * &bs[i];
        if next <= *best_sq {
            x[i] = v.clone();
            enumerate(i, mu, bs, gram, x, &next, best_sq, best);
        }
        v += 1;
    }
    x[i] = BigInt::zero();
}

/// Squared injectivity radius of the torus `R^d / L`: a quarter of the
/// squared length of the shortest vector.
pub fn injectivity_radius_sq(b: &LatticeBasis) -> Result<Rational> {
    Ok(shortest_vector(b)?.1 / rational::int(4))
}

/// The homothetic sublattice `k L` of `L` with its coset representatives.
#[derive(Clone, Debug)]
pub struct SublatticeMap {
    pub parent: LatticeBasis,
    pub child: LatticeBasis,
    pub k: u64,
    pub index: u64,
    /// Lattice coordinates (in the parent basis) of the coset representatives,
    /// entries in `0..k`.
    pub coset_coords: Vec<Vec<u64>>,
}

impl SublatticeMap {
    pub fn homothety(parent: &LatticeBasis, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("cover degree must be positive".into()));
        }
        let d = parent.rank();
        let child = parent.scale(&Rational::from_integer(k.into()))?;
        let index = k.checked_pow(d as u32).ok_or_else(|| Error::Invalid("cover index overflow".into()))?;
        let mut coset_coords = Vec::with_capacity(index as usize);
        for m in 0..index {
            let mut r = m;
            let mut c = vec![0u64; d];
            for slot in c.iter_mut() {
                *slot = r % k;
                r /= k;
            }
            coset_coords.push(c);
        }
        Ok(SublatticeMap { parent: parent.clone(), child, k, index, coset_coords })
    }

    /// Ambient coset representatives `sum r_i v_i`.
    pub fn coset_reps(&self) -> Vec<Vec<Rational>> {
        self.coset_coords
            .iter()
            .map(|c| self.parent.point_of(&c.iter().map(|&x| Rational::from_integer(x.into())).collect::<Vec<_>>()))
            .collect()
    }

    /// `|det child / det parent|`, computed from the Gram determinants.
    pub fn determinant_ratio(&self) -> Rational {
        let sq = self.child.gram_det() / self.parent.gram_det();
        rational::sqrt_lower(&sq)
    }
}

/// Least `k` such that `k L` has injectivity radius `> r`, i.e.
/// `k^2 |v_min|^2 > 4 r^2`.
pub fn cover_for_radius(b: &LatticeBasis, r: &Rational) -> Result<SublatticeMap> {
    if !r.is_positive() {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let (_, sq) = shortest_vector(b)?;
    let target = rational::int(4) * r * r;
    // start from a float guess and fix up exactly
    let guess = (rational::to_f64(&(&target / &sq)).sqrt().floor() as u64).max(1);
    let mut k = guess.saturating_sub(1).max(1);
    while Rational::from_integer((k * k).into()) * &sq <= target {
        k += 1;
    }
    while k > 1 && Rational::from_integer(((k - 1) * (k - 1)).into()) * &sq > target {
        k -= 1;
    }
    SublatticeMap::homothety(b, k)
}

/// Integer vector as `i64`s when it fits.
pub fn small_ints(v: &[BigInt]) -> Option<Vec<i64>> {
    v.iter().map(ToPrimitive::to_i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_basis(rng: &mut ChaCha8Rng, d: usize, bound: i64) -> LatticeBasis {
        loop {
            let v: Vec<Vec<Rational>> =
                (0..d).map(|_| (0..d).map(|_| int(rng.gen_range(-bound..=bound))).collect()).collect();
            if let Ok(b) = LatticeBasis::new(v) {
                return b;
            }
        }
    }

    fn brute_shortest(b: &LatticeBasis, box_size: i64) -> Rational {
        let d = b.rank();
        let mut best: Option<Rational> = None;
        let side = (2 * box_size + 1) as usize;
        for m in 0..side.pow(d as u32) {
            let mut r = m;
            let c: Vec<Rational> = (0..d)
                .map(|_| {
                    let x = (r % side) as i64 - box_size;
                    r /= side;
                    int(x)
                })
                .collect();
            if c.iter().all(Zero::is_zero) {
                continue;
            }
            let sq = b.norm_sq_of_coords(&c);
            if best.as_ref().is_none_or(|bb| sq < *bb) {
                best = Some(sq);
            }
        }
        best.unwrap()
    }

    #[test]
    fn standard_basis_is_already_reduced() {
        let b = LatticeBasis::standard(3);
        assert_eq!(lll_reduce(&b).unwrap(), b);
    }

    #[test]
    fn skewed_plane_basis_reduces_to_standard() {
        // size reduction subtracts 100 v_1 from v_2
        let b = LatticeBasis::from_ints(&[&[1, 0], &[100, 1]]).unwrap();
        let r = lll_reduce(&b).unwrap();
        for v in r.vectors() {
            let ones = v.iter().filter(|x| x.abs() == int(1)).count();
            let zeros = v.iter().filter(|x| x.is_zero()).count();
            assert_eq!((ones, zeros), (1, 1));
        }
    }

    #[test]
    fn reduction_preserves_lattice_and_satisfies_lovasz() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=4 {
            for _ in 0..20 {
                let b = random_basis(&mut rng, d, 50);
                let (r, u) = lll_reduce_with_transform(&b).unwrap();
                assert!(is_lll_reduced(&r));
                assert_eq!(r.gram_det(), b.gram_det());
                assert!(b.contains_lattice(&r) && r.contains_lattice(&b));
                for (i, row) in u.iter().enumerate() {
                    assert_eq!(b.integer_combination(row), r.vectors()[i]);
                }
            }
        }
    }

    #[test]
    fn orthogonal_basis_has_right_angles() {
        let b = LatticeBasis::from_ints(&[&[2, 0], &[0, 5]]).unwrap();
        assert!(babai_sin_squared(&b).iter().all(|s| *s == int(1)));
        for a in babai_angles(&b) {
            assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn babai_bound_on_reduced_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=3 {
            let bound = (2.0f64.sqrt() / 3.0).powi(d as i32);
            for _ in 0..100 {
                let r = lll_reduce(&random_basis(&mut rng, d, 1000)).unwrap();
                for a in babai_angles(&r) {
                    assert!(a.sin() >= bound - 1e-9);
                }
            }
        }
        assert_eq!(ratio(2, 9), ratio(2, 3) * ratio(1, 3)); // (sqrt2/3)^2
    }

    #[test]
    fn shortest_vector_of_integer_lattice() {
        let (v, sq) = shortest_vector(&LatticeBasis::standard(2)).unwrap();
        assert_eq!(sq, int(1));
        assert_eq!(linalg::dot(&v, &v), int(1));
        assert_eq!(injectivity_radius_sq(&LatticeBasis::standard(2)).unwrap(), ratio(1, 4));
    }

    #[test]
    fn hexagonal_shortest_is_basis_norm() {
        let b = LatticeBasis::new(vec![vec![int(1), int(0)], vec![ratio(1, 2), ratio(181, 209)]]).unwrap();
        let (_, sq) = shortest_vector(&b).unwrap();
        assert_eq!(sq, brute_shortest(&b, 3));
        assert_eq!(sq, int(1));
    }

    #[test]
    fn shortest_scales_quadratically() {
        let b = LatticeBasis::from_ints(&[&[3, 1], &[1, 4]]).unwrap();
        let l = ratio(5, 2);
        let (_, s1) = shortest_vector(&b).unwrap();
        let (_, s2) = shortest_vector(&b.scale(&l).unwrap()).unwrap();
        assert_eq!(s2, s1 * &l * &l);
    }

    #[test]
    fn shortest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=3 {
            for _ in 0..15 {
                let r = lll_reduce(&random_basis(&mut rng, d, 20)).unwrap();
                assert_eq!(shortest_vector(&r).unwrap().1, brute_shortest(&r, 5));
            }
        }
    }

    #[test]
    fn shortest_rejects_large_rank() {
        assert!(matches!(shortest_vector(&LatticeBasis::standard(7)), Err(Error::DimensionTooLarge(7, 6))));
    }

    #[test]
    fn covers_for_radius() {
        let z2 = LatticeBasis::standard(2);
        let m = cover_for_radius(&z2, &ratio(2, 5)).unwrap();
        assert_eq!((m.k, m.index), (1, 1));
        let m = cover_for_radius(&z2, &int(3)).unwrap();
        assert_eq!((m.k, m.index), (7, 49));
        assert_eq!(m.coset_reps().len(), 49);
        assert_eq!(m.determinant_ratio(), int(49));
        assert!(injectivity_radius_sq(&m.child).unwrap() > int(9));
        assert!(m.parent.contains_lattice(&m.child));
    }

    #[test]
    fn lower_rank_basis_in_larger_space() {
        let b = LatticeBasis::from_ints(&[&[1, 1, 0]]).unwrap();
        assert_eq!(b.rank(), 1);
        assert_eq!(b.coords_of(&[int(3), int(3), int(0)]), vec![int(3)]);
        assert_eq!(shortest_vector(&b).unwrap().1, int(2));
    }

    #[test]
    fn dependent_basis_is_rejected() {
        assert!(matches!(LatticeBasis::from_ints(&[&[1, 2], &[2, 4]]), Err(Error::DependentBasis)));
    }

    #[test]
    fn json_round_trip() {
        let b = LatticeBasis::new(vec![vec![ratio(1, 3), int(2)], vec![int(0), ratio(-7, 5)]]).unwrap();
        let j = serde_json::to_string(&b.to_json()).unwrap();
        let back = LatticeBasis::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
