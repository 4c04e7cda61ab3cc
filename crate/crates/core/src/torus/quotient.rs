//! The filling quotient `h: N -> V` collapsing the leaves of a linear
//! subtorus `T` of a flat torus `N`. `V` is realized as the orthogonal
//! complement of `T` modulo the projected lattice.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{canonical_chain, TorusComplex};
use crate::chains::{AffineChain, Chain, Point};
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::linalg::{self, Matrix};
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct FillingQuotient {
    pub source: LatticeBasis,
    /// Ambient vectors spanning the leaf direction.
    pub subtorus: Vec<Vec<Rational>>,
    /// Lattice coordinates of vectors completing the subtorus to a basis.
    pub complement: Vec<Vec<BigInt>>,
    pub target: LatticeBasis,
    /// Orthogonal projection onto the complement of the subtorus (ambient).
    pub projection: Matrix,
}

/// Unimodular `Q` with `W Q = [I | 0]`, if the integer rows of `W` span a
/// primitive sublattice.
fn unimodular_completion(w: &[Vec<BigInt>], d: usize) -> Result<Vec<Vec<BigInt>>> {
    let k = w.len();
    let mut a: Vec<Vec<BigInt>> = w.to_vec();
    let mut q: Vec<Vec<BigInt>> =
        (0..d).map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let col_axpy = |m: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, f: &BigInt| {
        for row in m.iter_mut() {
            let v = &row[src] * f;
            row[dst] -= v;
        }
    };
    let col_swap = |m: &mut Vec<Vec<BigInt>>, x: usize, y: usize| {
        for row in m.iter_mut() {
            row.swap(x, y);
        }
    };
    for r in 0..k {
        loop {
            let nonzero: Vec<usize> = (r..d).filter(|&j| !a[r][j].is_zero()).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let p = *nonzero.iter().min_by_key(|&&j| a[r][j].abs()).expect("nonempty");
            for &j in &nonzero {
                if j != p {
                    let f = a[r][j].div_floor(&a[r][p]);
                    col_axpy(&mut a, j, p, &f);
                    col_axpy(&mut q, j, p, &f);
                }
            }
        }
        let Some(p) = (r..d).find(|&j| !a[r][j].is_zero()) else {
            return Err(Error::NotPrimitive("subtorus vectors are dependent".into()));
        };
        col_swap(&mut a, r, p);
        col_swap(&mut q, r, p);
        if !a[r][r].abs().is_one() {
            return Err(Error::NotPrimitive(format!("sublattice has index {} in its span", a[r][r].abs())));
        }
        if a[r][r].is_negative() {
            for m in [&mut a, &mut q] {
                for row in m.iter_mut() {
                    row[r] = -row[r].clone();
                }
            }
        }
        for j in 0..r {
            let f = a[r][j].clone();
            if !f.is_zero() {
                col_axpy(&mut a, j, r, &f);
                col_axpy(&mut q, j, r, &f);
            }
        }
    }
    Ok(q)
}

/// Builds `h` for the subtorus spanned by `subtorus` (ambient lattice vectors).
pub fn filling_quotient(t: &TorusComplex, subtorus: &[Vec<Rational>]) -> Result<FillingQuotient> {
    let b = t.basis();
    let d = b.rank();
    let ambient = b.ambient_dim();
    let mut w_int = Vec::with_capacity(subtorus.len());
    for w in subtorus {
        if w.len() != ambient {
            return Err(Error::Invalid(format!("subtorus vector of length {} in R^{ambient}", w.len())));
        }
        let c = b.coords_of(w);
        if b.point_of(&c) != *w || !c.iter().all(|x| x.is_integer()) {
            return Err(Error::NotPrimitive("vector is not in the lattice".into()));
        }
        w_int.push(c.iter().map(|x| x.to_integer()).collect::<Vec<_>>());
    }
    let q = unimodular_completion(&w_int, d)?;
    let q_rat: Matrix = q.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
    let q_inv = linalg::inverse(&q_rat).expect("unimodular");
    let complement: Vec<Vec<BigInt>> =
        q_inv[subtorus.len()..].iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect();

    let projection = if subtorus.is_empty() {
        linalg::identity(ambient)
    } else {
        let wt = linalg::transpose(&subtorus.to_vec());
        let gram = linalg::mat_mul(&subtorus.to_vec(), &wt);
        let ginv = linalg::inverse(&gram).ok_or_else(|| Error::NotPrimitive("dependent vectors".into()))?;
        let along = linalg::mat_mul(&linalg::mat_mul(&wt, &ginv), &subtorus.to_vec());
        let mut p = linalg::identity(ambient);
        for (row, arow) in p.iter_mut().zip(&along) {
            for (x, y) in row.iter_mut().zip(arow) {
                *x -= y;
            }
        }
        p
    };
    let target_vectors: Vec<Vec<Rational>> =
        complement.iter().map(|c| linalg::mat_vec(&projection, &b.integer_combination(c))).collect();
    let target = LatticeBasis::new_in(ambient, target_vectors)?;
    Ok(FillingQuotient { source: b.clone(), subtorus: subtorus.to_vec(), complement, target, projection })
}

impl FillingQuotient {
    pub fn map_point(&self, p: &Point) -> Point {
        Point(linalg::mat_vec(&self.projection, p.coords()))
    }

    /// `h_#` on straight chains, reduced modulo the target lattice.
    pub fn push(&self, c: &AffineChain) -> AffineChain {
        let mut out = Chain::zero(c.dim());
        for (s, q) in c.iter() {
            out.add_term(s.map(|p| self.map_point(p)), q.clone()).expect("same dimension");
        }
        canonical_chain(&self.target, &out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::Simplex;
    use crate::rational::{int, ratio};
    use crate::torus::triangulate;

    fn pt(x: &[Rational]) -> Point {
        Point(x.to_vec())
    }

    #[test]
    fn collapsing_a_circle_factor_gives_the_other_coordinate() {
        let t = triangulate(&LatticeBasis::standard(2)).unwrap();
        let h = filling_quotient(&t, &[vec![int(1), int(0)]]).unwrap();
        assert_eq!(h.target.rank(), 1);
        assert_eq!(h.map_point(&pt(&[ratio(1, 3), ratio(2, 5)])), pt(&[int(0), ratio(2, 5)]));
        assert_eq!(h.target.gram()[0][0], int(1));
    }

    #[test]
    fn full_subtorus_collapses_to_a_point() {
        let t = triangulate(&LatticeBasis::standard(2)).unwrap();
        let h = filling_quotient(&t, &[vec![int(1), int(0)], vec![int(0), int(1)]]).unwrap();
        assert_eq!(h.target.rank(), 0);
        let c = Chain::simplex(Simplex(vec![pt(&[int(0), int(0)]), pt(&[ratio(1, 4), ratio(1, 3)])]));
        let img = h.push(&c);
        assert!(img.iter().all(|(s, _)| s.is_degenerate()));
        assert!(img.symmetrize().is_zero());
    }

    #[test]
    fn pushforward_does_not_increase_norm() {
        let t = triangulate(&LatticeBasis::from_ints(&[&[2, 1], &[0, 1]]).unwrap()).unwrap();
        let h = filling_quotient(&t, &[vec![int(2), int(1)]]).unwrap();
        let mut c = Chain::zero(1);
        c.add_term(Simplex(vec![pt(&[int(0), int(0)]), pt(&[int(1), int(0)])]), int(2)).unwrap();
        c.add_term(Simplex(vec![pt(&[int(2), int(1)]), pt(&[int(3), int(1)])]), int(-3)).unwrap();
        assert!(h.push(&c).l1_norm() <= c.l1_norm());
        assert_eq!(h.push(&c).l1_norm(), int(1));
    }

    #[test]
    fn skew_primitive_vector_is_completed() {
        let t = triangulate(&LatticeBasis::standard(3)).unwrap();
        let h = filling_quotient(&t, &[vec![int(2), int(3), int(0)]]).unwrap();
        assert_eq!(h.complement.len(), 2);
        // the projected lattice has covolume |det| / |w|
        assert_eq!(h.target.gram_det(), ratio(1, 13));
    }

    #[test]
    fn non_primitive_vectors_are_rejected() {
        let t = triangulate(&LatticeBasis::standard(2)).unwrap();
        assert!(matches!(filling_quotient(&t, &[vec![int(2), int(0)]]), Err(Error::NotPrimitive(_))));
        assert!(matches!(filling_quotient(&t, &[vec![ratio(1, 2), int(0)]]), Err(Error::NotPrimitive(_))));
        assert!(matches!(
            filling_quotient(&t, &[vec![int(1), int(1)], vec![int(1), int(-1)]]),
            Err(Error::NotPrimitive(_))
        ));
    }
}
