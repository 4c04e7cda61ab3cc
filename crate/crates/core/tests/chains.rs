use l1fill::chains::{cone, homotopy_p, identity_simplex, AffineChain, Chain, Point, Simplex};
use l1fill::lattice::LatticeBasis;
use l1fill::rational::{int, ratio};
use l1fill::torus::triangulate;
use l1fill::Rational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> Point {
    Point((0..m).map(|_| ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect())
}

fn random_chain(rng: &mut ChaCha8Rng, n: usize, m: usize, terms: usize) -> AffineChain {
    let mut c = Chain::zero(n);
    for _ in 0..terms {
        let s = Simplex((0..=n).map(|_| random_point(rng, m)).collect());
        c.add_term(s, ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3))).unwrap();
    }
    c
}

/// A point of the model n-simplex in barycentric coordinates.
fn model_point(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let w: Vec<i64> = (0..=n).map(|_| rng.gen_range(0..=5)).collect();
    let total: i64 = w.iter().sum::<i64>().max(1);
    if w.iter().all(|&x| x == 0) {
        return identity_simplex(n).vertices()[0].clone();
    }
    Point(w.iter().map(|&x| ratio(x, total)).collect())
}

#[test]
fn boundary_of_boundary_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=4 {
        for _ in 0..20 {
            let c = random_chain(&mut rng, n, 3, 4);
            assert!(c.boundary().unwrap().boundary().unwrap().is_zero());
        }
    }
}

#[test]
fn cone_formula() {
    // d(apex * a) = a - apex * da  (dim a >= 1)
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=3 {
        for k in 1..=n {
            let mut a = Chain::zero(k);
            for _ in 0..3 {
                let s = Simplex((0..=k).map(|_| model_point(&mut rng, n)).collect());
                a.add_term(s, int(rng.gen_range(-3..=3))).unwrap();
            }
            let lhs = cone(n, &a).unwrap().boundary().unwrap();
            let rhs = a.sub(&cone(n, &a.boundary().unwrap()).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn homotopy_commutes_with_affine_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        for _ in 0..10 {
            let c = random_chain(&mut rng, n, 2, 2);
            let a: Vec<Vec<Rational>> = (0..3).map(|_| (0..2).map(|_| int(rng.gen_range(-3..=3))).collect()).collect();
            let shift = random_point(&mut rng, 3);
            let f = |p: &Point| {
                Point((0..3).map(|i| &shift.0[i] + &a[i][0] * &p.0[0] + &a[i][1] * &p.0[1]).collect())
            };
            let lhs = homotopy_p(&c).unwrap().map_vertices(f);
            let rhs = homotopy_p(&c.map_vertices(f)).unwrap();
            assert_eq!(lhs, rhs, "n = {n}");
        }
    }
}

#[test]
fn symmetrization_is_idempotent_and_shrinks_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 0..=4 {
        let c = random_chain(&mut rng, n, 2, 5);
        let s = c.symmetrize();
        assert_eq!(s.symmetrize(), s);
        assert!(s.is_symmetric());
        assert!(s.l1_norm() <= c.l1_norm());
    }
}

#[test]
fn symmetrization_commutes_with_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=4 {
        let c = random_chain(&mut rng, n, 2, 3);
        assert_eq!(c.symmetrize().boundary().unwrap(), c.boundary().unwrap().symmetrize());
    }
}

#[test]
fn fundamental_cycle_of_the_square_torus_is_closed() {
    let t = triangulate(&LatticeBasis::standard(2)).unwrap();
    let z = t.fundamental_cycle();
    assert_eq!(z.len(), 8);
    let d = l1fill::linalg::mat_vec(&t.dense_boundary(2), &z);
    assert!(d.iter().all(Zero::is_zero));
    // the affine lift closes up once faces are moved to the fundamental domain
    let f = t.affine_fundamental_cycle();
    assert_eq!(f.l1_norm(), int(8));
    assert!(t.canonicalize(&f.boundary().unwrap()).is_zero());
}

#[test]
fn label_chains_share_the_operators() {
    let s = Simplex(vec!["a".to_string(), "b".into(), "c".into()]);
    let c: Chain<String> = Chain::simplex(s);
    assert!(c.boundary().unwrap().boundary().unwrap().is_zero());
    let sym = c.symmetrize();
    assert_eq!(sym.len(), 6);
    assert_eq!(sym.l1_norm(), Rational::one());
}
