//! Flat tori `R^d / L` and the triangulation `T_B` obtained by barycentric
//! subdivision of the fundamental parallelepiped of a basis `B`.
//!
//! Internally everything is kept in lattice coordinates (coefficients with
//! respect to `B`); chains handed in and out use ambient coordinates. In
//! lattice coordinates the vertices of `T_B` are the points of `{0, 1/2}^d`
//! modulo `Z^d`, and a top simplex is a flag
//! `corner < edge midpoint < ... < cube center` in the unit cube.
//!
//! `T_B` is a Delta-complex rather than a simplicial complex (for d = 1 the
//! two edges share both endpoints), so cells are identified by their
//! canonical vertex lifts, not by vertex sets.

mod cover;
mod pseudomanifold;
mod quotient;
mod star;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chains::{AffineChain, Chain, Permutation, Point, Simplex};
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeBasis, LatticeJson};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};

pub use cover::{canonical_chain, canonical_simplex, project, transfer};
pub use pseudomanifold::{validate_pseudomanifold, CellComplex, PseudomanifoldReport};
pub use quotient::{filling_quotient, FillingQuotient};
pub use star::{
    default_grid, estimate_kd, fatness, is_small, locate, star_cover, straighten, straighten_chain, Location,
    SmallWitness, StarCover, StarRegion,
};

/// Largest torus dimension [`triangulate`] accepts (`t_4 = 384`).
pub const MAX_TRIANGULATE_DIM: usize = 4;

/// A cell of `T_B`: vertices in increasing vertex order, their lattice
/// coordinates with vertex 0 in `[0, 1)^d`, and the indices of its faces
/// (face `i` omits vertex `i`) one level down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub lifts: Vec<Vec<Rational>>,
    pub faces: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TorusComplex {
    basis: LatticeBasis,
    vertices: Vec<Vec<Rational>>,
    vertex_index: BTreeMap<Vec<Rational>, usize>,
    levels: Vec<Vec<Cell>>,
    lookup: Vec<BTreeMap<Vec<Vec<Rational>>, usize>>,
    orientation: Vec<i8>,
    star: OnceLock<StarCover>,
    injectivity_sq: OnceLock<Rational>,
}

/// `2^d d!`, the number of top simplices of `T_B`.
pub fn top_simplex_count(d: usize) -> usize {
    (1..=d).product::<usize>() << d
}

fn half() -> Rational {
    rational::ratio(1, 2)
}

/// Splits lattice coordinates into integer part and fractional part in `[0, 1)`.
pub(crate) fn split_mod_one(f: &[Rational]) -> (Vec<BigInt>, Vec<Rational>) {
    let ints: Vec<BigInt> = f.iter().map(rational::floor).collect();
    let frac = f.iter().zip(&ints).map(|(x, z)| x - Rational::from_integer(z.clone())).collect();
    (ints, frac)
}

/// Translates a lift tuple by an integer vector so vertex 0 lands in `[0, 1)^d`.
pub(crate) fn canonical_lifts(lifts: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let Some(first) = lifts.first() else {
        return Vec::new();
    };
    let (shift, _) = split_mod_one(first);
    lifts
        .iter()
        .map(|l| l.iter().zip(&shift).map(|(x, z)| x - Rational::from_integer(z.clone())).collect())
        .collect()
}

/// Sign of the orientation of lattice-coordinate vertices.
fn orientation_sign(lifts: &[Vec<Rational>]) -> i8 {
    let m: Matrix = lifts[1..]
        .iter()
        .map(|l| l.iter().zip(&lifts[0]).map(|(a, b)| a - b).collect())
        .collect();
    let det = linalg::determinant(&m);
    if det.is_positive() {
        1
    } else if det.is_negative() {
        -1
    } else {
        0
    }
}

/// Builds `T_B`.
pub fn triangulate(b: &LatticeBasis) -> Result<TorusComplex> {
    let d = b.rank();
    if d > MAX_TRIANGULATE_DIM {
        return Err(Error::DimensionTooLarge(d, MAX_TRIANGULATE_DIM));
    }
    // vertex order: lexicographic on {0, 1/2}^d
    let mut vertices: Vec<Vec<Rational>> = (0..1usize << d)
        .map(|m| (0..d).map(|i| if m >> i & 1 == 1 { half() } else { Rational::zero() }).collect())
        .collect();
    vertices.sort();
    let vertex_index: BTreeMap<Vec<Rational>, usize> =
        vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();

    let vid = |l: &Vec<Rational>| vertex_index[&split_mod_one(l).1];

    let mut levels: Vec<Vec<Cell>> = vec![Vec::new(); d + 1];
    let mut lookup: Vec<BTreeMap<Vec<Vec<Rational>>, usize>> = vec![BTreeMap::new(); d + 1];
    let mut orientation = Vec::new();

    for corner in 0..1usize << d {
        for perm in Permutation::all(d) {
            let mut point: Vec<Rational> =
                (0..d).map(|i| if corner >> i & 1 == 1 { Rational::one() } else { Rational::zero() }).collect();
            let mut flag = vec![point.clone()];
            for k in 0..d {
                point[perm.apply(k)] = half();
                flag.push(point.clone());
            }
            let ids: Vec<usize> = flag.iter().map(vid).collect();
            let p = Permutation::sorting(&ids);
            let sorted: Vec<Vec<Rational>> = p.images().iter().map(|&i| flag[i].clone()).collect();
            let lifts = canonical_lifts(&sorted);
            if lookup[d].contains_key(&lifts) {
                continue;
            }
            orientation.push(orientation_sign(&lifts));
            lookup[d].insert(lifts.clone(), levels[d].len());
            levels[d].push(Cell { vertices: lifts.iter().map(vid).collect(), lifts, faces: Vec::new() });
        }
    }

    for k in (1..=d).rev() {
        for j in 0..levels[k].len() {
            let mut faces = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let mut l = levels[k][j].lifts.clone();
                l.remove(i);
                let l = canonical_lifts(&l);
                let idx = match lookup[k - 1].get(&l) {
                    Some(&idx) => idx,
                    None => {
                        let idx = levels[k - 1].len();
                        lookup[k - 1].insert(l.clone(), idx);
                        levels[k - 1].push(Cell { vertices: l.iter().map(vid).collect(), lifts: l, faces: Vec::new() });
                        idx
                    }
                };
                faces.push(idx);
            }
            levels[k][j].faces = faces;
        }
    }
    Ok(TorusComplex {
        basis: b.clone(),
        vertices,
        vertex_index,
        levels,
        lookup,
        orientation,
        star: OnceLock::new(),
        injectivity_sq: OnceLock::new(),
    })
}

impl TorusComplex {
    pub fn basis(&self) -> &LatticeBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    /// Vertices in vertex order, as lattice coordinates in `{0, 1/2}^d`.
    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn cells(&self, k: usize) -> &[Cell] {
        self.levels.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn cell_count(&self, k: usize) -> usize {
        self.cells(k).len()
    }

    pub fn top_count(&self) -> usize {
        self.cell_count(self.dim())
    }

    /// Orientation signs making `sum sign_j top_j` a cycle.
    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    /// Index of a vertex given by lattice coordinates in `(1/2) Z^d`.
    pub fn vertex_id(&self, f: &[Rational]) -> Option<usize> {
        self.vertex_index.get(&split_mod_one(f).1).copied()
    }

    pub fn lattice_coords(&self, p: &Point) -> Vec<Rational> {
        self.basis.coords_of(p.coords())
    }

    pub fn ambient_point(&self, f: &[Rational]) -> Point {
        Point(self.basis.point_of(f))
    }

    /// Ambient straight simplex of cell `j` in dimension `k`.
    pub fn cell_simplex(&self, k: usize, j: usize) -> Simplex<Point> {
        Simplex(self.levels[k][j].lifts.iter().map(|l| self.ambient_point(l)).collect())
    }

    /// Squared injectivity radius of the torus.
    pub fn injectivity_sq(&self) -> Result<Rational> {
        if let Some(r) = self.injectivity_sq.get() {
            return Ok(r.clone());
        }
        let r = lattice::injectivity_radius_sq(&self.basis)?;
        Ok(self.injectivity_sq.get_or_init(|| r).clone())
    }

    /// The star cover with the default grid, computed once.
    pub fn star(&self) -> &StarCover {
        self.star.get_or_init(|| star_cover(self, default_grid(self.dim())))
    }

    /// Column `j` of the boundary matrix `C_k -> C_{k-1}` as `(row, sign)`.
    pub fn boundary_column(&self, k: usize, j: usize) -> Vec<(usize, i64)> {
        let mut out: BTreeMap<usize, i64> = BTreeMap::new();
        for (i, &f) in self.levels[k][j].faces.iter().enumerate() {
            *out.entry(f).or_default() += if i % 2 == 0 { 1 } else { -1 };
        }
        out.into_iter().filter(|&(_, v)| v != 0).collect()
    }

    pub fn boundary_matrix(&self, k: usize) -> SparseMatrix {
        let rows = self.cell_count(k.saturating_sub(1));
        let cols = self.cell_count(k);
        let mut entries = Vec::new();
        if k > 0 {
            for j in 0..cols {
                for (i, v) in self.boundary_column(k, j) {
                    entries.push((i, j, rational::int(v)));
                }
            }
        }
        SparseMatrix { rows, cols, entries }
    }

    pub fn dense_boundary(&self, k: usize) -> Matrix {
        self.boundary_matrix(k).to_dense()
    }

    /// Simplicial fundamental cycle as a coefficient vector on top cells.
    pub fn fundamental_cycle(&self) -> Vec<Rational> {
        self.orientation.iter().map(|&s| rational::int(s as i64)).collect()
    }

    /// The symmetric affine fundamental cycle `i(sum sign_j top_j)`.
    pub fn affine_fundamental_cycle(&self) -> AffineChain {
        self.from_simplicial(self.dim(), &self.fundamental_cycle())
    }

    /// `rho`: an affine chain whose vertices are vertices of `T_B` (each
    /// simplex inside one cell) as a simplicial chain. Degenerate simplices
    /// are dropped and vertex tuples sorted with the permutation sign, so
    /// that `i(rho(c)) = S(c)`.
    pub fn to_simplicial(&self, c: &AffineChain) -> Result<Vec<Rational>> {
        let k = c.dim();
        let mut out = vec![Rational::zero(); self.cell_count(k)];
        if k > self.dim() {
            return if c.iter().all(|(s, _)| s.is_degenerate()) {
                Ok(out)
            } else {
                Err(Error::NotInComplex(format!("{k}-simplices in a {}-dimensional torus", self.dim())))
            };
        }
        for (s, q) in c.iter() {
            if s.is_degenerate() {
                continue;
            }
            let lifts: Vec<Vec<Rational>> = s.vertices().iter().map(|p| self.lattice_coords(p)).collect();
            let ids = lifts
                .iter()
                .map(|l| self.vertex_id(l))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::NotInComplex(format!("vertex of {s:?} is not a vertex of the triangulation")))?;
            let p = Permutation::sorting(&ids);
            let sorted: Vec<Vec<Rational>> = p.images().iter().map(|&i| lifts[i].clone()).collect();
            let idx = self
                .lookup[k]
                .get(&canonical_lifts(&sorted))
                .ok_or_else(|| Error::NotInComplex(format!("{s:?}")))?;
            if p.sign() > 0 {
                out[*idx] += q;
            } else {
                out[*idx] -= q;
            }
        }
        Ok(out)
    }

    /// `i`: the symmetric affine chain `sum x_j S(cell_j)`.
    pub fn from_simplicial(&self, k: usize, x: &[Rational]) -> AffineChain {
        let mut out = Chain::zero(k);
        for (j, q) in x.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let sym = Chain::simplex(self.cell_simplex(k, j)).symmetrize();
            out.add_assign_scaled(&sym, q).expect("same dimension");
        }
        out
    }

    /// Reduces every simplex of `c` to its canonical lift modulo the lattice.
    pub fn canonicalize(&self, c: &AffineChain) -> AffineChain {
        canonical_chain(&self.basis, c)
    }

    pub fn to_json(&self) -> TorusComplexJson {
        TorusComplexJson {
            basis: self.basis.to_json(),
            vertex_order: self.vertices.iter().map(|v| v.iter().map(rational::format).collect()).collect(),
            simplices: self
                .levels
                .iter()
                .map(|level| {
                    level
                        .iter()
                        .map(|c| CellJson {
                            vertices: c.vertices.clone(),
                            lifts: c
                                .lifts
                                .iter()
                                .map(|l| self.basis.point_of(l).iter().map(rational::format).collect())
                                .collect(),
                        })
                        .collect()
                })
                .collect(),
            orientation: self.orientation.clone(),
            boundary_matrices: (1..=self.dim()).map(|k| self.boundary_matrix(k).to_json()).collect(),
        }
    }
}

/// Sparse rational matrix as `(row, col, value)` triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, Rational)>,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> Matrix {
        let mut m = linalg::zeros(self.rows, self.cols);
        for (i, j, v) in &self.entries {
            m[*i][*j] += v;
        }
        m
    }

    pub fn to_json(&self) -> SparseMatrixJson {
        SparseMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|(i, j, v)| (*i, *j, rational::format(v))).collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SparseMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String)>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CellJson {
    pub vertices: Vec<usize>,
    /// Ambient coordinates of the canonical vertex lifts.
    pub lifts: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct TorusComplexJson {
    pub basis: LatticeJson,
    pub vertex_order: Vec<Vec<String>>,
    pub simplices: Vec<Vec<CellJson>>,
    pub orientation: Vec<i8>,
    pub boundary_matrices: Vec<SparseMatrixJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn is_zero_vec(v: &[Rational]) -> bool {
        v.iter().all(Zero::is_zero)
    }

    #[test]
    fn counts_match_two_to_the_d_d_factorial() {
        for d in 0..=4 {
            let t = triangulate(&LatticeBasis::standard(d)).unwrap();
            assert_eq!(t.top_count(), top_simplex_count(d), "d = {d}");
            assert_eq!(t.cells(0).len(), 1 << d);
        }
        assert_eq!(top_simplex_count(3), 48);
    }

    #[test]
    fn circle_has_two_edges_with_the_same_endpoints() {
        let t = triangulate(&LatticeBasis::standard(1)).unwrap();
        assert_eq!(t.cell_count(1), 2);
        assert_eq!(t.cells(1)[0].vertices, t.cells(1)[1].vertices);
    }

    #[test]
    fn euler_characteristic_vanishes() {
        for d in 1..=3 {
            let t = triangulate(&LatticeBasis::standard(d)).unwrap();
            let chi: i64 = (0..=d).map(|k| if k % 2 == 0 { 1 } else { -1 } * t.cell_count(k) as i64).sum();
            assert_eq!(chi, 0);
        }
    }

    #[test]
    fn fundamental_cycle_is_a_cycle_and_faces_have_two_cofaces() {
        for d in 1..=3 {
            let rows: Vec<Vec<Rational>> =
                [[2, 1, 0], [0, 1, 1], [1, 0, 3]].iter().take(d).map(|r| r[..d].iter().map(|&x| int(x)).collect()).collect();
            let t = triangulate(&LatticeBasis::new(rows).unwrap()).unwrap();
            let m = t.dense_boundary(d);
            assert!(is_zero_vec(&linalg::mat_vec(&m, &t.fundamental_cycle())));
            assert!(t.orientation().iter().all(|&s| s != 0));
            for row in &m {
                let nonzero: usize = row.iter().filter(|x| !x.is_zero()).count();
                assert_eq!(nonzero, 2);
            }
            // and as an affine chain
            let z = t.affine_fundamental_cycle();
            assert!(t.canonicalize(&z.boundary().unwrap()).is_zero());
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let t = triangulate(&LatticeBasis::standard(3)).unwrap();
        for k in 2..=3 {
            let prod = linalg::mat_mul(&t.dense_boundary(k - 1), &t.dense_boundary(k));
            assert!(prod.iter().all(|r| is_zero_vec(r)));
        }
    }

    #[test]
    fn rho_then_i_is_symmetrization() {
        let t = triangulate(&LatticeBasis::standard(2)).unwrap();
        let cell = t.cell_simplex(2, 3);
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let mut c = Chain::simplex(cell.permute(&p));
        let v = cell.vertices()[0].clone();
        c.add_term(Simplex(vec![v.clone(), v.clone(), cell.vertices()[1].clone()]), int(5)).unwrap();
        let x = t.to_simplicial(&c).unwrap();
        assert_eq!(t.from_simplicial(2, &x), c.symmetrize());
    }

    #[test]
    fn rho_rejects_foreign_vertices() {
        let t = triangulate(&LatticeBasis::standard(1)).unwrap();
        let c = Chain::simplex(Simplex(vec![Point(vec![ratio(1, 3)]), Point(vec![int(0)])]));
        assert!(matches!(t.to_simplicial(&c), Err(Error::NotInComplex(_))));
    }

    #[test]
    fn vertex_order_is_lexicographic() {
        let t = triangulate(&LatticeBasis::standard(2)).unwrap();
        let v = t.vertices();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(v[0], vec![int(0), int(0)]);
        assert_eq!(v[3], vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn triangulate_rejects_large_dimension() {
        assert!(matches!(triangulate(&LatticeBasis::standard(5)), Err(Error::DimensionTooLarge(5, 4))));
    }

    #[test]
    fn json_has_sparse_boundaries() {
        let t = triangulate(&LatticeBasis::standard(2)).unwrap();
        let j = t.to_json();
        assert_eq!(j.simplices[2].len(), 8);
        assert_eq!(j.boundary_matrices.len(), 2);
        assert_eq!(j.boundary_matrices[1].cols, 8);
        assert!(serde_json::to_string(&j).unwrap().contains("\"1/1\""));
    }
}
