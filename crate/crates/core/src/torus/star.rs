//! Star neighbourhoods of the subdivision `T'`, the certified Lebesgue
//! number of the open-star cover, smallness and straightening.
//!
//! For a point with barycentric coordinates `lambda` in `T_B`, the open star
//! of the `T'`-vertex at the barycenter of a simplex `tau` is
//! `{ min_{u in tau} lambda_u > max_{u not in tau} lambda_u }`, and the closed
//! star of a `T_B`-vertex `v` is `{ lambda_v = max lambda }`.
//!
//! `D_tau = min_tau lambda - max_rest lambda` is Lipschitz with constant
//! `L = max |grad(lambda_u - lambda_w)|` over cells, so a set of diameter
//! below `D_tau(x) / L` around `x` stays in the open star of `tau`. The
//! best `tau` at `x` gives the margin `m(x)` = largest gap in the sorted
//! barycentric coordinates, and `inf m / L` bounds the Lebesgue number.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{split_mod_one, triangulate, TorusComplex};
use crate::chains::{prism_chain, AffineChain, Chain, Point, Simplex};
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeBasis};
use crate::linalg;
use crate::rational::{self, Rational};

/// Barycentric location of a point: the cell `b_0, ..., b_d` around it (as
/// absolute lattice coordinates) and the barycentric coordinates.
#[derive(Clone, Debug)]
pub struct Location {
    pub lifts: Vec<Vec<Rational>>,
    pub vertices: Vec<usize>,
    pub lambdas: Vec<Rational>,
}

/// Locates lattice coordinates `f` in `T_B`.
pub fn locate(t: &TorusComplex, f: &[Rational]) -> Location {
    let d = f.len();
    let (ints, frac) = split_mod_one(f);
    let half = rational::ratio(1, 2);
    let one = Rational::from_integer(1.into());
    // nearest cube corner, and scaled distances to it
    let corner: Vec<Rational> = frac.iter().map(|g| if *g < half { Rational::zero() } else { one.clone() }).collect();
    let u: Vec<Rational> = frac.iter().zip(&corner).map(|(g, v)| (g - v).abs() * rational::int(2)).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| u[b].cmp(&u[a]).then(a.cmp(&b)));

    let base: Vec<Rational> = ints.iter().map(|z| Rational::from_integer(z.clone())).collect();
    let mut point: Vec<Rational> = corner.iter().zip(&base).map(|(c, z)| c + z).collect();
    let mut lifts = vec![point.clone()];
    for &i in &order {
        point[i] = &base[i] + &half;
        lifts.push(point.clone());
    }
    let mut lambdas = Vec::with_capacity(d + 1);
    if d == 0 {
        lambdas.push(one);
    } else {
        lambdas.push(&one - &u[order[0]]);
        for k in 0..d - 1 {
            lambdas.push(&u[order[k]] - &u[order[k + 1]]);
        }
        lambdas.push(u[order[d - 1]].clone());
    }
    let vertices = lifts.iter().map(|l| t.vertex_id(l).expect("cube vertex")).collect();
    Location { lifts, vertices, lambdas }
}

impl Location {
    /// Indices sorted by decreasing `lambda`, ties by vertex order.
    fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.lambdas.len()).collect();
        idx.sort_by(|&a, &b| self.lambdas[b].cmp(&self.lambdas[a]).then(self.vertices[a].cmp(&self.vertices[b])));
        idx
    }

    /// Largest gap `m(x)` in the sorted barycentric coordinates (a zero
    /// appended) and the simplex `tau` (indices into this location) realizing it.
    pub fn margin(&self) -> (Rational, Vec<usize>) {
        let order = self.ranking();
        let mut best = (Rational::zero(), 0);
        for j in 0..order.len() {
            let next = order.get(j + 1).map_or_else(Rational::zero, |&i| self.lambdas[i].clone());
            let gap = &self.lambdas[order[j]] - next;
            if gap > best.0 {
                best = (gap, j);
            }
        }
        (best.0, order[..=best.1].to_vec())
    }

    /// The least (in vertex order) vertex maximizing `lambda`: `n(x)`.
    pub fn nearest_vertex(&self) -> usize {
        self.ranking()[0]
    }

    /// Indices of the vertices whose closed stars contain the point.
    pub fn closed_vertex_stars(&self) -> Vec<usize> {
        let max = self.lambdas.iter().max().expect("nonempty").clone();
        (0..self.lambdas.len()).filter(|&i| self.lambdas[i] == max).collect()
    }
}

/// Whether lattice coordinates `f` lie in the open star of the `T'`-vertex
/// at the barycenter of the simplex with absolute lifts `tau`.
pub fn in_open_star(t: &TorusComplex, f: &[Rational], tau: &[Vec<Rational>]) -> bool {
    let loc = locate(t, f);
    let mut min_in: Option<Rational> = None;
    for u in tau {
        let l = loc.lifts.iter().position(|x| x == u).map_or_else(Rational::zero, |i| loc.lambdas[i].clone());
        if min_in.as_ref().is_none_or(|m| l < *m) {
            min_in = Some(l);
        }
    }
    let max_out = loc
        .lifts
        .iter()
        .zip(&loc.lambdas)
        .filter(|(x, _)| !tau.contains(x))
        .map(|(_, l)| l.clone())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    min_in.is_some_and(|m| m > max_out)
}

/// Gradients (lattice coordinates) of the barycentric coordinates on every
/// top cell, with the squared Lipschitz constant of all differences.
pub fn lipschitz_sq(b: &LatticeBasis) -> Rational {
    let d = b.rank();
    let ginv = b.gram_inverse();
    let q = |g: &Vec<Rational>| linalg::dot(g, &linalg::mat_vec(ginv, g));
    let mut best = Rational::zero();
    for signs in 0..1usize << d {
        let sigma: Vec<Rational> = (0..d).map(|i| rational::int(if signs >> i & 1 == 1 { -2 } else { 2 })).collect();
        for perm in crate::chains::Permutation::all(d) {
            let e = |k: usize| {
                let mut v = vec![Rational::zero(); d];
                v[perm.apply(k)] = sigma[perm.apply(k)].clone();
                v
            };
            let sub = |a: &Vec<Rational>, b: &Vec<Rational>| -> Vec<Rational> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
            let zero = vec![Rational::zero(); d];
            let mut grads = Vec::with_capacity(d + 1);
            grads.push(sub(&zero, &e(0)));
            for k in 0..d - 1 {
                grads.push(sub(&e(k), &e(k + 1)));
            }
            grads.push(e(d - 1));
            for i in 0..grads.len() {
                let s = q(&grads[i]);
                if s > best {
                    best = s;
                }
                for j in i + 1..grads.len() {
                    let s = q(&sub(&grads[i], &grads[j]));
                    if s > best {
                        best = s;
                    }
                }
            }
        }
    }
    best
}

/// The `T'`-vertex at the barycenter of cell `(dim, cell)` with the top
/// cells whose closures contain it (their union is its closed star region).
#[derive(Clone, Debug)]
pub struct StarRegion {
    pub dim: usize,
    pub cell: usize,
    pub top_cells: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct StarCover {
    pub regions: Vec<StarRegion>,
    /// Certified lower bound for the Lebesgue number of the open-star cover.
    pub lebesgue_lb: Rational,
    /// Squared Lipschitz constant of the star margin functions.
    pub lipschitz_sq: Rational,
    pub grid: usize,
    /// Least margin over the grid.
    pub grid_min_margin: Rational,
}

/// Grid resolution used when none is given.
pub fn default_grid(d: usize) -> usize {
    match d {
        0 | 1 => 64,
        2 => 64,
        3 => 32,
        _ => 8,
    }
}

fn regions(t: &TorusComplex) -> Vec<StarRegion> {
    let d = t.dim();
    let mut out: Vec<Vec<BTreeSet<usize>>> = (0..=d).map(|k| vec![BTreeSet::new(); t.cell_count(k)]).collect();
    for top in 0..t.top_count() {
        let mut current: BTreeSet<usize> = [top].into();
        for k in (0..=d).rev() {
            let mut below = BTreeSet::new();
            for &c in &current {
                out[k][c].insert(top);
                if k > 0 {
                    below.extend(t.cells(k)[c].faces.iter().copied());
                }
            }
            current = below;
        }
    }
    out.into_iter()
        .enumerate()
        .flat_map(|(dim, cells)| {
            cells
                .into_iter()
                .enumerate()
                .map(move |(cell, tops)| StarRegion { dim, cell, top_cells: tops.into_iter().collect() })
        })
        .collect()
}

/// Builds the star cover and its Lebesgue bound from a grid of `grid^d`
/// points in the fundamental domain.
///
/// The bound is `l * max(min_grid m / L' - rho', (1/(d+1)^2) / L')` where the
/// basis is first scaled by `1/l`, `l` the largest absolute basis entry, so
/// that the rational square-root roundings do not see the scale and the
/// bound is exactly homogeneous. `rho'` is the grid covering radius (half the
/// longest diagonal of a grid cell); `1/(d+1)^2` is the a-priori floor on the
/// margin (the largest of `d + 1` gaps summing to at least `1/(d+1)`).
pub fn star_cover(t: &TorusComplex, grid: usize) -> StarCover {
    let d = t.dim();
    let grid = grid.max(1);
    let lip = lipschitz_sq(t.basis());
    if d == 0 {
        return StarCover {
            regions: regions(t),
            lebesgue_lb: Rational::zero(),
            lipschitz_sq: lip,
            grid,
            grid_min_margin: rational::int(1),
        };
    }
    let scale = t
        .basis()
        .vectors()
        .iter()
        .flatten()
        .map(|x| x.abs())
        .max()
        .expect("nonempty basis");
    let scale_sq = &scale * &scale;
    let lip_up = rational::sqrt_upper(&(&lip * &scale_sq));

    let g = rational::int(grid as i64);
    let mut diag_sq = Rational::zero();
    for signs in 0..1usize << (d - 1) {
        let coeffs: Vec<Rational> = (0..d).map(|i| rational::int(if i > 0 && signs >> (i - 1) & 1 == 1 { -1 } else { 1 })).collect();
        let s = t.basis().norm_sq_of_coords(&coeffs);
        if s > diag_sq {
            diag_sq = s;
        }
    }
    let rho_up = rational::sqrt_upper(&(diag_sq / (rational::int(4) * &g * &g * &scale_sq)));

    let mut min_margin: Option<Rational> = None;
    for m in 0..grid.pow(d as u32) {
        let mut r = m;
        let f: Vec<Rational> = (0..d)
            .map(|_| {
                let i = r % grid;
                r /= grid;
                rational::ratio(i as i64, grid as i64)
            })
            .collect();
        let (gap, _) = locate(t, &f).margin();
        if min_margin.as_ref().is_none_or(|x| gap < *x) {
            min_margin = Some(gap);
        }
    }
    let min_margin = min_margin.expect("grid nonempty");
    let floor = rational::ratio(1, ((d + 1) * (d + 1)) as i64);
    let from_grid = &min_margin / &lip_up - rho_up;
    let from_floor = floor / &lip_up;
    let lb = if from_grid > from_floor { from_grid } else { from_floor };
    StarCover { regions: regions(t), lebesgue_lb: lb * scale, lipschitz_sq: lip, grid, grid_min_margin: min_margin }
}

/// Certified lower bound `F_lb(B)`: every straight simplex of diameter below
/// it is small with respect to `T_B`.
pub fn fatness(b: &LatticeBasis, grid: Option<usize>) -> Result<Rational> {
    let d = b.rank();
    if d > 3 {
        return Err(Error::DimensionTooLarge(d, 3));
    }
    let t = triangulate(b)?;
    Ok(star_cover(&t, grid.unwrap_or_else(|| default_grid(d))).lebesgue_lb)
}

/// Uncertified estimate of `K_d`: twice the least `F_lb` over sampled unit
/// bases whose Babai angles satisfy `sin^2 >= (2/9)^d`. A running minimum,
/// so more samples never increase it.
pub fn estimate_kd(d: usize, samples: usize, seed: u64) -> Result<f64> {
    if d == 0 || d > 3 {
        return Err(Error::DimensionTooLarge(d, 3));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = num_traits::pow(rational::ratio(2, 9), d);
    let mut best: Option<Rational> = None;
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < samples.max(1) {
        attempts += 1;
        if attempts > 1000 * samples.max(1) {
            break;
        }
        let vectors: Vec<Vec<Rational>> = (0..d)
            .map(|_| {
                let raw: Vec<i64> = (0..d).map(|_| rng.gen_range(-64..=64)).collect();
                let norm = raw.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt().max(1.0);
                let inv = rational::best_approximation(1.0 / norm, 1000).unwrap_or_else(|| rational::int(1));
                raw.iter().map(|&x| rational::int(x) * &inv).collect()
            })
            .collect();
        let Ok(b) = LatticeBasis::new(vectors) else { continue };
        if lattice::babai_sin_squared(&b).iter().any(|s| *s < bound) {
            continue;
        }
        accepted += 1;
        let f = fatness(&b, None)?;
        if best.as_ref().is_none_or(|x| f < *x) {
            best = Some(f);
        }
    }
    let best = best.ok_or_else(|| Error::Invalid("no admissible basis sampled".into()))?;
    Ok(2.0 * rational::to_f64(&best))
}

/// Certificate that a straight simplex lies in the open star of the
/// `T'`-vertex at the barycenter of `tau`.
#[derive(Clone, Debug)]
pub struct SmallWitness {
    pub tau_vertices: Vec<usize>,
    /// Absolute lattice coordinates of the vertices of `tau`.
    pub tau_lifts: Vec<Vec<Rational>>,
    pub margin: Rational,
    pub diameter_sq: Rational,
}

fn diameter_sq(s: &Simplex<Point>) -> Rational {
    let v = s.vertices();
    let mut best = Rational::zero();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let diff = v[i].sub(&v[j]);
            let sq = linalg::dot(diff.coords(), diff.coords());
            if sq > best {
                best = sq;
            }
        }
    }
    best
}

/// Smallness certificate for a lifted straight simplex: `Some(witness)` when
/// its diameter is below the Lebesgue bound (then the star at its first
/// vertex provably contains it); `None` means "not certified", not "large".
pub fn is_small(t: &TorusComplex, s: &Simplex<Point>) -> Result<Option<SmallWitness>> {
    let diam = diameter_sq(s);
    if t.dim() == 0 {
        return Ok(Some(SmallWitness {
            tau_vertices: vec![0],
            tau_lifts: vec![Vec::new()],
            margin: rational::int(1),
            diameter_sq: diam,
        }));
    }
    if diam >= t.injectivity_sq()? {
        return Err(Error::TooLargeToLift);
    }
    let star = t.star();
    let lb = &star.lebesgue_lb;
    if !lb.is_positive() || diam >= lb * lb {
        return Ok(None);
    }
    let coords: Vec<Vec<Rational>> = s.vertices().iter().map(|p| t.lattice_coords(p)).collect();
    let loc = locate(t, &coords[0]);
    let (margin, tau) = loc.margin();
    if margin.clone() * &margin <= &star.lipschitz_sq * &diam {
        return Ok(None);
    }
    let tau_lifts: Vec<Vec<Rational>> = tau.iter().map(|&i| loc.lifts[i].clone()).collect();
    if !coords.iter().all(|f| in_open_star(t, f, &tau_lifts)) {
        return Err(Error::Verification("certified simplex leaves its star".into()));
    }
    Ok(Some(SmallWitness {
        tau_vertices: tau.iter().map(|&i| loc.vertices[i]).collect(),
        tau_lifts,
        margin,
        diameter_sq: diam,
    }))
}

/// The straightened simplex `a(s)`: vertex `i` goes to `n(s(v_i))`, lifted
/// next to `s(v_i)`.
pub fn straighten(t: &TorusComplex, s: &Simplex<Point>) -> Result<Simplex<Point>> {
    let w = is_small(t, s)?.ok_or(Error::NotSmall)?;
    let mut out = Vec::with_capacity(s.vertices().len());
    for p in s.vertices() {
        let loc = locate(t, &t.lattice_coords(p));
        let lift = &loc.lifts[loc.nearest_vertex()];
        if !w.tau_lifts.contains(lift) {
            return Err(Error::Verification("straightened vertex outside the witness simplex".into()));
        }
        out.push(t.ambient_point(lift));
    }
    Ok(Simplex(out))
}

/// Straightens a small chain: returns `a(c)` and the prism chain `c_1` with
/// `d c_1 = a(c) - c - prism(dc)`, both reduced modulo the lattice.
pub fn straighten_chain(t: &TorusComplex, c: &AffineChain) -> Result<(AffineChain, AffineChain)> {
    let mut a = Chain::zero(c.dim());
    for (s, q) in c.iter() {
        a.add_term(straighten(t, s)?, q.clone())?;
    }
    let c1 = prism_chain(c, |s| straighten(t, s))?;
    Ok((t.canonicalize(&a), t.canonicalize(&c1)))
}
