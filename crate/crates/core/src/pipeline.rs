//! The end-to-end filling pipeline at desk scale.
//!
//! The interior of the manifold is formal: a labelled chain whose boundary
//! simplices have all vertices on one boundary torus, where they are
//! realized as straight simplices. Only the boundary is manipulated:
//! symmetrize, transfer to a homothetic cover, clear denominators,
//! straighten to a multiple of the affine fundamental cycle, project back,
//! divide, push through the quotient `h` and fill the image in the
//! singular set. Straightening is a homotopy supported on the boundary, so
//! the relative cycle keeps its norm; the prism chain of that homotopy is
//! computed to certify the boundary moved within its homology class.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chains::{AffineChain, Chain, ChainJson, Point, Simplex};
use crate::error::{Error, Result};
use crate::fillnorm::{self, FillingCertificate, FillingCertificateJson};
use crate::lattice::{self, LatticeBasis, LatticeJson, SublatticeMap};
use crate::rational::{self, Rational};
use crate::torus::{
    canonical_chain, filling_quotient, is_small, project, straighten_chain, top_simplex_count, transfer, triangulate,
    FillingQuotient,
};

#[derive(Clone, Debug)]
pub struct BoundaryTorus {
    pub name: String,
    pub basis: LatticeBasis,
    /// Lattice vectors spanning the filling subtorus.
    pub subtorus: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug)]
pub struct DegreePolicy {
    /// Cover components over each boundary torus.
    pub components: u64,
    /// Least homothety factor `k` per component.
    pub min_degree: u64,
}

impl Default for DegreePolicy {
    fn default() -> Self {
        DegreePolicy { components: 1, min_degree: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub epsilon: Rational,
    pub tori: Vec<BoundaryTorus>,
    /// Formal relative cycle; its boundary must live on the tori.
    pub interior: Chain<String>,
    /// Boundary vertex labels: torus index and a point of `R^d`.
    pub boundary_vertices: BTreeMap<String, (usize, Point)>,
    pub policy: DegreePolicy,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub torus: Option<usize>,
    #[serde(with = "rational::serde_str")]
    pub norm: Rational,
    pub citation: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusAccount {
    pub torus: usize,
    /// Multiple of the fundamental class carried by the boundary.
    #[serde(with = "rational::serde_str")]
    pub class: Rational,
    /// Common denominator cleared after transfer.
    #[serde(with = "rational::serde_str")]
    pub q: Rational,
    pub components: u64,
    pub k: u64,
    /// Total degree `D = p k^d`.
    pub degree: u64,
    #[serde(with = "rational::serde_str")]
    pub straightened_norm: Rational,
    /// `p t_{n-1} q |class| / D`.
    #[serde(with = "rational::serde_str")]
    pub expected_norm: Rational,
    #[serde(with = "rational::serde_str")]
    pub filling_constant: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub n: usize,
    /// `t_{n-1}`: top simplices of a triangulated boundary torus.
    pub t: u64,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// `K = max_i K(dim V_i, n - 1)`.
    #[serde(with = "rational::serde_str")]
    pub k_constant: Rational,
    #[serde(with = "rational::serde_str")]
    pub input_norm: Rational,
    #[serde(with = "rational::serde_str")]
    pub output_norm: Rational,
    /// `input_norm + (2 + K t) epsilon`.
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub tori: Vec<TorusAccount>,
    pub stages: Vec<StageRecord>,
}

impl PipelineTrace {
    /// The bound recomputed from the trace's own data.
    pub fn recomputed_bound(&self) -> Rational {
        &self.input_norm + (rational::int(2) + &self.k_constant * rational::int(self.t as i64)) * &self.epsilon
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub trace: PipelineTrace,
    /// The symmetrized formal interior, glued along `boundary`.
    pub interior: Chain<String>,
    /// Straightened, projected boundary on each torus.
    pub boundary: Vec<AffineChain>,
    /// Its image in each singular piece `V_i` (lattice coordinates of `V_i`).
    pub pushed: Vec<AffineChain>,
    pub fillings: Vec<FillingCertificate>,
}

const CITE_RATIONAL: &str = "relative cycle homologous to a rational chain within epsilon";
const CITE_SYMMETRIZE: &str = "symmetrization is chain homotopic to the identity and does not increase norm";
const CITE_COVER: &str = "cover degree large against m / epsilon";
const CITE_TRANSFER: &str = "transfer: average of the lifts, an isometry";
const CITE_CLEAR: &str = "trans(c_1) = (1/q) c_2 with c_2 integral";
const CITE_STRAIGHTEN: &str = "boundary homotoped to an affine chain; |d c_3| = p t_{n-1} q / D";
const CITE_PROJECT: &str = "projecting back down";
const CITE_QUOTIENT: &str = "push forward along the quotient map h";
const CITE_FILL: &str = "the image cycle bounds a chain of norm at most K times its own";
const CITE_FINAL: &str = "|h_# c - c'| <= |M, dM| + (2 + K t_{n-1}) epsilon";

/// Realizes a boundary simplex as a straight simplex, lifting vertices
/// `1..` to the translates nearest (in lattice coordinates) to vertex 0.
fn realize(s: &Simplex<String>, cfg: &PipelineConfig) -> Result<(usize, Simplex<Point>)> {
    let mut torus = None;
    let mut pts = Vec::with_capacity(s.vertices().len());
    for v in s.vertices() {
        let (i, p) = cfg
            .boundary_vertices
            .get(v)
            .ok_or_else(|| Error::Invalid(format!("boundary simplex {:?} has interior vertex {v}", s.vertices())))?;
        if torus.is_some_and(|t| t != *i) {
            return Err(Error::Invalid(format!("boundary simplex {:?} meets two tori", s.vertices())));
        }
        torus = Some(*i);
        pts.push(p.clone());
    }
    let i = torus.ok_or_else(|| Error::Invalid("empty simplex".into()))?;
    let b = &cfg.tori[i].basis;
    let base = pts[0].clone();
    for p in pts.iter_mut().skip(1) {
        let f = b.coords_of(p.sub(&base).coords());
        let shift: Vec<_> = f.iter().map(rational::round_half_up).collect();
        *p = p.sub(&Point(b.integer_combination(&shift)));
    }
    Ok((i, Simplex(pts)))
}

fn validate(cfg: &PipelineConfig) -> Result<usize> {
    if !cfg.epsilon.is_positive() {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    if cfg.tori.is_empty() {
        return Err(Error::Invalid("no boundary tori".into()));
    }
    let d = cfg.tori[0].basis.rank();
    for t in &cfg.tori {
        if t.basis.rank() != d || t.basis.ambient_dim() != d {
            return Err(Error::Invalid(format!("torus {} is not a full-rank lattice in R^{d}", t.name)));
        }
    }
    if cfg.interior.dim() != d + 1 {
        return Err(Error::Invalid(format!("interior chain has dimension {}, expected {}", cfg.interior.dim(), d + 1)));
    }
    if cfg.policy.components == 0 || cfg.policy.min_degree == 0 {
        return Err(Error::Invalid("cover parameters must be positive".into()));
    }
    for (label, (i, p)) in &cfg.boundary_vertices {
        if *i >= cfg.tori.len() || p.dim() != d {
            return Err(Error::Invalid(format!("boundary vertex {label} does not lie on a torus")));
        }
    }
    Ok(d)
}

/// Least `k >= k0` with `k^d >= target` and every transferred simplex small.
fn choose_degree(b: &AffineChain, basis: &LatticeBasis, k0: u64, target: &Rational) -> Result<(u64, SublatticeMap)> {
    let d = basis.rank() as u32;
    let mut k = k0;
    while Rational::from_integer(k.pow(d).into()) < *target {
        k += 1;
    }
    loop {
        if k > 1 << 12 {
            return Err(Error::Verification("no admissible cover degree found".into()));
        }
        let m = SublatticeMap::homothety(basis, k)?;
        let t = triangulate(&m.child)?;
        let zt = transfer(b, &m);
        let mut ok = true;
        for (s, _) in zt.iter() {
            match is_small(&t, s) {
                Ok(Some(_)) => {}
                Ok(None) | Err(Error::TooLargeToLift) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            return Ok((k, m));
        }
        k += 1;
    }
}

/// Pushes a straight chain through `h` into lattice coordinates of `V`.
fn push_to_v(h: &FillingQuotient, c: &AffineChain) -> AffineChain {
    let img = c.map_vertices(|p| Point(h.target.coords_of(h.map_point(p).coords())));
    canonical_chain(&LatticeBasis::standard(h.target.rank()), &img)
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let d = validate(cfg)?;
    let n = d + 1;
    let t_count = top_simplex_count(d) as u64;
    let m_tori = cfg.tori.len();
    let mut stages = Vec::new();

    let input_norm = cfg.interior.l1_norm();
    record(&mut stages, "input", None, input_norm.clone(), "relative cycle");
    record(&mut stages, "rationalize", None, input_norm.clone(), CITE_RATIONAL);
    let interior = cfg.interior.symmetrize();
    record(&mut stages, "symmetrize", None, interior.l1_norm(), CITE_SYMMETRIZE);

    // realize the boundary on the tori
    let mut boundary_in: Vec<AffineChain> = vec![Chain::zero(d); m_tori];
    for (s, q) in interior.boundary()?.iter() {
        let (i, simplex) = realize(s, cfg)?;
        boundary_in[i].add_term(simplex, q.clone())?;
    }
    for (i, b) in boundary_in.iter_mut().enumerate() {
        *b = canonical_chain(&cfg.tori[i].basis, b);
        if d > 0 && !canonical_chain(&cfg.tori[i].basis, &b.boundary()?).is_zero() {
            return Err(Error::Invalid(format!("boundary on torus {} is not a cycle", cfg.tori[i].name)));
        }
    }

    // tori are independent: one thread each, results merged in torus order
    let runs: Vec<Result<TorusRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .tori
            .iter()
            .enumerate()
            .map(|(i, torus)| {
                let b = &boundary_in[i];
                scope.spawn(move || process_torus(cfg, i, torus, b, m_tori))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("torus worker panicked")).collect()
    });
    let mut accounts = Vec::new();
    let mut boundary_out = Vec::new();
    let mut pushed = Vec::new();
    let mut fillings = Vec::new();
    let mut k_const = Rational::zero();
    for run in runs {
        let run = run?;
        stages.extend(run.stages);
        if run.account.filling_constant > k_const {
            k_const = run.account.filling_constant.clone();
        }
        accounts.push(run.account);
        boundary_out.push(run.boundary);
        pushed.push(run.pushed);
        fillings.push(run.filling);
    }

    let output_norm = interior.l1_norm() + fillings.iter().map(|c| c.norm.clone()).sum::<Rational>();
    let bound = &input_norm + (rational::int(2) + &k_const * rational::int(t_count as i64)) * &cfg.epsilon;
    record(&mut stages, "final", None, output_norm.clone(), CITE_FINAL);
    if output_norm > bound {
        return Err(Error::Verification("output norm exceeds the certified bound".into()));
    }
    let trace = PipelineTrace {
        n,
        t: t_count,
        epsilon: cfg.epsilon.clone(),
        k_constant: k_const,
        input_norm,
        output_norm,
        bound,
        tori: accounts,
        stages,
    };
    let out = PipelineOutput { trace, interior, boundary: boundary_out, pushed, fillings };
    out.verify()?;
    Ok(out)
}

fn record(stages: &mut Vec<StageRecord>, stage: &str, torus: Option<usize>, norm: Rational, citation: &str) {
    log::info!("{stage:<20} {torus:?} {norm}");
    stages.push(StageRecord { stage: stage.into(), torus, norm, citation: citation.into() });
}

struct TorusRun {
    stages: Vec<StageRecord>,
    account: TorusAccount,
    boundary: AffineChain,
    pushed: AffineChain,
    filling: FillingCertificate,
}

/// Cover, straighten, project and fill the boundary on torus `i`.
fn process_torus(cfg: &PipelineConfig, i: usize, torus: &BoundaryTorus, b: &AffineChain, m_tori: usize) -> Result<TorusRun> {
    let d = torus.basis.rank();
    let p = cfg.policy.components;
    let t_count = top_simplex_count(d) as u64;
    let mut stages = Vec::new();
    let basis = lattice::lll_reduce(&torus.basis)?;
    let b = canonical_chain(&basis, b);
    record(&mut stages, "boundary", Some(i), b.l1_norm(), "boundary of the relative cycle on the torus");
    let class_red = fillnorm::homology_class(&b, &basis)[0].clone();
    let class = &class_red * basis_orientation(&basis, &torus.basis);

    // degree: D_i = p k^d >= m p |class| / epsilon
    let target = rational::int(m_tori as i64) * class.abs() / &cfg.epsilon;
    let (k, cover) = choose_degree(&b, &basis, cfg.policy.min_degree, &target)?;
    let degree = p * k.pow(d as u32);
    record(&mut stages, "cover selection", Some(i), Rational::from_integer(degree.into()), CITE_COVER);

    // per component: trans(b) / p; clear denominators
    let per = transfer(&b, &cover).scale(&Rational::new(BigInt::one(), p.into()));
    record(&mut stages, "transfer", Some(i), per.l1_norm() * rational::int(p as i64), CITE_TRANSFER);
    let q = Rational::from_integer(per.denominator_lcm());
    let zt = per.scale(&q);
    record(&mut stages, "clear denominators", Some(i), zt.l1_norm() * rational::int(p as i64), CITE_CLEAR);

    let tk = triangulate(&cover.child)?;
    let (a, c1) = straighten_chain(&tk, &zt)?;
    let straightened_norm = a.l1_norm() * rational::int(p as i64);
    record(&mut stages, "straighten", Some(i), straightened_norm.clone(), CITE_STRAIGHTEN);
    // a must be (q class / D) times the affine fundamental cycle
    let mult = &q * &class_red / Rational::from_integer(degree.into());
    let y = tk.to_simplicial(&a)?;
    let want: Vec<Rational> = tk.fundamental_cycle().iter().map(|f| f * &mult * orientation_factor(&tk)).collect();
    if y != want || tk.canonicalize(&tk.from_simplicial(d, &y)) != a {
        return Err(Error::BoundaryNotFundamental(format!(
            "straightened boundary on torus {} is not {} times the fundamental cycle",
            torus.name,
            rational::format(&mult)
        )));
    }
    let expected_norm = rational::int(p as i64) * rational::int(t_count as i64) * &q * class.abs()
        / Rational::from_integer(degree.into());
    if straightened_norm != expected_norm {
        return Err(Error::Verification("straightened boundary norm differs from p t q / D".into()));
    }

    // project and divide by q; the prism chain certifies the homotopy
    let scale = rational::int(p as i64) / &q;
    let b4 = project(&a, &cover).scale(&scale);
    record(&mut stages, "project", Some(i), project(&a, &cover).l1_norm() * rational::int(p as i64), CITE_PROJECT);
    record(&mut stages, "divide by q", Some(i), b4.l1_norm(), CITE_PROJECT);
    let e = project(&c1, &cover).scale(&scale);
    if canonical_chain(&basis, &e.boundary()?) != canonical_chain(&basis, &b4.sub(&b)?) {
        return Err(Error::Verification("homotopy chain does not connect the boundaries".into()));
    }

    let h = filling_quotient(&triangulate(&basis)?, &torus.subtorus)?;
    let img = push_to_v(&h, &b4).symmetrize();
    let img = canonical_chain(&LatticeBasis::standard(h.target.rank()), &img);
    record(&mut stages, "quotient", Some(i), img.l1_norm(), CITE_QUOTIENT);
    let cert = fillnorm::fill_cycle(&img, &LatticeBasis::standard(h.target.rank()), d)?;
    record(&mut stages, "fill", Some(i), cert.norm.clone(), CITE_FILL);
    let ki = fillnorm::k_constant(h.target.rank(), d)?;
    let account = TorusAccount {
        torus: i,
        class,
        q,
        components: p,
        k,
        degree,
        straightened_norm,
        expected_norm,
        filling_constant: ki,
    };
    Ok(TorusRun { stages, account, boundary: b4, pushed: img, filling: cert })
}

/// `+1` or `-1`: whether the reduced basis has the orientation of the input.
fn basis_orientation(reduced: &LatticeBasis, input: &LatticeBasis) -> Rational {
    let m: Vec<Vec<Rational>> = reduced.vectors().iter().map(|v| input.coords_of(v)).collect();
    if crate::linalg::determinant(&m).is_negative() {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Sign relating the simplicial fundamental cycle of `T_B` to the class
/// `[T]` in the basis orientation.
fn orientation_factor(t: &crate::torus::TorusComplex) -> Rational {
    let f = t.affine_fundamental_cycle();
    let c = fillnorm::homology_class(&f, t.basis());
    let total: Rational = c.iter().cloned().sum();
    Rational::one() / total
}

impl PipelineOutput {
    /// Exact checks: the pushed boundary is filled, i.e. the output cycle
    /// `h_# c - c'` has zero boundary, and the trace's bound recomputes.
    pub fn verify(&self) -> Result<()> {
        for (img, cert) in self.pushed.iter().zip(&self.fillings) {
            cert.recheck()?;
            let b = LatticeBasis::standard(img.iter().next().map_or(0, |(s, _)| s.vertices()[0].dim()));
            let bd = canonical_chain(&b, &cert.filling.boundary()?);
            if bd != canonical_chain(&b, img) {
                return Err(Error::Verification("filling does not bound the pushed boundary".into()));
            }
        }
        if self.trace.bound != self.trace.recomputed_bound() || self.trace.output_norm > self.trace.bound {
            return Err(Error::Verification("final bound does not recompute".into()));
        }
        Ok(())
    }
}

// ---- JSON ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryTorusJson {
    pub name: String,
    pub basis: LatticeJson,
    #[serde(default)]
    pub subtorus: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryVertexJson {
    pub torus: usize,
    pub point: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfigJson {
    pub epsilon: String,
    pub tori: Vec<BoundaryTorusJson>,
    pub interior: ChainJson,
    pub boundary_vertices: BTreeMap<String, BoundaryVertexJson>,
    #[serde(default)]
    pub components: Option<u64>,
    #[serde(default)]
    pub min_degree: Option<u64>,
}

impl PipelineConfig {
    pub fn from_json(j: &PipelineConfigJson) -> Result<Self> {
        let parse_vec = |v: &[String]| v.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>();
        let tori = j
            .tori
            .iter()
            .map(|t| {
                Ok(BoundaryTorus {
                    name: t.name.clone(),
                    basis: LatticeBasis::from_json(&t.basis)?,
                    subtorus: t.subtorus.iter().map(|v| parse_vec(v)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary_vertices = j
            .boundary_vertices
            .iter()
            .map(|(k, v)| Ok((k.clone(), (v.torus, Point(parse_vec(&v.point)?)))))
            .collect::<Result<_>>()?;
        Ok(PipelineConfig {
            epsilon: rational::parse(&j.epsilon)?,
            tori,
            interior: Chain::from_json(&j.interior)?,
            boundary_vertices,
            policy: DegreePolicy {
                components: j.components.unwrap_or(1),
                min_degree: j.min_degree.unwrap_or(1),
            },
        })
    }

    pub fn to_json(&self) -> PipelineConfigJson {
        let f = |v: &[Rational]| v.iter().map(rational::format).collect::<Vec<_>>();
        PipelineConfigJson {
            epsilon: rational::format(&self.epsilon),
            tori: self
                .tori
                .iter()
                .map(|t| BoundaryTorusJson {
                    name: t.name.clone(),
                    basis: t.basis.to_json(),
                    subtorus: t.subtorus.iter().map(|v| f(v)).collect(),
                })
                .collect(),
            interior: self.interior.to_json(),
            boundary_vertices: self
                .boundary_vertices
                .iter()
                .map(|(k, (i, p))| (k.clone(), BoundaryVertexJson { torus: *i, point: f(p.coords()) }))
                .collect(),
            components: Some(self.policy.components),
            min_degree: Some(self.policy.min_degree),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineOutputJson {
    pub trace: PipelineTrace,
    pub interior: ChainJson,
    pub boundary: Vec<ChainJson>,
    pub pushed: Vec<ChainJson>,
    pub fillings: Vec<FillingCertificateJson>,
}

impl PipelineOutput {
    pub fn to_json(&self) -> PipelineOutputJson {
        PipelineOutputJson {
            trace: self.trace.clone(),
            interior: self.interior.to_json(),
            boundary: self.boundary.iter().map(Chain::to_json).collect(),
            pushed: self.pushed.iter().map(Chain::to_json).collect(),
            fillings: self.fillings.iter().map(FillingCertificate::to_json).collect(),
        }
    }
}

/// The hand-built cylinder: six triangles between two circles of length
/// `len`, three vertices on each, both circles filled by points.
pub fn toy_cylinder(len: i64, epsilon: Rational) -> PipelineConfig {
    let label = |side: &str, i: usize| format!("{side}{}", i % 3);
    let mut interior = Chain::zero(2);
    for i in 0..3 {
        let tri = |v: [String; 3]| Simplex(v.to_vec());
        interior.add_term(tri([label("a", i), label("a", i + 1), label("b", i)]), Rational::one()).expect("dim 2");
        interior.add_term(tri([label("a", i + 1), label("b", i + 1), label("b", i)]), Rational::one()).expect("dim 2");
    }
    let mut boundary_vertices = BTreeMap::new();
    for i in 0..3 {
        let x = Point(vec![rational::ratio(len * i as i64, 3)]);
        boundary_vertices.insert(label("a", i), (0, x.clone()));
        boundary_vertices.insert(label("b", i), (1, x));
    }
    let circle = |name: &str| BoundaryTorus {
        name: name.into(),
        basis: LatticeBasis::new(vec![vec![rational::int(len)]]).expect("nonzero"),
        subtorus: vec![vec![rational::int(len)]],
    };
    PipelineConfig {
        epsilon,
        tori: vec![circle("bottom"), circle("top")],
        interior,
        boundary_vertices,
        policy: DegreePolicy::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn toy_cylinder_runs() {
        let cfg = toy_cylinder(7, ratio(1, 10));
        let out = run_pipeline(&cfg).unwrap();
        let tr = &out.trace;
        assert_eq!(tr.n, 2);
        assert_eq!(tr.t, 2);
        assert_eq!(tr.input_norm, int(6));
        for acc in &tr.tori {
            assert_eq!(acc.class.abs(), int(1));
            assert_eq!(acc.straightened_norm, acc.expected_norm);
        }
        assert!(tr.output_norm <= tr.bound);
        assert_eq!(tr.bound, tr.recomputed_bound());
    }
}
