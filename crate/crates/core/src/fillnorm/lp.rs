//! Exact two-phase simplex method for `min c.x` subject to `A x = b, x >= 0`.
//!
//! Tableau pivots are done in exact rational arithmetic. Bland's rule is the
//! default; the largest-coefficient rule is kept for demonstrating cycling.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub equality_matrix: Matrix,
    pub rhs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
    /// Dual solution `y` with `A^T y <= c` and `b.y = value`.
    pub dual: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    Bland,
    /// Most negative reduced cost, ties and ratio ties to the lowest index.
    Dantzig,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>, equality_matrix: Matrix, rhs: Vec<Rational>) -> Result<Self> {
        let n = objective.len();
        if equality_matrix.len() != rhs.len() {
            return Err(Error::Invalid(format!("{} rows but {} right-hand sides", equality_matrix.len(), rhs.len())));
        }
        if let Some(r) = equality_matrix.iter().position(|r| r.len() != n) {
            return Err(Error::Invalid(format!("row {r} has {} entries, expected {n}", equality_matrix[r].len())));
        }
        Ok(LinearProgram { objective, equality_matrix, rhs })
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    /// Plain text equality form:
    /// ```text
    /// vars 2
    /// rows 1
    /// objective 1 1
    /// row 1 -1 = -2
    /// ```
    pub fn to_text(&self) -> String {
        let f = |v: &[Rational]| v.iter().map(rational::format).collect::<Vec<_>>().join(" ");
        let mut s = format!("vars {}\nrows {}\nobjective {}\n", self.vars(), self.rows(), f(&self.objective));
        for (row, b) in self.equality_matrix.iter().zip(&self.rhs) {
            let _ = writeln!(s, "row {} = {}", f(row), rational::format(b));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (mut vars, mut rows) = (None, None);
        let mut objective = None;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let nums = |it: &[&str]| it.iter().map(|t| rational::parse(t)).collect::<Result<Vec<_>>>();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: {line}", no + 1));
            match toks[0] {
                "vars" => vars = Some(toks.get(1).and_then(|t| t.parse::<usize>().ok()).ok_or_else(bad)?),
                "rows" => rows = Some(toks.get(1).and_then(|t| t.parse::<usize>().ok()).ok_or_else(bad)?),
                "objective" => objective = Some(nums(&toks[1..])?),
                "row" => {
                    let eq = toks.iter().position(|t| *t == "=").ok_or_else(bad)?;
                    if eq + 2 != toks.len() {
                        return Err(bad());
                    }
                    a.push(nums(&toks[1..eq])?);
                    b.push(rational::parse(toks[eq + 1])?);
                }
                _ => return Err(bad()),
            }
        }
        let objective = objective.ok_or_else(|| Error::Parse("missing objective".into()))?;
        if vars.is_some_and(|v| v != objective.len()) {
            return Err(Error::Parse("objective length differs from vars".into()));
        }
        if rows.is_some_and(|r| r != a.len()) {
            return Err(Error::Parse("row count differs from rows".into()));
        }
        LinearProgram::new(objective, a, b).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Dense tableau: `rows` constraint rows followed by the cost row; the last
/// column is the right-hand side (for the cost row, minus the value).
struct Tableau {
    t: Matrix,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for x in self.t[r].iter_mut() {
            *x /= &p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Sets the cost row to the reduced costs of `cost` for the current basis.
    fn price(&mut self, cost: &[Rational]) {
        let m = self.m();
        let w = self.t[0].len();
        let mut row = vec![Rational::zero(); w];
        row[..cost.len()].clone_from_slice(cost);
        for i in 0..m {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&self.t[i]) {
                *x -= cb * y;
            }
        }
        self.t[m] = row;
    }

    fn run(&mut self, rule: PivotRule, allowed: usize, max_pivots: Option<usize>) -> Result<Step> {
        let m = self.m();
        let rhs = self.cols;
        loop {
            if max_pivots.is_some_and(|k| self.pivots >= k) {
                return Err(Error::Verification(format!("simplex iteration limit of {} pivots reached", self.pivots)));
            }
            let costs = &self.t[m];
            let entering = match rule {
                PivotRule::Bland => (0..allowed).find(|&j| costs[j].is_negative()),
                PivotRule::Dantzig => (0..allowed)
                    .filter(|&j| costs[j].is_negative())
                    .min_by(|&a, &b| costs[a].cmp(&costs[b]).then(a.cmp(&b))),
            };
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..m {
                let a = &self.t[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.t[i][rhs] / a;
                let better = match &leave {
                    None => true,
                    Some((r, best)) => match rule {
                        PivotRule::Bland => ratio < *best || ratio == *best && self.basis[i] < self.basis[*r],
                        PivotRule::Dantzig => ratio < *best,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Step::Unbounded);
            };
            self.pivot(r, c);
        }
    }
}

pub fn lp_solve(p: &LinearProgram) -> Result<LpSolution> {
    lp_solve_with(p, PivotRule::Bland, None)
}

/// Two-phase simplex with the given pivoting rule and an optional cap on
/// the number of pivots.
pub fn lp_solve_with(p: &LinearProgram, rule: PivotRule, max_pivots: Option<usize>) -> Result<LpSolution> {
    let n = p.vars();
    let m = p.rows();
    // phase 1 on [A | I] with b >= 0
    let cols = n + m;
    let mut t = linalg::zeros(m + 1, cols + 1);
    for i in 0..m {
        let flip = p.rhs[i].is_negative();
        for j in 0..n {
            t[i][j] = if flip { -p.equality_matrix[i][j].clone() } else { p.equality_matrix[i][j].clone() };
        }
        t[i][n + i] = Rational::one();
        t[i][cols] = p.rhs[i].abs();
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), cols, pivots: 0 };
    let mut phase1 = vec![Rational::zero(); cols];
    for c in &mut phase1[n..] {
        *c = Rational::one();
    }
    tab.price(&phase1);
    tab.run(rule, cols, max_pivots)?;
    if !tab.t[m][cols].is_zero() {
        return Err(Error::Infeasible);
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < tab.m() {
        if tab.basis[i] >= n {
            if let Some(c) = (0..n).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, c);
            } else {
                tab.t.remove(i);
                tab.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    // phase 2: forbid artificial columns from entering
    tab.price(&[p.objective.clone(), vec![Rational::zero(); m]].concat());
    if let Step::Unbounded = tab.run(rule, n, max_pivots)? {
        return Err(Error::Unbounded);
    }
    let mm = tab.m();
    let mut x = vec![Rational::zero(); n];
    for (r, &j) in tab.basis.iter().enumerate() {
        x[j] = tab.t[r][cols].clone();
    }
    let value = -tab.t[mm][cols].clone();
    let dual = dual_solution(p, &tab.basis)?;
    let sol = LpSolution { value, x, dual, pivots: tab.pivots };
    verify(p, &sol)?;
    Ok(sol)
}

/// Solves `B^T y = c_B` on a set of independent rows of `A`.
fn dual_solution(p: &LinearProgram, basis: &[usize]) -> Result<Vec<Rational>> {
    let m = p.rows();
    if basis.is_empty() {
        return Ok(vec![Rational::zero(); m]);
    }
    // rows of A restricted to the basic columns; pick independent ones
    let restricted: Matrix = p.equality_matrix.iter().map(|r| basis.iter().map(|&j| r[j].clone()).collect()).collect();
    let mut rt = linalg::transpose(&restricted);
    let rows = linalg::rref(&mut rt);
    let sub: Matrix = rows.iter().map(|&i| restricted[i].clone()).collect();
    let cb: Vec<Rational> = basis.iter().map(|&j| p.objective[j].clone()).collect();
    let y_sub = linalg::solve(&linalg::transpose(&sub), &cb)
        .ok_or_else(|| Error::Verification("singular final basis".into()))?;
    let mut y = vec![Rational::zero(); m];
    for (&i, v) in rows.iter().zip(y_sub) {
        y[i] = v;
    }
    Ok(y)
}

/// Primal feasibility, dual feasibility and equal objective values.
fn verify(p: &LinearProgram, s: &LpSolution) -> Result<()> {
    if s.x.iter().any(Signed::is_negative) || linalg::mat_vec(&p.equality_matrix, &s.x) != p.rhs {
        return Err(Error::Verification("primal solution infeasible".into()));
    }
    let at = linalg::transpose(&p.equality_matrix);
    for (j, c) in p.objective.iter().enumerate() {
        let aty = if at.is_empty() { Rational::zero() } else { linalg::dot(&at[j], &s.dual) };
        if aty > *c {
            return Err(Error::Verification(format!("dual infeasible at column {j}")));
        }
    }
    if linalg::dot(&p.objective, &s.x) != s.value || linalg::dot(&p.rhs, &s.dual) != s.value {
        return Err(Error::Verification("duality gap".into()));
    }
    Ok(())
}

/// `min ||x||_1` subject to `M x = y`, via `x = u - w` with `u, w >= 0`.
pub fn l1_minimize(m: &Matrix, cols: usize, y: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
    let a: Matrix = m
        .iter()
        .map(|r| r.iter().cloned().chain(r.iter().map(|v| -v.clone())).collect())
        .collect();
    let p = LinearProgram::new(vec![Rational::one(); 2 * cols], a, y.to_vec())?;
    let s = lp_solve(&p)?;
    let x = (0..cols).map(|j| &s.x[j] - &s.x[cols + j]).collect();
    Ok((s.value, x))
}

#[derive(Serialize, Deserialize)]
pub struct LpSolutionJson {
    pub value: String,
    pub x: Vec<String>,
    pub dual: Vec<String>,
}

impl LpSolution {
    pub fn to_json(&self) -> LpSolutionJson {
        let f = |v: &[Rational]| v.iter().map(rational::format).collect();
        LpSolutionJson { value: rational::format(&self.value), x: f(&self.x), dual: f(&self.dual) }
    }
}
