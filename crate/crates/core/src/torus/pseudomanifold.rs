//! Combinatorial checks for oriented pseudomanifolds.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::TorusComplex;
use crate::error::{Error, Result};

/// A finite cell complex given by face incidences: `levels[k][j]` lists the
/// `k + 1` faces of cell `j` (face `i` opposite vertex `i`) in level `k - 1`.
#[derive(Clone, Debug)]
pub struct CellComplex {
    pub levels: Vec<Vec<Vec<usize>>>,
    /// Declared singular cells as `(dim, index)`; closed under faces on use.
    pub singular: BTreeSet<(usize, usize)>,
}

impl CellComplex {
    pub fn dim(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    /// Simplicial complex from top simplices given as vertex tuples; the
    /// singular set is given by vertex tuples of any dimension.
    pub fn from_simplices(tops: &[Vec<usize>], singular: &[Vec<usize>]) -> Result<Self> {
        let n = tops.first().map(|s| s.len()).ok_or_else(|| Error::Invalid("no top simplices".into()))? - 1;
        if tops.iter().any(|s| s.len() != n + 1) {
            return Err(Error::Invalid("top simplices of different dimensions".into()));
        }
        let mut sets: Vec<BTreeMap<Vec<usize>, usize>> = vec![BTreeMap::new(); n + 1];
        let mut levels: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
        fn insert(
            s: Vec<usize>,
            sets: &mut Vec<BTreeMap<Vec<usize>, usize>>,
            levels: &mut Vec<Vec<Vec<usize>>>,
        ) -> usize {
            let k = s.len() - 1;
            if let Some(&i) = sets[k].get(&s) {
                return i;
            }
            let faces = if k == 0 {
                Vec::new()
            } else {
                (0..=k)
                    .map(|i| {
                        let mut f = s.clone();
                        f.remove(i);
                        insert(f, sets, levels)
                    })
                    .collect()
            };
            let idx = levels[k].len();
            levels[k].push(faces);
            sets[k].insert(s, idx);
            idx
        }
        for t in tops {
            let mut s = t.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != n + 1 {
                return Err(Error::Invalid(format!("degenerate simplex {t:?}")));
            }
            // keep duplicates of a top simplex as separate cells
            let k = n;
            if sets[k].contains_key(&s) {
                let faces = levels[k][sets[k][&s]].clone();
                levels[k].push(faces);
            } else {
                insert(s, &mut sets, &mut levels);
            }
        }
        let mut sing = BTreeSet::new();
        for s in singular {
            let mut v = s.clone();
            v.sort_unstable();
            let k = v.len().checked_sub(1).ok_or_else(|| Error::Invalid("empty singular simplex".into()))?;
            let idx = sets
                .get(k)
                .and_then(|m| m.get(&v))
                .ok_or_else(|| Error::Invalid(format!("singular simplex {s:?} is not in the complex")))?;
            sing.insert((k, *idx));
        }
        Ok(CellComplex { levels, singular: sing })
    }

    pub fn from_torus(t: &TorusComplex) -> Self {
        CellComplex {
            levels: (0..=t.dim()).map(|k| t.cells(k).iter().map(|c| c.faces.clone()).collect()).collect(),
            singular: BTreeSet::new(),
        }
    }

    fn closure(&self, cells: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<(usize, usize)> = cells.into_iter().collect();
        while let Some((k, j)) = stack.pop() {
            if out.insert((k, j)) && k > 0 {
                stack.extend(self.levels[k][j].iter().map(|&f| (k - 1, f)));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudomanifoldReport {
    pub dim: usize,
    /// (i): every non-singular codimension-one face has exactly two cofaces.
    pub faces_ok: bool,
    /// Offending codimension-one faces with their incidence counts.
    pub bad_faces: Vec<(usize, usize)>,
    pub singular_dim: Option<usize>,
    /// (ii): the singular set has dimension at most n - 1.
    pub singular_ok: bool,
    pub singular_frontier_dim: Option<usize>,
    /// (iii): the singular set meets the closure of its complement in
    /// dimension at most n - 2.
    pub frontier_ok: bool,
    pub orientable: bool,
    /// Signs of the top cells in a fundamental cycle, when one was found.
    pub fundamental_cycle: Option<Vec<i8>>,
    pub passed: bool,
}

pub fn validate_pseudomanifold(c: &CellComplex) -> PseudomanifoldReport {
    let n = c.dim();
    let singular = c.closure(c.singular.iter().copied());
    let tops: Vec<usize> = (0..c.levels[n].len()).filter(|&j| !singular.contains(&(n, j))).collect();

    // incidences of codimension-one faces among non-singular top cells
    let mut incidences: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    if n > 0 {
        for j in 0..c.levels[n - 1].len() {
            incidences.insert(j, Vec::new());
        }
        for &t in &tops {
            for (i, &f) in c.levels[n][t].iter().enumerate() {
                incidences.entry(f).or_default().push((t, i));
            }
        }
    }
    let bad_faces: Vec<(usize, usize)> = incidences
        .iter()
        .filter(|(f, inc)| !singular.contains(&(n - 1, **f)) && inc.len() != 2)
        .map(|(f, inc)| (*f, inc.len()))
        .collect();
    let faces_ok = bad_faces.is_empty();

    let singular_dim = singular.iter().map(|&(k, _)| k).max();
    let singular_ok = n == 0 && singular.is_empty() || singular_dim.is_none_or(|k| k < n);

    let frontier = c.closure(tops.iter().map(|&t| (n, t)));
    let singular_frontier_dim = frontier.intersection(&singular).map(|&(k, _)| k).max();
    let frontier_ok = singular_frontier_dim.is_none_or(|k| k + 2 <= n);

    // coherent orientation by propagation across non-singular faces
    let mut sign: BTreeMap<usize, i8> = BTreeMap::new();
    let mut orientable = faces_ok;
    if faces_ok {
        let mut neighbours: BTreeMap<usize, Vec<(usize, i8)>> = BTreeMap::new();
        for (f, inc) in &incidences {
            if singular.contains(&(n - 1, *f)) || inc.len() != 2 {
                continue;
            }
            let ((a, ia), (b, ib)) = (inc[0], inc[1]);
            let pa: i8 = if ia % 2 == 0 { 1 } else { -1 };
            let pb: i8 = if ib % 2 == 0 { 1 } else { -1 };
            // need s_a pa + s_b pb = 0, i.e. s_b = -s_a pa pb
            let rel = -pa * pb;
            if a == b {
                if rel != 1 {
                    orientable = false;
                }
                continue;
            }
            neighbours.entry(a).or_default().push((b, rel));
            neighbours.entry(b).or_default().push((a, rel));
        }
        for &start in &tops {
            if sign.contains_key(&start) {
                continue;
            }
            sign.insert(start, 1);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let sx = sign[&x];
                for &(y, rel) in neighbours.get(&x).map_or(&[][..], Vec::as_slice) {
                    let want = sx * rel;
                    match sign.get(&y) {
                        Some(&s) if s != want => orientable = false,
                        Some(_) => {}
                        None => {
                            sign.insert(y, want);
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
    }
    let fundamental_cycle = orientable
        .then(|| (0..c.levels[n].len()).map(|j| sign.get(&j).copied().unwrap_or(0)).collect());
    PseudomanifoldReport {
        dim: n,
        faces_ok,
        bad_faces,
        singular_dim,
        singular_ok,
        singular_frontier_dim,
        frontier_ok,
        orientable,
        fundamental_cycle,
        passed: faces_ok && singular_ok && frontier_ok && orientable,
    }
}
