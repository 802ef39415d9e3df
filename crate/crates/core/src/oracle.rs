//! Brute-force references used to certify the main pipeline on small
//! instances: the primal projection solved by enumerating active sets, and
//! an alpha complex built by testing every vertex subset against every
//! other site. Deliberately slow and deliberately independent: no pruning,
//! no shared linear algebra with the dual solver, so a bug in either path
//! cannot mask itself.

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::builder::WitnessMap;
use crate::cech::WeightedPoints;
use crate::complex::{FilteredComplex, Simplex};
use crate::tol::Tolerances;

/// Enumeration is exponential in the constraint count.
const MAX_ENUM_CONSTRAINTS: usize = 24;
/// Brute-force complex construction cap; one above the constraint cap.
const MAX_BRUTE_POINTS: usize = 25;

const CONSISTENCY_EPS: f64 = 1e-9;
const FEASIBILITY_EPS: f64 = 1e-10;
const RANK_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{n} constraints exceed the enumeration cap of {max}")]
    TooManyConstraints { n: usize, max: usize },
    #[error("{n} points exceed the brute-force cap of {max}")]
    TooManyPoints { n: usize, max: usize },
    #[error("constraint matrix has {len} entries, expected {n}x{m}")]
    BadShape { len: usize, n: usize, m: usize },
    #[error("equality index {index} out of range for {n} constraints")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("equality indices must be strictly increasing")]
    UnsortedEqualities,
}

/// Projection of `x` onto the polyhedron `{ y : A_i y = V_i (i in
/// equalities), A_i y <= V_i (otherwise) }`, minimising `0.5 |y - x|^2`.
#[derive(Clone, Debug)]
pub struct PrimalProblem {
    x: Vec<f64>,
    a: Vec<f64>,
    v: Vec<f64>,
    equalities: Vec<usize>,
}

impl PrimalProblem {
    /// `a` is the `n x m` constraint matrix, row-major, with `m = x.len()`.
    pub fn new(
        x: Vec<f64>,
        a: Vec<f64>,
        v: Vec<f64>,
        equalities: Vec<usize>,
    ) -> Result<Self, OracleError> {
        let (n, m) = (v.len(), x.len());
        if a.len() != n * m {
            return Err(OracleError::BadShape { len: a.len(), n, m });
        }
        for (pos, &e) in equalities.iter().enumerate() {
            if e >= n {
                return Err(OracleError::IndexOutOfRange { index: e, n });
            }
            if pos > 0 && equalities[pos - 1] >= e {
                return Err(OracleError::UnsortedEqualities);
            }
        }
        Ok(PrimalProblem { x, a, v, equalities })
    }

    pub fn constraints(&self) -> usize {
        self.v.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        let m = self.x.len();
        &self.a[i * m..(i + 1) * m]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PrimalSolution {
    Feasible { y: Vec<f64>, cstar: f64 },
    Infeasible,
}

impl PrimalSolution {
    /// Optimal objective, `+inf` when the constraints admit no point.
    pub fn cstar(&self) -> f64 {
        match self {
            PrimalSolution::Feasible { cstar, .. } => *cstar,
            PrimalSolution::Infeasible => f64::INFINITY,
        }
    }

    pub fn point(&self) -> Option<&[f64]> {
        match self {
            PrimalSolution::Feasible { y, .. } => Some(y),
            PrimalSolution::Infeasible => None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Enumeration state shared by every candidate subset of one constraint
/// system: the Gram matrix of the rows and each row's residual at `x`, so
/// testing a subset costs table lookups instead of fresh dot products.
struct EnumContext<'a> {
    p: &'a PrimalProblem,
    n: usize,
    /// gram[i * n + j] = a_i . a_j
    gram: Vec<f64>,
    /// u[i] = a_i . x - v_i
    u: Vec<f64>,
}

/// Reusable buffers for [`EnumContext::project`] and rank computations.
#[derive(Default)]
struct Scratch {
    g: Vec<f64>,
    w: Vec<f64>,
    mu: Vec<f64>,
    order: Vec<usize>,
    used: Vec<bool>,
}

/// Visit every `k`-subset of `0..len` in lexicographic order, reusing one
/// index buffer instead of allocating per subset.
fn for_each_subset(len: usize, k: usize, idx: &mut Vec<usize>, mut visit: impl FnMut(&[usize])) {
    if k > len {
        return;
    }
    idx.clear();
    idx.extend(0..k);
    loop {
        visit(idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < len - k + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl<'a> EnumContext<'a> {
    fn new(p: &'a PrimalProblem) -> Self {
        let n = p.v.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let d = dot(p.row(i), p.row(j));
                gram[i * n + j] = d;
                gram[j * n + i] = d;
            }
        }
        let u = (0..n).map(|i| dot(p.row(i), &p.x) - p.v[i]).collect();
        EnumContext { p, n, gram, u }
    }

    /// Symmetric Gaussian elimination with greedy diagonal pivoting on the
    /// Gram submatrix of `t_set`. Fills `s.mu` with the multipliers of the
    /// projection of `x` onto the affine set cut out by an independent
    /// subset of those rows (dependent rows keep zero) and returns the
    /// objective, half the squared step length.
    fn project(&self, t_set: &[usize], s: &mut Scratch) -> f64 {
        let t = t_set.len();
        let n = self.n;
        s.g.clear();
        for &i in t_set {
            for &j in t_set {
                s.g.push(self.gram[i * n + j]);
            }
        }
        s.w.clear();
        s.w.extend(t_set.iter().map(|&i| self.u[i]));

        let max_diag = (0..t).map(|r| s.g[r * t + r]).fold(0.0, f64::max);
        let ptol = RANK_EPS * max_diag;
        s.order.clear();
        s.used.clear();
        s.used.resize(t, false);
        loop {
            let mut q = usize::MAX;
            let mut best = ptol;
            for r in 0..t {
                if !s.used[r] && s.g[r * t + r] > best {
                    best = s.g[r * t + r];
                    q = r;
                }
            }
            if q == usize::MAX {
                break;
            }
            s.used[q] = true;
            s.order.push(q);
            let piv = s.g[q * t + q];
            for r in 0..t {
                if s.used[r] {
                    continue;
                }
                let f = s.g[r * t + q] / piv;
                if f == 0.0 {
                    continue;
                }
                for c in 0..t {
                    s.g[r * t + c] -= f * s.g[q * t + c];
                }
                s.w[r] -= f * s.w[q];
            }
        }

        // The pivoted rows form a triangular system in pivot order.
        s.mu.clear();
        s.mu.resize(t, 0.0);
        for idx in (0..s.order.len()).rev() {
            let q = s.order[idx];
            let mut val = s.w[q];
            for &c in &s.order {
                if c != q {
                    val -= s.g[q * t + c] * s.mu[c];
                }
            }
            s.mu[q] = val / s.g[q * t + q];
        }

        let mut cstar = 0.0;
        for r in 0..t {
            if s.mu[r] == 0.0 {
                continue;
            }
            let gi = t_set[r] * n;
            for c in 0..t {
                if s.mu[c] != 0.0 {
                    cstar += s.mu[r] * s.mu[c] * self.gram[gi + t_set[c]];
                }
            }
        }
        0.5 * cstar
    }

    /// a_i . y - v_i at the projected point y = x - sum mu_s a_s.
    fn row_residual(&self, i: usize, t_set: &[usize], mu: &[f64]) -> f64 {
        let mut r = self.u[i];
        for (s, &j) in t_set.iter().enumerate() {
            if mu[s] != 0.0 {
                r -= mu[s] * self.gram[i * self.n + j];
            }
        }
        r
    }

    /// Dependent rows were dropped by the elimination; the projection is
    /// only valid if they agree with the point it produced.
    fn consistent(&self, t_set: &[usize], mu: &[f64]) -> bool {
        t_set.iter().all(|&i| {
            let resid = self.row_residual(i, t_set, mu);
            let lhs = self.p.v[i] + resid;
            resid.abs() <= CONSISTENCY_EPS * (1.0 + self.p.v[i].abs().max(lhs.abs()))
        })
    }

    fn feasible(&self, t_set: &[usize], mu: &[f64], is_equality: &[bool]) -> bool {
        (0..self.n).all(|i| {
            let resid = self.row_residual(i, t_set, mu);
            let lhs = self.p.v[i] + resid;
            let slack = 1.0 + self.p.v[i].abs().max(lhs.abs());
            if is_equality[i] {
                resid.abs() <= CONSISTENCY_EPS * slack
            } else {
                resid <= FEASIBILITY_EPS * slack
            }
        })
    }

    fn rank_of(&self, rows: &[usize], s: &mut Scratch) -> usize {
        let t = rows.len();
        let n = self.n;
        s.g.clear();
        for &i in rows {
            for &j in rows {
                s.g.push(self.gram[i * n + j]);
            }
        }
        let max_diag = (0..t).map(|r| s.g[r * t + r]).fold(0.0, f64::max);
        let ptol = RANK_EPS * max_diag;
        s.used.clear();
        s.used.resize(t, false);
        let mut rank = 0;
        loop {
            let mut q = usize::MAX;
            let mut best = ptol;
            for r in 0..t {
                if !s.used[r] && s.g[r * t + r] > best {
                    best = s.g[r * t + r];
                    q = r;
                }
            }
            if q == usize::MAX {
                return rank;
            }
            s.used[q] = true;
            rank += 1;
            let piv = s.g[q * t + q];
            for r in 0..t {
                if s.used[r] {
                    continue;
                }
                let f = s.g[r * t + q] / piv;
                for c in 0..t {
                    s.g[r * t + c] -= f * s.g[q * t + c];
                }
            }
        }
    }

    /// Exhaustive minimum over active-set candidates for the given
    /// equality rows; inequality rows are taken from the whole system.
    fn solve(&self, equalities: &[usize]) -> Result<PrimalSolution, OracleError> {
        let n = self.n;
        if n > MAX_ENUM_CONSTRAINTS {
            return Err(OracleError::TooManyConstraints {
                n,
                max: MAX_ENUM_CONSTRAINTS,
            });
        }
        let m = self.p.x.len();
        let mut is_equality = vec![false; n];
        for &e in equalities {
            is_equality[e] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_equality[i]).collect();
        let mut scratch = Scratch::default();
        let budget = free
            .len()
            .min(m.saturating_sub(self.rank_of(equalities, &mut scratch)));

        let mut best: Option<(Vec<f64>, Vec<usize>, f64)> = None;
        // Extra-row bitmasks of candidates already proven feasible. A
        // candidate containing one of them projects onto a subset of its
        // affine set, so its objective cannot be lower; skip it unsolved.
        let mut feasible_extras: Vec<u32> = Vec::new();
        let mut t_set = Vec::with_capacity(equalities.len() + budget);
        let mut idx_buf = Vec::with_capacity(budget);
        for size in 0..=budget {
            for_each_subset(free.len(), size, &mut idx_buf, |sel| {
                let mut emask = 0u32;
                for &s in sel {
                    emask |= 1 << free[s];
                }
                for &fm in &feasible_extras {
                    if emask & fm == fm {
                        return;
                    }
                }
                t_set.clear();
                t_set.extend_from_slice(equalities);
                t_set.extend(sel.iter().map(|&s| free[s]));
                let cstar = self.project(&t_set, &mut scratch);
                if best.as_ref().is_some_and(|(.., b)| *b <= cstar) {
                    return;
                }
                if self.consistent(&t_set, &scratch.mu)
                    && self.feasible(&t_set, &scratch.mu, &is_equality)
                {
                    best = Some((scratch.mu.clone(), t_set.clone(), cstar));
                    feasible_extras.push(emask);
                }
            });
        }
        Ok(match best {
            Some((mu, t_set, cstar)) => {
                let mut y = self.p.x.clone();
                for (s, &j) in t_set.iter().enumerate() {
                    if mu[s] != 0.0 {
                        for (t_, yt) in y.iter_mut().enumerate() {
                            *yt -= mu[s] * self.p.row(j)[t_];
                        }
                    }
                }
                PrimalSolution::Feasible { y, cstar }
            }
            None => PrimalSolution::Infeasible,
        })
    }
}

/// Solve the projection problem exactly by enumeration.
///
/// Every optimum is the projection of `x` onto the span of an active
/// constraint set extending the equalities by at most `m - rank(A_J)`
/// further rows, so trying all such sets and keeping the best candidate
/// that satisfies every constraint finds it; if no candidate is feasible,
/// the polyhedron is empty.
pub fn primal_enumerate(p: &PrimalProblem) -> Result<PrimalSolution, OracleError> {
    EnumContext::new(p).solve(&p.equalities)
}

/// Alpha complex by exhaustion: every subset of at most `d + 1` vertices is
/// tested with constraints from every other site, no graph pruning at all.
pub fn brute_alpha(
    points: &WeightedPoints,
    d: usize,
) -> Result<(FilteredComplex, WitnessMap), OracleError> {
    let n = points.len();
    if n > MAX_BRUTE_POINTS {
        return Err(OracleError::TooManyPoints {
            n,
            max: MAX_BRUTE_POINTS,
        });
    }
    let m = points.dim();
    let a1 = points.cutoff();
    let tol = Tolerances::default();

    let per_base: Vec<Vec<(Simplex, f64, Vec<f64>)>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let others: Vec<usize> = (0..n).filter(|&z| z != b).collect();
            let x = points.point(b).to_vec();
            let px = points.power(b);
            let xb2 = dot(&x, &x);
            let mut a = vec![0.0; others.len() * m];
            let mut v = vec![0.0; others.len()];
            for (r, &z) in others.iter().enumerate() {
                let pz = points.point(z);
                for t in 0..m {
                    a[r * m + t] = pz[t] - x[t];
                }
                v[r] = 0.5 * (dot(pz, pz) - xb2 - points.power(z) + px);
            }
            let c1 = 0.5 * (a1 + px);
            let slack = tol.bound_slack(c1);

            // One constraint system per base; only the equality rows vary
            // across the candidate simplices.
            let prob = PrimalProblem::new(x, a, v, Vec::new())?;
            let ctx = EnumContext::new(&prob);

            let mut out = Vec::new();
            let tail: Vec<u32> = (b as u32 + 1..n as u32).collect();
            for k in 0..=d {
                for comb in tail.iter().copied().combinations(k) {
                    let mut vs = Vec::with_capacity(k + 1);
                    vs.push(b as u32);
                    vs.extend(comb);
                    let equalities: Vec<usize> = vs[1..]
                        .iter()
                        .map(|&z| others.binary_search(&(z as usize)).unwrap())
                        .collect();
                    if let PrimalSolution::Feasible { y, cstar } = ctx.solve(&equalities)? {
                        if cstar <= c1 + slack {
                            let sigma = Simplex::new(vs).expect("ascending by construction");
                            out.push((sigma, 2.0 * cstar - px, y));
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_, OracleError>>()?;

    let mut complex = FilteredComplex::new();
    let mut witness = WitnessMap::new(m);
    for group in per_base {
        for (s, w, y) in group {
            witness.insert(s.clone(), y);
            complex.insert(s, w);
        }
    }
    complex.trim();
    Ok((complex, witness))
}

/// Outcome of [`compare`]: simplices on one side only, plus weight and
/// witness disagreements above tolerance.
#[derive(Clone, Debug, Default)]
pub struct ComplexDiff {
    pub only_left: Vec<Simplex>,
    pub only_right: Vec<Simplex>,
    pub weight_mismatches: Vec<(Simplex, f64, f64)>,
    pub witness_mismatches: Vec<(Simplex, f64)>,
    pub max_weight_delta: f64,
    pub max_witness_delta: f64,
}

impl ComplexDiff {
    pub fn is_match(&self) -> bool {
        self.only_left.is_empty()
            && self.only_right.is_empty()
            && self.weight_mismatches.is_empty()
            && self.witness_mismatches.is_empty()
    }
}

impl std::fmt::Display for ComplexDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_match() {
            return write!(f, "complexes identical");
        }
        writeln!(
            f,
            "{} only in left, {} only in right, {} weight and {} witness mismatches",
            self.only_left.len(),
            self.only_right.len(),
            self.weight_mismatches.len(),
            self.witness_mismatches.len()
        )?;
        let mut shown = 0;
        for s in &self.only_left {
            if shown == 10 {
                return write!(f, "...");
            }
            writeln!(f, "  only left:  {s}")?;
            shown += 1;
        }
        for s in &self.only_right {
            if shown == 10 {
                return write!(f, "...");
            }
            writeln!(f, "  only right: {s}")?;
            shown += 1;
        }
        for (s, wl, wr) in &self.weight_mismatches {
            if shown == 10 {
                return write!(f, "...");
            }
            writeln!(f, "  weight {s}: {wl} vs {wr}")?;
            shown += 1;
        }
        for (s, d) in &self.witness_mismatches {
            if shown == 10 {
                return write!(f, "...");
            }
            writeln!(f, "  witness {s}: {d} apart")?;
            shown += 1;
        }
        Ok(())
    }
}

/// Diff two complexes with their witnesses. Weights disagree when the gap
/// exceeds `weight_tol * (1 + |w|)`; witnesses when the points are more
/// than `witness_tol` apart (a missing witness counts as infinitely far).
pub fn compare(
    left: (&FilteredComplex, &WitnessMap),
    right: (&FilteredComplex, &WitnessMap),
    weight_tol: f64,
    witness_tol: f64,
) -> ComplexDiff {
    let mut diff = ComplexDiff::default();
    for (s, wl) in left.0.simplices() {
        let Some(wr) = right.0.weight(s.vertices()) else {
            diff.only_left.push(s.clone());
            continue;
        };
        let dw = (wl - wr).abs();
        diff.max_weight_delta = diff.max_weight_delta.max(dw);
        if dw > weight_tol * (1.0 + wl.abs().max(wr.abs())) {
            diff.weight_mismatches.push((s.clone(), wl, wr));
        }
        let dy = match (left.1.get(s), right.1.get(s)) {
            (Some(a), Some(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            _ => f64::INFINITY,
        };
        diff.max_witness_delta = diff.max_witness_delta.max(dy);
        if dy > witness_tol {
            diff.witness_mismatches.push((s.clone(), dy));
        }
    }
    for (s, _) in right.0.simplices() {
        if !left.0.contains(s.vertices()) {
            diff.only_right.push(s.clone());
        }
    }
    diff
}
