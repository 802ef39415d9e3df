//! Dual active-set solver for the simplex-membership QP.
//!
//! The primal problem is the projection of a base point onto a polyhedron:
//! minimise `0.5 * |y - x|^2` subject to `A_i y = V_i` for equality indices
//! and `A_i y <= V_i` otherwise. Its dual is
//!
//! ```text
//!     maximise  -0.5 * l' B l + U' l      B = A A',  U = A x - V
//!     subject to l_i >= 0 for every inequality index i
//! ```
//!
//! `l = 0` is always dual feasible, so no phase-1 is needed, and by weak
//! duality every feasible dual value bounds the primal optimum from below.
//! The solver therefore stops as soon as the running objective exceeds a
//! caller-supplied bound: for alpha complex construction that rejects a
//! candidate simplex without solving its QP to optimality. An unbounded dual
//! ray certifies primal infeasibility and is reported the same way.
//!
//! The primal solution is recovered from the multipliers as `y = x - A' l`.

use thiserror::Error;

use crate::tol::Tolerances;

#[derive(Debug, Error, PartialEq)]
pub enum QpError {
    #[error("gram matrix has {len} entries, expected {n}x{n}")]
    BadShape { len: usize, n: usize },
    #[error("gram matrix not symmetric at ({i},{j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("gram matrix has negative diagonal at {i}: {value}")]
    NegativeDiagonal { i: usize, value: f64 },
    #[error("constraint index {index} out of range for {n} constraints")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("equality indices must be strictly increasing")]
    UnsortedEqualities,
    #[error("problem data contains a non-finite value")]
    NonFinite,
    #[error("active-set iteration limit {limit} exceeded, likely cycling")]
    Cycling { limit: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("constraint {index} is degenerate: diagonal {value} below threshold")]
    DegenerateConstraint { index: usize, value: f64 },
}

/// A validated dual QP instance. `gram` is `n x n` row-major.
#[derive(Clone, Debug)]
pub struct DualProblem<'a> {
    gram: &'a [f64],
    linear: &'a [f64],
    equalities: &'a [usize],
    bound: f64,
    n: usize,
}

impl<'a> DualProblem<'a> {
    /// Validate and wrap problem data. `bound` may be `+inf` to disable the
    /// early exit and solve to optimality.
    pub fn new(
        gram: &'a [f64],
        linear: &'a [f64],
        equalities: &'a [usize],
        bound: f64,
    ) -> Result<Self, QpError> {
        let n = linear.len();
        if gram.len() != n * n {
            return Err(QpError::BadShape {
                len: gram.len(),
                n,
            });
        }
        if gram.iter().any(|v| !v.is_finite())
            || linear.iter().any(|v| !v.is_finite())
            || bound.is_nan()
        {
            return Err(QpError::NonFinite);
        }
        for i in 0..n {
            let d = gram[i * n + i];
            if d < 0.0 {
                return Err(QpError::NegativeDiagonal { i, value: d });
            }
            for j in i + 1..n {
                let (a, b) = (gram[i * n + j], gram[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(QpError::NotSymmetric { i, j, a, b });
                }
            }
        }
        for (pos, &e) in equalities.iter().enumerate() {
            if e >= n {
                return Err(QpError::IndexOutOfRange { index: e, n });
            }
            if pos > 0 && equalities[pos - 1] >= e {
                return Err(QpError::UnsortedEqualities);
            }
        }
        Ok(DualProblem {
            gram,
            linear,
            equalities,
            bound,
            n,
        })
    }

    /// Wrap data known valid by construction (builder-internal fast path).
    pub(crate) fn new_unchecked(
        gram: &'a [f64],
        linear: &'a [f64],
        equalities: &'a [usize],
        bound: f64,
    ) -> Self {
        let n = linear.len();
        debug_assert_eq!(gram.len(), n * n);
        DualProblem {
            gram,
            linear,
            equalities,
            bound,
            n,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn gram(&self) -> &[f64] {
        self.gram
    }

    pub fn linear(&self) -> &[f64] {
        self.linear
    }

    pub fn equalities(&self) -> &[usize] {
        self.equalities
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualStatus {
    /// The dual optimum is at most the bound (within slack); `lambda` and
    /// `cstar` hold the optimum.
    Optimal,
    /// The dual objective passed the bound or the dual is unbounded (primal
    /// infeasible); `cstar` is `+inf` and `lambda` is not meaningful.
    BoundExceeded,
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub status: DualStatus,
    pub lambda: Vec<f64>,
    pub cstar: f64,
    /// Working-set changes performed; exposed for the monotonicity tests.
    pub iterations: usize,
}

enum Flow {
    Stationary,
    Exceeded,
}

/// Incrementally maintained Cholesky factor of the working-set principal
/// submatrix of the Gram matrix, in working-set insertion order.
#[derive(Default)]
struct CholFactor {
    rows: Vec<Vec<f64>>,
}

impl CholFactor {
    fn clear(&mut self) {
        self.rows.clear();
    }

    #[cfg(test)]
    fn size(&self) -> usize {
        self.rows.len()
    }

    /// Solve `L v = rhs`.
    fn forward(&self, rhs: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (i, row) in self.rows.iter().enumerate() {
            let mut v = rhs[i];
            for (j, o) in out.iter().enumerate() {
                v -= row[j] * o;
            }
            out.push(v / row[i]);
        }
    }

    /// Solve `L' x = rhs`.
    fn backward(&self, rhs: &[f64], out: &mut Vec<f64>) {
        let s = self.rows.len();
        out.clear();
        out.resize(s, 0.0);
        for i in (0..s).rev() {
            let mut v = rhs[i];
            for (j, row) in self.rows.iter().enumerate().skip(i + 1) {
                v -= row[i] * out[j];
            }
            out[i] = v / self.rows[i][i];
        }
    }

    /// Solve `L L' x = rhs`.
    fn solve(&self, rhs: &[f64], tmp: &mut Vec<f64>, out: &mut Vec<f64>) {
        self.forward(rhs, tmp);
        self.backward(tmp, out);
    }

    /// Append a row `[v..., sqrt(pivot)]` after a successful extension test.
    fn push_row(&mut self, mut v: Vec<f64>, pivot_sqrt: f64) {
        v.push(pivot_sqrt);
        self.rows.push(v);
    }

    /// Delete working-set position `r`, restoring triangularity with Givens
    /// rotations on the trailing columns.
    fn remove(&mut self, r: usize) {
        self.rows.remove(r);
        let s = self.rows.len();
        for i in r..s {
            // Row i temporarily carries one entry past its diagonal.
            let a = self.rows[i][i];
            let b = self.rows[i][i + 1];
            let rho = a.hypot(b);
            let (c, sn) = if rho > 0.0 {
                (a / rho, b / rho)
            } else {
                (1.0, 0.0)
            };
            for k in i..s {
                let x = self.rows[k][i];
                let y = self.rows[k][i + 1];
                self.rows[k][i] = c * x + sn * y;
                self.rows[k][i + 1] = c * y - sn * x;
            }
            self.rows[i].truncate(i + 1);
        }
    }
}

/// Reusable state for [`solve_dual`]; keep one per worker thread when
/// solving many instances.
#[derive(Default)]
pub struct DualWorkspace {
    factor: CholFactor,
    working: Vec<usize>,
    in_working: Vec<bool>,
    is_equality: Vec<bool>,
    lambda: Vec<f64>,
    trace: Vec<f64>,
    rhs: Vec<f64>,
    sol: Vec<f64>,
    tmp: Vec<f64>,
}

fn objective(gram: &[f64], linear: &[f64], lambda: &[f64]) -> f64 {
    let n = linear.len();
    let mut val = 0.0;
    for j in 0..n {
        let lj = lambda[j];
        if lj == 0.0 {
            continue;
        }
        let mut q = 0.0;
        for k in 0..n {
            let lk = lambda[k];
            if lk != 0.0 {
                q += gram[j * n + k] * lk;
            }
        }
        val += lj * (linear[j] - 0.5 * q);
    }
    val
}

impl DualWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Objective values recorded after each working-set change of the most
    /// recent solve, starting from the zero iterate.
    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    fn reset(&mut self, n: usize, equalities: &[usize]) {
        self.factor.clear();
        self.working.clear();
        self.trace.clear();
        self.lambda.clear();
        self.lambda.resize(n, 0.0);
        self.in_working.clear();
        self.in_working.resize(n, false);
        self.is_equality.clear();
        self.is_equality.resize(n, false);
        for &j in equalities {
            self.is_equality[j] = true;
        }
    }

    fn exceeded(&self, iterations: usize) -> DualSolution {
        DualSolution {
            status: DualStatus::BoundExceeded,
            lambda: self.lambda.clone(),
            cstar: f64::INFINITY,
            iterations,
        }
    }

    pub fn solve(&mut self, p: &DualProblem, tol: &Tolerances) -> Result<DualSolution, QpError> {
        let (gram, linear, n) = (p.gram, p.linear, p.n);
        self.reset(n, p.equalities);
        let bound_slack = tol.bound_slack(p.bound);
        let cutoff = p.bound + bound_slack;
        let max_diag = (0..n).map(|i| gram[i * n + i]).fold(0.0, f64::max);
        let pivot_tol = tol.pivot_threshold(max_diag);
        let scale = linear.iter().fold(0.0, |a: f64, &v| a.max(v.abs()));
        let enter_tol = tol.feasibility_slack(scale);
        let iter_limit = 100 * (n + 1);
        let mut iterations = 0usize;

        self.trace.push(0.0);
        if 0.0 > cutoff {
            return Ok(self.exceeded(iterations));
        }

        'outer: loop {
            // Invariant: lambda is dual feasible and optimal for the problem
            // restricted to the working set. Scan for a violated constraint:
            // the gradient U - B l is the primal residual A y - V at the
            // iterate y = x - A' l.
            let mut entering: Option<(f64, usize, f64)> = None;
            for i in 0..n {
                if self.in_working[i] {
                    continue;
                }
                let mut g = linear[i];
                for &j in &self.working {
                    g -= gram[i * n + j] * self.lambda[j];
                }
                let score = if self.is_equality[i] { g.abs() } else { g };
                if score > enter_tol && entering.map_or(true, |(s, _, _)| score > s) {
                    entering = Some((score, i, g));
                }
            }
            let Some((_, k, mut grad_k)) = entering else {
                let cstar = objective(gram, linear, &self.lambda);
                return Ok(DualSolution {
                    status: DualStatus::Optimal,
                    lambda: self.lambda.clone(),
                    cstar,
                    iterations,
                });
            };

            // Bring k into the working set, travelling along null rays and
            // evicting blockers whenever its Gram column is dependent.
            loop {
                iterations += 1;
                if iterations > iter_limit {
                    return Err(QpError::Cycling { limit: iter_limit });
                }
                self.rhs.clear();
                self.rhs
                    .extend(self.working.iter().map(|&j| gram[j * n + k]));
                self.factor.forward(&self.rhs, &mut self.tmp);
                let vtv: f64 = self.tmp.iter().map(|v| v * v).sum();
                let pivot = gram[k * n + k] - vtv;
                if pivot > pivot_tol {
                    let v = std::mem::take(&mut self.tmp);
                    self.factor.push_row(v, pivot.sqrt());
                    self.working.push(k);
                    self.in_working[k] = true;
                    match self.drive(gram, linear, cutoff, &mut iterations, iter_limit)? {
                        Flow::Exceeded => return Ok(self.exceeded(iterations)),
                        Flow::Stationary => continue 'outer,
                    }
                }

                // Dependent direction: B is singular along it, so the
                // objective is linear with slope |grad_k|. Walk until a
                // working-set member hits its sign bound; if nothing blocks,
                // the dual is unbounded and the primal infeasible.
                let sigma = if self.is_equality[k] && grad_k < 0.0 {
                    -1.0
                } else {
                    1.0
                };
                self.factor.solve(&self.rhs, &mut self.tmp, &mut self.sol);
                let mut step = f64::INFINITY;
                let mut blocker: Option<(usize, usize)> = None;
                for (pos, &j) in self.working.iter().enumerate() {
                    if self.is_equality[j] {
                        continue;
                    }
                    let dir = -sigma * self.sol[pos];
                    if dir < 0.0 {
                        let t = if self.lambda[j] <= 0.0 {
                            0.0
                        } else {
                            self.lambda[j] / -dir
                        };
                        let tie = t == step && blocker.map_or(false, |(_, bj)| j < bj);
                        if t < step || tie {
                            step = t;
                            blocker = Some((pos, j));
                        }
                    }
                }
                let Some((bpos, bj)) = blocker else {
                    return Ok(self.exceeded(iterations));
                };
                self.lambda[k] += step * sigma;
                for (pos, &j) in self.working.iter().enumerate() {
                    self.lambda[j] -= step * sigma * self.sol[pos];
                }
                self.lambda[bj] = 0.0;
                self.working.remove(bpos);
                self.in_working[bj] = false;
                self.factor.remove(bpos);
                let obj = objective(gram, linear, &self.lambda);
                self.trace.push(obj);
                if obj > cutoff {
                    return Ok(self.exceeded(iterations));
                }
                grad_k = linear[k];
                for (j, &lj) in self.lambda.iter().enumerate() {
                    if lj != 0.0 {
                        grad_k -= gram[k * n + j] * lj;
                    }
                }
            }
        }
    }

    /// Step to the optimum of the problem restricted to the working set,
    /// evicting bound-hitting members along the way.
    fn drive(
        &mut self,
        gram: &[f64],
        linear: &[f64],
        cutoff: f64,
        iterations: &mut usize,
        iter_limit: usize,
    ) -> Result<Flow, QpError> {
        loop {
            self.rhs.clear();
            self.rhs.extend(self.working.iter().map(|&j| linear[j]));
            self.factor.solve(&self.rhs, &mut self.tmp, &mut self.sol);

            let mut alpha = 1.0f64;
            let mut blocker: Option<(usize, usize)> = None;
            for (pos, &j) in self.working.iter().enumerate() {
                if self.is_equality[j] {
                    continue;
                }
                let delta = self.sol[pos] - self.lambda[j];
                if delta < 0.0 {
                    let ratio = if self.lambda[j] <= 0.0 {
                        0.0
                    } else {
                        self.lambda[j] / -delta
                    };
                    let tie = ratio == alpha && blocker.map_or(false, |(_, bj)| j < bj);
                    if ratio < alpha || tie {
                        alpha = ratio;
                        blocker = Some((pos, j));
                    }
                }
            }

            if blocker.is_some() {
                for (pos, &j) in self.working.iter().enumerate() {
                    self.lambda[j] += alpha * (self.sol[pos] - self.lambda[j]);
                }
            } else {
                for (pos, &j) in self.working.iter().enumerate() {
                    self.lambda[j] = self.sol[pos];
                }
            }
            if let Some((_, bj)) = blocker {
                self.lambda[bj] = 0.0;
            }

            let obj = objective(gram, linear, &self.lambda);
            self.trace.push(obj);
            if obj > cutoff {
                return Ok(Flow::Exceeded);
            }
            match blocker {
                None => return Ok(Flow::Stationary),
                Some((bpos, bj)) => {
                    self.working.remove(bpos);
                    self.in_working[bj] = false;
                    self.factor.remove(bpos);
                    *iterations += 1;
                    if *iterations > iter_limit {
                        return Err(QpError::Cycling { limit: iter_limit });
                    }
                }
            }
        }
    }
}

/// Maximise the dual objective subject to the sign constraints, stopping
/// early once it provably exceeds the problem bound.
pub fn solve_dual(p: &DualProblem, tol: &Tolerances) -> Result<DualSolution, QpError> {
    DualWorkspace::new().solve(p, tol)
}

/// Recover the primal point `y = x - A' lambda` from dual multipliers.
/// `a` is the `n x m` constraint matrix, row-major.
pub fn primal_from_dual(x: &[f64], a: &[f64], lambda: &[f64]) -> Result<Vec<f64>, QpError> {
    let m = x.len();
    let n = lambda.len();
    if a.len() != n * m {
        return Err(QpError::DimensionMismatch(format!(
            "constraint matrix has {} entries, expected {n}x{m}",
            a.len()
        )));
    }
    let mut y = x.to_vec();
    for (i, &li) in lambda.iter().enumerate() {
        if li == 0.0 {
            continue;
        }
        for (t, yt) in y.iter_mut().enumerate() {
            *yt -= li * a[i * m + t];
        }
    }
    Ok(y)
}

/// Cheap lower bound on the dual optimum from the single constraint `i`:
/// the best objective along the `lambda_i` axis alone. For an inequality
/// with a non-positive gradient at zero the axis does not help and the bound
/// is 0; otherwise it is `U_i^2 / (2 B_ii)`.
pub fn single_constraint_bound(
    p: &DualProblem,
    i: usize,
    tol: &Tolerances,
) -> Result<f64, QpError> {
    let n = p.n;
    if i >= n {
        return Err(QpError::IndexOutOfRange { index: i, n });
    }
    let diag = p.gram[i * n + i];
    let max_diag = (0..n).map(|j| p.gram[j * n + j]).fold(0.0, f64::max);
    if diag <= tol.pivot_threshold(max_diag) || diag == 0.0 {
        return Err(QpError::DegenerateConstraint {
            index: i,
            value: diag,
        });
    }
    let u = p.linear[i];
    if u <= 0.0 && !p.equalities.contains(&i) {
        return Ok(0.0);
    }
    Ok(u * u / (2.0 * diag))
}
