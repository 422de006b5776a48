use alloc::vec;
use alloc::vec::Vec;

use super::lu::Factor;
use super::{MipSolver, Problem, RowKind, Solution, Status};

/// Tolerances and limits for [`Simplex`].
#[derive(Clone, Debug, PartialEq)]
pub struct LpOptions {
    /// Allowed bound or row violation of a reported optimum.
    pub feasibility_tol: f64,
    /// Reduced-cost threshold below which a column is considered priced out.
    pub optimality_tol: f64,
    /// Zero means "scale with problem size".
    pub max_iterations: usize,
    /// Basis updates between refactorizations.
    pub refactor_interval: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { feasibility_tol: 1e-7, optimality_tol: 1e-7, max_iterations: 0, refactor_interval: 100 }
    }
}

/// Bounded-variable primal revised simplex.
///
/// Every row gets a logical column carrying the row activity, so the slack
/// basis is always available as a start. Phase one minimises the sum of
/// bound violations of basic columns; phase two prices with the true costs.
/// The basis is held as a sparse LU factorization with product-form updates.
///
/// Integrality flags are ignored, so solving a mixed-integer problem with
/// this type gives its LP relaxation.
#[derive(Clone, Debug, Default)]
pub struct Simplex {
    pub options: LpOptions,
}

impl Simplex {
    pub fn new(options: LpOptions) -> Self {
        Self { options }
    }

    pub fn solve_lp(&self, problem: &Problem) -> Solution {
        self.solve_with_bounds(problem, &problem.lower, &problem.upper)
    }

    /// Solves with column bounds overridden, leaving `problem` untouched.
    pub fn solve_with_bounds(&self, problem: &Problem, lower: &[f64], upper: &[f64]) -> Solution {
        let mut engine = Engine::new(problem, &self.options);
        engine.set_bounds(lower, upper);
        engine.solve(problem)
    }
}

impl MipSolver for Simplex {
    fn solve(&self, problem: &Problem) -> Solution {
        self.solve_lp(problem)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column resting at zero.
    Free,
}

/// A basis that can be handed back to [`Engine::set_basis`].
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Basis {
    head: Vec<usize>,
    state: Vec<State>,
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;
const MAX_RESTARTS: usize = 4;

/// Reusable simplex state over `n` structural and `m` logical columns. The
/// logical column of row `i` is `-e_i` with the row's bounds, so the rows
/// read `A x - r = 0`.
pub(crate) struct Engine<'o> {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    head: Vec<usize>,
    factor: Option<Factor>,
    opts: &'o LpOptions,
    iterations: usize,
    max_iterations: usize,
    // Scratch buffers.
    work: Vec<f64>,
    alpha: Vec<f64>,
    y: Vec<f64>,
}

impl<'o> Engine<'o> {
    pub fn new(problem: &Problem, opts: &'o LpOptions) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in problem.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        let mut cost = problem.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lo = problem.lower.clone();
        let mut hi = problem.upper.clone();
        for row in &problem.rows {
            let (l, h) = match row.kind {
                RowKind::Le => (f64::NEG_INFINITY, row.rhs),
                RowKind::Ge => (row.rhs, f64::INFINITY),
                RowKind::Eq => (row.rhs, row.rhs),
            };
            lo.push(l);
            hi.push(h);
        }
        let mut e = Engine {
            m,
            n,
            cols,
            cost,
            lo,
            hi,
            x: vec![0.0; n + m],
            state: vec![State::Lower; n + m],
            head: (n..n + m).collect(),
            factor: None,
            opts,
            iterations: 0,
            max_iterations: if opts.max_iterations == 0 { 20_000 + 20 * (n + m) } else { opts.max_iterations },
            work: vec![0.0; m],
            alpha: vec![0.0; m],
            y: vec![0.0; m],
        };
        for j in n..n + m {
            e.state[j] = State::Basic;
        }
        for j in 0..n {
            e.place_nonbasic(j);
        }
        e
    }

    /// Puts a nonbasic column at the bound matching its state, or the most
    /// natural bound if that one is infinite.
    fn place_nonbasic(&mut self, j: usize) {
        let (l, h) = (self.lo[j], self.hi[j]);
        let s = match self.state[j] {
            State::Upper if h.is_finite() => State::Upper,
            _ if l.is_finite() => State::Lower,
            _ if h.is_finite() => State::Upper,
            _ => State::Free,
        };
        self.state[j] = s;
        self.x[j] = match s {
            State::Lower => l,
            State::Upper => h,
            _ => 0.0,
        };
    }

    /// Replaces structural column bounds; the basis is kept.
    pub fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        for j in 0..self.n {
            if self.lo[j] != lower[j] || self.hi[j] != upper[j] {
                self.lo[j] = lower[j];
                self.hi[j] = upper[j];
                if self.state[j] != State::Basic {
                    self.place_nonbasic(j);
                }
            }
        }
    }

    pub fn basis(&self) -> Basis {
        Basis { head: self.head.clone(), state: self.state.clone() }
    }

    pub fn set_basis(&mut self, basis: &Basis) {
        self.head.clone_from(&basis.head);
        self.state.clone_from(&basis.state);
        for j in 0..self.n + self.m {
            if self.state[j] != State::Basic {
                self.place_nonbasic(j);
            }
        }
        self.factor = None;
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    fn dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| y[i] * a).sum()
        } else {
            -y[j - self.n]
        }
    }

    /// Refactorizes, repairing a singular basis with logical columns, and
    /// recomputes the basic values.
    fn refactor(&mut self) {
        loop {
            match Factor::new(self.m, |p| self.column(self.head[p])) {
                Ok(f) => {
                    self.factor = Some(f);
                    break;
                }
                Err(s) => {
                    for (&p, &row) in s.positions.iter().zip(&s.rows) {
                        let out = self.head[p];
                        self.state[out] = State::Lower;
                        self.place_nonbasic(out);
                        let logical = self.n + row;
                        self.head[p] = logical;
                        self.state[logical] = State::Basic;
                    }
                }
            }
        }
        self.recompute_basic_values();
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        self.work.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    self.work[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let j = self.n + i;
            if self.state[j] != State::Basic {
                self.work[i] += self.x[j];
            }
        }
        let factor = self.factor.as_ref().expect("factorized");
        factor.ftran(&mut self.work, &mut self.alpha);
        for p in 0..m {
            self.x[self.head[p]] = self.alpha[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = self.opts.feasibility_tol;
        let v = self.x[j];
        if v < self.lo[j] - tol {
            self.lo[j] - v
        } else if v > self.hi[j] + tol {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    /// Runs both phases from the current basis.
    pub fn solve(&mut self, problem: &Problem) -> Solution {
        for j in 0..self.n {
            if self.lo[j] > self.hi[j] + self.opts.feasibility_tol {
                return Solution::failed(Status::Infeasible);
            }
        }
        let mut result = Err(Status::IterationLimit);
        for _ in 0..MAX_RESTARTS {
            self.refactor();
            result = self.iterate();
            if result.is_err() {
                break;
            }
            // Accept only if the basis still checks out after a clean refactor.
            self.refactor();
            if (0..self.m).all(|p| self.infeasibility(self.head[p]) == 0.0) {
                break;
            }
            result = Err(Status::IterationLimit);
        }
        log::debug!("simplex: {} iterations, m = {}, n = {}", self.iterations, self.m, self.n);
        match result {
            Ok(()) => {
                let x = self.x[..self.n].to_vec();
                let objective = problem.evaluate(&x);
                let duals = self.duals();
                Solution { status: Status::Optimal, x, objective, duals: Some(duals) }
            }
            Err(status) => Solution::failed(status),
        }
    }

    fn duals(&mut self) -> Vec<f64> {
        for p in 0..self.m {
            self.work[p] = self.cost[self.head[p]];
        }
        let factor = self.factor.as_ref().expect("factorized");
        let mut y = vec![0.0; self.m];
        factor.btran(&mut self.work, &mut y);
        y
    }

    fn iterate(&mut self) -> Result<(), Status> {
        let m = self.m;
        let total = self.n + m;
        let opt_tol = self.opts.optimality_tol;
        let feas_tol = self.opts.feasibility_tol;
        let mut degenerate_run = 0usize;

        loop {
            if self.iterations >= self.max_iterations {
                return Err(Status::IterationLimit);
            }
            self.iterations += 1;
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;

            // Phase-one costs on violated basics, or true costs.
            let mut phase1 = false;
            for p in 0..m {
                let j = self.head[p];
                let v = self.x[j];
                self.work[p] = if v < self.lo[j] - feas_tol {
                    phase1 = true;
                    -1.0
                } else if v > self.hi[j] + feas_tol {
                    phase1 = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase1 {
                for p in 0..m {
                    self.work[p] = self.cost[self.head[p]];
                }
            }
            {
                let factor = self.factor.as_ref().expect("factorized");
                factor.btran(&mut self.work, &mut self.y);
            }

            // Pricing.
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..total {
                let st = self.state[j];
                if st == State::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let c = if phase1 { 0.0 } else { self.cost[j] };
                let d = c - self.dot(&self.y, j);
                let dir = match st {
                    State::Lower if d < -opt_tol => 1.0,
                    State::Upper if d > opt_tol => -1.0,
                    State::Free if d.abs() > opt_tol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, d, dir));
                    break;
                }
                if entering.is_none_or(|(_, best, _)| d.abs() > best.abs()) {
                    entering = Some((j, d, dir));
                }
            }
            let Some((q, _, dir)) = entering else {
                return if phase1 { Err(Status::Infeasible) } else { Ok(()) };
            };

            for v in self.work.iter_mut() {
                *v = 0.0;
            }
            if q < self.n {
                for &(i, a) in &self.cols[q] {
                    self.work[i] = a;
                }
            } else {
                self.work[q - self.n] = -1.0;
            }
            {
                let factor = self.factor.as_ref().expect("factorized");
                factor.ftran(&mut self.work, &mut self.alpha);
            }

            // Ratio test, Harris two-pass. `rate` is the change of a basic
            // value per unit step of the entering column.
            let limit = |e: &Self, p: usize, rate: f64, slack: f64| -> Option<(f64, bool)> {
                let j = e.head[p];
                let v = e.x[j];
                let (l, h) = (e.lo[j], e.hi[j]);
                if phase1 && v < l - feas_tol {
                    // Below its lower bound: may rise back to it.
                    return (rate > 0.0).then(|| ((l - v + slack) / rate, false));
                }
                if phase1 && v > h + feas_tol {
                    return (rate < 0.0).then(|| ((v - h + slack) / -rate, true));
                }
                if rate < 0.0 {
                    l.is_finite().then(|| (((v - l).max(0.0) + slack) / -rate, false))
                } else {
                    h.is_finite().then(|| (((h - v).max(0.0) + slack) / rate, true))
                }
            };
            let mut relaxed = f64::INFINITY;
            for p in 0..m {
                let a = self.alpha[p];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some((t, _)) = limit(self, p, -dir * a, feas_tol) {
                    relaxed = relaxed.min(t);
                }
            }
            let mut leave: Option<(usize, f64, bool)> = None;
            if relaxed.is_finite() {
                let mut best_mag = 0.0;
                let mut best_idx = usize::MAX;
                for p in 0..m {
                    let a = self.alpha[p];
                    if a.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let Some((t, to_upper)) = limit(self, p, -dir * a, 0.0) else {
                        continue;
                    };
                    if t > relaxed {
                        continue;
                    }
                    let j = self.head[p];
                    let take = if bland { j < best_idx } else { a.abs() > best_mag };
                    if take {
                        best_mag = a.abs();
                        best_idx = j;
                        leave = Some((p, t, to_upper));
                    }
                }
            }
            let range = self.hi[q] - self.lo[q];
            let flip = range.is_finite() && leave.is_none_or(|(_, t, _)| range <= t);
            if leave.is_none() && !flip {
                if phase1 {
                    // Numerical trouble: a clean refactor usually fixes it.
                    self.refactor();
                    degenerate_run = DEGENERATE_RUN_BEFORE_BLAND;
                    continue;
                }
                return Err(Status::Unbounded);
            }
            let step = if flip { range } else { leave.map(|(_, t, _)| t).unwrap_or(0.0) };

            if step > 1e-12 {
                degenerate_run = 0;
                self.x[q] += dir * step;
                for p in 0..m {
                    let a = self.alpha[p];
                    if a != 0.0 {
                        let h = self.head[p];
                        self.x[h] -= dir * step * a;
                    }
                }
            } else {
                degenerate_run += 1;
            }

            if flip {
                if dir > 0.0 {
                    self.state[q] = State::Upper;
                    self.x[q] = self.hi[q];
                } else {
                    self.state[q] = State::Lower;
                    self.x[q] = self.lo[q];
                }
                continue;
            }

            let (r, _, to_upper) = leave.expect("leaving row chosen when no bound flip");
            let leaving = self.head[r];
            if to_upper {
                self.state[leaving] = State::Upper;
                self.x[leaving] = self.hi[leaving];
            } else {
                self.state[leaving] = State::Lower;
                self.x[leaving] = self.lo[leaving];
            }
            self.head[r] = q;
            self.state[q] = State::Basic;
            let factor = self.factor.as_mut().expect("factorized");
            factor.update(r, &self.alpha);
            if factor.num_updates() >= self.opts.refactor_interval {
                self.refactor();
            }
        }
    }
}
