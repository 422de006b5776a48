use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::simplex::Engine;
use super::{LpOptions, MipSolver, Problem, Solution, Status};
use crate::math::{ceil, floor};

#[derive(Clone, Debug, PartialEq)]
pub struct MilpOptions {
    /// Nodes whose bound is within this fraction of the incumbent are pruned.
    pub relative_gap: f64,
    pub absolute_gap: f64,
    pub integrality_tol: f64,
    pub max_nodes: usize,
    /// Run the rounding heuristic every this many nodes (and at the root).
    pub heuristic_interval: usize,
    pub lp: LpOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            relative_gap: 1e-4,
            absolute_gap: 1e-9,
            integrality_tol: 1e-6,
            max_nodes: 100_000,
            heuristic_interval: 8,
            lp: LpOptions::default(),
        }
    }
}

/// Best-first branch-and-bound over the integer columns of a [`Problem`].
///
/// Each node is an LP relaxation with tightened bounds. Branching picks the
/// most fractional column (lowest index on ties); children are solved eagerly
/// so the queue is ordered by true relaxation bounds.
#[derive(Clone, Debug, Default)]
pub struct BranchAndBound {
    pub options: MilpOptions,
}

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

impl BranchAndBound {
    pub fn new(options: MilpOptions) -> Self {
        Self { options }
    }

    fn gap(&self, incumbent: f64) -> f64 {
        self.options.absolute_gap.max(self.options.relative_gap * incumbent.abs())
    }

    fn most_fractional(&self, problem: &Problem, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &is_int) in problem.integer.iter().enumerate() {
            if !is_int {
                continue;
            }
            let frac = x[j] - floor(x[j]);
            let dist = frac.min(1.0 - frac);
            if dist > self.options.integrality_tol && best.is_none_or(|(_, d)| dist > d) {
                best = Some((j, dist));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Fix every integer column by rounding up, then by nearest rounding,
    /// and re-solve the remaining LP.
    fn round_and_fix(
        &self,
        engine: &mut Engine<'_>,
        problem: &Problem,
        lower: &[f64],
        upper: &[f64],
        x: &[f64],
    ) -> Option<Solution> {
        let tol = self.options.integrality_tol;
        let rounders: [fn(f64, f64) -> f64; 2] = [|v, tol| ceil(v - tol), |v, _| floor(v + 0.5)];
        for round in rounders {
            let mut lo = lower.to_vec();
            let mut hi = upper.to_vec();
            for (j, &is_int) in problem.integer.iter().enumerate() {
                if is_int {
                    let v = round(x[j], tol).clamp(lower[j], upper[j]);
                    lo[j] = v;
                    hi[j] = v;
                }
            }
            engine.set_bounds(&lo, &hi);
            let sol = engine.solve(problem);
            if sol.is_optimal() {
                return Some(sol);
            }
        }
        None
    }

    fn snap_integers(problem: &Problem, mut sol: Solution) -> Solution {
        for (j, &is_int) in problem.integer.iter().enumerate() {
            if is_int {
                sol.x[j] = floor(sol.x[j] + 0.5);
            }
        }
        sol.objective = problem.evaluate(&sol.x);
        sol.duals = None;
        sol
    }

    pub fn solve_milp(&self, problem: &Problem) -> Solution {
        let lp_opts = self.options.lp.clone();
        let mut engine = Engine::new(problem, &lp_opts);
        let root = engine.solve(problem);
        if !root.is_optimal() || !problem.has_integers() {
            return root;
        }

        let mut incumbent: Option<Solution> = None;
        let mut heap = BinaryHeap::new();
        let mut next_id = 0usize;
        heap.push(Node {
            bound: root.objective,
            id: next_id,
            lower: problem.lower.clone(),
            upper: problem.upper.clone(),
            x: root.x,
        });
        next_id += 1;

        let mut processed = 0usize;
        let mut hit_limit = false;
        while let Some(node) = heap.pop() {
            if let Some(inc) = &incumbent {
                if node.bound >= inc.objective - self.gap(inc.objective) {
                    break;
                }
            }
            if processed >= self.options.max_nodes {
                hit_limit = true;
                break;
            }
            processed += 1;

            let Some(j) = self.most_fractional(problem, &node.x) else {
                let sol = Solution { status: Status::Optimal, x: node.x, objective: node.bound, duals: None };
                if incumbent.as_ref().is_none_or(|inc| sol.objective < inc.objective) {
                    incumbent = Some(sol);
                }
                continue;
            };

            if processed == 1 || processed % self.options.heuristic_interval.max(1) == 0 {
                if let Some(sol) = self.round_and_fix(&mut engine, problem, &node.lower, &node.upper, &node.x) {
                    if incumbent.as_ref().is_none_or(|inc| sol.objective < inc.objective) {
                        incumbent = Some(sol);
                    }
                }
            }

            let v = node.x[j];
            let mut down_upper = node.upper.clone();
            down_upper[j] = floor(v);
            let mut up_lower = node.lower.clone();
            up_lower[j] = ceil(v);
            let children = [(node.lower.clone(), down_upper), (up_lower, node.upper)];
            let start = engine.basis();
            for (k, (lo, hi)) in children.into_iter().enumerate() {
                if k > 0 {
                    engine.set_basis(&start);
                }
                engine.set_bounds(&lo, &hi);
                let sol = engine.solve(problem);
                if !sol.is_optimal() {
                    continue;
                }
                if let Some(inc) = &incumbent {
                    if sol.objective >= inc.objective - self.gap(inc.objective) {
                        continue;
                    }
                }
                heap.push(Node { bound: sol.objective, id: next_id, lower: lo, upper: hi, x: sol.x });
                next_id += 1;
            }
        }
        log::debug!("branch-and-bound: {processed} nodes");

        match incumbent {
            Some(sol) => {
                let mut out = Self::snap_integers(problem, sol);
                if hit_limit {
                    out.status = Status::IterationLimit;
                }
                out
            }
            None if hit_limit => Solution::failed(Status::IterationLimit),
            None => Solution::failed(Status::Infeasible),
        }
    }
}

impl MipSolver for BranchAndBound {
    fn solve(&self, problem: &Problem) -> Solution {
        self.solve_milp(problem)
    }
}
