//! Linear and mixed-integer programming.
//!
//! A [`Problem`] is a minimisation over bounded columns with sparse `<=`,
//! `>=` and `=` rows. [`Simplex`] solves the continuous relaxation and reports
//! one dual value per row; [`BranchAndBound`] adds integrality on the columns
//! flagged in [`Problem::integer`]. Both implement [`MipSolver`], which is the
//! seam for plugging in an external solver.

mod branch_bound;
mod lu;
mod simplex;

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use branch_bound::{BranchAndBound, MilpOptions};
pub use simplex::{LpOptions, Simplex};

/// Column handle returned by [`Problem::add_var`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Row handle returned by [`Problem::add_row`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// `minimize objective·x + offset` subject to rows and column bounds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Problem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub rows: Vec<Row>,
    pub objective_offset: f64,
}

impl Problem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> VarId {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(false);
        VarId(self.objective.len() - 1)
    }

    pub fn add_binary(&mut self, cost: f64) -> VarId {
        let v = self.add_var(0.0, 1.0, cost);
        self.integer[v.0] = true;
        v
    }

    /// Adds a row; duplicate column entries are summed and zeros dropped.
    pub fn add_row(&mut self, coeffs: &[(VarId, f64)], kind: RowKind, rhs: f64) -> RowId {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for &(v, a) in coeffs {
            match merged.iter_mut().find(|(j, _)| *j == v.0) {
                Some(entry) => entry.1 += a,
                None => merged.push((v.0, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        merged.sort_by_key(|&(j, _)| j);
        self.rows.push(Row { coeffs: merged, kind, rhs });
        RowId(self.rows.len() - 1)
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&i| i)
    }

    /// Objective value of a point, including the constant offset.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match row.kind {
                RowKind::Le => lhs - row.rhs,
                RowKind::Ge => row.rhs - lhs,
                RowKind::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Sensitivity of the optimal objective to each row's right-hand side.
    /// Only reported for continuous problems solved to optimality.
    pub duals: Option<Vec<f64>>,
}

impl Solution {
    pub fn failed(status: Status) -> Self {
        Self { status, x: Vec::new(), objective: f64::NAN, duals: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Anything that can solve a [`Problem`]. Continuous problems must come back
/// with duals when optimal.
pub trait MipSolver {
    fn solve(&self, problem: &Problem) -> Solution;
}
