//! Day-ahead unit commitment, real-time economic dispatch and the
//! day-by-day market loop.
//!
//! Both stages share one formulation over a lossless DC network in
//! bus-angle form with the first bus as angle reference:
//!
//! * output of each unit is the sum of its convex cost segments, gated by the
//!   commitment binary between `p_min` and `p_max`;
//! * startup indicators satisfy `v[h] >= u[h] - u[h-1]`, shutdown indicators
//!   `w[h] >= u[h-1] - u[h]`, with hour 0 linked to the initial state;
//! * minimum up/down times and ramp limits are optional and switchable;
//! * each bus has one power-balance row whose dual is the nodal price.
//!
//! Unit commitment keeps the binaries free and is solved by
//! branch-and-bound. Economic dispatch fixes them, which leaves a pure LP.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridCase;
use crate::mining::{Flexibility, MiningDeployment, MiningError};
use crate::profile::{DayWindow, LoadProfile, ProfileError, RenewableProfile};
use crate::solver::{BranchAndBound, MilpOptions, MipSolver, Problem, RowId, RowKind, Status, VarId};
use crate::HOURS_PER_DAY;

const H: usize = HOURS_PER_DAY;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error("invalid grid: {0}")]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error("command-following loads are not simulated in the market loop")]
    CommandFollowingNotSimulated,
    #[error("initial commitment has {got} entries for {expected} generators")]
    InitialCommitment { expected: usize, got: usize },
}

/// Switches for the optional parts of the formulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormulationOptions {
    pub ramping: bool,
    pub min_up_down: bool,
    pub network: bool,
}

impl Default for FormulationOptions {
    fn default() -> Self {
        Self { ramping: true, min_up_down: true, network: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DispatchOptions {
    pub formulation: FormulationOptions,
    pub milp: MilpOptions,
    /// Commitment before the first day, in generator order. All units on by
    /// default.
    pub initial_commitment: Option<Vec<bool>>,
}

/// Grid data pre-indexed for problem construction.
#[derive(Clone, Debug)]
pub struct NetworkModel<'a> {
    pub grid: &'a GridCase,
    bus_ids: Vec<u32>,
    gen_bus: Vec<usize>,
    segments: Vec<Vec<(f64, f64)>>,
    /// `(from, to, MW per radian)` per branch.
    branches: Vec<(usize, usize, f64)>,
}

impl<'a> NetworkModel<'a> {
    pub fn new(grid: &'a GridCase) -> Result<Self, DispatchError> {
        grid.validate()?;
        let pos = grid.bus_positions();
        let gen_bus = grid.generators.iter().map(|g| pos[&g.bus_id]).collect();
        let segments = grid
            .generators
            .iter()
            .map(|g| if g.is_renewable() { vec![(g.p_max, 0.0)] } else { g.segments() })
            .collect();
        let branches =
            grid.branches.iter().map(|b| (pos[&b.from_bus], pos[&b.to_bus], grid.base_mva / b.reactance)).collect();
        Ok(Self { grid, bus_ids: grid.bus_ids(), gen_bus, segments, branches })
    }

    pub fn num_buses(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn num_generators(&self) -> usize {
        self.gen_bus.len()
    }

    pub fn bus_ids(&self) -> &[u32] {
        &self.bus_ids
    }

    /// Hourly availability `[hour][gen]`: `p_max` for dispatchable units,
    /// the profile (or `p_max` when absent) for renewables.
    pub fn availability(&self, renewables: Option<&RenewableProfile>, day: u32) -> Vec<f64> {
        let ng = self.num_generators();
        let mut out = vec![0.0; H * ng];
        for (g, gen) in self.grid.generators.iter().enumerate() {
            let k = renewables
                .filter(|_| gen.is_renewable())
                .and_then(|r| r.key_position(gen.id).filter(|_| r.window().contains(day)).map(|k| (r, k)));
            for h in 0..H {
                out[h * ng + g] = match k {
                    Some((r, k)) => r.get(day, h, k).min(gen.p_max),
                    None => gen.p_max,
                };
            }
        }
        out
    }

    /// Load `[hour][bus]` for one day; buses absent from the profile get zero.
    pub fn day_load(&self, load: &LoadProfile, day: u32) -> Vec<f64> {
        let nb = self.num_buses();
        let mut out = vec![0.0; H * nb];
        for (b, &id) in self.bus_ids.iter().enumerate() {
            if let Some(k) = load.key_position(id) {
                for h in 0..H {
                    out[h * nb + b] = load.get(day, h, k);
                }
            }
        }
        out
    }
}

/// How commitments enter a day problem.
#[derive(Clone, Copy, Debug)]
pub enum Commitment<'a> {
    /// Binaries are decision variables, linked to the state before hour 1.
    Free { initial: &'a [bool] },
    /// Binaries fixed to `[hour][gen]` values.
    Fixed { schedule: &'a [bool], initial: &'a [bool] },
}

/// A built day problem together with the handles needed to read it back.
#[derive(Clone, Debug)]
pub struct DayProblem {
    pub problem: Problem,
    nb: usize,
    ng: usize,
    /// `[hour][gen]`; `None` for renewables (always on).
    commit: Vec<Option<VarId>>,
    /// `[hour][gen]` segment columns.
    output: Vec<Vec<VarId>>,
    /// `[hour][bus]` power-balance rows.
    balance: Vec<RowId>,
}

fn build_day(
    model: &NetworkModel<'_>,
    load: &[f64],
    avail: &[f64],
    commitment: Commitment<'_>,
    opts: &FormulationOptions,
) -> DayProblem {
    let nb = model.num_buses();
    let ng = model.num_generators();
    let gens = &model.grid.generators;
    let initial = match commitment {
        Commitment::Free { initial } | Commitment::Fixed { initial, .. } => initial,
    };
    let mut p = Problem::new();
    let mut commit = vec![None; H * ng];
    let mut output = vec![Vec::new(); H * ng];
    let mut startup: Vec<Option<VarId>> = vec![None; H * ng];
    let mut shutdown: Vec<Option<VarId>> = vec![None; H * ng];

    for h in 0..H {
        for (g, gen) in gens.iter().enumerate() {
            let i = h * ng + g;
            if gen.is_renewable() {
                output[i] = vec![p.add_var(0.0, avail[i].max(0.0), 0.0)];
                continue;
            }
            let u = match commitment {
                Commitment::Free { .. } => p.add_binary(gen.no_load_cost),
                Commitment::Fixed { schedule, .. } => {
                    let on = if schedule[i] { 1.0 } else { 0.0 };
                    p.add_var(on, on, gen.no_load_cost)
                }
            };
            commit[i] = Some(u);
            output[i] = model.segments[g].iter().map(|&(width, slope)| p.add_var(0.0, width, slope)).collect();
            startup[i] = Some(p.add_var(0.0, 1.0, gen.startup_cost));
            let needs_shutdown =
                (opts.min_up_down && gen.min_down.is_some_and(|d| d > 1)) || (opts.ramping && gen.ramp_limit.is_some());
            if needs_shutdown {
                shutdown[i] = Some(p.add_var(0.0, 1.0, 0.0));
            }
        }
    }

    let sum_output = |i: usize, scale: f64| -> Vec<(VarId, f64)> { output[i].iter().map(|&v| (v, scale)).collect() };

    for (g, gen) in gens.iter().enumerate() {
        if gen.is_renewable() {
            continue;
        }
        let init_on = if initial.get(g).copied().unwrap_or(true) { 1.0 } else { 0.0 };
        for h in 0..H {
            let i = h * ng + g;
            let u = commit[i].expect("dispatchable unit");
            // Output gated by commitment.
            let mut upper = sum_output(i, 1.0);
            upper.push((u, -avail[i].min(gen.p_max)));
            p.add_row(&upper, RowKind::Le, 0.0);
            if gen.p_min > 0.0 {
                let mut lower = sum_output(i, 1.0);
                lower.push((u, -gen.p_min));
                p.add_row(&lower, RowKind::Ge, 0.0);
            }
            // Startup / shutdown indicators.
            let v = startup[i].expect("dispatchable unit");
            if h == 0 {
                p.add_row(&[(v, 1.0), (u, -1.0)], RowKind::Ge, -init_on);
            } else {
                let prev = commit[i - ng].expect("dispatchable unit");
                p.add_row(&[(v, 1.0), (u, -1.0), (prev, 1.0)], RowKind::Ge, 0.0);
            }
            if let Some(w) = shutdown[i] {
                if h == 0 {
                    p.add_row(&[(w, 1.0), (u, 1.0)], RowKind::Ge, init_on);
                } else {
                    let prev = commit[i - ng].expect("dispatchable unit");
                    p.add_row(&[(w, 1.0), (u, 1.0), (prev, -1.0)], RowKind::Ge, 0.0);
                }
            }
            if opts.min_up_down {
                if let Some(up) = gen.min_up.filter(|&t| t > 1) {
                    let first = (h + 1).saturating_sub(up as usize);
                    let mut row: Vec<(VarId, f64)> =
                        (first..=h).map(|t| (startup[t * ng + g].expect("dispatchable unit"), 1.0)).collect();
                    row.push((u, -1.0));
                    p.add_row(&row, RowKind::Le, 0.0);
                }
                if let Some(down) = gen.min_down.filter(|&t| t > 1) {
                    let first = (h + 1).saturating_sub(down as usize);
                    let mut row: Vec<(VarId, f64)> =
                        (first..=h).map(|t| (shutdown[t * ng + g].expect("shutdown column"), 1.0)).collect();
                    row.push((u, 1.0));
                    p.add_row(&row, RowKind::Le, 1.0);
                }
            }
            if opts.ramping && h > 0 {
                if let Some(ramp) = gen.ramp_limit {
                    let w = shutdown[i].expect("shutdown column");
                    let mut up_row = sum_output(i, 1.0);
                    up_row.extend(sum_output(i - ng, -1.0));
                    up_row.push((v, -gen.p_max));
                    p.add_row(&up_row, RowKind::Le, ramp);
                    let mut down_row = sum_output(i - ng, 1.0);
                    down_row.extend(sum_output(i, -1.0));
                    down_row.push((w, -gen.p_max));
                    p.add_row(&down_row, RowKind::Le, ramp);
                }
            }
        }
    }

    let mut balance = Vec::with_capacity(H * nb);
    for h in 0..H {
        let theta: Vec<VarId> =
            if opts.network {
                (0..nb)
                    .map(|b| {
                        if b == 0 {
                            p.add_var(0.0, 0.0, 0.0)
                        } else {
                            p.add_var(f64::NEG_INFINITY, f64::INFINITY, 0.0)
                        }
                    })
                    .collect()
            } else {
                Vec::new()
            };
        let mut rows: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); nb];
        for g in 0..ng {
            rows[model.gen_bus[g]].extend(sum_output(h * ng + g, 1.0));
        }
        if opts.network {
            for &(from, to, s) in &model.branches {
                // Flow from -> to is s * (theta_from - theta_to).
                rows[from].push((theta[from], -s));
                rows[from].push((theta[to], s));
                rows[to].push((theta[from], s));
                rows[to].push((theta[to], -s));
            }
            for (k, &(from, to, s)) in model.branches.iter().enumerate() {
                let limit = model.grid.branches[k].flow_limit;
                let flow = [(theta[from], s), (theta[to], -s)];
                p.add_row(&flow, RowKind::Le, limit);
                p.add_row(&flow, RowKind::Ge, -limit);
            }
            for (b, row) in rows.into_iter().enumerate() {
                balance.push(p.add_row(&row, RowKind::Eq, load[h * nb + b]));
            }
        } else {
            // Copper plate: one system row, shared by every bus.
            let all: Vec<(VarId, f64)> = rows.into_iter().flatten().collect();
            let total: f64 = load[h * nb..(h + 1) * nb].iter().sum();
            let r = p.add_row(&all, RowKind::Eq, total);
            balance.extend(core::iter::repeat_n(r, nb));
        }
    }

    DayProblem { problem: p, nb, ng, commit, output, balance }
}

/// Unit-commitment problem for one day; `load` and `avail` are
/// `[hour][bus]` and `[hour][gen]`.
pub fn build_scuc(
    model: &NetworkModel<'_>,
    load: &[f64],
    avail: &[f64],
    initial: &[bool],
    opts: &FormulationOptions,
) -> DayProblem {
    build_day(model, load, avail, Commitment::Free { initial }, opts)
}

/// Economic-dispatch LP for one day with commitments fixed to `schedule`.
pub fn build_sced(
    model: &NetworkModel<'_>,
    load: &[f64],
    avail: &[f64],
    schedule: &[bool],
    initial: &[bool],
    opts: &FormulationOptions,
) -> DayProblem {
    build_day(model, load, avail, Commitment::Fixed { schedule, initial }, opts)
}

/// Commitments, output and prices read from a solved day problem.
#[derive(Clone, Debug, PartialEq)]
pub struct DaySolution {
    /// `[hour][gen]`
    pub commitment: Vec<bool>,
    /// `[hour][gen]`, MW
    pub generation: Vec<f64>,
    /// `[hour][bus]`, $/MWh
    pub lmp: Vec<f64>,
    pub objective: f64,
}

impl DayProblem {
    fn read(&self, x: &[f64], duals: Option<&[f64]>, objective: f64) -> DaySolution {
        let commitment = self.commit.iter().map(|u| u.is_none_or(|v| x[v.0] > 0.5)).collect();
        let generation = self.output.iter().map(|segs| segs.iter().map(|v| x[v.0]).sum()).collect();
        let lmp = match duals {
            Some(d) => self.balance.iter().map(|r| d[r.0]).collect(),
            None => vec![f64::NAN; H * self.nb],
        };
        DaySolution { commitment, generation, lmp, objective }
    }

    pub fn num_generators(&self) -> usize {
        self.ng
    }

    /// Copy of the problem with every binary fixed to its value in `x`.
    pub fn fixed_at(&self, x: &[f64]) -> Problem {
        let mut p = self.problem.clone();
        for u in self.commit.iter().flatten() {
            let v = if x[u.0] > 0.5 { 1.0 } else { 0.0 };
            p.lower[u.0] = v;
            p.upper[u.0] = v;
            p.integer[u.0] = false;
        }
        p
    }
}

/// Solves a unit-commitment day. Reference prices are the duals of the LP
/// obtained by fixing the binaries at the incumbent.
pub fn solve_scuc(day: &DayProblem, solver: &dyn MipSolver) -> Result<DaySolution, Status> {
    let sol = solver.solve(&day.problem);
    if !sol.is_optimal() {
        return Err(sol.status);
    }
    let fixed = day.fixed_at(&sol.x);
    let lp = solver.solve(&fixed);
    if !lp.is_optimal() {
        return Err(lp.status);
    }
    Ok(day.read(&lp.x, lp.duals.as_deref(), sol.objective))
}

/// Solves an economic-dispatch day.
pub fn solve_sced(day: &DayProblem, solver: &dyn MipSolver) -> Result<DaySolution, Status> {
    let sol = solver.solve(&day.problem);
    if !sol.is_optimal() {
        return Err(sol.status);
    }
    Ok(day.read(&sol.x, sol.duals.as_deref(), sol.objective))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Scuc,
    Sced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleDay {
    pub day: u32,
    pub stage: Stage,
    pub status: Status,
}

impl InfeasibleDay {
    pub fn reason(&self) -> &'static str {
        match (self.stage, self.status) {
            (Stage::Scuc, Status::Infeasible) => "SCUC infeasible",
            (Stage::Sced, Status::Infeasible) => "SCED infeasible",
            (Stage::Scuc, _) => "SCUC not solved",
            (Stage::Sced, _) => "SCED not solved",
        }
    }
}

/// Everything kept for one solved day. Matrices are `[hour][gen]` or
/// `[hour][bus]` in grid order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    pub commitment: Vec<bool>,
    /// Real-time (economic dispatch) output.
    pub generation: Vec<f64>,
    /// Real-time nodal prices.
    pub lmp: Vec<f64>,
    /// Day-ahead reference prices from unit commitment.
    pub reference_lmp: Vec<f64>,
    /// Load cleared in real time, including mining.
    pub total_load: Vec<f64>,
    pub mining: Vec<f64>,
    pub scuc_objective: f64,
    pub sced_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub window: DayWindow,
    pub bus_ids: Vec<u32>,
    pub gen_ids: Vec<u32>,
    pub days: Vec<DayRecord>,
    pub infeasible_days: Vec<InfeasibleDay>,
}

impl DispatchResult {
    pub fn day(&self, day: u32) -> Option<&DayRecord> {
        self.days.iter().find(|d| d.day == day)
    }

    pub fn solved_days(&self) -> impl Iterator<Item = u32> + '_ {
        self.days.iter().map(|d| d.day)
    }

    /// Mean real-time price per bus over all solved hours, in bus order.
    pub fn mean_lmp_by_bus(&self) -> Vec<(u32, f64)> {
        let nb = self.bus_ids.len();
        let mut sums = vec![0.0; nb];
        let mut count = 0usize;
        for d in &self.days {
            for h in 0..H {
                for (s, p) in sums.iter_mut().zip(&d.lmp[h * nb..(h + 1) * nb]) {
                    *s += p;
                }
            }
            count += H;
        }
        self.bus_ids
            .iter()
            .zip(sums)
            .map(|(&id, s)| (id, if count > 0 { s / count as f64 } else { f64::NAN }))
            .collect()
    }
}

/// Inputs to the day-by-day market loop.
#[derive(Clone, Copy, Debug)]
pub struct WindowInputs<'a> {
    pub grid: &'a GridCase,
    pub load: &'a LoadProfile,
    pub renewables: Option<&'a RenewableProfile>,
    pub deployment: Option<&'a MiningDeployment>,
    pub window: DayWindow,
}

/// Runs the market loop with the built-in branch-and-bound solver.
pub fn run_window(inputs: WindowInputs<'_>, opts: &DispatchOptions) -> Result<DispatchResult, DispatchError> {
    let solver = BranchAndBound::new(opts.milp.clone());
    run_window_with(inputs, opts, &solver)
}

/// For each day in order:
///
/// 1. start from the last solved day's hour-24 commitment;
/// 2. clear unit commitment with every mining load at full capacity;
/// 3. for price-responsive loads, switch off sites whose reference price
///    exceeds the threshold;
/// 4. clear economic dispatch with commitments fixed.
///
/// Days where either stage fails are logged and skipped.
pub fn run_window_with(
    inputs: WindowInputs<'_>,
    opts: &DispatchOptions,
    solver: &dyn MipSolver,
) -> Result<DispatchResult, DispatchError> {
    let model = NetworkModel::new(inputs.grid)?;
    let window = inputs.window;
    if !inputs.load.window().contains_window(&window) {
        return Err(ProfileError::DaysOutsideWindow { first: window.first, last: window.last }.into());
    }
    let empty = MiningDeployment::empty();
    let deployment = inputs.deployment.unwrap_or(&empty);
    if deployment.flexibility == Flexibility::CommandFollowing && !deployment.sites.is_empty() {
        return Err(DispatchError::CommandFollowingNotSimulated);
    }
    deployment.validate(inputs.grid)?;
    let ng = model.num_generators();
    let mut initial = match &opts.initial_commitment {
        Some(v) if v.len() != ng => return Err(DispatchError::InitialCommitment { expected: ng, got: v.len() }),
        Some(v) => v.clone(),
        None => vec![true; ng],
    };

    let bus_ids = model.bus_ids().to_vec();
    let mut result = DispatchResult {
        window,
        bus_ids: bus_ids.clone(),
        gen_ids: inputs.grid.generator_ids(),
        days: Vec::new(),
        infeasible_days: Vec::new(),
    };

    for day in window.days() {
        let base_load = model.day_load(inputs.load, day);
        let avail = model.availability(inputs.renewables, day);
        let mut mining = deployment.full_output_day(&bus_ids, day)?;
        let mut total: Vec<f64> = base_load.iter().zip(&mining).map(|(l, m)| l + m).collect();

        let scuc = build_scuc(&model, &total, &avail, &initial, &opts.formulation);
        let da = match solve_scuc(&scuc, solver) {
            Ok(s) => s,
            Err(status) => {
                log::warn!("day {day}: unit commitment failed ({status:?})");
                result.infeasible_days.push(InfeasibleDay { day, stage: Stage::Scuc, status });
                continue;
            }
        };

        if deployment.flexibility == Flexibility::PriceResponsive {
            mining = deployment.day_schedule(&bus_ids, day, Some(&da.lmp))?;
            total = base_load.iter().zip(&mining).map(|(l, m)| l + m).collect();
        }

        let sced = build_sced(&model, &total, &avail, &da.commitment, &initial, &opts.formulation);
        let rt = match solve_sced(&sced, solver) {
            Ok(s) => s,
            Err(status) => {
                log::warn!("day {day}: economic dispatch failed ({status:?})");
                result.infeasible_days.push(InfeasibleDay { day, stage: Stage::Sced, status });
                continue;
            }
        };

        initial = da.commitment[(H - 1) * ng..].to_vec();
        result.days.push(DayRecord {
            day,
            commitment: da.commitment,
            generation: rt.generation,
            lmp: rt.lmp,
            reference_lmp: da.lmp,
            total_load: total,
            mining,
            scuc_objective: da.objective,
            sced_objective: rt.objective,
        });
    }
    Ok(result)
}

/// Branch flows `[hour][branch]` implied by a dispatch, from a DC power flow
/// with the first bus as reference.
pub fn branch_flows(grid: &GridCase, injections: &[f64]) -> Vec<f64> {
    let nb = grid.buses.len();
    let pos = grid.bus_positions();
    let hours = injections.len() / nb.max(1);
    // Reduced susceptance matrix without the reference bus.
    let n = nb - 1;
    let mut bmat = vec![0.0; n * n];
    let mut ends = Vec::with_capacity(grid.branches.len());
    for br in &grid.branches {
        let (f, t) = (pos[&br.from_bus], pos[&br.to_bus]);
        let s = grid.base_mva / br.reactance;
        ends.push((f, t, s));
        for (a, b, sign) in [(f, f, 1.0), (t, t, 1.0), (f, t, -1.0), (t, f, -1.0)] {
            if a > 0 && b > 0 {
                bmat[(a - 1) * n + (b - 1)] += sign * s;
            }
        }
    }
    let mut out = Vec::with_capacity(hours * ends.len());
    for h in 0..hours {
        let rhs: Vec<f64> = injections[h * nb + 1..(h + 1) * nb].to_vec();
        let theta_red = solve_dense(&bmat, rhs, n);
        let theta = |b: usize| if b == 0 { 0.0 } else { theta_red[b - 1] };
        for &(f, t, s) in &ends {
            out.push(s * (theta(f) - theta(t)));
        }
    }
    out
}

fn solve_dense(a: &[f64], mut b: Vec<f64>, n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs())).unwrap_or(col);
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    m[r * n + k] -= f * m[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= m[r * n + k] * x[k];
        }
        x[r] = s / m[r * n + r];
    }
    x
}

/// Net injection `[hour][bus]` (generation minus load) of a solved day.
pub fn net_injections(grid: &GridCase, record: &DayRecord) -> Vec<f64> {
    let nb = grid.buses.len();
    let ng = grid.generators.len();
    let pos: BTreeMap<u32, usize> = grid.bus_positions();
    let mut inj: Vec<f64> = record.total_load.iter().map(|l| -l).collect();
    for h in 0..H {
        for (g, gen) in grid.generators.iter().enumerate() {
            inj[h * nb + pos[&gen.bus_id]] += record.generation[h * ng + g];
        }
    }
    inj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fixtures::{thermal, two_bus};
    use crate::profile::HourlyTable;

    fn flat_load(window: DayWindow, per_bus: &[(u32, f64)]) -> HourlyTable {
        let keys: Vec<u32> = per_bus.iter().map(|p| p.0).collect();
        let mut t = HourlyTable::zeros(window, keys);
        for d in window.days() {
            for h in 0..H {
                for (k, &(_, v)) in per_bus.iter().enumerate() {
                    t.set(d, h, k, v);
                }
            }
        }
        t
    }

    fn solve_two_bus(limit: f64, load2: f64) -> DaySolution {
        let grid = two_bus(limit);
        let model = NetworkModel::new(&grid).unwrap();
        let load = model.day_load(&flat_load(DayWindow::single(1), &[(1, 0.0), (2, load2)]), 1);
        let avail = model.availability(None, 1);
        let day = build_sced(&model, &load, &avail, &[true; 2 * H], &[true, true], &FormulationOptions::default());
        solve_sced(&day, &crate::solver::Simplex::default()).unwrap()
    }

    #[test]
    fn uncongested_prices_are_uniform() {
        let s = solve_two_bus(500.0, 150.0);
        for h in 0..H {
            assert!((s.generation[h * 2] - 150.0).abs() < 1e-6);
            assert!(s.generation[h * 2 + 1].abs() < 1e-6);
            assert!((s.lmp[h * 2] - 20.0).abs() < 1e-6, "{:?}", &s.lmp[..2]);
            assert!((s.lmp[h * 2 + 1] - 20.0).abs() < 1e-6);
        }
    }

    #[test]
    fn congestion_splits_prices() {
        let s = solve_two_bus(100.0, 150.0);
        for h in 0..H {
            assert!((s.generation[h * 2] - 100.0).abs() < 1e-6);
            assert!((s.generation[h * 2 + 1] - 50.0).abs() < 1e-6);
            assert!((s.lmp[h * 2] - 20.0).abs() < 1e-6);
            assert!((s.lmp[h * 2 + 1] - 50.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_load_dispatches_nothing() {
        let s = solve_two_bus(100.0, 0.0);
        assert!(s.generation.iter().all(|g| g.abs() < 1e-9));
    }

    #[test]
    fn empty_system_commits_nothing() {
        let mut grid = two_bus(500.0);
        grid.generators.truncate(1);
        grid.generators[0].no_load_cost = 100.0;
        let model = NetworkModel::new(&grid).unwrap();
        let load = vec![0.0; 2 * H];
        let avail = model.availability(None, 1);
        let day = build_scuc(&model, &load, &avail, &[false], &FormulationOptions::default());
        let s = solve_scuc(&day, &BranchAndBound::default()).unwrap();
        assert!(s.commitment.iter().all(|&c| !c));
        assert!(s.objective.abs() < 1e-9);
    }

    #[test]
    fn over_capacity_day_is_infeasible() {
        let grid = two_bus(500.0);
        let model = NetworkModel::new(&grid).unwrap();
        let load = vec![250.0; 2 * H];
        let avail = model.availability(None, 1);
        let day = build_scuc(&model, &load, &avail, &[true, true], &FormulationOptions::default());
        assert_eq!(solve_scuc(&day, &BranchAndBound::default()), Err(Status::Infeasible));
    }

    #[test]
    fn window_loop_logs_infeasible_days_and_carries_state() {
        let grid = two_bus(500.0);
        let w = DayWindow::new(1, 3).unwrap();
        let mut load = flat_load(w, &[(1, 0.0), (2, 100.0)]);
        for v in load.day_mut(2) {
            *v = 300.0;
        }
        let res = run_window(
            WindowInputs { grid: &grid, load: &load, renewables: None, deployment: None, window: w },
            &DispatchOptions::default(),
        )
        .unwrap();
        assert_eq!(res.solved_days().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(res.infeasible_days.len(), 1);
        assert_eq!(res.infeasible_days[0].day, 2);
        assert_eq!(res.infeasible_days[0].reason(), "SCUC infeasible");
    }

    #[test]
    fn command_following_is_rejected_by_the_loop() {
        let grid = two_bus(500.0);
        let w = DayWindow::single(1);
        let load = flat_load(w, &[(1, 0.0), (2, 100.0)]);
        let dep = MiningDeployment::uniform(&[2], 5.0, Flexibility::CommandFollowing);
        let err = run_window(
            WindowInputs { grid: &grid, load: &load, renewables: None, deployment: Some(&dep), window: w },
            &DispatchOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, DispatchError::CommandFollowingNotSimulated);
    }

    #[test]
    fn renewables_follow_profile_and_are_free() {
        let mut grid = two_bus(500.0);
        let mut wind = thermal(3, 2, 80.0, 0.0);
        wind.fuel_type = crate::grid::FuelType::Wind;
        wind.cost_curve.clear();
        grid.generators.push(wind);
        let w = DayWindow::single(1);
        let load = flat_load(w, &[(1, 0.0), (2, 100.0)]);
        let mut ren = HourlyTable::zeros(w, vec![3]);
        for h in 0..H {
            ren.set(1, h, 0, if h < 12 { 30.0 } else { 80.0 });
        }
        let res = run_window(
            WindowInputs { grid: &grid, load: &load, renewables: Some(&ren), deployment: None, window: w },
            &DispatchOptions::default(),
        )
        .unwrap();
        let d = &res.days[0];
        assert!((d.generation[2] - 30.0).abs() < 1e-6);
        assert!((d.generation[3 * 20 + 2] - 80.0).abs() < 1e-6);
        assert!((d.generation[3 * 20] - 20.0).abs() < 1e-6);
    }

    #[test]
    fn flows_from_injections_match_dispatch() {
        let grid = two_bus(100.0);
        let w = DayWindow::single(1);
        let load = flat_load(w, &[(1, 0.0), (2, 150.0)]);
        let res = run_window(
            WindowInputs { grid: &grid, load: &load, renewables: None, deployment: None, window: w },
            &DispatchOptions::default(),
        )
        .unwrap();
        let flows = branch_flows(&grid, &net_injections(&grid, &res.days[0]));
        assert!(flows.iter().all(|f| (f - 100.0).abs() < 1e-6), "{flows:?}");
    }

    /// Four-bus ring, one unit per bus, loads constant over the day.
    fn ring(limits: &[f64], units: &[(f64, f64)]) -> GridCase {
        let mut grid = two_bus(100.0);
        grid.buses = (1..=4).map(|id| crate::grid::fixtures::bus(id, "A")).collect();
        grid.counties = [(alloc::string::String::from("A"), vec![1, 2, 3, 4])].into_iter().collect();
        grid.branches = (0..4)
            .map(|i| crate::grid::Branch {
                from_bus: i + 1,
                to_bus: (i + 1) % 4 + 1,
                reactance: 0.1,
                flow_limit: limits[i as usize],
            })
            .collect();
        grid.generators =
            units.iter().enumerate().map(|(i, &(p, c))| thermal(i as u32 + 1, i as u32 + 1, p, c)).collect();
        grid
    }

    fn sced_day(grid: &GridCase, loads: &[f64]) -> Option<DaySolution> {
        let model = NetworkModel::new(grid).unwrap();
        let load: Vec<f64> = (0..H).flat_map(|_| loads.iter().copied()).collect();
        let avail = model.availability(None, 1);
        let ng = grid.generators.len();
        let day =
            build_sced(&model, &load, &avail, &vec![true; H * ng], &vec![true; ng], &FormulationOptions::default());
        solve_sced(&day, &crate::solver::Simplex::default()).ok()
    }

    proptest::proptest! {
        #[test]
        fn dispatch_respects_balance_limits_and_price_bounds(
            limits in proptest::collection::vec(20.0f64..200.0, 4),
            units in proptest::collection::vec((70.0f64..150.0, 5.0f64..80.0), 4),
            loads in proptest::collection::vec(0.0f64..40.0, 4),
            site in 0usize..4,
            extra in 1.0f64..30.0,
        ) {
            // Every bus can serve its own load, so both days are feasible.
            let grid = ring(&limits, &units);
            let base = sced_day(&grid, &loads).expect("feasible");
            let mut more = loads.clone();
            more[site] += extra;
            let with = sced_day(&grid, &more).expect("feasible");
            for (sol, l) in [(&base, &loads), (&with, &more)] {
                let record = DayRecord {
                    day: 1,
                    commitment: sol.commitment.clone(),
                    generation: sol.generation.clone(),
                    lmp: sol.lmp.clone(),
                    reference_lmp: sol.lmp.clone(),
                    total_load: (0..H).flat_map(|_| l.iter().copied()).collect(),
                    mining: vec![0.0; H * 4],
                    scuc_objective: sol.objective,
                    sced_objective: sol.objective,
                };
                for h in 0..H {
                    let gen: f64 = sol.generation[h * 4..(h + 1) * 4].iter().sum();
                    proptest::prop_assert!((gen - l.iter().sum::<f64>()).abs() <= 1e-6);
                    for (g, &(p_max, _)) in units.iter().enumerate() {
                        let p = sol.generation[h * 4 + g];
                        proptest::prop_assert!(p >= -1e-6 && p <= p_max + 1e-6);
                    }
                }
                for (k, f) in branch_flows(&grid, &net_injections(&grid, &record)).iter().enumerate() {
                    proptest::prop_assert!(f.abs() <= limits[k % 4] + 1e-6, "flow {} over {}", f, limits[k % 4]);
                }
            }
            // The day cost is convex in the load at `site`, so its increase is
            // bracketed by the site price before and after.
            let delta = with.objective - base.objective;
            let lower: f64 = (0..H).map(|h| base.lmp[h * 4 + site] * extra).sum();
            let upper: f64 = (0..H).map(|h| with.lmp[h * 4 + site] * extra).sum();
            let tol = 1e-6 * base.objective.abs().max(1.0);
            proptest::prop_assert!(lower - tol <= delta && delta <= upper + tol, "{} <= {} <= {}", lower, delta, upper);
        }
    }
}
