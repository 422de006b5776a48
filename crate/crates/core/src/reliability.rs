//! Monte-Carlo generation adequacy: loss-of-load hours and expected energy
//! not served under random forced outages.
//!
//! The system is treated as a copper plate. Each dispatchable unit alternates
//! between up and down periods with exponentially distributed durations
//! (means MTTF and MTTR) and starts every trial in the up state; a unit
//! counts as available for an hour if it is up at the start of that hour.
//! Renewables never fail and follow their profile.
//!
//! Random numbers come from ChaCha8 with one substream per (trial, unit),
//! so every trial is reproducible on its own and trials can run in any
//! order or in parallel. Adding mining load never changes the outage draws,
//! which keeps comparisons between deployments on common random numbers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridCase;
use crate::math::{ln, sqrt};
use crate::profile::{LoadProfile, ProfileError, RenewableProfile};
use crate::scenario::{apply_scenario, ScenarioError, ScenarioSpec};

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Unserved energy at or below this level (MW) counts as served.
pub const UNSERVED_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReliabilityError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least one simulated year is required")]
    NoYears,
    #[error("mining series has {got} hours, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("flexible fraction {0} is outside [0, 1]")]
    BadFraction(f64),
    #[error("renewable noise level {0} must be non-negative")]
    BadNoise(f64),
    #[error("unit {id}: MTTF and MTTR must be positive")]
    BadOutageRates { id: u32 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitOutage {
    pub id: u32,
    pub capacity: f64,
    pub mttf: f64,
    pub mttr: f64,
}

impl UnitOutage {
    /// Long-run fraction of time the unit is up.
    pub fn availability(&self) -> f64 {
        self.mttf / (self.mttf + self.mttr)
    }
}

/// Stream for unit `unit` in trial `trial`.
pub fn unit_stream(seed: u64, trial: u64, unit: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos((unit as u128) << 40);
    rng
}

fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn exponential(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    -mean * ln(1.0 - unit_uniform(rng))
}

/// Calls `on_up(first, last)` for every half-open range of hours during which
/// the unit is available.
fn for_each_up_range(unit: &UnitOutage, horizon: usize, rng: &mut ChaCha8Rng, mut on_up: impl FnMut(usize, usize)) {
    let horizon_f = horizon as f64;
    let mut t = 0.0;
    while t < horizon_f {
        let failure = t + exponential(rng, unit.mttf);
        // Hours k with t <= k < failure.
        let first = crate::math::ceil(t) as usize;
        let end = if failure >= horizon_f { horizon } else { crate::math::ceil(failure) as usize };
        if end > first {
            on_up(first, end.min(horizon));
        }
        if failure >= horizon_f {
            break;
        }
        t = failure + exponential(rng, unit.mttr);
    }
}

/// Hourly availability of one unit over `horizon` hours.
pub fn sample_availability(unit: &UnitOutage, horizon: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut out = vec![false; horizon];
    for_each_up_range(unit, horizon, rng, |a, b| out[a..b].iter_mut().for_each(|x| *x = true));
    out
}

/// How much mining load is dropped in hours where capacity falls short.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurtailmentPolicy {
    None,
    FullFlex,
    /// Up to this fraction of the mining load is shed.
    PartialFlex(f64),
}

impl CurtailmentPolicy {
    pub fn fraction(&self) -> f64 {
        match *self {
            Self::None => 0.0,
            Self::FullFlex => 1.0,
            Self::PartialFlex(f) => f,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::None => "none".into(),
            Self::FullFlex => "full_flex".into(),
            Self::PartialFlex(f) => alloc::format!("partial_flex({f})"),
        }
    }

    pub fn validate(&self) -> Result<(), ReliabilityError> {
        let f = self.fraction();
        if (0.0..=1.0).contains(&f) {
            Ok(())
        } else {
            Err(ReliabilityError::BadFraction(f))
        }
    }
}

/// Mining demand seen by the adequacy model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiningDemand {
    None,
    /// Constant total MW.
    Constant(f64),
    /// Total MW per hour of the profile window.
    Hourly(Vec<f64>),
}

impl MiningDemand {
    /// Hourly system totals of a mining schedule.
    pub fn from_schedule(schedule: &crate::mining::MiningSchedule) -> Self {
        Self::Hourly(hourly_totals(schedule))
    }
}

fn hourly_totals(t: &crate::profile::HourlyTable) -> Vec<f64> {
    if t.keys().is_empty() {
        vec![0.0; t.window().len() * crate::HOURS_PER_DAY]
    } else {
        t.hourly_totals()
    }
}

/// Aggregated inputs of the adequacy model over one profile window.
#[derive(Clone, Debug, PartialEq)]
pub struct AdequacySystem {
    pub units: Vec<UnitOutage>,
    /// Renewable output per hour, MW.
    pub renewable: Vec<f64>,
    /// Non-mining load per hour, MW.
    pub firm_load: Vec<f64>,
}

impl AdequacySystem {
    /// Builds the system over the load profile's window. Renewable units
    /// without a profile contribute their full capacity.
    pub fn from_grid(
        grid: &GridCase,
        load: &LoadProfile,
        renewables: Option<&RenewableProfile>,
    ) -> Result<Self, ReliabilityError> {
        let window = load.window();
        let hours = window.len() * crate::HOURS_PER_DAY;
        let firm_load = hourly_totals(load);
        let mut units = Vec::new();
        let mut renewable = vec![0.0; hours];
        let ren = renewables.map(|r| r.slice(window)).transpose()?;
        for g in &grid.generators {
            if g.is_renewable() {
                match ren.as_ref().and_then(|r| r.key_position(g.id).map(|k| (r, k))) {
                    Some((r, k)) => {
                        for (i, day) in window.days().enumerate() {
                            for h in 0..crate::HOURS_PER_DAY {
                                renewable[i * crate::HOURS_PER_DAY + h] += r.get(day, h, k).min(g.p_max);
                            }
                        }
                    }
                    None => renewable.iter_mut().for_each(|x| *x += g.p_max),
                }
            } else {
                if !(g.mttf > 0.0 && g.mttr > 0.0) {
                    return Err(ReliabilityError::BadOutageRates { id: g.id });
                }
                units.push(UnitOutage { id: g.id, capacity: g.p_max, mttf: g.mttf, mttr: g.mttr });
            }
        }
        Ok(Self { units, renewable, firm_load })
    }

    pub fn hours(&self) -> usize {
        self.firm_load.len()
    }

    fn mining_series(&self, mining: &MiningDemand) -> Result<Vec<f64>, ReliabilityError> {
        let n = self.hours();
        match mining {
            MiningDemand::None => Ok(vec![0.0; n]),
            MiningDemand::Constant(mw) => Ok(vec![*mw; n]),
            MiningDemand::Hourly(v) if v.len() == n => Ok(v.clone()),
            MiningDemand::Hourly(v) => Err(ReliabilityError::LengthMismatch { expected: n, got: v.len() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReliabilityOptions {
    pub trials: u64,
    pub seed: u64,
    /// Number of times the profile window is repeated within one trial.
    pub years: u32,
    /// Standard deviation of an optional zero-mean multiplicative noise on
    /// renewable output, drawn per hour. Off when `None`.
    pub renewable_noise: Option<f64>,
}

impl Default for ReliabilityOptions {
    fn default() -> Self {
        Self { trials: 10_000, seed: 0, years: 1, renewable_noise: None }
    }
}

/// Outcome of a single trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub loss_hours: u32,
    pub unserved_mwh: f64,
}

/// Annualized indices with 95 % confidence half-widths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityIndices {
    /// Loss-of-load hours per year.
    pub lolh: f64,
    /// Expected energy not served, MWh per year.
    pub eens: f64,
    pub lolh_ci: f64,
    pub eens_ci: f64,
    pub trials: u64,
    pub seed: u64,
    pub horizon_hours: usize,
}

/// A prepared assessment: the system plus one mining level and policy.
#[derive(Clone, Debug)]
pub struct Assessment<'a> {
    system: &'a AdequacySystem,
    mining: Vec<f64>,
    fraction: f64,
    options: ReliabilityOptions,
}

impl<'a> Assessment<'a> {
    pub fn new(
        system: &'a AdequacySystem,
        mining: &MiningDemand,
        policy: CurtailmentPolicy,
        options: ReliabilityOptions,
    ) -> Result<Self, ReliabilityError> {
        policy.validate()?;
        if options.trials == 0 {
            return Err(ReliabilityError::NoTrials);
        }
        if options.years == 0 {
            return Err(ReliabilityError::NoYears);
        }
        if let Some(s) = options.renewable_noise {
            if !(s >= 0.0) {
                return Err(ReliabilityError::BadNoise(s));
            }
        }
        let mining = system.mining_series(mining)?;
        Ok(Self { system, mining, fraction: policy.fraction(), options })
    }

    pub fn horizon(&self) -> usize {
        self.system.hours() * self.options.years as usize
    }

    pub fn trials(&self) -> u64 {
        self.options.trials
    }

    /// Runs one trial. Depends only on the seed and `trial`.
    pub fn trial(&self, trial: u64) -> TrialOutcome {
        let sys = self.system;
        let n = sys.hours();
        let horizon = self.horizon();
        let seed = self.options.seed;
        let mut capacity = vec![0.0; horizon];
        for (u, unit) in sys.units.iter().enumerate() {
            let mut rng = unit_stream(seed, trial, u);
            let cap = unit.capacity;
            for_each_up_range(unit, horizon, &mut rng, |a, b| capacity[a..b].iter_mut().for_each(|c| *c += cap));
        }
        let mut noise = self.options.renewable_noise.map(|s| (s, unit_stream(seed, trial, sys.units.len())));
        let f = self.fraction;
        let mut out = TrialOutcome { loss_hours: 0, unserved_mwh: 0.0 };
        for (t, cap) in capacity.iter().enumerate() {
            let h = t % n;
            let mut ren = sys.renewable[h];
            if let Some((sigma, rng)) = noise.as_mut() {
                // Uniform with unit variance.
                let z = (2.0 * unit_uniform(rng) - 1.0) * sqrt(3.0);
                ren *= (1.0 + *sigma * z).max(0.0);
            }
            let firm_short = sys.firm_load[h] - (cap + ren);
            let m = self.mining[h];
            // Mining that stays on during a shortfall.
            let rigid = m - f * m;
            let unserved = firm_short + rigid;
            if unserved > UNSERVED_TOLERANCE {
                out.loss_hours += 1;
                out.unserved_mwh += unserved;
            }
        }
        out
    }

    /// Folds trial outcomes, given in trial order, into annualized indices.
    pub fn summarize(&self, outcomes: &[TrialOutcome]) -> ReliabilityIndices {
        let scale = HOURS_PER_YEAR / self.horizon() as f64;
        let n = outcomes.len() as f64;
        let stats = |xs: &mut dyn Iterator<Item = f64>| -> (f64, f64) {
            let (mut s, mut s2) = (0.0, 0.0);
            for x in xs {
                s += x;
                s2 += x * x;
            }
            let mean = s / n;
            let var = if n > 1.0 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            (mean, 1.96 * sqrt(var / n))
        };
        let (lolh, lolh_ci) = stats(&mut outcomes.iter().map(|o| o.loss_hours as f64 * scale));
        let (eens, eens_ci) = stats(&mut outcomes.iter().map(|o| o.unserved_mwh * scale));
        ReliabilityIndices {
            lolh,
            eens,
            lolh_ci,
            eens_ci,
            trials: outcomes.len() as u64,
            seed: self.options.seed,
            horizon_hours: self.horizon(),
        }
    }

    pub fn run(&self, runner: &dyn TrialRunner) -> ReliabilityIndices {
        let outcomes = runner.run(self.options.trials, &|t| self.trial(t));
        self.summarize(&outcomes)
    }
}

/// Executes trials `0..n` and returns their outcomes in trial order.
pub trait TrialRunner {
    fn run(&self, n: u64, trial: &(dyn Fn(u64) -> TrialOutcome + Sync)) -> Vec<TrialOutcome>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SequentialRunner;

impl TrialRunner for SequentialRunner {
    fn run(&self, n: u64, trial: &(dyn Fn(u64) -> TrialOutcome + Sync)) -> Vec<TrialOutcome> {
        (0..n).map(trial).collect()
    }
}

/// Single assessment run sequentially.
pub fn assess(
    system: &AdequacySystem,
    mining: &MiningDemand,
    policy: CurtailmentPolicy,
    options: &ReliabilityOptions,
) -> Result<ReliabilityIndices, ReliabilityError> {
    Ok(Assessment::new(system, mining, policy, options.clone())?.run(&SequentialRunner))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub policy: String,
    pub added_gw: f64,
    pub indices: ReliabilityIndices,
}

/// Indices for every (scenario, policy, added mining GW) combination, in that
/// nesting order. Added mining is a constant system-wide load.
#[allow(clippy::too_many_arguments)]
pub fn scenario_sweep(
    grid: &GridCase,
    load: &LoadProfile,
    renewables: &RenewableProfile,
    sizes_gw: &[f64],
    scenarios: &[ScenarioSpec],
    policies: &[CurtailmentPolicy],
    options: &ReliabilityOptions,
    runner: &dyn TrialRunner,
) -> Result<Vec<SweepRow>, ReliabilityError> {
    let mut rows = Vec::with_capacity(sizes_gw.len() * scenarios.len() * policies.len());
    for spec in scenarios {
        let (g, l, r) = apply_scenario(grid, load, renewables, spec)?;
        let system = AdequacySystem::from_grid(&g, &l, Some(&r))?;
        for policy in policies {
            for &gw in sizes_gw {
                let a = Assessment::new(&system, &MiningDemand::Constant(gw * 1000.0), *policy, options.clone())?;
                rows.push(SweepRow {
                    scenario: spec.name.clone(),
                    policy: policy.label(),
                    added_gw: gw,
                    indices: a.run(runner),
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn system(units: &[(f64, f64, f64)], load: f64, hours: usize) -> AdequacySystem {
        AdequacySystem {
            units: units
                .iter()
                .enumerate()
                .map(|(i, &(capacity, mttf, mttr))| UnitOutage { id: i as u32, capacity, mttf, mttr })
                .collect(),
            renewable: vec![0.0; hours],
            firm_load: vec![load; hours],
        }
    }

    fn opts(trials: u64, seed: u64) -> ReliabilityOptions {
        ReliabilityOptions { trials, seed, ..Default::default() }
    }

    #[test]
    fn never_failing_unit_is_always_available() {
        let u = UnitOutage { id: 0, capacity: 1.0, mttf: f64::INFINITY, mttr: 1.0 };
        let a = sample_availability(&u, 1000, &mut unit_stream(1, 0, 0));
        assert!(a.iter().all(|&x| x));
    }

    #[test]
    fn availability_matches_two_state_model() {
        let u = UnitOutage { id: 0, capacity: 1.0, mttf: 2940.0, mttr: 60.0 };
        let (mut up, mut total) = (0usize, 0usize);
        for trial in 0..400 {
            let a = sample_availability(&u, 8760, &mut unit_stream(7, trial, 0));
            up += a.iter().filter(|&&x| x).count();
            total += a.len();
        }
        let p = up as f64 / total as f64;
        assert!((p - 0.98).abs() < 0.003, "{p}");
    }

    #[test]
    fn interval_shrinks_with_the_square_root_of_trials() {
        let sys = system(&[(100.0, 300.0, 30.0), (100.0, 300.0, 30.0)], 120.0, 2000);
        let ci = |trials| assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &opts(trials, 9)).unwrap();
        let (small, large) = (ci(2500), ci(10_000));
        let ratio = small.lolh_ci / large.lolh_ci;
        assert!((1.8..2.2).contains(&ratio), "{ratio}");
        let ratio = small.eens_ci / large.eens_ci;
        assert!((1.8..2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let u = UnitOutage { id: 0, capacity: 1.0, mttf: 20.0, mttr: 5.0 };
        let a = sample_availability(&u, 500, &mut unit_stream(3, 4, 1));
        assert_eq!(a, sample_availability(&u, 500, &mut unit_stream(3, 4, 1)));
        assert_ne!(a, sample_availability(&u, 500, &mut unit_stream(3, 5, 1)));
        assert_ne!(a, sample_availability(&u, 500, &mut unit_stream(3, 4, 2)));
    }

    #[test]
    fn ample_capacity_has_no_loss() {
        let sys = system(&[(100.0, f64::INFINITY, 1.0)], 50.0, 48);
        let r = assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &opts(50, 1)).unwrap();
        assert_eq!((r.lolh, r.eens), (0.0, 0.0));
    }

    #[test]
    fn full_flex_matches_baseline_bitwise() {
        let sys = system(&[(60.0, 40.0, 10.0), (60.0, 40.0, 10.0)], 70.0, 240);
        let base = assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &opts(200, 9)).unwrap();
        let flex = assess(&sys, &MiningDemand::Constant(30.0), CurtailmentPolicy::FullFlex, &opts(200, 9)).unwrap();
        assert_eq!(base, flex);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let sys = system(&[(1.0, 1.0, 1.0)], 1.0, 24);
        assert_eq!(
            assess(&sys, &MiningDemand::None, CurtailmentPolicy::PartialFlex(1.5), &opts(1, 0)),
            Err(ReliabilityError::BadFraction(1.5))
        );
        assert_eq!(
            assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &opts(0, 0)),
            Err(ReliabilityError::NoTrials)
        );
        assert!(matches!(
            assess(&sys, &MiningDemand::Hourly(vec![0.0; 3]), CurtailmentPolicy::None, &opts(1, 0)),
            Err(ReliabilityError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn repeated_years_agree_with_single_year() {
        let sys = system(&[(100.0, 300.0, 30.0)], 50.0, 24 * 60);
        let one = assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &opts(2000, 5)).unwrap();
        let three = assess(
            &sys,
            &MiningDemand::None,
            CurtailmentPolicy::None,
            &ReliabilityOptions { years: 3, ..opts(700, 5) },
        )
        .unwrap();
        let tol = 1.5 * (one.lolh_ci + three.lolh_ci);
        assert!((one.lolh - three.lolh).abs() < tol, "{} vs {} (tol {tol})", one.lolh, three.lolh);
    }

    #[test]
    fn noise_is_off_by_default_and_seeded() {
        let mut sys = system(&[(50.0, 100.0, 20.0)], 80.0, 240);
        sys.renewable = vec![40.0; 240];
        let o = ReliabilityOptions { renewable_noise: Some(0.3), ..opts(100, 2) };
        let a = assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &o).unwrap();
        assert_eq!(a, assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &o).unwrap());
        let quiet = assess(&sys, &MiningDemand::None, CurtailmentPolicy::None, &opts(100, 2)).unwrap();
        assert_ne!(a, quiet);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn indices_are_ordered_by_mining_and_flexibility(
            seed in any::<u64>(), m1 in 0.0f64..60.0, dm in 0.0f64..60.0, f in 0.0f64..=1.0
        ) {
            let sys = system(&[(60.0, 50.0, 10.0), (40.0, 80.0, 20.0)], 55.0, 96);
            let o = opts(40, seed);
            let run = |m: f64, p: CurtailmentPolicy| assess(&sys, &MiningDemand::Constant(m), p, &o).unwrap();
            let a = run(m1, CurtailmentPolicy::None);
            let b = run(m1 + dm, CurtailmentPolicy::None);
            prop_assert!(a.lolh <= b.lolh && a.eens <= b.eens);
            let part = run(m1 + dm, CurtailmentPolicy::PartialFlex(f));
            let full = run(m1 + dm, CurtailmentPolicy::FullFlex);
            prop_assert!(full.lolh <= part.lolh && part.lolh <= b.lolh);
            prop_assert!(full.eens <= part.eens && part.eens <= b.eens);
            prop_assert!((0.0..=HOURS_PER_YEAR).contains(&b.lolh));
            prop_assert_eq!(b.eens == 0.0, b.lolh == 0.0);
        }
    }
}
