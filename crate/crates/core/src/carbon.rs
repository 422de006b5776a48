//! System emissions and the footprint attributed to mining load.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::{DayRecord, DispatchResult};
use crate::grid::GridCase;
use crate::HOURS_PER_DAY;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CarbonError {
    #[error("runs cover different windows ({base:?} vs {other:?})")]
    WindowMismatch { base: (u32, u32), other: (u32, u32) },
    #[error("runs were solved on different generator sets")]
    GeneratorMismatch,
    #[error("no day was solved in both runs")]
    NoCommonDays,
    #[error("mining energy is zero, per-unit footprint is undefined")]
    ZeroMiningEnergy,
    #[error("base load energy is zero, per-unit emissions are undefined")]
    ZeroLoadEnergy,
}

fn day_emissions(record: &DayRecord, grid: &GridCase) -> f64 {
    let ng = grid.generators.len();
    let mut total = 0.0;
    for h in 0..HOURS_PER_DAY {
        for (g, gen) in grid.generators.iter().enumerate() {
            total += record.generation[h * ng + g] * gen.emission_factor;
        }
    }
    total
}

/// Total tCO2e over every solved day of `result`.
pub fn total_emissions(result: &DispatchResult, grid: &GridCase) -> f64 {
    result.days.iter().map(|d| day_emissions(d, grid)).sum()
}

/// Emissions by generator over every solved day, in grid order.
pub fn emissions_by_generator(result: &DispatchResult, grid: &GridCase) -> Vec<f64> {
    let ng = grid.generators.len();
    let mut out = alloc::vec![0.0; ng];
    for d in &result.days {
        for h in 0..HOURS_PER_DAY {
            for (g, gen) in grid.generators.iter().enumerate() {
                out[g] += d.generation[h * ng + g] * gen.emission_factor;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarbonReport {
    pub first_day: u32,
    pub last_day: u32,
    /// Days solved in both runs; all sums below are restricted to them.
    pub days: Vec<u32>,
    pub deployment: String,
    /// Base-system emissions, tCO2e.
    pub base_emissions: f64,
    /// Emissions with mining load, tCO2e.
    pub mining_emissions: f64,
    /// Emissions added by the mining load, `mining - base`.
    pub footprint: f64,
    /// `base - mining`, the opposite orientation, kept for reference.
    pub base_minus_mining: f64,
    /// Base load energy, MWh.
    pub base_load_energy: f64,
    /// Mining energy cleared in real time, MWh.
    pub mining_energy: f64,
    /// tCO2e per MWh of base load.
    pub base_per_unit: Option<f64>,
    /// tCO2e per MWh of mining load.
    pub mining_per_unit: Option<f64>,
}

impl CarbonReport {
    pub fn mining_per_unit(&self) -> Result<f64, CarbonError> {
        self.mining_per_unit.ok_or(CarbonError::ZeroMiningEnergy)
    }

    pub fn base_per_unit(&self) -> Result<f64, CarbonError> {
        self.base_per_unit.ok_or(CarbonError::ZeroLoadEnergy)
    }
}

/// Compares a base run with a run including mining load. Days that failed in
/// either run are excluded from both.
pub fn mining_footprint(
    base: &DispatchResult,
    with_mining: &DispatchResult,
    grid: &GridCase,
    deployment: &str,
) -> Result<CarbonReport, CarbonError> {
    if base.window != with_mining.window {
        return Err(CarbonError::WindowMismatch {
            base: (base.window.first, base.window.last),
            other: (with_mining.window.first, with_mining.window.last),
        });
    }
    if base.gen_ids != with_mining.gen_ids || base.gen_ids != grid.generator_ids() {
        return Err(CarbonError::GeneratorMismatch);
    }
    let in_base: BTreeSet<u32> = base.solved_days().collect();
    let days: Vec<u32> = with_mining.solved_days().filter(|d| in_base.contains(d)).collect();
    if days.is_empty() {
        return Err(CarbonError::NoCommonDays);
    }
    let mut base_emissions = 0.0;
    let mut mining_emissions = 0.0;
    let mut base_load_energy = 0.0;
    let mut mining_energy = 0.0;
    for &day in &days {
        let b = base.day(day).expect("common day");
        let m = with_mining.day(day).expect("common day");
        base_emissions += day_emissions(b, grid);
        mining_emissions += day_emissions(m, grid);
        base_load_energy += b.total_load.iter().zip(&b.mining).map(|(t, x)| t - x).sum::<f64>();
        mining_energy += m.mining.iter().sum::<f64>();
    }
    let footprint = mining_emissions - base_emissions;
    Ok(CarbonReport {
        first_day: base.window.first,
        last_day: base.window.last,
        days,
        deployment: deployment.into(),
        base_emissions,
        mining_emissions,
        footprint,
        base_minus_mining: base_emissions - mining_emissions,
        base_load_energy,
        mining_energy,
        base_per_unit: (base_load_energy > 0.0).then(|| base_emissions / base_load_energy),
        mining_per_unit: (mining_energy > 0.0).then(|| footprint / mining_energy),
    })
}

/// One row of the per-location footprint table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocationFootprint {
    pub location: String,
    pub energy_mwh: f64,
    pub footprint_t: f64,
    pub per_unit_t_per_mwh: Option<f64>,
}

impl From<&CarbonReport> for LocationFootprint {
    fn from(r: &CarbonReport) -> Self {
        Self {
            location: r.deployment.clone(),
            energy_mwh: r.mining_energy,
            footprint_t: r.footprint,
            per_unit_t_per_mwh: r.mining_per_unit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{run_window, DispatchOptions, WindowInputs};
    use crate::grid::fixtures::two_bus;
    use crate::mining::{Flexibility, MiningDeployment};
    use crate::profile::{DayWindow, HourlyTable};

    fn run(grid: &GridCase, load2: f64, dep: Option<&MiningDeployment>) -> DispatchResult {
        let w = DayWindow::new(1, 2).unwrap();
        let mut load = HourlyTable::zeros(w, alloc::vec![1, 2]);
        for d in w.days() {
            for h in 0..HOURS_PER_DAY {
                load.set(d, h, 1, load2);
            }
        }
        run_window(
            WindowInputs { grid, load: &load, renewables: None, deployment: dep, window: w },
            &DispatchOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn congested_hourly_emissions() {
        let mut grid = two_bus(100.0);
        grid.generators[0].emission_factor = 0.2;
        grid.generators[1].emission_factor = 0.9;
        let r = run(&grid, 150.0, None);
        let per_hour = total_emissions(&r, &grid) / (2.0 * HOURS_PER_DAY as f64);
        assert!((per_hour - 65.0).abs() < 1e-6);
        let by_gen: f64 = emissions_by_generator(&r, &grid).iter().sum();
        assert!((by_gen - total_emissions(&r, &grid)).abs() < 1e-9);
    }

    #[test]
    fn empty_deployment_has_no_footprint() {
        let grid = two_bus(100.0);
        let base = run(&grid, 150.0, None);
        let with = run(&grid, 150.0, Some(&MiningDeployment::empty()));
        let rep = mining_footprint(&base, &with, &grid, "none").unwrap();
        assert_eq!(rep.footprint, 0.0);
        assert_eq!(rep.mining_per_unit(), Err(CarbonError::ZeroMiningEnergy));
    }

    #[test]
    fn marginal_unit_sets_the_per_unit_footprint() {
        let mut grid = two_bus(500.0);
        grid.generators[0].emission_factor = 0.5;
        let base = run(&grid, 100.0, None);
        let dep = MiningDeployment::uniform(&[2], 10.0, Flexibility::None);
        let with = run(&grid, 100.0, Some(&dep));
        let rep = mining_footprint(&base, &with, &grid, "bus2").unwrap();
        assert!((rep.footprint / 48.0 - 5.0).abs() < 1e-9);
        assert!((rep.mining_per_unit().unwrap() - 0.5).abs() < 1e-9);
        assert!((rep.base_minus_mining + rep.footprint).abs() < 1e-12);
    }

    #[test]
    fn window_mismatch_is_rejected() {
        let grid = two_bus(500.0);
        let a = run(&grid, 100.0, None);
        let mut b = a.clone();
        b.window = DayWindow::new(1, 3).unwrap();
        assert!(matches!(mining_footprint(&a, &b, &grid, "x"), Err(CarbonError::WindowMismatch { .. })));
    }

    fn only_day(r: &DispatchResult, day: u32) -> DispatchResult {
        DispatchResult {
            window: DayWindow::single(day),
            days: r.days.iter().filter(|d| d.day == day).cloned().collect(),
            ..r.clone()
        }
    }

    #[test]
    fn footprint_adds_over_days_and_matches_raw_tables() {
        let mut grid = two_bus(100.0);
        grid.generators[0].emission_factor = 0.3;
        grid.generators[1].emission_factor = 0.7;
        let dep = MiningDeployment::uniform(&[2], 15.0, Flexibility::None);
        let base = run(&grid, 120.0, None);
        let with = run(&grid, 120.0, Some(&dep));
        let whole = mining_footprint(&base, &with, &grid, "m").unwrap().footprint;
        let parts: f64 = [1, 2]
            .iter()
            .map(|&d| mining_footprint(&only_day(&base, d), &only_day(&with, d), &grid, "m").unwrap().footprint)
            .sum();
        assert!((whole - parts).abs() < 1e-9, "{whole} vs {parts}");

        // Output of each generator times its factor, read straight off the tables.
        let mut raw = 0.0;
        for d in &with.days {
            for (i, p) in d.generation.iter().enumerate() {
                raw += p * grid.generators[i % 2].emission_factor;
            }
        }
        assert!((total_emissions(&with, &grid) - raw).abs() < 1e-9);
    }
}
