//! Price post-processing: county averages, hour-of-day statistics and
//! system-wide hourly series for correlation studies.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::DispatchResult;
use crate::grid::GridCase;
use crate::math;
use crate::mining::MiningSchedule;
use crate::profile::LoadProfile;
use crate::scada::{correlate, ScadaError};
use crate::HOURS_PER_DAY;

const H: usize = HOURS_PER_DAY;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("no solved days to analyse")]
    NoData,
    #[error("result is for a different grid (bus list differs)")]
    BusMismatch,
    #[error("windows differ between compared results")]
    WindowMismatch,
    #[error("day {0} is missing from the load or mining profile")]
    MissingDay(u32),
    #[error("statistics tables have different metrics")]
    MetricMismatch,
    #[error("correlation {label}: {source}")]
    Correlation { label: String, source: ScadaError },
}

/// Mean bus price per county, `values[day index][hour][county]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountyPriceSeries {
    pub counties: Vec<String>,
    pub days: Vec<u32>,
    pub values: Vec<f64>,
}

impl CountyPriceSeries {
    pub fn get(&self, day_index: usize, hour0: usize, county: usize) -> f64 {
        self.values[(day_index * H + hour0) * self.counties.len() + county]
    }
}

/// Unweighted mean of bus prices within each county, for every solved hour.
/// Counties without buses are skipped.
pub fn county_lmp(result: &DispatchResult, grid: &GridCase) -> Result<CountyPriceSeries, MarketError> {
    if result.bus_ids != grid.bus_ids() {
        return Err(MarketError::BusMismatch);
    }
    let pos = grid.bus_positions();
    let mut members: Vec<(String, Vec<usize>)> = Vec::new();
    for (name, buses) in &grid.counties {
        let idx: Vec<usize> = buses.iter().filter_map(|b| pos.get(b).copied()).collect();
        if idx.is_empty() {
            log::warn!("county {name} has no buses; excluded from county prices");
            continue;
        }
        members.push((name.clone(), idx));
    }
    let nb = result.bus_ids.len();
    let nc = members.len();
    let mut values = Vec::with_capacity(result.days.len() * H * nc);
    for d in &result.days {
        for h in 0..H {
            for (_, idx) in &members {
                let s: f64 = idx.iter().map(|&b| d.lmp[h * nb + b]).sum();
                values.push(s / idx.len() as f64);
            }
        }
    }
    Ok(CountyPriceSeries {
        counties: members.into_iter().map(|(n, _)| n).collect(),
        days: result.solved_days().collect(),
        values,
    })
}

pub const STATISTICS: [&str; 6] = ["mean", "median", "q10", "q90", "min", "max"];

/// Hour-of-day price statistics pooled over days and buses:
/// `rows[metric]` holds 24 values in the order of [`STATISTICS`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceStatistics {
    pub metrics: Vec<String>,
    pub rows: Vec<[f64; H]>,
}

impl PriceStatistics {
    pub fn metric(&self, name: &str) -> Option<&[f64; H]> {
        self.metrics.iter().position(|m| m == name).map(|i| &self.rows[i])
    }

    /// `(metric, hour 1..=24, value)` in table order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, usize, f64)> + '_ {
        self.metrics
            .iter()
            .zip(&self.rows)
            .flat_map(|(m, row)| row.iter().enumerate().map(move |(h, &v)| (m.as_str(), h + 1, v)))
    }

    /// `other - self` for every metric and hour.
    pub fn delta(&self, other: &PriceStatistics) -> Result<PriceStatistics, MarketError> {
        if self.metrics != other.metrics {
            return Err(MarketError::MetricMismatch);
        }
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| core::array::from_fn(|h| b[h] - a[h])).collect();
        Ok(PriceStatistics { metrics: self.metrics.clone(), rows })
    }
}

/// Statistics over every solved bus-hour of all `results`, grouped by hour of
/// day.
pub fn price_statistics(results: &[&DispatchResult]) -> Result<PriceStatistics, MarketError> {
    let mut by_hour: Vec<Vec<f64>> = vec![Vec::new(); H];
    for r in results {
        if r.window != results[0].window {
            return Err(MarketError::WindowMismatch);
        }
        let nb = r.bus_ids.len();
        for d in &r.days {
            for (h, bucket) in by_hour.iter_mut().enumerate() {
                bucket.extend_from_slice(&d.lmp[h * nb..(h + 1) * nb]);
            }
        }
    }
    if by_hour[0].is_empty() {
        return Err(MarketError::NoData);
    }
    let mut rows = vec![[0.0; H]; STATISTICS.len()];
    for (h, bucket) in by_hour.iter().enumerate() {
        let s = math::sorted(bucket);
        rows[0][h] = math::mean(&s);
        rows[1][h] = math::quantile_sorted(&s, 0.5);
        rows[2][h] = math::quantile_sorted(&s, 0.1);
        rows[3][h] = math::quantile_sorted(&s, 0.9);
        rows[4][h] = s[0];
        rows[5][h] = s[s.len() - 1];
    }
    Ok(PriceStatistics { metrics: STATISTICS.iter().map(|s| String::from(*s)).collect(), rows })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceAveraging {
    /// Plain mean over buses.
    #[default]
    Unweighted,
    /// Mean weighted by each bus's total load in that hour.
    LoadWeighted,
}

/// System-wide hourly series over the solved days, in chronological order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSeries {
    /// `(day, hour 1..=24)` of each entry.
    pub hours: Vec<(u32, u8)>,
    pub average_lmp: Vec<f64>,
    pub mining: Vec<f64>,
    pub non_mining: Vec<f64>,
    /// `mining + non_mining`.
    pub total_load: Vec<f64>,
    /// Renewable output dispatched in real time.
    pub renewable: Vec<f64>,
    /// `total_load - renewable`.
    pub net_load: Vec<f64>,
}

/// Builds system-wide series from a dispatch result. Non-mining load comes
/// from `load`; mining from `schedule` when given, otherwise from the mining
/// cleared in the run.
pub fn system_series(
    result: &DispatchResult,
    grid: &GridCase,
    load: &LoadProfile,
    schedule: Option<&MiningSchedule>,
    averaging: PriceAveraging,
) -> Result<SystemSeries, MarketError> {
    if result.bus_ids != grid.bus_ids() {
        return Err(MarketError::BusMismatch);
    }
    let nb = result.bus_ids.len();
    let ng = grid.generators.len();
    let renewable_gens: Vec<usize> =
        grid.generators.iter().enumerate().filter(|(_, g)| g.is_renewable()).map(|(i, _)| i).collect();
    let day_total = |t: &crate::profile::HourlyTable, day: u32, h: usize| -> Result<f64, MarketError> {
        if !t.window().contains(day) {
            return Err(MarketError::MissingDay(day));
        }
        Ok(t.day(day)[h * t.keys().len()..(h + 1) * t.keys().len()].iter().sum())
    };
    let n = result.days.len() * H;
    let mut s = SystemSeries {
        hours: Vec::with_capacity(n),
        average_lmp: Vec::with_capacity(n),
        mining: Vec::with_capacity(n),
        non_mining: Vec::with_capacity(n),
        total_load: Vec::with_capacity(n),
        renewable: Vec::with_capacity(n),
        net_load: Vec::with_capacity(n),
    };
    for d in &result.days {
        for h in 0..H {
            let lmp = &d.lmp[h * nb..(h + 1) * nb];
            let avg = match averaging {
                PriceAveraging::Unweighted => math::mean(lmp),
                PriceAveraging::LoadWeighted => {
                    let w = &d.total_load[h * nb..(h + 1) * nb];
                    let tw: f64 = w.iter().sum();
                    if tw > 0.0 {
                        lmp.iter().zip(w).map(|(p, w)| p * w).sum::<f64>() / tw
                    } else {
                        math::mean(lmp)
                    }
                }
            };
            let non_mining = day_total(load, d.day, h)?;
            let mining = match schedule {
                Some(t) => day_total(t, d.day, h)?,
                None => d.mining[h * nb..(h + 1) * nb].iter().sum(),
            };
            let total = mining + non_mining;
            let ren: f64 = renewable_gens.iter().map(|&g| d.generation[h * ng + g]).sum();
            s.hours.push((d.day, (h + 1) as u8));
            s.average_lmp.push(avg);
            s.mining.push(mining);
            s.non_mining.push(non_mining);
            s.total_load.push(total);
            s.renewable.push(ren);
            s.net_load.push(total - ren);
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub x: String,
    pub y: String,
    pub r: Option<f64>,
}

/// Pearson correlations of mining and non-mining load against the average
/// price and against net load. Net load is reported both as load minus
/// renewables (`net_load`) and as total load (`total_load`). A pair without
/// variance gets `r = None`.
pub fn correlation_report(s: &SystemSeries) -> Vec<CorrelationRow> {
    let pairs: [(&str, &[f64], &str, &[f64]); 6] = [
        ("mining_load", &s.mining, "average_lmp", &s.average_lmp),
        ("mining_load", &s.mining, "net_load", &s.net_load),
        ("mining_load", &s.mining, "total_load", &s.total_load),
        ("non_mining_load", &s.non_mining, "average_lmp", &s.average_lmp),
        ("non_mining_load", &s.non_mining, "net_load", &s.net_load),
        ("non_mining_load", &s.non_mining, "total_load", &s.total_load),
    ];
    pairs
        .iter()
        .map(|(xl, x, yl, y)| CorrelationRow { x: (*xl).into(), y: (*yl).into(), r: correlate(x, y).ok() })
        .collect()
}

/// Time-mean price per bus id over the solved hours.
pub fn mean_bus_prices(result: &DispatchResult) -> BTreeMap<u32, f64> {
    result.mean_lmp_by_bus().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{run_window, DispatchOptions, WindowInputs};
    use crate::grid::fixtures::{bus, thermal, two_bus};
    use crate::mining::{Flexibility, MiningDeployment};
    use crate::profile::{DayWindow, HourlyTable};
    use proptest::prelude::*;

    fn load_at(window: DayWindow, keys: Vec<u32>, f: impl Fn(u32, usize, usize) -> f64) -> HourlyTable {
        let mut t = HourlyTable::zeros(window, keys.clone());
        for d in window.days() {
            for h in 0..H {
                for k in 0..keys.len() {
                    t.set(d, h, k, f(d, h, k));
                }
            }
        }
        t
    }

    fn three_bus() -> GridCase {
        let mut g = two_bus(60.0);
        g.buses.push(bus(3, "B"));
        g.counties.get_mut("B").unwrap().push(3);
        g.branches.push(crate::grid::Branch { from_bus: 2, to_bus: 3, reactance: 0.1, flow_limit: 500.0 });
        g.branches.push(crate::grid::Branch { from_bus: 1, to_bus: 3, reactance: 0.2, flow_limit: 500.0 });
        g.generators.push(thermal(3, 3, 100.0, 35.0));
        g
    }

    fn run(grid: &GridCase, load: &HourlyTable, dep: Option<&MiningDeployment>) -> DispatchResult {
        run_window(
            WindowInputs { grid, load, renewables: None, deployment: dep, window: load.window() },
            &DispatchOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn county_prices_are_bus_means() {
        let grid = three_bus();
        let w = DayWindow::new(1, 2).unwrap();
        let load = load_at(w, vec![1, 2, 3], |_, h, k| if k == 0 { 0.0 } else { 40.0 + 3.0 * h as f64 });
        let r = run(&grid, &load, None);
        let c = county_lmp(&r, &grid).unwrap();
        assert_eq!(c.counties, vec!["A", "B"]);
        for (di, d) in r.days.iter().enumerate() {
            for h in 0..H {
                assert_eq!(c.get(di, h, 0), d.lmp[h * 3]);
                let direct = (d.lmp[h * 3 + 1] + d.lmp[h * 3 + 2]) / 2.0;
                assert!((c.get(di, h, 1) - direct).abs() < 1e-12);
            }
        }
        // Time mean of county series equals county mean of bus time means.
        let means = mean_bus_prices(&r);
        let t_mean: f64 =
            (0..2).flat_map(|d| (0..H).map(move |h| (d, h))).map(|(d, h)| c.get(d, h, 1)).sum::<f64>() / 48.0;
        assert!((t_mean - (means[&2] + means[&3]) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_prices_give_constant_statistics() {
        let grid = two_bus(500.0);
        let w = DayWindow::new(1, 3).unwrap();
        let r = run(&grid, &load_at(w, vec![1, 2], |_, _, k| 50.0 * k as f64), None);
        let s = price_statistics(&[&r]).unwrap();
        for row in &s.rows {
            assert!(row.iter().all(|v| (v - 20.0).abs() < 1e-9));
        }
        let d = s.delta(&s).unwrap();
        assert!(d.rows.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(s.entries().count(), 6 * 24);
    }

    #[test]
    fn responsive_mining_avoids_expensive_hours() {
        let grid = two_bus(100.0);
        let w = DayWindow::single(1);
        let load = load_at(w, vec![1, 2], |_, h, k| if k == 1 { 60.0 + 4.0 * h as f64 } else { 0.0 });
        let dep = MiningDeployment::uniform(&[2], 20.0, Flexibility::PriceResponsive);
        let r = run(&grid, &load, Some(&dep));
        let d = &r.days[0];
        for h in 0..H {
            if d.mining[h * 2 + 1] > 0.0 {
                assert!(d.lmp[h * 2 + 1] <= 40.0 + 1e-9);
            }
        }
        let s = system_series(&r, &grid, &load, None, PriceAveraging::Unweighted).unwrap();
        let corr = correlation_report(&s);
        assert!(corr[0].r.unwrap() < 0.0, "{corr:?}");
    }

    #[test]
    fn empty_deployment_has_zero_mining_series() {
        let grid = two_bus(100.0);
        let w = DayWindow::single(1);
        let load = load_at(w, vec![1, 2], |_, h, k| (k as f64) * (50.0 + h as f64));
        let r = run(&grid, &load, Some(&MiningDeployment::empty()));
        let s = system_series(&r, &grid, &load, None, PriceAveraging::LoadWeighted).unwrap();
        assert!(s.mining.iter().all(|&m| m == 0.0));
        assert!(correlation_report(&s)[0].r.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn series_additivity_and_ordered_quantiles(base in 10.0f64..140.0, slope in 0.0f64..2.0, mine in 0.0f64..40.0) {
            let grid = two_bus(100.0);
            let w = DayWindow::single(1);
            let load = load_at(w, vec![1, 2], |_, h, k| if k == 1 { base + slope * h as f64 } else { 5.0 });
            let dep = MiningDeployment::uniform(&[1], mine, Flexibility::None);
            let r = run(&grid, &load, Some(&dep));
            let s = system_series(&r, &grid, &load, None, PriceAveraging::Unweighted).unwrap();
            for i in 0..s.hours.len() {
                prop_assert_eq!(s.total_load[i], s.mining[i] + s.non_mining[i]);
            }
            let st = price_statistics(&[&r]).unwrap();
            let (q10, q50, q90) = (st.metric("q10").unwrap(), st.metric("median").unwrap(), st.metric("q90").unwrap());
            for h in 0..H {
                prop_assert!(q10[h] <= q50[h] && q50[h] <= q90[h]);
            }
        }
    }
}
