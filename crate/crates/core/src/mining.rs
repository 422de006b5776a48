//! Mining deployments: where the loads sit, how big they are, and when they
//! run.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::DispatchResult;
use crate::grid::GridCase;
use crate::math::haversine_km;
use crate::profile::{DayWindow, HourlyTable};
use crate::HOURS_PER_DAY;

/// Default price ceiling for price-responsive loads, $/MWh.
pub const DEFAULT_PRICE_THRESHOLD: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MiningError {
    #[error("low-LMP site selection needs a base-system dispatch result")]
    MissingBaseResult,
    #[error("price-responsive evaluation needs prices")]
    MissingPrices,
    #[error("command-following evaluation needs operator signals")]
    MissingSignals,
    #[error("bus {0} is not in the grid")]
    UnknownBus(u32),
    #[error("bus {0} has no coordinates")]
    MissingCoordinates(u32),
    #[error("site {bus} has no capacity for day {day}")]
    CapacityGap { bus: u32, day: u32 },
    #[error("signals do not cover site {bus} on day {day}")]
    SignalGap { bus: u32, day: u32 },
    #[error("price threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("capacity must be non-negative, got {0}")]
    BadCapacity(f64),
    #[error("price table does not cover day {0}")]
    PriceGap(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flexibility {
    None,
    PriceResponsive,
    CommandFollowing,
}

/// Installed capacity of one site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteCapacity {
    Constant(f64),
    /// Time-varying capacity, 24 values per day from `first_day` on.
    Hourly {
        first_day: u32,
        values: Vec<f64>,
    },
}

impl SiteCapacity {
    pub fn at(&self, day: u32, hour0: usize) -> Option<f64> {
        match self {
            SiteCapacity::Constant(c) => Some(*c),
            SiteCapacity::Hourly { first_day, values } => {
                let offset = day.checked_sub(*first_day)? as usize * HOURS_PER_DAY + hour0;
                values.get(offset).copied()
            }
        }
    }

    /// Scales an hourly county series so its peak equals `peak_mw`.
    pub fn scaled_profile(first_day: u32, series: &[f64], peak_mw: f64) -> Self {
        let peak = series.iter().copied().fold(0.0_f64, f64::max);
        let factor = if peak > 0.0 { peak_mw / peak } else { 0.0 };
        SiteCapacity::Hourly { first_day, values: series.iter().map(|v| v * factor).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningSite {
    pub bus: u32,
    pub capacity: SiteCapacity,
}

/// Operator signals for command-following loads, `[day][hour][site]` in the
/// order of `sites`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandSignals {
    pub window: DayWindow,
    pub sites: Vec<u32>,
    /// Whether the load is enrolled in a demand-response service.
    pub participation: Vec<bool>,
    /// Whether the operator orders a shutdown.
    pub command: Vec<bool>,
}

impl CommandSignals {
    fn lookup(&self, bus: u32, day: u32, hour0: usize) -> Option<(bool, bool)> {
        if !self.window.contains(day) {
            return None;
        }
        let k = self.sites.iter().position(|&s| s == bus)?;
        let idx = ((day - self.window.first) as usize * HOURS_PER_DAY + hour0) * self.sites.len() + k;
        Some((*self.participation.get(idx)?, *self.command.get(idx)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningDeployment {
    pub sites: Vec<MiningSite>,
    pub flexibility: Flexibility,
    pub price_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<CommandSignals>,
}

impl MiningDeployment {
    pub fn empty() -> Self {
        Self {
            sites: Vec::new(),
            flexibility: Flexibility::None,
            price_threshold: DEFAULT_PRICE_THRESHOLD,
            signals: None,
        }
    }

    /// Same constant capacity at every listed bus.
    pub fn uniform(buses: &[u32], capacity_mw: f64, flexibility: Flexibility) -> Self {
        Self {
            sites: buses.iter().map(|&bus| MiningSite { bus, capacity: SiteCapacity::Constant(capacity_mw) }).collect(),
            flexibility,
            price_threshold: DEFAULT_PRICE_THRESHOLD,
            signals: None,
        }
    }

    pub fn validate(&self, grid: &GridCase) -> Result<(), MiningError> {
        for site in &self.sites {
            if grid.bus(site.bus).is_none() {
                return Err(MiningError::UnknownBus(site.bus));
            }
            let bad = match &site.capacity {
                SiteCapacity::Constant(c) => (!(*c >= 0.0)).then_some(*c),
                SiteCapacity::Hourly { values, .. } => values.iter().copied().find(|v| !(*v >= 0.0)),
            };
            if let Some(c) = bad {
                return Err(MiningError::BadCapacity(c));
            }
        }
        if self.flexibility == Flexibility::PriceResponsive && !(self.price_threshold > 0.0) {
            return Err(MiningError::BadThreshold(self.price_threshold));
        }
        Ok(())
    }

    pub fn site_buses(&self) -> Vec<u32> {
        self.sites.iter().map(|s| s.bus).collect()
    }

    /// Always-on consumption for one day, `[hour][bus]` over `bus_ids`.
    /// Several sites on one bus add up.
    pub fn full_output_day(&self, bus_ids: &[u32], day: u32) -> Result<Vec<f64>, MiningError> {
        let nb = bus_ids.len();
        let mut out = vec![0.0; HOURS_PER_DAY * nb];
        for site in &self.sites {
            let Some(b) = bus_ids.iter().position(|&id| id == site.bus) else {
                continue;
            };
            for h in 0..HOURS_PER_DAY {
                let cap = site.capacity.at(day, h).ok_or(MiningError::CapacityGap { bus: site.bus, day })?;
                out[h * nb + b] += cap;
            }
        }
        Ok(out)
    }

    /// Consumption for one day given `[hour][bus]` prices (price-responsive)
    /// or the stored signals (command-following).
    pub fn day_schedule(&self, bus_ids: &[u32], day: u32, prices: Option<&[f64]>) -> Result<Vec<f64>, MiningError> {
        let nb = bus_ids.len();
        let mut out = vec![0.0; HOURS_PER_DAY * nb];
        let prices = match self.flexibility {
            Flexibility::PriceResponsive => Some(prices.ok_or(MiningError::MissingPrices)?),
            _ => None,
        };
        let signals = match self.flexibility {
            Flexibility::CommandFollowing => Some(self.signals.as_ref().ok_or(MiningError::MissingSignals)?),
            _ => None,
        };
        for site in &self.sites {
            let Some(b) = bus_ids.iter().position(|&id| id == site.bus) else {
                continue;
            };
            for h in 0..HOURS_PER_DAY {
                let cap = site.capacity.at(day, h).ok_or(MiningError::CapacityGap { bus: site.bus, day })?;
                let on = match self.flexibility {
                    Flexibility::None => true,
                    Flexibility::PriceResponsive => prices.expect("checked above")[h * nb + b] <= self.price_threshold,
                    Flexibility::CommandFollowing => {
                        let (enrolled, shutdown) = signals
                            .expect("checked above")
                            .lookup(site.bus, day, h)
                            .ok_or(MiningError::SignalGap { bus: site.bus, day })?;
                        !(enrolled && shutdown)
                    }
                };
                if on {
                    out[h * nb + b] += cap;
                }
            }
        }
        Ok(out)
    }
}

/// Mining consumption per bus over a window. Entries are either zero or the
/// site's full capacity.
pub type MiningSchedule = HourlyTable;

/// Applies the deployment's flexibility rule at every site-hour of `window`.
///
/// `prices` (per bus, same key order as `bus_ids`) must be given for
/// price-responsive deployments and is ignored otherwise.
pub fn evaluate_flexibility(
    deployment: &MiningDeployment,
    bus_ids: &[u32],
    window: DayWindow,
    prices: Option<&HourlyTable>,
) -> Result<MiningSchedule, MiningError> {
    let mut out = HourlyTable::zeros(window, bus_ids.to_vec());
    let price_table = match (deployment.flexibility, prices) {
        (Flexibility::PriceResponsive, None) => return Err(MiningError::MissingPrices),
        (Flexibility::PriceResponsive, Some(p)) => Some(p),
        _ => None,
    };
    for day in window.days() {
        let day_prices: Option<Vec<f64>> = match price_table {
            Some(p) => {
                if !p.window().contains(day) {
                    return Err(MiningError::PriceGap(day));
                }
                let mut v = vec![f64::INFINITY; HOURS_PER_DAY * bus_ids.len()];
                for (b, &id) in bus_ids.iter().enumerate() {
                    if let Some(k) = p.key_position(id) {
                        for h in 0..HOURS_PER_DAY {
                            v[h * bus_ids.len() + b] = p.get(day, h, k);
                        }
                    }
                }
                Some(v)
            }
            None => None,
        };
        let sched = deployment.day_schedule(bus_ids, day, day_prices.as_deref())?;
        out.day_mut(day).copy_from_slice(&sched);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
}

/// Rules for choosing mining buses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteCriterion {
    /// A hand-picked bus list.
    Explicit { buses: Vec<u32> },
    /// Buses within `radius_km` of a wind or solar unit, nearest first.
    CloseToRenewable { radius_km: f64, limit: Option<usize> },
    /// Buses within `radius_km` of any of `cities`, nearest first.
    CloseToCity { cities: Vec<GeoPoint>, radius_km: f64, limit: Option<usize> },
    /// The `count` buses with the lowest mean real-time LMP in a base run.
    LowLmp { count: usize },
    /// Every bus in the named counties.
    RealSites { counties: Vec<String> },
}

pub fn select_sites(
    grid: &GridCase,
    criterion: &SiteCriterion,
    base: Option<&DispatchResult>,
) -> Result<Vec<u32>, MiningError> {
    match criterion {
        SiteCriterion::Explicit { buses } => {
            for &b in buses {
                if grid.bus(b).is_none() {
                    return Err(MiningError::UnknownBus(b));
                }
            }
            let mut seen = BTreeSet::new();
            Ok(buses.iter().copied().filter(|b| seen.insert(*b)).collect())
        }
        SiteCriterion::CloseToRenewable { radius_km, limit } => {
            let mut points = Vec::new();
            for g in grid.generators.iter().filter(|g| g.is_renewable()) {
                let bus = grid.bus(g.bus_id).ok_or(MiningError::UnknownBus(g.bus_id))?;
                points.push(coordinates(bus.id, bus.latitude, bus.longitude)?);
            }
            within_radius(grid, &points, *radius_km, *limit)
        }
        SiteCriterion::CloseToCity { cities, radius_km, limit } => within_radius(grid, cities, *radius_km, *limit),
        SiteCriterion::LowLmp { count } => {
            let base = base.ok_or(MiningError::MissingBaseResult)?;
            let mut ranked = base.mean_lmp_by_bus();
            ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            Ok(ranked.into_iter().take(*count).map(|(bus, _)| bus).collect())
        }
        SiteCriterion::RealSites { counties } => {
            let mut out = BTreeSet::new();
            for c in counties {
                if let Some(buses) = grid.counties.get(c) {
                    out.extend(buses.iter().copied());
                }
            }
            Ok(out.into_iter().collect())
        }
    }
}

fn coordinates(bus: u32, lat: Option<f64>, lon: Option<f64>) -> Result<GeoPoint, MiningError> {
    match (lat, lon) {
        (Some(latitude), Some(longitude)) => Ok(GeoPoint { latitude, longitude }),
        _ => Err(MiningError::MissingCoordinates(bus)),
    }
}

fn within_radius(
    grid: &GridCase,
    points: &[GeoPoint],
    radius_km: f64,
    limit: Option<usize>,
) -> Result<Vec<u32>, MiningError> {
    let mut hits: Vec<(f64, u32)> = Vec::new();
    for bus in &grid.buses {
        let (Some(lat), Some(lon)) = (bus.latitude, bus.longitude) else {
            continue;
        };
        let nearest =
            points.iter().map(|p| haversine_km(lat, lon, p.latitude, p.longitude)).fold(f64::INFINITY, f64::min);
        if nearest <= radius_km {
            hits.push((nearest, bus.id));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let take = limit.unwrap_or(usize::MAX);
    Ok(hits.into_iter().take(take).map(|(_, id)| id).collect())
}

/// Time-varying real-site capacities: each bus in a county gets that
/// county's hourly series scaled to `peak_mw`.
pub fn real_site_capacities(
    grid: &GridCase,
    county_series: &BTreeMap<String, (u32, Vec<f64>)>,
    peak_mw: f64,
) -> Vec<MiningSite> {
    let mut sites = Vec::new();
    for (county, (first_day, series)) in county_series {
        if let Some(buses) = grid.counties.get(county) {
            for &bus in buses {
                sites.push(MiningSite { bus, capacity: SiteCapacity::scaled_profile(*first_day, series, peak_mw) });
            }
        }
    }
    sites.sort_by_key(|s| s.bus);
    sites
}
