//! Dense hourly profiles indexed by `(day, hour, entity)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::HOURS_PER_DAY;

/// Inclusive range of day numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DayWindow {
    pub first: u32,
    pub last: u32,
}

impl DayWindow {
    pub fn new(first: u32, last: u32) -> Result<Self, ProfileError> {
        if last < first {
            return Err(ProfileError::EmptyWindow { first, last });
        }
        Ok(Self { first, last })
    }

    pub fn single(day: u32) -> Self {
        Self { first: day, last: day }
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, day: u32) -> bool {
        (self.first..=self.last).contains(&day)
    }

    pub fn contains_window(&self, other: &DayWindow) -> bool {
        self.contains(other.first) && self.contains(other.last)
    }

    pub fn days(&self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("empty day window {first}..={last}")]
    EmptyWindow { first: u32, last: u32 },
    #[error("hour {0} outside 1..=24")]
    HourOutOfRange(u32),
    #[error("missing entry for entity {entity}, day {day}, hour {hour}")]
    MissingEntry { entity: u32, day: u32, hour: u32 },
    #[error("duplicate entry for entity {entity}, day {day}, hour {hour}")]
    DuplicateEntry { entity: u32, day: u32, hour: u32 },
    #[error("negative load {value} MW for bus {entity}, day {day}, hour {hour}")]
    NegativeLoad { entity: u32, day: u32, hour: u32, value: f64 },
    #[error("entity {0} is not part of this profile")]
    UnknownEntity(u32),
    #[error("value {value} MW for generator {entity}, day {day}, hour {hour} outside [0, {p_max}]")]
    RenewableOutOfRange { entity: u32, day: u32, hour: u32, value: f64, p_max: f64 },
    #[error("days {first}..={last} are not inside the profile window")]
    DaysOutsideWindow { first: u32, last: u32 },
    #[error("adjustment factor must be positive, got {0}")]
    BadFactor(f64),
    #[error("table shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
}

/// Values over a day window, 24 hours per day and one column per entity
/// (bus or generator id). Storage is `[day][hour][entity]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HourlyTable {
    window: DayWindow,
    keys: Vec<u32>,
    values: Vec<f64>,
}

/// Base load per bus.
pub type LoadProfile = HourlyTable;
/// Available output per renewable generator.
pub type RenewableProfile = HourlyTable;

impl HourlyTable {
    pub fn zeros(window: DayWindow, keys: Vec<u32>) -> Self {
        let len = window.len() * HOURS_PER_DAY * keys.len();
        Self { window, keys, values: vec![0.0; len] }
    }

    pub fn from_values(window: DayWindow, keys: Vec<u32>, values: Vec<f64>) -> Result<Self, ProfileError> {
        let expected = window.len() * HOURS_PER_DAY * keys.len();
        if values.len() != expected {
            return Err(ProfileError::Shape { expected, got: values.len() });
        }
        Ok(Self { window, keys, values })
    }

    /// Builds a dense table from `(entity, day, hour 1..=24, value)` records.
    /// Every key must have a value at every hour of the window.
    pub fn from_records(
        window: DayWindow,
        keys: Vec<u32>,
        records: impl IntoIterator<Item = (u32, u32, u32, f64)>,
    ) -> Result<Self, ProfileError> {
        let mut table = Self::zeros(window, keys);
        let pos: BTreeMap<u32, usize> = table.keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut seen = vec![false; table.values.len()];
        for (entity, day, hour, value) in records {
            if !(1..=24).contains(&hour) {
                return Err(ProfileError::HourOutOfRange(hour));
            }
            if !window.contains(day) {
                return Err(ProfileError::DaysOutsideWindow { first: day, last: day });
            }
            let k = *pos.get(&entity).ok_or(ProfileError::UnknownEntity(entity))?;
            let idx = table.index(day, hour as usize - 1, k);
            if seen[idx] {
                return Err(ProfileError::DuplicateEntry { entity, day, hour });
            }
            seen[idx] = true;
            table.values[idx] = value;
        }
        if let Some(idx) = seen.iter().position(|s| !s) {
            let (day, hour, k) = table.locate(idx);
            return Err(ProfileError::MissingEntry { entity: table.keys[k], day, hour: hour as u32 + 1 });
        }
        Ok(table)
    }

    pub fn window(&self) -> DayWindow {
        self.window
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn key_position(&self, key: u32) -> Option<usize> {
        self.keys.iter().position(|&k| k == key)
    }

    fn index(&self, day: u32, hour0: usize, k: usize) -> usize {
        ((day - self.window.first) as usize * HOURS_PER_DAY + hour0) * self.keys.len() + k
    }

    fn locate(&self, idx: usize) -> (u32, usize, usize) {
        let nk = self.keys.len();
        let k = idx % nk;
        let dh = idx / nk;
        (self.window.first + (dh / HOURS_PER_DAY) as u32, dh % HOURS_PER_DAY, k)
    }

    /// Value at `day`, zero-based `hour0`, entity position `k`.
    pub fn get(&self, day: u32, hour0: usize, k: usize) -> f64 {
        self.values[self.index(day, hour0, k)]
    }

    pub fn set(&mut self, day: u32, hour0: usize, k: usize, value: f64) {
        let idx = self.index(day, hour0, k);
        self.values[idx] = value;
    }

    /// All 24 hours of `day`, laid out `[hour][entity]`.
    pub fn day(&self, day: u32) -> &[f64] {
        let start = self.index(day, 0, 0);
        &self.values[start..start + HOURS_PER_DAY * self.keys.len()]
    }

    pub fn day_mut(&mut self, day: u32) -> &mut [f64] {
        let start = self.index(day, 0, 0);
        let len = HOURS_PER_DAY * self.keys.len();
        &mut self.values[start..start + len]
    }

    /// Sum over entities for every hour, in chronological order.
    pub fn hourly_totals(&self) -> Vec<f64> {
        self.values.chunks(self.keys.len().max(1)).map(|c| c.iter().sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Copy restricted to `window`, which must lie inside this table's window.
    pub fn slice(&self, window: DayWindow) -> Result<Self, ProfileError> {
        if !self.window.contains_window(&window) {
            return Err(ProfileError::DaysOutsideWindow { first: window.first, last: window.last });
        }
        let start = self.index(window.first, 0, 0);
        let len = window.len() * HOURS_PER_DAY * self.keys.len();
        Ok(Self { window, keys: self.keys.clone(), values: self.values[start..start + len].to_vec() })
    }

    pub fn ensure_non_negative(&self) -> Result<(), ProfileError> {
        if let Some(idx) = self.values.iter().position(|v| !(*v >= 0.0)) {
            let (day, hour, k) = self.locate(idx);
            return Err(ProfileError::NegativeLoad {
                entity: self.keys[k],
                day,
                hour: hour as u32 + 1,
                value: self.values[idx],
            });
        }
        Ok(())
    }

    /// Checks `0 <= value <= p_max` with `p_max` looked up per key.
    pub fn ensure_within(&self, p_max: impl Fn(u32) -> f64) -> Result<(), ProfileError> {
        for (idx, &v) in self.values.iter().enumerate() {
            let (day, hour, k) = self.locate(idx);
            let cap = p_max(self.keys[k]);
            if !(v >= 0.0 && v <= cap) {
                return Err(ProfileError::RenewableOutOfRange {
                    entity: self.keys[k],
                    day,
                    hour: hour as u32 + 1,
                    value: v,
                    p_max: cap,
                });
            }
        }
        Ok(())
    }
}

/// Multiplies every entry on `days` by `factor`, leaving other days intact.
///
/// An empty range (`last < first`) is a no-op and logs a warning.
pub fn apply_window_adjustment(
    profile: &HourlyTable,
    first: u32,
    last: u32,
    factor: f64,
) -> Result<HourlyTable, ProfileError> {
    if !(factor > 0.0) {
        return Err(ProfileError::BadFactor(factor));
    }
    let mut out = profile.clone();
    if last < first {
        log::warn!("load adjustment over empty day range {first}..={last} ignored");
        return Ok(out);
    }
    if !profile.window.contains(first) || !profile.window.contains(last) {
        return Err(ProfileError::DaysOutsideWindow { first, last });
    }
    for day in first..=last {
        for v in out.day_mut(day) {
            *v *= factor;
        }
    }
    Ok(out)
}
