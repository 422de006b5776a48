//! Metered load telemetry and operator signal files.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, NaiveDateTime, Timelike};
use gridflex_core::mining::CommandSignals;
use gridflex_core::profile::DayWindow;
use gridflex_core::scada::{self, CountyMiningSeries, RawMeterSeries};
use gridflex_core::HOURS_PER_DAY;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::tables::{check_header, num, Table};

#[derive(Deserialize)]
struct ScadaRow {
    facility_id: String,
    county: String,
    timestamp_iso8601: String,
    mw: f64,
}

fn parse_timestamp(s: &str) -> Option<i64> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    // Timestamps without an offset are taken as UTC.
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.and_utc().timestamp())
}

/// Reads `facility_id,county,timestamp_iso8601,mw` rows into one series per
/// facility, sorted by facility id and timestamp.
pub fn read_scada(text: &str, source: &str) -> Result<Vec<RawMeterSeries>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(&mut reader, &["facility_id", "county", "timestamp_iso8601", "mw"], source)?;
    let mut by_facility: BTreeMap<String, (String, Vec<(i64, f64)>)> = BTreeMap::new();
    for (line, row) in reader.deserialize::<ScadaRow>().enumerate() {
        let r = row.map_err(|e| Error::input(source, e))?;
        let ts = parse_timestamp(&r.timestamp_iso8601).ok_or_else(|| {
            Error::input(source, format!("line {}: bad timestamp {:?}", line + 2, r.timestamp_iso8601))
        })?;
        let entry = by_facility.entry(r.facility_id.clone()).or_insert_with(|| (r.county.clone(), Vec::new()));
        if entry.0 != r.county {
            return Err(Error::input(
                source,
                format!("facility {} is listed in both {} and {}", r.facility_id, entry.0, r.county),
            ));
        }
        entry.1.push((ts, r.mw));
    }
    let mut out = Vec::with_capacity(by_facility.len());
    for (facility, (county, mut samples)) in by_facility {
        samples.sort_by_key(|s| s.0);
        out.push(RawMeterSeries::from_samples(facility, county, &samples).map_err(|e| Error::input(source, e))?);
    }
    Ok(out)
}

/// Cleans every series and aggregates by county. `spike_threshold_mw`
/// overrides the per-series default.
pub fn county_series(raws: &[RawMeterSeries], spike_threshold_mw: Option<f64>) -> Result<Vec<CountyMiningSeries>> {
    let cleaned: Vec<RawMeterSeries> = raws
        .iter()
        .map(|r| {
            let limit = spike_threshold_mw.unwrap_or_else(|| scada::default_spike_threshold(r, None));
            scada::clean_series(r, limit)
        })
        .collect();
    scada::aggregate_hourly(&cleaned).map_err(|e| Error::input("scada", e))
}

/// Day number (day of the year, counting on past the year end) and hour
/// of day for an hour index since the epoch.
fn day_hour(epoch_hour: i64, first: i64) -> (i64, u32) {
    let at = |h: i64| DateTime::from_timestamp(h * 3600, 0).expect("timestamp in range");
    let start = at(first);
    let t = at(epoch_hour);
    let start_day = (first - start.hour() as i64).div_euclid(HOURS_PER_DAY as i64);
    let day = (epoch_hour - t.hour() as i64).div_euclid(HOURS_PER_DAY as i64);
    (start.ordinal() as i64 + (day - start_day), t.hour() + 1)
}

/// `county,day,hour,mw` table of aggregated series.
pub fn county_series_csv(series: &[CountyMiningSeries]) -> String {
    let mut t = Table::new(&["county", "day", "hour", "mw"]);
    for s in series {
        for (i, v) in s.values.iter().enumerate() {
            let (day, hour) = day_hour(s.start_hour + i as i64, s.start_hour);
            t.row([s.county.clone(), day.to_string(), hour.to_string(), num(*v)]);
        }
    }
    t.into_string()
}

/// County series keyed for capacity scaling, as `(first day, values)`. The
/// telemetry must start at midnight.
pub fn capacity_series(series: &[CountyMiningSeries]) -> Result<BTreeMap<String, (u32, Vec<f64>)>> {
    let mut out = BTreeMap::new();
    for s in series {
        let (day, hour) = day_hour(s.start_hour, s.start_hour);
        if hour != 1 {
            return Err(Error::input("scada", format!("county {} telemetry does not start at midnight", s.county)));
        }
        out.insert(s.county.clone(), (day as u32, s.values.clone()));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct SignalRow {
    bus: u32,
    day: u32,
    hour: u32,
    participation: String,
    command: String,
}

fn flag(s: &str) -> Option<bool> {
    match s {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

/// Reads `bus,day,hour,participation,command` rows (flags as 0/1). Every
/// site must be covered at every hour of `window`.
pub fn read_signals(text: &str, source: &str, sites: &[u32], window: DayWindow) -> Result<CommandSignals> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(&mut reader, &["bus", "day", "hour", "participation", "command"], source)?;
    let n = window.len() * HOURS_PER_DAY * sites.len();
    let mut participation = vec![None; n];
    let mut command = vec![false; n];
    for row in reader.deserialize::<SignalRow>() {
        let r = row.map_err(|e| Error::input(source, e))?;
        let Some(k) = sites.iter().position(|&s| s == r.bus) else {
            continue;
        };
        if !window.contains(r.day) || !(1..=24).contains(&r.hour) {
            continue;
        }
        let (Some(p), Some(c)) = (flag(&r.participation), flag(&r.command)) else {
            return Err(Error::input(
                source,
                format!("bus {} day {} hour {}: flags must be 0 or 1", r.bus, r.day, r.hour),
            ));
        };
        let idx = ((r.day - window.first) as usize * HOURS_PER_DAY + r.hour as usize - 1) * sites.len() + k;
        participation[idx] = Some(p);
        command[idx] = c;
    }
    if let Some(idx) = participation.iter().position(Option::is_none) {
        let site = sites[idx % sites.len()];
        let hour = idx / sites.len();
        return Err(Error::input(
            source,
            format!(
                "no signal for bus {site}, day {}, hour {}",
                window.first + (hour / HOURS_PER_DAY) as u32,
                hour % HOURS_PER_DAY + 1
            ),
        ));
    }
    Ok(CommandSignals {
        window,
        sites: sites.to_vec(),
        participation: participation.into_iter().map(|p| p.unwrap_or(false)).collect(),
        command,
    })
}
