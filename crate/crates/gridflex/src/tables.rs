//! Delimited text tables: hourly profiles in, result tables out.

use std::collections::BTreeSet;
use std::path::Path;

use gridflex_core::profile::{DayWindow, HourlyTable, LoadProfile, RenewableProfile};
use gridflex_core::{GridCase, HOURS_PER_DAY};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Formats a number for output. Shortest round-trip form, with negative zero
/// folded into zero.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// An in-memory CSV table.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_string(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }
}

#[derive(Deserialize)]
struct ProfileRow {
    entity_id: u32,
    day: u32,
    hour: u32,
    value_mw: f64,
}

/// Reads `entity_id,day,hour,value_mw` records.
pub fn read_profile_records(text: &str, source: &str) -> Result<Vec<(u32, u32, u32, f64)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    check_header(&mut reader, &["entity_id", "day", "hour", "value_mw"], source)?;
    let mut out = Vec::new();
    for row in reader.deserialize::<ProfileRow>() {
        let r = row.map_err(|e| Error::input(source, e))?;
        out.push((r.entity_id, r.day, r.hour, r.value_mw));
    }
    Ok(out)
}

pub(crate) fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
    source: &str,
) -> Result<()> {
    let header = reader.headers().map_err(|e| Error::input(source, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::input(
            source,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(())
}

fn record_window(records: &[(u32, u32, u32, f64)], source: &str) -> Result<DayWindow> {
    let first = records.iter().map(|r| r.1).min();
    let last = records.iter().map(|r| r.1).max();
    match (first, last) {
        (Some(f), Some(l)) => DayWindow::new(f, l).map_err(|e| Error::input(source, e)),
        _ => Err(Error::input(source, "profile has no rows")),
    }
}

/// Dense base-load profile. Columns are every bus flagged `has_load` plus
/// any other bus that appears in the table; each column must be complete.
pub fn load_profile(grid: &GridCase, text: &str, source: &str) -> Result<LoadProfile> {
    let records = read_profile_records(text, source)?;
    let window = record_window(&records, source)?;
    let known: BTreeSet<u32> = grid.bus_ids().into_iter().collect();
    let mut keys: BTreeSet<u32> = grid.buses.iter().filter(|b| b.has_load).map(|b| b.id).collect();
    for r in &records {
        if !known.contains(&r.0) {
            return Err(Error::input(source, format!("bus {} is not in the grid case", r.0)));
        }
        keys.insert(r.0);
    }
    let table =
        HourlyTable::from_records(window, keys.into_iter().collect(), records).map_err(|e| Error::input(source, e))?;
    table.ensure_non_negative().map_err(|e| Error::input(source, e))?;
    Ok(table)
}

/// Renewable availability per wind or solar generator in the table. Units
/// left out run at full capacity.
pub fn renewable_profile(grid: &GridCase, text: &str, source: &str) -> Result<RenewableProfile> {
    let records = read_profile_records(text, source)?;
    let window = record_window(&records, source)?;
    let mut keys = BTreeSet::new();
    for r in &records {
        match grid.generators.iter().find(|g| g.id == r.0) {
            Some(g) if g.is_renewable() => {
                keys.insert(r.0);
            }
            Some(_) => return Err(Error::input(source, format!("generator {} is not wind or solar", r.0))),
            None => return Err(Error::input(source, format!("generator {} is not in the grid case", r.0))),
        }
    }
    let table =
        HourlyTable::from_records(window, keys.into_iter().collect(), records).map_err(|e| Error::input(source, e))?;
    table
        .ensure_within(|id| grid.generators.iter().find(|g| g.id == id).map_or(0.0, |g| g.p_max))
        .map_err(|e| Error::input(source, e))?;
    Ok(table)
}

/// Writes a table back in the input layout, or with another key column name
/// (`bus,day,hour,mw` for schedules).
pub fn hourly_table_csv(table: &HourlyTable, header: [&str; 4]) -> String {
    let mut out = Table::new(&header);
    for (k, key) in table.keys().iter().enumerate() {
        for day in table.window().days() {
            for h in 0..HOURS_PER_DAY {
                out.row([key.to_string(), day.to_string(), (h + 1).to_string(), num(table.get(day, h, k))]);
            }
        }
    }
    out.into_string()
}

pub const PROFILE_HEADER: [&str; 4] = ["entity_id", "day", "hour", "value_mw"];

pub(crate) fn read_file(path: &Path) -> Result<String> {
    crate::error::read_to_string(path)
}
