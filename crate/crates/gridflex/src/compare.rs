//! Metric-by-metric differences between two result directories.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tables::{num, Table};

const CARBON_KEYS: [&str; 7] = [
    "base_emissions",
    "mining_emissions",
    "footprint",
    "base_minus_mining",
    "mining_energy",
    "base_per_unit",
    "mining_per_unit",
];

fn read_optional(path: &Path) -> Result<Option<String>> {
    if path.exists() {
        crate::error::read_to_string(path).map(Some)
    } else {
        Ok(None)
    }
}

fn csv_rows(text: &str, source: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::input(source.display().to_string(), e))?.clone();
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::input(source.display().to_string(), e))?;
        out.push(header.iter().map(String::from).zip(rec.iter().map(String::from)).collect());
    }
    Ok(out)
}

fn parse(v: &str, source: &Path) -> Result<Option<f64>> {
    if v.is_empty() {
        return Ok(None);
    }
    v.parse().map(Some).map_err(|_| Error::input(source.display().to_string(), format!("{v:?} is not a number")))
}

/// Scalar metrics found in a result directory, keyed by a dotted name.
pub fn collect_metrics(dir: &Path) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let carbon = dir.join("carbon.json");
    if let Some(text) = read_optional(&carbon)? {
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::input(carbon.display().to_string(), e))?;
        for key in CARBON_KEYS {
            if let Some(v) = doc.get(key).and_then(serde_json::Value::as_f64) {
                out.insert(format!("carbon.{key}"), v);
            }
        }
    }
    let rel = dir.join("reliability.csv");
    if let Some(text) = read_optional(&rel)? {
        for row in csv_rows(&text, &rel)? {
            let policy = row.get("policy").cloned().unwrap_or_default();
            for col in ["lolh_h_per_y", "eens_mwh_per_y"] {
                if let Some(v) = parse(row.get(col).map_or("", String::as_str), &rel)? {
                    out.insert(format!("reliability.{policy}.{col}"), v);
                }
            }
        }
    }
    let mining_stats = dir.join("mining/price_statistics.csv");
    let stats = if mining_stats.exists() { mining_stats } else { dir.join("base/price_statistics.csv") };
    if let Some(text) = read_optional(&stats)? {
        for row in csv_rows(&text, &stats)? {
            let (Some(m), Some(h), Some(v)) = (row.get("metric"), row.get("hour_of_day"), row.get("value")) else {
                continue;
            };
            if let Some(v) = parse(v, &stats)? {
                out.insert(format!("prices.{m}.h{:0>2}", h), v);
            }
        }
    }
    Ok(out)
}

/// `metric,base,variant,delta` over the metrics present in both
/// directories; delta is variant minus base.
pub fn compare_dirs(base: &Path, variant: &Path) -> Result<String> {
    let a = collect_metrics(base)?;
    let b = collect_metrics(variant)?;
    if a.is_empty() && b.is_empty() {
        return Err(Error::analysis("compare", "neither directory holds carbon, reliability or price results"));
    }
    let mut t = Table::new(&["metric", "base", "variant", "delta"]);
    for (k, va) in &a {
        match b.get(k) {
            Some(vb) => t.row([k.clone(), num(*va), num(*vb), num(vb - va)]),
            None => log::warn!("{k} only in {}", base.display()),
        }
    }
    for k in b.keys().filter(|k| !a.contains_key(*k)) {
        log::warn!("{k} only in {}", variant.display());
    }
    Ok(t.into_string())
}
