//! Cleaning and county aggregation of metered large-load telemetry.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;

/// Sampling interval of raw meter data.
pub const SAMPLE_SECONDS: i64 = 300;
const SAMPLES_PER_HOUR: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScadaError {
    #[error("series {0} is empty")]
    Empty(String),
    #[error("series {facility}: sample {index} breaks the {step}s spacing")]
    Spacing { facility: String, index: usize, step: i64 },
    #[error("series are not aligned: {0}")]
    Misaligned(String),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points to correlate, got {0}")]
    TooShort(usize),
    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,
}

/// Readings from one facility at uniform spacing starting at `start`
/// (Unix seconds).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMeterSeries {
    pub facility_id: String,
    pub county: String,
    pub start: i64,
    pub step_seconds: i64,
    pub readings: Vec<f64>,
}

impl RawMeterSeries {
    /// Builds a series from `(timestamp, MW)` samples, which must be strictly
    /// increasing at exactly [`SAMPLE_SECONDS`] spacing.
    pub fn from_samples(facility_id: String, county: String, samples: &[(i64, f64)]) -> Result<Self, ScadaError> {
        let Some(&(start, _)) = samples.first() else {
            return Err(ScadaError::Empty(facility_id));
        };
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].0 - w[0].0 != SAMPLE_SECONDS {
                return Err(ScadaError::Spacing { facility: facility_id, index: i + 1, step: SAMPLE_SECONDS });
            }
        }
        Ok(Self {
            facility_id,
            county,
            start,
            step_seconds: SAMPLE_SECONDS,
            readings: samples.iter().map(|s| s.1).collect(),
        })
    }

    pub fn timestamp(&self, index: usize) -> i64 {
        self.start + index as i64 * self.step_seconds
    }
}

/// Hourly mean county consumption beginning at `start_hour` (hours since the
/// Unix epoch).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountyMiningSeries {
    pub county: String,
    pub start_hour: i64,
    pub values: Vec<f64>,
}

/// Replaces negative readings with zero and readings above
/// `spike_threshold` with the previous retained value (zero for a leading
/// spike). Everything else is left alone.
pub fn clean_series(raw: &RawMeterSeries, spike_threshold: f64) -> RawMeterSeries {
    let mut out = raw.clone();
    let mut previous = 0.0;
    for v in &mut out.readings {
        if *v < 0.0 {
            *v = 0.0;
        } else if !(*v <= spike_threshold) {
            *v = previous;
        }
        previous = *v;
    }
    out
}

/// Default spike threshold: four times the installed capacity when known,
/// otherwise four times the 99th percentile of the readings.
pub fn default_spike_threshold(raw: &RawMeterSeries, installed_capacity: Option<f64>) -> f64 {
    if let Some(cap) = installed_capacity {
        return 4.0 * cap;
    }
    let finite: Vec<f64> = raw.readings.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return f64::INFINITY;
    }
    4.0 * math::quantile_sorted(&math::sorted(&finite), 0.99)
}

fn check_alignment(raws: &[RawMeterSeries]) -> Result<(), ScadaError> {
    let Some(first) = raws.first() else {
        return Ok(());
    };
    for r in raws {
        if r.readings.is_empty() {
            return Err(ScadaError::Empty(r.facility_id.clone()));
        }
        if r.step_seconds != SAMPLE_SECONDS {
            return Err(ScadaError::Misaligned(alloc::format!("{} is not at 5-minute spacing", r.facility_id)));
        }
        if r.start != first.start || r.readings.len() != first.readings.len() {
            return Err(ScadaError::Misaligned(alloc::format!(
                "{} covers a different period than {}",
                r.facility_id,
                first.facility_id
            )));
        }
    }
    if first.start.rem_euclid(3600) != 0 || first.readings.len() % SAMPLES_PER_HOUR != 0 {
        return Err(ScadaError::Misaligned(String::from("series must cover whole clock hours")));
    }
    Ok(())
}

/// Sum of all facilities' readings per five-minute sample.
pub fn total_five_minute(raws: &[RawMeterSeries]) -> Result<Vec<f64>, ScadaError> {
    check_alignment(raws)?;
    let len = raws.first().map_or(0, |r| r.readings.len());
    let mut total = alloc::vec![0.0; len];
    for r in raws {
        for (t, v) in total.iter_mut().zip(&r.readings) {
            *t += v;
        }
    }
    Ok(total)
}

/// Per county, hourly mean of the summed facility readings. Counties that
/// read zero throughout are dropped. Output is sorted by county.
pub fn aggregate_hourly(raws: &[RawMeterSeries]) -> Result<Vec<CountyMiningSeries>, ScadaError> {
    check_alignment(raws)?;
    let mut by_county: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in raws {
        let sum = by_county.entry(&r.county).or_insert_with(|| alloc::vec![0.0; r.readings.len()]);
        for (s, v) in sum.iter_mut().zip(&r.readings) {
            *s += v;
        }
    }
    let start_hour = raws.first().map_or(0, |r| r.start.div_euclid(3600));
    Ok(by_county
        .into_iter()
        .filter(|(_, sum)| sum.iter().any(|&v| v != 0.0))
        .map(|(county, sum)| CountyMiningSeries {
            county: county.into(),
            start_hour,
            values: sum.chunks(SAMPLES_PER_HOUR).map(|c| c.iter().sum::<f64>() / SAMPLES_PER_HOUR as f64).collect(),
        })
        .collect())
}

/// Pearson correlation coefficient.
pub fn correlate(a: &[f64], b: &[f64]) -> Result<f64, ScadaError> {
    if a.len() != b.len() {
        return Err(ScadaError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(ScadaError::TooShort(a.len()));
    }
    let ma = math::mean(a);
    let mb = math::mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(ScadaError::ZeroVariance);
    }
    Ok((sab / (math::sqrt(saa) * math::sqrt(sbb))).clamp(-1.0, 1.0))
}
