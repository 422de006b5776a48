//! TOML run manifest.
//!
//! ```toml
//! case = "case.json"
//! load = "load.csv"
//! renewables = "renewables.csv"
//! seed = 7
//! scenario = "future1"
//!
//! [window]
//! first = 221
//! last = 224
//!
//! [deployment]
//! sites = [2]
//! capacity_mw = 50
//! flexibility = "price_responsive"
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::path::{Path, PathBuf};

use gridflex_core::dispatch::FormulationOptions;
use gridflex_core::market::PriceAveraging;
use gridflex_core::mining::{Flexibility, SiteCriterion, DEFAULT_PRICE_THRESHOLD};
use gridflex_core::reliability::CurtailmentPolicy;
use gridflex_core::scenario::ScenarioSpec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub case: PathBuf,
    pub load: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewables: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scada: Option<ScadaInput>,
    #[serde(default)]
    pub seed: u64,
    pub window: WindowSpec,
    /// Uniform load reductions on selected days, applied before scaling.
    #[serde(default)]
    pub adjustments: Vec<Adjustment>,
    #[serde(default)]
    pub scenario: ScenarioRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deployment: Option<DeploymentSpec>,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub formulation: FormulationOptions,
    #[serde(default)]
    pub carbon: CarbonSpec,
    #[serde(default)]
    pub reliability: ReliabilitySpec,
    #[serde(default)]
    pub market: MarketSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub first: u32,
    pub last: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Adjustment {
    pub first: u32,
    pub last: u32,
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScadaInput {
    pub file: PathBuf,
    /// Readings above this are treated as spikes. Defaults to four times
    /// each series' 99th percentile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spike_threshold_mw: Option<f64>,
}

/// A preset name or explicit multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Preset(String),
    Custom(ScenarioSpec),
}

impl Default for ScenarioRef {
    fn default() -> Self {
        ScenarioRef::Preset("current".into())
    }
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<ScenarioSpec> {
        let spec = match self {
            ScenarioRef::Preset(name) => ScenarioSpec::preset(name).map_err(|e| Error::input("scenario", e))?,
            ScenarioRef::Custom(spec) => spec.clone(),
        };
        spec.validate().map_err(|e| Error::input("scenario", e))?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Explicit site buses. Exclusive with `criterion`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<SiteCriterion>,
    /// Per-site capacity. With `capacity_from_scada`, the peak of each
    /// site's county telemetry is scaled to this value.
    pub capacity_mw: f64,
    #[serde(default)]
    pub capacity_from_scada: bool,
    #[serde(default = "no_flexibility")]
    pub flexibility: Flexibility,
    #[serde(default = "default_threshold")]
    pub price_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals_file: Option<PathBuf>,
}

fn no_flexibility() -> Flexibility {
    Flexibility::None
}

fn default_threshold() -> f64 {
    DEFAULT_PRICE_THRESHOLD
}

impl DeploymentSpec {
    pub fn criterion(&self) -> Result<SiteCriterion> {
        match (&self.sites, &self.criterion) {
            (Some(buses), None) => Ok(SiteCriterion::Explicit { buses: buses.clone() }),
            (None, Some(c)) => Ok(c.clone()),
            (None, None) => Err(Error::input("deployment", "give either `sites` or `criterion`")),
            (Some(_), Some(_)) => Err(Error::input("deployment", "`sites` and `criterion` are exclusive")),
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| "mining".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub carbon: bool,
    pub reliability: bool,
    pub market: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Self { carbon: true, reliability: true, market: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub mip_gap: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_nodes: usize,
    /// Commitment before the first day, in generator order. All on when
    /// absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_commitment: Option<Vec<bool>>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            mip_gap: 1e-4,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            max_nodes: 100_000,
            initial_commitment: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarbonSpec {
    /// Further deployments to compare in the per-location table. Each uses
    /// its own sites and capacity.
    pub locations: Vec<DeploymentSpec>,
}

/// What the adequacy model sees as mining demand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandSource {
    /// The mining load cleared in real time (full capacity on failed days).
    #[default]
    Schedule,
    /// Installed capacity at every hour.
    Capacity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReliabilitySpec {
    pub trials: u64,
    pub years: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub renewable_noise: Option<f64>,
    /// `none`, `full_flex` or `partial_flex(f)`.
    pub policies: Vec<String>,
    pub demand: DemandSource,
    /// Added constant mining, GW. The sweep is skipped when empty.
    pub sizes_gw: Vec<f64>,
    pub scenarios: Vec<ScenarioRef>,
}

impl Default for ReliabilitySpec {
    fn default() -> Self {
        Self {
            trials: 10_000,
            years: 1,
            renewable_noise: None,
            policies: vec!["none".into(), "full_flex".into()],
            demand: DemandSource::Schedule,
            sizes_gw: Vec::new(),
            scenarios: vec![ScenarioRef::default()],
        }
    }
}

impl ReliabilitySpec {
    pub fn policies(&self) -> Result<Vec<CurtailmentPolicy>> {
        self.policies.iter().map(|p| parse_policy(p)).collect()
    }
}

pub fn parse_policy(s: &str) -> Result<CurtailmentPolicy> {
    let bad = || Error::input("reliability", format!("unknown policy {s:?} (none, full_flex or partial_flex(f))"));
    let policy = match s.trim() {
        "none" => CurtailmentPolicy::None,
        "full_flex" => CurtailmentPolicy::FullFlex,
        other => {
            let inner = other.strip_prefix("partial_flex(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
            CurtailmentPolicy::PartialFlex(inner.trim().parse().map_err(|_| bad())?)
        }
    };
    policy.validate().map_err(|e| Error::input("reliability", e))?;
    Ok(policy)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketSpec {
    /// How the system-wide average price is formed.
    pub averaging: PriceAveraging,
}

impl RunManifest {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let m: RunManifest = toml::from_str(text).map_err(|e| Error::input(source, e))?;
        if m.window.last < m.window.first {
            return Err(Error::input(source, format!("empty window {}..={}", m.window.first, m.window.last)));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&crate::error::read_to_string(path)?, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_manifest_gets_defaults() {
        let m = RunManifest::parse("case = 'c.json'\nload = 'l.csv'\n[window]\nfirst = 1\nlast = 2\n", "m").unwrap();
        assert_eq!(m.scenario.resolve().unwrap(), ScenarioSpec::current());
        assert!(m.analyses.carbon && m.formulation.network);
        assert_eq!(m.reliability.trials, 10_000);
        assert_eq!(m.solver.mip_gap, 1e-4);
    }

    #[test]
    fn scenario_accepts_presets_and_tables() {
        let text = "case = 'c'\nload = 'l'\nwindow = { first = 1, last = 1 }\n";
        let m = RunManifest::parse(&format!("{text}scenario = 'future2'\n"), "m").unwrap();
        assert_eq!(m.scenario.resolve().unwrap(), ScenarioSpec::future2());
        let custom = "[scenario]\nname = 'x'\nload_multiplier = 1.5\nrenewable_capacity_multiplier = 3.0\n";
        let m = RunManifest::parse(&format!("{text}{custom}"), "m").unwrap();
        assert_eq!(m.scenario.resolve().unwrap(), ScenarioSpec::new("x", 1.5, 3.0));
        let m = RunManifest::parse(&format!("{text}scenario = 'future9'\n"), "m").unwrap();
        assert!(m.scenario.resolve().is_err());
    }

    #[test]
    fn deployment_criteria_parse() {
        let text = "case = 'c'\nload = 'l'\nwindow = { first = 1, last = 1 }\n\
                    [deployment]\ncapacity_mw = 10\ncriterion = { low_lmp = { count = 3 } }\n";
        let m = RunManifest::parse(text, "m").unwrap();
        let dep = m.deployment.unwrap();
        assert_eq!(dep.criterion().unwrap(), SiteCriterion::LowLmp { count: 3 });
        assert_eq!(dep.flexibility, Flexibility::None);
        assert_eq!(dep.price_threshold, 40.0);
    }

    #[test]
    fn unknown_keys_and_empty_windows_fail() {
        assert!(RunManifest::parse("case='c'\nload='l'\nwindow={first=1,last=1}\nsed=3\n", "m").is_err());
        assert!(RunManifest::parse("case='c'\nload='l'\nwindow={first=2,last=1}\n", "m").is_err());
    }

    #[test]
    fn policies_parse() {
        assert_eq!(parse_policy("partial_flex(0.25)").unwrap(), CurtailmentPolicy::PartialFlex(0.25));
        assert_eq!(parse_policy("full_flex").unwrap(), CurtailmentPolicy::FullFlex);
        assert!(parse_policy("partial_flex(2)").is_err());
        assert!(parse_policy("most").is_err());
    }
}
