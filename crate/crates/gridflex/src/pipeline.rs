//! The end-to-end study driven by a manifest: inputs, the two market runs
//! (without and with mining), and the analyses on top of them.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gridflex_core::carbon::{mining_footprint, CarbonReport, LocationFootprint};
use gridflex_core::dispatch::{run_window, DispatchOptions, DispatchResult, WindowInputs};
use gridflex_core::market::{correlation_report, county_lmp, price_statistics, system_series, PriceStatistics};
use gridflex_core::mining::{
    real_site_capacities, select_sites, Flexibility, MiningDeployment, MiningSite, SiteCapacity, SiteCriterion,
};
use gridflex_core::profile::{apply_window_adjustment, DayWindow, HourlyTable, LoadProfile, RenewableProfile};
use gridflex_core::reliability::{
    scenario_sweep, AdequacySystem, Assessment, CurtailmentPolicy, MiningDemand, ReliabilityIndices, ReliabilityOptions,
};
use gridflex_core::scada::CountyMiningSeries;
use gridflex_core::scenario::{apply_scenario, ScenarioSpec};
use gridflex_core::solver::MilpOptions;
use gridflex_core::{GridCase, HOURS_PER_DAY};
use rayon::prelude::*;
use serde_json::json;

use crate::case::{case_to_json, parse_case};
use crate::error::{Error, Result};
use crate::manifest::{DemandSource, DeploymentSpec, RunManifest};
use crate::output::Staging;
use crate::parallel::RayonRunner;
use crate::tables::{self, num, opt_num, Table};
use crate::telemetry;

const H: usize = HOURS_PER_DAY;

/// Command-line values that take precedence over the manifest.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

/// Validated inputs over the study window.
pub struct Inputs {
    /// Case and profiles after load adjustments, before scenario scaling.
    pub base_grid: GridCase,
    pub base_load: LoadProfile,
    pub base_renewables: Option<RenewableProfile>,
    pub scenario: ScenarioSpec,
    /// The scaled system that is simulated.
    pub grid: GridCase,
    pub load: LoadProfile,
    pub renewables: Option<RenewableProfile>,
    pub window: DayWindow,
    pub county_mining: Option<Vec<CountyMiningSeries>>,
}

/// A resolved mining deployment.
#[derive(Clone, Debug)]
pub struct Deployment {
    pub label: String,
    pub deployment: MiningDeployment,
}

pub struct Pipeline {
    pub manifest: RunManifest,
    root: PathBuf,
    pub inputs: Inputs,
    options: DispatchOptions,
    base: Option<DispatchResult>,
    deployment: Option<Option<Deployment>>,
    mining: Option<DispatchResult>,
}

impl Pipeline {
    pub fn open(path: &Path, overrides: &Overrides) -> Result<Self> {
        let manifest = RunManifest::load(path)?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(manifest, root, overrides)
    }

    /// `root` is the directory relative input paths are resolved against.
    pub fn new(mut manifest: RunManifest, root: PathBuf, overrides: &Overrides) -> Result<Self> {
        if let Some(seed) = overrides.seed {
            manifest.seed = seed;
        }
        if let Some(trials) = overrides.trials {
            manifest.reliability.trials = trials;
        }
        let inputs = load_inputs(&manifest, &root)?;
        let s = &manifest.solver;
        let mut milp = MilpOptions { relative_gap: s.mip_gap, max_nodes: s.max_nodes, ..MilpOptions::default() };
        milp.lp.feasibility_tol = s.feasibility_tol;
        milp.lp.optimality_tol = s.optimality_tol;
        let options = DispatchOptions {
            formulation: manifest.formulation.clone(),
            milp,
            initial_commitment: s.initial_commitment.clone(),
        };
        Ok(Self { manifest, root, inputs, options, base: None, deployment: None, mining: None })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.root.join(p)
    }

    fn dispatch(&self, deployment: Option<&MiningDeployment>, run: &str) -> Result<DispatchResult> {
        let i = &self.inputs;
        let inputs = WindowInputs {
            grid: &i.grid,
            load: &i.load,
            renewables: i.renewables.as_ref(),
            deployment,
            window: i.window,
        };
        let result = run_window(inputs, &self.options).map_err(|e| Error::input(format!("dispatch ({run} run)"), e))?;
        for d in &result.infeasible_days {
            log::warn!("{run} run: day {} excluded ({})", d.day, d.reason());
        }
        if result.days.is_empty() {
            return Err(Error::AllInfeasible { run: run.into(), first: i.window.first, last: i.window.last });
        }
        Ok(result)
    }

    fn needs_base(spec: &DeploymentSpec) -> bool {
        matches!(spec.criterion, Some(SiteCriterion::LowLmp { .. }))
    }

    /// Resolves a deployment spec against the (scaled) grid. Low-LMP
    /// selection ranks buses by the base run's prices.
    fn resolve_deployment(&self, spec: &DeploymentSpec, base: Option<&DispatchResult>) -> Result<Deployment> {
        let ctx = |e: &dyn std::fmt::Display| Error::input("deployment", e);
        let grid = &self.inputs.grid;
        let criterion = spec.criterion()?;
        let buses = select_sites(grid, &criterion, base).map_err(|e| ctx(&e))?;
        let sites = if spec.capacity_from_scada {
            let Some(series) = &self.inputs.county_mining else {
                return Err(ctx(&"capacity_from_scada needs a `scada` input"));
            };
            let by_bus = real_site_capacities(grid, &telemetry::capacity_series(series)?, spec.capacity_mw);
            let mut sites = Vec::with_capacity(buses.len());
            for &bus in &buses {
                match by_bus.iter().find(|s| s.bus == bus) {
                    Some(s) => sites.push(s.clone()),
                    None => return Err(ctx(&format!("no telemetry for the county of bus {bus}"))),
                }
            }
            sites
        } else {
            buses.iter().map(|&bus| MiningSite { bus, capacity: SiteCapacity::Constant(spec.capacity_mw) }).collect()
        };
        let signals = match (&spec.signals_file, spec.flexibility) {
            (Some(file), _) => {
                let path = self.resolve(file);
                let text = tables::read_file(&path)?;
                Some(telemetry::read_signals(&text, &path.display().to_string(), &buses, self.inputs.window)?)
            }
            (None, Flexibility::CommandFollowing) => return Err(ctx(&"command-following needs a `signals_file`")),
            (None, _) => None,
        };
        let deployment =
            MiningDeployment { sites, flexibility: spec.flexibility, price_threshold: spec.price_threshold, signals };
        deployment.validate(grid).map_err(|e| ctx(&e))?;
        if spec.capacity_mw.is_nan() || spec.capacity_mw < 0.0 {
            return Err(ctx(&format!("capacity_mw must be non-negative, got {}", spec.capacity_mw)));
        }
        Ok(Deployment { label: spec.label(), deployment })
    }

    pub fn base_run(&mut self) -> Result<&DispatchResult> {
        if self.base.is_none() {
            self.base = Some(self.dispatch(None, "base")?);
        }
        Ok(self.base.as_ref().expect("just set"))
    }

    pub fn deployment(&mut self) -> Result<Option<&Deployment>> {
        if self.deployment.is_none() {
            let resolved = match self.manifest.deployment.clone() {
                None => None,
                Some(spec) => {
                    if Self::needs_base(&spec) {
                        self.base_run()?;
                    }
                    Some(self.resolve_deployment(&spec, self.base.as_ref())?)
                }
            };
            self.deployment = Some(resolved);
        }
        Ok(self.deployment.as_ref().expect("just set").as_ref())
    }

    fn has_sites(&mut self) -> Result<bool> {
        Ok(self.deployment()?.is_some_and(|d| !d.deployment.sites.is_empty()))
    }

    /// Runs the base and mining markets, in parallel when neither depends on
    /// the other. Without mining sites the mining run is the base run.
    pub fn ensure_runs(&mut self) -> Result<()> {
        self.deployment()?;
        if !self.has_sites()? {
            let base = self.base_run()?.clone();
            self.mining.get_or_insert(base);
            return Ok(());
        }
        if self.mining.is_some() && self.base.is_some() {
            return Ok(());
        }
        let dep = self.deployment.clone().flatten().expect("has sites");
        let this = &*self;
        let (base, mining) = rayon::join(
            || match &this.base {
                Some(_) => Ok(None),
                None => this.dispatch(None, "base").map(Some),
            },
            || match &this.mining {
                Some(_) => Ok(None),
                None => this.dispatch(Some(&dep.deployment), &dep.label).map(Some),
            },
        );
        if let Some(b) = base? {
            self.base = Some(b);
        }
        if let Some(m) = mining? {
            self.mining = Some(m);
        }
        Ok(())
    }

    fn runs(&mut self) -> Result<(&DispatchResult, &DispatchResult)> {
        self.ensure_runs()?;
        Ok(self.ensured_runs())
    }

    fn ensured_runs(&self) -> (&DispatchResult, &DispatchResult) {
        (self.base.as_ref().expect("ensured"), self.mining.as_ref().expect("ensured"))
    }

    /// The effective manifest, after command-line overrides.
    pub fn write_manifest(&self, out: &Staging) -> Result<()> {
        out.write("manifest.json", &pretty(&self.manifest))
    }

    pub fn write_ingest(&self, out: &Staging) -> Result<()> {
        let i = &self.inputs;
        out.write("inputs/case.json", &case_to_json(&i.grid))?;
        out.write("inputs/load.csv", &tables::hourly_table_csv(&i.load, tables::PROFILE_HEADER))?;
        if let Some(r) = &i.renewables {
            out.write("inputs/renewables.csv", &tables::hourly_table_csv(r, tables::PROFILE_HEADER))?;
        }
        if let Some(series) = &i.county_mining {
            out.write("inputs/county_mining.csv", &telemetry::county_series_csv(series))?;
        }
        Ok(())
    }

    pub fn write_deployment(&mut self, out: &Staging) -> Result<()> {
        let doc = match self.deployment()? {
            None => json!(null),
            Some(d) => json!({ "label": d.label, "deployment": d.deployment }),
        };
        out.write("deployment.json", &pretty(&doc))
    }

    pub fn write_dispatch(&mut self, out: &Staging) -> Result<()> {
        let sites = self.deployment()?.map(|d| d.deployment.site_buses()).unwrap_or_default();
        let (base, mining) = self.runs()?;
        write_run_tables(out, "base", base)?;
        if !sites.is_empty() {
            write_run_tables(out, "mining", mining)?;
        }
        out.write("mining_schedule.csv", &schedule_csv(mining, &sites))
    }

    pub fn write_carbon(&mut self, out: &Staging) -> Result<()> {
        let label = self.deployment()?.map_or_else(|| "none".to_string(), |d| d.label.clone());
        let extra = self.manifest.carbon.locations.clone();
        if extra.iter().any(Self::needs_base) {
            self.base_run()?;
        }
        self.ensure_runs()?;
        let (base, mining) = self.ensured_runs();
        let grid = &self.inputs.grid;
        let report = mining_footprint(base, mining, grid, &label).map_err(|e| Error::analysis("carbon", e))?;
        out.write("carbon.json", &pretty(&report))?;

        let this = &*self;
        let base = this.base.as_ref().expect("ensured");
        let others: Vec<Result<CarbonReport>> = extra
            .par_iter()
            .map(|spec| {
                let dep = this.resolve_deployment(spec, Some(base))?;
                let run = if dep.deployment.sites.is_empty() {
                    base.clone()
                } else {
                    this.dispatch(Some(&dep.deployment), &dep.label)?
                };
                mining_footprint(base, &run, grid, &dep.label).map_err(|e| Error::analysis("carbon", e))
            })
            .collect();
        let mut t = Table::new(&["location", "energy_mwh", "footprint_t", "per_unit_t_per_mwh"]);
        for r in std::iter::once(Ok(report)).chain(others) {
            let row = LocationFootprint::from(&r?);
            t.row([row.location, num(row.energy_mwh), num(row.footprint_t), opt_num(row.per_unit_t_per_mwh)]);
        }
        out.write("carbon_locations.csv", &t.into_string())
    }

    fn reliability_options(&self) -> ReliabilityOptions {
        let r = &self.manifest.reliability;
        ReliabilityOptions {
            trials: r.trials,
            seed: self.manifest.seed,
            years: r.years,
            renewable_noise: r.renewable_noise,
        }
    }

    /// Hourly mining demand over the window for the adequacy model.
    fn mining_demand(&mut self) -> Result<MiningDemand> {
        let window = self.inputs.window;
        let Some(dep) = self.deployment()?.cloned() else {
            return Ok(MiningDemand::None);
        };
        let bus_ids = self.inputs.grid.bus_ids();
        let full = |day| -> Result<Vec<f64>> {
            dep.deployment.full_output_day(&bus_ids, day).map_err(|e| Error::input("deployment", e))
        };
        let use_schedule = self.manifest.reliability.demand == DemandSource::Schedule
            && !dep.deployment.sites.is_empty()
            && dep.deployment.flexibility == Flexibility::PriceResponsive;
        let mining = if use_schedule { Some(self.runs()?.1) } else { None };
        let nb = bus_ids.len();
        let mut out = Vec::with_capacity(window.len() * H);
        for day in window.days() {
            let values = match mining.and_then(|m| m.day(day)) {
                Some(rec) => rec.mining.clone(),
                None => full(day)?,
            };
            out.extend((0..H).map(|h| values[h * nb..(h + 1) * nb].iter().sum::<f64>()));
        }
        Ok(MiningDemand::Hourly(out))
    }

    pub fn write_reliability(&mut self, out: &Staging) -> Result<()> {
        let spec = self.manifest.reliability.clone();
        let policies = spec.policies()?;
        let options = self.reliability_options();
        let demand = self.mining_demand()?;
        let ctx = |e: &dyn std::fmt::Display| Error::analysis("reliability", e);
        let i = &self.inputs;
        let system = AdequacySystem::from_grid(&i.grid, &i.load, i.renewables.as_ref()).map_err(|e| ctx(&e))?;

        let mut rows: Vec<(String, ReliabilityIndices)> = Vec::new();
        let baseline = Assessment::new(&system, &MiningDemand::None, CurtailmentPolicy::None, options.clone())
            .map_err(|e| ctx(&e))?;
        rows.push(("baseline".into(), baseline.run(&RayonRunner)));
        for policy in &policies {
            let a = Assessment::new(&system, &demand, *policy, options.clone()).map_err(|e| ctx(&e))?;
            rows.push((policy.label(), a.run(&RayonRunner)));
        }
        let mut t = Table::new(&["policy", "lolh_h_per_y", "eens_mwh_per_y", "ci_lolh", "ci_eens", "trials", "seed"]);
        for (label, x) in rows {
            t.row([
                label,
                num(x.lolh),
                num(x.eens),
                num(x.lolh_ci),
                num(x.eens_ci),
                x.trials.to_string(),
                x.seed.to_string(),
            ]);
        }
        out.write("reliability.csv", &t.into_string())?;

        if !spec.sizes_gw.is_empty() {
            let scenarios = spec.scenarios.iter().map(|s| s.resolve()).collect::<Result<Vec<_>>>()?;
            let empty = HourlyTable::zeros(i.window, Vec::new());
            let ren = i.base_renewables.as_ref().unwrap_or(&empty);
            let sweep = scenario_sweep(
                &i.base_grid,
                &i.base_load,
                ren,
                &spec.sizes_gw,
                &scenarios,
                &policies,
                &options,
                &RayonRunner,
            )
            .map_err(|e| ctx(&e))?;
            let mut t = Table::new(&[
                "scenario",
                "policy",
                "added_gw",
                "lolh_h_per_y",
                "eens_mwh_per_y",
                "ci_lolh",
                "ci_eens",
                "trials",
                "seed",
            ]);
            for r in sweep {
                let x = r.indices;
                t.row([
                    r.scenario,
                    r.policy,
                    num(r.added_gw),
                    num(x.lolh),
                    num(x.eens),
                    num(x.lolh_ci),
                    num(x.eens_ci),
                    x.trials.to_string(),
                    x.seed.to_string(),
                ]);
            }
            out.write("reliability_sweep.csv", &t.into_string())?;
        }
        Ok(())
    }

    pub fn write_market(&mut self, out: &Staging) -> Result<()> {
        let has_sites = self.has_sites()?;
        let averaging = self.manifest.market.averaging;
        self.ensure_runs()?;
        let (base, mining) = self.ensured_runs();
        let i = &self.inputs;
        let ctx = |e: gridflex_core::market::MarketError| Error::analysis("market", e);
        let mut stats: Vec<PriceStatistics> = Vec::new();
        let runs: Vec<(&str, &DispatchResult)> =
            if has_sites { vec![("base", base), ("mining", mining)] } else { vec![("base", base)] };
        for (name, run) in runs {
            let county = county_lmp(run, &i.grid).map_err(ctx)?;
            let mut t = Table::new(&["county", "day", "hour", "lmp"]);
            for (c, county_name) in county.counties.iter().enumerate() {
                for (di, day) in county.days.iter().enumerate() {
                    for h in 0..H {
                        t.row([county_name.clone(), day.to_string(), (h + 1).to_string(), num(county.get(di, h, c))]);
                    }
                }
            }
            out.write(&format!("{name}/county_lmp.csv"), &t.into_string())?;

            let s = price_statistics(&[run]).map_err(ctx)?;
            out.write(&format!("{name}/price_statistics.csv"), &statistics_csv(&s))?;
            stats.push(s);

            let series = system_series(run, &i.grid, &i.load, None, averaging).map_err(ctx)?;
            let mut t = Table::new(&[
                "day",
                "hour",
                "average_lmp",
                "mining",
                "non_mining",
                "total_load",
                "renewable",
                "net_load",
            ]);
            for (k, (day, hour)) in series.hours.iter().enumerate() {
                t.row([
                    day.to_string(),
                    hour.to_string(),
                    num(series.average_lmp[k]),
                    num(series.mining[k]),
                    num(series.non_mining[k]),
                    num(series.total_load[k]),
                    num(series.renewable[k]),
                    num(series.net_load[k]),
                ]);
            }
            out.write(&format!("{name}/system_series.csv"), &t.into_string())?;

            let mut t = Table::new(&["x", "y", "r"]);
            for row in correlation_report(&series) {
                t.row([row.x, row.y, opt_num(row.r)]);
            }
            out.write(&format!("{name}/correlation.csv"), &t.into_string())?;
        }
        if let [base_stats, mining_stats] = &stats[..] {
            let delta = base_stats.delta(mining_stats).map_err(ctx)?;
            out.write("price_delta.csv", &statistics_csv(&delta))?;
        }
        Ok(())
    }

    /// Run record and infeasible-day log for the market runs performed so far.
    pub fn write_run_record(&self, out: &Staging) -> Result<()> {
        let i = &self.inputs;
        let dep = self.deployment.clone().flatten();
        let mut runs = Vec::new();
        if let Some(b) = &self.base {
            runs.push(("base".to_string(), b));
        }
        if let (Some(m), Some(d)) = (&self.mining, &dep) {
            if !d.deployment.sites.is_empty() {
                runs.push((d.label.clone(), m));
            }
        }
        let mut t = Table::new(&["run", "day", "stage", "reason"]);
        let mut run_docs = serde_json::Map::new();
        for (name, r) in &runs {
            for d in &r.infeasible_days {
                t.row([name.clone(), d.day.to_string(), format!("{:?}", d.stage).to_lowercase(), d.reason().into()]);
            }
            run_docs.insert(
                name.clone(),
                json!({
                    "solved_days": r.days.iter().map(|d| d.day).collect::<Vec<_>>(),
                    "infeasible_days": r.infeasible_days.iter()
                        .map(|d| json!({ "day": d.day, "reason": d.reason() }))
                        .collect::<Vec<_>>(),
                }),
            );
        }
        let s = &self.manifest.solver;
        let record = json!({
            "window": { "first": i.window.first, "last": i.window.last },
            "scenario": i.scenario,
            "deployment": dep.as_ref().map(|d| json!({
                "label": d.label,
                "sites": d.deployment.site_buses(),
                "flexibility": d.deployment.flexibility,
                "price_threshold": d.deployment.price_threshold,
            })),
            "tolerances": {
                "mip_relative_gap": s.mip_gap,
                "lp_feasibility": s.feasibility_tol,
                "lp_optimality": s.optimality_tol,
            },
            "formulation": self.manifest.formulation,
            "seed": self.manifest.seed,
            "runs": run_docs,
            "version": env!("CARGO_PKG_VERSION"),
        });
        out.write("run.json", &pretty(&record))?;
        if !runs.is_empty() {
            out.write("infeasible_days.csv", &t.into_string())?;
        }
        Ok(())
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_inputs(m: &RunManifest, root: &Path) -> Result<Inputs> {
    let path = |p: &Path| root.join(p);
    let case_path = path(&m.case);
    let grid = parse_case(&tables::read_file(&case_path)?, &case_path.display().to_string())?;
    let load_path = path(&m.load);
    let mut load = tables::load_profile(&grid, &tables::read_file(&load_path)?, &load_path.display().to_string())?;
    let window = DayWindow::new(m.window.first, m.window.last).map_err(|e| Error::input("window", e))?;
    for a in &m.adjustments {
        load = apply_window_adjustment(&load, a.first, a.last, a.factor).map_err(|e| Error::input("adjustments", e))?;
    }
    let load = load.slice(window).map_err(|e| Error::input(load_path.display().to_string(), e))?;
    let renewables = match &m.renewables {
        Some(p) => {
            let rp = path(p);
            let src = rp.display().to_string();
            let table = tables::renewable_profile(&grid, &tables::read_file(&rp)?, &src)?;
            Some(table.slice(window).map_err(|e| Error::input(src, e))?)
        }
        None => None,
    };
    let county_mining = match &m.scada {
        Some(s) => {
            let sp = path(&s.file);
            let raws = telemetry::read_scada(&tables::read_file(&sp)?, &sp.display().to_string())?;
            Some(telemetry::county_series(&raws, s.spike_threshold_mw)?)
        }
        None => None,
    };
    let scenario = m.scenario.resolve()?;
    let empty = HourlyTable::zeros(window, Vec::new());
    let (sgrid, sload, sren) = apply_scenario(&grid, &load, renewables.as_ref().unwrap_or(&empty), &scenario)
        .map_err(|e| Error::input("scenario", e))?;
    Ok(Inputs {
        base_grid: grid,
        base_load: load,
        renewables: renewables.as_ref().map(|_| sren),
        base_renewables: renewables,
        scenario,
        grid: sgrid,
        load: sload,
        window,
        county_mining,
    })
}

fn write_run_tables(out: &Staging, dir: &str, r: &DispatchResult) -> Result<()> {
    let nb = r.bus_ids.len();
    let ng = r.gen_ids.len();
    let mut lmp = Table::new(&["bus", "day", "hour", "lmp_usd_per_mwh"]);
    for (b, id) in r.bus_ids.iter().enumerate() {
        for d in &r.days {
            for h in 0..H {
                lmp.row([id.to_string(), d.day.to_string(), (h + 1).to_string(), num(d.lmp[h * nb + b])]);
            }
        }
    }
    let mut gen = Table::new(&["gen", "day", "hour", "mw"]);
    let mut commit = Table::new(&["gen", "day", "hour", "committed"]);
    for (g, id) in r.gen_ids.iter().enumerate() {
        for d in &r.days {
            for h in 0..H {
                let (id, day, hour) = (id.to_string(), d.day.to_string(), (h + 1).to_string());
                gen.row([id.clone(), day.clone(), hour.clone(), num(d.generation[h * ng + g])]);
                commit.row([id, day, hour, u8::from(d.commitment[h * ng + g]).to_string()]);
            }
        }
    }
    out.write(&format!("{dir}/lmp.csv"), &lmp.into_string())?;
    out.write(&format!("{dir}/generation.csv"), &gen.into_string())?;
    out.write(&format!("{dir}/commitment.csv"), &commit.into_string())
}

/// `bus,day,hour,mw` at every site over the solved days.
fn schedule_csv(r: &DispatchResult, sites: &[u32]) -> String {
    let nb = r.bus_ids.len();
    let hosts: BTreeSet<usize> =
        r.bus_ids.iter().enumerate().filter(|(_, id)| sites.contains(id)).map(|(b, _)| b).collect();
    let mut t = Table::new(&["bus", "day", "hour", "mw"]);
    for &b in &hosts {
        for d in &r.days {
            for h in 0..H {
                t.row([r.bus_ids[b].to_string(), d.day.to_string(), (h + 1).to_string(), num(d.mining[h * nb + b])]);
            }
        }
    }
    t.into_string()
}

fn statistics_csv(s: &PriceStatistics) -> String {
    let mut t = Table::new(&["metric", "hour_of_day", "value"]);
    for (metric, hour, value) in s.entries() {
        t.row([metric.to_string(), hour.to_string(), num(value)]);
    }
    t.into_string()
}
