//! Grid case model and validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    pub county: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub longitude: Option<f64>,
    #[serde(default = "default_true")]
    pub has_load: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuelType {
    Coal,
    Gas,
    Nuclear,
    Hydro,
    Wind,
    Solar,
    Other,
}

impl FuelType {
    pub const ALL: [FuelType; 7] = [
        FuelType::Coal,
        FuelType::Gas,
        FuelType::Nuclear,
        FuelType::Hydro,
        FuelType::Wind,
        FuelType::Solar,
        FuelType::Other,
    ];

    /// Variable renewables: zero marginal cost, profile-limited output and no
    /// forced-outage model.
    pub fn is_renewable(self) -> bool {
        matches!(self, FuelType::Wind | FuelType::Solar)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FuelType::Coal => "coal",
            FuelType::Gas => "gas",
            FuelType::Nuclear => "nuclear",
            FuelType::Hydro => "hydro",
            FuelType::Wind => "wind",
            FuelType::Solar => "solar",
            FuelType::Other => "other",
        }
    }

    /// Default life-cycle emission factor in tCO2e/MWh.
    ///
    /// Medians of published life-cycle assessments (IPCC AR5 Annex III);
    /// override per generator for study-specific values.
    pub fn default_emission_factor(self) -> f64 {
        match self {
            FuelType::Coal => 0.820,
            FuelType::Gas => 0.490,
            FuelType::Nuclear => 0.012,
            FuelType::Hydro => 0.024,
            FuelType::Wind => 0.011,
            FuelType::Solar => 0.048,
            FuelType::Other => 0.230,
        }
    }
}

/// Default MTTF/MTTR in hours by unit size, from the IEEE Reliability Test
/// System generator table. Returns the entry whose nominal size is closest.
pub fn default_outage_rates(fuel: FuelType, p_max: f64) -> (f64, f64) {
    // (nominal MW, fuel, MTTF, MTTR)
    const TABLE: [(f64, FuelType, f64, f64); 9] = [
        (12.0, FuelType::Other, 2940.0, 60.0),
        (20.0, FuelType::Gas, 450.0, 50.0),
        (50.0, FuelType::Hydro, 1980.0, 20.0),
        (76.0, FuelType::Coal, 1960.0, 40.0),
        (100.0, FuelType::Other, 1200.0, 50.0),
        (155.0, FuelType::Coal, 960.0, 40.0),
        (197.0, FuelType::Other, 950.0, 50.0),
        (350.0, FuelType::Coal, 1150.0, 100.0),
        (400.0, FuelType::Nuclear, 1100.0, 150.0),
    ];
    let pick = |rows: &mut dyn Iterator<Item = &(f64, FuelType, f64, f64)>| {
        rows.min_by(|a, b| (a.0 - p_max).abs().total_cmp(&(b.0 - p_max).abs())).map(|r| (r.2, r.3))
    };
    let same_fuel = pick(&mut TABLE.iter().filter(|r| r.1 == fuel));
    same_fuel.or_else(|| pick(&mut TABLE.iter())).expect("table is non-empty")
}

/// One piece of a convex cost curve: from the previous breakpoint (or 0 MW)
/// up to `breakpoint_mw`, output costs `slope` $/MWh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSegment {
    pub breakpoint_mw: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: u32,
    pub bus_id: u32,
    pub fuel_type: FuelType,
    pub p_min: f64,
    pub p_max: f64,
    #[serde(default)]
    pub cost_curve: Vec<CostSegment>,
    #[serde(default)]
    pub no_load_cost: f64,
    #[serde(default)]
    pub startup_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_limit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_up: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_down: Option<u32>,
    pub mttf: f64,
    pub mttr: f64,
    pub emission_factor: f64,
}

impl Generator {
    pub fn is_renewable(&self) -> bool {
        self.fuel_type.is_renewable()
    }

    /// Segments clipped to `p_max`, as `(width MW, slope)` pairs starting at
    /// 0 MW. An empty curve means free energy up to `p_max`.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        if self.cost_curve.is_empty() {
            return alloc::vec![(self.p_max, 0.0)];
        }
        let mut out = Vec::with_capacity(self.cost_curve.len());
        let mut prev = 0.0;
        let last = self.cost_curve.len() - 1;
        for (k, seg) in self.cost_curve.iter().enumerate() {
            let end = if k == last { self.p_max } else { seg.breakpoint_mw.min(self.p_max) };
            let width = end - prev;
            if width > 0.0 {
                out.push((width, seg.slope));
            }
            prev = prev.max(end);
            if prev >= self.p_max {
                break;
            }
        }
        out
    }

    /// Energy cost of producing `p` MW for one hour, excluding no-load cost.
    pub fn energy_cost(&self, p: f64) -> f64 {
        let mut left = p;
        let mut cost = 0.0;
        for (width, slope) in self.segments() {
            let take = left.min(width);
            if take <= 0.0 {
                break;
            }
            cost += take * slope;
            left -= take;
        }
        cost
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub from_bus: u32,
    pub to_bus: u32,
    pub reactance: f64,
    pub flow_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    /// County name to the buses it contains.
    pub counties: BTreeMap<String, Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("case has no buses")]
    NoBuses,
    #[error("base_mva must be positive, got {0}")]
    BaseMva(f64),
    #[error("duplicate bus id {0}")]
    DuplicateBus(u32),
    #[error("bus {0} has no county")]
    MissingCounty(u32),
    #[error("duplicate generator id {0}")]
    DuplicateGenerator(u32),
    #[error("{what} references missing bus {bus}")]
    MissingBus { what: String, bus: u32 },
    #[error("branch {from}-{to}: {reason}")]
    InvalidBranch { from: u32, to: u32, reason: &'static str },
    #[error("generator {id}: {reason}")]
    InvalidGenerator { id: u32, reason: &'static str },
    #[error("generator {id}: cost curve is not convex (slope {next} after {prev})")]
    NonConvexCost { id: u32, prev: f64, next: f64 },
    #[error("county {0} has no buses")]
    EmptyCounty(String),
    #[error("bus {bus} is in county {field:?} but listed under {listed:?}")]
    CountyMismatch { bus: u32, field: String, listed: String },
    #[error("bus {0} missing from the county map")]
    UnmappedBus(u32),
    #[error("network is split into {} islands: {islands:?}", islands.len())]
    Disconnected { islands: Vec<Vec<u32>> },
}

impl GridCase {
    /// Checks every structural invariant of the case.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.buses.is_empty() {
            return Err(GridError::NoBuses);
        }
        if !(self.base_mva > 0.0) {
            return Err(GridError::BaseMva(self.base_mva));
        }
        let mut ids = BTreeSet::new();
        for bus in &self.buses {
            if !ids.insert(bus.id) {
                return Err(GridError::DuplicateBus(bus.id));
            }
            if bus.county.trim().is_empty() {
                return Err(GridError::MissingCounty(bus.id));
            }
        }
        for br in &self.branches {
            for end in [br.from_bus, br.to_bus] {
                if !ids.contains(&end) {
                    return Err(GridError::MissingBus {
                        what: alloc::format!("branch {}-{}", br.from_bus, br.to_bus),
                        bus: end,
                    });
                }
            }
            let bad = |reason| GridError::InvalidBranch { from: br.from_bus, to: br.to_bus, reason };
            if br.from_bus == br.to_bus {
                return Err(bad("branch is a self-loop"));
            }
            if !(br.reactance > 0.0) {
                return Err(bad("reactance must be positive"));
            }
            if !(br.flow_limit > 0.0) {
                return Err(bad("flow_limit must be positive"));
            }
        }
        let mut gen_ids = BTreeSet::new();
        for g in &self.generators {
            if !gen_ids.insert(g.id) {
                return Err(GridError::DuplicateGenerator(g.id));
            }
            if !ids.contains(&g.bus_id) {
                return Err(GridError::MissingBus { what: alloc::format!("generator {}", g.id), bus: g.bus_id });
            }
            validate_generator(g)?;
        }
        self.validate_counties(&ids)?;
        let islands = self.islands();
        if islands.len() > 1 {
            return Err(GridError::Disconnected { islands });
        }
        Ok(())
    }

    fn validate_counties(&self, ids: &BTreeSet<u32>) -> Result<(), GridError> {
        let mut listed: BTreeMap<u32, &str> = BTreeMap::new();
        for (county, buses) in &self.counties {
            if buses.is_empty() {
                return Err(GridError::EmptyCounty(county.clone()));
            }
            for b in buses {
                if !ids.contains(b) {
                    return Err(GridError::MissingBus { what: alloc::format!("county {county}"), bus: *b });
                }
                listed.insert(*b, county);
            }
        }
        for bus in &self.buses {
            match listed.get(&bus.id) {
                None => return Err(GridError::UnmappedBus(bus.id)),
                Some(c) if *c != bus.county => {
                    return Err(GridError::CountyMismatch {
                        bus: bus.id,
                        field: bus.county.clone(),
                        listed: String::from(*c),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Connected components of the branch graph, each sorted by bus id.
    pub fn islands(&self) -> Vec<Vec<u32>> {
        let pos = self.bus_positions();
        let n = self.buses.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for br in &self.branches {
            if let (Some(&a), Some(&b)) = (pos.get(&br.from_bus), pos.get(&br.to_bus)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(self.buses[i].id);
        }
        let mut out: Vec<Vec<u32>> = groups.into_values().collect();
        for g in &mut out {
            g.sort_unstable();
        }
        out.sort();
        out
    }

    /// Bus id to its position in `buses`.
    pub fn bus_positions(&self) -> BTreeMap<u32, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn bus_ids(&self) -> Vec<u32> {
        self.buses.iter().map(|b| b.id).collect()
    }

    pub fn generator_ids(&self) -> Vec<u32> {
        self.generators.iter().map(|g| g.id).collect()
    }

    pub fn bus(&self, id: u32) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }
}

fn validate_generator(g: &Generator) -> Result<(), GridError> {
    let bad = |reason| GridError::InvalidGenerator { id: g.id, reason };
    if !(g.p_min >= 0.0) {
        return Err(bad("p_min must be non-negative"));
    }
    if !(g.p_max >= g.p_min) {
        return Err(bad("p_max must be at least p_min"));
    }
    if !(g.emission_factor >= 0.0) {
        return Err(bad("emission_factor must be non-negative"));
    }
    if !(g.no_load_cost >= 0.0) || !(g.startup_cost >= 0.0) {
        return Err(bad("no_load_cost and startup_cost must be non-negative"));
    }
    if let Some(r) = g.ramp_limit {
        if !(r > 0.0) {
            return Err(bad("ramp_limit must be positive"));
        }
    }
    if !g.is_renewable() && !(g.mttf > 0.0 && g.mttr > 0.0) {
        return Err(bad("mttf and mttr must be positive for dispatchable units"));
    }
    let mut prev_bp = 0.0;
    for (k, seg) in g.cost_curve.iter().enumerate() {
        if !(seg.breakpoint_mw > prev_bp) {
            return Err(bad("cost-curve breakpoints must be strictly increasing and positive"));
        }
        if k > 0 {
            let prev = g.cost_curve[k - 1].slope;
            if seg.slope < prev {
                return Err(GridError::NonConvexCost { id: g.id, prev, next: seg.slope });
            }
        }
        prev_bp = seg.breakpoint_mw;
    }
    if !g.is_renewable() && g.p_max > 0.0 {
        match g.cost_curve.last() {
            None => return Err(bad("dispatchable unit needs a cost curve")),
            Some(last) if last.breakpoint_mw < g.p_max => {
                return Err(bad("last cost-curve breakpoint must reach p_max"))
            }
            _ => {}
        }
    }
    Ok(())
}
