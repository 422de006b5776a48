//! JSON grid case documents.
//!
//! ```json
//! {
//!   "base_mva": 100,
//!   "buses": [{"id": 1, "county": "Travis"}, ...],
//!   "branches": [{"from_bus": 1, "to_bus": 2, "reactance": 0.1, "flow_limit": 500}],
//!   "generators": [{"id": 1, "bus_id": 1, "fuel_type": "gas", "p_min": 0, "p_max": 200,
//!                   "cost_curve": [{"breakpoint_mw": 200, "slope": 20}]}],
//!   "counties": {"Travis": [1]}
//! }
//! ```
//!
//! `emission_factor`, `mttf` and `mttr` may be omitted; they are filled from
//! the fuel-type and unit-size defaults. `base_mva` defaults to 100.

use std::collections::BTreeMap;

use gridflex_core::grid::{default_outage_rates, Branch, Bus, CostSegment, FuelType, Generator, GridCase};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDoc {
    #[serde(default = "default_base_mva")]
    base_mva: f64,
    buses: Vec<Bus>,
    #[serde(default)]
    branches: Vec<Branch>,
    generators: Vec<GeneratorDoc>,
    counties: BTreeMap<String, Vec<u32>>,
}

fn default_base_mva() -> f64 {
    100.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    id: u32,
    bus_id: u32,
    fuel_type: FuelType,
    p_min: f64,
    p_max: f64,
    #[serde(default)]
    cost_curve: Vec<CostSegment>,
    #[serde(default)]
    no_load_cost: f64,
    #[serde(default)]
    startup_cost: f64,
    ramp_limit: Option<f64>,
    min_up: Option<u32>,
    min_down: Option<u32>,
    mttf: Option<f64>,
    mttr: Option<f64>,
    emission_factor: Option<f64>,
}

impl GeneratorDoc {
    fn into_generator(self) -> Generator {
        let (mttf, mttr) = default_outage_rates(self.fuel_type, self.p_max);
        Generator {
            id: self.id,
            bus_id: self.bus_id,
            fuel_type: self.fuel_type,
            p_min: self.p_min,
            p_max: self.p_max,
            cost_curve: self.cost_curve,
            no_load_cost: self.no_load_cost,
            startup_cost: self.startup_cost,
            ramp_limit: self.ramp_limit,
            min_up: self.min_up,
            min_down: self.min_down,
            mttf: self.mttf.unwrap_or(mttf),
            mttr: self.mttr.unwrap_or(mttr),
            emission_factor: self.emission_factor.unwrap_or_else(|| self.fuel_type.default_emission_factor()),
        }
    }
}

/// Parses and validates a case document. `source` names the document in
/// error messages.
pub fn parse_case(text: &str, source: &str) -> Result<GridCase> {
    let doc: CaseDoc = serde_json::from_str(text).map_err(|e| Error::input(source, e))?;
    let case = GridCase {
        base_mva: doc.base_mva,
        buses: doc.buses,
        branches: doc.branches,
        generators: doc.generators.into_iter().map(GeneratorDoc::into_generator).collect(),
        counties: doc.counties,
    };
    case.validate().map_err(|e| Error::input(source, e))?;
    Ok(case)
}

/// Writes a case with every field explicit, so defaults are pinned.
pub fn case_to_json(case: &GridCase) -> String {
    let mut s = serde_json::to_string_pretty(case).expect("grid case serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::strategy::Strategy;

    const TWO_BUS: &str = r#"{
      "buses": [{"id": 1, "county": "A"}, {"id": 2, "county": "B"}],
      "branches": [{"from_bus": 1, "to_bus": 2, "reactance": 0.1, "flow_limit": 100}],
      "generators": [
        {"id": 1, "bus_id": 1, "fuel_type": "coal", "p_min": 0, "p_max": 200,
         "cost_curve": [{"breakpoint_mw": 200, "slope": 20}]},
        {"id": 2, "bus_id": 2, "fuel_type": "wind", "p_min": 0, "p_max": 50}
      ],
      "counties": {"A": [1], "B": [2]}
    }"#;

    #[test]
    fn defaults_are_filled() {
        let case = parse_case(TWO_BUS, "case").unwrap();
        assert_eq!(case.buses.len(), 2);
        assert_eq!(case.base_mva, 100.0);
        assert_eq!(case.generators[0].emission_factor, FuelType::Coal.default_emission_factor());
        assert!(case.generators[0].mttf > 0.0);
    }

    #[test]
    fn unknown_field_names_field_and_line() {
        let bad = TWO_BUS.replace("\"p_max\": 50", "\"pmax\": 50");
        let msg = parse_case(&bad, "case.json").unwrap_err().to_string();
        assert!(msg.contains("pmax") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn validation_errors_surface() {
        let bad = TWO_BUS.replace("\"to_bus\": 2", "\"to_bus\": 99");
        assert!(parse_case(&bad, "case").unwrap_err().to_string().contains("99"));
    }

    proptest::proptest! {
        #[test]
        fn json_round_trip_is_a_fixed_point(
            reactance in 1e-4f64..2.0,
            limit in 1.0f64..5000.0,
            (p_min, p_max) in (0.0f64..100.0, 0.0f64..900.0).prop_map(|(a, b)| (a, a + b + 1.0)),
            slopes in proptest::collection::vec(0.0f64..150.0, 1..4),
            phi in 0.0f64..1.5,
            ramp in proptest::option::of(1.0f64..500.0),
            lat in proptest::option::of(-90.0f64..90.0),
        ) {
            let mut case = parse_case(TWO_BUS, "case").unwrap();
            case.buses[0].latitude = lat;
            case.branches[0].reactance = reactance;
            case.branches[0].flow_limit = limit;
            let g = &mut case.generators[0];
            (g.p_min, g.p_max, g.emission_factor, g.ramp_limit) = (p_min, p_max, phi, ramp);
            let mut sorted = slopes.clone();
            sorted.sort_by(f64::total_cmp);
            let step = p_max / sorted.len() as f64;
            g.cost_curve = sorted
                .iter()
                .enumerate()
                .map(|(k, &slope)| {
                    let last = k + 1 == sorted.len();
                    CostSegment { breakpoint_mw: if last { p_max } else { step * (k + 1) as f64 }, slope }
                })
                .collect();
            let once = parse_case(&case_to_json(&case), "once").unwrap();
            proptest::prop_assert_eq!(&once, &case);
            proptest::prop_assert_eq!(case_to_json(&once), case_to_json(&case));
        }
    }
}
