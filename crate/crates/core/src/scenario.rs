//! Current and future system variants obtained by scaling load and
//! renewable capacity.

use alloc::string::String;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridCase;
use crate::profile::{LoadProfile, RenewableProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario {name}: multipliers must be positive and finite")]
    BadMultiplier { name: String },
    #[error("unknown scenario preset {0:?} (expected current, future1 or future2)")]
    UnknownPreset(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub load_multiplier: f64,
    pub renewable_capacity_multiplier: f64,
}

impl ScenarioSpec {
    pub fn new(name: &str, load_multiplier: f64, renewable_capacity_multiplier: f64) -> Self {
        Self { name: name.into(), load_multiplier, renewable_capacity_multiplier }
    }

    pub fn current() -> Self {
        Self::new("current", 1.0, 1.0)
    }

    /// Load +10 %, renewable capacity +50 %.
    pub fn future1() -> Self {
        Self::new("future1", 1.10, 1.50)
    }

    /// Load +20 %, renewable capacity +100 %.
    pub fn future2() -> Self {
        Self::new("future2", 1.20, 2.00)
    }

    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "current" => Ok(Self::current()),
            "future1" => Ok(Self::future1()),
            "future2" => Ok(Self::future2()),
            other => Err(ScenarioError::UnknownPreset(other.into())),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let ok = |m: f64| m.is_finite() && m > 0.0;
        if ok(self.load_multiplier) && ok(self.renewable_capacity_multiplier) {
            Ok(())
        } else {
            Err(ScenarioError::BadMultiplier { name: self.name.clone() })
        }
    }

    pub fn is_identity(&self) -> bool {
        self.load_multiplier == 1.0 && self.renewable_capacity_multiplier == 1.0
    }
}

/// Scales every load value and every renewable unit's capacity and profile.
/// Dispatchable units are left untouched. A multiplier of exactly 1 leaves
/// the corresponding data bit-for-bit unchanged.
pub fn apply_scenario(
    grid: &GridCase,
    load: &LoadProfile,
    renewables: &RenewableProfile,
    spec: &ScenarioSpec,
) -> Result<(GridCase, LoadProfile, RenewableProfile), ScenarioError> {
    spec.validate()?;
    let mut grid = grid.clone();
    let mut load = load.clone();
    let mut renewables = renewables.clone();
    let (lm, rm) = (spec.load_multiplier, spec.renewable_capacity_multiplier);
    if lm != 1.0 {
        load.values_mut().iter_mut().for_each(|v| *v *= lm);
    }
    if rm != 1.0 {
        for g in grid.generators.iter_mut().filter(|g| g.is_renewable()) {
            g.p_max *= rm;
            g.p_min *= rm;
            for seg in &mut g.cost_curve {
                seg.breakpoint_mw *= rm;
            }
        }
        renewables.values_mut().iter_mut().for_each(|v| *v *= rm);
    }
    Ok((grid, load, renewables))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fixtures::{thermal, two_bus};
    use crate::grid::FuelType;
    use crate::profile::{DayWindow, HourlyTable};
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn inputs(vals: &[f64]) -> (GridCase, LoadProfile, RenewableProfile) {
        let mut grid = two_bus(100.0);
        let mut wind = thermal(3, 1, 50.0, 0.0);
        wind.fuel_type = FuelType::Wind;
        grid.generators.push(wind);
        let w = DayWindow::single(1);
        let mut load = HourlyTable::zeros(w, vec![1, 2]);
        let mut ren = HourlyTable::zeros(w, vec![3]);
        for h in 0..24 {
            load.set(1, h, 1, vals[h % vals.len()]);
            ren.set(1, h, 0, vals[h % vals.len()].min(50.0));
        }
        (grid, load, ren)
    }

    #[test]
    fn presets_have_the_published_multipliers() {
        assert_eq!(ScenarioSpec::preset("future1").unwrap(), ScenarioSpec::new("future1", 1.10, 1.50));
        assert_eq!(ScenarioSpec::preset("future2").unwrap(), ScenarioSpec::new("future2", 1.20, 2.00));
        assert!(ScenarioSpec::preset("current").unwrap().is_identity());
        assert!(ScenarioSpec::preset("future3").is_err());
        assert!(ScenarioSpec::new("x", 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn future_scenario_scales_load_and_renewables_only() {
        let (grid, load, ren) = inputs(&[100.0]);
        let (g2, l2, r2) = apply_scenario(&grid, &load, &ren, &ScenarioSpec::future2()).unwrap();
        assert_eq!(l2.get(1, 0, 1), 120.0);
        assert_eq!(g2.generators[2].p_max, 100.0);
        assert_eq!(r2.get(1, 0, 0), 100.0);
        assert_eq!(g2.generators[..2], grid.generators[..2]);
    }

    proptest! {
        #[test]
        fn identity_and_composition(vals in proptest::collection::vec(0.0f64..500.0, 1..24),
                                    a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0, d in 0.5f64..2.0) {
            let (grid, load, ren) = inputs(&vals);
            let same = apply_scenario(&grid, &load, &ren, &ScenarioSpec::current()).unwrap();
            prop_assert_eq!(&same.0, &grid);
            prop_assert_eq!(&same.1, &load);
            prop_assert_eq!(&same.2, &ren);

            let step = apply_scenario(&grid, &load, &ren, &ScenarioSpec::new("ab", a, b)).unwrap();
            let two = apply_scenario(&step.0, &step.1, &step.2, &ScenarioSpec::new("cd", c, d)).unwrap();
            let once = apply_scenario(&grid, &load, &ren, &ScenarioSpec::new("acbd", a * c, b * d)).unwrap();
            let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-9 * (1.0 + q.abs()));
            prop_assert!(close(two.1.values(), once.1.values()));
            prop_assert!(close(two.2.values(), once.2.values()));
            let pmax = |g: &GridCase| g.generators.iter().map(|g| g.p_max).collect::<Vec<_>>();
            prop_assert!(close(&pmax(&two.0), &pmax(&once.0)));
            prop_assert_eq!(&two.0.generators[..2], &grid.generators[..2]);
        }
    }
}
