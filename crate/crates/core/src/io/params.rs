//! Parameter file (JSON).
//!
//! ```json
//! {
//!   "technologies": {
//!     "ce": { "efficiency": 3.8, "generator_unit_cost": 798, "grid_unit_cost": 2160,
//!             "scale_factor": 1.1, "price_ct_per_kwh": 15.2 },
//!     "cg": { ... }, "de": { ... }, "dg": { ... }
//!   },
//!   "expansion_budget_kw": 1200000,
//!   "delta_electricity": 0.5,
//!   "delta_hydrogen": 2.0,
//!   "generator_lifetime_years": 20,
//!   "grid_amortization_years": 40
//! }
//! ```
//!
//! `efficiency` is the COP for `ce`/`de` and the boiler efficiency for
//! `cg`/`dg`. `grid_unit_cost` is €/kW for `de` and €/m otherwise. Prices are
//! given in ct/kWh and stored in €/kWh. Deviations are fractions (0.5 = 50 %).
//! The two lifetimes are optional and default to 20 and 40 years.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CostParameters, PerTech, PriceVector, TechParams};
use crate::uncertainty::UncertaintyBox;

/// The reference parameter set shipped with the crate.
pub const REFERENCE_PARAMS_JSON: &str = include_str!("../../data/table1.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TechEntry {
    efficiency: f64,
    generator_unit_cost: f64,
    grid_unit_cost: f64,
    scale_factor: f64,
    price_ct_per_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Technologies {
    ce: TechEntry,
    cg: TechEntry,
    de: TechEntry,
    dg: TechEntry,
}

fn default_generator_lifetime() -> f64 {
    CostParameters::DEFAULT_GENERATOR_LIFETIME
}

fn default_grid_amortization() -> f64 {
    CostParameters::DEFAULT_GRID_AMORTIZATION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    technologies: Technologies,
    expansion_budget_kw: f64,
    delta_electricity: f64,
    delta_hydrogen: f64,
    #[serde(default = "default_generator_lifetime")]
    generator_lifetime_years: f64,
    #[serde(default = "default_grid_amortization")]
    grid_amortization_years: f64,
}

/// Everything a parameter file defines: cost parameters, nominal prices and
/// the price deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub params: CostParameters,
    /// €/kWh
    pub nominal: PriceVector,
    pub delta_electricity: f64,
    pub delta_hydrogen: f64,
}

impl Scenario {
    pub fn price_box(&self) -> Result<UncertaintyBox> {
        UncertaintyBox::new(self.nominal, self.delta_electricity, self.delta_hydrogen)
    }
}

pub fn parse_params(text: &str) -> Result<Scenario> {
    let file: ParamsFile = serde_json::from_str(text)?;
    let t = &file.technologies;
    let entries = PerTech {
        ce: &t.ce,
        cg: &t.cg,
        de: &t.de,
        dg: &t.dg,
    };
    let scenario = Scenario {
        params: CostParameters {
            tech: entries.map(|_, e| TechParams {
                grid_unit_cost: e.grid_unit_cost,
                generator_unit_cost: e.generator_unit_cost,
                efficiency: e.efficiency,
                scale_factor: e.scale_factor,
            }),
            expansion_budget_kw: file.expansion_budget_kw,
            generator_lifetime_years: file.generator_lifetime_years,
            grid_amortization_years: file.grid_amortization_years,
        },
        nominal: PriceVector(entries.map(|_, e| e.price_ct_per_kwh / 100.0)),
        delta_electricity: file.delta_electricity,
        delta_hydrogen: file.delta_hydrogen,
    };
    scenario.params.validate()?;
    scenario.price_box()?;
    Ok(scenario)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_params(&std::fs::read_to_string(path)?)
}

pub fn reference_scenario() -> Scenario {
    parse_params(REFERENCE_PARAMS_JSON).expect("bundled parameter file is valid")
}
