//! Domain types and the per-cell annualized cost function.
//!
//! Every cell can be served by one of four heating technologies. The cost of
//! serving cell `i` with technology `j` has three parts:
//!
//! * energy: `price_j * heat_i / efficiency_j`
//! * generator: `generator_unit_cost_j * peak_i / generator_lifetime`
//! * grid: `grid_unit_cost_j * scale_factor_j * basis / grid_amortization`,
//!   where `basis` is the peak load for decentralized heat pumps (the
//!   electric grid is sized in kW) and the street length for everything else
//!   (pipes are laid along streets).
//!
//! Money is in €, energy in kWh, power in kW, length in m. Prices are stored
//! in €/kWh.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resolution used when costs are compared: 1e-6 € (one micro-euro).
pub const MICRO_PER_EUR: f64 = 1e6;

/// Converts a euro amount to integer micro-euros.
///
/// All optimization decisions compare these integers, so every solver sees
/// exactly the same cost ordering and objective sums are independent of
/// summation order. Rounding is monotone, which keeps worst-case reasoning
/// exact.
pub fn to_micro(eur: f64) -> i64 {
    (eur * MICRO_PER_EUR).round() as i64
}

pub fn from_micro(micro: i64) -> f64 {
    micro as f64 / MICRO_PER_EUR
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Electricity,
    Hydrogen,
}

/// Heating technology choice for one cell.
///
/// The derived ordering `Ce < Cg < De < Dg` is the canonical tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    /// District heating fed by centralized electric heat pumps.
    Ce,
    /// District heating fed by centralized hydrogen boilers.
    Cg,
    /// Decentralized household heat pumps.
    De,
    /// Decentralized household hydrogen boilers.
    Dg,
}

impl Technology {
    pub const ALL: [Technology; 4] = [Technology::Ce, Technology::Cg, Technology::De, Technology::Dg];

    pub fn carrier(self) -> Carrier {
        match self {
            Technology::Ce | Technology::De => Carrier::Electricity,
            Technology::Cg | Technology::Dg => Carrier::Hydrogen,
        }
    }

    pub fn is_centralized(self) -> bool {
        matches!(self, Technology::Ce | Technology::Cg)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        match self {
            Technology::Ce => "ce",
            Technology::Cg => "cg",
            Technology::De => "de",
            Technology::Dg => "dg",
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Technology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ce" => Ok(Technology::Ce),
            "cg" => Ok(Technology::Cg),
            "de" => Ok(Technology::De),
            "dg" => Ok(Technology::Dg),
            other => Err(Error::Invalid(format!("unknown technology `{other}`"))),
        }
    }
}

/// One value per technology, indexed by [`Technology`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerTech<T> {
    pub ce: T,
    pub cg: T,
    pub de: T,
    pub dg: T,
}

impl<T> PerTech<T> {
    pub fn from_fn(mut f: impl FnMut(Technology) -> T) -> Self {
        PerTech {
            ce: f(Technology::Ce),
            cg: f(Technology::Cg),
            de: f(Technology::De),
            dg: f(Technology::Dg),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Technology, &T) -> U) -> PerTech<U> {
        PerTech::from_fn(|t| f(t, &self[t]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Technology, &T)> {
        Technology::ALL.into_iter().map(move |t| (t, &self[t]))
    }
}

impl<T> Index<Technology> for PerTech<T> {
    type Output = T;

    fn index(&self, tech: Technology) -> &T {
        match tech {
            Technology::Ce => &self.ce,
            Technology::Cg => &self.cg,
            Technology::De => &self.de,
            Technology::Dg => &self.dg,
        }
    }
}

impl<T> IndexMut<Technology> for PerTech<T> {
    fn index_mut(&mut self, tech: Technology) -> &mut T {
        match tech {
            Technology::Ce => &mut self.ce,
            Technology::Cg => &mut self.cg,
            Technology::De => &mut self.de,
            Technology::Dg => &mut self.dg,
        }
    }
}

/// A 1 km² spatial cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: String,
    /// Yearly heat demand, kWh/a.
    pub heat_kwh_a: f64,
    /// Peak heating load, kW.
    pub peak_kw: f64,
    /// Total street length, m.
    pub street_m: f64,
    /// An existing district heating grid covers the cell.
    pub has_district_heating: bool,
    /// (lon, lat) in degrees; only used for GeoJSON export.
    pub centroid: Option<(f64, f64)>,
}

impl CellRecord {
    pub fn new(
        id: impl Into<String>,
        heat_kwh_a: f64,
        peak_kw: f64,
        street_m: f64,
        has_district_heating: bool,
    ) -> Self {
        CellRecord {
            id: id.into(),
            heat_kwh_a,
            peak_kw,
            street_m,
            has_district_heating,
            centroid: None,
        }
    }

    pub fn with_centroid(mut self, lon: f64, lat: f64) -> Self {
        self.centroid = Some((lon, lat));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidCell {
                id: self.id.clone(),
                reason,
            })
        };
        for (name, value) in [
            ("heat_kwh_a", self.heat_kwh_a),
            ("peak_kw", self.peak_kw),
            ("street_m", self.street_m),
        ] {
            if !value.is_finite() {
                return fail(format!("{name} is not finite"));
            }
            if value < 0.0 {
                return fail(format!("{name} is negative ({value})"));
            }
        }
        if self.heat_kwh_a > 0.0 && self.peak_kw <= 0.0 {
            return fail("peak_kw must be positive when heat_kwh_a is positive".into());
        }
        if let Some((lon, lat)) = self.centroid {
            if !lon.is_finite() || !lat.is_finite() {
                return fail("centroid is not finite".into());
            }
        }
        Ok(())
    }
}

/// Validates every cell and checks id uniqueness. Positions in the error are
/// 1-based.
pub fn validate_cells(cells: &[CellRecord]) -> Result<()> {
    let mut seen: HashMap<&str, usize> = HashMap::with_capacity(cells.len());
    for (pos, cell) in cells.iter().enumerate() {
        cell.validate()?;
        if let Some(first) = seen.insert(cell.id.as_str(), pos + 1) {
            return Err(Error::DuplicateCell {
                id: cell.id.clone(),
                first,
                second: pos + 1,
            });
        }
    }
    Ok(())
}

/// Unit costs and conversion factor of one technology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechParams {
    /// €/m for CE, CG, DG; €/kW for DE.
    pub grid_unit_cost: f64,
    /// €/kW, total purchase price.
    pub generator_unit_cost: f64,
    /// Boiler efficiency (CG, DG) or coefficient of performance (CE, DE).
    pub efficiency: f64,
    pub scale_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParameters {
    pub tech: PerTech<TechParams>,
    /// Upper limit on peak load served by decentralized heat pumps, kW.
    /// `f64::INFINITY` disables the limit.
    pub expansion_budget_kw: f64,
    pub generator_lifetime_years: f64,
    pub grid_amortization_years: f64,
}

impl CostParameters {
    pub const DEFAULT_GENERATOR_LIFETIME: f64 = 20.0;
    pub const DEFAULT_GRID_AMORTIZATION: f64 = 40.0;

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        for (tech, p) in self.tech.iter() {
            for (name, value) in [
                ("grid_unit_cost", p.grid_unit_cost),
                ("generator_unit_cost", p.generator_unit_cost),
                ("efficiency", p.efficiency),
                ("scale_factor", p.scale_factor),
            ] {
                if !value.is_finite() {
                    return fail(format!("{tech}.{name} is not finite"));
                }
            }
            if p.grid_unit_cost < 0.0 || p.generator_unit_cost < 0.0 {
                return fail(format!("{tech}: unit costs must be nonnegative"));
            }
            if p.efficiency <= 0.0 {
                return fail(format!("{tech}.efficiency must be positive"));
            }
            if p.scale_factor <= 0.0 {
                return fail(format!("{tech}.scale_factor must be positive"));
            }
            match tech {
                Technology::Cg | Technology::Dg if p.efficiency > 1.0 => {
                    return fail(format!("{tech}.efficiency is a boiler efficiency and must be <= 1"));
                }
                Technology::Ce | Technology::De if p.efficiency < 1.0 => {
                    return fail(format!("{tech}.efficiency is a COP and must be >= 1"));
                }
                _ => {}
            }
        }
        if self.expansion_budget_kw.is_nan() || self.expansion_budget_kw < 0.0 {
            return fail("expansion_budget_kw must be >= 0".into());
        }
        for (name, value) in [
            ("generator_lifetime_years", self.generator_lifetime_years),
            ("grid_amortization_years", self.grid_amortization_years),
        ] {
            if !value.is_finite() || value < 1.0 {
                return fail(format!("{name} must be finite and >= 1"));
            }
        }
        Ok(())
    }

    pub fn with_budget(mut self, budget_kw: f64) -> Self {
        self.expansion_budget_kw = budget_kw;
        self
    }
}

/// Carrier price per technology, €/kWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceVector(pub PerTech<f64>);

impl PriceVector {
    /// Arguments in canonical order.
    pub fn new(ce: f64, cg: f64, de: f64, dg: f64) -> Self {
        PriceVector(PerTech { ce, cg, de, dg })
    }

    /// Converts ct/kWh (canonical order) to €/kWh.
    pub fn from_ct_per_kwh(ce: f64, cg: f64, de: f64, dg: f64) -> Self {
        PriceVector::new(ce / 100.0, cg / 100.0, de / 100.0, dg / 100.0)
    }

    pub fn get(&self, tech: Technology) -> f64 {
        self.0[tech]
    }

    pub fn validate(&self) -> Result<()> {
        for (tech, &price) in self.0.iter() {
            if !price.is_finite() || price < 0.0 {
                return Err(Error::InvalidPrices(format!(
                    "{tech} price must be finite and >= 0, got {price}"
                )));
            }
        }
        Ok(())
    }
}

impl Index<Technology> for PriceVector {
    type Output = f64;

    fn index(&self, tech: Technology) -> &f64 {
        &self.0[tech]
    }
}

/// Annualized cost of serving one cell with one technology.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// €/a
    pub energy: f64,
    /// €/a
    pub generator: f64,
    /// €/a
    pub grid: f64,
    /// €/a
    pub total: f64,
    /// Generator plus grid outlay, €, not annualized.
    pub infrastructure_capex: f64,
}

impl CostBreakdown {
    pub fn total_micro(&self) -> i64 {
        to_micro(self.total)
    }
}

/// Heat delivered per unit of carrier energy.
pub fn conversion_efficiency(tech: Technology, params: &CostParameters) -> f64 {
    params.tech[tech].efficiency
}

pub fn annualized_cost(
    cell: &CellRecord,
    tech: Technology,
    params: &CostParameters,
    prices: &PriceVector,
) -> Result<CostBreakdown> {
    let price = prices.get(tech);
    if !price.is_finite() {
        return Err(Error::NonFinite(format!("{tech} price")));
    }
    for (name, v) in [
        ("heat_kwh_a", cell.heat_kwh_a),
        ("peak_kw", cell.peak_kw),
        ("street_m", cell.street_m),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("cell `{}` {name}", cell.id)));
        }
    }
    let p = &params.tech[tech];
    // Household heat pumps load the electric grid, which is sized in kW.
    let grid_basis = match tech {
        Technology::De => cell.peak_kw,
        _ => cell.street_m,
    };
    let generator_capex = p.generator_unit_cost * cell.peak_kw;
    let grid_capex = p.grid_unit_cost * p.scale_factor * grid_basis;

    let energy = price * cell.heat_kwh_a / p.efficiency;
    let generator = generator_capex / params.generator_lifetime_years;
    let grid = grid_capex / params.grid_amortization_years;
    let out = CostBreakdown {
        energy,
        generator,
        grid,
        total: energy + generator + grid,
        infrastructure_capex: generator_capex + grid_capex,
    };
    if !out.total.is_finite() {
        return Err(Error::NonFinite(format!("cost of cell `{}` with {tech}", cell.id)));
    }
    Ok(out)
}

/// Technologies a cell may use. Cells already on a district heating grid are
/// locked into the centralized options.
pub fn allowed_technologies(cell: &CellRecord) -> &'static [Technology] {
    if cell.has_district_heating {
        &[Technology::Ce, Technology::Cg]
    } else {
        &Technology::ALL
    }
}

/// Cost table for every (cell, technology) pair, including pairs the lock-in
/// rule forbids.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: Vec<PerTech<CostBreakdown>>,
    keys: Vec<PerTech<i64>>,
}

impl CostMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, cell: usize, tech: Technology) -> &CostBreakdown {
        &self.rows[cell][tech]
    }

    pub fn row(&self, cell: usize) -> &PerTech<CostBreakdown> {
        &self.rows[cell]
    }

    /// Total cost in micro-euros, the value solvers compare.
    pub fn key(&self, cell: usize, tech: Technology) -> i64 {
        self.keys[cell][tech]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, Technology, &CostBreakdown)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(t, b)| (i, t, b)))
    }
}

pub fn cost_matrix(cells: &[CellRecord], params: &CostParameters, prices: &PriceVector) -> Result<CostMatrix> {
    let rows = cells
        .iter()
        .map(|cell| {
            let mut row = PerTech::<CostBreakdown>::default();
            for tech in Technology::ALL {
                row[tech] = annualized_cost(cell, tech, params, prices)?;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let keys = rows.iter().map(|row| row.map(|_, b| b.total_micro())).collect();
    Ok(CostMatrix { rows, keys })
}
