//! Plan and sweep exports.
//!
//! Plan CSV: `cell_id,technology,annual_cost_eur,energy_eur,generator_eur,grid_eur,capex_eur`,
//! one row per cell in instance order.
//!
//! Plan GeoJSON: a FeatureCollection with one 1 km × 1 km polygon per cell,
//! centered on its centroid, carrying `cell_id`, `technology`,
//! `annual_cost_eur`, `capex_eur` and `peak_kw`.
//!
//! Sweep CSV: see [`SWEEP_HEADER`].
//!
//! Numbers use shortest round-trip formatting; output is byte-stable.

use std::io::Read;

use serde_json::{json, Value};

use crate::analysis::SweepRecord;
use crate::error::{Error, Result};
use crate::model::{CellRecord, Technology};
use crate::optimizer::Plan;

pub const PLAN_HEADER: [&str; 7] = [
    "cell_id",
    "technology",
    "annual_cost_eur",
    "energy_eur",
    "generator_eur",
    "grid_eur",
    "capex_eur",
];

pub const SWEEP_HEADER: [&str; 10] = [
    "delta_hydrogen",
    "delta_electricity",
    "capacity_ce_kw",
    "capacity_cg_kw",
    "capacity_de_kw",
    "capacity_dg_kw",
    "infrastructure_capex_eur",
    "capex_increase",
    "objective_eur_a",
    "de_budget_utilization",
];

/// km per degree of latitude.
const KM_PER_DEG_LAT: f64 = 110.574;
/// km per degree of longitude at the equator.
const KM_PER_DEG_LON: f64 = 111.320;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    GeoJson,
}

fn check_plan(plan: &Plan, cells: &[CellRecord]) -> Result<()> {
    if plan.cell_ids.len() != cells.len() || plan.cell_ids.iter().zip(cells).any(|(id, c)| *id != c.id) {
        return Err(Error::PlanMismatch("plan cells differ from the instance".into()));
    }
    Ok(())
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        write(&mut w)?;
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn export_plan(plan: &Plan, cells: &[CellRecord], format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Csv => plan_csv(plan, cells),
        ExportFormat::GeoJson => plan_geojson(plan, cells),
    }
}

pub fn plan_csv(plan: &Plan, cells: &[CellRecord]) -> Result<String> {
    check_plan(plan, cells)?;
    csv_string(|w| {
        w.write_record(PLAN_HEADER)?;
        for ((id, tech), b) in plan.cell_ids.iter().zip(&plan.assignment).zip(&plan.breakdowns) {
            w.write_record([
                id.clone(),
                tech.to_string(),
                b.total.to_string(),
                b.energy.to_string(),
                b.generator.to_string(),
                b.grid.to_string(),
                b.infrastructure_capex.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Reads the `(cell_id, technology)` columns of a plan CSV, in file order.
pub fn read_plan_csv(reader: impl Read) -> Result<Vec<(String, Technology)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != PLAN_HEADER {
        return Err(Error::Row {
            row: 1,
            reason: format!("expected header `{}`", PLAN_HEADER.join(",")),
        });
    }
    rdr.records()
        .enumerate()
        .map(|(k, rec)| {
            let rec = rec?;
            let tech = rec[1].parse().map_err(|_| Error::Row {
                row: k + 2,
                reason: format!("unknown technology `{}`", &rec[1]),
            })?;
            Ok((rec[0].to_string(), tech))
        })
        .collect()
}

/// Closed, counter-clockwise ring of a 1 km square around `(lon, lat)`.
fn square_ring(lon: f64, lat: f64) -> Value {
    let half_lat = 0.5 / KM_PER_DEG_LAT;
    let half_lon = 0.5 / (KM_PER_DEG_LON * lat.to_radians().cos());
    let (w, e, s, n) = (lon - half_lon, lon + half_lon, lat - half_lat, lat + half_lat);
    json!([[w, s], [e, s], [e, n], [w, n], [w, s]])
}

pub fn plan_geojson(plan: &Plan, cells: &[CellRecord]) -> Result<String> {
    check_plan(plan, cells)?;
    let features = cells
        .iter()
        .zip(&plan.assignment)
        .zip(&plan.breakdowns)
        .map(|((cell, tech), b)| {
            let (lon, lat) = cell.centroid.ok_or_else(|| Error::MissingCentroid(cell.id.clone()))?;
            Ok(json!({
                "type": "Feature",
                "geometry": { "type": "Polygon", "coordinates": [square_ring(lon, lat)] },
                "properties": {
                    "cell_id": cell.id,
                    "technology": tech.code(),
                    "annual_cost_eur": b.total,
                    "capex_eur": b.infrastructure_capex,
                    "peak_kw": cell.peak_kw,
                },
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = json!({ "type": "FeatureCollection", "features": features });
    Ok(serde_json::to_string(&doc)? + "\n")
}

/// One row per record. `capex_increase` is relative to the first record and
/// left empty when that baseline is zero.
pub fn sweep_csv(records: &[SweepRecord]) -> Result<String> {
    let base = records.first().map(|r| r.infrastructure_capex).unwrap_or(0.0);
    csv_string(|w| {
        w.write_record(SWEEP_HEADER)?;
        for r in records {
            let increase = if base != 0.0 {
                ((r.infrastructure_capex - base) / base).to_string()
            } else {
                String::new()
            };
            w.write_record([
                r.delta_hydrogen.to_string(),
                r.delta_electricity.to_string(),
                r.capacity_kw.ce.to_string(),
                r.capacity_kw.cg.to_string(),
                r.capacity_kw.de.to_string(),
                r.capacity_kw.dg.to_string(),
                r.infrastructure_capex.to_string(),
                increase,
                r.objective.to_string(),
                r.de_budget_utilization.to_string(),
            ])?;
        }
        Ok(())
    })
}
