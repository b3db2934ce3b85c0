//! Deviation sweeps and Monte Carlo validation of robust plans.
//!
//! A sweep re-solves the robust problem for a series of hydrogen price
//! deviations at fixed electricity deviation and records, per point, the
//! installed peak load by technology and the infrastructure outlay. Capacity
//! is the sum of cell peak loads (kW) assigned to each technology.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{from_micro, CellRecord, CostParameters, PerTech, PriceVector, Technology};
use crate::optimizer::{solve_deterministic_with, solve_robust_with, Plan, Solver};
use crate::uncertainty::UncertaintyBox;

/// One point of a deviation sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub delta_hydrogen: f64,
    pub delta_electricity: f64,
    /// Peak load per technology, kW.
    pub capacity_kw: PerTech<f64>,
    /// Non-annualized generator plus grid outlay, €.
    pub infrastructure_capex: f64,
    /// Worst-case annual cost, €/a.
    pub objective: f64,
    pub objective_micro: i64,
    /// DE capacity over budget; 0 when the budget is unlimited or zero.
    pub de_budget_utilization: f64,
}

impl SweepRecord {
    pub fn hydrogen_capacity_kw(&self) -> f64 {
        self.capacity_kw.cg + self.capacity_kw.dg
    }

    pub fn electric_capacity_kw(&self) -> f64 {
        self.capacity_kw.ce + self.capacity_kw.de
    }
}

/// Evenly spaced deviations `from, from + step, ..., <= to`, rounded to 12
/// decimals so printed values stay clean.
pub fn delta_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || from < 0.0 || to < from || step <= 0.0 {
        return Err(Error::Invalid(format!(
            "bad deviation grid: from {from} to {to} step {step} (need 0 <= from <= to, step > 0)"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|k| ((from + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn capacity_by_technology(plan: &Plan, cells: &[CellRecord]) -> Result<PerTech<f64>> {
    let by_id: HashMap<&str, Technology> = plan
        .cell_ids
        .iter()
        .map(String::as_str)
        .zip(plan.assignment.iter().copied())
        .collect();
    let mut out = PerTech::<f64>::default();
    for cell in cells {
        let tech = by_id
            .get(cell.id.as_str())
            .ok_or_else(|| Error::PlanMismatch(format!("cell `{}` is missing from the plan", cell.id)))?;
        out[*tech] += cell.peak_kw;
    }
    Ok(out)
}

fn record(
    plan: &Plan,
    cells: &[CellRecord],
    params: &CostParameters,
    price_box: &UncertaintyBox,
) -> Result<SweepRecord> {
    let budget = params.expansion_budget_kw;
    let utilization = if budget.is_finite() && budget > 0.0 {
        plan.de_capacity_kw / budget
    } else {
        0.0
    };
    Ok(SweepRecord {
        delta_hydrogen: price_box.delta_hydrogen,
        delta_electricity: price_box.delta_electricity,
        capacity_kw: capacity_by_technology(plan, cells)?,
        infrastructure_capex: plan.infrastructure_capex(),
        objective: plan.objective,
        objective_micro: plan.objective_micro,
        de_budget_utilization: utilization,
    })
}

/// Solves the robust problem once per hydrogen deviation. Points are solved
/// in parallel and returned in ascending deviation order.
pub fn sweep_deviation(
    cells: &[CellRecord],
    params: &CostParameters,
    nominal: &PriceVector,
    h2_deltas: &[f64],
    el_delta: f64,
) -> Result<Vec<SweepRecord>> {
    sweep_deviation_with(cells, params, nominal, h2_deltas, el_delta, Solver::default())
}

pub fn sweep_deviation_with(
    cells: &[CellRecord],
    params: &CostParameters,
    nominal: &PriceVector,
    h2_deltas: &[f64],
    el_delta: f64,
    solver: Solver,
) -> Result<Vec<SweepRecord>> {
    if h2_deltas.is_empty() {
        return Err(Error::Invalid("sweep needs at least one deviation".into()));
    }
    let mut deltas = h2_deltas.to_vec();
    for &d in &deltas {
        UncertaintyBox::new(*nominal, el_delta, d)?;
    }
    deltas.sort_by(f64::total_cmp);
    deltas
        .par_iter()
        .map(|&d| {
            let price_box = UncertaintyBox::new(*nominal, el_delta, d)?;
            let plan = solve_robust_with(cells, params, &price_box, solver)?;
            record(&plan, cells, params, &price_box)
        })
        .collect()
}

/// Relative change of infrastructure outlay against the first record.
pub fn cost_increase_curve(records: &[SweepRecord]) -> Result<Vec<(f64, f64)>> {
    let base = records
        .first()
        .ok_or_else(|| Error::Invalid("cost increase curve needs at least one record".into()))?
        .infrastructure_capex;
    if base == 0.0 {
        return Err(Error::Invalid("baseline infrastructure capex is zero".into()));
    }
    Ok(records
        .iter()
        .map(|r| (r.delta_hydrogen, (r.infrastructure_capex - base) / base))
        .collect())
}

/// Outcome of replaying a plan against sampled prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    pub delta_electricity: f64,
    pub delta_hydrogen: f64,
    /// Guaranteed (worst-case) cost of the plan under test, €/a.
    pub plan_objective: f64,
    pub max_realized_cost: f64,
    pub mean_realized_cost: f64,
    pub worst_sample_index: usize,
    pub worst_sample_prices: PriceVector,
    /// `plan_objective - max_realized_cost`, €/a.
    pub margin: f64,
    pub margin_micro: i64,
    /// Samples whose realized cost exceeds `plan_objective`.
    pub violations: usize,
    /// The plan optimal at nominal prices, replayed on the same samples.
    pub nominal_plan_objective: f64,
    pub nominal_plan_max_realized_cost: f64,
    /// Per-sample extra cost of the nominal plan over the plan under test.
    pub nominal_regret_max: f64,
    pub nominal_regret_mean: f64,
}

/// Replays `plan` (and, for comparison, the nominal-price optimum) against
/// `n` prices sampled from the box.
pub fn validate_plan(
    plan: &Plan,
    cells: &[CellRecord],
    params: &CostParameters,
    price_box: &UncertaintyBox,
    n: usize,
    seed: u64,
) -> Result<ValidationReport> {
    validate_plan_with(plan, cells, params, price_box, n, seed, Solver::default())
}

pub fn validate_plan_with(
    plan: &Plan,
    cells: &[CellRecord],
    params: &CostParameters,
    price_box: &UncertaintyBox,
    n: usize,
    seed: u64,
    solver: Solver,
) -> Result<ValidationReport> {
    if n == 0 {
        return Err(Error::Invalid("validation needs at least one sample".into()));
    }
    price_box.validate()?;
    let nominal_plan = solve_deterministic_with(cells, params, &price_box.nominal, solver)?;

    let costs: Vec<(i64, i64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let prices = price_box.sample_at(seed, i);
            Ok((
                plan.realized_cost_micro(cells, params, &prices)?,
                nominal_plan.realized_cost_micro(cells, params, &prices)?,
            ))
        })
        .collect::<Result<_>>()?;

    // First index wins on ties so the report is order-independent.
    let (worst_index, &(max_micro, _)) = costs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.0.cmp(&a.0)))
        .expect("n >= 1");
    let nominal_max = costs.iter().map(|c| c.1).max().expect("n >= 1");
    let regret_max = costs.iter().map(|c| c.1 - c.0).max().expect("n >= 1");
    let sum_realized: i128 = costs.iter().map(|c| c.0 as i128).sum();
    let sum_regret: i128 = costs.iter().map(|c| (c.1 - c.0) as i128).sum();
    let margin_micro = plan.objective_micro - max_micro;

    Ok(ValidationReport {
        samples: n,
        seed,
        delta_electricity: price_box.delta_electricity,
        delta_hydrogen: price_box.delta_hydrogen,
        plan_objective: plan.objective,
        max_realized_cost: from_micro(max_micro),
        mean_realized_cost: sum_realized as f64 / n as f64 / 1e6,
        worst_sample_index: worst_index,
        worst_sample_prices: price_box.sample_at(seed, worst_index as u64),
        margin: from_micro(margin_micro),
        margin_micro,
        violations: costs.iter().filter(|c| c.0 > plan.objective_micro).count(),
        nominal_plan_objective: nominal_plan.objective,
        nominal_plan_max_realized_cost: from_micro(nominal_max),
        nominal_regret_max: from_micro(regret_max),
        nominal_regret_mean: sum_regret as f64 / n as f64 / 1e6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::optimizer::{solve_deterministic, solve_robust};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cells(seed: u64, n: usize) -> Vec<CellRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let p = rng.random_range(50..20_000) as f64;
                CellRecord::new(
                    format!("c{i:03}"),
                    p * 2000.0,
                    p,
                    rng.random_range(1000..20_000) as f64,
                    rng.random_bool(0.1),
                )
            })
            .collect()
    }

    #[test]
    fn grid() {
        let g = delta_grid(0.0, 2.0, 0.1).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[20], 2.0);
        assert_eq!(delta_grid(0.5, 0.5, 0.1).unwrap(), vec![0.5]);
        assert!(delta_grid(1.0, 0.0, 0.1).is_err());
        assert!(delta_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn single_point_sweep_matches_nominal() {
        let cs = cells(1, 40);
        let params = reference_params();
        let recs = sweep_deviation(&cs, &params, &reference_prices(), &[0.0], 0.0).unwrap();
        assert_eq!(recs.len(), 1);
        let plan = solve_deterministic(&cs, &params, &reference_prices()).unwrap();
        assert_eq!(recs[0].objective_micro, plan.objective_micro);
        assert_eq!(recs[0].capacity_kw, capacity_by_technology(&plan, &cs).unwrap());
    }

    #[test]
    fn sweep_is_sorted_and_monotone() {
        let cs = cells(2, 80);
        let params = reference_params().with_budget(100_000.0);
        let deltas = [1.0, 0.0, 0.5, 2.0, 0.1];
        let recs = sweep_deviation(&cs, &params, &reference_prices(), &deltas, 0.5).unwrap();
        let got: Vec<f64> = recs.iter().map(|r| r.delta_hydrogen).collect();
        assert_eq!(got, vec![0.0, 0.1, 0.5, 1.0, 2.0]);
        let total: f64 = cs.iter().map(|c| c.peak_kw).sum();
        for w in recs.windows(2) {
            assert!(w[0].objective_micro <= w[1].objective_micro);
        }
        for r in &recs {
            assert_eq!(r.capacity_kw.iter().map(|(_, v)| v).sum::<f64>(), total);
            assert!(r.capacity_kw.de <= 100_000.0);
        }
    }

    #[test]
    fn capacity_accounting() {
        let cs = cells(3, 10);
        let plan = solve_deterministic(&cs, &reference_params(), &reference_prices()).unwrap();
        let cap = capacity_by_technology(&plan, &cs).unwrap();
        for tech in Technology::ALL {
            let recount: f64 = cs
                .iter()
                .zip(&plan.assignment)
                .filter(|(_, &t)| t == tech)
                .map(|(c, _)| c.peak_kw)
                .sum();
            assert_eq!(cap[tech], recount);
        }
        let mut extra = cs.clone();
        extra.push(CellRecord::new("zzz", 0.0, 0.0, 0.0, false));
        assert!(capacity_by_technology(&plan, &extra).is_err());

        let empty_plan = solve_deterministic(&[], &reference_params(), &reference_prices()).unwrap();
        assert_eq!(capacity_by_technology(&empty_plan, &[]).unwrap(), PerTech::default());
    }

    #[test]
    fn all_ce_capacity() {
        let cs = vec![
            CellRecord::new("a", 4e7, 20_000.0, 2000.0, true),
            CellRecord::new("b", 6e7, 30_000.0, 2000.0, true),
        ];
        let plan = solve_deterministic(&cs, &reference_params(), &reference_prices()).unwrap();
        assert_eq!(plan.assignment, vec![Technology::Ce; 2]);
        let cap = capacity_by_technology(&plan, &cs).unwrap();
        assert_eq!(
            cap,
            PerTech {
                ce: 50_000.0,
                cg: 0.0,
                de: 0.0,
                dg: 0.0
            }
        );
    }

    fn rec(delta: f64, capex: f64) -> SweepRecord {
        SweepRecord {
            delta_hydrogen: delta,
            delta_electricity: 0.5,
            capacity_kw: PerTech::default(),
            infrastructure_capex: capex,
            objective: 0.0,
            objective_micro: 0,
            de_budget_utilization: 0.0,
        }
    }

    #[test]
    fn cost_curve() {
        assert_eq!(cost_increase_curve(&[rec(0.3, 10.0)]).unwrap(), vec![(0.3, 0.0)]);
        let flat = cost_increase_curve(&[rec(0.0, 5.0), rec(0.1, 5.0), rec(0.2, 5.0)]).unwrap();
        assert!(flat.iter().all(|&(_, v)| v == 0.0));
        let up = cost_increase_curve(&[rec(0.0, 100.0), rec(0.1, 123.0)]).unwrap();
        assert!((up[1].1 - 0.23).abs() < 1e-12);
        assert!(cost_increase_curve(&[]).is_err());
        assert!(cost_increase_curve(&[rec(0.0, 0.0)]).is_err());
    }

    #[test]
    fn degenerate_box_has_zero_margin() {
        let cs = cells(4, 30);
        let params = reference_params();
        let b = UncertaintyBox::degenerate(reference_prices());
        let plan = solve_robust(&cs, &params, &b).unwrap();
        let r = validate_plan(&plan, &cs, &params, &b, 200, 1).unwrap();
        assert_eq!(r.margin_micro, 0);
        assert_eq!(r.max_realized_cost, plan.objective);
        assert_eq!(r.mean_realized_cost, plan.objective);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn robust_margin_nonnegative_across_seeds() {
        let cs = cells(5, 25);
        let params = reference_params().with_budget(60_000.0);
        let b = UncertaintyBox::new(reference_prices(), 0.5, 2.0).unwrap();
        let plan = solve_robust(&cs, &params, &b).unwrap();
        for seed in 0..100 {
            let r = validate_plan(&plan, &cs, &params, &b, 200, seed).unwrap();
            assert!(r.margin_micro >= 0, "seed {seed}: {r:?}");
            assert_eq!(r.violations, 0);
            assert!(b.contains(&r.worst_sample_prices));
        }
    }

    #[test]
    fn rejects_zero_samples() {
        let cs = cells(6, 3);
        let params = reference_params();
        let b = UncertaintyBox::degenerate(reference_prices());
        let plan = solve_robust(&cs, &params, &b).unwrap();
        assert!(validate_plan(&plan, &cs, &params, &b, 0, 1).is_err());
    }
}
