//! Exact solution of the deterministic and robust planning problems.
//!
//! The robust problem minimizes the worst-case total cost over the price box.
//! Because every price multiplies a nonnegative quantity, the worst case of
//! any plan sits at the upper corner of the box, so [`solve_robust`] is one
//! deterministic solve at those prices.
//!
//! The deterministic problem is solved through its knapsack structure (see
//! [`knapsack`]); [`brute_force`] enumerates assignments for small instances
//! and serves as the reference.

mod brute;
pub mod knapsack;
pub mod lp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    allowed_technologies, annualized_cost, cost_matrix, from_micro, to_micro, validate_cells, CellRecord,
    CostBreakdown, CostMatrix, CostParameters, PriceVector, Technology,
};
use crate::uncertainty::UncertaintyBox;

pub use brute::{brute_force, BRUTE_FORCE_MAX_CELLS};
pub use knapsack::{solve_knapsack_bb, solve_knapsack_dp, KnapsackInstance, KnapsackItem, KnapsackSolution};
pub use lp::{export_lp, export_lp_with, LpOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dp,
    Bb,
    Brute,
    /// Assignment supplied by the caller, see [`Plan::evaluate`].
    Given,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Dp => "dp",
            SolverKind::Bb => "bb",
            SolverKind::Brute => "brute",
            SolverKind::Given => "given",
        })
    }
}

/// Which exact method solves the deterministic problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Dynamic program over the budget in `granularity_kw` steps. Exact for
    /// whole-kW peak loads when the granularity is 1.
    Dp {
        granularity_kw: u64,
    },
    BranchAndBound,
    /// Full enumeration, limited to [`BRUTE_FORCE_MAX_CELLS`] cells.
    BruteForce,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::Dp { granularity_kw: 1 }
    }
}

impl Solver {
    pub fn kind(self) -> SolverKind {
        match self {
            Solver::Dp { .. } => SolverKind::Dp,
            Solver::BranchAndBound => SolverKind::Bb,
            Solver::BruteForce => SolverKind::Brute,
        }
    }
}

/// One technology per cell, with its costs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub cell_ids: Vec<String>,
    pub assignment: Vec<Technology>,
    pub breakdowns: Vec<CostBreakdown>,
    /// €/a, equal to `objective_micro` / 1e6.
    pub objective: f64,
    pub objective_micro: i64,
    /// Peak load served by decentralized heat pumps, kW.
    pub de_capacity_kw: f64,
    pub prices_used: PriceVector,
    pub solver: SolverKind,
}

impl Plan {
    pub(crate) fn from_assignment(
        cells: &[CellRecord],
        matrix: &CostMatrix,
        assignment: Vec<Technology>,
        prices: PriceVector,
        solver: SolverKind,
    ) -> Plan {
        let breakdowns: Vec<CostBreakdown> = assignment.iter().enumerate().map(|(i, &t)| *matrix.get(i, t)).collect();
        let objective_micro = assignment.iter().enumerate().map(|(i, &t)| matrix.key(i, t)).sum();
        let de_capacity_kw = cells
            .iter()
            .zip(&assignment)
            .filter(|(_, &t)| t == Technology::De)
            .map(|(c, _)| c.peak_kw)
            .sum();
        Plan {
            cell_ids: cells.iter().map(|c| c.id.clone()).collect(),
            assignment,
            breakdowns,
            objective: from_micro(objective_micro),
            objective_micro,
            de_capacity_kw,
            prices_used: prices,
            solver,
        }
    }

    /// Prices a fixed assignment. Checks that every technology is admissible
    /// for its cell and that the DE budget holds.
    pub fn evaluate(
        cells: &[CellRecord],
        params: &CostParameters,
        prices: &PriceVector,
        assignment: Vec<Technology>,
    ) -> Result<Plan> {
        check_inputs(cells, params, prices)?;
        if assignment.len() != cells.len() {
            return Err(Error::PlanMismatch(format!(
                "assignment covers {} cells, instance has {}",
                assignment.len(),
                cells.len()
            )));
        }
        let matrix = cost_matrix(cells, params, prices)?;
        let plan = Plan::from_assignment(cells, &matrix, assignment, *prices, SolverKind::Given);
        plan.validate(cells, params)?;
        Ok(plan)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Non-annualized generator plus grid outlay of the chosen technologies, €.
    pub fn infrastructure_capex(&self) -> f64 {
        self.breakdowns.iter().map(|b| b.infrastructure_capex).sum()
    }

    /// Total cost of this plan if prices turn out to be `prices`,
    /// micro-euros per year.
    pub fn realized_cost_micro(
        &self,
        cells: &[CellRecord],
        params: &CostParameters,
        prices: &PriceVector,
    ) -> Result<i64> {
        self.check_cells(cells)?;
        cells
            .iter()
            .zip(&self.assignment)
            .map(|(cell, &t)| Ok(to_micro(annualized_cost(cell, t, params, prices)?.total)))
            .sum()
    }

    fn check_cells(&self, cells: &[CellRecord]) -> Result<()> {
        if cells.len() != self.assignment.len() {
            return Err(Error::PlanMismatch(format!(
                "plan covers {} cells, instance has {}",
                self.assignment.len(),
                cells.len()
            )));
        }
        for (cell, id) in cells.iter().zip(&self.cell_ids) {
            if &cell.id != id {
                return Err(Error::PlanMismatch(format!(
                    "expected cell `{id}`, found `{}`",
                    cell.id
                )));
            }
        }
        Ok(())
    }

    /// Checks every structural constraint: one admissible technology per
    /// cell, the DE budget, and objective bookkeeping.
    pub fn validate(&self, cells: &[CellRecord], params: &CostParameters) -> Result<()> {
        self.check_cells(cells)?;
        if self.breakdowns.len() != self.assignment.len() {
            return Err(Error::PlanMismatch("breakdowns and assignment differ in length".into()));
        }
        let mut de = 0.0;
        for (cell, &tech) in cells.iter().zip(&self.assignment) {
            if !allowed_technologies(cell).contains(&tech) {
                return Err(Error::ConstraintViolation(format!(
                    "cell `{}` has district heating but is assigned {tech}",
                    cell.id
                )));
            }
            if tech == Technology::De {
                de += cell.peak_kw;
            }
        }
        if de != self.de_capacity_kw {
            return Err(Error::PlanMismatch(format!(
                "recorded DE capacity {} kW, recomputed {de} kW",
                self.de_capacity_kw
            )));
        }
        if de > params.expansion_budget_kw {
            return Err(Error::ConstraintViolation(format!(
                "DE capacity {de} kW exceeds the budget of {} kW",
                params.expansion_budget_kw
            )));
        }
        let micro: i64 = self.breakdowns.iter().map(|b| b.total_micro()).sum();
        if micro != self.objective_micro {
            return Err(Error::PlanMismatch(format!(
                "objective {} micro-EUR differs from breakdown sum {micro}",
                self.objective_micro
            )));
        }
        let float_sum: f64 = self.breakdowns.iter().map(|b| b.total).sum();
        let tol = 1e-6 * float_sum.abs().max(1.0);
        if (float_sum - self.objective).abs() > tol {
            return Err(Error::PlanMismatch(format!(
                "objective {} differs from breakdown total {float_sum}",
                self.objective
            )));
        }
        Ok(())
    }
}

/// Cell indices sorted by id; the order used for tie-breaking.
pub(crate) fn id_order(cells: &[CellRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| cells[a].id.cmp(&cells[b].id));
    order
}

fn check_inputs(cells: &[CellRecord], params: &CostParameters, prices: &PriceVector) -> Result<()> {
    validate_cells(cells)?;
    params.validate()?;
    prices.validate()
}

/// Builds the knapsack for an instance.
pub fn reduce_to_knapsack(
    cells: &[CellRecord],
    params: &CostParameters,
    prices: &PriceVector,
) -> Result<KnapsackInstance> {
    check_inputs(cells, params, prices)?;
    let matrix = cost_matrix(cells, params, prices)?;
    Ok(knapsack::reduce(
        cells,
        &matrix,
        &id_order(cells),
        params.expansion_budget_kw,
    ))
}

/// Minimum-cost plan at fixed prices, using the default DP solver.
pub fn solve_deterministic(cells: &[CellRecord], params: &CostParameters, prices: &PriceVector) -> Result<Plan> {
    solve_deterministic_with(cells, params, prices, Solver::default())
}

pub fn solve_deterministic_with(
    cells: &[CellRecord],
    params: &CostParameters,
    prices: &PriceVector,
    solver: Solver,
) -> Result<Plan> {
    if solver == Solver::BruteForce {
        return brute_force(cells, params, prices);
    }
    check_inputs(cells, params, prices)?;
    let matrix = cost_matrix(cells, params, prices)?;
    let inst = knapsack::reduce(cells, &matrix, &id_order(cells), params.expansion_budget_kw);
    let solution = match solver {
        Solver::Dp { granularity_kw } => solve_knapsack_dp(&inst, granularity_kw)?,
        Solver::BranchAndBound => solve_knapsack_bb(&inst),
        Solver::BruteForce => unreachable!(),
    };

    let mut assignment = inst.base_choice.clone();
    for &c in &inst.free_cells {
        assignment[c] = Technology::De;
    }
    for &k in &solution.selected {
        assignment[inst.items[k].cell] = Technology::De;
    }
    let plan = Plan::from_assignment(cells, &matrix, assignment, *prices, solver.kind());
    debug_assert_eq!(plan.objective_micro, inst.objective_micro(&solution));
    Ok(plan)
}

/// Plan minimizing the worst-case cost over `price_box`.
pub fn solve_robust(cells: &[CellRecord], params: &CostParameters, price_box: &UncertaintyBox) -> Result<Plan> {
    solve_robust_with(cells, params, price_box, Solver::default())
}

pub fn solve_robust_with(
    cells: &[CellRecord],
    params: &CostParameters,
    price_box: &UncertaintyBox,
    solver: Solver,
) -> Result<Plan> {
    price_box.validate()?;
    solve_deterministic_with(cells, params, &price_box.worst_case_prices(), solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cells(rng: &mut ChaCha8Rng, n: usize) -> Vec<CellRecord> {
        (0..n)
            .map(|i| {
                let p = rng.random_range(1..8000) as f64;
                CellRecord::new(
                    format!("cell{i:02}"),
                    p * rng.random_range(300..3000) as f64,
                    p,
                    rng.random_range(0..20_000) as f64,
                    rng.random_bool(0.2),
                )
            })
            .collect()
    }

    #[test]
    fn single_cell_picks_cheapest() {
        let cells = vec![CellRecord::new("a", 1e6, 500.0, 1000.0, false)];
        let params = reference_params();
        let prices = reference_prices();
        let plan = solve_deterministic(&cells, &params, &prices).unwrap();
        let best = Technology::ALL
            .into_iter()
            .min_by(|&a, &b| {
                let ca = annualized_cost(&cells[0], a, &params, &prices).unwrap().total;
                let cb = annualized_cost(&cells[0], b, &params, &prices).unwrap().total;
                ca.total_cmp(&cb)
            })
            .unwrap();
        assert_eq!(plan.assignment, vec![best]);
        plan.validate(&cells, &params).unwrap();
    }

    #[test]
    fn zero_budget_forbids_de() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = reference_params().with_budget(0.0);
        for _ in 0..20 {
            let cells = random_cells(&mut rng, 8);
            let plan = solve_deterministic(&cells, &params, &reference_prices()).unwrap();
            assert!(!plan.assignment.contains(&Technology::De));
            assert_eq!(plan.de_capacity_kw, 0.0);
        }
    }

    #[test]
    fn zero_peak_cell_uses_no_budget() {
        let cells = vec![CellRecord::new("empty", 0.0, 0.0, 5000.0, false)];
        let params = reference_params().with_budget(0.0);
        let plan = solve_deterministic(&cells, &params, &reference_prices()).unwrap();
        // DE costs nothing here; every other option pays for pipes.
        assert_eq!(plan.assignment, vec![Technology::De]);
        assert_eq!(plan.objective_micro, 0);
        assert_eq!(
            brute_force(&cells, &params, &reference_prices()).unwrap().assignment,
            plan.assignment
        );
    }

    #[test]
    fn solvers_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let cells = random_cells(&mut rng, 7);
            let total: f64 = cells.iter().map(|c| c.peak_kw).sum();
            let params = reference_params().with_budget((total * rng.random_range(0.0..0.6)).floor());
            let prices = reference_prices();
            let dp = solve_deterministic(&cells, &params, &prices).unwrap();
            let bb = solve_deterministic_with(&cells, &params, &prices, Solver::BranchAndBound).unwrap();
            let bf = brute_force(&cells, &params, &prices).unwrap();
            for p in [&dp, &bb, &bf] {
                p.validate(&cells, &params).unwrap();
            }
            assert_eq!(dp.objective_micro, bf.objective_micro);
            assert_eq!(dp.assignment, bf.assignment);
            assert_eq!(bb.assignment, bf.assignment);
        }
    }

    #[test]
    fn slack_budget_decouples_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = reference_params().with_budget(f64::INFINITY);
        let prices = reference_prices();
        for _ in 0..20 {
            let cells = random_cells(&mut rng, 12);
            let m = cost_matrix(&cells, &params, &prices).unwrap();
            let independent: i64 = cells
                .iter()
                .enumerate()
                .map(|(i, c)| allowed_technologies(c).iter().map(|&t| m.key(i, t)).min().unwrap())
                .sum();
            assert_eq!(
                solve_deterministic(&cells, &params, &prices).unwrap().objective_micro,
                independent
            );
        }
    }

    #[test]
    fn robust_equals_deterministic_at_worst_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = reference_params().with_budget(20_000.0);
        for _ in 0..10 {
            let cells = random_cells(&mut rng, 10);
            let b = UncertaintyBox::new(reference_prices(), 0.5, 2.0).unwrap();
            let robust = solve_robust(&cells, &params, &b).unwrap();
            let direct = solve_deterministic(&cells, &params, &b.worst_case_prices()).unwrap();
            assert_eq!(robust, direct);
            let nominal = solve_deterministic(&cells, &params, &reference_prices()).unwrap();
            assert!(robust.objective_micro >= nominal.objective_micro);
        }
    }

    #[test]
    fn degenerate_box_is_nominal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cells = random_cells(&mut rng, 10);
        let params = reference_params();
        let robust = solve_robust(&cells, &params, &UncertaintyBox::degenerate(reference_prices())).unwrap();
        assert_eq!(
            robust,
            solve_deterministic(&cells, &params, &reference_prices()).unwrap()
        );
    }

    #[test]
    fn validate_catches_violations() {
        let cells = vec![
            CellRecord::new("a", 1e6, 500.0, 1000.0, true),
            CellRecord::new("b", 1e5, 100.0, 9000.0, false),
        ];
        let params = reference_params();
        let mut plan = solve_deterministic(&cells, &params, &reference_prices()).unwrap();
        plan.validate(&cells, &params).unwrap();
        plan.assignment[0] = Technology::Dg;
        assert!(matches!(
            plan.validate(&cells, &params),
            Err(Error::ConstraintViolation(_))
        ));

        let plan = solve_deterministic(&cells, &params, &reference_prices()).unwrap();
        assert!(plan.validate(&cells[..1], &params).is_err());
        let tight = reference_params().with_budget(plan.de_capacity_kw - 1.0);
        if plan.de_capacity_kw > 0.0 {
            assert!(plan.validate(&cells, &tight).is_err());
        }
    }

    #[test]
    fn ties_resolve_to_canonical_order() {
        // Two identical free cells and room for only one DE: the DE cell is
        // the later id when the base choice precedes DE.
        let params = reference_params().with_budget(100.0);
        let prices = reference_prices();
        let cells = vec![
            CellRecord::new("b", 50_000.0, 100.0, 2000.0, false),
            CellRecord::new("a", 50_000.0, 100.0, 2000.0, false),
        ];
        let bf = brute_force(&cells, &params, &prices).unwrap();
        for solver in [Solver::default(), Solver::BranchAndBound] {
            assert_eq!(
                solve_deterministic_with(&cells, &params, &prices, solver)
                    .unwrap()
                    .assignment,
                bf.assignment
            );
        }
    }

    #[test]
    fn evaluate_reprices_a_solved_plan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cells = random_cells(&mut rng, 20);
        let params = reference_params();
        let plan = solve_deterministic(&cells, &params, &reference_prices()).unwrap();
        let again = Plan::evaluate(&cells, &params, &reference_prices(), plan.assignment.clone()).unwrap();
        assert_eq!(again.objective_micro, plan.objective_micro);
        assert_eq!(again.solver, SolverKind::Given);

        let locked = cells.iter().position(|c| c.has_district_heating).unwrap();
        let mut bad = plan.assignment.clone();
        bad[locked] = Technology::De;
        assert!(Plan::evaluate(&cells, &params, &reference_prices(), bad).is_err());
        assert!(Plan::evaluate(&cells, &params, &reference_prices(), vec![Technology::Ce]).is_err());
    }
}
