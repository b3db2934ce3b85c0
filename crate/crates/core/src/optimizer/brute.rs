use super::{check_inputs, id_order, Plan, SolverKind};
use crate::error::{Error, Result};
use crate::model::{
    allowed_technologies, cost_matrix, CellRecord, CostMatrix, CostParameters, PriceVector, Technology,
};

/// 4^12 ≈ 1.7e7 assignments.
pub const BRUTE_FORCE_MAX_CELLS: usize = 12;

struct Enumeration<'a> {
    cells: &'a [CellRecord],
    matrix: &'a CostMatrix,
    order: Vec<usize>,
    budget: f64,
    current: Vec<Technology>,
    best: Option<(i64, Vec<Technology>)>,
}

impl Enumeration<'_> {
    // Cells are visited in id order and technologies in canonical order, so
    // leaves arrive in lexicographic order and the first optimum is kept.
    fn visit(&mut self, depth: usize, cost: i64, de_kw: f64) {
        if depth == self.order.len() {
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.current.clone()));
            }
            return;
        }
        let i = self.order[depth];
        let cell = &self.cells[i];
        for &tech in allowed_technologies(cell) {
            let de_next = if tech == Technology::De {
                de_kw + cell.peak_kw
            } else {
                de_kw
            };
            if de_next > self.budget {
                continue;
            }
            self.current[i] = tech;
            self.visit(depth + 1, cost + self.matrix.key(i, tech), de_next);
        }
    }
}

/// Globally optimal plan by enumerating every admissible assignment.
pub fn brute_force(cells: &[CellRecord], params: &CostParameters, prices: &PriceVector) -> Result<Plan> {
    if cells.len() > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::TooManyCells {
            cells: cells.len(),
            limit: BRUTE_FORCE_MAX_CELLS,
        });
    }
    check_inputs(cells, params, prices)?;
    let matrix = cost_matrix(cells, params, prices)?;
    let mut search = Enumeration {
        cells,
        matrix: &matrix,
        order: id_order(cells),
        budget: params.expansion_budget_kw,
        current: vec![Technology::Ce; cells.len()],
        best: None,
    };
    search.visit(0, 0, 0.0);
    let (_, assignment) = search.best.expect("all-CE is always feasible");
    Ok(Plan::from_assignment(
        cells,
        &matrix,
        assignment,
        *prices,
        SolverKind::Brute,
    ))
}
