//! Reduction of the planning problem to a 0/1 knapsack and two exact solvers.
//!
//! Each cell must take exactly one technology, and the only constraint that
//! links cells is the kW budget on decentralized heat pumps (DE). Fixing
//! every cell to its cheapest admissible non-DE technology gives a base plan;
//! switching a cell to DE then costs `peak_kw` of budget and saves
//! `base_cost - de_cost`. Choosing which cells to switch is a 0/1 knapsack.
//!
//! Ties between optimal plans are broken lexicographically: cells in id
//! order, technologies in canonical order. Switching a cell whose base choice
//! is DG to DE makes the plan lexicographically smaller (DE < DG), so such
//! cells are kept as items even at zero saving and are flagged
//! `prefer_take`. Both solvers return the lexicographically preferred optimum
//! over item order.

use crate::error::{Error, Result};
use crate::model::{CellRecord, CostMatrix, Technology};

/// Largest DP decision table, in cells (one bit each).
pub const DP_TABLE_LIMIT: u128 = 1 << 31;

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackItem {
    /// Index into the cell slice the instance was built from.
    pub cell: usize,
    pub cell_id: String,
    pub weight_kw: f64,
    /// Annual saving from switching to DE, micro-euros.
    pub saving_micro: i64,
    pub prefer_take: bool,
}

impl KnapsackItem {
    pub fn saving(&self) -> f64 {
        crate::model::from_micro(self.saving_micro)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    /// Candidate cells, in cell-id order.
    pub items: Vec<KnapsackItem>,
    pub capacity_kw: f64,
    /// Cost of the base plan, micro-euros per year.
    pub base_cost_micro: i64,
    /// Cheapest admissible non-DE technology per cell (input order).
    pub base_choice: Vec<Technology>,
    /// Cells with zero peak load where DE wins. They use no budget and are
    /// always switched.
    pub free_cells: Vec<usize>,
    pub free_saving_micro: i64,
}

impl KnapsackInstance {
    /// A bare instance with no base plan, mostly useful for testing solvers.
    pub fn from_items(items: Vec<KnapsackItem>, capacity_kw: f64) -> Self {
        KnapsackInstance {
            items,
            capacity_kw,
            base_cost_micro: 0,
            base_choice: Vec::new(),
            free_cells: Vec::new(),
            free_saving_micro: 0,
        }
    }

    /// Objective (micro-euros) of the plan that switches `selected` items.
    pub fn objective_micro(&self, solution: &KnapsackSolution) -> i64 {
        self.base_cost_micro - self.free_saving_micro - solution.saving_micro
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackSolution {
    /// Selected item indices, ascending.
    pub selected: Vec<usize>,
    pub saving_micro: i64,
    /// Search nodes visited (branch-and-bound only).
    pub nodes: u64,
}

impl KnapsackSolution {
    pub fn saving(&self) -> f64 {
        crate::model::from_micro(self.saving_micro)
    }
}

/// Builds the knapsack from precomputed costs. `order` lists cell indices in
/// id order.
pub(crate) fn reduce(cells: &[CellRecord], matrix: &CostMatrix, order: &[usize], capacity_kw: f64) -> KnapsackInstance {
    let mut base_choice = vec![Technology::Ce; cells.len()];
    let mut base_cost_micro = 0i64;
    let mut items = Vec::new();
    let mut free_cells = Vec::new();
    let mut free_saving_micro = 0i64;

    for &i in order {
        let cell = &cells[i];
        let base = crate::model::allowed_technologies(cell)
            .iter()
            .copied()
            .filter(|&t| t != Technology::De)
            .min_by_key(|&t| (matrix.key(i, t), t))
            .expect("centralized technologies are always allowed");
        base_choice[i] = base;
        let base_key = matrix.key(i, base);
        base_cost_micro += base_key;

        if cell.has_district_heating {
            continue;
        }
        let saving = base_key - matrix.key(i, Technology::De);
        let prefer_take = base == Technology::Dg;
        if saving > 0 || (saving == 0 && prefer_take) {
            if cell.peak_kw > 0.0 {
                items.push(KnapsackItem {
                    cell: i,
                    cell_id: cell.id.clone(),
                    weight_kw: cell.peak_kw,
                    saving_micro: saving,
                    prefer_take,
                });
            } else {
                free_cells.push(i);
                free_saving_micro += saving;
            }
        }
    }

    KnapsackInstance {
        items,
        capacity_kw,
        base_cost_micro,
        base_choice,
        free_cells,
        free_saving_micro,
    }
}

/// Weights rounded up and capacity rounded down to `granularity` units, so
/// any selection feasible in units is feasible in kW.
fn discretize(inst: &KnapsackInstance, granularity: f64) -> (Vec<u64>, u64) {
    let weights = inst
        .items
        .iter()
        .map(|it| (it.weight_kw / granularity).ceil() as u64)
        .collect();
    let capacity = if inst.capacity_kw.is_finite() {
        (inst.capacity_kw / granularity).floor() as u64
    } else {
        u64::MAX
    };
    (weights, capacity)
}

/// Solution when capacity is not binding: every item worth taking.
fn select_all(inst: &KnapsackInstance) -> KnapsackSolution {
    let selected: Vec<usize> = (0..inst.items.len())
        .filter(|&k| {
            let it = &inst.items[k];
            it.saving_micro > 0 || (it.saving_micro == 0 && it.prefer_take)
        })
        .collect();
    KnapsackSolution {
        saving_micro: selected.iter().map(|&k| inst.items[k].saving_micro).sum(),
        selected,
        nodes: 0,
    }
}

fn fits_entirely(weights: &[u64], capacity: u64) -> bool {
    weights
        .iter()
        .try_fold(0u64, |acc, &w| acc.checked_add(w))
        .is_some_and(|total| total <= capacity)
}

/// Exact dynamic program over capacity in `granularity_kw` units.
///
/// Items are processed last-to-first so that one decision bit per
/// (item, capacity) records the preferred optimal choice for the suffix;
/// walking the bits forward then yields the lexicographically preferred
/// optimum.
pub fn solve_knapsack_dp(inst: &KnapsackInstance, granularity_kw: u64) -> Result<KnapsackSolution> {
    if granularity_kw == 0 {
        return Err(Error::InvalidGranularity);
    }
    let (weights, capacity) = discretize(inst, granularity_kw as f64);
    if fits_entirely(&weights, capacity) {
        return Ok(select_all(inst));
    }

    let n = inst.items.len();
    // Here capacity < sum of weights, so it is a sensible table width.
    let columns = capacity + 1;
    let required = n as u128 * columns as u128;
    if required > DP_TABLE_LIMIT {
        return Err(Error::GranularityTooFine {
            required,
            items: n,
            columns,
            limit: DP_TABLE_LIMIT,
        });
    }
    let columns = columns as usize;
    let words = columns.div_ceil(64);
    let mut take = vec![0u64; n * words];
    let mut best = vec![0i64; columns];

    for k in (0..n).rev() {
        let w = weights[k] as usize;
        if w >= columns {
            continue;
        }
        let v = inst.items[k].saving_micro;
        let pref = inst.items[k].prefer_take;
        let row = &mut take[k * words..(k + 1) * words];
        for c in (w..columns).rev() {
            let with = best[c - w] + v;
            if with > best[c] || (pref && with == best[c]) {
                best[c] = with;
                row[c / 64] |= 1 << (c % 64);
            }
        }
    }

    let mut c = columns - 1;
    let mut selected = Vec::new();
    for (k, &w) in weights.iter().enumerate() {
        if take[k * words + c / 64] & (1 << (c % 64)) != 0 {
            selected.push(k);
            c -= w as usize;
        }
    }
    let saving_micro = selected.iter().map(|&k| inst.items[k].saving_micro).sum();
    debug_assert_eq!(saving_micro, best[columns - 1]);
    Ok(KnapsackSolution {
        selected,
        saving_micro,
        nodes: 0,
    })
}

struct BranchAndBound<'a> {
    weights: &'a [u64],
    values: Vec<i64>,
    prefer: Vec<bool>,
    /// Item indices by saving per kW, descending.
    by_ratio: Vec<usize>,
    /// Value of a feasible greedy solution; the search only accepts leaves
    /// reaching it until an incumbent exists.
    hint: i64,
    incumbent: Option<(i64, Vec<bool>)>,
    chosen: Vec<bool>,
    nodes: u64,
}

impl BranchAndBound<'_> {
    /// Fractional-relaxation bound over items `from..`, floored.
    fn bound(&self, from: usize, mut room: u64) -> i64 {
        let mut total: i128 = 0;
        for &k in &self.by_ratio {
            if k < from {
                continue;
            }
            let w = self.weights[k];
            if w <= room {
                room -= w;
                total += self.values[k] as i128;
            } else {
                total += self.values[k] as i128 * room as i128 / w as i128;
                break;
            }
        }
        total as i64
    }

    fn search(&mut self, k: usize, room: u64, value: i64) {
        self.nodes += 1;
        let bound = value + self.bound(k, room);
        match &self.incumbent {
            // Only strictly better leaves replace the incumbent: leaves are
            // visited in preferred order, so the first optimum found wins.
            Some((best, _)) if bound <= *best => return,
            None if bound < self.hint => return,
            _ => {}
        }
        if k == self.weights.len() {
            self.incumbent = Some((value, self.chosen.clone()));
            return;
        }
        let fits = self.weights[k] <= room;
        let order = if self.prefer[k] { [true, false] } else { [false, true] };
        for take in order {
            if take {
                if !fits {
                    continue;
                }
                self.chosen[k] = true;
                self.search(k + 1, room - self.weights[k], value + self.values[k]);
                self.chosen[k] = false;
            } else {
                self.search(k + 1, room, value);
            }
        }
    }
}

/// Exact depth-first branch and bound with the fractional-knapsack bound.
/// Works on whole-kW weights (peak loads rounded up).
pub fn solve_knapsack_bb(inst: &KnapsackInstance) -> KnapsackSolution {
    let (weights, capacity) = discretize(inst, 1.0);
    if fits_entirely(&weights, capacity) {
        return select_all(inst);
    }
    let n = weights.len();
    let values: Vec<i64> = inst.items.iter().map(|it| it.saving_micro).collect();
    let mut by_ratio: Vec<usize> = (0..n).collect();
    by_ratio.sort_by(|&a, &b| {
        let lhs = values[a] as i128 * weights[b] as i128;
        let rhs = values[b] as i128 * weights[a] as i128;
        rhs.cmp(&lhs).then(a.cmp(&b))
    });

    let mut room = capacity;
    let mut hint = 0i64;
    for &k in &by_ratio {
        if weights[k] <= room {
            room -= weights[k];
            hint += values[k];
        }
    }

    let mut bb = BranchAndBound {
        weights: &weights,
        values,
        prefer: inst.items.iter().map(|it| it.prefer_take).collect(),
        by_ratio,
        hint,
        incumbent: None,
        chosen: vec![false; n],
        nodes: 0,
    };
    bb.search(0, capacity, 0);
    let (saving_micro, chosen) = bb.incumbent.expect("greedy solution bounds the search from below");
    KnapsackSolution {
        selected: (0..n).filter(|&k| chosen[k]).collect(),
        saving_micro,
        nodes: bb.nodes,
    }
}
