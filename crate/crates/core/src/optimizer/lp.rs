//! CPLEX-style LP export of the full assignment model.
//!
//! Layout (deterministic, one section per block):
//!
//! ```text
//! \ comment header, one line per cell: index -> id
//! Minimize
//!  cost: <c> x_0_ce + <c> x_0_cg + ...          (4 terms per line)
//! Subject To
//!  one_<i>: x_<i>_ce + x_<i>_cg + x_<i>_de + x_<i>_dg = 1
//!  lock_<i>: x_<i>_de + x_<i>_dg <= <1 - W_i>
//!  budget: <P_0> x_0_de + ... <= <budget_kw>    (omitted when unlimited)
//! Bounds
//!  x_<i>_de = 0                                 (cells with district heating)
//!  x_<i>_dg = 0
//! Binaries
//!  x_0_ce x_0_cg ...
//! End
//! ```
//!
//! Variables are named by cell position, not id, so arbitrary ids cannot
//! produce invalid LP names. Coefficients use Rust's shortest round-trip
//! float formatting.

use std::fmt::Write;

use super::check_inputs;
use crate::error::Result;
use crate::model::{cost_matrix, CellRecord, CostParameters, PriceVector, Technology};

const TERMS_PER_LINE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Minimum peak load (kW) for building a new district heating grid in a
    /// cell without one. Documented in the file as comment rows only; the
    /// solvers never apply it. At 0 it is vacuous.
    pub dh_min_load_kw: f64,
    /// Big-M constant quoted in those comment rows.
    pub big_m: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            dh_min_load_kw: 0.0,
            big_m: 1e9,
        }
    }
}

fn var(i: usize, tech: Technology) -> String {
    format!("x_{i}_{tech}")
}

fn write_wrapped(out: &mut String, head: &str, terms: &[String], tail: &str) {
    out.push(' ');
    out.push_str(head);
    if terms.is_empty() {
        out.push_str(" 0");
    }
    for (k, term) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        out.push_str(if k == 0 { " " } else { " + " });
        out.push_str(term);
    }
    out.push_str(tail);
    out.push('\n');
}

pub fn export_lp(cells: &[CellRecord], params: &CostParameters, prices: &PriceVector) -> Result<String> {
    export_lp_with(cells, params, prices, &LpOptions::default())
}

pub fn export_lp_with(
    cells: &[CellRecord],
    params: &CostParameters,
    prices: &PriceVector,
    options: &LpOptions,
) -> Result<String> {
    check_inputs(cells, params, prices)?;
    let matrix = cost_matrix(cells, params, prices)?;
    let mut out = String::new();

    out.push_str("\\ Heating technology assignment, annualized cost in EUR/a\n");
    let _ = writeln!(
        out,
        "\\ prices EUR/kWh: ce {} cg {} de {} dg {}",
        prices[Technology::Ce],
        prices[Technology::Cg],
        prices[Technology::De],
        prices[Technology::Dg]
    );
    let _ = writeln!(out, "\\ cells: {}", cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let id: String = cell.id.chars().map(|c| if c.is_control() { ' ' } else { c }).collect();
        let _ = writeln!(out, "\\   {i} = {id}");
    }

    out.push_str("Minimize\n");
    let objective: Vec<String> = matrix
        .entries()
        .map(|(i, tech, b)| format!("{} {}", b.total, var(i, tech)))
        .collect();
    write_wrapped(&mut out, "cost:", &objective, "");

    out.push_str("Subject To\n");
    for i in 0..cells.len() {
        let vars: Vec<String> = Technology::ALL.iter().map(|&t| var(i, t)).collect();
        write_wrapped(&mut out, &format!("one_{i}:"), &vars, " = 1");
    }
    for (i, cell) in cells.iter().enumerate() {
        let rhs = if cell.has_district_heating { 0 } else { 1 };
        let _ = writeln!(
            out,
            " lock_{i}: {} + {} <= {rhs}",
            var(i, Technology::De),
            var(i, Technology::Dg)
        );
    }
    let budget_terms: Vec<String> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{} {}", c.peak_kw, var(i, Technology::De)))
        .collect();
    if params.expansion_budget_kw.is_finite() {
        write_wrapped(
            &mut out,
            "budget:",
            &budget_terms,
            &format!(" <= {}", params.expansion_budget_kw),
        );
    } else {
        out.push_str("\\ budget: unlimited, row omitted\n");
    }

    let q = options.dh_min_load_kw;
    let _ = writeln!(
        out,
        "\\ district heating minimum load Q = {q} kW (M = {}): peak_i >= Q - M (1 - x_i_j + W_i), j in ce, cg",
        options.big_m
    );
    if q > 0.0 {
        out.push_str("\\ not enforced; rows that would bind:\n");
        for (i, cell) in cells.iter().enumerate() {
            if cell.has_district_heating || cell.peak_kw >= q {
                continue;
            }
            for tech in [Technology::Ce, Technology::Cg] {
                let _ = writeln!(
                    out,
                    "\\  dhmin_{i}_{tech}: {} >= {q} - {} (1 - {})",
                    cell.peak_kw,
                    options.big_m,
                    var(i, tech)
                );
            }
        }
    } else {
        out.push_str("\\ vacuous at Q = 0, not written\n");
    }

    out.push_str("Bounds\n");
    for (i, cell) in cells.iter().enumerate() {
        if cell.has_district_heating {
            let _ = writeln!(out, " {} = 0", var(i, Technology::De));
            let _ = writeln!(out, " {} = 0", var(i, Technology::Dg));
        }
    }

    out.push_str("Binaries\n");
    for i in 0..cells.len() {
        let vars: Vec<String> = Technology::ALL.iter().map(|&t| var(i, t)).collect();
        let _ = writeln!(out, " {}", vars.join(" "));
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    fn count(doc: &str, pat: &str) -> usize {
        doc.lines().filter(|l| l.trim_start().starts_with(pat)).count()
    }

    #[test]
    fn single_cell_structure() {
        let cells = vec![CellRecord::new("a", 1e6, 500.0, 1000.0, false)];
        let doc = export_lp(&cells, &reference_params(), &reference_prices()).unwrap();
        let binaries = doc.split("Binaries\n").nth(1).unwrap().split("End").next().unwrap();
        assert_eq!(binaries.split_whitespace().count(), 4);
        assert_eq!(
            doc.lines().filter(|l| l.ends_with("= 1") && l.contains("one_")).count(),
            1
        );
        assert_eq!(count(&doc, "budget:"), 1);
        assert_eq!(count(&doc, "lock_0:"), 1);
        assert!(doc.contains("119350 x_0_ce"), "{doc}");
        assert!(doc.ends_with("End\n"));
    }

    #[test]
    fn district_heating_bounds() {
        let cells = vec![
            CellRecord::new("a", 1e6, 500.0, 1000.0, false),
            CellRecord::new("b", 1e6, 500.0, 1000.0, true),
        ];
        let doc = export_lp(&cells, &reference_params(), &reference_prices()).unwrap();
        let bounds = doc.split("Bounds\n").nth(1).unwrap().split("Binaries").next().unwrap();
        assert_eq!(bounds, " x_1_de = 0\n x_1_dg = 0\n");
        assert!(doc.contains(" lock_1: x_1_de + x_1_dg <= 0\n"));
        assert!(doc.contains(" lock_0: x_0_de + x_0_dg <= 1\n"));
    }

    #[test]
    fn unlimited_budget_omits_row() {
        let cells = vec![CellRecord::new("a", 1e6, 500.0, 1000.0, false)];
        let params = reference_params().with_budget(f64::INFINITY);
        let doc = export_lp(&cells, &params, &reference_prices()).unwrap();
        assert_eq!(count(&doc, "budget:"), 0);
    }

    #[test]
    fn threshold_rows_are_comments() {
        let cells = vec![CellRecord::new("a", 1e5, 50.0, 1000.0, false)];
        let opts = LpOptions {
            dh_min_load_kw: 100.0,
            ..LpOptions::default()
        };
        let doc = export_lp_with(&cells, &reference_params(), &reference_prices(), &opts).unwrap();
        let rows: Vec<&str> = doc.lines().filter(|l| l.contains("dhmin_")).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|l| l.starts_with('\\')));
    }

    #[test]
    fn byte_stable() {
        let cells: Vec<CellRecord> = (0..9)
            .map(|i| {
                CellRecord::new(
                    format!("c{i}"),
                    1e5 * i as f64,
                    100.0 * i as f64 + 1.0,
                    700.0,
                    i % 3 == 0,
                )
            })
            .collect();
        let a = export_lp(&cells, &reference_params(), &reference_prices()).unwrap();
        let b = export_lp(&cells, &reference_params(), &reference_prices()).unwrap();
        assert_eq!(a, b);
        // Long rows wrap.
        assert!(a.lines().all(|l| l.len() < 255));
    }
}
