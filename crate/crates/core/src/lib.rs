//! Robust technology selection for urban heat supply.
//!
//! A city is a set of grid cells, each with an annual heat demand, a peak
//! load, a street length and a flag for existing district heating. Every cell
//! gets one of four technologies: centralized electric (`ce`), centralized
//! gas (`cg`), decentralized electric (`de`) or decentralized gas (`dg`).
//! Decentralized electric capacity is limited by a city-wide power grid
//! expansion budget, and energy prices are only known up to a box.
//!
//! ```
//! use heatplan::io::reference_scenario;
//! use heatplan::model::CellRecord;
//! use heatplan::optimizer::solve_robust;
//!
//! let scenario = reference_scenario();
//! let cells = vec![
//!     CellRecord::new("core", 40_000_000.0, 20_000.0, 15_000.0, true),
//!     CellRecord::new("edge", 200_000.0, 100.0, 2_000.0, false),
//! ];
//! let plan = solve_robust(&cells, &scenario.params, &scenario.price_box()?).unwrap();
//! assert_eq!(plan.len(), 2);
//! # Ok::<(), heatplan::Error>(())
//! ```

pub mod analysis;
pub mod error;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod uncertainty;

pub use error::{Error, Result};
pub use model::{CellRecord, CostParameters, PriceVector, Technology};
pub use optimizer::{solve_deterministic, solve_robust, Plan, Solver};
pub use uncertainty::UncertaintyBox;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cost-model.md")]
    mod cost_model {}
    #[doc = include_str!("../../../book/src/uncertainty.md")]
    mod uncertainty {}
    #[doc = include_str!("../../../book/src/knapsack.md")]
    mod knapsack {}
    #[doc = include_str!("../../../book/src/sweep.md")]
    mod sweep {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
