//! File formats and the synthetic instance generator.

mod cells;
mod export;
mod params;
mod synth;

pub use cells::{cells_to_string, load_cells, read_cells, write_cells, CELL_HEADER, CENTROID_HEADER};
pub use export::{
    export_plan, plan_csv, plan_geojson, read_plan_csv, sweep_csv, ExportFormat, PLAN_HEADER, SWEEP_HEADER,
};
pub use params::{load_params, parse_params, reference_scenario, Scenario, REFERENCE_PARAMS_JSON};
pub use synth::{synthesize_instance, synthesize_instance_with, Profile, FULL_LOAD_HOURS, MAX_PEAK_KW, MIN_PEAK_KW};
