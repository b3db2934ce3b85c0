//! `heatplan` command-line front end.
//!
//! Exit codes: 0 on success, 1 when inputs fail validation or a plan
//! violates its guarantee, 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use heatplan::analysis::{delta_grid, sweep_deviation_with, validate_plan_with};
use heatplan::io::{
    cells_to_string, load_cells, load_params, plan_csv, plan_geojson, read_plan_csv, reference_scenario, sweep_csv,
    synthesize_instance_with, Profile, Scenario, FULL_LOAD_HOURS,
};
use heatplan::model::{CellRecord, CostParameters, PerTech, PriceVector, Technology};
use heatplan::optimizer::{export_lp_with, solve_deterministic_with, solve_robust_with, LpOptions, Plan, Solver};
use heatplan::uncertainty::UncertaintyBox;

const THREADS_ENV: &str = "HEATPLAN_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "heatplan",
    version,
    about = "Robust heating technology planning for city grid cells"
)]
struct Cli {
    /// Parameter file (JSON); defaults to the bundled reference set.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Cell instance (CSV).
    #[arg(long, global = true)]
    cells: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for sampling and synthetic instances.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for one plan; writes plan.csv and, with centroids, plan.geojson.
    Solve {
        #[command(flatten)]
        prices: PriceArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Re-solve over a range of hydrogen price deviations; writes sweep.csv.
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        h2_from: f64,
        #[arg(long, default_value_t = 2.0)]
        h2_to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Electricity price deviation; defaults to the parameter file.
        #[arg(long)]
        delta_el: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Replay a plan against sampled prices; writes validation.json.
    Validate {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Plan CSV to check; by default the robust plan is solved first.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[command(flatten)]
        deltas: DeltaArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write the assignment problem as a MILP in LP format; writes model.lp.
    ExportLp {
        #[command(flatten)]
        prices: PriceArgs,
        /// Minimum peak load for centrally supplied cells, kW (comment only).
        #[arg(long, default_value_t = 0.0)]
        dh_min_load_kw: f64,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Generate a synthetic instance; writes cells.csv.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ProfileArg::HamburgLike)]
        profile: ProfileArg,
        #[arg(long, default_value_t = FULL_LOAD_HOURS)]
        full_load_hours: f64,
    },
}

#[derive(Args, Debug)]
struct DeltaArgs {
    /// Electricity price deviation (0.5 = 50 %); defaults to the parameter file.
    #[arg(long)]
    delta_el: Option<f64>,
    /// Hydrogen price deviation; defaults to the parameter file.
    #[arg(long)]
    delta_h2: Option<f64>,
}

#[derive(Args, Debug)]
struct PriceArgs {
    /// Use nominal prices instead of the worst case.
    #[arg(long, conflicts_with_all = ["delta_el", "delta_h2"])]
    nominal: bool,
    #[command(flatten)]
    deltas: DeltaArgs,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Dp)]
    solver: SolverArg,
    /// DP capacity step in kW.
    #[arg(long, default_value_t = 1)]
    granularity: u64,
    /// Override the DE expansion budget, kW.
    #[arg(long, conflicts_with = "unlimited_budget")]
    budget_kw: Option<f64>,
    #[arg(long)]
    unlimited_budget: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverArg {
    Dp,
    Bb,
    Brute,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProfileArg {
    #[value(name = "hamburg_like")]
    HamburgLike,
    Uniform,
}

impl ModelArgs {
    fn solver(&self) -> Solver {
        match self.solver {
            SolverArg::Dp => Solver::Dp {
                granularity_kw: self.granularity,
            },
            SolverArg::Bb => Solver::BranchAndBound,
            SolverArg::Brute => Solver::BruteForce,
        }
    }

    fn apply(&self, params: CostParameters) -> CostParameters {
        if self.unlimited_budget {
            params.with_budget(f64::INFINITY)
        } else if let Some(b) = self.budget_kw {
            params.with_budget(b)
        } else {
            params
        }
    }
}

impl DeltaArgs {
    fn price_box(&self, scenario: &Scenario) -> heatplan::Result<UncertaintyBox> {
        UncertaintyBox::new(
            scenario.nominal,
            self.delta_el.unwrap_or(scenario.delta_electricity),
            self.delta_h2.unwrap_or(scenario.delta_hydrogen),
        )
    }
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, message).exit()
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return;
    };
    let threads: usize = raw.trim().parse().unwrap_or_else(|_| {
        usage_error(
            ErrorKind::InvalidValue,
            format!("{THREADS_ENV} must be a whole number, got `{raw}`"),
        )
    });
    if threads > 0 {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn budget_text(kw: f64) -> String {
    if kw.is_finite() {
        format!("{kw} kW")
    } else {
        "unlimited".into()
    }
}

fn print_config(scenario: &Scenario, params: &CostParameters, cli: &Cli, extra: &[(&str, String)]) {
    let source = cli
        .params
        .as_ref()
        .map_or("bundled reference".to_string(), |p| p.display().to_string());
    println!("configuration");
    println!("  parameters         {source}");
    if let Some(cells) = &cli.cells {
        println!("  cells              {}", cells.display());
    }
    println!("  output directory   {}", cli.out.display());
    println!("  seed               {}", cli.seed);
    let n = &scenario.nominal;
    println!(
        "  nominal prices     ce {} cg {} de {} dg {} EUR/kWh",
        n[Technology::Ce],
        n[Technology::Cg],
        n[Technology::De],
        n[Technology::Dg]
    );
    println!(
        "  file deviations    electricity {} hydrogen {}",
        scenario.delta_electricity, scenario.delta_hydrogen
    );
    println!("  DE budget          {}", budget_text(params.expansion_budget_kw));
    println!(
        "  amortization       generators {} a, grid {} a",
        params.generator_lifetime_years, params.grid_amortization_years
    );
    for (key, value) in extra {
        println!("  {key:<18} {value}");
    }
    println!();
}

fn print_plan_summary(plan: &Plan, cells: &[CellRecord], params: &CostParameters) {
    let mut count = PerTech::<usize>::default();
    let mut capacity = PerTech::<f64>::default();
    let mut annual = PerTech::<f64>::default();
    let mut capex = PerTech::<f64>::default();
    for ((cell, &t), b) in cells.iter().zip(&plan.assignment).zip(&plan.breakdowns) {
        count[t] += 1;
        capacity[t] += cell.peak_kw;
        annual[t] += b.total;
        capex[t] += b.infrastructure_capex;
    }
    println!(
        "{:<5} {:>7} {:>14} {:>16} {:>16}",
        "tech", "cells", "peak kW", "EUR/a", "capex EUR"
    );
    for t in Technology::ALL {
        println!(
            "{:<5} {:>7} {:>14.0} {:>16.0} {:>16.0}",
            t.code(),
            count[t],
            capacity[t],
            annual[t],
            capex[t]
        );
    }
    println!(
        "total {:>7} {:>14.0} {:>16.0} {:>16.0}",
        cells.len(),
        capacity.iter().map(|(_, v)| *v).sum::<f64>(),
        plan.objective,
        plan.infrastructure_capex()
    );
    if params.expansion_budget_kw.is_finite() && params.expansion_budget_kw > 0.0 {
        println!(
            "DE budget utilization {:.2} % ({} of {} kW)",
            100.0 * plan.de_capacity_kw / params.expansion_budget_kw,
            plan.de_capacity_kw,
            params.expansion_budget_kw
        );
    } else {
        println!(
            "DE capacity {} kW, budget {}",
            plan.de_capacity_kw,
            budget_text(params.expansion_budget_kw)
        );
    }
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn require_cells(cli: &Cli) -> Result<Vec<CellRecord>> {
    let Some(path) = &cli.cells else {
        usage_error(ErrorKind::MissingRequiredArgument, "this command needs --cells <PATH>");
    };
    load_cells(path).with_context(|| format!("loading cells from {}", path.display()))
}

fn load_scenario(cli: &Cli) -> Result<Scenario> {
    match &cli.params {
        Some(path) => load_params(path).with_context(|| format!("loading parameters from {}", path.display())),
        None => Ok(reference_scenario()),
    }
}

fn resolve_prices(args: &PriceArgs, scenario: &Scenario) -> Result<(PriceVector, String)> {
    if args.nominal {
        return Ok((scenario.nominal, "nominal".into()));
    }
    let price_box = args.deltas.price_box(scenario)?;
    let label = format!(
        "worst case, deviations electricity {} hydrogen {}",
        price_box.delta_electricity, price_box.delta_hydrogen
    );
    Ok((price_box.worst_case_prices(), label))
}

fn run(cli: &Cli) -> Result<()> {
    let scenario = load_scenario(cli)?;
    match &cli.command {
        Command::Synth {
            n,
            profile,
            full_load_hours,
        } => {
            let profile = match profile {
                ProfileArg::HamburgLike => Profile::HamburgLike,
                ProfileArg::Uniform => Profile::Uniform,
            };
            print_config(
                &scenario,
                &scenario.params,
                cli,
                &[
                    ("command", "synth".into()),
                    ("cells to generate", n.to_string()),
                    ("profile", profile.to_string()),
                    ("full-load hours", full_load_hours.to_string()),
                ],
            );
            let cells = synthesize_instance_with(*n, cli.seed, profile, *full_load_hours)?;
            fs::create_dir_all(&cli.out)?;
            write_output(&cli.out, "cells.csv", &cells_to_string(&cells)?)?;
        }
        Command::Solve { prices, model } => {
            let cells = require_cells(cli)?;
            let params = model.apply(scenario.params);
            let solver = model.solver();
            let (price_vector, label) = resolve_prices(prices, &scenario)?;
            print_config(
                &scenario,
                &params,
                cli,
                &[
                    ("command", "solve".into()),
                    ("prices", label),
                    ("solver", solver.kind().to_string()),
                ],
            );
            let plan = if prices.nominal {
                solve_deterministic_with(&cells, &params, &price_vector, solver)?
            } else {
                solve_robust_with(&cells, &params, &prices.deltas.price_box(&scenario)?, solver)?
            };
            plan.validate(&cells, &params)?;
            print_plan_summary(&plan, &cells, &params);
            fs::create_dir_all(&cli.out)?;
            write_output(&cli.out, "plan.csv", &plan_csv(&plan, &cells)?)?;
            if cells.iter().all(|c| c.centroid.is_some()) {
                write_output(&cli.out, "plan.geojson", &plan_geojson(&plan, &cells)?)?;
            }
        }
        Command::Sweep {
            h2_from,
            h2_to,
            step,
            delta_el,
            model,
        } => {
            let cells = require_cells(cli)?;
            let params = model.apply(scenario.params);
            let solver = model.solver();
            let el = delta_el.unwrap_or(scenario.delta_electricity);
            let grid = delta_grid(*h2_from, *h2_to, *step)?;
            print_config(
                &scenario,
                &params,
                cli,
                &[
                    ("command", "sweep".into()),
                    (
                        "hydrogen grid",
                        format!("{h2_from} to {h2_to} step {step} ({} points)", grid.len()),
                    ),
                    ("electricity dev.", el.to_string()),
                    ("solver", solver.kind().to_string()),
                ],
            );
            let records = sweep_deviation_with(&cells, &params, &scenario.nominal, &grid, el, solver)?;
            let base = records[0].infrastructure_capex;
            println!(
                "{:>8} {:>14} {:>14} {:>16} {:>10}",
                "d_h2", "H2 kW", "electric kW", "capex EUR", "increase"
            );
            for r in &records {
                let increase = if base != 0.0 {
                    format!("{:+.1} %", 100.0 * (r.infrastructure_capex - base) / base)
                } else {
                    "-".into()
                };
                println!(
                    "{:>8} {:>14.0} {:>14.0} {:>16.0} {:>10}",
                    r.delta_hydrogen,
                    r.hydrogen_capacity_kw(),
                    r.electric_capacity_kw(),
                    r.infrastructure_capex,
                    increase
                );
            }
            fs::create_dir_all(&cli.out)?;
            write_output(&cli.out, "sweep.csv", &sweep_csv(&records)?)?;
        }
        Command::Validate {
            samples,
            plan,
            deltas,
            model,
        } => {
            let cells = require_cells(cli)?;
            let params = model.apply(scenario.params);
            let solver = model.solver();
            let price_box = deltas.price_box(&scenario)?;
            let source = plan
                .as_ref()
                .map_or("robust plan solved now".to_string(), |p| p.display().to_string());
            print_config(
                &scenario,
                &params,
                cli,
                &[
                    ("command", "validate".into()),
                    (
                        "deviations",
                        format!(
                            "electricity {} hydrogen {}",
                            price_box.delta_electricity, price_box.delta_hydrogen
                        ),
                    ),
                    ("plan", source),
                    ("samples", samples.to_string()),
                    ("solver", solver.kind().to_string()),
                ],
            );
            let worst = price_box.worst_case_prices();
            let plan = match plan {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let assignment = assignment_for(&cells, read_plan_csv(text.as_bytes())?)?;
                    Plan::evaluate(&cells, &params, &worst, assignment)?
                }
                None => solve_robust_with(&cells, &params, &price_box, solver)?,
            };
            let report = validate_plan_with(&plan, &cells, &params, &price_box, *samples, cli.seed, solver)?;
            println!("guaranteed cost      {:.2} EUR/a", report.plan_objective);
            println!(
                "max realized cost    {:.2} EUR/a (sample {})",
                report.max_realized_cost, report.worst_sample_index
            );
            println!("mean realized cost   {:.2} EUR/a", report.mean_realized_cost);
            println!("margin               {:.2} EUR/a", report.margin);
            println!("violations           {}", report.violations);
            println!(
                "nominal plan regret  max {:.2} mean {:.2} EUR/a",
                report.nominal_regret_max, report.nominal_regret_mean
            );
            fs::create_dir_all(&cli.out)?;
            write_output(
                &cli.out,
                "validation.json",
                &(serde_json::to_string_pretty(&report)? + "\n"),
            )?;
            if report.violations > 0 {
                bail!(
                    "{} of {} samples exceed the guaranteed cost",
                    report.violations,
                    report.samples
                );
            }
        }
        Command::ExportLp {
            prices,
            dh_min_load_kw,
            model,
        } => {
            let cells = require_cells(cli)?;
            let params = model.apply(scenario.params);
            let (price_vector, label) = resolve_prices(prices, &scenario)?;
            print_config(
                &scenario,
                &params,
                cli,
                &[
                    ("command", "export-lp".into()),
                    ("prices", label),
                    ("DH minimum load", format!("{dh_min_load_kw} kW")),
                ],
            );
            let options = LpOptions {
                dh_min_load_kw: *dh_min_load_kw,
                ..LpOptions::default()
            };
            let text = export_lp_with(&cells, &params, &price_vector, &options)?;
            fs::create_dir_all(&cli.out)?;
            write_output(&cli.out, "model.lp", &text)?;
        }
    }
    Ok(())
}

/// Orders a plan file's rows like the instance.
fn assignment_for(cells: &[CellRecord], rows: Vec<(String, Technology)>) -> Result<Vec<Technology>> {
    let mut by_id: std::collections::HashMap<String, Technology> = std::collections::HashMap::new();
    for (id, tech) in rows {
        if by_id.insert(id.clone(), tech).is_some() {
            bail!("plan lists cell `{id}` twice");
        }
    }
    if by_id.len() != cells.len() {
        bail!("plan has {} cells, instance has {}", by_id.len(), cells.len());
    }
    cells
        .iter()
        .map(|c| {
            by_id
                .get(&c.id)
                .copied()
                .with_context(|| format!("plan has no row for cell `{}`", c.id))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
