//! `qcoupler`: netlist-driven analysis of transmon pairs with a tunable
//! coupler. Subcommands emit machine-readable tables (CSV or JSON) for
//! plotting and regression fixtures.
//!
//! Exit codes: 0 success, 1 usage error, 2 netlist parse error,
//! 3 numeric failure.

mod commands;
mod table;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, OffPointMethod, SystemContext};
use table::Table;

#[derive(Parser)]
#[command(
    name = "qcoupler",
    version,
    about = "Quantize a capacitance netlist and analyze its tunable coupler"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-point report: energy scales, couplings, and crosstalk
    Analyze(AnalyzeArgs),
    /// Sweep the coupler flux and tabulate couplings per grid point
    Sweep(SweepArgs),
    /// Locate the coupler flux where the qubit-qubit coupling vanishes
    Offpoint(OffpointArgs),
    /// Tabulate perturbative and exact crosstalk over a flux grid
    Zz(ZzArgs),
    /// Simulate excitation-swap chevrons over flux and delay
    Chevron(ChevronArgs),
    /// Evaluate or tune a flat-top conditional-phase gate
    Cz(CzArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Netlist file describing the circuit
    netlist: PathBuf,

    /// Name of the junction acting as the tunable coupler
    #[arg(long, default_value = "C")]
    coupler: String,

    /// Base flux assignments as name=value pairs, e.g. C=0.23,Q1=0.0
    #[arg(long, value_name = "LIST")]
    flux: Option<String>,

    /// Fock levels per mode for exact diagonalizations (at least 3)
    #[arg(long, default_value_t = 5)]
    levels: usize,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the table to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// First coupler flux of the grid, in flux quanta
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    from: f64,

    /// Last coupler flux of the grid
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    to: f64,

    /// Number of grid points (1 collapses the grid to `from`)
    #[arg(long, default_value_t = 81)]
    steps: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Also fill both crosstalk columns (extra diagonalization per row)
    #[arg(long)]
    zz: bool,
}

#[derive(Args)]
struct OffpointArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Lower edge of the flux bracket
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    from: f64,

    /// Upper edge of the flux bracket
    #[arg(long, default_value_t = 0.35, allow_negative_numbers = true)]
    to: f64,

    /// Refine against the exact-diagonalization dressed splitting
    /// instead of the analytic coupling formula
    #[arg(long, conflicts_with = "frozen_g")]
    oracle: bool,

    /// Scalar-model variant: freeze couplings and qubit frequency at
    /// the given values and solve in coupler frequency instead
    #[arg(long, value_name = "G12_MHZ,GQC_MHZ,WQ_GHZ")]
    frozen_g: Option<String>,
}

#[derive(Args)]
struct ZzArgs {
    #[command(flatten)]
    common: CommonArgs,

    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct ChevronArgs {
    #[command(flatten)]
    common: CommonArgs,

    #[command(flatten)]
    grid: GridArgs,

    /// Qubit that starts with the excitation
    #[arg(long, default_value = "Q1")]
    excite: String,

    /// Spacing of the delay axis in ns
    #[arg(long, default_value_t = 4.0)]
    delay_step: f64,

    /// Number of delay samples
    #[arg(long, default_value_t = 256)]
    delay_count: usize,
}

#[derive(Args)]
struct CzArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Coupler flux while idling
    #[arg(long, allow_negative_numbers = true)]
    idle: f64,

    /// Coupler flux during the hold
    #[arg(long, allow_negative_numbers = true)]
    gate: f64,

    /// Cosine ramp duration in ns
    #[arg(long, default_value_t = 40.0)]
    ramp: f64,

    /// Fixed hold duration in ns; tuned to conditional phase pi when omitted
    #[arg(long)]
    hold: Option<f64>,

    /// Integrator step in ns
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qcoupler: {}", err.message());
            if err.exit_code() == 1 {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (table, common) = match cli.cmd {
        Command::Analyze(args) => {
            let ctx = context(&args.common)?;
            (commands::cmd_analyze(&ctx, args.common.levels)?, args.common)
        }
        Command::Sweep(args) => {
            let ctx = context(&args.common)?;
            let grid = commands::lin_grid(args.grid.from, args.grid.to, args.grid.steps)?;
            (
                commands::cmd_sweep(&ctx, &grid, args.zz, args.common.levels)?,
                args.common,
            )
        }
        Command::Offpoint(args) => {
            let ctx = context(&args.common)?;
            let method = match &args.frozen_g {
                Some(list) => {
                    let v = parse_float_list(list, 3)?;
                    OffPointMethod::FrozenG { g12_mhz: v[0], gqc_mhz: v[1], wq_ghz: v[2] }
                }
                None if args.oracle => OffPointMethod::Oracle,
                None => OffPointMethod::Model,
            };
            (
                commands::cmd_offpoint(&ctx, args.from, args.to, method, args.common.levels)?,
                args.common,
            )
        }
        Command::Zz(args) => {
            let ctx = context(&args.common)?;
            let grid = commands::lin_grid(args.grid.from, args.grid.to, args.grid.steps)?;
            (commands::cmd_zz(&ctx, &grid, args.common.levels)?, args.common)
        }
        Command::Chevron(args) => {
            let ctx = context(&args.common)?;
            let grid = commands::lin_grid(args.grid.from, args.grid.to, args.grid.steps)?;
            (
                commands::cmd_chevron(
                    &ctx,
                    &grid,
                    &args.excite,
                    args.delay_step,
                    args.delay_count,
                    args.common.levels,
                )?,
                args.common,
            )
        }
        Command::Cz(args) => {
            let ctx = context(&args.common)?;
            (
                commands::cmd_cz(
                    &ctx,
                    args.idle,
                    args.gate,
                    args.ramp,
                    args.hold,
                    args.dt,
                    args.common.levels,
                )?,
                args.common,
            )
        }
    };
    emit(&table, &common)
}

fn context(common: &CommonArgs) -> Result<SystemContext, CliError> {
    let net = commands::load_network(&common.netlist)?;
    commands::build_system(&net, &common.coupler, common.flux.as_deref())
}

fn parse_float_list(text: &str, expect: usize) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> =
        text.split(',').map(|part| part.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == expect && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Usage(format!(
            "expected {expect} comma-separated numbers, got {text:?}"
        ))),
    }
}

fn emit(table: &Table, common: &CommonArgs) -> Result<(), CliError> {
    let text = match common.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &common.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, text).map_err(|e| {
            CliError::Usage(format!("cannot write {}: {e}", path.display()))
        }),
    }
}
