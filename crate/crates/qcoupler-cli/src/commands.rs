//! Subcommand implementations. Each one drives the core crate and packs
//! the results into a [`Table`]; `main` handles argument parsing, output
//! routing, and the exit-code mapping.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use qcoupler::{
    adiabatic_cz, coupler_off_point, dressed_geff, effective_coupling, oracle_off_point,
    parse_netlist, report_at_flux, swap_chevron, sweep_flux, tune_cz_hold, zz_exact_at,
    zz_report_for, CircuitNetwork, FluxAssignment, ThreeModeSystem, ZzValidity,
};

use crate::table::{Cell, Table};

/// Failure classes; `main` maps them to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: the request is malformed (unreadable file, names missing
    /// from the netlist, bad grids or scalar lists).
    Usage(String),
    /// Exit 2: the netlist text failed to parse or validate.
    Parse(String),
    /// Exit 3: a numeric operation failed downstream.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Numeric(m) => m,
        }
    }
}

fn usage(msg: impl Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn numeric(msg: impl Display) -> CliError {
    CliError::Numeric(msg.to_string())
}

pub fn load_network(path: &Path) -> Result<CircuitNetwork, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_netlist(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// A circuit bound to its coupler junction and base flux assignment.
pub struct SystemContext {
    pub sys: ThreeModeSystem,
    /// Flux assigned to the coupler junction itself; single-point
    /// commands evaluate there.
    pub coupler_flux: f64,
}

pub fn build_system(
    net: &CircuitNetwork,
    coupler: &str,
    flux_list: Option<&str>,
) -> Result<SystemContext, CliError> {
    let flux = match flux_list {
        Some(text) => FluxAssignment::parse_list(text).map_err(usage)?,
        None => FluxAssignment::new(),
    };
    flux.validate(net).map_err(usage)?;
    if !net.junction_names().contains(&coupler) {
        return Err(usage(format!("coupler junction {coupler:?} not found in netlist")));
    }
    let sys = ThreeModeSystem::from_network(net, coupler, &flux).map_err(usage)?;
    Ok(SystemContext { sys, coupler_flux: flux.get(coupler) })
}

pub fn check_levels(levels: usize) -> Result<(), CliError> {
    if levels < 3 {
        return Err(usage(format!("--levels must be at least 3, got {levels}")));
    }
    Ok(())
}

/// Inclusive uniform grid; a single step collapses to the start point.
pub fn lin_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite()) || from > to {
        return Err(usage(format!("bad grid: from {from} must not exceed to {to}")));
    }
    if steps < 1 {
        return Err(usage("grid needs at least one step"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// Single-point report: per-mode energy scales, pairwise couplings, the
/// effective qubit-qubit coupling, and both crosstalk estimates.
pub fn cmd_analyze(ctx: &SystemContext, levels: usize) -> Result<Table, CliError> {
    check_levels(levels)?;
    let sys = &ctx.sys;
    let ms = sys.at_coupler_flux(ctx.coupler_flux).map_err(numeric)?;
    let mut t = Table::new(vec!["quantity", "subject", "value"]);
    let mut put = |quantity: &'static str, subject: String, value: f64| {
        t.push(vec![Cell::Text(quantity.into()), Cell::Text(subject), Cell::Num(value)]);
    };
    for i in 0..3 {
        put("e_c_ghz", sys.names[i].clone(), sys.e_c[i]);
    }
    for i in 0..3 {
        put("e_j_ghz", sys.names[i].clone(), ms.e_j[i]);
    }
    for i in 0..3 {
        put("omega_ghz", sys.names[i].clone(), ms.modes[i].omega);
    }
    for i in 0..3 {
        put("alpha_mhz", sys.names[i].clone(), ms.modes[i].alpha * 1e3);
    }
    for i in 0..3 {
        put("xi", sys.names[i].clone(), ms.modes[i].xi);
    }
    let pair = |a: usize, b: usize| format!("{}:{}", sys.names[a], sys.names[b]);
    put("e_pair_mhz", pair(0, 1), sys.e_pair.q1c * 1e3);
    put("e_pair_mhz", pair(1, 2), sys.e_pair.q2c * 1e3);
    put("e_pair_mhz", pair(0, 2), sys.e_pair.q12 * 1e3);
    put("g_mhz", pair(0, 1), ms.g1c * 1e3);
    put("g_mhz", pair(1, 2), ms.g2c * 1e3);
    put("g_mhz", pair(0, 2), ms.g12 * 1e3);
    let geff = effective_coupling(
        ms.g12,
        ms.g1c,
        ms.g2c,
        ms.modes[0].omega,
        ms.modes[2].omega,
        ms.modes[1].omega,
    )
    .map_err(numeric)?;
    put("g_eff_mhz", pair(0, 2), geff.g_eff_mhz);
    put("zz_pert_mhz", pair(0, 2), zz_report_for(&ms).total_mhz);
    let ze = zz_exact_at(sys, ctx.coupler_flux, levels).map_err(numeric)?;
    put("zz_exact_mhz", pair(0, 2), ze * 1e3);
    Ok(t)
}

/// Coupler-flux sweep in the fixed long-form schema. Crosstalk columns
/// stay empty unless `with_zz` asks for the extra diagonalizations; rows
/// where the dressed states cannot be labeled (the resonance band) keep
/// an empty exact column instead of aborting the sweep.
pub fn cmd_sweep(
    ctx: &SystemContext,
    grid: &[f64],
    with_zz: bool,
    levels: usize,
) -> Result<Table, CliError> {
    check_levels(levels)?;
    let rows = sweep_flux(&ctx.sys, grid).map_err(numeric)?;
    let mut t = Table::new(vec![
        "flux",
        "ejc_ghz",
        "omegac_ghz",
        "g1c_mhz",
        "g2c_mhz",
        "geff_mhz",
        "zz_pert_mhz",
        "zz_exact_mhz",
        "valid",
    ]);
    for row in rows {
        let (zp, ze) = if with_zz {
            let ms = ctx.sys.at_coupler_flux(row.flux).map_err(numeric)?;
            let exact = match zz_exact_at(&ctx.sys, row.flux, levels) {
                Ok(z) => Cell::Num(z * 1e3),
                Err(_) => Cell::Missing,
            };
            (Cell::Num(zz_report_for(&ms).total_mhz), exact)
        } else {
            (Cell::Missing, Cell::Missing)
        };
        t.push(vec![
            Cell::Num(row.flux),
            Cell::Num(row.e_jc_ghz),
            Cell::Num(row.omega_c_ghz),
            Cell::Num(row.g1c_mhz),
            Cell::Num(row.g2c_mhz),
            Cell::Num(row.g_eff_mhz),
            zp,
            ze,
            Cell::Bool(row.valid),
        ]);
    }
    Ok(t)
}

/// Which solver locates the coupler-off flux.
pub enum OffPointMethod {
    /// Root of the analytic coupling formula, all flux dependence live.
    Model,
    /// Root of the dressed-splitting from exact diagonalization.
    Oracle,
    /// Scalar model with couplings and qubit frequency frozen at the
    /// given values (MHz, MHz, GHz); the root is found in coupler
    /// frequency and mapped back to flux through the netlist.
    FrozenG { g12_mhz: f64, gqc_mhz: f64, wq_ghz: f64 },
}

pub fn cmd_offpoint(
    ctx: &SystemContext,
    from: f64,
    to: f64,
    method: OffPointMethod,
    levels: usize,
) -> Result<Table, CliError> {
    check_levels(levels)?;
    if !(from.is_finite() && to.is_finite()) || from >= to {
        return Err(usage(format!("bad bracket: from {from} must be below to {to}")));
    }
    let sys = &ctx.sys;
    let mut t = Table::new(vec!["flux_off", "omegac_off_ghz", "geff_residual_mhz", "method"]);
    let (flux, omega_c, residual, label) = match method {
        OffPointMethod::Model => {
            let (flux, wc) = coupler_off_point(sys, from, to).map_err(numeric)?;
            let res = report_at_flux(sys, flux).map_err(numeric)?.g_eff_mhz;
            (flux, wc, res, "model")
        }
        OffPointMethod::Oracle => {
            let (flux, wc) = oracle_off_point(sys, from, to, levels).map_err(numeric)?;
            let res = dressed_geff(sys, flux, levels).map_err(numeric)? * 1e3;
            (flux, wc, res, "oracle")
        }
        OffPointMethod::FrozenG { g12_mhz, gqc_mhz, wq_ghz } => {
            let (g12, gqc) = (g12_mhz * 1e-3, gqc_mhz * 1e-3);
            let g_of = |wc: f64| {
                effective_coupling(g12, gqc, gqc, wq_ghz, wq_ghz, wc)
                    .map(|r| r.g_eff_mhz)
                    .map_err(numeric)
            };
            let wc_at = |f: f64| -> Result<f64, CliError> {
                Ok(sys.at_coupler_flux(f).map_err(numeric)?.modes[1].omega)
            };
            // the coupler frequency falls with flux, so the bracket ends swap
            let hi = wc_at(from)?;
            let lo = wc_at(to)?.max(wq_ghz + 0.02);
            if lo >= hi {
                return Err(numeric("frozen-g bracket collapses above the qubit frequency"));
            }
            let (ga, gb) = (g_of(lo)?, g_of(hi)?);
            if ga.signum() == gb.signum() {
                return Err(numeric(format!(
                    "frozen-g coupling does not change sign on [{lo:.4}, {hi:.4}] GHz"
                )));
            }
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if g_of(a)?.signum() == g_of(m)?.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let wc_off = 0.5 * (a + b);
            // invert the monotone frequency-flux map back onto the bracket
            let (mut fa, mut fb) = (from, to);
            for _ in 0..200 {
                let m = 0.5 * (fa + fb);
                if wc_at(m)? > wc_off {
                    fa = m;
                } else {
                    fb = m;
                }
            }
            let flux = 0.5 * (fa + fb);
            (flux, wc_off, g_of(wc_off)?, "frozen-g")
        }
    };
    t.push(vec![
        Cell::Num(flux),
        Cell::Num(omega_c),
        Cell::Num(residual),
        Cell::Text(label.into()),
    ]);
    Ok(t)
}

/// Order-by-order crosstalk against the exact diagonalization on a grid.
/// The exact column is left empty where the dressed states cannot be
/// uniquely labeled (deep in the resonance band).
pub fn cmd_zz(ctx: &SystemContext, grid: &[f64], levels: usize) -> Result<Table, CliError> {
    check_levels(levels)?;
    let mut t = Table::new(vec![
        "flux",
        "zz2_mhz",
        "zz3_mhz",
        "zz4_mhz",
        "zz_pert_mhz",
        "zz_exact_mhz",
        "near_pole",
    ]);
    for &flux in grid {
        let ms = ctx.sys.at_coupler_flux(flux).map_err(numeric)?;
        let rep = zz_report_for(&ms);
        let exact = match zz_exact_at(&ctx.sys, flux, levels) {
            Ok(z) => Cell::Num(z * 1e3),
            Err(_) => Cell::Missing,
        };
        t.push(vec![
            Cell::Num(flux),
            Cell::Num(rep.zz2_mhz),
            Cell::Num(rep.zz3_mhz),
            Cell::Num(rep.zz4_mhz),
            Cell::Num(rep.total_mhz),
            exact,
            Cell::Bool(matches!(rep.validity, ZzValidity::NearSingular { .. })),
        ]);
    }
    Ok(t)
}

/// Population-exchange map over a flux grid and a uniform delay axis.
pub fn cmd_chevron(
    ctx: &SystemContext,
    grid: &[f64],
    excite: &str,
    delay_step_ns: f64,
    delay_count: usize,
    levels: usize,
) -> Result<Table, CliError> {
    check_levels(levels)?;
    if !(delay_step_ns.is_finite() && delay_step_ns > 0.0) || delay_count < 2 {
        return Err(usage("delay grid needs a positive step and at least two samples"));
    }
    let delays: Vec<f64> = (0..delay_count).map(|i| i as f64 * delay_step_ns).collect();
    let map = swap_chevron(&ctx.sys, excite, grid, &delays, levels).map_err(numeric)?;
    let mut t = Table::new(vec!["flux", "delay_ns", "p_excited"]);
    for (i, &flux) in map.flux.iter().enumerate() {
        for (j, &d) in map.delay_ns.iter().enumerate() {
            t.push(vec![Cell::Num(flux), Cell::Num(d), Cell::Num(map.p_excited[i][j])]);
        }
    }
    Ok(t)
}

/// Flat-top conditional-phase gate metrics. A fixed hold evaluates that
/// pulse; without one the hold is tuned to a conditional phase of pi.
#[allow(clippy::too_many_arguments)]
pub fn cmd_cz(
    ctx: &SystemContext,
    idle_flux: f64,
    gate_flux: f64,
    ramp_ns: f64,
    hold_ns: Option<f64>,
    dt_ns: f64,
    levels: usize,
) -> Result<Table, CliError> {
    check_levels(levels)?;
    let result = match hold_ns {
        Some(h) => adiabatic_cz(&ctx.sys, idle_flux, gate_flux, ramp_ns, h, dt_ns, levels)
            .map_err(numeric)?,
        None => {
            tune_cz_hold(&ctx.sys, idle_flux, gate_flux, ramp_ns, dt_ns, levels)
                .map_err(numeric)?
                .1
        }
    };
    let mut t = Table::new(vec!["cond_phase_rad", "leakage", "fidelity"]);
    t.push(vec![
        Cell::Num(result.cond_phase_rad),
        Cell::Num(result.leakage),
        Cell::Num(result.fidelity),
    ]);
    Ok(t)
}
