//! Analytic coupling model: pairwise exchange strengths from circuit
//! energies, the flux-dependent effective qubit-qubit coupling, the
//! coupler-off operating point, and flux sweeps.

use crate::quantize::{ModeParams, QuantizeError};
use crate::system::ThreeModeSystem;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CouplingError {
    #[error("coupler-mode detuning {detuning_ghz} GHz is below the dispersive cutoff")]
    Resonance { detuning_ghz: f64 },
    #[error("no sign change of the effective coupling over flux in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root search did not reach tolerance after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("flux grid must be finite and strictly increasing")]
    BadGrid,
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

/// Detuning below which the dispersive expressions are considered
/// meaningless and an error is raised instead (GHz).
const RESONANCE_CUTOFF_GHZ: f64 = 1e-6;

/// Exchange coupling between two modes joined by pair charging energy
/// `e_pair` (GHz). The product of zero-point charge amplitudes carries the
/// junction impedances; the bracket is the leading anharmonic reduction of
/// the charge matrix element.
pub fn pairwise_g(e_pair: f64, a: &ModeParams, b: &ModeParams) -> f64 {
    8.0 * e_pair * a.n_zpf * b.n_zpf * (1.0 - (a.xi + b.xi) / 8.0)
}

/// Second-order summary of the coupler-mediated interaction at one flux
/// point. Couplings are reported in MHz, frequencies and detunings in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    pub g12_mhz: f64,
    pub g1c_mhz: f64,
    pub g2c_mhz: f64,
    pub omega1_ghz: f64,
    pub omega2_ghz: f64,
    pub omega_c_ghz: f64,
    pub delta1_ghz: f64,
    pub delta2_ghz: f64,
    pub sigma1_ghz: f64,
    pub sigma2_ghz: f64,
    pub g_eff_mhz: f64,
    pub omega1_eff_ghz: f64,
    pub omega2_eff_ghz: f64,
}

/// Effective qubit-qubit coupling and dressed qubit frequencies from the
/// direct coupling plus the virtual exchange through the coupler, keeping
/// both the co-rotating and counter-rotating intermediate paths.
///
/// All inputs are in GHz. Fails when either qubit sits within
/// `1e-6` GHz of the coupler.
pub fn effective_coupling(
    g12: f64,
    g1c: f64,
    g2c: f64,
    omega1: f64,
    omega2: f64,
    omega_c: f64,
) -> Result<CouplingReport, CouplingError> {
    let delta1 = omega_c - omega1;
    let delta2 = omega_c - omega2;
    for d in [delta1, delta2] {
        if d.abs() < RESONANCE_CUTOFF_GHZ {
            return Err(CouplingError::Resonance { detuning_ghz: d });
        }
    }
    let sigma1 = omega_c + omega1;
    let sigma2 = omega_c + omega2;
    let k1 = 1.0 / delta1 + 1.0 / sigma1;
    let k2 = 1.0 / delta2 + 1.0 / sigma2;
    let g_eff = g12 - 0.5 * g1c * g2c * (k1 + k2);
    Ok(CouplingReport {
        g12_mhz: g12 * 1e3,
        g1c_mhz: g1c * 1e3,
        g2c_mhz: g2c * 1e3,
        omega1_ghz: omega1,
        omega2_ghz: omega2,
        omega_c_ghz: omega_c,
        delta1_ghz: delta1,
        delta2_ghz: delta2,
        sigma1_ghz: sigma1,
        sigma2_ghz: sigma2,
        g_eff_mhz: g_eff * 1e3,
        omega1_eff_ghz: omega1 - g1c * g1c * k1,
        omega2_eff_ghz: omega2 - g2c * g2c * k2,
    })
}

/// Coupling report for the system with the coupler at the given flux.
pub fn report_at_flux(sys: &ThreeModeSystem, flux: f64) -> Result<CouplingReport, CouplingError> {
    let ms = sys.at_coupler_flux(flux)?;
    effective_coupling(
        ms.g12,
        ms.g1c,
        ms.g2c,
        ms.modes[0].omega,
        ms.modes[2].omega,
        ms.modes[1].omega,
    )
}

/// Root tolerance for the off-point search: 1 kHz on the effective
/// coupling.
const OFF_POINT_FTOL_GHZ: f64 = 1e-6;
const OFF_POINT_MAX_ITER: usize = 80;

/// Locate the coupler flux in `[lo, hi]` where the effective coupling
/// crosses zero. Returns the flux and the coupler frequency there.
///
/// The interval is scanned on a coarse grid for a sign change, then the
/// bracket is shrunk by alternating secant proposals with bisection until
/// the residual coupling is below 1 kHz.
pub fn coupler_off_point(
    sys: &ThreeModeSystem,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64), CouplingError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CouplingError::BadGrid);
    }
    let outcome = crate::solve::scan_root(
        |f| Ok::<f64, CouplingError>(report_at_flux(sys, f)?.g_eff_mhz * 1e-3),
        lo,
        hi,
        64,
        OFF_POINT_FTOL_GHZ,
        OFF_POINT_MAX_ITER,
    )?;
    let flux = match outcome {
        crate::solve::ScanRoot::Root { x } => x,
        crate::solve::ScanRoot::NoSignChange => {
            return Err(CouplingError::NoSignChange { lo, hi })
        }
        crate::solve::ScanRoot::NoConvergence => {
            return Err(CouplingError::NoConvergence {
                iterations: OFF_POINT_MAX_ITER,
            })
        }
    };
    let omega_c = sys.at_coupler_flux(flux)?.modes[1].omega;
    Ok((flux, omega_c))
}

/// One row of a coupler-flux sweep. Couplings in MHz, frequencies in GHz.
/// The crosstalk columns are left empty here; higher-level drivers fill
/// them in when an exact diagonalization is requested alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSweepRow {
    pub flux: f64,
    pub e_jc_ghz: f64,
    pub omega_c_ghz: f64,
    pub g1c_mhz: f64,
    pub g2c_mhz: f64,
    pub g_eff_mhz: f64,
    pub zz_pert_mhz: Option<f64>,
    pub zz_exact_mhz: Option<f64>,
    pub valid: bool,
}

/// Sweep the coupler flux over a strictly increasing grid. A row is marked
/// invalid when either qubit-coupler detuning shrinks below three times the
/// corresponding exchange coupling, where the dispersive expressions stop
/// being trustworthy.
pub fn sweep_flux(sys: &ThreeModeSystem, grid: &[f64]) -> Result<Vec<FluxSweepRow>, CouplingError> {
    if grid.is_empty() || grid.iter().any(|f| !f.is_finite()) {
        return Err(CouplingError::BadGrid);
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) && grid.len() > 1 {
        return Err(CouplingError::BadGrid);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &flux in grid {
        let ms = sys.at_coupler_flux(flux)?;
        let rep = effective_coupling(
            ms.g12,
            ms.g1c,
            ms.g2c,
            ms.modes[0].omega,
            ms.modes[2].omega,
            ms.modes[1].omega,
        )?;
        let valid = rep.delta1_ghz.abs() >= 3.0 * ms.g1c.abs()
            && rep.delta2_ghz.abs() >= 3.0 * ms.g2c.abs();
        rows.push(FluxSweepRow {
            flux,
            e_jc_ghz: ms.e_j[1],
            omega_c_ghz: rep.omega_c_ghz,
            g1c_mhz: rep.g1c_mhz,
            g2c_mhz: rep.g2c_mhz,
            g_eff_mhz: rep.g_eff_mhz,
            zz_pert_mhz: None,
            zz_exact_mhz: None,
            valid,
        });
    }
    Ok(rows)
}
