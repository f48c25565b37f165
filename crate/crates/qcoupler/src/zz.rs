//! Residual two-qubit crosstalk through fourth order in the couplings.
//!
//! The static zz rate is the energy mismatch E(11) − E(10) − E(01) + E(00)
//! of the dressed computational states. This module evaluates the
//! closed-form expansion of that quantity (second order in the direct
//! qubit-qubit coupling, third order mixing direct and coupler-mediated
//! paths, fourth order purely coupler-mediated) and compares it against
//! exact diagonalization. The expansion is written in the qubit detuning
//! `d12 = omega1 - omega2` and stays finite at equal qubit frequencies;
//! it keeps genuine poles where a denominator crosses zero, and those are
//! reported in-band rather than as errors.
//!
//! Anharmonicities enter as positive magnitudes (the charging energies).

use crate::quantize::QuantizeError;
use crate::spectrum::{self, SpectrumError};
use crate::system::{ModeSet, ThreeModeSystem};
use thiserror::Error;

/// What can go wrong when pairing the expansion with the exact reference.
#[derive(Debug, Error)]
pub enum ZzError {
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// A denominator is flagged when its magnitude falls below this multiple
/// of the largest coupling.
pub const NEAR_SINGULAR_FACTOR: f64 = 10.0;

/// Whether the expansion is trustworthy at the evaluated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZzValidity {
    /// All denominators are comfortably away from zero.
    Ok,
    /// The smallest denominator sits within [`NEAR_SINGULAR_FACTOR`] times
    /// the largest coupling of a pole; the expansion degrades there.
    NearSingular {
        /// Which denominator came closest to zero.
        denominator: &'static str,
        /// Its magnitude in GHz.
        magnitude_ghz: f64,
    },
}

/// Order-by-order crosstalk contributions, all in MHz.
#[derive(Debug, Clone, Copy)]
pub struct ZzReport {
    /// Second order: direct coupling squared.
    pub zz2_mhz: f64,
    /// Third order: direct times coupler-mediated.
    pub zz3_mhz: f64,
    /// Fourth order: coupler-mediated squared.
    pub zz4_mhz: f64,
    /// Sum of the three orders.
    pub total_mhz: f64,
    /// Pole-proximity diagnostic.
    pub validity: ZzValidity,
}

/// Closed-form crosstalk through fourth order.
///
/// Frequencies and anharmonicities in GHz (anharmonicities as positive
/// magnitudes), couplings in MHz. Never errors: pole proximity is
/// reported through [`ZzReport::validity`].
#[allow(clippy::too_many_arguments)]
pub fn zz_perturbative(
    omega1: f64,
    omega2: f64,
    omega_c: f64,
    alpha1: f64,
    alpha2: f64,
    alpha_c: f64,
    g12_mhz: f64,
    g1c_mhz: f64,
    g2c_mhz: f64,
) -> ZzReport {
    let g12 = g12_mhz / 1e3;
    let g1c = g1c_mhz / 1e3;
    let g2c = g2c_mhz / 1e3;
    let d12 = omega1 - omega2;
    let d1 = omega_c - omega1;
    let d2 = omega_c - omega2;

    let zz2 = -2.0 * g12 * g12 * (alpha1 + alpha2) / ((d12 - alpha1) * (d12 + alpha2));
    let zz3 = -2.0
        * g12
        * g1c
        * g2c
        * (-1.0 / (d1 * d2) + (2.0 / d2) / (alpha1 - d12) + (2.0 / d1) / (alpha2 + d12));
    let zz4 = g1c.powi(2)
        * g2c.powi(2)
        * ((1.0 / (d1 * d1)) * (2.0 / (alpha2 + d12) + 1.0 / d2)
            + (1.0 / (d2 * d2)) * (2.0 / (alpha1 - d12) + 1.0 / d1)
            - (d1 + d2) / (d1 * d1 * d2 * d2)
            - (2.0 / (d1 + d2 + alpha_c)) * (1.0 / d1 + 1.0 / d2).powi(2));

    let denominators: [(&'static str, f64); 5] = [
        ("delta12 - alpha1", d12 - alpha1),
        ("delta12 + alpha2", d12 + alpha2),
        ("delta1", d1),
        ("delta2", d2),
        ("delta1 + delta2 + alphaC", d1 + d2 + alpha_c),
    ];
    let threshold = NEAR_SINGULAR_FACTOR * g12.abs().max(g1c.abs()).max(g2c.abs());
    let mut validity = ZzValidity::Ok;
    let mut smallest = f64::INFINITY;
    for (name, value) in denominators {
        if value.abs() < threshold && value.abs() < smallest {
            smallest = value.abs();
            validity = ZzValidity::NearSingular {
                denominator: name,
                magnitude_ghz: value.abs(),
            };
        }
    }

    ZzReport {
        zz2_mhz: zz2 * 1e3,
        zz3_mhz: zz3 * 1e3,
        zz4_mhz: zz4 * 1e3,
        total_mhz: (zz2 + zz3 + zz4) * 1e3,
        validity,
    }
}

/// Crosstalk expansion for an already-quantized three-mode operating point.
pub fn zz_report_for(ms: &ModeSet) -> ZzReport {
    zz_perturbative(
        ms.modes[0].omega,
        ms.modes[2].omega,
        ms.modes[1].omega,
        -ms.modes[0].alpha,
        -ms.modes[2].alpha,
        -ms.modes[1].alpha,
        ms.g12 * 1e3,
        ms.g1c * 1e3,
        ms.g2c * 1e3,
    )
}

/// One row of a perturbative-versus-exact comparison sweep.
#[derive(Debug, Clone, Copy)]
pub struct ZzCompareRow {
    /// Coupler flux in flux quanta.
    pub flux: f64,
    /// Fourth-order expansion total, MHz.
    pub zz_pert_mhz: f64,
    /// Exact-diagonalization value, MHz.
    pub zz_exact_mhz: f64,
    /// |pert − exact| / |exact| (zero when both vanish).
    pub rel_err: f64,
}

/// Evaluate the expansion and the exact reference over a coupler-flux
/// grid. Label-ambiguity errors from the exact solver propagate, so keep
/// the grid inside the dispersive window.
pub fn zz_compare(
    sys: &ThreeModeSystem,
    flux_grid: &[f64],
    levels: usize,
) -> Result<Vec<ZzCompareRow>, ZzError> {
    let mut rows = Vec::with_capacity(flux_grid.len());
    for &flux in flux_grid {
        let ms = sys.at_coupler_flux(flux)?;
        let pert = zz_report_for(&ms).total_mhz;
        let exact = spectrum::zz_exact_at(sys, flux, levels)? * 1e3;
        let diff = (pert - exact).abs();
        let rel_err = if diff == 0.0 { 0.0 } else { diff / exact.abs() };
        rows.push(ZzCompareRow {
            flux,
            zz_pert_mhz: pert,
            zz_exact_mhz: exact,
            rel_err,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{coupler_system, design_b, design_d};
    use approx::assert_relative_eq;

    #[test]
    fn direct_coupling_off_kills_low_orders() {
        let r = zz_perturbative(5.59, 5.59, 6.83, 0.24, 0.24, 0.36, 0.0, 95.0, 95.0);
        assert_eq!(r.zz2_mhz, 0.0);
        assert_eq!(r.zz3_mhz, 0.0);
        assert_eq!(r.total_mhz, r.zz4_mhz);
        assert!(r.zz4_mhz.abs() > 0.0);
    }

    #[test]
    fn mediated_coupling_off_leaves_second_order() {
        let r = zz_perturbative(5.59, 5.69, 6.83, 0.24, 0.26, 0.36, 11.0, 0.0, 0.0);
        assert_eq!(r.zz3_mhz, 0.0);
        assert_eq!(r.zz4_mhz, 0.0);
        assert_eq!(r.total_mhz, r.zz2_mhz);
        assert!(r.zz2_mhz.abs() > 0.0);
        assert_eq!(r.validity, ZzValidity::Ok);
    }

    #[test]
    fn all_couplings_off_gives_zero_and_ok() {
        let r = zz_perturbative(5.59, 5.82, 6.83, 0.24, 0.26, 0.36, 0.0, 0.0, 0.0);
        assert_eq!(r.total_mhz, 0.0);
        assert_eq!(r.validity, ZzValidity::Ok);
    }

    #[test]
    fn qubit_label_swap_leaves_total_unchanged() {
        let a = zz_perturbative(5.59, 5.82, 6.6, 0.24, 0.26, 0.36, 11.0, 95.0, 101.0);
        let b = zz_perturbative(5.82, 5.59, 6.6, 0.26, 0.24, 0.36, 11.0, 101.0, 95.0);
        assert_relative_eq!(a.total_mhz, b.total_mhz, max_relative = 1e-12);
    }

    #[test]
    fn straddling_pole_is_flagged_with_its_name() {
        // detuning equal to the first anharmonicity puts zz2 on its pole
        let r = zz_perturbative(5.85, 5.60, 6.9, 0.2501, 0.26, 0.36, 11.0, 95.0, 101.0);
        match r.validity {
            ZzValidity::NearSingular {
                denominator,
                magnitude_ghz,
            } => {
                assert_eq!(denominator, "delta12 - alpha1");
                assert!(magnitude_ghz < 0.01);
            }
            ZzValidity::Ok => panic!("pole not flagged"),
        }
    }

    #[test]
    fn matched_coupler_point_favors_the_compact_pad_design() {
        // both one- and two-pad variants evaluated with their quoted direct
        // couplings at the flux where the coupler sits at 6.404 GHz
        let sys_b = coupler_system(&design_b()).unwrap();
        let ms_b = sys_b.at_coupler_flux(0.1641722427533348).unwrap();
        assert_relative_eq!(ms_b.modes[1].omega, 6.404, epsilon = 1e-6);
        assert_relative_eq!(ms_b.g1c, 0.09468676846502766, max_relative = 1e-9);
        let r_b = zz_perturbative(
            ms_b.modes[0].omega,
            ms_b.modes[2].omega,
            ms_b.modes[1].omega,
            -ms_b.modes[0].alpha,
            -ms_b.modes[2].alpha,
            -ms_b.modes[1].alpha,
            7.8,
            ms_b.g1c * 1e3,
            ms_b.g2c * 1e3,
        );
        assert_relative_eq!(r_b.total_mhz, -0.08921491200227231, max_relative = 1e-9);

        let sys_d = coupler_system(&design_d()).unwrap();
        let ms_d = sys_d.at_coupler_flux(0.1641653268434007).unwrap();
        assert_relative_eq!(ms_d.modes[1].omega, 6.404, epsilon = 1e-6);
        let r_d = zz_perturbative(
            ms_d.modes[0].omega,
            ms_d.modes[2].omega,
            ms_d.modes[1].omega,
            -ms_d.modes[0].alpha,
            -ms_d.modes[2].alpha,
            -ms_d.modes[1].alpha,
            19.0,
            ms_d.g1c * 1e3,
            ms_d.g2c * 1e3,
        );
        assert_relative_eq!(r_d.total_mhz, -0.1177341985778564, max_relative = 1e-9);

        assert!(r_d.total_mhz.abs() > r_b.total_mhz.abs());
        assert!(r_b.total_mhz.abs() < 1.0);
        assert!(r_d.total_mhz.abs() < 1.0);
    }

    #[test]
    fn expansion_tracks_exact_reference_in_dispersive_window() {
        let sys = coupler_system(&design_b()).unwrap();
        let rows = zz_compare(&sys, &[0.0, 0.13], 6).unwrap();
        assert_relative_eq!(rows[0].zz_exact_mhz, 0.3005193024532716, max_relative = 1e-8);
        assert_relative_eq!(rows[0].zz_pert_mhz, 0.32665312304009014, max_relative = 1e-9);
        assert_relative_eq!(rows[1].zz_exact_mhz, 0.0464, epsilon = 5e-4);
        assert_relative_eq!(rows[1].zz_pert_mhz, 0.0323, epsilon = 5e-4);
        for row in &rows {
            let tol = (0.3 * row.zz_exact_mhz.abs()).max(0.05);
            assert!((row.zz_pert_mhz - row.zz_exact_mhz).abs() <= tol);
        }
    }

    #[test]
    fn strong_coupling_design_has_larger_exact_zz() {
        let sys = coupler_system(&design_d()).unwrap();
        let rows = zz_compare(&sys, &[0.0, 0.07], 6).unwrap();
        assert_relative_eq!(rows[0].zz_exact_mhz, 3.814121716005766, max_relative = 1e-8);
        assert_relative_eq!(rows[0].zz_pert_mhz, 3.95827806268055, max_relative = 1e-9);
        assert_relative_eq!(rows[1].zz_exact_mhz, 3.5428, epsilon = 5e-4);
        assert_relative_eq!(rows[1].zz_pert_mhz, 3.6373, epsilon = 5e-4);
        let ratio0 = (rows[0].zz_pert_mhz - rows[0].zz_exact_mhz).abs()
            / (0.3 * rows[0].zz_exact_mhz.abs()).max(0.05);
        assert!(ratio0 < 0.13);
    }

    #[test]
    fn report_for_mode_set_matches_direct_call() {
        let sys = coupler_system(&design_b()).unwrap();
        let ms = sys.at_coupler_flux(0.05).unwrap();
        let via_set = zz_report_for(&ms);
        let direct = zz_perturbative(
            ms.modes[0].omega,
            ms.modes[2].omega,
            ms.modes[1].omega,
            -ms.modes[0].alpha,
            -ms.modes[2].alpha,
            -ms.modes[1].alpha,
            ms.g12 * 1e3,
            ms.g1c * 1e3,
            ms.g2c * 1e3,
        );
        assert_eq!(via_set.total_mhz, direct.total_mhz);
    }

    #[test]
    fn magnitude_grows_as_coupler_descends_toward_the_qubits() {
        let sys = coupler_system(&design_d()).unwrap();
        let rows = zz_compare(&sys, &[0.20, 0.21, 0.22, 0.23], 6).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[1].zz_exact_mhz.abs() > pair[0].zz_exact_mhz.abs());
            assert!(pair[1].zz_pert_mhz.abs() > pair[0].zz_pert_mhz.abs());
            // expansion and reference flip sign together past the null
            assert_eq!(
                pair[1].zz_exact_mhz.is_sign_negative(),
                pair[1].zz_pert_mhz.is_sign_negative()
            );
        }
    }
}
