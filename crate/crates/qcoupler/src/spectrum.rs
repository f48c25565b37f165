//! Exact-diagonalization cross-checks for the analytic model: a truncated
//! three-oscillator Hamiltonian with number-dependent transmon corrections,
//! eigenstate labeling, dressed coupling extraction, anticrossing fits, and
//! the exact charge-basis transmon.

use crate::quantize::{self, JunctionState, ModeParams, QuantizeError};
use crate::solve::{scan_root, ScanRoot};
use crate::system::{ModeSet, ThreeModeSystem};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("expected exactly 3 modes, found {found}")]
    NotThreeModes { found: usize },
    #[error("truncation must keep at least 2 levels per mode, got {levels}")]
    LevelsTooSmall { levels: usize },
    #[error("eigenstate for occupation ({n1},{nc},{n2}) is not uniquely labeled (best overlap {overlap:.3})")]
    AmbiguousLabel { n1: usize, nc: usize, n2: usize, overlap: f64 },
    #[error("no zero crossing of the dressed coupling in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root refinement stalled above tolerance")]
    NoConvergence,
    #[error("gap minimum sits on the edge of the scan window")]
    NoInteriorMinimum,
    #[error("gap fit needs at least {needed} finite points, got {got}")]
    BadFitWindow { needed: usize, got: usize },
    #[error("gap fit did not produce a positive minimum")]
    FitFailed,
    #[error("charge cutoff {cutoff} leaves the spectrum unconverged")]
    CutoffTooSmall { cutoff: usize },
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

/// Default number of oscillator levels kept per mode.
pub const DEFAULT_LEVELS: usize = 5;

/// Minimum eigenvector weight on a bare state for an unambiguous label.
pub const LABEL_OVERLAP_MIN: f64 = 0.5;

/// Matrix of (a_dag - a) in a truncated oscillator basis.
fn ladder(levels: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(levels, levels);
    for n in 0..levels - 1 {
        let s = ((n + 1) as f64).sqrt();
        m[(n + 1, n)] = s;
        m[(n, n + 1)] = -s;
    }
    m
}

/// Three coupled anharmonic oscillators truncated to `levels` states per
/// mode. The basis index runs over occupations as `(n0*L + n1)*L + n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHamiltonian {
    pub levels: usize,
    pub matrix: DMatrix<f64>,
}

impl TruncatedHamiltonian {
    /// Flat basis index of the occupation `(n0, n1, n2)`.
    pub fn index(levels: usize, n0: usize, n1: usize, n2: usize) -> usize {
        (n0 * levels + n1) * levels + n2
    }

    /// Occupations encoded by a flat basis index.
    pub fn occupations(levels: usize, idx: usize) -> (usize, usize, usize) {
        (idx / (levels * levels) % levels, (idx / levels) % levels, idx % levels)
    }

    /// Assemble the Hamiltonian from per-mode parameters and the exchange
    /// couplings `g_pairs = [g(0,1), g(0,2), g(1,2)]` in GHz.
    ///
    /// Each mode contributes the diagonal
    /// `(omega + EC/2 (1 - 5 xi/18)) n - EC/2 (1 - xi/6) n^2`, the
    /// number-dependent level spacing of a transmon expanded around its
    /// mode frequency; every pair couples through
    /// `-g (a_dag - a)(a_dag - a)`.
    pub fn assemble(
        modes: &[ModeParams; 3],
        g_pairs: [f64; 3],
        levels: usize,
    ) -> Result<Self, SpectrumError> {
        if levels < 2 {
            return Err(SpectrumError::LevelsTooSmall { levels });
        }
        let dim = levels * levels * levels;
        let mut h = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let occ = Self::occupations(levels, i);
            let ns = [occ.0, occ.1, occ.2];
            let mut e = 0.0;
            for (m, &n) in ns.iter().enumerate() {
                let ec = -modes[m].alpha;
                let xi = modes[m].xi;
                let nn = n as f64;
                e += (modes[m].omega + 0.5 * ec * (1.0 - 5.0 * xi / 18.0)) * nn
                    - 0.5 * ec * (1.0 - xi / 6.0) * nn * nn;
            }
            h[(i, i)] = e;
        }
        let m = ladder(levels);
        let id = DMatrix::<f64>::identity(levels, levels);
        h -= m.kronecker(&m).kronecker(&id) * g_pairs[0];
        h -= m.kronecker(&id).kronecker(&m) * g_pairs[1];
        h -= id.kronecker(&m.kronecker(&m)) * g_pairs[2];
        Ok(Self { levels, matrix: h })
    }
}

/// Hamiltonian for a flux-resolved three-mode state, mode order
/// (first qubit, coupler, second qubit).
pub fn hamiltonian_for(ms: &ModeSet, levels: usize) -> Result<TruncatedHamiltonian, SpectrumError> {
    TruncatedHamiltonian::assemble(&ms.modes, [ms.g1c, ms.g12, ms.g2c], levels)
}

/// Hamiltonian from a quantized energy table and per-junction states, in
/// table order. Requires exactly three junctions.
pub fn build_hamiltonian(
    table: &quantize::EnergyTable,
    junctions: &[JunctionState],
    levels: usize,
) -> Result<TruncatedHamiltonian, SpectrumError> {
    if table.junction_names.len() != 3 || junctions.len() != 3 {
        return Err(SpectrumError::NotThreeModes {
            found: table.junction_names.len().min(junctions.len()),
        });
    }
    let modes = [
        quantize::mode_params(junctions[0].e_j, table.charging[0])?,
        quantize::mode_params(junctions[1].e_j, table.charging[1])?,
        quantize::mode_params(junctions[2].e_j, table.charging[2])?,
    ];
    let g = [
        crate::coupling::pairwise_g(table.pair[(0, 1)], &modes[0], &modes[1]),
        crate::coupling::pairwise_g(table.pair[(0, 2)], &modes[0], &modes[2]),
        crate::coupling::pairwise_g(table.pair[(1, 2)], &modes[1], &modes[2]),
    ];
    TruncatedHamiltonian::assemble(&modes, g, levels)
}

/// Sorted eigendecomposition with max-overlap bare-state labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub levels: usize,
    /// Eigenvalues in ascending order, GHz.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, matching `energies`.
    pub vectors: DMatrix<f64>,
    /// Bare basis index with the largest weight, per eigenvector.
    pub labels: Vec<usize>,
    /// That largest weight, per eigenvector.
    pub overlaps: Vec<f64>,
    /// Set when the labeling is not trustworthy as a one-to-one naming:
    /// some bare index is claimed twice, or a dominant weight is at or
    /// below 0.5. Strongly hybridized pairs (symmetric designs at the
    /// sweet spot) raise this while their energy sums remain well defined.
    pub ambiguous: bool,
    /// Largest column norm of H v - E v, relative to the Frobenius norm
    /// of H.
    pub residual: f64,
}

/// Symmetric eigendecomposition with self-consistent pairing, unsorted.
///
/// The QR pass can hand back the eigenvalue array and the eigenvector
/// columns in mismatched order when two levels lie close together, so the
/// quotient v'Hv of each column is the trustworthy eigenvalue: it is
/// second-order insensitive to error in v itself. Columns keep the
/// decomposition's order; callers that want sorted energies sort both.
pub(crate) fn eig_pairs(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let v = eig.eigenvectors;
    let hv = m * &v;
    let lam = DVector::from_iterator(
        m.nrows(),
        (0..m.nrows()).map(|k| v.column(k).dot(&hv.column(k))),
    );
    (lam, v)
}

/// Diagonalize a truncated Hamiltonian and label every eigenvector by its
/// dominant bare state.
pub fn eigensolve(h: &TruncatedHamiltonian) -> Spectrum {
    let dim = h.matrix.nrows();
    let (quotients, eigvecs) = eig_pairs(&h.matrix);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| quotients[a].total_cmp(&quotients[b]));

    let mut energies = Vec::with_capacity(dim);
    let mut vectors = DMatrix::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        energies.push(quotients[src]);
        vectors.set_column(k, &eigvecs.column(src));
    }

    let mut labels = Vec::with_capacity(dim);
    let mut overlaps = Vec::with_capacity(dim);
    for k in 0..dim {
        let col = vectors.column(k);
        let mut best = (0usize, -1.0f64);
        for i in 0..dim {
            let w = col[i] * col[i];
            if w > best.1 {
                best = (i, w);
            }
        }
        labels.push(best.0);
        overlaps.push(best.1);
    }
    let mut seen = vec![false; dim];
    let mut ambiguous = false;
    for (&lab, &ov) in labels.iter().zip(&overlaps) {
        if seen[lab] || ov <= LABEL_OVERLAP_MIN {
            ambiguous = true;
        }
        seen[lab] = true;
    }

    let lam = DVector::from_vec(energies.clone());
    let mut resid = &h.matrix * &vectors;
    for k in 0..dim {
        let mut col = resid.column_mut(k);
        col.axpy(-lam[k], &vectors.column(k), 1.0);
    }
    let h_norm = h.matrix.norm();
    let worst = (0..dim)
        .map(|k| resid.column(k).norm())
        .fold(0.0f64, f64::max);
    let residual = if h_norm > 0.0 { worst / h_norm } else { worst };

    Spectrum {
        levels: h.levels,
        energies,
        vectors,
        labels,
        overlaps,
        ambiguous,
        residual,
    }
}

impl Spectrum {
    /// Energy of the dressed state labeled by the bare occupation
    /// `(n0, n1, n2)`. Fails when no eigenvector claims that label, or
    /// more than one does, so the name does not resolve to a single state.
    /// A resolved label with modest weight is returned as-is; the
    /// spectrum-wide [`Spectrum::ambiguous`] flag reports weak labelings.
    pub fn energy_of(&self, n0: usize, n1: usize, n2: usize) -> Result<f64, SpectrumError> {
        let want = TruncatedHamiltonian::index(self.levels, n0, n1, n2);
        let mut hit = None;
        let mut best_overlap = 0.0f64;
        for (k, &lab) in self.labels.iter().enumerate() {
            if lab == want {
                best_overlap = best_overlap.max(self.overlaps[k]);
                if hit.replace(k).is_some() {
                    return Err(SpectrumError::AmbiguousLabel {
                        n1: n0,
                        nc: n1,
                        n2,
                        overlap: best_overlap,
                    });
                }
            }
        }
        match hit {
            Some(k) => Ok(self.energies[k]),
            None => Err(SpectrumError::AmbiguousLabel {
                n1: n0,
                nc: n1,
                n2,
                overlap: best_overlap,
            }),
        }
    }
}

/// Two-qubit crosstalk from labeled dressed energies,
/// `E(101) - E(100) - E(001) + E(000)` in GHz.
pub fn zz_exact(spec: &Spectrum) -> Result<f64, SpectrumError> {
    Ok(spec.energy_of(1, 0, 1)? - spec.energy_of(1, 0, 0)? - spec.energy_of(0, 0, 1)?
        + spec.energy_of(0, 0, 0)?)
}

/// Crosstalk at a coupler flux, in GHz.
pub fn zz_exact_at(
    sys: &ThreeModeSystem,
    flux: f64,
    levels: usize,
) -> Result<f64, SpectrumError> {
    let ms = sys.at_coupler_flux(flux)?;
    zz_exact(&eigensolve(&hamiltonian_for(&ms, levels)?))
}

/// Signed effective qubit-qubit coupling from exact diagonalization, GHz.
///
/// The second qubit is retuned onto resonance with the first; the dressed
/// pair then splits symmetrically and the half-splitting is the coupling.
/// The sign comes from which combination (symmetric or antisymmetric in
/// the two single-excitation bare states) lies higher.
pub fn dressed_geff(
    sys: &ThreeModeSystem,
    flux: f64,
    levels: usize,
) -> Result<f64, SpectrumError> {
    let ms = sys.at_coupler_flux(flux)?;
    let om1 = ms.modes[0].omega;
    let ej2 = quantize::infer_ej_from_frequency(om1, sys.e_c[2])?;
    let tuned = sys.modes_for_ej([ms.e_j[0], ms.e_j[1], ej2])?;
    let spec = eigensolve(&hamiltonian_for(&tuned, levels)?);

    let l = levels;
    let i100 = TruncatedHamiltonian::index(l, 1, 0, 0);
    let i001 = TruncatedHamiltonian::index(l, 0, 0, 1);
    let dim = spec.energies.len();
    let mut top = [(0usize, -1.0f64); 2]; // (index, weight), top[1] largest
    for k in 0..dim {
        let w = spec.vectors[(i100, k)].powi(2) + spec.vectors[(i001, k)].powi(2);
        if w > top[1].1 {
            top = [top[1], (k, w)];
        } else if w > top[0].1 {
            top[0] = (k, w);
        }
    }
    let (a, b) = (top[0].0, top[1].0);
    let symmetric = |k: usize| spec.vectors[(i100, k)] * spec.vectors[(i001, k)] > 0.0;
    let (es, ea) = if symmetric(a) {
        (spec.energies[a], spec.energies[b])
    } else {
        (spec.energies[b], spec.energies[a])
    };
    Ok((es - ea) / 2.0)
}

/// Residual tolerance for the dressed off-point root: 1 kHz.
const OFF_POINT_FTOL_GHZ: f64 = 1e-6;

/// Coupler flux where the dressed effective coupling crosses zero, with
/// the coupler frequency there. Searches `[lo, hi]`.
pub fn oracle_off_point(
    sys: &ThreeModeSystem,
    lo: f64,
    hi: f64,
    levels: usize,
) -> Result<(f64, f64), SpectrumError> {
    let outcome = scan_root(
        |f| dressed_geff(sys, f, levels),
        lo,
        hi,
        64,
        OFF_POINT_FTOL_GHZ,
        80,
    )?;
    match outcome {
        ScanRoot::Root { x } => {
            let omega_c = sys.at_coupler_flux(x)?.modes[1].omega;
            Ok((x, omega_c))
        }
        ScanRoot::NoSignChange => Err(SpectrumError::NoSignChange { lo, hi }),
        ScanRoot::NoConvergence => Err(SpectrumError::NoConvergence),
    }
}

/// Least-squares parabola through `(x, gap^2)`; returns half the gap at
/// the vertex. Exact when the gap follows a hyperbola in x, the shape of
/// an avoided crossing scanned through resonance.
pub fn fit_anticross_gap(xs: &[f64], gaps: &[f64]) -> Result<f64, SpectrumError> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(gaps)
        .filter(|(x, g)| x.is_finite() && g.is_finite())
        .map(|(&x, &g)| (x, g))
        .collect();
    if pts.len() < 3 || pts.len() != xs.len() {
        return Err(SpectrumError::BadFitWindow {
            needed: 3,
            got: pts.len(),
        });
    }
    let xbar = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let mut ata = DMatrix::<f64>::zeros(3, 3);
    let mut atb = DVector::<f64>::zeros(3);
    for &(x, g) in &pts {
        let u = x - xbar;
        let row = [u * u, u, 1.0];
        let y = g * g;
        for i in 0..3 {
            for j in 0..3 {
                ata[(i, j)] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let coef = ata
        .lu()
        .solve(&atb)
        .ok_or(SpectrumError::FitFailed)?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    if a <= 0.0 {
        return Err(SpectrumError::FitFailed);
    }
    let gap2_min = c - b * b / (4.0 * a);
    if !(gap2_min > 0.0) {
        return Err(SpectrumError::FitFailed);
    }
    Ok(gap2_min.sqrt() / 2.0)
}

/// Result of scanning the coupler through resonance with one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticrossReport {
    /// Flux where the bare coupler frequency crosses the qubit.
    pub crossing_flux: f64,
    /// Flux of the smallest dressed gap on the scan grid.
    pub min_gap_flux: f64,
    /// Qubit-coupler coupling from the hyperbola fit, GHz.
    pub g_ghz: f64,
}

const ANTICROSS_HALF_WINDOW: f64 = 0.02;
const ANTICROSS_POINTS: usize = 41;

/// Extract a qubit-coupler coupling by sweeping the coupler through the
/// qubit (`qubit` is 0 or 2) and fitting the avoided crossing.
///
/// The spectator qubit is parked 1 GHz below the target so its level
/// cannot shadow the crossing pair. At each flux the two single-excitation
/// dressed levels closest to the target frequency define the gap; a
/// parabola on the squared gap around its minimum gives the coupling as
/// half the minimum gap.
pub fn anticross_gqc(
    sys: &ThreeModeSystem,
    qubit: usize,
    lo: f64,
    hi: f64,
    levels: usize,
) -> Result<AnticrossReport, SpectrumError> {
    assert!(qubit == 0 || qubit == 2, "qubit index must be 0 or 2");
    let base = sys.at_base()?;
    let om_target = base.modes[qubit].omega;
    let spectator = 2 - qubit;
    let park = quantize::infer_ej_from_frequency(om_target - 1.0, sys.e_c[spectator])?;

    let crossing = scan_root(
        |f| Ok::<f64, SpectrumError>(sys.at_coupler_flux(f)?.modes[1].omega - om_target),
        lo,
        hi,
        128,
        1e-9,
        100,
    )?;
    let crossing_flux = match crossing {
        ScanRoot::Root { x } => x,
        ScanRoot::NoSignChange => return Err(SpectrumError::NoSignChange { lo, hi }),
        ScanRoot::NoConvergence => return Err(SpectrumError::NoConvergence),
    };

    let mut fluxes = Vec::with_capacity(ANTICROSS_POINTS);
    let mut gaps = Vec::with_capacity(ANTICROSS_POINTS);
    for i in 0..ANTICROSS_POINTS {
        let f = crossing_flux - ANTICROSS_HALF_WINDOW
            + 2.0 * ANTICROSS_HALF_WINDOW * i as f64 / (ANTICROSS_POINTS - 1) as f64;
        let ms = sys.at_coupler_flux(f)?;
        let mut e_j = ms.e_j;
        e_j[spectator] = park;
        let parked = sys.modes_for_ej(e_j)?;
        let spec = eigensolve(&hamiltonian_for(&parked, levels)?);
        // The three lowest excitation energies hold the parked spectator
        // plus the crossing qubit-coupler pair.
        let e0 = spec.energies[0];
        let mut ex = [
            spec.energies[1] - e0,
            spec.energies[2] - e0,
            spec.energies[3] - e0,
        ];
        ex.sort_by(|a, b| {
            (a - om_target)
                .abs()
                .total_cmp(&(b - om_target).abs())
        });
        fluxes.push(f);
        gaps.push((ex[0] - ex[1]).abs());
    }

    let k = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    if k == 0 || k == gaps.len() - 1 {
        return Err(SpectrumError::NoInteriorMinimum);
    }
    let a = k.saturating_sub(3);
    let b = (k + 4).min(gaps.len());
    let g = fit_anticross_gap(&fluxes[a..b], &gaps[a..b])?;
    Ok(AnticrossReport {
        crossing_flux,
        min_gap_flux: fluxes[k],
        g_ghz: g,
    })
}

/// Transmon 0-1 frequency and anharmonicity from the exact charge-basis
/// spectrum, GHz. `alpha` is negative for a transmon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonLevels {
    pub omega01: f64,
    pub alpha: f64,
}

/// Diagonalize the transmon in the charge basis truncated at
/// `n_cutoff >= 20` charge quanta and return the exact low-level spacings.
/// The cutoff is doubled as a convergence check; a drift above 1e-8 GHz in
/// the 0-1 spacing fails the call.
pub fn exact_transmon_levels(
    e_j: f64,
    e_c: f64,
    n_cutoff: usize,
) -> Result<TransmonLevels, SpectrumError> {
    if n_cutoff < 20 {
        return Err(SpectrumError::CutoffTooSmall { cutoff: n_cutoff });
    }
    let solve = |n: usize| -> (f64, f64) {
        let dim = 2 * n + 1;
        let mut h = DMatrix::zeros(dim, dim);
        for (i, q) in (-(n as i64)..=n as i64).enumerate() {
            h[(i, i)] = 4.0 * e_c * (q * q) as f64;
            if i + 1 < dim {
                h[(i, i + 1)] = -e_j / 2.0;
                h[(i + 1, i)] = -e_j / 2.0;
            }
        }
        let mut w: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        w.sort_by(f64::total_cmp);
        (w[1] - w[0], (w[2] - w[1]) - (w[1] - w[0]))
    };
    let (om, al) = solve(n_cutoff);
    let (om2, _) = solve(2 * n_cutoff);
    if (om - om2).abs() > 1e-8 {
        return Err(SpectrumError::CutoffTooSmall { cutoff: n_cutoff });
    }
    Ok(TransmonLevels {
        omega01: om,
        alpha: al,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_netlist, FluxAssignment};
    use approx::assert_relative_eq;

    fn system(text: &str) -> ThreeModeSystem {
        let net = parse_netlist(text).unwrap();
        ThreeModeSystem::from_network(&net, "C", &FluxAssignment::new()).unwrap()
    }

    fn design_a() -> ThreeModeSystem {
        system(
            "node Q1 junction ejb=9.0203818628087865GHz ejs=9.0203818628087865GHz\n\
             node P1 passive\n\
             node C junction ejb=8.9009338263437475GHz ejs=8.9009338263437475GHz\n\
             node P2 passive\n\
             node Q2 junction ejb=9.0203818628087865GHz ejs=9.0203818628087865GHz\n\
             gcap Q1 72.5fF\ngcap P1 61.7fF\ngcap C 25.1fF\ngcap P2 61.7fF\ngcap Q2 72.5fF\n\
             cap Q1 P1 11.5fF\ncap P1 C 17.8fF\ncap C P2 17.8fF\ncap P2 Q2 11.5fF\ncap P1 P2 21fF\n",
        )
    }

    fn design_b() -> ThreeModeSystem {
        system(
            "node Q1 junction ejb=9.0178978108926895GHz ejs=9.0178978108926895GHz\n\
             node P1 passive\n\
             node C junction ejb=8.860663489083185GHz ejs=8.860663489083185GHz\n\
             node P2 passive\n\
             node Q2 junction ejb=9.0178978108926895GHz ejs=9.0178978108926895GHz\n\
             gcap Q1 72.4fF\ngcap P1 42.2fF\ngcap C 32.5fF\ngcap P2 42.2fF\ngcap Q2 72.4fF\n\
             cap Q1 P1 11fF\ncap P1 C 12.3fF\ncap C P2 12.3fF\ncap P2 Q2 11fF\ncap P1 P2 13.6fF\n",
        )
    }

    fn design_c() -> ThreeModeSystem {
        system(
            "node Q1 junction ejb=8.9905226372612485GHz ejs=8.9905226372612485GHz\n\
             node P passive\n\
             node C junction ejb=8.902100612078806GHz ejs=8.902100612078806GHz\n\
             node Q2 junction ejb=8.9905226372612485GHz ejs=8.9905226372612485GHz\n\
             gcap Q1 71.7fF\ngcap P 108.8fF\ngcap C 36fF\ngcap Q2 71.7fF\n\
             cap Q1 P 6.9fF\ncap P C 23.7fF\ncap P Q2 6.9fF\n",
        )
    }

    fn design_d() -> ThreeModeSystem {
        system(
            "node Q1 junction ejb=8.9789147093113505GHz ejs=8.9789147093113505GHz\n\
             node P passive\n\
             node C junction ejb=8.8437939138605215GHz ejs=8.8437939138605215GHz\n\
             node Q2 junction ejb=8.9789147093113505GHz ejs=8.9789147093113505GHz\n\
             gcap Q1 71.8fF\ngcap P 74.7fF\ngcap C 28.2fF\ngcap Q2 71.8fF\n\
             cap Q1 P 8.8fF\ncap P C 32.8fF\ncap P Q2 8.8fF\n",
        )
    }

    fn spectrum_at(sys: &ThreeModeSystem, flux: f64, levels: usize) -> Spectrum {
        let ms = sys.at_coupler_flux(flux).unwrap();
        eigensolve(&hamiltonian_for(&ms, levels).unwrap())
    }

    #[test]
    fn hamiltonian_is_symmetric_and_sized() {
        let sys = design_a();
        let ms = sys.at_coupler_flux(0.1).unwrap();
        let h = hamiltonian_for(&ms, 4).unwrap();
        assert_eq!(h.matrix.nrows(), 64);
        assert_eq!(h.matrix, h.matrix.transpose());
    }

    #[test]
    fn index_round_trip() {
        for n0 in 0..5 {
            for n1 in 0..5 {
                for n2 in 0..5 {
                    let i = TruncatedHamiltonian::index(5, n0, n1, n2);
                    assert_eq!(TruncatedHamiltonian::occupations(5, i), (n0, n1, n2));
                }
            }
        }
    }

    #[test]
    fn eigensolve_sorted_small_residual() {
        let spec = spectrum_at(&design_a(), 0.0, 5);
        assert!(spec.energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(spec.residual < 1e-9, "residual {}", spec.residual);
        assert_eq!(spec.labels[0], 0);
        assert!(spec.overlaps[0] > 0.99);
    }

    #[test]
    fn ground_state_energy_is_zero_offset() {
        // The diagonal assigns zero to the vacuum; coupling depresses it
        // only at second order in g.
        let spec = spectrum_at(&design_a(), 0.0, 5);
        let e000 = spec.energy_of(0, 0, 0).unwrap();
        assert!(e000.abs() < 0.01, "vacuum at {e000} GHz");
    }

    #[test]
    fn zz_exact_pins() {
        for (sys, want) in [
            (design_a(), 0.025126076421560152),
            (design_b(), 0.3005193024532716),
            (design_c(), 1.641824453792737),
            (design_d(), 3.814121716005766),
        ] {
            let spec = spectrum_at(&sys, 0.0, 6);
            assert_relative_eq!(zz_exact(&spec).unwrap() * 1e3, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn dressed_geff_pins() {
        for (sys, want) in [
            (design_a(), 1.3136578552281897),
            (design_b(), 3.7410324620559265),
            (design_c(), 9.631121750144356),
            (design_d(), 14.222901022570067),
        ] {
            let g = dressed_geff(&sys, 0.0, 5).unwrap() * 1e3;
            assert_relative_eq!(g, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn dressed_geff_goes_negative_past_off_point() {
        let sys = design_a();
        assert!(dressed_geff(&sys, 0.0, 5).unwrap() > 0.0);
        assert!(dressed_geff(&sys, 0.2, 5).unwrap() < 0.0);
    }

    #[test]
    fn oracle_off_point_design_a() {
        let sys = design_a();
        let (flux, omega_c) = oracle_off_point(&sys, 0.02, 0.3, 5).unwrap();
        assert_relative_eq!(flux, 0.10565844533963649, epsilon = 5e-5);
        assert_relative_eq!(omega_c, 6.63199295082297, epsilon = 2e-3);
        let resid = dressed_geff(&sys, flux, 5).unwrap().abs();
        assert!(resid < 1e-6, "residual {resid} GHz");
    }

    #[test]
    fn oracle_off_point_design_b() {
        let (flux, _) = oracle_off_point(&design_b(), 0.02, 0.3, 5).unwrap();
        assert_relative_eq!(flux, 0.1648088019528369, epsilon = 5e-5);
    }

    #[test]
    fn resonant_pair_splits_by_twice_the_coupling() {
        // Identical qubits, decoupled coupler: the single-excitation pair
        // splits by 2 g12 up to counter-rotating corrections.
        let sys = design_a();
        let base = sys.at_base().unwrap();
        let mut ms = sys.modes_for_ej(base.e_j).unwrap();
        ms.g1c = 0.0;
        ms.g2c = 0.0;
        let spec = eigensolve(&hamiltonian_for(&ms, 5).unwrap());
        // Exactly resonant: the hybridized pair trips the ambiguity flag.
        assert!(spec.ambiguous);
        let i100 = TruncatedHamiltonian::index(5, 1, 0, 0);
        let i001 = TruncatedHamiltonian::index(5, 0, 0, 1);
        let pair: Vec<f64> = (0..spec.energies.len())
            .filter(|&k| {
                spec.vectors[(i100, k)].powi(2) + spec.vectors[(i001, k)].powi(2) > 0.5
            })
            .map(|k| spec.energies[k])
            .collect();
        assert_eq!(pair.len(), 2);
        let split = (pair[1] - pair[0]).abs();
        assert_relative_eq!(split, 2.0 * ms.g12, max_relative = 2e-3);
    }

    #[test]
    fn truncation_is_converged_at_default_levels() {
        let sys = design_b();
        let z5 = zz_exact_at(&sys, 0.0, 5).unwrap();
        let z6 = zz_exact_at(&sys, 0.0, 6).unwrap();
        let z7 = zz_exact_at(&sys, 0.0, 7).unwrap();
        assert!((z5 - z6).abs() / z6.abs() < 0.05);
        assert!((z6 - z7).abs() / z7.abs() < 0.005);
    }

    #[test]
    fn anticrossing_fit_design_a() {
        let sys = design_a();
        let rep = anticross_gqc(&sys, 0, 0.05, 0.45, 5).unwrap();
        assert_relative_eq!(rep.crossing_flux, 0.260558553396518, epsilon = 1e-6);
        assert_relative_eq!(rep.g_ghz * 1e3, 94.65784098016003, max_relative = 1e-3);
        // Within 40% of the design-table 83.5 MHz reference.
        assert!(rep.g_ghz * 1e3 > 50.1 && rep.g_ghz * 1e3 < 116.9);
    }

    #[test]
    fn synthetic_hyperbola_fit_recovers_g() {
        let g = 0.050;
        let xs: Vec<f64> = (0..41).map(|i| 0.2 + 0.002 * i as f64).collect();
        let gaps: Vec<f64> = xs
            .iter()
            .map(|x| {
                let d = 3.0 * (x - 0.24);
                (d * d + 4.0 * g * g).sqrt()
            })
            .collect();
        let fit = fit_anticross_gap(&xs, &gaps).unwrap();
        assert_relative_eq!(fit, g, max_relative = 1e-9);
        assert!((fit - g).abs() * 1e3 < 0.5);
    }

    #[test]
    fn gap_fit_rejects_degenerate_input() {
        assert!(fit_anticross_gap(&[0.1, 0.2], &[1.0, 1.0]).is_err());
        let xs = [0.1, 0.2, 0.3, 0.4];
        let flat = [1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            fit_anticross_gap(&xs, &flat),
            Err(SpectrumError::FitFailed)
        ));
    }

    #[test]
    fn exact_transmon_matches_frozen_table() {
        let t50 = exact_transmon_levels(12.5, 0.25, 40).unwrap();
        assert_relative_eq!(t50.omega01, 4.735479731078748, max_relative = 1e-10);
        let t100 = exact_transmon_levels(25.0, 0.25, 40).unwrap();
        assert_relative_eq!(t100.omega01, 6.811283884286016, max_relative = 1e-10);
        assert!(t50.alpha < -0.2 && t50.alpha > -0.35);
    }

    #[test]
    fn transmon_cutoff_guard() {
        assert!(matches!(
            exact_transmon_levels(12.5, 0.25, 19),
            Err(SpectrumError::CutoffTooSmall { cutoff: 19 })
        ));
    }

    #[test]
    fn sixth_order_frequency_tracks_exact_transmon() {
        // Series frequency against the exact charge-basis value across the
        // operating ratio range.
        for ratio in [30.0f64, 50.0, 77.0, 100.0] {
            let ec = 0.25;
            let ej = ratio * ec;
            let series = quantize::mode_params(ej, ec).unwrap().omega;
            let exact = exact_transmon_levels(ej, ec, 40).unwrap().omega01;
            let rel = (series - exact).abs() / exact;
            assert!(rel < 0.0105, "ratio {ratio}: rel {rel}");
        }
    }

    #[test]
    fn dressed_pair_mean_matches_corrected_effective_frequency() {
        // At the sweet spot the two single-excitation dressed qubit levels
        // straddle the analytic effective frequency once the leading
        // transmon correction EC*xi/18 is subtracted.
        let sys = design_a();
        let spec = spectrum_at(&sys, 0.0, 5);
        let e000 = spec.energy_of(0, 0, 0).unwrap();
        let d100 = spec.energy_of(1, 0, 0).unwrap() - e000;
        let d001 = spec.energy_of(0, 0, 1).unwrap() - e000;
        let mean = 0.5 * (d100 + d001);
        assert_relative_eq!(mean, 5.578250648031348, max_relative = 1e-9);

        let ms = sys.at_base().unwrap();
        let rep = crate::coupling::effective_coupling(
            ms.g12,
            ms.g1c,
            ms.g2c,
            ms.modes[0].omega,
            ms.modes[2].omega,
            ms.modes[1].omega,
        )
        .unwrap();
        let corr = sys.e_c[0] * ms.modes[0].xi / 18.0;
        let weff = rep.omega1_eff_ghz - corr;
        assert_relative_eq!(weff, 5.578249065798811, max_relative = 1e-9);
        assert!((mean - weff).abs() < 1e-3, "gap {}", (mean - weff).abs());
    }

    #[test]
    fn table_entry_matches_mode_set_path() {
        let net = parse_netlist(
            "node Q1 junction ejb=9.0203818628087865GHz ejs=9.0203818628087865GHz\n\
             node P1 passive\n\
             node C junction ejb=8.9009338263437475GHz ejs=8.9009338263437475GHz\n\
             node P2 passive\n\
             node Q2 junction ejb=9.0203818628087865GHz ejs=9.0203818628087865GHz\n\
             gcap Q1 72.5fF\ngcap P1 61.7fF\ngcap C 25.1fF\ngcap P2 61.7fF\ngcap Q2 72.5fF\n\
             cap Q1 P1 11.5fF\ncap P1 C 17.8fF\ncap C P2 17.8fF\ncap P2 Q2 11.5fF\ncap P1 P2 21fF\n",
        )
        .unwrap();
        let q = quantize::quantize(&net, &FluxAssignment::new()).unwrap();
        let h1 = build_hamiltonian(&q.energies, &q.junctions, 4).unwrap();
        let sys = ThreeModeSystem::from_network(&net, "C", &FluxAssignment::new()).unwrap();
        let ms = sys.at_coupler_flux(0.0).unwrap();
        let h2 = hamiltonian_for(&ms, 4).unwrap();
        let diff = (&h1.matrix - &h2.matrix).norm();
        assert!(diff < 1e-12, "paths differ by {diff}");
    }

    #[test]
    fn build_hamiltonian_rejects_wrong_mode_count() {
        let net = parse_netlist(
            "node A junction ejb=9GHz ejs=9GHz\nnode B passive\ngcap A 60fF\ngcap B 80fF\ncap A B 10fF\n",
        )
        .unwrap();
        let q = quantize::quantize(&net, &FluxAssignment::new()).unwrap();
        let err = build_hamiltonian(&q.energies, &q.junctions, 4).unwrap_err();
        assert!(matches!(err, SpectrumError::NotThreeModes { found: 1 }));
    }
}
