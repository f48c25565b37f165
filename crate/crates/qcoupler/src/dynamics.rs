//! Closed-system time-domain protocols: flux pulses, swap spectroscopy,
//! Ramsey crosstalk estimation, the adiabatic conditional-phase gate, and
//! process tomography of its computational-subspace unitary.
//!
//! Evolution is exact per step: the coupler flux is sampled at segment
//! midpoints, the truncated Hamiltonian is diagonalized there, and the
//! state advances by the closed-form matrix exponential. There is no
//! Trotter error in time, only the error of holding the flux constant
//! across one step, so the step size needs to resolve the pulse shape
//! rather than the transition frequencies.
//!
//! Everything here drives the coupler junction; the qubit fluxes stay at
//! the system's base assignment. Times are ns, frequencies GHz unless a
//! name says otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::quantize::{infer_ej_from_frequency, QuantizeError};
use crate::spectrum::{
    eig_pairs, eigensolve, hamiltonian_for, zz_exact_at, SpectrumError, TruncatedHamiltonian,
};
use crate::system::ThreeModeSystem;

/// Default integrator step in ns.
pub const DEFAULT_DT_NS: f64 = 0.01;

/// Minimum number of integrator steps across any cosine ramp.
pub const MIN_RAMP_SAMPLES: f64 = 25.0;

/// Leakage out of the computational subspace beyond which the pulse is
/// treated as diabatic failure rather than a gate.
pub const DIABATIC_LEAKAGE_LIMIT: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("pulse schedule has no segments")]
    EmptySchedule,
    #[error("segment {segment} has non-positive duration")]
    NonPositiveDuration { segment: usize },
    #[error("first segment cannot be a hold: there is no flux to hold")]
    LeadingHold,
    #[error("flux jumps by {gap:e} entering segment {segment}; trajectories must be continuous")]
    FluxJump { segment: usize, gap: f64 },
    #[error("dt {dt_ns} ns too coarse: the shortest ramp needs dt <= {limit_ns} ns")]
    StepTooCoarse { dt_ns: f64, limit_ns: f64 },
    #[error("state has {got} amplitudes, expected {expected}")]
    BadStateLength { expected: usize, got: usize },
    #[error("delay grid needs at least {needed} points, got {got}")]
    DelayGridTooShort { needed: usize, got: usize },
    #[error("delay grid is not uniformly spaced")]
    UnevenDelayGrid,
    #[error("'{name}' does not name a qubit of this system")]
    UnknownQubit { name: String },
    #[error("evolution span covers {fringes:.2} fringes, need at least 3")]
    InsufficientSpan { fringes: f64 },
    #[error("leakage {leakage:.3e} exceeds the adiabatic limit; try longer ramps")]
    DiabaticFailure { leakage: f64 },
    #[error("hold-time search did not converge in {iterations} iterations")]
    HoldSearchStalled { iterations: usize },
    #[error("input deviates from unitarity by {deviation:.3e}")]
    NonUnitary { deviation: f64 },
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Coupler-flux trajectory over one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxShape {
    /// Stay at the given flux.
    Constant(f64),
    /// Half-cosine sweep between two fluxes.
    CosineRamp { from: f64, to: f64 },
    /// Stay wherever the previous segment ended.
    Hold,
}

/// One piece of a pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment {
    pub duration_ns: f64,
    pub shape: FluxShape,
}

/// A validated piecewise coupler-flux pulse with its integrator step.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    segments: Vec<PulseSegment>,
    dt_ns: f64,
}

impl PulseSchedule {
    /// Validate and build. Durations must be positive, consecutive
    /// segments must agree on the flux at their boundary, the first
    /// segment must state a flux, and dt must put at least
    /// [`MIN_RAMP_SAMPLES`] steps on every ramp.
    pub fn new(segments: Vec<PulseSegment>, dt_ns: f64) -> Result<Self, DynamicsError> {
        if segments.is_empty() {
            return Err(DynamicsError::EmptySchedule);
        }
        if matches!(segments[0].shape, FluxShape::Hold) {
            return Err(DynamicsError::LeadingHold);
        }
        let mut carry = f64::NAN;
        let mut ramp_limit = f64::INFINITY;
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration_ns > 0.0) {
                return Err(DynamicsError::NonPositiveDuration { segment: i });
            }
            let start = match seg.shape {
                FluxShape::Constant(v) => v,
                FluxShape::CosineRamp { from, .. } => from,
                FluxShape::Hold => carry,
            };
            if i > 0 {
                let gap = (start - carry).abs();
                if gap > 1e-12 {
                    return Err(DynamicsError::FluxJump { segment: i, gap });
                }
            }
            if let FluxShape::CosineRamp { .. } = seg.shape {
                ramp_limit = ramp_limit.min(seg.duration_ns / MIN_RAMP_SAMPLES);
            }
            carry = match seg.shape {
                FluxShape::Constant(v) => v,
                FluxShape::CosineRamp { to, .. } => to,
                FluxShape::Hold => carry,
            };
        }
        if !(dt_ns > 0.0) || dt_ns > ramp_limit {
            return Err(DynamicsError::StepTooCoarse {
                dt_ns,
                limit_ns: ramp_limit,
            });
        }
        Ok(Self { segments, dt_ns })
    }

    /// Flat-top conditional-phase pulse: cosine ramp from `idle` to
    /// `gate`, optional hold, cosine ramp back.
    pub fn flat_top(
        idle_flux: f64,
        gate_flux: f64,
        ramp_ns: f64,
        hold_ns: f64,
        dt_ns: f64,
    ) -> Result<Self, DynamicsError> {
        let mut segments = vec![PulseSegment {
            duration_ns: ramp_ns,
            shape: FluxShape::CosineRamp {
                from: idle_flux,
                to: gate_flux,
            },
        }];
        if hold_ns > 0.0 {
            segments.push(PulseSegment {
                duration_ns: hold_ns,
                shape: FluxShape::Hold,
            });
        }
        segments.push(PulseSegment {
            duration_ns: ramp_ns,
            shape: FluxShape::CosineRamp {
                from: gate_flux,
                to: idle_flux,
            },
        });
        Self::new(segments, dt_ns)
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn dt_ns(&self) -> f64 {
        self.dt_ns
    }

    pub fn total_ns(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ns).sum()
    }

    /// Coupler flux at absolute time `t_ns`, clamped to the ends.
    pub fn flux_at(&self, t_ns: f64) -> f64 {
        let mut start = 0.0;
        let mut carry = f64::NAN;
        for seg in &self.segments {
            let end = start + seg.duration_ns;
            if t_ns <= end {
                return match seg.shape {
                    FluxShape::Constant(v) => v,
                    FluxShape::Hold => carry,
                    FluxShape::CosineRamp { from, to } => {
                        let tau = (t_ns - start).clamp(0.0, seg.duration_ns);
                        let lam =
                            0.5 * (1.0 - (std::f64::consts::PI * tau / seg.duration_ns).cos());
                        from + (to - from) * lam
                    }
                };
            }
            carry = match seg.shape {
                FluxShape::Constant(v) => v,
                FluxShape::CosineRamp { to, .. } => to,
                FluxShape::Hold => carry,
            };
            start = end;
        }
        carry
    }
}

/// Complex state columns kept as separate real and imaginary parts so the
/// per-step rotation into and out of a real eigenbasis stays in real
/// arithmetic.
struct SplitColumns {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitColumns {
    fn from_real(cols: DMatrix<f64>) -> Self {
        let im = DMatrix::zeros(cols.nrows(), cols.ncols());
        Self { re: cols, im }
    }

    fn from_complex(psi: &DVector<Complex64>) -> Self {
        Self {
            re: DMatrix::from_iterator(psi.len(), 1, psi.iter().map(|c| c.re)),
            im: DMatrix::from_iterator(psi.len(), 1, psi.iter().map(|c| c.im)),
        }
    }

    fn column_as_complex(&self, k: usize) -> DVector<Complex64> {
        DVector::from_iterator(
            self.re.nrows(),
            (0..self.re.nrows()).map(|i| Complex64::new(self.re[(i, k)], self.im[(i, k)])),
        )
    }

    /// Advance every column by exp(-i 2 pi H t) given H's eigensystem.
    fn advance(&mut self, w: &DVector<f64>, v: &DMatrix<f64>, t_ns: f64) {
        let are = v.tr_mul(&self.re);
        let aim = v.tr_mul(&self.im);
        let mut bre = are.clone_owned();
        let mut bim = aim.clone_owned();
        for m in 0..w.len() {
            let theta = 2.0 * std::f64::consts::PI * w[m] * t_ns;
            let (s, c) = theta.sin_cos();
            for k in 0..self.re.ncols() {
                bre[(m, k)] = are[(m, k)] * c + aim[(m, k)] * s;
                bim[(m, k)] = aim[(m, k)] * c - are[(m, k)] * s;
            }
        }
        self.re = v * bre;
        self.im = v * bim;
    }
}

fn eig_at(
    sys: &ThreeModeSystem,
    flux: f64,
    levels: usize,
) -> Result<(DVector<f64>, DMatrix<f64>), DynamicsError> {
    let ms = sys.at_coupler_flux(flux)?;
    let h = hamiltonian_for(&ms, levels)?;
    Ok(eig_pairs(&h.matrix))
}

/// Propagate a state through a pulse, returning the state at the end of
/// each segment. Constant and hold segments advance in one exact step;
/// ramps advance in midpoint-sampled steps of roughly the schedule's dt.
pub fn evolve(
    sys: &ThreeModeSystem,
    schedule: &PulseSchedule,
    psi0: &DVector<Complex64>,
    levels: usize,
) -> Result<Vec<DVector<Complex64>>, DynamicsError> {
    let dim = levels * levels * levels;
    if psi0.len() != dim {
        return Err(DynamicsError::BadStateLength {
            expected: dim,
            got: psi0.len(),
        });
    }
    let mut state = SplitColumns::from_complex(psi0);
    let mut out = Vec::with_capacity(schedule.segments.len());
    let mut carry = f64::NAN;
    for seg in &schedule.segments {
        match seg.shape {
            FluxShape::Constant(v) => {
                let (w, vec) = eig_at(sys, v, levels)?;
                state.advance(&w, &vec, seg.duration_ns);
                carry = v;
            }
            FluxShape::Hold => {
                let (w, vec) = eig_at(sys, carry, levels)?;
                state.advance(&w, &vec, seg.duration_ns);
            }
            FluxShape::CosineRamp { from, to } => {
                let n = ((seg.duration_ns / schedule.dt_ns).round() as usize).max(2);
                let dtr = seg.duration_ns / n as f64;
                for i in 0..n {
                    let tm = (i as f64 + 0.5) * dtr;
                    let lam = 0.5 * (1.0 - (std::f64::consts::PI * tm / seg.duration_ns).cos());
                    let fc = from + (to - from) * lam;
                    let (w, vec) = eig_at(sys, fc, levels)?;
                    state.advance(&w, &vec, dtr);
                }
                carry = to;
            }
        }
        out.push(state.column_as_complex(0));
    }
    Ok(out)
}

/// Excited-state population of one qubit over a flux-by-delay grid.
#[derive(Debug, Clone)]
pub struct ChevronMap {
    /// Coupler flux per column, flux quanta.
    pub flux: Vec<f64>,
    /// Uniform delay axis, ns.
    pub delay_ns: Vec<f64>,
    /// `p_excited[i][j]` is the excited-qubit population at `flux[i]`,
    /// `delay_ns[j]`.
    pub p_excited: Vec<Vec<f64>>,
}

fn qubit_index(sys: &ThreeModeSystem, name: &str) -> Result<usize, DynamicsError> {
    if sys.names[0] == name {
        Ok(0)
    } else if sys.names[2] == name {
        Ok(2)
    } else {
        Err(DynamicsError::UnknownQubit {
            name: name.to_string(),
        })
    }
}

/// Eigensystem of the column working point: the spectator qubit is
/// retuned onto the excited qubit so the pair is exactly resonant, as the
/// swap protocol prescribes.
fn resonant_column_eig(
    sys: &ThreeModeSystem,
    excite: usize,
    flux: f64,
    levels: usize,
) -> Result<(DVector<f64>, DMatrix<f64>), DynamicsError> {
    let ms = sys.at_coupler_flux(flux)?;
    let spectator = 2 - excite;
    let target = ms.modes[excite].omega;
    let mut ej = ms.e_j;
    ej[spectator] = infer_ej_from_frequency(target, sys.e_c[spectator])?;
    let tuned = sys.modes_for_ej(ej)?;
    let h = hamiltonian_for(&tuned, levels)?;
    Ok(eig_pairs(&h.matrix))
}

fn column_populations<F>(
    w: &DVector<f64>,
    v: &DMatrix<f64>,
    bare: usize,
    delays: &[f64],
    mut selected: F,
) -> Vec<f64>
where
    F: FnMut(usize) -> bool,
{
    let dim = w.len();
    let weights: Vec<f64> = (0..dim).map(|m| v[(bare, m)]).collect();
    let picks: Vec<usize> = (0..dim).filter(|&k| selected(k)).collect();
    let mut out = Vec::with_capacity(delays.len());
    for &t in delays {
        let mut p = 0.0;
        for &k in &picks {
            let mut re = 0.0;
            let mut im = 0.0;
            for m in 0..dim {
                let theta = 2.0 * std::f64::consts::PI * w[m] * t;
                let (s, c) = theta.sin_cos();
                let a = weights[m] * v[(k, m)];
                re += a * c;
                im -= a * s;
            }
            p += re * re + im * im;
        }
        out.push(p);
    }
    out
}

/// Swap spectroscopy: excite one qubit, bring the other onto resonance,
/// and record the excited qubit's population over coupler flux and delay.
pub fn swap_chevron(
    sys: &ThreeModeSystem,
    excite: &str,
    flux_grid: &[f64],
    delay_ns: &[f64],
    levels: usize,
) -> Result<ChevronMap, DynamicsError> {
    let exc = qubit_index(sys, excite)?;
    let l = levels;
    let bare = if exc == 0 {
        TruncatedHamiltonian::index(l, 1, 0, 0)
    } else {
        TruncatedHamiltonian::index(l, 0, 0, 1)
    };
    let mut p_excited = Vec::with_capacity(flux_grid.len());
    for &flux in flux_grid {
        let (w, v) = resonant_column_eig(sys, exc, flux, levels)?;
        let col = column_populations(&w, &v, bare, delay_ns, |k| {
            let digit = if exc == 0 { k / (l * l) } else { k % l };
            digit == 1
        });
        p_excited.push(col);
    }
    Ok(ChevronMap {
        flux: flux_grid.to_vec(),
        delay_ns: delay_ns.to_vec(),
        p_excited,
    })
}

/// Largest population that ever leaks fully across: the excited qubit
/// back in its ground state with the spectator excited, maximized over
/// the delay grid. Near zero at a good off point.
pub fn swap_transfer_max(
    sys: &ThreeModeSystem,
    excite: &str,
    flux: f64,
    delay_ns: &[f64],
    levels: usize,
) -> Result<f64, DynamicsError> {
    let exc = qubit_index(sys, excite)?;
    let l = levels;
    let bare = if exc == 0 {
        TruncatedHamiltonian::index(l, 1, 0, 0)
    } else {
        TruncatedHamiltonian::index(l, 0, 0, 1)
    };
    let (w, v) = resonant_column_eig(sys, exc, flux, levels)?;
    let col = column_populations(&w, &v, bare, delay_ns, |k| {
        let (mine, other) = if exc == 0 {
            (k / (l * l), k % l)
        } else {
            (k % l, k / (l * l))
        };
        mine == 0 && other >= 1
    });
    Ok(col.into_iter().fold(0.0, f64::max))
}

fn check_uniform_delays(delay_ns: &[f64]) -> Result<f64, DynamicsError> {
    if delay_ns.len() < 64 {
        return Err(DynamicsError::DelayGridTooShort {
            needed: 64,
            got: delay_ns.len(),
        });
    }
    let dt = delay_ns[1] - delay_ns[0];
    if !(dt > 0.0) {
        return Err(DynamicsError::UnevenDelayGrid);
    }
    for pair in delay_ns.windows(2) {
        if ((pair[1] - pair[0]) - dt).abs() > 1e-6 * dt {
            return Err(DynamicsError::UnevenDelayGrid);
        }
    }
    Ok(dt)
}

/// Dominant nonzero frequency of a uniformly sampled real signal, GHz.
/// Hann window, magnitude peak, quadratic sub-bin refinement on log
/// magnitudes. None when no peak clears the noise floor.
fn fft_peak_freq(signal: &[f64], dt_ns: f64) -> Option<f64> {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = signal
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let win = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
            Complex64::new((x - mean) * win, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let mags: Vec<f64> = buf[..half].iter().map(|c| c.norm()).collect();
    let mut k = 1;
    for (i, &m) in mags.iter().enumerate().skip(1) {
        if m > mags[k] {
            k = i;
        }
    }
    if mags[k] < 1e-6 * n as f64 {
        return None;
    }
    let d = if k >= 1 && k + 1 < half {
        let a = (mags[k - 1] + 1e-300).ln();
        let b = (mags[k] + 1e-300).ln();
        let c = (mags[k + 1] + 1e-300).ln();
        0.5 * (a - c) / (a - 2.0 * b + c)
    } else {
        0.0
    };
    Some((k as f64 + d) / (n as f64 * dt_ns))
}

/// Per-column coupling estimate from a chevron: half the dominant
/// oscillation frequency, MHz. None for columns with no usable
/// oscillation (swing under 1e-3 or no spectral peak).
pub fn chevron_fft(map: &ChevronMap) -> Result<Vec<Option<f64>>, DynamicsError> {
    let dt = check_uniform_delays(&map.delay_ns)?;
    let mut out = Vec::with_capacity(map.p_excited.len());
    for col in &map.p_excited {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        if hi - lo < 1e-3 {
            out.push(None);
            continue;
        }
        out.push(fft_peak_freq(col, dt).map(|f| f / 2.0 * 1e3));
    }
    Ok(out)
}

/// Ramsey fringe frequency of the second qubit with the first prepared in
/// its ground or excited state, MHz.
///
/// The fringe is synthesized from exact dressed energies against a shared
/// reference detuned 5 fringes below the control-ground transition, then
/// measured with the same spectral estimator the chevron uses. Both
/// control settings share the reference, so their difference is the
/// static crosstalk.
pub fn ramsey_fringe(
    sys: &ThreeModeSystem,
    flux: f64,
    control_excited: bool,
    delay_ns: &[f64],
    levels: usize,
) -> Result<f64, DynamicsError> {
    let dt = check_uniform_delays(delay_ns)?;
    let span = delay_ns[delay_ns.len() - 1] - delay_ns[0];
    let ms = sys.at_coupler_flux(flux)?;
    let spec = eigensolve(&hamiltonian_for(&ms, levels)?);
    let f0 = spec.energy_of(0, 0, 1)? - spec.energy_of(0, 0, 0)?;
    let f1 = spec.energy_of(1, 0, 1)? - spec.energy_of(1, 0, 0)?;
    let f_ref = f0 - 5.0 / span;
    let nu = if control_excited { f1 } else { f0 } - f_ref;
    let fringes = nu * span;
    if fringes < 3.0 {
        return Err(DynamicsError::InsufficientSpan { fringes });
    }
    let signal: Vec<f64> = delay_ns
        .iter()
        .map(|&t| 0.5 * (1.0 + (2.0 * std::f64::consts::PI * nu * t).cos()))
        .collect();
    match fft_peak_freq(&signal, dt) {
        Some(f) => Ok(f * 1e3),
        None => Err(DynamicsError::InsufficientSpan { fringes }),
    }
}

/// Static crosstalk estimate from two Ramsey runs: fringe frequency with
/// the control excited minus with it grounded, MHz.
pub fn ramsey_zz(
    sys: &ThreeModeSystem,
    flux: f64,
    delay_ns: &[f64],
    levels: usize,
) -> Result<f64, DynamicsError> {
    let excited = ramsey_fringe(sys, flux, true, delay_ns, levels)?;
    let grounded = ramsey_fringe(sys, flux, false, delay_ns, levels)?;
    Ok(excited - grounded)
}

fn wrap_pi(x: f64) -> f64 {
    (x + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI
}

/// Conditional-phase gate figures extracted from one pulse.
#[derive(Debug, Clone)]
pub struct CzResult {
    /// Computational-subspace map in the idle dressed basis
    /// {00, 01, 10, 11}, after the single-qubit Z-frame correction.
    pub unitary: DMatrix<Complex64>,
    /// Population lost from the computational subspace, averaged over the
    /// four basis states.
    pub leakage: f64,
    /// Conditional phase, wrapped to [-pi, pi).
    pub cond_phase_rad: f64,
    /// Process fidelity against the ideal conditional-phase gate.
    pub fidelity: f64,
}

/// Precomputed flat-top pulse machinery for one idle/gate flux pair.
///
/// The cosine up-ramp is the exact time mirror of the down-ramp and each
/// exact step propagator is complex-symmetric in the real eigenbases, so
/// the up-ramp propagator is the transpose of the down-ramp one. The
/// whole gate family over hold time then needs a single down-ramp pass on
/// the four computational states plus one diagonalization at the gate
/// flux; sweeping or tuning the hold costs almost nothing.
pub struct CzEngine {
    gate_w: DVector<f64>,
    z_re: DMatrix<f64>,
    z_im: DMatrix<f64>,
}

impl CzEngine {
    pub fn new(
        sys: &ThreeModeSystem,
        idle_flux: f64,
        gate_flux: f64,
        ramp_ns: f64,
        dt_ns: f64,
        levels: usize,
    ) -> Result<Self, DynamicsError> {
        if !(ramp_ns > 0.0) {
            return Err(DynamicsError::NonPositiveDuration { segment: 0 });
        }
        let limit = ramp_ns / MIN_RAMP_SAMPLES;
        if !(dt_ns > 0.0) || dt_ns > limit {
            return Err(DynamicsError::StepTooCoarse {
                dt_ns,
                limit_ns: limit,
            });
        }
        let l = levels;
        let dim = l * l * l;
        let (_, vi) = eig_at(sys, idle_flux, levels)?;
        let comp_bare = [
            TruncatedHamiltonian::index(l, 0, 0, 0),
            TruncatedHamiltonian::index(l, 0, 0, 1),
            TruncatedHamiltonian::index(l, 1, 0, 0),
            TruncatedHamiltonian::index(l, 1, 0, 1),
        ];
        let mut dressed = DMatrix::zeros(dim, 4);
        let mut claimed = [usize::MAX; 4];
        for (j, &b) in comp_bare.iter().enumerate() {
            let mut best = (0usize, -1.0f64);
            for col in 0..dim {
                let w = vi[(b, col)] * vi[(b, col)];
                if w > best.1 {
                    best = (col, w);
                }
            }
            let occ = TruncatedHamiltonian::occupations(l, b);
            if best.1 <= 0.5 || claimed.contains(&best.0) {
                return Err(SpectrumError::AmbiguousLabel {
                    n1: occ.0,
                    nc: occ.1,
                    n2: occ.2,
                    overlap: best.1,
                }
                .into());
            }
            claimed[j] = best.0;
            dressed.set_column(j, &vi.column(best.0));
        }

        let mut state = SplitColumns::from_real(dressed);
        let n = ((ramp_ns / dt_ns).round() as usize).max(2);
        let dtr = ramp_ns / n as f64;
        for i in 0..n {
            let tm = (i as f64 + 0.5) * dtr;
            let lam = 0.5 * (1.0 - (std::f64::consts::PI * tm / ramp_ns).cos());
            let fc = idle_flux + (gate_flux - idle_flux) * lam;
            let (w, v) = eig_at(sys, fc, levels)?;
            state.advance(&w, &v, dtr);
        }
        let (gate_w, gate_v) = eig_at(sys, gate_flux, levels)?;
        let z_re = gate_v.tr_mul(&state.re);
        let z_im = gate_v.tr_mul(&state.im);
        Ok(Self { gate_w, z_re, z_im })
    }

    /// Gate figures for one hold time at the gate flux.
    pub fn evaluate(&self, hold_ns: f64) -> CzResult {
        let dim = self.gate_w.len();
        let mut u = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
        for m in 0..dim {
            let theta = 2.0 * std::f64::consts::PI * self.gate_w[m] * hold_ns;
            let (s, c) = theta.sin_cos();
            let phase = Complex64::new(c, -s);
            for j in 0..4 {
                let zj = Complex64::new(self.z_re[(m, j)], self.z_im[(m, j)]);
                for k in j..4 {
                    let zk = Complex64::new(self.z_re[(m, k)], self.z_im[(m, k)]);
                    let term = zj * zk * phase;
                    u[(j, k)] += term;
                    if k != j {
                        u[(k, j)] += term;
                    }
                }
            }
        }

        let mut kept = 0.0;
        for k in 0..4 {
            for j in 0..4 {
                kept += u[(j, k)].norm_sqr();
            }
        }
        let leakage = 1.0 - kept / 4.0;

        let phi: Vec<f64> = (0..4).map(|j| u[(j, j)].arg()).collect();
        let cond_phase_rad = wrap_pi(phi[3] - phi[2] - phi[1] + phi[0]);
        let g0 = phi[0];
        let t1 = phi[2] - g0;
        let t2 = phi[1] - g0;
        let frame = [0.0, t2, t1, t1 + t2];
        let mut corrected = u.clone();
        for (j, f) in frame.iter().enumerate() {
            let c = Complex64::from_polar(1.0, -(g0 + f));
            for k in 0..4 {
                corrected[(j, k)] *= c;
            }
        }
        let cz_diag = [1.0, 1.0, 1.0, -1.0];
        let mut tr = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            tr += cz_diag[j] * corrected[(j, j)];
        }
        let fidelity = (tr / 4.0).norm_sqr();

        CzResult {
            unitary: corrected,
            leakage,
            cond_phase_rad,
            fidelity,
        }
    }
}

/// One flat-top conditional-phase pulse: ramp the coupler from the idle
/// to the gate flux, hold, ramp back, and report the computational-
/// subspace map. Errors when the pulse is too diabatic to call a gate.
pub fn adiabatic_cz(
    sys: &ThreeModeSystem,
    idle_flux: f64,
    gate_flux: f64,
    ramp_ns: f64,
    hold_ns: f64,
    dt_ns: f64,
    levels: usize,
) -> Result<CzResult, DynamicsError> {
    let engine = CzEngine::new(sys, idle_flux, gate_flux, ramp_ns, dt_ns, levels)?;
    let result = engine.evaluate(hold_ns.max(0.0));
    if result.leakage > DIABATIC_LEAKAGE_LIMIT {
        return Err(DynamicsError::DiabaticFailure {
            leakage: result.leakage,
        });
    }
    Ok(result)
}

/// Newton-tune the hold time so the conditional phase lands on pi.
/// Returns the hold in ns with the gate figures there.
pub fn tune_cz_hold(
    sys: &ThreeModeSystem,
    idle_flux: f64,
    gate_flux: f64,
    ramp_ns: f64,
    dt_ns: f64,
    levels: usize,
) -> Result<(f64, CzResult), DynamicsError> {
    const MAX_ITER: usize = 12;
    const TOL_RAD: f64 = 5e-4;
    let zz_gate = zz_exact_at(sys, gate_flux, levels)?.abs();
    if zz_gate <= 0.0 {
        return Err(DynamicsError::HoldSearchStalled { iterations: 0 });
    }
    let rate = 2.0 * std::f64::consts::PI * zz_gate;
    let engine = CzEngine::new(sys, idle_flux, gate_flux, ramp_ns, dt_ns, levels)?;
    let mut hold = (std::f64::consts::PI / rate) * 0.7;
    for _ in 0..MAX_ITER {
        let result = engine.evaluate(hold);
        let c = result.cond_phase_rad;
        let unwrapped = if c > 0.0 {
            c
        } else {
            c + 2.0 * std::f64::consts::PI
        };
        let err = std::f64::consts::PI - unwrapped;
        if err.abs() < TOL_RAD {
            if result.leakage > DIABATIC_LEAKAGE_LIMIT {
                return Err(DynamicsError::DiabaticFailure {
                    leakage: result.leakage,
                });
            }
            return Ok((hold, result));
        }
        hold = (hold + err / rate).max(0.0);
    }
    Err(DynamicsError::HoldSearchStalled {
        iterations: MAX_ITER,
    })
}

/// Process matrix over the two-qubit Pauli basis, ordered II, IX, IY,
/// IZ, XI, ..., ZZ.
#[derive(Debug, Clone)]
pub struct ChiMatrix {
    pub matrix: DMatrix<Complex64>,
}

/// Labels matching the chi matrix ordering.
pub fn pauli_labels() -> [&'static str; 16] {
    [
        "II", "IX", "IY", "IZ", "XI", "XX", "XY", "XZ", "YI", "YX", "YY", "YZ", "ZI", "ZX", "ZY",
        "ZZ",
    ]
}

fn two_qubit_paulis() -> Vec<DMatrix<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let single = [
        DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
        DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
        DMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]),
        DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
    ];
    let mut out = Vec::with_capacity(16);
    for a in &single {
        for b in &single {
            out.push(a.kronecker(b));
        }
    }
    out
}

/// Process matrix of a two-qubit unitary: expand u over the Pauli basis,
/// chi = c c-dagger. Rank one, Hermitian, unit trace.
pub fn qpt_chi(u: &DMatrix<Complex64>) -> Result<ChiMatrix, DynamicsError> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(DynamicsError::BadStateLength {
            expected: 4,
            got: u.nrows().max(u.ncols()),
        });
    }
    let gram = u.adjoint() * u;
    let mut dev = 0.0f64;
    for j in 0..4 {
        for k in 0..4 {
            let ideal = if j == k { 1.0 } else { 0.0 };
            dev += (gram[(j, k)] - Complex64::new(ideal, 0.0)).norm_sqr();
        }
    }
    let deviation = dev.sqrt();
    if deviation > 1e-6 {
        return Err(DynamicsError::NonUnitary { deviation });
    }
    let paulis = two_qubit_paulis();
    let c: Vec<Complex64> = paulis
        .iter()
        .map(|p| (p * u).diagonal().sum() / Complex64::new(4.0, 0.0))
        .collect();
    let mut chi = DMatrix::from_element(16, 16, Complex64::new(0.0, 0.0));
    for a in 0..16 {
        for b in 0..16 {
            chi[(a, b)] = c[a] * c[b].conj();
        }
    }
    Ok(ChiMatrix { matrix: chi })
}

/// Process matrix of the ideal conditional-phase gate.
pub fn ideal_cz_chi() -> ChiMatrix {
    let mut cz = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    for (j, &d) in [1.0, 1.0, 1.0, -1.0].iter().enumerate() {
        cz[(j, j)] = Complex64::new(d, 0.0);
    }
    qpt_chi(&cz).expect("ideal gate is unitary")
}

/// Overlap of two process matrices, Re tr(ideal * chi). Equals the usual
/// process fidelity when the ideal is rank one.
pub fn process_fidelity(chi: &ChiMatrix, ideal: &ChiMatrix) -> f64 {
    (&ideal.matrix * &chi.matrix).diagonal().sum().re
}
