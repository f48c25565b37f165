//! Circuit quantization and tunable-coupler analysis for capacitively
//! coupled transmon networks.
//!
//! The crate goes from a capacitance netlist to gate-level predictions in
//! small composable steps:
//!
//! * [`netlist`] parses and validates the circuit description,
//! * [`quantize`] turns capacitances and junction parameters into charging
//!   energies, flux-dependent Josephson energies, and oscillator mode
//!   parameters,
//! * [`system`] reduces a three-junction network to the
//!   qubit-coupler-qubit picture,
//! * [`coupling`] evaluates the analytic effective coupling and locates
//!   the coupler-off operating point,
//! * [`spectrum`] cross-checks everything against exact diagonalization
//!   of a truncated-oscillator model,
//! * [`zz`] evaluates the perturbative crosstalk expansion,
//! * [`dynamics`] simulates flux pulses, swap spectroscopy, and the
//!   adiabatic conditional-phase gate, including process tomography.
//!
//! Units are GHz for energies and frequencies (h = 1), fF for
//! capacitances, ns for times, and flux quanta for fluxes, unless a name
//! says otherwise.

pub mod coupling;
pub mod designs;
pub mod dynamics;
pub mod netlist;
pub mod quantize;
mod solve;
pub mod spectrum;
pub mod system;
pub mod zz;

pub use coupling::{
    coupler_off_point, effective_coupling, pairwise_g, report_at_flux, sweep_flux, CouplingError,
    CouplingReport, FluxSweepRow,
};
pub use dynamics::{
    adiabatic_cz, chevron_fft, evolve, ideal_cz_chi, pauli_labels, process_fidelity, qpt_chi,
    ramsey_fringe, ramsey_zz, swap_chevron, swap_transfer_max, tune_cz_hold, ChevronMap,
    ChiMatrix, CzEngine, CzResult, DynamicsError, FluxShape, PulseSchedule, PulseSegment,
    DEFAULT_DT_NS,
};
pub use netlist::{
    parse_netlist, serialize_netlist, CircuitNetwork, FluxAssignment, JunctionParams, NetlistError,
    NodeKind, NodeSpec,
};
pub use quantize::{
    assemble_cap_matrix, energies_from_inverse, infer_ej_from_frequency, mode_params, quantize,
    reduce_to_junction_block, schur_junction_block, squid_effective_ej, symmetric_one_pad_inverse,
    symmetric_two_pad_inverse, CapMatrix, EnergyTable, InverseBlock, JunctionState, ModeParams,
    QuantizeError, QuantizedCircuit, CHARGING_SCALE_GHZ_FF,
};
pub use spectrum::{
    anticross_gqc, build_hamiltonian, dressed_geff, eigensolve, exact_transmon_levels,
    fit_anticross_gap, hamiltonian_for, oracle_off_point, zz_exact, zz_exact_at, AnticrossReport,
    Spectrum, SpectrumError, TransmonLevels, TruncatedHamiltonian, DEFAULT_LEVELS,
};
pub use system::{ModeSet, PairEnergies, SystemError, ThreeModeSystem};
pub use zz::{
    zz_compare, zz_perturbative, zz_report_for, ZzCompareRow, ZzError, ZzReport, ZzValidity,
    NEAR_SINGULAR_FACTOR,
};
