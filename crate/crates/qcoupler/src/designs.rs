//! Bundled reference designs.
//!
//! Five ready-to-parse netlists covering both coupler layouts: two
//! two-pad designs (A, B), two one-pad designs (C, D), and a one-pad
//! variant with deliberately detuned qubits for conditional-phase gate
//! demos. The same files ship in the crate's `fixtures/` directory so
//! they can be fed to the command-line tool directly.

use crate::netlist::{parse_netlist, CircuitNetwork, FluxAssignment};
use crate::system::{SystemError, ThreeModeSystem};

/// Netlist source for design A (two-pad, wide pads).
pub const DESIGN_A: &str = include_str!("../fixtures/design_a.netlist");
/// Netlist source for design B (two-pad, compact pads).
pub const DESIGN_B: &str = include_str!("../fixtures/design_b.netlist");
/// Netlist source for design C (one-pad, large shared pad).
pub const DESIGN_C: &str = include_str!("../fixtures/design_c.netlist");
/// Netlist source for design D (one-pad, compact shared pad).
pub const DESIGN_D: &str = include_str!("../fixtures/design_d.netlist");
/// Netlist source for the gate-demo variant of design D.
pub const DESIGN_D_GATE: &str = include_str!("../fixtures/design_d_gate.netlist");

fn parse_fixture(text: &str) -> CircuitNetwork {
    parse_netlist(text).expect("bundled netlist parses")
}

/// Two-pad design A: qubits near 5.59 GHz, coupler ceiling 6.83 GHz.
pub fn design_a() -> CircuitNetwork {
    parse_fixture(DESIGN_A)
}

/// Two-pad design B: qubits near 5.62 GHz, coupler ceiling 6.89 GHz.
pub fn design_b() -> CircuitNetwork {
    parse_fixture(DESIGN_B)
}

/// One-pad design C: qubits near 5.73 GHz, coupler ceiling 6.70 GHz.
pub fn design_c() -> CircuitNetwork {
    parse_fixture(DESIGN_C)
}

/// One-pad design D: qubits near 5.67 GHz, coupler ceiling 6.89 GHz.
pub fn design_d() -> CircuitNetwork {
    parse_fixture(DESIGN_D)
}

/// Design D retuned for gate demos: qubits at 5.11 and 5.64 GHz,
/// coupler ceiling 7.13 GHz.
pub fn design_d_gate() -> CircuitNetwork {
    parse_fixture(DESIGN_D_GATE)
}

/// Reduce a bundled (or bundled-shaped) network to its three-mode system,
/// taking the node named `C` as the coupler and all fluxes zero.
pub fn coupler_system(network: &CircuitNetwork) -> Result<ThreeModeSystem, SystemError> {
    ThreeModeSystem::from_network(network, "C", &FluxAssignment::new())
}
