//! Reduction of a quantized network to the three-mode qubit-coupler-qubit
//! picture used by the analysis and simulation layers.

use crate::coupling::pairwise_g;
use crate::netlist::{CircuitNetwork, FluxAssignment, JunctionParams};
use crate::quantize::{self, ModeParams, QuantizeError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("expected exactly 3 junction nodes, found {found}")]
    NotThreeJunctions { found: usize },
    #[error("coupler `{name}` is not a junction node of the network")]
    CouplerNotJunction { name: String },
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

/// Pairwise coupling charging energies in GHz, in the fixed mode order
/// (first qubit, coupler, second qubit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEnergies {
    pub q1c: f64,
    pub q12: f64,
    pub q2c: f64,
}

/// A three-junction network reduced to its flux-independent data: charging
/// energies, pair energies, SQUID parameters, and the flux each junction
/// sits at. Mode order is (first qubit, coupler, second qubit), with the
/// qubits taken in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeModeSystem {
    pub names: [String; 3],
    pub e_c: [f64; 3],
    pub e_pair: PairEnergies,
    pub squids: [JunctionParams; 3],
    pub base_flux: [f64; 3],
}

/// Flux-resolved state of the three modes: Josephson energies, mode
/// parameters, and pairwise coupling strengths (GHz).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub e_j: [f64; 3],
    pub modes: [ModeParams; 3],
    pub g12: f64,
    pub g1c: f64,
    pub g2c: f64,
}

impl ThreeModeSystem {
    /// Build the three-mode reduction, naming which junction node plays the
    /// coupler. Qubit fluxes are pinned from `base_flux`; the coupler flux
    /// entry serves as the default for operations that do not sweep it.
    pub fn from_network(
        network: &CircuitNetwork,
        coupler: &str,
        base_flux: &FluxAssignment,
    ) -> Result<Self, SystemError> {
        base_flux.validate(network).map_err(QuantizeError::from)?;
        let junctions = network.junction_names();
        if junctions.len() != 3 {
            return Err(SystemError::NotThreeJunctions {
                found: junctions.len(),
            });
        }
        if !junctions.contains(&coupler) {
            return Err(SystemError::CouplerNotJunction {
                name: coupler.to_string(),
            });
        }
        let qubits: Vec<&str> = junctions.iter().copied().filter(|n| *n != coupler).collect();
        let names = [qubits[0].to_string(), coupler.to_string(), qubits[1].to_string()];

        let cap = quantize::assemble_cap_matrix(network);
        let block = quantize::reduce_to_junction_block(&cap, network).map_err(SystemError::from)?;
        let table = quantize::energies_from_inverse(&block);
        let ec = |n: &str| table.charging_of(n).expect("junction in table");
        let ep = |a: &str, b: &str| table.pair_of(a, b).expect("junctions in table");
        let squid = |n: &str| network.junction_params(n).expect("junction node");

        Ok(Self {
            e_c: [ec(&names[0]), ec(&names[1]), ec(&names[2])],
            e_pair: PairEnergies {
                q1c: ep(&names[0], &names[1]),
                q12: ep(&names[0], &names[2]),
                q2c: ep(&names[1], &names[2]),
            },
            squids: [squid(&names[0]), squid(&names[1]), squid(&names[2])],
            base_flux: [
                base_flux.get(&names[0]),
                base_flux.get(&names[1]),
                base_flux.get(&names[2]),
            ],
            names,
        })
    }

    /// Maximum coupler Josephson energy (zero-flux value).
    pub fn coupler_ej_max(&self) -> f64 {
        self.squids[1].ejb + self.squids[1].ejs
    }

    /// Mode state with the coupler at the given flux and the qubits at
    /// their base flux.
    pub fn at_coupler_flux(&self, flux: f64) -> Result<ModeSet, QuantizeError> {
        let e_j = [
            quantize::squid_effective_ej(self.squids[0].ejb, self.squids[0].ejs, self.base_flux[0])?
                .e_j,
            quantize::squid_effective_ej(self.squids[1].ejb, self.squids[1].ejs, flux)?.e_j,
            quantize::squid_effective_ej(self.squids[2].ejb, self.squids[2].ejs, self.base_flux[2])?
                .e_j,
        ];
        self.modes_for_ej(e_j)
    }

    /// Mode state at the default fluxes of all three junctions.
    pub fn at_base(&self) -> Result<ModeSet, QuantizeError> {
        self.at_coupler_flux(self.base_flux[1])
    }

    /// Mode state for explicitly given Josephson energies. Used by
    /// protocols that retune a qubit (resonance conditions, parking).
    pub fn modes_for_ej(&self, e_j: [f64; 3]) -> Result<ModeSet, QuantizeError> {
        let modes = [
            quantize::mode_params(e_j[0], self.e_c[0])?,
            quantize::mode_params(e_j[1], self.e_c[1])?,
            quantize::mode_params(e_j[2], self.e_c[2])?,
        ];
        Ok(ModeSet {
            e_j,
            g12: pairwise_g(self.e_pair.q12, &modes[0], &modes[2]),
            g1c: pairwise_g(self.e_pair.q1c, &modes[0], &modes[1]),
            g2c: pairwise_g(self.e_pair.q2c, &modes[1], &modes[2]),
            modes,
        })
    }
}
