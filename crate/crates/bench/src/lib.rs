//! Shared inputs for the criterion benches.

use phasorq::{build_diffusion, CircuitIR, CompileOptions, GateSpec, StageNetwork};

/// Hadamard on every qubit followed by a CNOT ladder.
pub fn hadamard_ladder(n_qubits: usize) -> CircuitIR {
    let mut gates: Vec<GateSpec> = (0..n_qubits).map(GateSpec::hadamard).collect();
    gates.extend((1..n_qubits).map(|t| GateSpec::cnot(t - 1, t)));
    CircuitIR::new(n_qubits, gates).expect("valid ladder")
}

pub fn diffusion(n_qubits: usize) -> StageNetwork {
    build_diffusion(n_qubits, &CompileOptions::default()).expect("valid diffusion")
}
