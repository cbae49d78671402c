//! Phasor-domain emulation of quantum gates and Grover search on networks of
//! idealized op-amp stages.
//!
//! Every computational basis state of an `n`-qubit register is one signal
//! line, so a register needs `2^n` lines. Gates become dividers, inverting
//! amplifiers, summers, RC all-pass sections and plain wire permutations.
//! Networks are evaluated at a single frequency and checked against a dense
//! state-vector reference.
//!
//! ```
//! use phasorq::{compile_circuit, run_grover, CircuitIR, CompileOptions, GateSpec, GroverConfig};
//!
//! # fn main() -> phasorq::Result<()> {
//! let ir = CircuitIR::new(2, vec![GateSpec::hadamard(0), GateSpec::cnot(0, 1)])?;
//! let net = compile_circuit(&ir, &CompileOptions::default())?;
//! let t = net.transfer_matrix(1e3)?;
//! assert!((t[(3, 0)].re - 0.5f64.sqrt()).abs() < 1e-12);
//!
//! let report = run_grover(&GroverConfig::new(3, [5], 2))?;
//! assert!((report.nominal_asp[1] - 0.9453125).abs() < 1e-9);
//! # Ok(())
//! # }
//! ```

pub mod analog;
pub mod cbs;
pub mod error;
pub mod gate;
pub mod grover;
pub mod matrix;
pub mod reference;

pub use analog::{
    netlist, perturb, stage_response, NetworkBuilder, Source, Stage, StageId, StageNetwork,
    ToleranceDistribution, ToleranceSpec,
};
pub use cbs::{
    asp, cbs_index, measure, uniform_superposition, CbsIndex, MeasurementResult, SignalVector,
    MAX_QUBITS,
};
pub use error::{Error, Result};
pub use gate::{
    compile_circuit, compile_gate, controlled_lines, expand_gate, pair_lines, CircuitIR,
    CompileOptions, GateKind, GateSpec, LinePairing,
};
pub use grover::{
    build_diffusion, build_oracle, build_uniform_feed, ideal_asp, optimal_iterations, run_grover,
    GroverConfig, GroverReport, IterationStats, OracleMode,
};
pub use matrix::CMatrix;
pub use num_complex::Complex64;
pub use reference::{apply_matrix, check_equivalence, simulate_circuit, DenseUnitary, Equivalence};
