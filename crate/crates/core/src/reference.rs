//! Dense state-vector reference used to check compiled networks.
//!
//! Deliberately plain: full matrices, straight matrix-vector products.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::analog::StageNetwork;
use crate::cbs::{uniform_superposition, CbsIndex, SignalVector};
use crate::error::{Error, Result};
use crate::gate::{expand_gate, CircuitIR};
use crate::matrix::CMatrix;

pub const DEFAULT_UNITARY_TOL: f64 = 1e-10;

/// Square matrix checked to satisfy `U†U = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary(CMatrix);

impl DenseUnitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_UNITARY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        if !m.is_unitary(tol) {
            return Err(Error::input("matrix is not unitary"));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

pub fn apply_matrix(m: &DenseUnitary, v: &SignalVector) -> Result<SignalVector> {
    SignalVector::new(v.n_qubits(), m.0.mul_vec(v.amplitudes())?)
}

/// Ordered product of the circuit's gate matrices.
pub fn circuit_matrix(ir: &CircuitIR) -> Result<CMatrix> {
    ir.validate()?;
    let mut m = CMatrix::identity(1 << ir.n_qubits);
    for g in &ir.gates {
        m = expand_gate(g, ir.n_qubits)?.matmul(&m)?;
    }
    Ok(m)
}

pub fn simulate_circuit(ir: &CircuitIR, v: &SignalVector) -> Result<SignalVector> {
    ir.validate()?;
    if v.n_qubits() != ir.n_qubits {
        return Err(Error::Dimension {
            expected: 1 << ir.n_qubits,
            got: v.len(),
        });
    }
    let mut amps = v.amplitudes().to_vec();
    for g in &ir.gates {
        amps = expand_gate(g, ir.n_qubits)?.mul_vec(&amps)?;
    }
    SignalVector::new(v.n_qubits(), amps)
}

/// Outcome of comparing a network against a circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub max_deviation: f64,
    pub passed: bool,
}

/// Max entrywise `|T(net) - U(ir)|`; passes iff it is at most `tol`.
pub fn check_equivalence(
    net: &StageNetwork,
    ir: &CircuitIR,
    freq: f64,
    tol: f64,
) -> Result<Equivalence> {
    let expected = circuit_matrix(ir)?;
    if net.lines() != expected.rows() {
        return Err(Error::Dimension {
            expected: expected.rows(),
            got: net.lines(),
        });
    }
    let max_deviation = net.transfer_matrix(freq)?.max_abs_diff(&expected)?;
    Ok(Equivalence {
        max_deviation,
        passed: max_deviation <= tol,
    })
}

/// Sign-flip matrix on the marked lines.
pub fn oracle_matrix(n_qubits: usize, marked: &BTreeSet<CbsIndex>) -> CMatrix {
    let mut m = CMatrix::identity(1 << n_qubits);
    for k in marked {
        m[(k.0, k.0)] = Complex64::new(-1.0, 0.0);
    }
    m
}

/// Reflection about the mean, `(2/N)·J - I`.
pub fn diffusion_matrix(n_qubits: usize) -> CMatrix {
    let dim = 1usize << n_qubits;
    let off = 2.0 / dim as f64;
    CMatrix::from_fn(dim, dim, |r, c| {
        Complex64::new(if r == c { off - 1.0 } else { off }, 0.0)
    })
}

/// State after each of `iterations` oracle+diffusion rounds from the uniform state.
pub fn grover_states(
    n_qubits: usize,
    marked: &BTreeSet<CbsIndex>,
    iterations: usize,
) -> Result<Vec<SignalVector>> {
    let oracle = DenseUnitary::new(oracle_matrix(n_qubits, marked))?;
    let diffusion = DenseUnitary::new(diffusion_matrix(n_qubits))?;
    let mut v = uniform_superposition(n_qubits)?;
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        v = apply_matrix(&diffusion, &apply_matrix(&oracle, &v)?)?;
        out.push(v.clone());
    }
    Ok(out)
}
