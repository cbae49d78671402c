//! Computational-basis-state (CBS) lines and the phasor state carried on them.
//!
//! Qubits are numbered right to left: bit `i` of a [`CbsIndex`] (least
//! significant = qubit 0) is the basis state of qubit `i`, and the rightmost
//! character of a bit-string is qubit 0.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense paths accept (4096 lines).
pub const MAX_QUBITS: usize = 12;

/// Index of one CBS line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CbsIndex(pub usize);

impl CbsIndex {
    /// Parses a bit-string whose leftmost character is the highest-numbered qubit.
    pub fn from_bits(bits: &str) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::input("empty bit-string"));
        }
        if bits.len() > usize::BITS as usize - 1 {
            return Err(Error::input(format!("bit-string too long: {}", bits.len())));
        }
        bits.chars()
            .try_fold(0usize, |acc, ch| match ch {
                '0' => Ok(acc << 1),
                '1' => Ok((acc << 1) | 1),
                other => Err(Error::input(format!(
                    "non-binary character {other:?} in {bits:?}"
                ))),
            })
            .map(CbsIndex)
    }

    /// Renders as an `n`-character bit-string, qubit `n-1` first.
    pub fn to_bits(self, n_qubits: usize) -> String {
        (0..n_qubits)
            .rev()
            .map(|q| if self.bit(q) { '1' } else { '0' })
            .collect()
    }

    pub fn bit(self, qubit: usize) -> bool {
        (self.0 >> qubit) & 1 == 1
    }

    pub fn value(self) -> usize {
        self.0
    }
}

impl fmt::Display for CbsIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for CbsIndex {
    fn from(v: usize) -> Self {
        CbsIndex(v)
    }
}

/// Convenience wrapper over [`CbsIndex::from_bits`].
pub fn cbs_index(bits: &str) -> Result<CbsIndex> {
    CbsIndex::from_bits(bits)
}

/// Complex phasor amplitude on each of the `2^n` CBS lines.
///
/// Magnitude is the AC amplitude ratio, argument the relative phase in
/// radians. No normalization is implied; see [`measure`].
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl SignalVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return Err(Error::input(format!("qubit count {n_qubits} out of range")));
        }
        let expected = 1usize << n_qubits;
        if amplitudes.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::input("non-finite amplitude"));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Infers the qubit count from the number of lines, which must be a power of two ≥ 2.
    pub fn from_lines(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::input(format!(
                "line count {len} is not a power of two >= 2"
            )));
        }
        Self::new(len.trailing_zeros() as usize, amplitudes)
    }

    pub fn from_real(n_qubits: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            n_qubits,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Unit signal on a single line.
    pub fn basis(n_qubits: usize, index: CbsIndex) -> Result<Self> {
        let len = 1usize << n_qubits;
        if index.0 >= len {
            return Err(Error::input(format!(
                "index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index.0] = Complex64::new(1.0, 0.0);
        Self::new(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * c).collect(),
        }
    }

    /// Rescales to unit 2-norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
        })
    }
}

/// Equal-amplitude, zero-phase state over `2^n` lines with unit norm.
pub fn uniform_superposition(n_qubits: usize) -> Result<SignalVector> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::input(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    let len = 1usize << n_qubits;
    let a = 1.0 / (len as f64).sqrt();
    SignalVector::new(n_qubits, vec![Complex64::new(a, 0.0); len])
}

/// Renormalized per-line probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub probabilities: Vec<f64>,
    /// 2-norm of the vector before renormalization.
    pub norm_before: f64,
}

pub fn measure(v: &SignalVector) -> Result<MeasurementResult> {
    let total = v.norm_sqr();
    if total == 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok(MeasurementResult {
        probabilities: v.amplitudes.iter().map(|a| a.norm_sqr() / total).collect(),
        norm_before: total.sqrt(),
    })
}

/// Algorithm success probability: renormalized probability mass on `marked`.
pub fn asp(v: &SignalVector, marked: &BTreeSet<CbsIndex>) -> Result<f64> {
    if marked.is_empty() {
        return Err(Error::input("marked set is empty"));
    }
    if let Some(bad) = marked.iter().find(|k| k.0 >= v.len()) {
        return Err(Error::input(format!(
            "marked index {bad} out of range for {} lines",
            v.len()
        )));
    }
    let total = v.norm_sqr();
    if total == 0.0 {
        return Err(Error::DegenerateState);
    }
    let hit: f64 = marked.iter().map(|k| v.amplitudes[k.0].norm_sqr()).sum();
    Ok(hit / total)
}
