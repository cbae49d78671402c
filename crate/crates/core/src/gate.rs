//! Quantum gates on `n` qubits, expanded to dense matrices and compiled to
//! stage networks over the `2^n` CBS lines.
//!
//! A single-qubit gate on `target` acts on every pair of lines that differ
//! only in bit `target`. Controls restrict it to lines whose control bits are
//! all set; everything else passes through on a plain wire.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;

use crate::analog::{NetworkBuilder, Source, Stage, StageId, StageNetwork};
use crate::cbs::{CbsIndex, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// Entrywise tolerance for accepting a user matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Multiplies the `|1⟩` member of each target pair by `e^{iφ}`.
    PhaseShift {
        target: usize,
        phi: f64,
    },
    Hadamard {
        target: usize,
    },
    PauliX {
        target: usize,
    },
    /// Full `2^n × 2^n` matrix. Non-unitary content is rejected unless
    /// `allow_non_unitary` is set.
    Matrix {
        matrix: CMatrix,
        allow_non_unitary: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub controls: BTreeSet<usize>,
}

impl GateSpec {
    pub fn phase(target: usize, phi: f64) -> Self {
        Self::uncontrolled(GateKind::PhaseShift { target, phi })
    }

    pub fn hadamard(target: usize) -> Self {
        Self::uncontrolled(GateKind::Hadamard { target })
    }

    pub fn x(target: usize) -> Self {
        Self::uncontrolled(GateKind::PauliX { target })
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled_by([control])
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self::x(target).controlled_by([c1, c2])
    }

    pub fn matrix(matrix: CMatrix) -> Self {
        Self::uncontrolled(GateKind::Matrix {
            matrix,
            allow_non_unitary: false,
        })
    }

    fn uncontrolled(kind: GateKind) -> Self {
        Self {
            kind,
            controls: BTreeSet::new(),
        }
    }

    pub fn controlled_by(mut self, controls: impl IntoIterator<Item = usize>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn target(&self) -> Option<usize> {
        match self.kind {
            GateKind::PhaseShift { target, .. }
            | GateKind::Hadamard { target }
            | GateKind::PauliX { target } => Some(target),
            GateKind::Matrix { .. } => None,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        check_qubits(n_qubits)?;
        if let Some(&c) = self.controls.iter().find(|&&c| c >= n_qubits) {
            return Err(Error::input(format!(
                "control {c} out of range for {n_qubits} qubits"
            )));
        }
        match &self.kind {
            GateKind::Matrix {
                matrix,
                allow_non_unitary,
            } => {
                let dim = 1usize << n_qubits;
                if matrix.rows() != dim || matrix.cols() != dim {
                    return Err(Error::input(format!(
                        "matrix is {}x{}, expected {dim}x{dim}",
                        matrix.rows(),
                        matrix.cols()
                    )));
                }
                if !self.controls.is_empty() {
                    return Err(Error::input("matrix gates take no controls"));
                }
                if !matrix.is_finite() {
                    return Err(Error::input("matrix has non-finite entries"));
                }
                if !allow_non_unitary && !matrix.is_unitary(UNITARY_TOL) {
                    return Err(Error::input("matrix is not unitary"));
                }
            }
            other => {
                let target = self.target().expect("single-qubit kind");
                if target >= n_qubits {
                    return Err(Error::input(format!(
                        "target {target} out of range for {n_qubits} qubits"
                    )));
                }
                if self.controls.contains(&target) {
                    return Err(Error::input(format!(
                        "qubit {target} is both target and control"
                    )));
                }
                if let GateKind::PhaseShift { phi, .. } = other {
                    if !(0.0..TAU).contains(phi) {
                        return Err(Error::input(format!("phase {phi} outside [0, 2π)")));
                    }
                }
            }
        }
        Ok(())
    }

    fn control_mask(&self) -> usize {
        self.controls.iter().fold(0, |m, &c| m | (1 << c))
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::input(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )))
    }
}

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitIR {
    pub n_qubits: usize,
    pub gates: Vec<GateSpec>,
}

impl CircuitIR {
    pub fn new(n_qubits: usize, gates: Vec<GateSpec>) -> Result<Self> {
        let ir = Self { n_qubits, gates };
        ir.validate()?;
        Ok(ir)
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n_qubits)?;
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(self.n_qubits)
                .map_err(|e| Error::input(format!("gate {i}: {e}")))?;
        }
        Ok(())
    }
}

/// Line pairs `(low, high)` that differ only in the target bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinePairing {
    pub pairs: Vec<(CbsIndex, CbsIndex)>,
}

pub fn pair_lines(n_qubits: usize, target: usize) -> Result<LinePairing> {
    check_qubits(n_qubits)?;
    if target >= n_qubits {
        return Err(Error::input(format!(
            "target {target} out of range for {n_qubits} qubits"
        )));
    }
    let bit = 1usize << target;
    let pairs = (0..1usize << n_qubits)
        .filter(|i| i & bit == 0)
        .map(|lo| (CbsIndex(lo), CbsIndex(lo | bit)))
        .collect();
    Ok(LinePairing { pairs })
}

/// Lines on which every control bit is 1.
pub fn controlled_lines(n_qubits: usize, controls: &BTreeSet<usize>) -> Result<BTreeSet<CbsIndex>> {
    check_qubits(n_qubits)?;
    if let Some(&c) = controls.iter().find(|&&c| c >= n_qubits) {
        return Err(Error::input(format!(
            "control {c} out of range for {n_qubits} qubits"
        )));
    }
    let mask = controls.iter().fold(0usize, |m, &c| m | (1 << c));
    Ok((0..1usize << n_qubits)
        .filter(|i| i & mask == mask)
        .map(CbsIndex)
        .collect())
}

/// Pairs of the target that lie inside the controlled subspace.
fn active_pairs(g: &GateSpec, n: usize, target: usize) -> Result<Vec<(usize, usize)>> {
    let mask = g.control_mask();
    Ok(pair_lines(n, target)?
        .pairs
        .into_iter()
        .filter(|(lo, _)| lo.0 & mask == mask)
        .map(|(lo, hi)| (lo.0, hi.0))
        .collect())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense `2^n × 2^n` matrix of `g`.
pub fn expand_gate(g: &GateSpec, n_qubits: usize) -> Result<CMatrix> {
    g.validate(n_qubits)?;
    let block = match &g.kind {
        GateKind::Matrix { matrix, .. } => return Ok(matrix.clone()),
        GateKind::Hadamard { .. } => [
            [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
            [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
        ],
        GateKind::PauliX { .. } => [[c(0.0), c(1.0)], [c(1.0), c(0.0)]],
        GateKind::PhaseShift { phi, .. } => {
            [[c(1.0), c(0.0)], [c(0.0), Complex64::from_polar(1.0, *phi)]]
        }
    };
    let target = g.target().expect("single-qubit kind");
    let mut m = CMatrix::identity(1 << n_qubits);
    for (lo, hi) in active_pairs(g, n_qubits, target)? {
        m[(lo, lo)] = block[0][0];
        m[(lo, hi)] = block[0][1];
        m[(hi, lo)] = block[1][0];
        m[(hi, hi)] = block[1][1];
    }
    Ok(m)
}

/// Component choices for synthesized stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    /// Reference frequency the RC stages are tuned for.
    pub frequency: f64,
    /// Fixed capacitor of every RC phase shifter.
    pub capacitance: f64,
    /// Input resistor of amplifiers and lower leg of dividers.
    pub base_resistance: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            frequency: 1_000.0,
            capacitance: 100e-9,
            base_resistance: 10e3,
        }
    }
}

/// Stage network whose nominal transfer matrix is `expand_gate(g, n)`.
pub fn compile_gate(g: &GateSpec, n_qubits: usize, opts: &CompileOptions) -> Result<StageNetwork> {
    g.validate(n_qubits)?;
    let lines = 1usize << n_qubits;
    let mut b = NetworkBuilder::new(lines, opts.frequency);
    match &g.kind {
        GateKind::PhaseShift { target, phi } => {
            if *phi != 0.0 {
                for (_, hi) in active_pairs(g, n_qubits, *target)? {
                    // A finite RC section cannot reach exactly π; use a unity inverter.
                    let stage = if *phi == PI {
                        Stage::amp_for_gain(1.0, opts.base_resistance)?
                    } else {
                        Stage::phase_shifter_for(*phi, opts.frequency, opts.capacitance)?
                    };
                    let s = b.add(stage);
                    b.connect(Source::Line(hi), s, 0)
                        .output(hi, Source::port(s, 0));
                }
            }
        }
        GateKind::Hadamard { target } => {
            for (lo, hi) in active_pairs(g, n_qubits, *target)? {
                hadamard_cell(&mut b, lo, hi, opts)?;
            }
        }
        GateKind::PauliX { target } => {
            let mut map: Vec<usize> = (0..lines).collect();
            for (lo, hi) in active_pairs(g, n_qubits, *target)? {
                map.swap(lo, hi);
            }
            let p = b.add(Stage::WirePermutation { map });
            for l in 0..lines {
                b.connect(Source::Line(l), p, l)
                    .output(l, Source::port(p, l));
            }
        }
        GateKind::Matrix { matrix, .. } => matrix_array(&mut b, matrix, opts)?,
    }
    b.pass_through_rest();
    b.build()
}

/// Divider, inverter and two summers realizing `(1/√2)[[1, 1], [1, -1]]` on one pair.
fn hadamard_cell(
    b: &mut NetworkBuilder,
    lo: usize,
    hi: usize,
    opts: &CompileOptions,
) -> Result<()> {
    let d_lo = b.add(Stage::divider_for_ratio(
        FRAC_1_SQRT_2,
        opts.base_resistance,
    )?);
    let d_hi = b.add(Stage::divider_for_ratio(
        FRAC_1_SQRT_2,
        opts.base_resistance,
    )?);
    let inv = b.add(Stage::amp_for_gain(1.0, opts.base_resistance)?);
    let s_lo = b.add(Stage::Summer {
        weights: vec![1.0, 1.0],
    });
    let s_hi = b.add(Stage::Summer {
        weights: vec![1.0, 1.0],
    });
    b.connect(Source::Line(lo), d_lo, 0)
        .connect(Source::Line(hi), d_hi, 0)
        .connect(Source::port(d_hi, 0), inv, 0)
        .connect(Source::port(d_lo, 0), s_lo, 0)
        .connect(Source::port(d_hi, 0), s_lo, 1)
        .connect(Source::port(d_lo, 0), s_hi, 0)
        .connect(Source::port(inv, 0), s_hi, 1)
        .output(lo, Source::port(s_lo, 0))
        .output(hi, Source::port(s_hi, 0));
    Ok(())
}

/// Generic matrix array: one divider per input column scaling to the
/// column's smallest nonzero magnitude, a gain/phase path per entry that
/// needs one, and a summer per output row.
fn matrix_array(b: &mut NetworkBuilder, m: &CMatrix, opts: &CompileOptions) -> Result<()> {
    let dim = m.rows();
    let mut taps: Vec<Option<(Source, f64)>> = Vec::with_capacity(dim);
    for col in 0..dim {
        let smallest = (0..dim)
            .map(|r| m[(r, col)].norm())
            .filter(|&x| x > 0.0)
            .fold(f64::INFINITY, f64::min);
        taps.push(if smallest.is_infinite() {
            None
        } else if smallest < 1.0 {
            let d = b.add(Stage::divider_for_ratio(smallest, opts.base_resistance)?);
            b.connect(Source::Line(col), d, 0);
            Some((Source::port(d, 0), smallest))
        } else {
            Some((Source::Line(col), 1.0))
        });
    }
    for row in 0..dim {
        let mut inputs: Vec<(Source, f64)> = Vec::new();
        for (col, tap) in taps.iter().enumerate() {
            let Some((src, scale)) = *tap else { continue };
            let entry = m[(row, col)];
            if entry.norm() == 0.0 {
                continue;
            }
            inputs.push(entry_path(b, src, entry / scale, opts)?);
        }
        if inputs.is_empty() {
            inputs.push((Source::Line(0), 0.0));
        }
        let sum = b.add(Stage::Summer {
            weights: inputs.iter().map(|(_, w)| *w).collect(),
        });
        for (port, (src, _)) in inputs.iter().enumerate() {
            b.connect(*src, sum, port);
        }
        b.output(row, Source::port(sum, 0));
    }
    Ok(())
}

/// Realizes relative gain `g` from `src`; returns the summer input and its weight.
fn entry_path(
    b: &mut NetworkBuilder,
    src: Source,
    g: Complex64,
    opts: &CompileOptions,
) -> Result<(Source, f64)> {
    if g == c(1.0) {
        return Ok((src, 1.0));
    }
    if g.im == 0.0 {
        let amp = b.add(Stage::amp_for_gain(g.re.abs(), opts.base_resistance)?);
        b.connect(src, amp, 0);
        return Ok((Source::port(amp, 0), if g.re < 0.0 { 1.0 } else { -1.0 }));
    }
    let phase = g.arg().rem_euclid(TAU);
    let rc: StageId = b.add(Stage::phase_shifter_for(
        phase,
        opts.frequency,
        opts.capacitance,
    )?);
    b.connect(src, rc, 0);
    let mag = g.norm();
    if mag == 1.0 {
        return Ok((Source::port(rc, 0), 1.0));
    }
    let amp = b.add(Stage::amp_for_gain(mag, opts.base_resistance)?);
    b.connect(Source::port(rc, 0), amp, 0);
    Ok((Source::port(amp, 0), -1.0))
}

/// Cascade of per-gate networks in circuit order.
pub fn compile_circuit(ir: &CircuitIR, opts: &CompileOptions) -> Result<StageNetwork> {
    ir.validate()?;
    let mut net = StageNetwork::identity(1 << ir.n_qubits, opts.frequency)?;
    for g in &ir.gates {
        net = net.cascade(&compile_gate(g, ir.n_qubits, opts)?)?;
    }
    Ok(net)
}
