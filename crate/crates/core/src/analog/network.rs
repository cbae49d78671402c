//! Feedforward stage networks and their phasor-domain evaluation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::stage::Stage;
use crate::cbs::SignalVector;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// Handle to a stage inside a network, by insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StageId(pub usize);

/// What drives a stage input or a network output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    /// A network input line.
    Line(usize),
    /// An output port of another stage.
    Port { stage: StageId, port: usize },
}

impl Source {
    pub fn port(stage: StageId, port: usize) -> Self {
        Source::Port { stage, port }
    }
}

/// Incremental constructor; all checks happen in [`NetworkBuilder::build`].
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    lines: usize,
    frequency: f64,
    stages: Vec<Stage>,
    drivers: Vec<Vec<Option<Source>>>,
    outputs: Vec<Option<Source>>,
    conflicts: Vec<String>,
}

impl NetworkBuilder {
    pub fn new(lines: usize, frequency: f64) -> Self {
        Self {
            lines,
            frequency,
            stages: Vec::new(),
            drivers: Vec::new(),
            outputs: vec![None; lines],
            conflicts: Vec::new(),
        }
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn add(&mut self, stage: Stage) -> StageId {
        self.drivers.push(vec![None; stage.input_count()]);
        self.stages.push(stage);
        StageId(self.stages.len() - 1)
    }

    /// Drives input `port` of `dst` from `src`.
    pub fn connect(&mut self, src: Source, dst: StageId, port: usize) -> &mut Self {
        match self.drivers.get_mut(dst.0).and_then(|d| d.get_mut(port)) {
            Some(slot @ None) => *slot = Some(src),
            Some(Some(_)) => self.conflicts.push(format!(
                "stage {} input {port} driven more than once",
                dst.0
            )),
            None => self
                .conflicts
                .push(format!("stage {} has no input port {port}", dst.0)),
        }
        self
    }

    /// Drives network output `line` from `src`.
    pub fn output(&mut self, line: usize, src: Source) -> &mut Self {
        match self.outputs.get_mut(line) {
            Some(slot @ None) => *slot = Some(src),
            Some(Some(_)) => self
                .conflicts
                .push(format!("output line {line} driven more than once")),
            None => self
                .conflicts
                .push(format!("output line {line} out of range")),
        }
        self
    }

    /// Wires every still-undriven output straight from the same-numbered input.
    pub fn pass_through_rest(&mut self) -> &mut Self {
        for (line, slot) in self.outputs.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = Some(Source::Line(line));
            }
        }
        self
    }

    pub fn build(self) -> Result<StageNetwork> {
        if let Some(c) = self.conflicts.first() {
            return Err(Error::structural(c.clone()));
        }
        if self.lines < 2 || !self.lines.is_power_of_two() {
            return Err(Error::structural(format!(
                "line count {} is not a power of two >= 2",
                self.lines
            )));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::structural(format!(
                "design frequency {} must be > 0",
                self.frequency
            )));
        }
        for (i, stage) in self.stages.iter().enumerate() {
            stage
                .validate()
                .map_err(|e| Error::structural(format!("stage {i}: {e}")))?;
        }
        let check_source = |src: Source, what: &str| -> Result<()> {
            match src {
                Source::Line(l) if l >= self.lines => Err(Error::structural(format!(
                    "{what}: input line {l} out of range"
                ))),
                Source::Port { stage, port } => match self.stages.get(stage.0) {
                    None => Err(Error::structural(format!(
                        "{what}: unknown stage {}",
                        stage.0
                    ))),
                    Some(s) if port >= s.output_count() => Err(Error::structural(format!(
                        "{what}: stage {} has no output port {port}",
                        stage.0
                    ))),
                    Some(_) => Ok(()),
                },
                Source::Line(_) => Ok(()),
            }
        };
        let mut drivers = Vec::with_capacity(self.drivers.len());
        for (i, ports) in self.drivers.into_iter().enumerate() {
            let mut resolved = Vec::with_capacity(ports.len());
            for (p, src) in ports.into_iter().enumerate() {
                let src = src.ok_or_else(|| {
                    Error::structural(format!("dangling input: stage {i} port {p} has no driver"))
                })?;
                check_source(src, &format!("stage {i} port {p}"))?;
                resolved.push(src);
            }
            drivers.push(resolved);
        }
        let mut outputs = Vec::with_capacity(self.lines);
        for (line, src) in self.outputs.into_iter().enumerate() {
            let src = src.ok_or_else(|| {
                Error::structural(format!("dangling output: line {line} has no driver"))
            })?;
            check_source(src, &format!("output line {line}"))?;
            outputs.push(src);
        }
        StageNetwork::assemble(self.lines, self.frequency, self.stages, drivers, outputs)
    }
}

/// Acyclic network of stages from `lines` input ports to `lines` output ports.
///
/// Immutable once built; the topological order is computed once here.
#[derive(Debug, Clone, PartialEq)]
pub struct StageNetwork {
    lines: usize,
    frequency: f64,
    stages: Vec<Stage>,
    drivers: Vec<Vec<Source>>,
    outputs: Vec<Source>,
    order: Vec<usize>,
    offsets: Vec<usize>,
    port_total: usize,
}

impl StageNetwork {
    fn assemble(
        lines: usize,
        frequency: f64,
        stages: Vec<Stage>,
        drivers: Vec<Vec<Source>>,
        outputs: Vec<Source>,
    ) -> Result<Self> {
        let order = topological_order(&drivers)?;
        let mut offsets = Vec::with_capacity(stages.len());
        let mut port_total = 0;
        for s in &stages {
            offsets.push(port_total);
            port_total += s.output_count();
        }
        Ok(Self {
            lines,
            frequency,
            stages,
            drivers,
            outputs,
            order,
            offsets,
            port_total,
        })
    }

    /// Plain wires from each input line to the same output line.
    pub fn identity(lines: usize, frequency: f64) -> Result<Self> {
        let mut b = NetworkBuilder::new(lines, frequency);
        b.pass_through_rest();
        b.build()
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    /// Frequency the component values were synthesized for.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Driver of each input port of stage `id`.
    pub fn drivers(&self, id: StageId) -> &[Source] {
        &self.drivers[id.0]
    }

    pub fn outputs(&self) -> &[Source] {
        &self.outputs
    }

    pub fn active_stage_count(&self) -> usize {
        self.stages.iter().filter(|s| s.is_active()).count()
    }

    /// Same topology with each stage replaced by `f(index, stage)`.
    ///
    /// `f` must keep port counts unchanged.
    pub fn map_stages(&self, mut f: impl FnMut(usize, &Stage) -> Stage) -> StageNetwork {
        let stages: Vec<Stage> = self
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let t = f(i, s);
                assert_eq!(
                    t.input_count(),
                    s.input_count(),
                    "map_stages changed port count"
                );
                assert_eq!(
                    t.output_count(),
                    s.output_count(),
                    "map_stages changed port count"
                );
                t
            })
            .collect();
        StageNetwork {
            stages,
            ..self.clone()
        }
    }

    /// Like [`StageNetwork::map_stages`] but returns a network with different
    /// component values validated again.
    pub fn try_map_stages(&self, f: impl FnMut(usize, &Stage) -> Stage) -> Result<StageNetwork> {
        let net = self.map_stages(f);
        for (i, s) in net.stages.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::structural(format!("stage {i}: {e}")))?;
        }
        Ok(net)
    }

    /// Propagates raw line amplitudes through the network at `freq`.
    pub fn evaluate_lines(&self, input: &[Complex64], freq: f64) -> Result<Vec<Complex64>> {
        if input.len() != self.lines {
            return Err(Error::Dimension {
                expected: self.lines,
                got: input.len(),
            });
        }
        if !(freq > 0.0 && freq.is_finite()) {
            return Err(Error::input(format!("frequency {freq} must be > 0")));
        }
        let mut ports = vec![Complex64::new(0.0, 0.0); self.port_total];
        let mut scratch = Vec::new();
        for &i in &self.order {
            scratch.clear();
            scratch.extend(
                self.drivers[i]
                    .iter()
                    .map(|&src| self.read(src, input, &ports)),
            );
            let off = self.offsets[i];
            let n_out = self.stages[i].output_count();
            // Every driver precedes `i` in the order, so the write never aliases a read.
            let (_, rest) = ports.split_at_mut(off);
            self.stages[i].propagate(&scratch, freq, &mut rest[..n_out]);
        }
        Ok(self
            .outputs
            .iter()
            .map(|&src| self.read(src, input, &ports))
            .collect())
    }

    fn read(&self, src: Source, input: &[Complex64], ports: &[Complex64]) -> Complex64 {
        match src {
            Source::Line(l) => input[l],
            Source::Port { stage, port } => ports[self.offsets[stage.0] + port],
        }
    }

    /// Output signal for input `v`, unnormalized.
    pub fn evaluate(&self, v: &SignalVector, freq: f64) -> Result<SignalVector> {
        SignalVector::new(v.n_qubits(), self.evaluate_lines(v.amplitudes(), freq)?)
    }

    /// Column `i` is the response to a unit signal on input line `i`.
    pub fn transfer_matrix(&self, freq: f64) -> Result<CMatrix> {
        let mut m = CMatrix::zeros(self.lines, self.lines);
        let mut probe = vec![Complex64::new(0.0, 0.0); self.lines];
        for i in 0..self.lines {
            probe[i] = Complex64::new(1.0, 0.0);
            let col = self.evaluate_lines(&probe, freq)?;
            m.set_column(i, &col);
            probe[i] = Complex64::new(0.0, 0.0);
        }
        Ok(m)
    }

    /// `self` followed by `next`: transfer is `T(next) · T(self)`.
    pub fn cascade(&self, next: &StageNetwork) -> Result<StageNetwork> {
        if self.lines != next.lines {
            return Err(Error::Dimension {
                expected: self.lines,
                got: next.lines,
            });
        }
        let shift = self.stages.len();
        let remap = |src: Source| match src {
            Source::Line(l) => self.outputs[l],
            Source::Port { stage, port } => Source::Port {
                stage: StageId(stage.0 + shift),
                port,
            },
        };
        let mut stages = self.stages.clone();
        stages.extend(next.stages.iter().cloned());
        let mut drivers = self.drivers.clone();
        drivers.extend(
            next.drivers
                .iter()
                .map(|ports| ports.iter().map(|&s| remap(s)).collect()),
        );
        let outputs = next.outputs.iter().map(|&s| remap(s)).collect();
        StageNetwork::assemble(self.lines, self.frequency, stages, drivers, outputs)
    }
}

/// Kahn's algorithm, lowest stage index first among ready stages.
fn topological_order(drivers: &[Vec<Source>]) -> Result<Vec<usize>> {
    let n = drivers.len();
    let mut indegree = vec![0usize; n];
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, ports) in drivers.iter().enumerate() {
        for src in ports {
            if let Source::Port { stage, .. } = src {
                indegree[i] += 1;
                dependents[stage.0].push(i);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &d in &dependents[i] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(Reverse(d));
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(Error::structural(format!("cycle through stage {stuck}")));
    }
    Ok(order)
}
