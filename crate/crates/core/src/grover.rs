//! Grover search assembled from analog stages: a uniform feed, a sign-flip
//! oracle on the marked lines and a reflection about the mean, re-fed for
//! each iteration.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analog::{perturb_tagged, NetworkBuilder, Source, Stage, StageNetwork, ToleranceSpec};
use crate::cbs::{asp, CbsIndex, SignalVector, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::gate::CompileOptions;

/// `x = 2πfRC` used for the RC oracle; its phase sits within `2x` of π.
pub const RC_ORACLE_X: f64 = 1e-6;

/// How the oracle's sign flip is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Unity-gain inverting amplifier.
    #[default]
    Ideal,
    /// All-pass RC section tuned as close to π as [`RC_ORACLE_X`] allows.
    Rc,
}

impl std::str::FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "rc" => Ok(Self::Rc),
            other => Err(Error::input(format!("unknown oracle mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverConfig {
    pub n_qubits: usize,
    pub marked: BTreeSet<CbsIndex>,
    pub iterations: usize,
    pub renormalize_between_iterations: bool,
    pub tolerance: Option<ToleranceSpec>,
    pub trials: usize,
    pub frequency: f64,
    pub oracle: OracleMode,
}

impl GroverConfig {
    /// Nominal run with renormalization on and a single trial.
    pub fn new(
        n_qubits: usize,
        marked: impl IntoIterator<Item = usize>,
        iterations: usize,
    ) -> Self {
        Self {
            n_qubits,
            marked: marked.into_iter().map(CbsIndex).collect(),
            iterations,
            renormalize_between_iterations: true,
            tolerance: None,
            trials: 1,
            frequency: CompileOptions::default().frequency,
            oracle: OracleMode::Ideal,
        }
    }

    pub fn with_tolerance(mut self, tol: ToleranceSpec, trials: usize) -> Self {
        self.tolerance = Some(tol);
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::input(format!(
                "qubit count {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        let lines = 1usize << self.n_qubits;
        validate_marked(self.n_qubits, &self.marked)?;
        if self.marked.len() >= lines {
            return Err(Error::input(format!(
                "{} marked states leave nothing to search among {lines}",
                self.marked.len()
            )));
        }
        if self.iterations == 0 {
            return Err(Error::input("iterations must be >= 1"));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be >= 1"));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::input(format!(
                "frequency {} must be > 0",
                self.frequency
            )));
        }
        if let Some(t) = &self.tolerance {
            t.validate()?;
        }
        Ok(())
    }

    fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            frequency: self.frequency,
            ..CompileOptions::default()
        }
    }
}

fn validate_marked(n_qubits: usize, marked: &BTreeSet<CbsIndex>) -> Result<()> {
    if marked.is_empty() {
        return Err(Error::input("marked set is empty"));
    }
    let lines = 1usize << n_qubits;
    if let Some(bad) = marked.iter().find(|k| k.0 >= lines) {
        return Err(Error::input(format!(
            "marked index {bad} out of range for {lines} lines"
        )));
    }
    Ok(())
}

/// Line 0 fanned out through a 50/50 divider on every line.
pub fn build_uniform_feed(n_qubits: usize, opts: &CompileOptions) -> Result<StageNetwork> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::input(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    let lines = 1usize << n_qubits;
    let mut b = NetworkBuilder::new(lines, opts.frequency);
    for line in 0..lines {
        let d = b.add(Stage::divider_for_ratio(0.5, opts.base_resistance)?);
        b.connect(Source::Line(0), d, 0)
            .output(line, Source::port(d, 0));
    }
    b.build()
}

/// Sign flip on each marked line, plain wire elsewhere.
pub fn build_oracle(
    n_qubits: usize,
    marked: &BTreeSet<CbsIndex>,
    mode: OracleMode,
    opts: &CompileOptions,
) -> Result<StageNetwork> {
    validate_marked(n_qubits, marked)?;
    let mut b = NetworkBuilder::new(1 << n_qubits, opts.frequency);
    for k in marked {
        let stage = match mode {
            OracleMode::Ideal => Stage::amp_for_gain(1.0, opts.base_resistance)?,
            OracleMode::Rc => Stage::RcPhaseShifter {
                r: RC_ORACLE_X / (2.0 * PI * opts.frequency * opts.capacitance),
                c: opts.capacitance,
                swapped: false,
            },
        };
        let s = b.add(stage);
        b.connect(Source::Line(k.0), s, 0)
            .output(k.0, Source::port(s, 0));
    }
    b.pass_through_rest();
    b.build()
}

/// Reflection about the mean, `(2/N)·J - I`.
///
/// Every line passes a divider of ratio `2/N`; the diagonal path adds an
/// inverting amplifier of gain `-(N-2)/2`; one unit-weight summer per output
/// collects all `N` contributions. For `N = 8` this is dividers of ¼, a gain
/// of −3 on the diagonal and eight summers.
pub fn build_diffusion(n_qubits: usize, opts: &CompileOptions) -> Result<StageNetwork> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::input(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    let lines = 1usize << n_qubits;
    let ratio = 2.0 / lines as f64;
    let diag_gain = (lines as f64 - 2.0) / 2.0;
    let mut b = NetworkBuilder::new(lines, opts.frequency);

    // With N = 2 the divider is a wire and the diagonal vanishes.
    let taps: Vec<Source> = (0..lines)
        .map(|line| {
            if ratio < 1.0 {
                let d = b.add(Stage::divider_for_ratio(ratio, opts.base_resistance)?);
                b.connect(Source::Line(line), d, 0);
                Ok(Source::port(d, 0))
            } else {
                Ok(Source::Line(line))
            }
        })
        .collect::<Result<_>>()?;
    let diag: Vec<Option<Source>> = taps
        .iter()
        .map(|&tap| {
            if diag_gain > 0.0 {
                let a = b.add(Stage::amp_for_gain(diag_gain, opts.base_resistance)?);
                b.connect(tap, a, 0);
                Ok(Some(Source::port(a, 0)))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    for out in 0..lines {
        let inputs: Vec<Source> = (0..lines)
            .filter_map(|col| {
                if col == out {
                    diag[col]
                } else {
                    Some(taps[col])
                }
            })
            .collect();
        let s = b.add(Stage::Summer {
            weights: vec![1.0; inputs.len()],
        });
        for (port, src) in inputs.into_iter().enumerate() {
            b.connect(src, s, port);
        }
        b.output(out, Source::port(s, 0));
    }
    b.build()
}

/// The three networks a search runs through.
#[derive(Debug, Clone, PartialEq)]
pub struct GroverNetworks {
    pub feed: StageNetwork,
    pub oracle: StageNetwork,
    pub diffusion: StageNetwork,
}

impl GroverNetworks {
    pub fn build(cfg: &GroverConfig) -> Result<Self> {
        let opts = cfg.compile_options();
        Ok(Self {
            feed: build_uniform_feed(cfg.n_qubits, &opts)?,
            oracle: build_oracle(cfg.n_qubits, &cfg.marked, cfg.oracle, &opts)?,
            diffusion: build_diffusion(cfg.n_qubits, &opts)?,
        })
    }

    /// Independent component draws for each of the three networks.
    pub fn perturbed(&self, tol: &ToleranceSpec, trial: u64) -> Self {
        Self {
            feed: perturb_tagged(&self.feed, tol, trial, 1),
            oracle: perturb_tagged(&self.oracle, tol, trial, 2),
            diffusion: perturb_tagged(&self.diffusion, tol, trial, 3),
        }
    }

    /// State after each iteration. The same hardware is reused every round.
    pub fn run(&self, cfg: &GroverConfig) -> Result<Vec<SignalVector>> {
        let f = cfg.frequency;
        let source = SignalVector::basis(cfg.n_qubits, CbsIndex(0))?;
        let mut v = self.feed.evaluate(&source, f)?.normalized()?;
        let mut snapshots = Vec::with_capacity(cfg.iterations);
        for _ in 0..cfg.iterations {
            v = self.diffusion.evaluate(&self.oracle.evaluate(&v, f)?, f)?;
            if cfg.renormalize_between_iterations {
                v = v.normalized()?;
            }
            snapshots.push(v.clone());
        }
        Ok(snapshots)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl IterationStats {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let first = xs[0];
        // Offsetting by the first sample keeps identical samples exact.
        let mean = first + xs.iter().map(|x| x - first).sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    /// `trial_asp[t][j]` is the ASP of trial `t` after iteration `j + 1`.
    pub trial_asp: Vec<Vec<f64>>,
    pub stats: Vec<IterationStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroverReport {
    pub config: GroverConfig,
    pub snapshots: Vec<SignalVector>,
    pub nominal_asp: Vec<f64>,
    pub ideal_asp: Vec<f64>,
    pub monte_carlo: Option<MonteCarlo>,
}

pub fn run_grover(cfg: &GroverConfig) -> Result<GroverReport> {
    cfg.validate()?;
    let nets = GroverNetworks::build(cfg)?;
    let snapshots = nets.run(cfg)?;
    let nominal_asp = snapshots
        .iter()
        .map(|v| asp(v, &cfg.marked))
        .collect::<Result<Vec<_>>>()?;
    let lines = 1usize << cfg.n_qubits;
    let ideal = (1..=cfg.iterations)
        .map(|j| ideal_asp(lines, cfg.marked.len(), j))
        .collect();

    let monte_carlo = match &cfg.tolerance {
        None => None,
        Some(tol) => {
            let trial_asp = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|trial| {
                    nets.perturbed(tol, trial)
                        .run(cfg)?
                        .iter()
                        .map(|v| asp(v, &cfg.marked))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let stats = (0..cfg.iterations)
                .map(|j| {
                    let column: Vec<f64> = trial_asp.iter().map(|t| t[j]).collect();
                    IterationStats::from_samples(&column)
                })
                .collect();
            Some(MonteCarlo { trial_asp, stats })
        }
    };

    Ok(GroverReport {
        config: cfg.clone(),
        snapshots,
        nominal_asp,
        ideal_asp: ideal,
        monte_carlo,
    })
}

/// Closed-form success probability after `j` ideal iterations:
/// `sin²((2j + 1)·asin(√(k/N)))`.
///
/// # Panics
/// If `k == 0` or `k >= total`.
pub fn ideal_asp(total: usize, k: usize, j: usize) -> f64 {
    assert!(k >= 1 && k < total, "need 1 <= k < N, got k={k}, N={total}");
    let theta = (k as f64 / total as f64).sqrt().asin();
    ((2 * j + 1) as f64 * theta).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalIterations {
    /// Best iteration count by the closed form.
    pub exact: usize,
    /// `(π/4)·√(N/k)`.
    pub approx: f64,
}

pub fn optimal_iterations(total: usize, k: usize) -> Result<OptimalIterations> {
    if k == 0 || k >= total {
        return Err(Error::input(format!(
            "need 1 <= k < N, got k={k}, N={total}"
        )));
    }
    let approx = PI / 4.0 * (total as f64 / k as f64).sqrt();
    let upper = approx.ceil() as usize + 1;
    let mut exact = 1;
    let mut best = ideal_asp(total, k, 1);
    for j in 2..=upper {
        let p = ideal_asp(total, k, j);
        if p > best + 1e-12 {
            best = p;
            exact = j;
        }
    }
    Ok(OptimalIterations { exact, approx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbs::measure;
    use crate::matrix::CMatrix;
    use crate::reference::{diffusion_matrix, grover_states, oracle_matrix};
    use approx::assert_abs_diff_eq;

    fn marked(xs: &[usize]) -> BTreeSet<CbsIndex> {
        xs.iter().copied().map(CbsIndex).collect()
    }

    #[test]
    fn feed_splits_in_half() {
        let opts = CompileOptions::default();
        for n in [1, 3] {
            let feed = build_uniform_feed(n, &opts).unwrap();
            let out = feed
                .evaluate(&SignalVector::basis(n, CbsIndex(0)).unwrap(), 1e3)
                .unwrap();
            assert!(out.amplitudes().iter().all(|a| a.re == 0.5 && a.im == 0.0));
            let m = measure(&out).unwrap();
            assert!(m
                .probabilities
                .iter()
                .all(|&p| (p - 1.0 / (1 << n) as f64).abs() < 1e-15));
        }
    }

    #[test]
    fn oracle_flips_marked_lines() {
        let opts = CompileOptions::default();
        let t = build_oracle(3, &marked(&[5]), OracleMode::Ideal, &opts)
            .unwrap()
            .transfer_matrix(1e3)
            .unwrap();
        assert_eq!(t, oracle_matrix(3, &marked(&[5])));
        let t2 = build_oracle(3, &marked(&[5, 7]), OracleMode::Ideal, &opts)
            .unwrap()
            .transfer_matrix(1e3)
            .unwrap();
        assert_eq!(t2[(5, 5)].re, -1.0);
        assert_eq!(t2[(7, 7)].re, -1.0);
        assert_eq!(t2[(6, 6)].re, 1.0);
        assert!(build_oracle(3, &marked(&[]), OracleMode::Ideal, &opts).is_err());
    }

    #[test]
    fn rc_oracle_close_to_pi() {
        let opts = CompileOptions::default();
        let t = build_oracle(2, &marked(&[1]), OracleMode::Rc, &opts)
            .unwrap()
            .transfer_matrix(1e3)
            .unwrap();
        let g = t[(1, 1)];
        assert!((g.norm() - 1.0).abs() < 1e-12);
        assert!((PI - g.arg()).abs() < 2e-6 + 1e-12);
    }

    #[test]
    fn diffusion_matches_reflection() {
        let opts = CompileOptions::default();
        for n in 1..=4 {
            let t = build_diffusion(n, &opts)
                .unwrap()
                .transfer_matrix(1e3)
                .unwrap();
            assert!(
                t.max_abs_diff(&diffusion_matrix(n)).unwrap() < 1e-12,
                "n={n}"
            );
        }
        let t2 = build_diffusion(2, &opts)
            .unwrap()
            .transfer_matrix(1e3)
            .unwrap();
        assert_abs_diff_eq!(t2[(0, 1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t2[(0, 0)].re, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn diffusion_n3_structure() {
        let net = build_diffusion(3, &CompileOptions::default()).unwrap();
        let divs = net
            .stages()
            .iter()
            .filter(|s| matches!(s, Stage::VoltageDivider { .. }))
            .count();
        let amps: Vec<_> = net
            .stages()
            .iter()
            .filter_map(|s| {
                s.gain(1e3)
                    .filter(|_| matches!(s, Stage::InvertingAmp { .. }))
            })
            .collect();
        let sums = net
            .stages()
            .iter()
            .filter(|s| matches!(s, Stage::Summer { .. }))
            .count();
        assert_eq!((divs, amps.len(), sums), (8, 8, 8));
        assert!(amps.iter().all(|g| g.re == -3.0));
        for s in net.stages() {
            if let Stage::VoltageDivider { .. } = s {
                assert_eq!(s.gain(1e3).unwrap().re, 0.25);
            }
        }
    }

    #[test]
    fn diffusion_twice_is_identity() {
        let d = build_diffusion(3, &CompileOptions::default()).unwrap();
        let t = d.cascade(&d).unwrap().transfer_matrix(1e3).unwrap();
        assert!(t.max_abs_diff(&CMatrix::identity(8)).unwrap() < 1e-9);
    }

    #[test]
    fn nominal_examples() {
        let cases: [(&[usize], usize, f64); 4] = [
            (&[5], 1, 0.78125),
            (&[5], 2, 0.9453125),
            (&[5, 7], 1, 1.0),
            (&[5, 7], 2, 0.25),
        ];
        for (k, j, expected) in cases {
            let r = run_grover(&GroverConfig::new(3, k.iter().copied(), j)).unwrap();
            assert_abs_diff_eq!(r.nominal_asp[j - 1], expected, epsilon = 1e-12);
            assert_eq!(r.snapshots.len(), j);
        }
    }

    #[test]
    fn ideal_asp_examples() {
        assert_abs_diff_eq!(ideal_asp(8, 1, 1), 0.78125, epsilon = 1e-12);
        assert_abs_diff_eq!(ideal_asp(8, 2, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ideal_asp(8, 3, 0), 3.0 / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ideal_asp(8, 1, 3), 0.330078125, epsilon = 1e-12);
    }

    #[test]
    fn optimal_iteration_examples() {
        let a = optimal_iterations(8, 1).unwrap();
        assert_eq!(a.exact, 2);
        assert_abs_diff_eq!(a.approx, 2.221, epsilon = 1e-3);
        let b = optimal_iterations(8, 2).unwrap();
        assert_eq!(b.exact, 1);
        assert_abs_diff_eq!(b.approx, 1.571, epsilon = 1e-3);
        let c = optimal_iterations(4, 1).unwrap();
        assert_eq!(c.exact, 1);
        assert_abs_diff_eq!(ideal_asp(4, 1, 1), 1.0, epsilon = 1e-15);
        assert!(optimal_iterations(8, 8).is_err());
        assert!(optimal_iterations(8, 0).is_err());
    }

    #[test]
    fn beyond_optimum_degrades() {
        assert!(ideal_asp(8, 2, 2) < ideal_asp(8, 2, 1));
        for total in [8usize, 16] {
            let ks: Vec<usize> = (1..=total / 2).filter(|&k| 4 * k > total).collect();
            for w in ks.windows(2) {
                assert!(
                    ideal_asp(total, w[1], 1) < ideal_asp(total, w[0], 1),
                    "N={total} k={w:?}"
                );
            }
        }
    }

    #[test]
    fn nominal_equals_brute_force() {
        for n in 1..=6usize {
            let lines = 1usize << n;
            let sets: Vec<Vec<usize>> = vec![
                vec![0],
                vec![lines - 1],
                (0..lines / 2).step_by(3).collect(),
            ];
            for k in sets.into_iter().filter(|k| k.len() < lines) {
                let cfg = GroverConfig::new(n, k.iter().copied(), 4);
                let r = run_grover(&cfg).unwrap();
                let brute = grover_states(n, &cfg.marked, 4).unwrap();
                for (j, state) in brute.iter().enumerate() {
                    let b = asp(state, &cfg.marked).unwrap();
                    assert!((r.nominal_asp[j] - b).abs() < 1e-12, "n={n} k={k:?} j={j}");
                    assert!((r.nominal_asp[j] - r.ideal_asp[j]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_tolerance_collapses_to_nominal() {
        let cfg = GroverConfig::new(3, [5], 2)
            .with_tolerance(ToleranceSpec::uniform(0.0, 3).unwrap(), 20);
        let r = run_grover(&cfg).unwrap();
        let mc = r.monte_carlo.unwrap();
        for (j, s) in mc.stats.iter().enumerate() {
            assert_eq!(s.mean, r.nominal_asp[j]);
            assert_eq!(s.min, r.nominal_asp[j]);
            assert_eq!(s.max, r.nominal_asp[j]);
            assert_eq!(s.std, 0.0);
        }
    }

    #[test]
    fn renormalized_states_have_unit_norm_under_perturbation() {
        let cfg = GroverConfig::new(3, [2], 3)
            .with_tolerance(ToleranceSpec::uniform(0.05, 1).unwrap(), 10);
        let nets = GroverNetworks::build(&cfg).unwrap();
        for trial in 0..10 {
            for v in nets
                .perturbed(cfg.tolerance.as_ref().unwrap(), trial)
                .run(&cfg)
                .unwrap()
            {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(GroverConfig::new(3, [8], 1).validate().is_err());
        assert!(GroverConfig::new(3, [], 1).validate().is_err());
        assert!(GroverConfig::new(3, [1], 0).validate().is_err());
        assert!(GroverConfig::new(1, [0, 1], 1).validate().is_err());
        assert!(GroverConfig::new(1, [1], 1).validate().is_ok());
    }

    #[test]
    fn stats_of_known_samples() {
        let s = IterationStats::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_abs_diff_eq!(s.std, (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
    }
}
