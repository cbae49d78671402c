use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use phasorq::{
    build_diffusion, build_oracle, build_uniform_feed, check_equivalence, compile_circuit,
    compile_gate, netlist, run_grover, CbsIndex, CircuitIR, CompileOptions, GateSpec, GroverConfig,
    OracleMode, Stage, StageNetwork, ToleranceDistribution, ToleranceSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_marked_token, CircuitConfig, ExperimentConfig};
use crate::report::{sweep_csv, ReportFile};
use crate::CliError;

/// Max-entry deviation allowed by `verify-gates`.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Args, Default)]
pub struct SearchArgs {
    /// Experiment file (TOML); flags given here override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Marked state as an index or an n-character bit-string; repeatable.
    #[arg(long = "marked")]
    pub marked: Vec<String>,
    #[arg(long)]
    pub freq: Option<f64>,
    /// Rescale to unit norm between iterations.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub renormalize: Option<bool>,
    #[arg(long, value_enum)]
    pub oracle: Option<OracleArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleArg {
    Ideal,
    Rc,
}

impl From<OracleArg> for OracleMode {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Ideal => OracleMode::Ideal,
            OracleArg::Rc => OracleMode::Rc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistributionArg {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Args, Default)]
pub struct GroverArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Relative resistor tolerance, e.g. 0.01; enables Monte Carlo.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Relative capacitor tolerance; defaults to the resistor tolerance.
    #[arg(long)]
    pub capacitor_tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub distribution: Option<DistributionArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(CliError::Internal),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_experiment(path: Option<&Path>) -> Result<Option<ExperimentConfig>, CliError> {
    path.map(|p| ExperimentConfig::from_toml(&read(p)?))
        .transpose()
}

/// Merges an optional experiment file with search flags.
fn base_config(
    args: &SearchArgs,
    file: Option<&ExperimentConfig>,
) -> Result<GroverConfig, CliError> {
    let mut cfg = match file {
        Some(f) => {
            let mut g = f.to_grover_unchecked()?;
            if args.qubits.is_some_and(|q| q != g.n_qubits) && args.marked.is_empty() {
                return Err(CliError::Config(
                    "--qubits differs from the config file; pass --marked too".into(),
                ));
            }
            g.n_qubits = args.qubits.unwrap_or(g.n_qubits);
            g
        }
        None => {
            let n = args
                .qubits
                .ok_or_else(|| CliError::Config("--qubits is required without --config".into()))?;
            GroverConfig::new(n, [], 1)
        }
    };
    if !args.marked.is_empty() {
        cfg.marked = args
            .marked
            .iter()
            .map(|t| parse_marked_token(t, cfg.n_qubits))
            .collect::<Result<BTreeSet<CbsIndex>, _>>()?;
    }
    if let Some(f) = args.freq {
        cfg.frequency = f;
    }
    if let Some(r) = args.renormalize {
        cfg.renormalize_between_iterations = r;
    }
    if let Some(o) = args.oracle {
        cfg.oracle = o.into();
    }
    Ok(cfg)
}

pub fn grover_config(args: &GroverArgs) -> Result<(GroverConfig, Option<PathBuf>), CliError> {
    let file = load_experiment(args.search.config.as_deref())?;
    let mut cfg = base_config(&args.search, file.as_ref())?;
    if let Some(j) = args.iterations {
        cfg.iterations = j;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if args.tolerance.is_some()
        || args.capacitor_tolerance.is_some()
        || args.distribution.is_some()
        || args.seed.is_some()
    {
        let prev = cfg.tolerance.unwrap_or(ToleranceSpec {
            seed: 0,
            ..ToleranceSpec::default()
        });
        let resistor_tol = args.tolerance.unwrap_or(prev.resistor_tol);
        cfg.tolerance = Some(ToleranceSpec {
            resistor_tol,
            capacitor_tol: args
                .capacitor_tolerance
                .or(args.tolerance)
                .unwrap_or(prev.capacitor_tol),
            distribution: match args.distribution {
                Some(DistributionArg::Uniform) => ToleranceDistribution::Uniform,
                Some(DistributionArg::Gaussian) => ToleranceDistribution::GaussianTruncated,
                None => prev.distribution,
            },
            seed: args.seed.unwrap_or(prev.seed),
        });
    }
    cfg.validate()?;
    let out = args
        .out
        .clone()
        .or_else(|| file.and_then(|f| f.output.report));
    Ok((cfg, out))
}

pub fn cmd_grover(args: &GroverArgs) -> Result<ReportFile, CliError> {
    let (cfg, out) = grover_config(args)?;
    let report = ReportFile::from_report(&run_grover(&cfg)?);
    write_or_print(out.as_deref(), &report.to_json())?;
    Ok(report)
}

#[derive(Debug, Clone, Args, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let file = load_experiment(args.search.config.as_deref())?;
    let mut cfg = base_config(&args.search, file.as_ref())?;
    cfg.iterations = args
        .max_iterations
        .or(file.as_ref().map(|f| f.iterations))
        .ok_or_else(|| CliError::Config("--max-iterations is required".into()))?;
    cfg.tolerance = None;
    cfg.trials = 1;
    cfg.validate()?;
    let csv = sweep_csv(&run_grover(&cfg)?);
    let out = args.out.clone().or_else(|| file.and_then(|f| f.output.csv));
    write_or_print(out.as_deref(), &csv)?;
    Ok(csv)
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub qubits_max: usize,
    /// Random gates per register size, on top of the fixed coverage set.
    #[arg(long, default_value_t = 24)]
    pub random_gates: usize,
    /// Self-test: nudge one resistor in every compiled network so the check must fail.
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

impl Default for VerifyArgs {
    fn default() -> Self {
        Self {
            seed: 0,
            qubits_max: 4,
            random_gates: 24,
            corrupt: false,
        }
    }
}

/// Fixed coverage plus seeded random gates on `n` qubits.
pub fn verification_gates(n: usize, random: usize, rng: &mut ChaCha8Rng) -> Vec<GateSpec> {
    use std::f64::consts::{PI, TAU};
    let mut gates = Vec::new();
    for t in 0..n {
        gates.push(GateSpec::hadamard(t));
        gates.push(GateSpec::x(t));
        gates.push(GateSpec::phase(t, PI / 2.0));
        gates.push(GateSpec::phase(t, PI));
        gates.push(GateSpec::phase(t, 3.0 * PI / 2.0));
    }
    if n >= 2 {
        gates.push(GateSpec::cnot(0, 1));
        gates.push(GateSpec::cnot(1, 0));
    }
    if n >= 3 {
        gates.push(GateSpec::toffoli(0, 1, 2));
    }
    for _ in 0..random {
        let target = rng.random_range(0..n);
        let controls: Vec<usize> = (0..n)
            .filter(|&q| q != target && rng.random_bool(0.3))
            .collect();
        let g = match rng.random_range(0..3) {
            0 => GateSpec::phase(target, rng.random_range(0.0..TAU)),
            1 => GateSpec::hadamard(target),
            _ => GateSpec::x(target),
        };
        gates.push(g.controlled_by(controls));
    }
    gates
}

fn corrupt(net: &StageNetwork) -> StageNetwork {
    let mut done = false;
    net.map_stages(|_, s| match s {
        Stage::VoltageDivider { r1, r2 } if !done => {
            done = true;
            Stage::VoltageDivider {
                r1: r1 * 1.01,
                r2: *r2,
            }
        }
        Stage::InvertingAmp { r_in, r_f } if !done => {
            done = true;
            Stage::InvertingAmp {
                r_in: *r_in,
                r_f: r_f * 1.01,
            }
        }
        Stage::RcPhaseShifter { r, c, swapped } if !done => {
            done = true;
            Stage::RcPhaseShifter {
                r: r * 1.01,
                c: *c,
                swapped: *swapped,
            }
        }
        other => other.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub gates_checked: usize,
    pub max_deviation: f64,
}

pub fn cmd_verify_gates(args: &VerifyArgs) -> Result<VerifySummary, CliError> {
    if !(1..=phasorq::MAX_QUBITS).contains(&args.qubits_max) {
        return Err(CliError::Config(format!(
            "--qubits-max {} out of range",
            args.qubits_max
        )));
    }
    let opts = CompileOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut overall = 0.0f64;
    let mut checked = 0;
    for n in 1..=args.qubits_max {
        let mut worst = 0.0f64;
        for g in verification_gates(n, args.random_gates, &mut rng) {
            let ir = CircuitIR::new(n, vec![g.clone()])?;
            let mut net = compile_gate(&g, n, &opts)?;
            if args.corrupt && net.stages().iter().any(Stage::is_active) {
                net = corrupt(&net);
            }
            let eq = check_equivalence(&net, &ir, opts.frequency, VERIFY_TOL)?;
            checked += 1;
            worst = worst.max(eq.max_deviation);
            if !eq.passed {
                println!("FAIL n={n} gate={g:?} deviation={:e}", eq.max_deviation);
                return Err(CliError::Verification(format!(
                    "gate {g:?} on {n} qubits deviates by {:e}",
                    eq.max_deviation
                )));
            }
        }
        println!("n={n} max_deviation={worst:e}");
        overall = overall.max(worst);
    }
    println!("verified {checked} gates, max deviation {overall:e} (tolerance {VERIFY_TOL:e})");
    Ok(VerifySummary {
        gates_checked: checked,
        max_deviation: overall,
    })
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroverPart {
    Feed,
    Oracle,
    Diffusion,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    /// Circuit file (TOML) to compile.
    #[arg(long, conflicts_with = "grover", required_unless_present = "grover")]
    pub circuit: Option<PathBuf>,
    /// Grover building block to export.
    #[arg(long, value_enum)]
    pub grover: Option<GroverPart>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long = "marked")]
    pub marked: Vec<String>,
    #[arg(long, value_enum, default_value = "ideal")]
    pub oracle: OracleArg,
    #[arg(long)]
    pub freq: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn export_network(args: &ExportArgs) -> Result<StageNetwork, CliError> {
    let mut opts = CompileOptions::default();
    if let Some(path) = &args.circuit {
        let circuit = CircuitConfig::from_toml(&read(path)?)?;
        opts.frequency = args.freq.unwrap_or(circuit.frequency_hz);
        return Ok(compile_circuit(&circuit.to_ir()?, &opts)?);
    }
    if let Some(f) = args.freq {
        opts.frequency = f;
    }
    let n = args
        .qubits
        .ok_or_else(|| CliError::Config("--qubits is required with --grover".into()))?;
    Ok(match args.grover.expect("clap enforces one source") {
        GroverPart::Feed => build_uniform_feed(n, &opts)?,
        GroverPart::Diffusion => build_diffusion(n, &opts)?,
        GroverPart::Oracle => {
            let marked = args
                .marked
                .iter()
                .map(|t| parse_marked_token(t, n))
                .collect::<Result<BTreeSet<_>, _>>()?;
            build_oracle(n, &marked, args.oracle.into(), &opts)?
        }
    })
}

pub fn cmd_export_netlist(args: &ExportArgs) -> Result<String, CliError> {
    let text = netlist::export(&export_network(args)?);
    write_or_print(args.out.as_deref(), &text)?;
    Ok(text)
}

#[derive(Debug, Clone, Args)]
pub struct ImportArgs {
    /// Netlist file to read.
    #[arg(long)]
    pub input: PathBuf,
    /// Write the canonical form here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_import_netlist(args: &ImportArgs) -> Result<StageNetwork, CliError> {
    let text = read(&args.input)?;
    let net = netlist::import(&text).map_err(|e| match e {
        phasorq::Error::Parse { .. } | phasorq::Error::Structural(_) => {
            CliError::Config(format!("{}: {e}", args.input.display()))
        }
        other => other.into(),
    })?;
    eprintln!(
        "{}: {} lines, {} stages ({} active), design frequency {} Hz",
        args.input.display(),
        net.lines(),
        net.stages().len(),
        net.active_stage_count(),
        net.frequency()
    );
    if let Some(out) = &args.out {
        write_or_print(Some(out), &netlist::export(&net))?;
    }
    Ok(net)
}
