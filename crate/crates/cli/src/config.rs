//! TOML schemas for experiment and circuit files.

use std::collections::BTreeSet;
use std::path::PathBuf;

use phasorq::{
    cbs_index, CMatrix, CbsIndex, CircuitIR, Complex64, GateKind, GateSpec, GroverConfig,
    OracleMode, ToleranceDistribution, ToleranceSpec,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A marked state as written by the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarkedEntry {
    Index(usize),
    /// Bit-string, leftmost character = highest qubit.
    Bits(String),
}

impl MarkedEntry {
    pub fn resolve(&self, n_qubits: usize) -> Result<CbsIndex, CliError> {
        match self {
            MarkedEntry::Index(i) => Ok(CbsIndex(*i)),
            MarkedEntry::Bits(s) => {
                let bits = match s.strip_prefix("0b") {
                    Some(b) => b,
                    None if s.len() != n_qubits => {
                        return Err(CliError::Config(format!(
                            "marked bit-string {s:?} must have {n_qubits} characters"
                        )))
                    }
                    None => s,
                };
                cbs_index(bits).map_err(|e| CliError::Config(format!("marked {s:?}: {e}")))
            }
        }
    }
}

/// Reads a command-line marked token. An `n`-character string of 0/1 is a
/// bit-string; `0b...` is always a bit-string; anything else is decimal.
pub fn parse_marked_token(token: &str, n_qubits: usize) -> Result<CbsIndex, CliError> {
    let is_bits = token.len() == n_qubits && token.chars().all(|c| c == '0' || c == '1');
    if token.starts_with("0b") || is_bits {
        return MarkedEntry::Bits(token.to_string()).resolve(n_qubits);
    }
    token.parse::<usize>().map(CbsIndex).map_err(|_| {
        CliError::Config(format!(
            "marked state {token:?} is neither an index nor a bit-string"
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub resistor: f64,
    #[serde(default)]
    pub capacitor: Option<f64>,
    #[serde(default)]
    pub distribution: ToleranceDistribution,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn default_iterations() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_trials() -> usize {
    1
}
fn default_frequency() -> f64 {
    1_000.0
}

/// Grover experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    pub marked: Vec<MarkedEntry>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_true")]
    pub renormalize: bool,
    #[serde(default)]
    pub tolerance: Option<ToleranceConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    #[serde(default)]
    pub oracle: OracleMode,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("experiment config: {e}")))
    }

    pub fn to_grover(&self) -> Result<GroverConfig, CliError> {
        let cfg = self.to_grover_unchecked()?;
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Resolves fields without checking the combined config.
    pub fn to_grover_unchecked(&self) -> Result<GroverConfig, CliError> {
        let marked: BTreeSet<CbsIndex> = self
            .marked
            .iter()
            .map(|m| m.resolve(self.n_qubits))
            .collect::<Result<_, _>>()?;
        let tolerance = self
            .tolerance
            .as_ref()
            .map(|t| {
                ToleranceSpec::new(
                    t.resistor,
                    t.capacitor.unwrap_or(t.resistor),
                    t.distribution,
                    t.seed,
                )
                .map_err(|e| CliError::Config(e.to_string()))
            })
            .transpose()?;
        let cfg = GroverConfig {
            n_qubits: self.n_qubits,
            marked,
            iterations: self.iterations,
            renormalize_between_iterations: self.renormalize,
            tolerance,
            trials: self.trials,
            frequency: self.frequency_hz,
            oracle: self.oracle,
        };
        Ok(cfg)
    }
}

/// One gate in a circuit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GateEntry {
    Phase {
        target: usize,
        phi: f64,
        #[serde(default)]
        controls: Vec<usize>,
    },
    Hadamard {
        target: usize,
        #[serde(default)]
        controls: Vec<usize>,
    },
    X {
        target: usize,
        #[serde(default)]
        controls: Vec<usize>,
    },
    /// Rows of `[re, im]` pairs.
    Matrix {
        rows: Vec<Vec<[f64; 2]>>,
        #[serde(default)]
        allow_non_unitary: bool,
    },
}

impl GateEntry {
    fn to_spec(&self) -> Result<GateSpec, CliError> {
        Ok(match self {
            GateEntry::Phase {
                target,
                phi,
                controls,
            } => GateSpec::phase(*target, *phi).controlled_by(controls.clone()),
            GateEntry::Hadamard { target, controls } => {
                GateSpec::hadamard(*target).controlled_by(controls.clone())
            }
            GateEntry::X { target, controls } => {
                GateSpec::x(*target).controlled_by(controls.clone())
            }
            GateEntry::Matrix {
                rows,
                allow_non_unitary,
            } => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
                    .collect();
                let matrix =
                    CMatrix::from_rows(rows).map_err(|e| CliError::Config(e.to_string()))?;
                GateSpec {
                    kind: GateKind::Matrix {
                        matrix,
                        allow_non_unitary: *allow_non_unitary,
                    },
                    controls: BTreeSet::new(),
                }
            }
        })
    }
}

/// Circuit file: a register size and an ordered gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub n_qubits: usize,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    #[serde(default)]
    pub gates: Vec<GateEntry>,
}

impl CircuitConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("circuit config: {e}")))
    }

    pub fn to_ir(&self) -> Result<CircuitIR, CliError> {
        let gates = self
            .gates
            .iter()
            .map(GateEntry::to_spec)
            .collect::<Result<_, _>>()?;
        CircuitIR::new(self.n_qubits, gates).map_err(|e| CliError::Config(e.to_string()))
    }
}
