//! JSON report and CSV sweep output.

use phasorq::{optimal_iterations, GroverReport, IterationStats, OracleMode, ToleranceSpec};
use serde::Serialize;

/// Measured ASPs from the 3-qubit hardware build, keyed by (k, iteration).
const HARDWARE_ASP: [(usize, usize, f64); 4] =
    [(1, 1, 0.794), (1, 2, 0.990), (2, 1, 0.964), (2, 2, 0.723)];

pub const HARDWARE_NOTE: &str = "hardware reference, not target";

fn hardware_asp(n_qubits: usize, k: usize, iteration: usize) -> Option<f64> {
    (n_qubits == 3)
        .then(|| {
            HARDWARE_ASP
                .iter()
                .find(|(hk, hj, _)| *hk == k && *hj == iteration)
        })
        .flatten()
        .map(|(_, _, v)| *v)
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub n_qubits: usize,
    pub marked: Vec<usize>,
    pub marked_bits: Vec<String>,
    pub iterations: usize,
    pub renormalize: bool,
    pub trials: usize,
    pub frequency_hz: f64,
    pub oracle: OracleMode,
    pub tolerance: Option<ToleranceSpec>,
}

#[derive(Debug, Serialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub nominal_asp: f64,
    pub ideal_asp: f64,
    pub mc_mean: Option<f64>,
    pub mc_std: Option<f64>,
    pub mc_min: Option<f64>,
    pub mc_max: Option<f64>,
    /// Measured on the analog hardware build; context only.
    pub hardware_reference_asp: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LineAmplitude {
    pub index: usize,
    pub bits: String,
    pub magnitude: f64,
    pub phase: f64,
}

#[derive(Debug, Serialize)]
pub struct OptimalEcho {
    pub exact: usize,
    pub approx: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub config: ConfigEcho,
    pub optimal_iterations: OptimalEcho,
    pub iterations: Vec<IterationRow>,
    pub final_amplitudes: Vec<LineAmplitude>,
    pub hardware_reference_note: &'static str,
}

impl ReportFile {
    pub fn from_report(r: &GroverReport) -> Self {
        let cfg = &r.config;
        let k = cfg.marked.len();
        let lines = 1usize << cfg.n_qubits;
        let opt = optimal_iterations(lines, k).expect("validated config");
        let stats =
            |j: usize| -> Option<IterationStats> { r.monte_carlo.as_ref().map(|mc| mc.stats[j]) };
        let iterations = (0..cfg.iterations)
            .map(|j| IterationRow {
                iteration: j + 1,
                nominal_asp: r.nominal_asp[j],
                ideal_asp: r.ideal_asp[j],
                mc_mean: stats(j).map(|s| s.mean),
                mc_std: stats(j).map(|s| s.std),
                mc_min: stats(j).map(|s| s.min),
                mc_max: stats(j).map(|s| s.max),
                hardware_reference_asp: hardware_asp(cfg.n_qubits, k, j + 1),
            })
            .collect();
        let last = r.snapshots.last().expect("at least one iteration");
        let final_amplitudes = last
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| LineAmplitude {
                index: i,
                bits: phasorq::CbsIndex(i).to_bits(cfg.n_qubits),
                magnitude: a.norm(),
                phase: a.arg(),
            })
            .collect();
        ReportFile {
            config: ConfigEcho {
                n_qubits: cfg.n_qubits,
                marked: cfg.marked.iter().map(|m| m.0).collect(),
                marked_bits: cfg.marked.iter().map(|m| m.to_bits(cfg.n_qubits)).collect(),
                iterations: cfg.iterations,
                renormalize: cfg.renormalize_between_iterations,
                trials: cfg.trials,
                frequency_hz: cfg.frequency,
                oracle: cfg.oracle,
                tolerance: cfg.tolerance,
            },
            optimal_iterations: OptimalEcho {
                exact: opt.exact,
                approx: opt.approx,
            },
            iterations,
            final_amplitudes,
            hardware_reference_note: HARDWARE_NOTE,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub const SWEEP_HEADER: &str = "iteration,nominal_asp,ideal_asp";

pub fn sweep_csv(r: &GroverReport) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (j, (nominal, ideal)) in r.nominal_asp.iter().zip(&r.ideal_asp).enumerate() {
        out.push_str(&format!("{},{nominal:?},{ideal:?}\n", j + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use phasorq::{run_grover, GroverConfig};

    #[test]
    fn hardware_annotations_only_for_matching_configs() {
        assert_eq!(hardware_asp(3, 1, 2), Some(0.990));
        assert_eq!(hardware_asp(3, 2, 2), Some(0.723));
        assert_eq!(hardware_asp(3, 1, 3), None);
        assert_eq!(hardware_asp(4, 1, 1), None);
    }

    #[test]
    fn csv_rows() {
        let r = run_grover(&GroverConfig::new(3, [5, 7], 2)).unwrap();
        let csv = sweep_csv(&r);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
    }
}
