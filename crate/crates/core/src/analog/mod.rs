//! Phasor-domain model of op-amp stage networks.

pub mod netlist;
pub mod network;
pub mod stage;
pub mod tolerance;

pub use network::{NetworkBuilder, Source, StageId, StageNetwork};
pub use stage::{all_pass_response, Stage};
pub use tolerance::{perturb, perturb_tagged, ToleranceDistribution, ToleranceSpec};

use num_complex::Complex64;

/// Per-input gain of a single stage; see [`Stage::response`].
pub fn stage_response(stage: &Stage, freq: f64) -> Vec<Complex64> {
    stage.response(freq)
}
