//! Monte Carlo resampling of passive component values.
//!
//! Each resistor or capacitor draws from its own ChaCha stream keyed by
//! `(seed, trial, component ordinal, tag)`, so a trial's network does not
//! depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::network::StageNetwork;
use super::stage::Stage;
use crate::error::{Error, Result};

pub const MAX_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToleranceDistribution {
    /// Uniform over `nominal · (1 ± tol)`.
    #[default]
    Uniform,
    /// Gaussian with `σ = tol / 3`, redrawn outside ±3σ.
    #[serde(alias = "gaussian")]
    GaussianTruncated,
}

impl std::str::FromStr for ToleranceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "gaussian" | "gaussian-truncated" => Ok(Self::GaussianTruncated),
            other => Err(Error::input(format!("unknown distribution {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    /// Relative resistor tolerance, e.g. 0.01 for 1%.
    pub resistor_tol: f64,
    pub capacitor_tol: f64,
    pub distribution: ToleranceDistribution,
    pub seed: u64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            resistor_tol: 0.01,
            capacitor_tol: 0.01,
            distribution: ToleranceDistribution::Uniform,
            seed: 0,
        }
    }
}

impl ToleranceSpec {
    pub fn new(
        resistor_tol: f64,
        capacitor_tol: f64,
        distribution: ToleranceDistribution,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            resistor_tol,
            capacitor_tol,
            distribution,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same relative tolerance for every component, uniform distribution.
    pub fn uniform(tol: f64, seed: u64) -> Result<Self> {
        Self::new(tol, tol, ToleranceDistribution::Uniform, seed)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("resistor", self.resistor_tol),
            ("capacitor", self.capacitor_tol),
        ] {
            if !(0.0..=MAX_TOLERANCE).contains(&t) {
                return Err(Error::input(format!(
                    "{name} tolerance {t} outside [0, {MAX_TOLERANCE}]"
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.resistor_tol == 0.0 && self.capacitor_tol == 0.0
    }
}

struct Sampler<'a> {
    spec: &'a ToleranceSpec,
    trial: u64,
    tag: u64,
    ordinal: u64,
}

impl Sampler<'_> {
    fn factor(&mut self, tol: f64) -> f64 {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.spec.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trial.to_le_bytes());
        key[16..24].copy_from_slice(&self.ordinal.to_le_bytes());
        key[24..].copy_from_slice(&self.tag.to_le_bytes());
        self.ordinal += 1;
        let mut rng = ChaCha8Rng::from_seed(key);
        let unit = match self.spec.distribution {
            ToleranceDistribution::Uniform => rng.random_range(-1.0..=1.0),
            ToleranceDistribution::GaussianTruncated => loop {
                let z: f64 = rng.sample(StandardNormal);
                if z.abs() <= 3.0 {
                    break z / 3.0;
                }
            },
        };
        1.0 + tol * unit
    }

    fn resistor(&mut self, r: f64) -> f64 {
        r * self.factor(self.spec.resistor_tol)
    }

    fn capacitor(&mut self, c: f64) -> f64 {
        c * self.factor(self.spec.capacitor_tol)
    }
}

/// Resamples every passive value of `net` for one Monte Carlo trial.
///
/// Summer weights are treated as `r_f / r_i` ratios: the shared feedback
/// resistor and each input resistor are drawn separately. Permutations are
/// untouched.
pub fn perturb(net: &StageNetwork, tol: &ToleranceSpec, trial: u64) -> StageNetwork {
    perturb_tagged(net, tol, trial, 0)
}

/// [`perturb`] with an extra stream tag so several networks used together in
/// one trial draw independent values.
pub fn perturb_tagged(
    net: &StageNetwork,
    tol: &ToleranceSpec,
    trial: u64,
    tag: u64,
) -> StageNetwork {
    let mut s = Sampler {
        spec: tol,
        trial,
        tag,
        ordinal: 0,
    };
    net.map_stages(|_, stage| match stage {
        Stage::VoltageDivider { r1, r2 } => Stage::VoltageDivider {
            r1: s.resistor(*r1),
            r2: s.resistor(*r2),
        },
        Stage::InvertingAmp { r_in, r_f } => Stage::InvertingAmp {
            r_in: s.resistor(*r_in),
            r_f: s.resistor(*r_f),
        },
        Stage::Summer { weights } => {
            let feedback = s.factor(tol.resistor_tol);
            Stage::Summer {
                weights: weights
                    .iter()
                    .map(|w| w * feedback / s.factor(tol.resistor_tol))
                    .collect(),
            }
        }
        Stage::RcPhaseShifter { r, c, swapped } => Stage::RcPhaseShifter {
            r: s.resistor(*r),
            c: s.capacitor(*c),
            swapped: *swapped,
        },
        Stage::WirePermutation { map } => Stage::WirePermutation { map: map.clone() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::network::{NetworkBuilder, Source};

    fn divider_net() -> StageNetwork {
        let mut b = NetworkBuilder::new(2, 1e3);
        let d = b.add(Stage::VoltageDivider { r1: 30e3, r2: 10e3 });
        let rc = b.add(Stage::RcPhaseShifter {
            r: 1e3,
            c: 1e-7,
            swapped: false,
        });
        b.connect(Source::Line(0), d, 0)
            .connect(Source::Line(1), rc, 0);
        b.output(0, Source::port(d, 0))
            .output(1, Source::port(rc, 0));
        b.build().unwrap()
    }

    #[test]
    fn zero_tolerance_is_identity() {
        let net = divider_net();
        let spec = ToleranceSpec::uniform(0.0, 7).unwrap();
        assert_eq!(perturb(&net, &spec, 3), net);
    }

    #[test]
    fn same_trial_same_values() {
        let net = divider_net();
        let spec = ToleranceSpec::uniform(0.05, 11).unwrap();
        assert_eq!(perturb(&net, &spec, 4), perturb(&net, &spec, 4));
        assert_ne!(perturb(&net, &spec, 4), perturb(&net, &spec, 5));
        assert_ne!(
            perturb_tagged(&net, &spec, 4, 1),
            perturb_tagged(&net, &spec, 4, 2)
        );
    }

    #[test]
    fn one_percent_divider_stays_in_interval() {
        // r2/(r1+r2) is increasing in r2 and decreasing in r1, so the extremes
        // sit at opposite corners of the tolerance box.
        let lo: f64 = 10e3 * 0.99 / (10e3 * 0.99 + 30e3 * 1.01);
        let hi: f64 = 10e3 * 1.01 / (10e3 * 1.01 + 30e3 * 0.99);
        // Frozen from an independent evaluation of the corner formulas.
        assert!((lo - 0.2462686567).abs() < 1e-10 && (hi - 0.2537688442).abs() < 1e-10);
        let net = divider_net();
        let spec = ToleranceSpec::uniform(0.01, 99).unwrap();
        let (mut min, mut max) = (f64::MAX, f64::MIN);
        for trial in 0..2000 {
            let p = perturb(&net, &spec, trial);
            let g = p.stages()[0].gain(1e3).unwrap().re;
            assert!((lo..=hi).contains(&g), "trial {trial}: {g}");
            min = min.min(g);
            max = max.max(g);
        }
        assert!(max - min > 0.5 * (hi - lo));
    }

    #[test]
    fn truncated_gaussian_within_three_sigma() {
        let net = divider_net();
        let spec =
            ToleranceSpec::new(0.03, 0.03, ToleranceDistribution::GaussianTruncated, 5).unwrap();
        for trial in 0..500 {
            if let Stage::VoltageDivider { r1, r2 } = perturb(&net, &spec, trial).stages()[0] {
                assert!((r1 / 30e3 - 1.0).abs() <= 0.03 + 1e-15);
                assert!((r2 / 10e3 - 1.0).abs() <= 0.03 + 1e-15);
            }
        }
    }

    #[test]
    fn all_pass_magnitude_survives_perturbation() {
        let net = divider_net();
        let spec = ToleranceSpec::uniform(0.2, 1).unwrap();
        for trial in 0..100 {
            let g = perturb(&net, &spec, trial).stages()[1].gain(1e3).unwrap();
            assert!((g.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tolerance_range_validated() {
        assert!(ToleranceSpec::uniform(0.25, 0).is_err());
        assert!(ToleranceSpec::uniform(-0.01, 0).is_err());
        assert!(ToleranceSpec::uniform(0.2, 0).is_ok());
        assert_eq!(
            "gaussian".parse::<ToleranceDistribution>().unwrap(),
            ToleranceDistribution::GaussianTruncated
        );
    }
}
