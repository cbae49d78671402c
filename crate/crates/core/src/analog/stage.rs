//! Idealized analog building blocks and their phasor responses.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One lumped analog stage. Op-amps are ideal; only the passive values vary.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    /// Output `r2 / (r1 + r2)` of the input.
    VoltageDivider { r1: f64, r2: f64 },
    /// Ideal inverting amplifier, gain `-r_f / r_in`.
    InvertingAmp { r_in: f64, r_f: f64 },
    /// Weighted sum of `weights.len()` inputs. Signs are bookkeeping; the
    /// physical inversion of an op-amp summer is folded into the weights.
    Summer { weights: Vec<f64> },
    /// First-order op-amp all-pass section.
    RcPhaseShifter { r: f64, c: f64, swapped: bool },
    /// Input port `i` is wired to output port `map[i]`.
    WirePermutation { map: Vec<usize> },
}

/// Normalized all-pass response at `x = 2πfRC`.
///
/// The standard section gives `(jx - 1)/(1 + jx)` with phase `π - 2·atan(x)`;
/// with R and C exchanged it gives `(1 - jx)/(1 + jx)` with phase `-2·atan(x)`.
pub fn all_pass_response(x: f64, swapped: bool) -> Complex64 {
    let num = if swapped {
        Complex64::new(1.0, -x)
    } else {
        Complex64::new(-1.0, x)
    };
    num / Complex64::new(1.0, x)
}

impl Stage {
    /// Divider with `r2 = base` and `r1` chosen for the requested ratio in (0, 1).
    pub fn divider_for_ratio(ratio: f64, base: f64) -> Result<Stage> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::input(format!("divider ratio {ratio} not in (0, 1)")));
        }
        Ok(Stage::VoltageDivider {
            r1: base * (1.0 - ratio) / ratio,
            r2: base,
        })
    }

    /// Inverting amplifier of gain `-magnitude` with `r_in = base`.
    pub fn amp_for_gain(magnitude: f64, base: f64) -> Result<Stage> {
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(Error::input(format!(
                "amplifier gain magnitude {magnitude} must be > 0"
            )));
        }
        Ok(Stage::InvertingAmp {
            r_in: base,
            r_f: base * magnitude,
        })
    }

    /// Synthesizes an all-pass stage with phase `phi` at `freq`, holding C fixed.
    ///
    /// `phi` in (0, π) uses the standard section, `phi` in (π, 2π) the
    /// swapped one. Exactly 0 and π are not reachable with finite positive R.
    pub fn phase_shifter_for(phi: f64, freq: f64, c: f64) -> Result<Stage> {
        let w = TAU * freq * c;
        if phi > 0.0 && phi < PI {
            let x = ((PI - phi) / 2.0).tan();
            Ok(Stage::RcPhaseShifter {
                r: x / w,
                c,
                swapped: false,
            })
        } else if phi > PI && phi < TAU {
            let x = (PI - phi / 2.0).tan();
            Ok(Stage::RcPhaseShifter {
                r: x / w,
                c,
                swapped: true,
            })
        } else {
            Err(Error::input(format!(
                "phase {phi} not synthesizable by one RC section"
            )))
        }
    }

    pub fn input_count(&self) -> usize {
        match self {
            Stage::Summer { weights } => weights.len(),
            Stage::WirePermutation { map } => map.len(),
            _ => 1,
        }
    }

    pub fn output_count(&self) -> usize {
        match self {
            Stage::WirePermutation { map } => map.len(),
            _ => 1,
        }
    }

    /// Everything except plain wiring.
    pub fn is_active(&self) -> bool {
        !matches!(self, Stage::WirePermutation { .. })
    }

    /// Short lowercase tag used for netlist labels.
    pub fn tag(&self) -> &'static str {
        match self {
            Stage::VoltageDivider { .. } => "div",
            Stage::InvertingAmp { .. } => "amp",
            Stage::Summer { .. } => "sum",
            Stage::RcPhaseShifter { .. } => "rc",
            Stage::WirePermutation { .. } => "perm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::structural(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        match self {
            Stage::VoltageDivider { r1, r2 } => {
                positive("r1", *r1)?;
                positive("r2", *r2)
            }
            Stage::InvertingAmp { r_in, r_f } => {
                positive("r_in", *r_in)?;
                positive("r_f", *r_f)
            }
            Stage::Summer { weights } => {
                if weights.is_empty() {
                    return Err(Error::structural("summer needs at least one input"));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::structural("summer weight not finite"));
                }
                Ok(())
            }
            Stage::RcPhaseShifter { r, c, .. } => {
                positive("r", *r)?;
                positive("c", *c)
            }
            Stage::WirePermutation { map } => {
                if map.is_empty() {
                    return Err(Error::structural("empty permutation"));
                }
                let mut seen = vec![false; map.len()];
                for &j in map {
                    if j >= map.len() || std::mem::replace(&mut seen[j], true) {
                        return Err(Error::structural(format!(
                            "permutation {map:?} is not a bijection"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Gain of a single-input single-output stage at `freq`.
    pub fn gain(&self, freq: f64) -> Option<Complex64> {
        match self {
            Stage::VoltageDivider { r1, r2 } => Some(Complex64::new(r2 / (r1 + r2), 0.0)),
            Stage::InvertingAmp { r_in, r_f } => Some(Complex64::new(-r_f / r_in, 0.0)),
            Stage::RcPhaseShifter { r, c, swapped } => {
                Some(all_pass_response(TAU * freq * r * c, *swapped))
            }
            Stage::Summer { .. } | Stage::WirePermutation { .. } => None,
        }
    }

    /// Per-input complex gain: one entry for two-terminal stages, the weight
    /// row for a summer, and unit gains for a permutation.
    pub fn response(&self, freq: f64) -> Vec<Complex64> {
        match self {
            Stage::Summer { weights } => weights.iter().map(|&w| Complex64::new(w, 0.0)).collect(),
            Stage::WirePermutation { map } => vec![Complex64::new(1.0, 0.0); map.len()],
            other => vec![other.gain(freq).expect("two-terminal stage")],
        }
    }

    /// Writes the stage outputs for the given inputs.
    pub(crate) fn propagate(&self, inputs: &[Complex64], freq: f64, out: &mut [Complex64]) {
        match self {
            Stage::Summer { weights } => {
                out[0] = weights.iter().zip(inputs).map(|(w, x)| x * *w).sum();
            }
            Stage::WirePermutation { map } => {
                for (i, &j) in map.iter().enumerate() {
                    out[j] = inputs[i];
                }
            }
            other => out[0] = inputs[0] * other.gain(freq).expect("two-terminal stage"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn divider_quarter() {
        let s = Stage::VoltageDivider { r1: 30e3, r2: 10e3 };
        assert_abs_diff_eq!(s.gain(1e3).unwrap().re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn amp_gain_minus_three() {
        let s = Stage::InvertingAmp {
            r_in: 10e3,
            r_f: 30e3,
        };
        assert_eq!(s.gain(1e3).unwrap(), Complex64::new(-3.0, 0.0));
    }

    #[test]
    fn rc_at_unit_x_is_quarter_turn() {
        let f = 1e3;
        let c = 100e-9;
        let r = 1.0 / (TAU * f * c);
        let g = Stage::RcPhaseShifter {
            r,
            c,
            swapped: false,
        }
        .gain(f)
        .unwrap();
        assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.arg(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn synthesized_quarter_turn_resistor() {
        let Stage::RcPhaseShifter { r, swapped, .. } =
            Stage::phase_shifter_for(PI / 2.0, 1e3, 100e-9).unwrap()
        else {
            panic!("expected RC stage");
        };
        assert!(!swapped);
        assert_abs_diff_eq!(r, 1591.5494309189535, epsilon = 1e-6);
    }

    #[test]
    fn swapped_synthesis_covers_upper_half() {
        for phi in [3.5, 4.0, 5.0, 6.0] {
            let s = Stage::phase_shifter_for(phi, 1e3, 100e-9).unwrap();
            let g = s.gain(1e3).unwrap();
            assert_abs_diff_eq!(g.arg().rem_euclid(TAU), phi, epsilon = 1e-12);
        }
        assert!(Stage::phase_shifter_for(PI, 1e3, 1e-7).is_err());
        assert!(Stage::phase_shifter_for(0.0, 1e3, 1e-7).is_err());
    }

    #[test]
    fn bad_components_rejected() {
        assert!(Stage::VoltageDivider { r1: 0.0, r2: 1.0 }
            .validate()
            .is_err());
        assert!(Stage::RcPhaseShifter {
            r: 1.0,
            c: -1.0,
            swapped: false
        }
        .validate()
        .is_err());
        assert!(Stage::WirePermutation { map: vec![0, 0] }
            .validate()
            .is_err());
        assert!(Stage::WirePermutation { map: vec![1, 0] }
            .validate()
            .is_ok());
        assert!(Stage::Summer { weights: vec![] }.validate().is_err());
    }

    #[test]
    fn permutation_moves_values() {
        let s = Stage::WirePermutation { map: vec![2, 0, 1] };
        let input = [1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0));
        let mut out = [Complex64::new(0.0, 0.0); 3];
        s.propagate(&input, 1.0, &mut out);
        assert_eq!(out.map(|z| z.re), [2.0, 3.0, 1.0]);
    }

    #[test]
    fn divider_for_ratio_round_trips() {
        let s = Stage::divider_for_ratio(0.25, 10e3).unwrap();
        assert_eq!(s, Stage::VoltageDivider { r1: 30e3, r2: 10e3 });
        assert!(Stage::divider_for_ratio(1.0, 10e3).is_err());
    }
}
