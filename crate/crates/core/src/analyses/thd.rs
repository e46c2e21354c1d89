use std::f64::consts::PI;

use super::dc::drive_overrides;
use super::tran::{transient_with, InitialCondition, Integrator, TransientConfig};
use crate::devices::Sine;
use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::solver::NewtonConfig;

const MIN_PERIODS: usize = 4;
const SAMPLES_PER_HARMONIC: usize = 32;

/// Total harmonic distortion of a uniformly sampled waveform.
///
/// The first quarter of the record is discarded as settling. Fourier
/// coefficients of harmonics `1..=n` are then computed by direct
/// correlation over the largest whole number of periods that remains.
pub fn thd(samples: &[f64], dt: f64, fundamental: f64, harmonics: usize) -> Result<f64> {
    if harmonics < 2 {
        return Err(Error::Analysis("THD needs at least two harmonics".into()));
    }
    if !(dt > 0.0) || !(fundamental > 0.0) {
        return Err(Error::Analysis("THD needs positive sample spacing and frequency".into()));
    }
    let spp_f = 1.0 / (fundamental * dt);
    let spp = spp_f.round() as usize;
    if (spp_f - spp as f64).abs() > 1e-6 * spp_f {
        return Err(Error::Analysis(format!(
            "{spp_f:.6} samples per period is not an integer"
        )));
    }
    if spp < SAMPLES_PER_HARMONIC * harmonics {
        return Err(Error::Analysis(format!(
            "{spp} samples per period; at least {} required for {harmonics} harmonics",
            SAMPLES_PER_HARMONIC * harmonics
        )));
    }
    let tail = &samples[samples.len() / 4..];
    let periods = tail.len() / spp;
    if periods < MIN_PERIODS {
        return Err(Error::Analysis(format!(
            "only {periods} whole periods after settling; need {MIN_PERIODS}"
        )));
    }
    let window = &tail[tail.len() - periods * spp..];
    let n = window.len() as f64;
    let coefficient = |k: usize| {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, s) in window.iter().enumerate() {
            let phase = 2.0 * PI * (k * (j % spp)) as f64 / spp as f64;
            re += s * phase.cos();
            im -= s * phase.sin();
        }
        2.0 * (re * re + im * im).sqrt() / n
    };
    let c1 = coefficient(1);
    if c1 == 0.0 || c1 < 1e-15 * window.iter().fold(0.0_f64, |m, s| m.max(s.abs())) {
        return Err(Error::Analysis("fundamental component is zero".into()));
    }
    let distortion: f64 = (2..=harmonics).map(|k| coefficient(k).powi(2)).sum();
    Ok(distortion.sqrt() / c1)
}

/// Sinusoidal drive for a THD run: `sources` are the element names and the
/// amplitude coefficients (see [`super::DcSweep`] for the differential split).
#[derive(Debug, Clone, PartialEq)]
pub struct ThdDrive {
    pub sources: Vec<String>,
    pub fundamental: f64,
    pub harmonics: usize,
    pub periods: usize,
    pub samples_per_period: usize,
}

impl ThdDrive {
    pub fn differential(plus: &str, minus: &str, fundamental: f64, harmonics: usize) -> Self {
        ThdDrive {
            sources: vec![plus.into(), minus.into()],
            fundamental,
            harmonics,
            periods: 8,
            samples_per_period: 320.max(SAMPLES_PER_HARMONIC * harmonics),
        }
    }
}

/// THD of the probe output for each drive amplitude, via a transient run
/// from the operating point.
pub fn thd_sweep(
    circuit: &Circuit,
    drive: &ThdDrive,
    amplitudes: &[f64],
    temperature: f64,
    newton: &NewtonConfig,
) -> Result<Vec<(f64, f64)>> {
    let sweep = super::DcSweep {
        sources: drive.sources.clone(),
        start: 0.0,
        stop: 1.0,
        step: 1.0,
    };
    let coefs = sweep.drive(circuit)?;
    let period = 1.0 / drive.fundamental;
    let step = period / drive.samples_per_period as f64;
    let config = TransientConfig {
        step,
        stop: period * drive.periods as f64,
        method: Integrator::Trapezoidal,
        initial: InitialCondition::OperatingPoint,
    };
    amplitudes
        .iter()
        .map(|&a| {
            let mut overrides = drive_overrides(circuit, &coefs, 0.0);
            for &(idx, c) in &coefs {
                let w = overrides.get_mut(&idx).expect("override per drive source");
                w.sin = Some(Sine {
                    offset: w.dc_value(),
                    amplitude: c * a,
                    frequency: drive.fundamental,
                });
            }
            let series = transient_with(circuit, &config, temperature, newton, Some(&overrides))?;
            let out = series.column(0);
            Ok((a, thd(&out, step, drive.fundamental, drive.harmonics)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64, periods: usize, spp: usize) -> Vec<f64> {
        (0..periods * spp).map(|j| f(j as f64 / spp as f64)).collect()
    }

    #[test]
    fn sine_plus_second_harmonic() {
        let s = sampled(|t| (2.0 * PI * t).sin() + 0.1 * (4.0 * PI * t + 0.3).sin(), 8, 320);
        assert!((thd(&s, 1.0 / 320.0, 1.0, 9).unwrap() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn pure_sine() {
        let s = sampled(|t| (2.0 * PI * t).sin(), 8, 320);
        assert!(thd(&s, 1.0 / 320.0, 1.0, 9).unwrap() <= 1e-9);
    }

    #[test]
    fn square_wave_partial_sum() {
        let spp = 320;
        let s = sampled(|t| if (t.fract() * spp as f64).round() < (spp / 2) as f64 { 1.0 } else { -1.0 }, 8, spp);
        let expect = (1.0 / 9.0 + 1.0 / 25.0 + 1.0f64 / 49.0 + 1.0 / 81.0).sqrt();
        let got = thd(&s, 1.0 / spp as f64, 1.0, 9).unwrap();
        assert!((got / expect - 1.0).abs() < 5e-3, "{got}");
    }

    #[test]
    fn too_few_periods() {
        let s = sampled(|t| (2.0 * PI * t).sin(), 4, 320);
        assert!(thd(&s, 1.0 / 320.0, 1.0, 9).is_err());
    }

    #[test]
    fn undersampled() {
        let s = sampled(|t| (2.0 * PI * t).sin(), 8, 100);
        assert!(thd(&s, 1.0 / 100.0, 1.0, 9).is_err());
    }

    #[test]
    fn zero_fundamental() {
        assert!(thd(&[0.0; 4000], 1.0 / 320.0, 1.0, 9).is_err());
    }
}
