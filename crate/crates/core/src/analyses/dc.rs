use super::{Signals, SweepSeries};
use crate::error::{Error, Result};
use crate::netlist::{Circuit, Directive, ElementKind};
use crate::solver::{Engine, Excitation, NewtonConfig, SourceOverrides};

/// A DC sweep definition. With two sources the drive is differential: the
/// first source is set to `+x/2` and the second to `-x/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcSweep {
    pub sources: Vec<String>,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DcSweep {
    pub fn differential(plus: &str, minus: &str, start: f64, stop: f64, step: f64) -> Self {
        DcSweep {
            sources: vec![plus.into(), minus.into()],
            start,
            stop,
            step,
        }
    }

    /// The first `.dc` card of a circuit, if any.
    pub fn from_circuit(circuit: &Circuit) -> Option<DcSweep> {
        circuit.directives().iter().find_map(|d| match d {
            Directive::Dc {
                sources,
                start,
                stop,
                step,
            } => Some(DcSweep {
                sources: sources.clone(),
                start: *start,
                stop: *stop,
                step: *step,
            }),
            _ => None,
        })
    }

    /// Source element indices with their coefficient on the sweep variable.
    pub fn drive(&self, circuit: &Circuit) -> Result<Vec<(usize, f64)>> {
        let coef: &[f64] = match self.sources.len() {
            1 => &[1.0],
            2 => &[0.5, -0.5],
            n => {
                return Err(Error::Circuit(format!(
                    "a DC sweep takes one or two sources, got {n}"
                )))
            }
        };
        self.sources
            .iter()
            .zip(coef)
            .map(|(name, c)| {
                let idx = circuit
                    .element_index(name)
                    .ok_or_else(|| Error::Circuit(format!("unknown sweep source '{name}'")))?;
                if !circuit.elements()[idx].is_source() {
                    return Err(Error::Circuit(format!("'{name}' is not an independent source")));
                }
                Ok((idx, *c))
            })
            .collect()
    }

    /// Sweep values in run order. The grid is `lo + k·step` from the lower
    /// end, so a reversed sweep visits exactly the same values.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Analysis("sweep step must be positive".into()));
        }
        if self.start == self.stop {
            return Err(Error::Analysis("sweep start equals stop".into()));
        }
        let (lo, hi) = (self.start.min(self.stop), self.start.max(self.stop));
        let n = ((hi - lo) / self.step * (1.0 + 1e-12)).floor() as usize;
        let snap = |v: f64| if v.abs() < 1e-9 * self.step { 0.0 } else { v };
        let mut v: Vec<f64> = (0..=n).map(|k| snap(lo + k as f64 * self.step)).collect();
        if self.start > self.stop {
            v.reverse();
        }
        Ok(v)
    }
}

/// Source overrides that put sweep value `x` on the drive.
pub(crate) fn drive_overrides(circuit: &Circuit, drive: &[(usize, f64)], x: f64) -> SourceOverrides {
    drive
        .iter()
        .map(|&(idx, c)| {
            let mut w = match &circuit.elements()[idx].kind {
                ElementKind::VoltageSource { waveform, .. } | ElementKind::CurrentSource { waveform, .. } => {
                    waveform.clone()
                }
                _ => unreachable!("drive elements are sources"),
            };
            w.dc = Some(c * x);
            (idx, w)
        })
        .collect::<SourceOverrides>()
}

/// One converged operating point per grid value, each warm-started from the
/// previous one. Points that fail to converge are flagged and do not move
/// the warm-start guess.
pub fn dc_sweep(circuit: &Circuit, sweep: &DcSweep, temperature: f64, config: &NewtonConfig) -> Result<SweepSeries> {
    let drive = sweep.drive(circuit)?;
    let grid = sweep.grid()?;
    let engine = Engine::new(circuit, temperature)?;
    let signals = Signals::new(circuit)?;
    let unit = match circuit.elements()[drive[0].0].kind {
        ElementKind::VoltageSource { .. } => "V",
        _ => "A",
    };
    let mut series = SweepSeries::new(&sweep.sources.join("-"), unit, signals.names());
    let mem = engine.initial_memristor_states();
    let mut guess = None;
    for x in grid {
        let overrides = drive_overrides(circuit, &drive, x);
        let exc = Excitation {
            overrides: Some(&overrides),
            ..Excitation::default()
        };
        match engine.solve(guess.as_ref(), &exc, &mem, None, config) {
            Ok((sol, _)) => {
                series.push(x, signals.sample(engine.layout(), &sol), true)?;
                guess = Some(sol);
            }
            Err(e) if e.is_numerical() => {
                let n = series.signals.len();
                series.push(x, vec![f64::NAN; n], false)?;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic() -> Circuit {
        // Differential current into a floating 10 kΩ, referenced by 1 MΩ legs.
        Circuit::from_source(
            "tz\nIP 0 p DC 0\nIN 0 n DC 0\nRT p n 10k\nRP p 0 1meg\nRN n 0 1meg\n.probe p n\n",
            "tz",
        )
        .unwrap()
    }

    #[test]
    fn ohmic_transimpedance() {
        let c = Circuit::from_source("r\nI1 0 a DC 0\nR1 a 0 10k\n.probe a\n", "r").unwrap();
        let s = dc_sweep(&c, &DcSweep { sources: vec!["I1".into()], start: -1e-4, stop: 1e-4, step: 2e-5 }, 27.0, &NewtonConfig::default()).unwrap();
        assert_eq!(s.len(), 11);
        for p in s.points() {
            if p.x != 0.0 {
                assert!((p.values[0] / p.x - 1e4).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn differential_drive_splits_current() {
        let s = dc_sweep(&ohmic(), &DcSweep::differential("IP", "IN", -2e-5, 2e-5, 1e-5), 27.0, &NewtonConfig::default()).unwrap();
        // ±x/2 drive: by symmetry p = −n, so x/2 = 2p/10k + p/1M.
        let r = 1.0 / (2.0 / 10e3 + 1.0 / 1e6);
        for p in s.points() {
            assert!((p.values[0] - r * p.x).abs() < 1e-12);
        }
    }

    #[test]
    fn reversed_sweep_reverses_order() {
        let c = ohmic();
        let cfg = NewtonConfig::default();
        let up = dc_sweep(&c, &DcSweep::differential("IP", "IN", -3e-5, 3e-5, 1e-5), 27.0, &cfg).unwrap();
        let down = dc_sweep(&c, &DcSweep::differential("IP", "IN", 3e-5, -3e-5, 1e-5), 27.0, &cfg).unwrap();
        let mut rev: Vec<_> = down.points().to_vec();
        rev.reverse();
        assert_eq!(up.points(), &rev[..]);
    }

    #[test]
    fn grid_includes_exact_zero() {
        let g = DcSweep::differential("a", "b", -3e-4, 3e-4, 5e-6).grid().unwrap();
        assert_eq!(g.len(), 121);
        assert!(g.contains(&0.0));
    }

    #[test]
    fn unknown_source_rejected() {
        let err = dc_sweep(&ohmic(), &DcSweep::differential("IP", "IX", -1.0, 1.0, 0.5), 27.0, &NewtonConfig::default());
        assert!(err.unwrap_err().to_string().contains("IX"));
    }
}
