use super::{ac_sweep, dc_sweep, AcSweep, DcSweep, SweepSeries};
use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::solver::NewtonConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum InnerAnalysis {
    Dc(DcSweep),
    Ac(AcSweep),
}

/// Result of the inner analysis at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureRun {
    pub temperature: f64,
    pub result: std::result::Result<SweepSeries, Error>,
}

/// Rerun `inner` at every temperature, in the order given. A failing
/// temperature is recorded in its run rather than aborting the family.
pub fn temperature_sweep(
    circuit: &Circuit,
    temperatures: &[f64],
    inner: &InnerAnalysis,
    config: &NewtonConfig,
) -> Result<Vec<TemperatureRun>> {
    if temperatures.is_empty() {
        return Err(Error::Analysis("temperature list is empty".into()));
    }
    Ok(temperatures
        .iter()
        .map(|&t| TemperatureRun {
            temperature: t,
            result: match inner {
                InnerAnalysis::Dc(s) => dc_sweep(circuit, s, t, config),
                InnerAnalysis::Ac(s) => ac_sweep(circuit, s, t, config),
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{mosfet_dc, MosfetParams, Polarity};

    #[test]
    fn single_temperature_matches_plain_run() {
        let c = Circuit::from_source("d\n.model N NMOS\nV1 vdd 0 1.8\nR1 vdd d 10k\nM1 d d 0 0 N W=20u L=1u\nI1 0 d 0\n.probe d\n", "d").unwrap();
        let sweep = DcSweep { sources: vec!["I1".into()], start: -1e-5, stop: 1e-5, step: 5e-6 };
        let cfg = NewtonConfig::default();
        let runs = temperature_sweep(&c, &[27.0], &InnerAnalysis::Dc(sweep.clone()), &cfg).unwrap();
        assert_eq!(runs[0].result.as_ref().unwrap(), &dc_sweep(&c, &sweep, 27.0, &cfg).unwrap());
    }

    #[test]
    fn resistors_have_no_temperature_coefficient() {
        let c = Circuit::from_source("r\nI1 0 a DC 0\nR1 a 0 10k\n.probe a\n", "r").unwrap();
        let sweep = DcSweep { sources: vec!["I1".into()], start: -1e-5, stop: 1e-5, step: 1e-5 };
        let runs = temperature_sweep(&c, &[0.0, 27.0, 70.0], &InnerAnalysis::Dc(sweep), &NewtonConfig::default()).unwrap();
        let first = runs[0].result.as_ref().unwrap().column(0);
        for r in &runs {
            assert_eq!(r.result.as_ref().unwrap().column(0), first);
        }
    }

    #[test]
    fn saturation_current_falls_with_temperature() {
        let p = MosfetParams {
            tcv: 0.0,
            ..MosfetParams::default_card(Polarity::Nmos).with_geometry(20e-6, 1e-6)
        };
        assert!(mosfet_dc(&p, 1.0, 1.0, 100.0).id < mosfet_dc(&p, 1.0, 1.0, 0.0).id);
    }

    #[test]
    fn failures_are_recorded_per_temperature() {
        let c = Circuit::from_source("r\nI1 0 a DC 0\nR1 a 0 10k\n", "r").unwrap();
        let sweep = DcSweep { sources: vec!["I1".into()], start: -1e-5, stop: 1e-5, step: 1e-5 };
        let runs = temperature_sweep(&c, &[27.0, 500.0], &InnerAnalysis::Dc(sweep.clone()), &NewtonConfig::default()).unwrap();
        assert!(runs[0].result.is_ok() && runs[1].result.is_err());
        assert!(temperature_sweep(&c, &[], &InnerAnalysis::Dc(sweep), &NewtonConfig::default()).is_err());
    }
}
