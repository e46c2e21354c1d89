use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Signals, SweepSeries};
use crate::error::{Error, Result};
use crate::netlist::{Circuit, Directive, ElementKind, NodeId};
use crate::solver::{solve_linear, Engine, Excitation, MnaSystem, NewtonConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcSweep {
    pub points_per_decade: usize,
    pub f_start: f64,
    pub f_stop: f64,
}

impl AcSweep {
    pub fn from_circuit(circuit: &Circuit) -> Option<AcSweep> {
        circuit.directives().iter().find_map(|d| match d {
            Directive::Ac {
                points_per_decade,
                f_start,
                f_stop,
            } => Some(AcSweep {
                points_per_decade: *points_per_decade,
                f_start: *f_start,
                f_stop: *f_stop,
            }),
            _ => None,
        })
    }
}

/// `f_start·10^(k/ppd)` for every `k` that stays at or below `f_stop`.
pub fn ac_frequencies(sweep: &AcSweep) -> Result<Vec<f64>> {
    let AcSweep {
        points_per_decade: ppd,
        f_start,
        f_stop,
    } = *sweep;
    if ppd == 0 || !(f_start > 0.0) || !(f_stop > f_start) || !f_stop.is_finite() {
        return Err(Error::Analysis(
            "AC sweep needs ppd > 0 and 0 < f_start < f_stop".into(),
        ));
    }
    let limit = f_stop * (1.0 + 1e-12);
    let mut out = Vec::new();
    for k in 0.. {
        let f = f_start * 10f64.powf(k as f64 / ppd as f64);
        if f > limit {
            break;
        }
        out.push(f);
    }
    Ok(out)
}

/// Small-signal sweep about the DC operating point. The stimulus is every
/// source's `AC` magnitude; the output is the probe (or first node)
/// voltage, reported as magnitude and phase in degrees.
pub fn ac_sweep(circuit: &Circuit, sweep: &AcSweep, temperature: f64, config: &NewtonConfig) -> Result<SweepSeries> {
    let freqs = ac_frequencies(sweep)?;
    let signals = Signals::new(circuit)?;
    let (pos, neg) = signals
        .output()
        .ok_or_else(|| Error::Analysis("circuit has no nodes".into()))?;
    let engine = Engine::new(circuit, temperature)?;
    let mem = engine.initial_memristor_states();
    let (op, _) = engine.solve(None, &Excitation::default(), &mem, None, config)?;
    let (g, c) = engine.small_signal(&op, &mem, config.gmin)?;
    let layout = engine.layout().clone();

    let mut rhs_system = MnaSystem::<Complex64>::new(layout.clone());
    let mut driven = false;
    for (idx, e) in circuit.elements().iter().enumerate() {
        let (pos, neg, mag, is_v) = match &e.kind {
            ElementKind::VoltageSource { pos, neg, waveform } => (*pos, *neg, waveform.ac, true),
            ElementKind::CurrentSource { pos, neg, waveform } => (*pos, *neg, waveform.ac, false),
            _ => continue,
        };
        let Some(mag) = mag else { continue };
        driven = true;
        let m = Complex64::new(mag, 0.0);
        if is_v {
            rhs_system.add_rhs(layout.branch(idx), m);
        } else {
            rhs_system.current(pos, neg, m);
        }
    }
    if !driven {
        return Err(Error::Analysis("no source carries an AC magnitude".into()));
    }

    let label = circuit
        .probe()
        .map(|p| p.label())
        .unwrap_or_else(|| format!("v({})", circuit.node_name(pos)));
    let mut series = SweepSeries::new(
        "frequency",
        "Hz",
        vec![format!("mag({label})"), format!("phase_deg({label})")],
    );
    let at = |x: &nalgebra::DVector<Complex64>, n: NodeId| layout.row(n).map_or(Complex64::new(0.0, 0.0), |r| x[r]);
    for f in freqs {
        let omega = 2.0 * PI * f;
        let mut sys = rhs_system.clone();
        sys.matrix = g.map(|v| Complex64::new(v, 0.0)) + c.map(|v| Complex64::new(0.0, omega * v));
        let x = solve_linear(&sys)?;
        let out = at(&x, pos) - at(&x, neg);
        series.push(f, vec![out.norm(), out.arg().to_degrees()], true)?;
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rc() -> Circuit {
        Circuit::from_source("rc\nV1 in 0 DC 0 AC 1\nR1 in out 1k\nC1 out 0 1p\n.probe out\n", "rc").unwrap()
    }

    #[test]
    fn rc_corner() {
        let fc = 1.0 / (2.0 * PI * 1e3 * 1e-12);
        let s = ac_sweep(&rc(), &AcSweep { points_per_decade: 1, f_start: fc, f_stop: fc * 10.0 }, 27.0, &NewtonConfig::default()).unwrap();
        let p = &s.points()[0];
        assert!((p.values[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((p.values[1] + 45.0).abs() < 1e-6);
    }

    #[test]
    fn resistive_network_is_flat() {
        let c = Circuit::from_source("r\nI1 0 a DC 0 AC 1\nR1 a 0 2k\n.probe a\n", "r").unwrap();
        let s = ac_sweep(&c, &AcSweep { points_per_decade: 5, f_start: 1.0, f_stop: 1e9 }, 27.0, &NewtonConfig::default()).unwrap();
        let mags = s.column(0);
        assert!((mags[0] / 2e3 - 1.0).abs() < 1e-12);
        assert!(mags.iter().all(|&m| m == mags[0]));
    }

    #[test]
    fn denser_grid_reproduces_shared_points() {
        let cfg = NewtonConfig::default();
        let a = ac_sweep(&rc(), &AcSweep { points_per_decade: 10, f_start: 1e6, f_stop: 1e10 }, 27.0, &cfg).unwrap();
        let b = ac_sweep(&rc(), &AcSweep { points_per_decade: 20, f_start: 1e6, f_stop: 1e10 }, 27.0, &cfg).unwrap();
        for (k, p) in a.points().iter().enumerate() {
            let q = &b.points()[2 * k];
            assert!((p.x / q.x - 1.0).abs() < 1e-14);
            assert!((p.values[0] / q.values[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frequency_grid() {
        let f = ac_frequencies(&AcSweep { points_per_decade: 10, f_start: 1e3, f_stop: 1e6 }).unwrap();
        assert_eq!(f.len(), 31);
        assert!((f[30] / 1e6 - 1.0).abs() < 1e-12);
        assert!(ac_frequencies(&AcSweep { points_per_decade: 0, f_start: 1.0, f_stop: 2.0 }).is_err());
    }

    #[test]
    fn needs_ac_stimulus() {
        let c = Circuit::from_source("r\nV1 a 0 1\nR1 a 0 1k\n", "r").unwrap();
        let err = ac_sweep(&c, &AcSweep { points_per_decade: 1, f_start: 1.0, f_stop: 10.0 }, 27.0, &NewtonConfig::default());
        assert!(err.is_err());
    }
}
