use nalgebra::DVector;

use super::{memristors, Signals, SweepSeries};
use crate::devices::{memristance, memristor_state_rate};
use crate::error::{Error, Result};
use crate::netlist::{Circuit, Directive, ElementKind};
use crate::solver::{voltage, Companion, Engine, Excitation, NewtonConfig, SourceOverrides};

/// Maximum number of step halvings before a timestep is declared failed.
const MAX_HALVINGS: u32 = 8;
const STATE_ITERATIONS: usize = 50;
const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Trapezoidal,
    BackwardEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// Start from the DC solution with sources evaluated at t = 0.
    OperatingPoint,
    /// Every unknown and capacitor voltage is zero at t = 0; sources act
    /// from the first step on.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientConfig {
    pub step: f64,
    pub stop: f64,
    pub method: Integrator,
    pub initial: InitialCondition,
}

impl TransientConfig {
    pub fn new(step: f64, stop: f64) -> Self {
        TransientConfig {
            step,
            stop,
            method: Integrator::Trapezoidal,
            initial: InitialCondition::OperatingPoint,
        }
    }

    pub fn from_circuit(circuit: &Circuit) -> Option<TransientConfig> {
        circuit.directives().iter().find_map(|d| match d {
            Directive::Tran { step, stop } => Some(TransientConfig::new(*step, *stop)),
            _ => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.stop.is_finite() && self.step <= self.stop / 10.0 * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::Analysis(format!(
                "transient step {} must satisfy 0 < step <= stop/10 (stop {})",
                self.step, self.stop
            )))
        }
    }
}

/// State carried between timesteps.
#[derive(Clone)]
struct Snapshot {
    x: DVector<f64>,
    mem: Vec<f64>,
    cap_v: Vec<f64>,
    cap_i: Vec<f64>,
    /// Use backward Euler for the next step regardless of the method.
    euler_next: bool,
}

struct Stepper<'a, 'c> {
    engine: &'a Engine<'c>,
    config: &'a NewtonConfig,
    method: Integrator,
    overrides: Option<&'a SourceOverrides>,
    memristors: Vec<usize>,
}

impl Stepper<'_, '_> {
    fn cap_voltages(&self, x: &DVector<f64>) -> Vec<f64> {
        let layout = self.engine.layout();
        self.engine
            .cap_branches()
            .iter()
            .map(|c| voltage(x, layout, c.a) - voltage(x, layout, c.b))
            .collect()
    }

    fn memristor_current(&self, x: &DVector<f64>, idx: usize, state: f64) -> f64 {
        let layout = self.engine.layout();
        match &self.engine.circuit().elements()[idx].kind {
            ElementKind::Memristor { pos, neg, params } => {
                (voltage(x, layout, *pos) - voltage(x, layout, *neg)) / memristance(params, state)
            }
            _ => unreachable!("memristor index"),
        }
    }

    /// One step of size `h` ending at `t`.
    fn step(&self, prev: &Snapshot, t: f64, h: f64) -> Result<Snapshot> {
        let euler = prev.euler_next || self.method == Integrator::BackwardEuler;
        let caps = self.engine.cap_branches();
        let mut comp = Companion {
            geq: Vec::with_capacity(caps.len()),
            ieq: Vec::with_capacity(caps.len()),
        };
        for (k, c) in caps.iter().enumerate() {
            if euler {
                let g = c.capacitance / h;
                comp.geq.push(g);
                comp.ieq.push(-g * prev.cap_v[k]);
            } else {
                let g = 2.0 * c.capacitance / h;
                comp.geq.push(g);
                comp.ieq.push(-g * prev.cap_v[k] - prev.cap_i[k]);
            }
        }
        let exc = Excitation {
            time: Some(t),
            scale: 1.0,
            overrides: self.overrides,
        };
        let circuit = self.engine.circuit();
        let mut mem = prev.mem.clone();
        let mut x = prev.x.clone();
        for iter in 0.. {
            let (sol, _) = self
                .engine
                .solve(Some(&x), &exc, &mem, Some(&comp), self.config)?;
            x = sol;
            let mut change = 0.0_f64;
            for &idx in &self.memristors {
                let ElementKind::Memristor { params, .. } = &circuit.elements()[idx].kind else {
                    unreachable!("memristor index")
                };
                let i = self.memristor_current(&x, idx, mem[idx]);
                let next = (prev.mem[idx] + h * memristor_state_rate(params, mem[idx], i)).clamp(0.0, 1.0);
                change = change.max((next - mem[idx]).abs());
                mem[idx] = next;
            }
            if change <= STATE_TOL {
                break;
            }
            if iter + 1 == STATE_ITERATIONS {
                return Err(Error::Analysis(format!(
                    "memristor state did not settle at t={t:e}"
                )));
            }
        }
        let cap_v = self.cap_voltages(&x);
        let cap_i = cap_v
            .iter()
            .enumerate()
            .map(|(k, v)| comp.geq[k] * v + comp.ieq[k])
            .collect();
        Ok(Snapshot {
            x,
            mem,
            cap_v,
            cap_i,
            euler_next: false,
        })
    }

    /// Advance from `t0` by `h`, halving the step on failure.
    fn advance(&self, prev: &Snapshot, t0: f64, h: f64, depth: u32) -> Result<Snapshot> {
        match self.step(prev, t0 + h, h) {
            Ok(s) => Ok(s),
            Err(e) if e.is_numerical() && depth < MAX_HALVINGS => {
                let half = h / 2.0;
                let mid = self.advance(prev, t0, half, depth + 1)?;
                self.advance(&mid, t0 + half, half, depth + 1)
            }
            Err(e) => Err(e),
        }
    }
}

/// Fixed-step transient. Records the probe, every node voltage and every
/// memristor state `x(<name>)` at `t = k·step`.
pub fn transient(circuit: &Circuit, config: &TransientConfig, temperature: f64, newton: &NewtonConfig) -> Result<SweepSeries> {
    transient_with(circuit, config, temperature, newton, None)
}

pub(crate) fn transient_with(
    circuit: &Circuit,
    config: &TransientConfig,
    temperature: f64,
    newton: &NewtonConfig,
    overrides: Option<&SourceOverrides>,
) -> Result<SweepSeries> {
    config.validate()?;
    let engine = Engine::new(circuit, temperature)?;
    let signals = Signals::new(circuit)?;
    let mems = memristors(circuit);
    let mut names = signals.names();
    names.extend(mems.iter().map(|(_, n)| format!("x({n})")));
    let mut series = SweepSeries::new("time", "s", names);

    let mem0 = engine.initial_memristor_states();
    let ncap = engine.cap_branches().len();
    let (x0, euler_next) = match config.initial {
        InitialCondition::OperatingPoint => {
            let exc = Excitation {
                time: Some(0.0),
                scale: 1.0,
                overrides,
            };
            (engine.solve(None, &exc, &mem0, None, newton)?.0, false)
        }
        InitialCondition::Zero => (DVector::zeros(engine.layout().dimension()), true),
    };
    let stepper = Stepper {
        engine: &engine,
        config: newton,
        method: config.method,
        overrides,
        memristors: mems.iter().map(|(i, _)| *i).collect(),
    };
    let mut snap = Snapshot {
        cap_v: stepper.cap_voltages(&x0),
        cap_i: vec![0.0; ncap],
        x: x0,
        mem: mem0,
        euler_next,
    };
    let record = |series: &mut SweepSeries, t: f64, s: &Snapshot| -> Result<()> {
        let mut v = signals.sample(engine.layout(), &s.x);
        v.extend(mems.iter().map(|(i, _)| s.mem[*i]));
        series.push(t, v, true)
    };
    record(&mut series, 0.0, &snap)?;
    let steps = (config.stop / config.step * (1.0 - 1e-12)).ceil() as usize;
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * config.step;
        snap = stepper.advance(&snap, t0, config.step, 0)?;
        record(&mut series, k as f64 * config.step, &snap)?;
    }
    Ok(series)
}
