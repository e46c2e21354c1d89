//! Damped Newton–Raphson with gmin and source-stepping fallbacks.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::linear::solve_linear;
use super::mna::{stamp_linear, Layout, MnaSystem, StampMode, StampState};
use crate::devices::{memristance, mosfet_dc, source_value, MosfetParams, SourceWaveform};
use crate::error::{ConvergenceFailure, Error, Result};
use crate::netlist::{Circuit, ElementKind, NodeId};

/// Largest conductance used by gmin stepping (S).
const GMIN_START: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub abstol_current: f64,
    pub reltol: f64,
    pub vntol: f64,
    pub max_iterations: usize,
    pub gmin: f64,
    pub gmin_steps: usize,
    pub source_steps: usize,
    /// Largest node-voltage update per iteration (V).
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abstol_current: 1e-12,
            reltol: 1e-6,
            vntol: 1e-9,
            max_iterations: 200,
            gmin: 1e-12,
            gmin_steps: 10,
            source_steps: 10,
            damping: 0.3,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abstol_current > 0.0
            && self.reltol > 0.0
            && self.vntol > 0.0
            && self.max_iterations > 0
            && self.gmin > 0.0
            && self.gmin_steps > 0
            && self.source_steps > 0
            && self.damping > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Analysis("Newton settings must all be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Direct,
    GminStepping,
    SourceStepping,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::GminStepping => "gmin-stepping",
            Strategy::SourceStepping => "source-stepping",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub strategy: Strategy,
}

/// Converged solution of one DC or timestep solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveState {
    pub unknowns: DVector<f64>,
    pub layout: Layout,
    /// Memristor state per element index (0 for other elements).
    pub memristor_x: Vec<f64>,
    pub temperature: f64,
    pub report: ConvergenceReport,
}

impl SolveState {
    pub fn voltage(&self, node: NodeId) -> f64 {
        voltage(&self.unknowns, &self.layout, node)
    }

    /// Branch current of a voltage source, flowing from its positive
    /// terminal through the source.
    pub fn branch_current(&self, element: usize) -> Option<f64> {
        self.layout.branch(element).map(|b| self.unknowns[b])
    }
}

pub(crate) fn voltage(x: &DVector<f64>, layout: &Layout, node: NodeId) -> f64 {
    layout.row(node).map_or(0.0, |r| x[r])
}

/// Per-source waveform replacements, keyed by element index.
pub type SourceOverrides = BTreeMap<usize, SourceWaveform>;

/// How independent sources are evaluated for one solve.
#[derive(Debug, Clone, Copy)]
pub struct Excitation<'a> {
    /// `None` uses DC values; `Some(t)` evaluates waveforms at `t`.
    pub time: Option<f64>,
    /// Multiplier applied to every source (source stepping).
    pub scale: f64,
    pub overrides: Option<&'a SourceOverrides>,
}

impl Default for Excitation<'_> {
    fn default() -> Self {
        Excitation {
            time: None,
            scale: 1.0,
            overrides: None,
        }
    }
}

/// A linear capacitance between two nodes, from a capacitor element or a
/// MOSFET's gate capacitances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapBranch {
    pub a: NodeId,
    pub b: NodeId,
    pub capacitance: f64,
}

/// Integration companion for every [`CapBranch`]: the current from `a` to
/// `b` is `geq·(va − vb) + ieq`.
#[derive(Debug, Clone, PartialEq)]
pub struct Companion {
    pub geq: Vec<f64>,
    pub ieq: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct MosfetInstance {
    pub drain: NodeId,
    pub gate: NodeId,
    pub source: NodeId,
    pub params: MosfetParams,
}

struct IterationFailure {
    iterations: usize,
    diagnostic: ConvergenceFailure,
}

/// Inputs that stay fixed during a single Newton run.
struct Frame<'a> {
    sources: Vec<f64>,
    memristor_x: &'a [f64],
    gmin: f64,
    companion: Option<&'a Companion>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// First node with no DC-conductive path to ground, if any.
fn floating_node(circuit: &Circuit) -> Option<NodeId> {
    let mut parent: Vec<usize> = (0..circuit.node_count()).collect();
    let mut touched = vec![false; circuit.node_count()];
    let join = |a: NodeId, b: NodeId, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a.0), find(parent, b.0));
        parent[ra] = rb;
    };
    for e in circuit.elements() {
        for n in e.nodes() {
            touched[n.0] = true;
        }
        match &e.kind {
            ElementKind::Resistor { a, b, .. } => join(*a, *b, &mut parent),
            ElementKind::Memristor { pos, neg, .. } | ElementKind::VoltageSource { pos, neg, .. } => {
                join(*pos, *neg, &mut parent)
            }
            ElementKind::Mosfet { drain, source, .. } => join(*drain, *source, &mut parent),
            ElementKind::Capacitor { .. } | ElementKind::CurrentSource { .. } => {}
        }
    }
    let ground = find(&mut parent, 0);
    (1..circuit.node_count())
        .find(|&i| touched[i] && find(&mut parent, i) != ground)
        .map(NodeId)
}

/// Reusable solver workspace for one circuit at one temperature.
pub struct Engine<'c> {
    circuit: &'c Circuit,
    layout: Layout,
    temperature: f64,
    mosfets: Vec<MosfetInstance>,
    caps: Vec<CapBranch>,
    nonlinear_rows: Vec<usize>,
}

impl<'c> Engine<'c> {
    pub fn new(circuit: &'c Circuit, temperature: f64) -> Result<Self> {
        if !(-100.0..=300.0).contains(&temperature) {
            return Err(Error::Analysis(format!(
                "temperature {temperature} °C outside [-100, 300]"
            )));
        }
        if let Some(node) = floating_node(circuit) {
            return Err(Error::Singular {
                node: circuit.node_name(node).to_owned(),
            });
        }
        let layout = Layout::new(circuit);
        let mut mosfets = Vec::new();
        let mut caps = Vec::new();
        let mut rows = Vec::new();
        for e in circuit.elements() {
            match &e.kind {
                ElementKind::Capacitor { a, b, capacitance } => caps.push(CapBranch {
                    a: *a,
                    b: *b,
                    capacitance: *capacitance,
                }),
                ElementKind::Mosfet {
                    drain,
                    gate,
                    source,
                    params,
                    ..
                } => {
                    mosfets.push(MosfetInstance {
                        drain: *drain,
                        gate: *gate,
                        source: *source,
                        params: *params,
                    });
                    let (cgs, cgd) = params.capacitances();
                    caps.push(CapBranch {
                        a: *gate,
                        b: *source,
                        capacitance: cgs,
                    });
                    caps.push(CapBranch {
                        a: *gate,
                        b: *drain,
                        capacitance: cgd,
                    });
                    rows.extend([*drain, *gate, *source].iter().filter_map(|n| layout.row(*n)));
                }
                _ => {}
            }
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(Engine {
            circuit,
            layout,
            temperature,
            mosfets,
            caps,
            nonlinear_rows: rows,
        })
    }

    pub fn circuit(&self) -> &'c Circuit {
        self.circuit
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn cap_branches(&self) -> &[CapBranch] {
        &self.caps
    }

    pub fn is_nonlinear(&self) -> bool {
        !self.mosfets.is_empty()
    }

    /// Memristor states at their programmed `X0`.
    pub fn initial_memristor_states(&self) -> Vec<f64> {
        self.circuit
            .elements()
            .iter()
            .map(|e| match &e.kind {
                ElementKind::Memristor { params, .. } => params.x0,
                _ => 0.0,
            })
            .collect()
    }

    pub fn source_values(&self, exc: &Excitation) -> Vec<f64> {
        self.circuit
            .elements()
            .iter()
            .enumerate()
            .map(|(idx, e)| match &e.kind {
                ElementKind::VoltageSource { waveform, .. }
                | ElementKind::CurrentSource { waveform, .. } => {
                    let w = exc.overrides.and_then(|o| o.get(&idx)).unwrap_or(waveform);
                    let v = match exc.time {
                        Some(t) => source_value(w, t),
                        None => w.dc_value(),
                    };
                    v * exc.scale
                }
                _ => 0.0,
            })
            .collect()
    }

    /// Zero everywhere except nodes tied to ground by a voltage source, then
    /// `.nodeset` hints.
    pub fn initial_guess(&self, exc: &Excitation) -> DVector<f64> {
        let mut x = DVector::zeros(self.layout.dimension());
        let values = self.source_values(exc);
        for (idx, e) in self.circuit.elements().iter().enumerate() {
            if let ElementKind::VoltageSource { pos, neg, .. } = e.kind {
                if neg.is_ground() {
                    if let Some(r) = self.layout.row(pos) {
                        x[r] = values[idx];
                    }
                } else if pos.is_ground() {
                    if let Some(r) = self.layout.row(neg) {
                        x[r] = -values[idx];
                    }
                }
            }
        }
        for (node, v) in self.circuit.nodesets() {
            if let Some(r) = self.layout.row(node) {
                x[r] = v * exc.scale;
            }
        }
        x
    }

    fn base_system(&self, frame: &Frame) -> Result<MnaSystem<f64>> {
        let mut sys = MnaSystem::new(self.layout.clone());
        stamp_linear(
            self.circuit,
            &mut sys,
            StampMode::Real,
            &StampState {
                memristor_x: frame.memristor_x,
                source_values: &frame.sources,
            },
        )?;
        for &r in &self.nonlinear_rows {
            sys.matrix[(r, r)] += frame.gmin;
        }
        if let Some(comp) = frame.companion {
            for (k, cap) in self.caps.iter().enumerate() {
                sys.admittance(cap.a, cap.b, comp.geq[k]);
                sys.current(cap.a, cap.b, comp.ieq[k]);
            }
        }
        Ok(sys)
    }

    /// KCL residual (sum of currents leaving each node, re-evaluating the
    /// nonlinear devices) and the largest incident branch current per node.
    /// Indexed by node row.
    fn node_residuals(&self, x: &DVector<f64>, frame: &Frame) -> (Vec<f64>, Vec<f64>) {
        let n = self.layout.node_unknowns();
        let mut res = vec![0.0; n];
        let mut scale = vec![0.0_f64; n];
        let v = |node: NodeId| voltage(x, &self.layout, node);
        let mut flow = |a: NodeId, b: NodeId, i: f64| {
            if let Some(r) = self.layout.row(a) {
                res[r] += i;
                scale[r] = scale[r].max(i.abs());
            }
            if let Some(r) = self.layout.row(b) {
                res[r] -= i;
                scale[r] = scale[r].max(i.abs());
            }
        };
        for (idx, e) in self.circuit.elements().iter().enumerate() {
            match &e.kind {
                ElementKind::Resistor { a, b, resistance } => flow(*a, *b, (v(*a) - v(*b)) / resistance),
                ElementKind::Memristor { pos, neg, params } => {
                    let m = memristance(params, frame.memristor_x[idx]);
                    flow(*pos, *neg, (v(*pos) - v(*neg)) / m)
                }
                ElementKind::VoltageSource { pos, neg, .. } => {
                    let br = self.layout.branch(idx).expect("voltage source branch");
                    flow(*pos, *neg, x[br])
                }
                ElementKind::CurrentSource { pos, neg, .. } => flow(*pos, *neg, frame.sources[idx]),
                ElementKind::Capacitor { .. } | ElementKind::Mosfet { .. } => {}
            }
        }
        for m in &self.mosfets {
            let vs = v(m.source);
            let ev = mosfet_dc(&m.params, v(m.gate) - vs, v(m.drain) - vs, self.temperature);
            flow(m.drain, m.source, ev.id);
        }
        if let Some(comp) = frame.companion {
            for (k, cap) in self.caps.iter().enumerate() {
                flow(cap.a, cap.b, comp.geq[k] * (v(cap.a) - v(cap.b)) + comp.ieq[k]);
            }
        }
        for &r in &self.nonlinear_rows {
            res[r] += frame.gmin * x[r];
        }
        (res, scale)
    }

    fn worst_residual(&self, x: &DVector<f64>, frame: &Frame, cfg: &NewtonConfig) -> (usize, f64, bool) {
        let (res, scale) = self.node_residuals(x, frame);
        let mut worst = (0, 0.0, true);
        let mut worst_excess = f64::NEG_INFINITY;
        for (r, (&f, &s)) in res.iter().zip(&scale).enumerate() {
            let bound = cfg.abstol_current + cfg.reltol * s;
            let excess = f.abs() - bound;
            if excess > worst_excess {
                worst_excess = excess;
                worst = (r, f.abs(), excess <= 0.0);
            }
        }
        if res.is_empty() {
            worst.2 = true;
        }
        worst
    }

    fn iterate(
        &self,
        mut x: DVector<f64>,
        frame: &Frame,
        cfg: &NewtonConfig,
        strategy: &str,
    ) -> std::result::Result<(DVector<f64>, usize), IterationFailure> {
        let fail = |iterations: usize, x: &DVector<f64>, reason: Option<String>| {
            let (r, residual, _) = self.worst_residual(x, frame, cfg);
            let worst_node = reason.unwrap_or_else(|| {
                if self.layout.node_unknowns() > 0 {
                    self.layout.describe(r).to_owned()
                } else {
                    "-".into()
                }
            });
            IterationFailure {
                iterations,
                diagnostic: ConvergenceFailure {
                    strategy: strategy.to_owned(),
                    iterations,
                    worst_node,
                    residual,
                },
            }
        };
        let base = match self.base_system(frame) {
            Ok(b) => b,
            Err(e) => return Err(fail(0, &x, Some(e.to_string()))),
        };
        let nonlinear = self.is_nonlinear();
        let nv = self.layout.node_unknowns();
        for iter in 1..=cfg.max_iterations {
            let mut sys = base.clone();
            for m in &self.mosfets {
                let (vd, vg, vs) = (
                    voltage(&x, &self.layout, m.drain),
                    voltage(&x, &self.layout, m.gate),
                    voltage(&x, &self.layout, m.source),
                );
                let (vgs, vds) = (vg - vs, vd - vs);
                let ev = mosfet_dc(&m.params, vgs, vds, self.temperature);
                let ieq = ev.id - ev.gm * vgs - ev.gds * vds;
                sys.transconductance(m.drain, m.source, m.gate, m.source, ev.gm);
                sys.transconductance(m.drain, m.source, m.drain, m.source, ev.gds);
                sys.current(m.drain, m.source, ieq);
            }
            let next = match solve_linear(&sys) {
                Ok(n) => n,
                Err(Error::Singular { node }) => return Err(fail(iter, &x, Some(node))),
                Err(e) => return Err(fail(iter, &x, Some(e.to_string()))),
            };
            let mut delta = &next - &x;
            let mut damped = false;
            if nonlinear {
                let max_dv = delta.rows(0, nv).amax();
                if max_dv > cfg.damping {
                    delta *= cfg.damping / max_dv;
                    damped = true;
                }
            }
            x += &delta;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(fail(iter, &x, None));
            }
            let small = !damped
                && delta.iter().zip(x.iter()).enumerate().all(|(i, (d, v))| {
                    let floor = if i < nv { cfg.vntol } else { cfg.abstol_current };
                    d.abs() <= floor.max(cfg.reltol * v.abs())
                });
            if small || !nonlinear {
                let (_, _, kcl_ok) = self.worst_residual(&x, frame, cfg);
                if kcl_ok {
                    return Ok((x, iter));
                }
                if !nonlinear {
                    return Err(fail(iter, &x, None));
                }
            }
        }
        Err(fail(cfg.max_iterations, &x, None))
    }

    /// Newton solve with escalation: direct, then gmin stepping, then
    /// source stepping. `memristor_x` is frozen for the duration.
    pub fn solve(
        &self,
        guess: Option<&DVector<f64>>,
        exc: &Excitation,
        memristor_x: &[f64],
        companion: Option<&Companion>,
        cfg: &NewtonConfig,
    ) -> Result<(DVector<f64>, ConvergenceReport)> {
        cfg.validate()?;
        let start = guess.cloned().unwrap_or_else(|| self.initial_guess(exc));
        let frame = |gmin: f64, scale: f64| Frame {
            sources: self.source_values(&Excitation { scale, ..*exc }),
            memristor_x,
            gmin,
            companion,
        };
        let mut total = 0;
        let direct = self.iterate(start.clone(), &frame(cfg.gmin, exc.scale), cfg, "direct");
        let mut last = match direct {
            Ok((x, n)) => {
                return Ok((
                    x,
                    ConvergenceReport {
                        iterations: n,
                        strategy: Strategy::Direct,
                    },
                ))
            }
            Err(f) => {
                total += f.iterations;
                f.diagnostic
            }
        };
        if !self.is_nonlinear() {
            return Err(Error::NonConvergence(Box::new(last)));
        }

        // gmin stepping
        let mut x = start.clone();
        let mut ok = true;
        let mut g = GMIN_START;
        for _ in 0..cfg.gmin_steps {
            if g <= cfg.gmin {
                break;
            }
            match self.iterate(x.clone(), &frame(g, exc.scale), cfg, "gmin-stepping") {
                Ok((nx, n)) => {
                    x = nx;
                    total += n;
                }
                Err(f) => {
                    total += f.iterations;
                    last = f.diagnostic;
                    ok = false;
                    break;
                }
            }
            g /= 10.0;
        }
        if ok {
            match self.iterate(x, &frame(cfg.gmin, exc.scale), cfg, "gmin-stepping") {
                Ok((nx, n)) => {
                    return Ok((
                        nx,
                        ConvergenceReport {
                            iterations: total + n,
                            strategy: Strategy::GminStepping,
                        },
                    ))
                }
                Err(f) => {
                    total += f.iterations;
                    last = f.diagnostic;
                }
            }
        }

        // source stepping
        let steps = cfg.source_steps;
        let mut x = self.initial_guess(&Excitation {
            scale: exc.scale / steps as f64,
            ..*exc
        });
        for k in 1..=steps {
            let scale = exc.scale * k as f64 / steps as f64;
            match self.iterate(x.clone(), &frame(cfg.gmin, scale), cfg, "source-stepping") {
                Ok((nx, n)) => {
                    x = nx;
                    total += n;
                }
                Err(f) => {
                    let mut d = f.diagnostic;
                    d.iterations = total + f.iterations;
                    return Err(Error::NonConvergence(Box::new(d)));
                }
            }
        }
        let _ = last;
        Ok((
            x,
            ConvergenceReport {
                iterations: total,
                strategy: Strategy::SourceStepping,
            },
        ))
    }

    /// Small-signal conductance and capacitance matrices at `x` (node rows
    /// and voltage-source branches), independent-source values excluded.
    pub fn small_signal(&self, x: &DVector<f64>, memristor_x: &[f64], gmin: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let zeros = vec![0.0; self.circuit.elements().len()];
        let frame = Frame {
            sources: zeros,
            memristor_x,
            gmin,
            companion: None,
        };
        let mut g = self.base_system(&frame)?;
        for m in &self.mosfets {
            let (vd, vg, vs) = (
                voltage(x, &self.layout, m.drain),
                voltage(x, &self.layout, m.gate),
                voltage(x, &self.layout, m.source),
            );
            let ev = mosfet_dc(&m.params, vg - vs, vd - vs, self.temperature);
            g.transconductance(m.drain, m.source, m.gate, m.source, ev.gm);
            g.transconductance(m.drain, m.source, m.drain, m.source, ev.gds);
        }
        let mut c = MnaSystem::<f64>::new(self.layout.clone());
        for cap in &self.caps {
            c.admittance(cap.a, cap.b, cap.capacitance);
        }
        Ok((g.matrix, c.matrix))
    }

    /// KCL residuals and per-node incident-current scale at a solution.
    pub fn kcl_check(
        &self,
        x: &DVector<f64>,
        exc: &Excitation,
        memristor_x: &[f64],
        gmin: f64,
    ) -> Vec<(String, f64, f64)> {
        let frame = Frame {
            sources: self.source_values(exc),
            memristor_x,
            gmin,
            companion: None,
        };
        let (res, scale) = self.node_residuals(x, &frame);
        res.into_iter()
            .zip(scale)
            .enumerate()
            .map(|(r, (f, s))| (self.layout.describe(r).to_owned(), f, s))
            .collect()
    }
}

/// Converged DC operating point with default sources at `temperature`.
pub fn newton_solve(
    circuit: &Circuit,
    config: &NewtonConfig,
    initial_guess: Option<&DVector<f64>>,
    temperature: f64,
) -> Result<SolveState> {
    let engine = Engine::new(circuit, temperature)?;
    let exc = Excitation::default();
    let mem = engine.initial_memristor_states();
    let (x, report) = engine.solve(initial_guess, &exc, &mem, None, config)?;
    Ok(SolveState {
        unknowns: x,
        layout: engine.layout().clone(),
        memristor_x: mem,
        temperature,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{MosfetParams, Polarity};

    fn circuit(text: &str) -> Circuit {
        Circuit::from_source(text, "t").unwrap()
    }

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let f_lo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_circuit_takes_one_iteration() {
        let c = circuit("d\nV1 a 0 1\nR1 a m 1k\nR2 m 0 3k\n");
        let s = newton_solve(&c, &NewtonConfig::default(), None, 27.0).unwrap();
        assert_eq!(s.report.iterations, 1);
        assert_eq!(s.report.strategy, Strategy::Direct);
        assert!((s.voltage(c.node("m").unwrap()) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn floating_gate_is_named() {
        let c = circuit("f\n.model N NMOS\nV1 d 0 1.8\nR1 d x 10k\nM1 x g 0 0 N W=10u L=1u\n");
        match newton_solve(&c, &NewtonConfig::default(), None, 27.0) {
            Err(Error::Singular { node }) => assert_eq!(node, "g"),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn hard_start_needs_continuation() {
        let c = circuit(
            "hard\n.model N NMOS\nV1 top 0 200\nR1 top a 100k\nR2 a 0 100k\nR3 top b 1meg\nM1 b a 0 0 N W=20u L=1u\n",
        );
        let s = newton_solve(&c, &NewtonConfig::default(), None, 27.0).unwrap();
        assert_ne!(s.report.strategy, Strategy::Direct);
        // Thevenin 100 V behind 50 kΩ, loaded only by the gmin floor.
        let a = s.voltage(c.node("a").unwrap());
        assert!((a - 100.0 / (1.0 + 50e3 * 1e-12)).abs() < 1e-6);
        let p = MosfetParams::default_card(Polarity::Nmos).with_geometry(20e-6, 1e-6);
        let b = bisect(0.0, 200.0, |v| (200.0 - v) / 1e6 - mosfet_dc(&p, 100.0, v, 27.0).id);
        assert!((s.voltage(c.node("b").unwrap()) - b).abs() < 1e-6);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = NewtonConfig {
            reltol: 0.0,
            ..NewtonConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn converged_point_satisfies_kcl() {
        let c = circuit("k\n.model N NMOS\nV1 vdd 0 1.8\nR1 vdd d 10k\nM1 d d 0 0 N W=20u L=1u\nI1 0 d 10u\n");
        let cfg = NewtonConfig::default();
        let engine = Engine::new(&c, 27.0).unwrap();
        let (x, _) = engine.solve(None, &Excitation::default(), &[0.0; 4], None, &cfg).unwrap();
        for (name, r, scale) in engine.kcl_check(&x, &Excitation::default(), &[0.0; 4], cfg.gmin) {
            assert!(r.abs() <= cfg.abstol_current + cfg.reltol * scale, "{name}: {r}");
        }
    }
}
