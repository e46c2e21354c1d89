//! MNA system layout and linear-element stamps.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. Ground is eliminated: a terminal on node 0 simply
//! contributes no row or column.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::devices::memristance;
use crate::error::{Error, Result};
use crate::netlist::{Circuit, ElementKind, NodeId};

/// Maps circuit quantities to unknown indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    node_count: usize,
    /// Branch unknown per element index (voltage sources only).
    branches: Vec<Option<usize>>,
    dimension: usize,
    names: Vec<String>,
}

impl Layout {
    pub fn new(circuit: &Circuit) -> Self {
        let node_count = circuit.node_count();
        let mut next = node_count - 1;
        let branches = circuit
            .elements()
            .iter()
            .map(|e| match e.kind {
                ElementKind::VoltageSource { .. } => {
                    next += 1;
                    Some(next - 1)
                }
                _ => None,
            })
            .collect();
        let mut names: Vec<String> = circuit.nodes()[1..].to_vec();
        names.extend(circuit.elements().iter().filter_map(|e| match e.kind {
            ElementKind::VoltageSource { .. } => Some(format!("branch({})", e.name)),
            _ => None,
        }));
        Layout {
            node_count,
            branches,
            dimension: next,
            names,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn node_unknowns(&self) -> usize {
        self.node_count - 1
    }

    /// Row/column of a node, `None` for ground.
    pub fn row(&self, node: NodeId) -> Option<usize> {
        if node.is_ground() {
            None
        } else {
            Some(node.0 - 1)
        }
    }

    pub fn branch(&self, element: usize) -> Option<usize> {
        self.branches[element]
    }

    pub fn is_voltage_row(&self, index: usize) -> bool {
        index < self.node_count - 1
    }

    /// Human-readable name of an unknown.
    pub fn describe(&self, index: usize) -> &str {
        &self.names[index]
    }
}

/// Dense MNA matrix and right-hand side.
#[derive(Debug, Clone)]
pub struct MnaSystem<T: ComplexField> {
    pub layout: Layout,
    pub matrix: DMatrix<T>,
    pub rhs: DVector<T>,
}

impl<T: ComplexField + Copy> MnaSystem<T> {
    pub fn new(layout: Layout) -> Self {
        let n = layout.dimension();
        MnaSystem {
            layout,
            matrix: DMatrix::zeros(n, n),
            rhs: DVector::zeros(n),
        }
    }

    pub fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    pub fn add(&mut self, row: Option<usize>, col: Option<usize>, v: T) {
        if let (Some(r), Some(c)) = (row, col) {
            self.matrix[(r, c)] += v;
        }
    }

    pub fn add_rhs(&mut self, row: Option<usize>, v: T) {
        if let Some(r) = row {
            self.rhs[r] += v;
        }
    }

    /// Admittance `y` between nodes `a` and `b`.
    pub fn admittance(&mut self, a: NodeId, b: NodeId, y: T) {
        let (ra, rb) = (self.layout.row(a), self.layout.row(b));
        self.add(ra, ra, y);
        self.add(rb, rb, y);
        self.add(ra, rb, -y);
        self.add(rb, ra, -y);
    }

    /// Current `i` leaving node `a` and entering node `b` (moved to the RHS).
    pub fn current(&mut self, a: NodeId, b: NodeId, i: T) {
        self.add_rhs(self.layout.row(a), -i);
        self.add_rhs(self.layout.row(b), i);
    }

    /// Voltage-controlled current `g·(v_cp − v_cn)` leaving `a`, entering `b`.
    pub fn transconductance(&mut self, a: NodeId, b: NodeId, cp: NodeId, cn: NodeId, g: T) {
        let (ra, rb) = (self.layout.row(a), self.layout.row(b));
        let (rp, rn) = (self.layout.row(cp), self.layout.row(cn));
        self.add(ra, rp, g);
        self.add(ra, rn, -g);
        self.add(rb, rp, -g);
        self.add(rb, rn, g);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StampMode {
    /// DC: capacitors are open.
    Real,
    /// Small-signal at angular frequency ω (rad/s).
    Complex(f64),
}

/// Values the linear stamps depend on.
pub struct StampState<'a, T> {
    /// Memristor state per element index (ignored for other elements).
    pub memristor_x: &'a [f64],
    /// Source value per element index (ignored for non-sources).
    pub source_values: &'a [T],
}

/// Numeric scalar that real and complex stamps share.
pub trait Stampable: ComplexField + Copy {
    fn scalar(v: f64) -> Self;
    fn capacitive(c: f64, omega: f64) -> Self;
}

impl Stampable for f64 {
    fn scalar(v: f64) -> Self {
        v
    }
    fn capacitive(_c: f64, _omega: f64) -> Self {
        0.0
    }
}

impl Stampable for Complex64 {
    fn scalar(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn capacitive(c: f64, omega: f64) -> Self {
        Complex64::new(0.0, omega * c)
    }
}

/// Stamp every linear element: resistors, memristors at their current
/// state, capacitors (complex mode only), and independent sources.
pub fn stamp_linear<T: Stampable>(
    circuit: &Circuit,
    system: &mut MnaSystem<T>,
    mode: StampMode,
    state: &StampState<T>,
) -> Result<()> {
    if system.layout != Layout::new(circuit) {
        return Err(Error::Circuit("MNA system does not match circuit".into()));
    }
    for (idx, e) in circuit.elements().iter().enumerate() {
        match &e.kind {
            ElementKind::Resistor { a, b, resistance } => {
                if *resistance == 0.0 {
                    return Err(Error::Circuit(format!("{}: short; use V source", e.name)));
                }
                system.admittance(*a, *b, T::scalar(1.0 / resistance));
            }
            ElementKind::Memristor { pos, neg, params } => {
                let m = memristance(params, state.memristor_x[idx]);
                system.admittance(*pos, *neg, T::scalar(1.0 / m));
            }
            ElementKind::Capacitor { a, b, capacitance } => {
                if let StampMode::Complex(omega) = mode {
                    system.admittance(*a, *b, T::capacitive(*capacitance, omega));
                }
            }
            ElementKind::VoltageSource { pos, neg, .. } => {
                let br = system.layout.branch(idx);
                let (rp, rn) = (system.layout.row(*pos), system.layout.row(*neg));
                let one = T::scalar(1.0);
                system.add(rp, br, one);
                system.add(rn, br, -one);
                system.add(br, rp, one);
                system.add(br, rn, -one);
                system.add_rhs(br, state.source_values[idx]);
            }
            ElementKind::CurrentSource { pos, neg, .. } => {
                system.current(*pos, *neg, state.source_values[idx]);
            }
            ElementKind::Mosfet { .. } => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state<'a>(x: &'a [f64], s: &'a [f64]) -> StampState<'a, f64> {
        StampState {
            memristor_x: x,
            source_values: s,
        }
    }

    #[test]
    fn series_divider_dimension() {
        let c = Circuit::from_source("t\nV1 a 0 1\nR1 a b 1k\nR2 b 0 1k", "<t>").unwrap();
        let mut sys = MnaSystem::<f64>::new(Layout::new(&c));
        stamp_linear(&c, &mut sys, StampMode::Real, &state(&[0.0; 3], &[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(sys.dimension(), 3);
        assert_eq!(sys.rhs[2], 1.0);
        assert_eq!(sys.matrix[(0, 0)], 1e-3);
        assert_eq!(sys.matrix[(1, 1)], 2e-3);
    }

    #[test]
    fn capacitor_open_at_dc() {
        let c = Circuit::from_source("t\nR1 a 0 1k\nC1 a 0 1p", "<t>").unwrap();
        let mut sys = MnaSystem::<f64>::new(Layout::new(&c));
        stamp_linear(&c, &mut sys, StampMode::Real, &state(&[0.0; 2], &[0.0; 2])).unwrap();
        assert_eq!(sys.matrix[(0, 0)], 1e-3);
        let mut ac = MnaSystem::<Complex64>::new(Layout::new(&c));
        let zeros = [Complex64::new(0.0, 0.0); 2];
        let st = StampState {
            memristor_x: &[0.0; 2],
            source_values: &zeros,
        };
        stamp_linear(&c, &mut ac, StampMode::Complex(1e9), &st).unwrap();
        assert_eq!(ac.matrix[(0, 0)], Complex64::new(1e-3, 1e-3));
    }

    #[test]
    fn memristor_off_state_conductance() {
        let c = Circuit::from_source("t\nXU1 a 0 memristor ROFF=10k\nR1 a 0 1", "<t>").unwrap();
        let mut sys = MnaSystem::<f64>::new(Layout::new(&c));
        stamp_linear(&c, &mut sys, StampMode::Real, &state(&[0.0, 0.0], &[0.0; 2])).unwrap();
        assert!((sys.matrix[(0, 0)] - (1e-4 + 1.0)).abs() < 1e-15);
        let only = Circuit::from_source("t\nXU1 a 0 memristor ROFF=10k", "<t>").unwrap();
        let mut sys = MnaSystem::<f64>::new(Layout::new(&only));
        stamp_linear(&only, &mut sys, StampMode::Real, &state(&[0.0], &[0.0])).unwrap();
        assert_eq!(sys.matrix[(0, 0)], 1e-4);
    }

    #[test]
    fn zero_resistor_rejected() {
        let c = Circuit::from_source("t\nR1 a 0 0", "<t>").unwrap();
        let mut sys = MnaSystem::<f64>::new(Layout::new(&c));
        let err = stamp_linear(&c, &mut sys, StampMode::Real, &state(&[0.0], &[0.0])).unwrap_err();
        assert!(err.to_string().contains("short; use V source"));
    }
}
