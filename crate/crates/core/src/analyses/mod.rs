//! Measurement procedures built on the solver: sweeps, transient, THD and
//! figure-of-merit extraction.

mod ac;
mod dc;
mod metrics;
mod series;
mod temp;
mod thd;
mod tran;

pub use ac::{ac_frequencies, ac_sweep, AcSweep};
pub use dc::{dc_sweep, DcSweep};
pub use metrics::{bandwidth_3db, extract_metrics, MetricOptions, Metrics};
pub use series::{SweepPoint, SweepSeries};
pub use temp::{temperature_sweep, InnerAnalysis, TemperatureRun};
pub use thd::{thd, thd_sweep, ThdDrive};
pub use tran::{transient, InitialCondition, Integrator, TransientConfig};


use nalgebra::DVector;

use crate::error::Result;
use crate::netlist::{Circuit, ElementKind, NodeId};
use crate::solver::Layout;

/// Signals recorded by every sweep: the `.probe` output (if any) followed
/// by each node voltage.
#[derive(Debug, Clone)]
pub(crate) struct Signals {
    probe: Option<(String, NodeId, NodeId)>,
    nodes: Vec<(String, NodeId)>,
}

impl Signals {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let probe = match circuit.probe() {
            Some(p) => {
                let (a, b) = match p {
                    crate::Probe::Node(a) => (circuit.require_node(a)?, NodeId::GROUND),
                    crate::Probe::Diff(a, b) => (circuit.require_node(a)?, circuit.require_node(b)?),
                };
                Some((p.label(), a, b))
            }
            None => None,
        };
        let nodes = circuit.nodes()[1..]
            .iter()
            .enumerate()
            .map(|(i, n)| (format!("v({n})"), NodeId(i + 1)))
            .collect();
        Ok(Signals { probe, nodes })
    }

    pub fn names(&self) -> Vec<String> {
        self.probe
            .iter()
            .map(|p| p.0.clone())
            .chain(self.nodes.iter().map(|n| n.0.clone()))
            .collect()
    }

    /// Probe nodes, or the first non-ground node when no probe is declared.
    pub fn output(&self) -> Option<(NodeId, NodeId)> {
        self.probe
            .as_ref()
            .map(|p| (p.1, p.2))
            .or_else(|| self.nodes.first().map(|n| (n.1, NodeId::GROUND)))
    }

    pub fn sample(&self, layout: &Layout, x: &DVector<f64>) -> Vec<f64> {
        let v = |n| crate::solver::voltage(x, layout, n);
        self.probe
            .iter()
            .map(|p| v(p.1) - v(p.2))
            .chain(self.nodes.iter().map(|n| v(n.1)))
            .collect()
    }
}

/// Memristor element indices and names, in circuit order.
pub(crate) fn memristors(circuit: &Circuit) -> Vec<(usize, String)> {
    circuit
        .elements()
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.kind, ElementKind::Memristor { .. }))
        .map(|(i, e)| (i, e.name.clone()))
        .collect()
}
