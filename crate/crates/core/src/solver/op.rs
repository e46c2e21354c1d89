//! DC operating point with per-device bias and power bookkeeping.

use super::newton::{newton_solve, voltage, NewtonConfig, SolveState};
use crate::devices::{memristance, mosfet_dc, Region};
use crate::error::Result;
use crate::netlist::{Circuit, ElementKind};

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceBias {
    pub name: String,
    pub vgs: f64,
    pub vds: f64,
    pub id: f64,
    pub gm: f64,
    pub gds: f64,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub state: SolveState,
    /// Node voltages in circuit order, ground excluded.
    pub node_voltages: Vec<(String, f64)>,
    /// Branch currents of voltage sources.
    pub branch_currents: Vec<(String, f64)>,
    pub mosfets: Vec<DeviceBias>,
    /// Power delivered by each independent source (W).
    pub source_power: Vec<(String, f64)>,
    /// Power absorbed by resistors, memristors and MOSFETs (W).
    pub dissipated_power: f64,
}

impl OperatingPoint {
    /// Total power delivered by voltage sources (the supplies).
    pub fn supply_power(&self, circuit: &Circuit) -> f64 {
        self.source_power
            .iter()
            .filter(|(n, _)| {
                matches!(
                    circuit.element(n).map(|e| &e.kind),
                    Some(ElementKind::VoltageSource { .. })
                )
            })
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total_source_power(&self) -> f64 {
        self.source_power.iter().map(|(_, p)| p).sum()
    }

    pub fn voltage(&self, name: &str) -> Option<f64> {
        if name == "0" || name.eq_ignore_ascii_case("gnd") {
            return Some(0.0);
        }
        self.node_voltages
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| *v)
    }

    pub fn mosfet(&self, name: &str) -> Option<&DeviceBias> {
        self.mosfets.iter().find(|m| m.name.eq_ignore_ascii_case(name))
    }
}

/// Solve the DC operating point and tabulate device quantities.
pub fn operating_point(circuit: &Circuit, config: &NewtonConfig, temperature: f64) -> Result<OperatingPoint> {
    let state = newton_solve(circuit, config, None, temperature)?;
    Ok(describe(circuit, state))
}

pub(crate) fn describe(circuit: &Circuit, state: SolveState) -> OperatingPoint {
    let x = &state.unknowns;
    let layout = &state.layout;
    let v = |n| voltage(x, layout, n);
    let node_voltages = circuit.nodes()[1..]
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), x[i]))
        .collect();
    let mut branch_currents = Vec::new();
    let mut mosfets = Vec::new();
    let mut source_power = Vec::new();
    let mut dissipated = 0.0;
    for (idx, e) in circuit.elements().iter().enumerate() {
        match &e.kind {
            ElementKind::Resistor { a, b, resistance } => {
                dissipated += (v(*a) - v(*b)).powi(2) / resistance;
            }
            ElementKind::Memristor { pos, neg, params } => {
                let m = memristance(params, state.memristor_x[idx]);
                dissipated += (v(*pos) - v(*neg)).powi(2) / m;
            }
            ElementKind::VoltageSource { pos, neg, .. } => {
                let i = x[layout.branch(idx).expect("branch")];
                branch_currents.push((e.name.clone(), i));
                source_power.push((e.name.clone(), -(v(*pos) - v(*neg)) * i));
            }
            ElementKind::CurrentSource { pos, neg, waveform } => {
                let i = waveform.dc_value();
                source_power.push((e.name.clone(), (v(*neg) - v(*pos)) * i));
            }
            ElementKind::Mosfet {
                drain,
                gate,
                source,
                params,
                ..
            } => {
                let (vgs, vds) = (v(*gate) - v(*source), v(*drain) - v(*source));
                let ev = mosfet_dc(params, vgs, vds, state.temperature);
                dissipated += ev.id * vds;
                mosfets.push(DeviceBias {
                    name: e.name.clone(),
                    vgs,
                    vds,
                    id: ev.id,
                    gm: ev.gm,
                    gds: ev.gds,
                    region: ev.region,
                });
            }
            ElementKind::Capacitor { .. } => {}
        }
    }
    OperatingPoint {
        state,
        node_voltages,
        branch_currents,
        mosfets,
        source_power,
        dissipated_power: dissipated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divider_power_balance() {
        let c = Circuit::from_source("t\nV1 a 0 2\nR1 a b 1k\nR2 b 0 3k", "<t>").unwrap();
        let op = operating_point(&c, &NewtonConfig::default(), 27.0).unwrap();
        assert!((op.voltage("b").unwrap() - 1.5).abs() < 1e-12);
        assert!((op.supply_power(&c) - 1e-3).abs() < 1e-15);
        assert!((op.dissipated_power - 1e-3).abs() < 1e-15);
        assert_eq!(op.state.report.iterations, 1);
    }

    #[test]
    fn current_source_into_resistor() {
        let c = Circuit::from_source("t\nI1 0 a 1m\nR1 a 0 2k", "<t>").unwrap();
        let op = operating_point(&c, &NewtonConfig::default(), 27.0).unwrap();
        assert!((op.voltage("a").unwrap() - 2.0).abs() < 1e-12);
        assert!((op.total_source_power() - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn diode_connected_nmos() {
        let c = Circuit::from_source(
            "t\nV1 vdd 0 1.8\nR1 vdd d 10k\nM1 d d 0 0 nch W=1u L=1u\n.model nch NMOS",
            "<t>",
        )
        .unwrap();
        let op = operating_point(&c, &NewtonConfig::default(), 27.0).unwrap();
        let m = op.mosfet("M1").unwrap();
        let ir = (1.8 - op.voltage("d").unwrap()) / 10e3;
        assert!((m.id - ir).abs() < 1e-5 * ir);
        assert_eq!(m.region, Region::Saturation);
        assert!((op.total_source_power() - op.dissipated_power).abs() < 1e-5 * op.dissipated_power);
    }
}
