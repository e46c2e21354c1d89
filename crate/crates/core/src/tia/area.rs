use crate::netlist::{Circuit, ElementKind};

/// Footprint of one memristor, 45 nm × 90 nm, in µm².
pub const MEMRISTOR_AREA_UM2: f64 = 0.045 * 0.09;

/// Active-area estimate in µm²: ΣW·L over MOSFETs, a fixed footprint per
/// memristor and `resistor_um2` per resistor.
pub fn area_estimate(circuit: &Circuit, resistor_um2: f64) -> f64 {
    circuit
        .elements()
        .iter()
        .map(|e| match &e.kind {
            ElementKind::Mosfet { params, .. } => (params.w * 1e6) * (params.l * 1e6),
            ElementKind::Memristor { .. } => MEMRISTOR_AREA_UM2,
            ElementKind::Resistor { .. } => resistor_um2,
            _ => 0.0,
        })
        .sum()
}

/// The ΣW·L part of [`area_estimate`] alone.
pub fn mosfet_area(circuit: &Circuit) -> f64 {
    circuit
        .elements()
        .iter()
        .filter_map(|e| match &e.kind {
            ElementKind::Mosfet { params, .. } => Some((params.w * 1e6) * (params.l * 1e6)),
            _ => None,
        })
        .sum()
}
