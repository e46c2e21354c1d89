//! Numerical check of the analytic transimpedance relations at a solved
//! operating point.

use crate::devices::{memristance, MosfetParams};
use crate::error::{Error, Result};
use crate::netlist::{Circuit, ElementKind};
use crate::solver::OperatingPoint;

/// Measured quantities and relation residuals of one amplifier.
///
/// Residuals are relative, `|lhs − rhs| / max(|lhs|, |rhs|, floor)`. The
/// floor is a millionth of the relation's natural scale (I_G for currents,
/// 1 for ratios, V_dd − V_O for voltages) so that a relation between two
/// near-zero quantities does not report a spurious 100 % error.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationReport {
    pub v_dd: f64,
    pub i_g: f64,
    pub i_o: f64,
    pub v_o: f64,
    /// Resistance of the bias element (R1 or memristor U1) in Ω.
    pub r1: f64,
    /// Small-signal `1/g_ds` of M13; infinite when LAMBDA = 0.
    pub r_ds13: f64,
    /// Chord resistance `V_ds13 / I_D13`, the value that closes the bias
    /// branch equation.
    pub r_ds13_chord: f64,
    pub i_in_plus: f64,
    pub i_in_minus: f64,
    pub v_out_plus: f64,
    pub v_out_minus: f64,
    /// Mean drain-source voltage of M1–M4.
    pub v_ds: f64,
    /// `(name, residual)` for the I_G, subtraction, ratio and output
    /// relations, in the order eq1, eq6, eq7, eq8, eq9, eq10.
    pub residuals: Vec<(&'static str, f64)>,
    /// Predicted transimpedance `(V_dd − V_O)/I_G`.
    pub gain_predicted: f64,
    /// Slope of the DC transfer, when supplied.
    pub gain_measured: Option<f64>,
    /// Bias resistance the measured gain calls for, i.e. the required R_off.
    pub r_off: Option<f64>,
}

impl DerivationReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| *n == name).map(|(_, r)| *r)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    /// `|measured / predicted − 1|`.
    pub fn gain_error(&self) -> Option<f64> {
        self.gain_measured.map(|g| (g / self.gain_predicted - 1.0).abs())
    }
}

fn relative(lhs: f64, rhs: f64, floor: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn missing(name: &str) -> Error {
    Error::Circuit(format!("derivation check needs instance '{name}'"))
}

fn source_dc(circuit: &Circuit, name: &str) -> Result<f64> {
    match &circuit.element(name).ok_or_else(|| missing(name))?.kind {
        ElementKind::CurrentSource { waveform, .. } | ElementKind::VoltageSource { waveform, .. } => {
            Ok(waveform.dc_value())
        }
        _ => Err(missing(name)),
    }
}

fn bias_resistance(circuit: &Circuit) -> Result<f64> {
    if let Some(e) = circuit.element("R1") {
        if let ElementKind::Resistor { resistance, .. } = e.kind {
            return Ok(resistance);
        }
    }
    match circuit.element("XU1").map(|e| &e.kind) {
        Some(ElementKind::Memristor { params, .. }) => Ok(memristance(params, params.x0)),
        _ => Err(missing("R1")),
    }
}

fn quad_params(circuit: &Circuit) -> Result<MosfetParams> {
    match circuit.element("M3").map(|e| &e.kind) {
        Some(ElementKind::Mosfet { params, .. }) => Ok(*params),
        _ => Err(missing("M3")),
    }
}

/// Evaluate the gain relations at `op`. `dc_gain` is the measured DC
/// transfer slope, used for the gain comparison and the R_off estimate.
pub fn derivation_check(
    circuit: &Circuit,
    op: &OperatingPoint,
    temperature: f64,
    dc_gain: Option<f64>,
) -> Result<DerivationReport> {
    let v = |n: &str| op.voltage(n).ok_or_else(|| missing(n));
    let dev = |n: &str| op.mosfet(n).ok_or_else(|| missing(n));
    let v_dd = v("vdd")?;
    let (v_out_plus, v_out_minus) = (v("outp")?, v("outn")?);
    let m13 = dev("M13")?;
    let i_g = m13.id;
    let v_o = m13.vgs;
    let i_o = dev("M2")?.id;
    let mut v_ds = 0.0;
    for name in ["M1", "M2", "M3", "M4"] {
        v_ds += dev(name)?.vds / 4.0;
    }
    let r1 = bias_resistance(circuit)?;
    let r_ds13_chord = m13.vds / m13.id;
    let i_in_plus = source_dc(circuit, "IINP")?;
    let i_in_minus = source_dc(circuit, "IINN")?;

    let quad = quad_params(circuit)?;
    let beta = quad.kp_at(temperature) * quad.aspect();
    let predicted = (v_dd - v_o) / i_g;
    let (fi, fv) = (1e-6 * i_g.abs(), 1e-6 * (v_dd - v_o).abs());
    let residuals = vec![
        ("eq1", relative(i_g, v_dd / (r1 + r_ds13_chord), fi)),
        ("eq6", relative(i_in_plus, beta * v_ds * (v_out_plus - v_o), fi)),
        ("eq7", relative(i_g, beta * v_ds * (v_dd - v_o), fi)),
        ("eq8", relative(i_in_plus / i_g, (v_out_plus - v_o) / (v_dd - v_o), 1e-6)),
        ("eq9", relative(i_in_minus / i_g, (v_out_minus - v_o) / (v_dd - v_o), 1e-6)),
        (
            "eq10",
            relative(v_out_plus - v_out_minus, predicted * (i_in_plus - i_in_minus), fv),
        ),
    ];
    let di = i_in_plus - i_in_minus;
    let r_off = dc_gain.or_else(|| (di != 0.0).then(|| (v_out_plus - v_out_minus) / di));
    Ok(DerivationReport {
        v_dd,
        i_g,
        i_o,
        v_o,
        r1,
        r_ds13: 1.0 / m13.gds,
        r_ds13_chord,
        i_in_plus,
        i_in_minus,
        v_out_plus,
        v_out_minus,
        v_ds,
        residuals,
        gain_predicted: predicted,
        gain_measured: dc_gain,
        r_off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{operating_point, NewtonConfig};
    use crate::tia::{build_design_with, DesignOptions, DesignVariant};

    fn report(opts: &DesignOptions) -> DerivationReport {
        let c = build_design_with(DesignVariant::new(1).unwrap(), opts).unwrap();
        let op = operating_point(&c, &NewtonConfig::default(), 27.0).unwrap();
        derivation_check(&c, &op, 27.0, None).unwrap()
    }

    #[test]
    fn idealized_design_satisfies_relations() {
        let r = report(&DesignOptions {
            input_current: 40e-6,
            ..DesignOptions::idealized()
        });
        assert!(r.max_residual() < 1e-3, "{:?}", r.residuals);
        assert!((r.gain_predicted - 10e3).abs() < 1e-6 * 10e3);
        assert!((r.r_off.unwrap() / 10e3 - 1.0).abs() < 0.02);
    }

    #[test]
    fn zero_input_gives_zero_differential_output() {
        let r = report(&DesignOptions::idealized());
        assert!(r.residual("eq10").unwrap() < 1e-3);
        assert!((r.v_out_plus - r.v_out_minus).abs() < 1e-9);
    }

    #[test]
    fn missing_instance_is_reported() {
        let c = Circuit::from_source("t\nV1 outp 0 1\nR1 outp outn 1k\nR2 outn 0 1k\nR3 vdd 0 1k\nV2 vdd 0 1\n", "t").unwrap();
        let op = operating_point(&c, &NewtonConfig::default(), 27.0).unwrap();
        let err = derivation_check(&c, &op, 27.0, None).unwrap_err();
        assert!(err.to_string().contains("M13"));
    }
}
