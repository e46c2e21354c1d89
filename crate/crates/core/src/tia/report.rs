//! Per-design figures of merit and the side-by-side comparison table.

use std::fmt::Write as _;

use super::{area_estimate, build_design_with, derivation_check, DerivationReport, DesignOptions, DesignVariant};
use crate::analyses::{
    ac_sweep, dc_sweep, extract_metrics, temperature_sweep, thd_sweep, AcSweep, DcSweep, InnerAnalysis, MetricOptions,
    Metrics, ThdDrive,
};
use crate::error::{Error, Result};
use crate::format::sci;
use crate::solver::{operating_point, NewtonConfig};

pub const REFERENCE_LABEL: &str = "paper (foundry model)";

/// Published figures for one design, measured with a foundry model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub gain_ohm: f64,
    pub bandwidth_hz: f64,
    pub power_w: f64,
    pub area_um2: f64,
    pub linear_range_a: (f64, f64),
    pub offset_v: f64,
}

pub fn reference_row(variant: DesignVariant) -> ReferenceRow {
    let (gain, bw, p, area, lo, hi, off) = match variant.id {
        1 => (5.2e3, 6e6, 1396e-6, 2541.0, -140e-6, 60e-6, 1e-3),
        2 => (5.7e3, 5.3e6, 1154e-6, 2182.4, -15e-6, 80e-6, 0.0),
        3 => (2.3e3, 23e6, 2316e-6, 203.1, -270e-6, 180e-6, 73e-3),
        _ => (3.6e3, 11.3e6, 1177e-6, 169.6, -15e-6, 150e-6, 0.0),
    };
    ReferenceRow {
        gain_ohm: gain,
        bandwidth_hz: bw,
        power_w: p,
        area_um2: area,
        linear_range_a: (lo, hi),
        offset_v: off,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub design: DesignOptions,
    pub newton: NewtonConfig,
    pub temperature: f64,
    pub metrics: MetricOptions,
    pub dc: DcSweep,
    pub ac: AcSweep,
    pub harmonics: usize,
    pub thd_fundamental: f64,
    pub thd_amplitudes: Vec<f64>,
    /// Empty skips the temperature family.
    pub temperatures: Vec<f64>,
    /// Differential input applied for the derivation check (A).
    pub derivation_input: f64,
    pub resistor_area_um2: f64,
    pub skip_thd: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            design: DesignOptions::default(),
            newton: NewtonConfig::default(),
            temperature: 27.0,
            metrics: MetricOptions::default(),
            dc: DcSweep::differential("IINP", "IINN", -300e-6, 300e-6, 5e-6),
            ac: AcSweep {
                points_per_decade: 50,
                f_start: 1e3,
                f_stop: 10e9,
            },
            harmonics: 9,
            thd_fundamental: 1e6,
            thd_amplitudes: (1..=7).map(|k| k as f64 * 10e-6).collect(),
            temperatures: vec![0.0, 27.0, 70.0],
            derivation_input: 20e-6,
            resistor_area_um2: 0.0,
            skip_thd: false,
        }
    }
}

/// One row of the comparison table. A failed stage leaves its field empty
/// and adds a message to `errors`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub variant: DesignVariant,
    pub metrics: Option<Metrics>,
    pub area_um2: f64,
    pub derivation: Option<DerivationReport>,
    /// Midband gain per temperature.
    pub temperature_gain: Vec<(f64, Option<f64>)>,
    pub reference: ReferenceRow,
    pub errors: Vec<String>,
}

impl ComparisonRow {
    pub fn complete(&self) -> bool {
        self.errors.is_empty()
    }
}

fn stage<T>(errors: &mut Vec<String>, what: &str, r: Result<T>) -> Option<T> {
    r.map_err(|e| errors.push(format!("{what}: {e}"))).ok()
}

/// Run every analysis for one variant.
pub fn design_report(variant: DesignVariant, opts: &ReportOptions) -> Result<ComparisonRow> {
    let circuit = build_design_with(variant, &opts.design)?;
    let t = opts.temperature;
    let mut errors = Vec::new();

    let power = stage(&mut errors, "operating point", operating_point(&circuit, &opts.newton, t))
        .map(|op| op.supply_power(&circuit));
    let dc = stage(&mut errors, "dc sweep", dc_sweep(&circuit, &opts.dc, t, &opts.newton));
    let ac = stage(&mut errors, "ac sweep", ac_sweep(&circuit, &opts.ac, t, &opts.newton));
    let thd = if opts.skip_thd {
        None
    } else {
        let drive = ThdDrive::differential("IINP", "IINN", opts.thd_fundamental, opts.harmonics);
        stage(
            &mut errors,
            "thd",
            thd_sweep(&circuit, &drive, &opts.thd_amplitudes, t, &opts.newton),
        )
    };
    let metrics = dc.and_then(|dc| {
        stage(
            &mut errors,
            "metrics",
            extract_metrics(&dc, ac.as_ref(), power, thd, &opts.metrics),
        )
    });

    let probe = DesignOptions {
        input_current: opts.derivation_input,
        ..opts.design.clone()
    };
    let derivation = stage(
        &mut errors,
        "derivation",
        build_design_with(variant, &probe).and_then(|c| {
            let op = operating_point(&c, &opts.newton, t)?;
            derivation_check(&c, &op, t, metrics.as_ref().map(|m| m.midband_gain))
        }),
    );

    let mut temperature_gain = Vec::new();
    if !opts.temperatures.is_empty() {
        let runs = temperature_sweep(&circuit, &opts.temperatures, &InnerAnalysis::Dc(opts.dc.clone()), &opts.newton)?;
        for run in runs {
            let gain = run
                .result
                .and_then(|dc| Ok(extract_metrics(&dc, None, None, None, &opts.metrics)?.midband_gain));
            let label = format!("temperature {}", run.temperature);
            temperature_gain.push((run.temperature, stage(&mut errors, &label, gain)));
        }
    }

    Ok(ComparisonRow {
        variant,
        metrics,
        area_um2: area_estimate(&circuit, opts.resistor_area_um2),
        derivation,
        temperature_gain,
        reference: reference_row(variant),
        errors,
    })
}

/// Reports for several variants, computed concurrently and returned in the
/// order given.
pub fn compare_designs(variants: &[DesignVariant], opts: &ReportOptions) -> Result<Vec<ComparisonRow>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&v| s.spawn(move || design_report(v, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Analysis("design worker panicked".into()))))
            .collect()
    })
}

fn num(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map_or_else(|| "null".to_string(), sci)
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

/// Serialize the figures of one design with a fixed key order. Fields of
/// analyses that did not run are `null`.
pub fn metrics_json(
    design: &str,
    metrics: Option<&Metrics>,
    area_um2: Option<f64>,
    derivation: Option<&DerivationReport>,
) -> String {
    let m = metrics;
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"design\": {},", json_string(design));
    let _ = writeln!(s, "  \"gain_ohm\": {},", num(m.map(|m| m.midband_gain)));
    let _ = writeln!(s, "  \"bandwidth_hz\": {},", num(m.and_then(|m| m.bandwidth_3db)));
    match m {
        Some(m) => {
            let _ = writeln!(
                s,
                "  \"linear_range_ua\": [{}, {}],",
                sci(m.linear_range.0 * 1e6),
                sci(m.linear_range.1 * 1e6)
            );
        }
        None => s.push_str("  \"linear_range_ua\": null,\n"),
    }
    let _ = writeln!(s, "  \"power_uw\": {},", num(m.and_then(|m| m.static_power).map(|p| p * 1e6)));
    let _ = writeln!(s, "  \"area_um2\": {},", num(area_um2));
    let _ = writeln!(s, "  \"offset_mv\": {},", num(m.map(|m| m.output_offset * 1e3)));
    match m.and_then(|m| m.thd_curve.as_ref()) {
        Some(curve) => {
            s.push_str("  \"thd\": [");
            for (k, (a, t)) in curve.iter().enumerate() {
                if k > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{{\"iin_ua\": {}, \"thd_pct\": {}}}", sci(a * 1e6), sci(t * 100.0));
            }
            s.push_str("],\n");
        }
        None => s.push_str("  \"thd\": null,\n"),
    }
    match derivation {
        Some(d) => {
            s.push_str("  \"derivation\": {");
            let mut fields: Vec<(String, Option<f64>)> =
                d.residuals.iter().map(|(n, r)| (n.to_string(), Some(*r))).collect();
            fields.push(("i_g_a".into(), Some(d.i_g)));
            fields.push(("i_o_a".into(), Some(d.i_o)));
            fields.push(("v_o_v".into(), Some(d.v_o)));
            fields.push(("r_ds13_ohm".into(), Some(d.r_ds13)));
            fields.push(("r_ds13_chord_ohm".into(), Some(d.r_ds13_chord)));
            fields.push(("gain_predicted_ohm".into(), Some(d.gain_predicted)));
            fields.push(("gain_measured_ohm".into(), d.gain_measured));
            fields.push(("r_off_ohm".into(), d.r_off));
            for (k, (n, v)) in fields.iter().enumerate() {
                if k > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{}: {}", json_string(n), num(*v));
            }
            s.push_str("}\n");
        }
        None => s.push_str("  \"derivation\": null\n"),
    }
    s.push_str("}\n");
    s
}

pub const COMPARISON_HEADER: &str = "design,label,status,gain_ohm,bandwidth_hz,linear_lo_ua,linear_hi_ua,power_uw,\
area_um2,offset_mv,thd_max_pct,reference,ref_gain_ohm,ref_bandwidth_hz,ref_linear_lo_ua,ref_linear_hi_ua,\
ref_power_uw,ref_area_um2,ref_offset_mv";

/// The comparison table as CSV, one row per design. Empty cells mark
/// figures that could not be computed.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let cell = |v: Option<f64>| v.filter(|x| x.is_finite()).map(sci).unwrap_or_default();
    let mut s = String::from(COMPARISON_HEADER);
    s.push('\n');
    for r in rows {
        let m = r.metrics.as_ref();
        let thd_max = m
            .and_then(|m| m.thd_curve.as_ref())
            .map(|c| c.iter().map(|(_, t)| t * 100.0).fold(0.0, f64::max));
        let f = &r.reference;
        let cells = [
            r.variant.name(),
            r.variant.label().to_string(),
            if r.complete() { "ok" } else { "incomplete" }.to_string(),
            cell(m.map(|m| m.midband_gain)),
            cell(m.and_then(|m| m.bandwidth_3db)),
            cell(m.map(|m| m.linear_range.0 * 1e6)),
            cell(m.map(|m| m.linear_range.1 * 1e6)),
            cell(m.and_then(|m| m.static_power).map(|p| p * 1e6)),
            cell(Some(r.area_um2)),
            cell(m.map(|m| m.output_offset * 1e3)),
            cell(thd_max),
            REFERENCE_LABEL.to_string(),
            sci(f.gain_ohm),
            sci(f.bandwidth_hz),
            sci(f.linear_range_a.0 * 1e6),
            sci(f.linear_range_a.1 * 1e6),
            sci(f.power_w * 1e6),
            sci(f.area_um2),
            sci(f.offset_v * 1e3),
        ];
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
