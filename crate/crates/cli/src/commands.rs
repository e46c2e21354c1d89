use std::fmt::Write as _;
use std::path::Path;

use memtia::analyses::{
    ac_sweep, dc_sweep, extract_metrics, temperature_sweep, thd_sweep, transient, AcSweep, DcSweep, InnerAnalysis,
    MetricOptions, ThdDrive, TransientConfig,
};
use memtia::format::sci;
use memtia::netlist::{Directive, ElementKind};
use memtia::solver::operating_point;
use memtia::tia::{
    build_design_with, compare_designs, comparison_csv, derivation_check, metrics_json, resolve_builtin,
    DesignOptions, DesignVariant, ReportOptions,
};
use memtia::{Circuit, Error, NewtonConfig, SweepSeries};

use crate::args::{Command, Common, DerivationArgs, Format, InputArgs, ReportArgs};
use crate::output::{quote, write_atomic};

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or flags (exit 1).
    User(String),
    /// Non-convergence, singular systems or I/O (exit 2).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::User(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::User(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::User(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("I/O error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

struct Loaded {
    design: String,
    circuit: Circuit,
}

fn load(input: &str) -> Result<Loaded, Failure> {
    if input.starts_with("builtin:") {
        let variant = resolve_builtin(input)
            .ok_or_else(|| Failure::User(format!("unknown built-in design '{input}' (use builtin:tia1 … builtin:tia4)")))?;
        let circuit = build_design_with(variant, &DesignOptions::default())?;
        return Ok(Loaded {
            design: variant.name(),
            circuit,
        });
    }
    let path = Path::new(input);
    let text = std::fs::read_to_string(path).map_err(|e| Failure::User(format!("cannot read '{input}': {e}")))?;
    let circuit = Circuit::from_source(&text, input)?;
    let design = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("circuit")
        .to_string();
    Ok(Loaded { design, circuit })
}

fn check_common(c: &Common) -> Outcome {
    if !(c.lin_tol > 0.0 && c.lin_tol < 1.0) {
        return Err(Failure::User(format!("--lin-tol {} must lie in (0, 1)", c.lin_tol)));
    }
    if c.harmonics.is_some_and(|n| n < 2) {
        return Err(Failure::User("--harmonics must be at least 2".into()));
    }
    if !(-100.0..=300.0).contains(&c.temp) {
        return Err(Failure::User(format!("--temp {} outside [-100, 300] °C", c.temp)));
    }
    Ok(())
}

fn emit(common: &Common, design: &str, analysis: &str, csv: &str, json: &str) -> Outcome {
    let name = format!("{design}_{analysis}.{}", common.format.extension());
    let body = match common.format {
        Format::Csv => csv,
        Format::Json => json,
    };
    let path = write_atomic(&common.out, &name, body)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn emit_series(common: &Common, design: &str, analysis: &str, series: &SweepSeries) -> Outcome {
    emit(common, design, analysis, &series.to_csv(), &series.to_json())
}

fn missing_card(card: &str) -> Failure {
    Failure::User(format!("netlist has no {card} card"))
}

pub fn run(command: Command) -> Outcome {
    let newton = NewtonConfig::default();
    match command {
        Command::Parse(a) => parse(&a),
        Command::Op(a) => op(&a, &newton),
        Command::Dc(a) => {
            check_common(&a.common)?;
            let l = load(&a.input)?;
            let sweep = DcSweep::from_circuit(&l.circuit).ok_or_else(|| missing_card(".dc"))?;
            let series = dc_sweep(&l.circuit, &sweep, a.common.temp, &newton)?;
            let bad = series.points().iter().filter(|p| !p.converged).count();
            if bad > 0 {
                eprintln!("warning: {bad} sweep points did not converge (marked #NC)");
            }
            emit_series(&a.common, &l.design, "dc", &series)
        }
        Command::Ac(a) => {
            check_common(&a.common)?;
            let l = load(&a.input)?;
            let sweep = AcSweep::from_circuit(&l.circuit).ok_or_else(|| missing_card(".ac"))?;
            let series = ac_sweep(&l.circuit, &sweep, a.common.temp, &newton)?;
            emit_series(&a.common, &l.design, "ac", &series)
        }
        Command::Tran(a) => {
            check_common(&a.common)?;
            let l = load(&a.input)?;
            let cfg = TransientConfig::from_circuit(&l.circuit).ok_or_else(|| missing_card(".tran"))?;
            if cfg.validate().is_err() {
                return Err(Failure::User(format!(
                    ".tran step {} must not exceed stop/10 ({})",
                    cfg.step,
                    cfg.stop / 10.0
                )));
            }
            let series = transient(&l.circuit, &cfg, a.common.temp, &newton)?;
            emit_series(&a.common, &l.design, "tran", &series)
        }
        Command::Thd(a) => thd(&a, &newton),
        Command::Temp(a) => temp(&a, &newton),
        Command::TiaReport(a) => report(&a, &newton),
        Command::CheckDerivation(a) => check_derivation(&a, &newton),
    }
}

fn kind_name(k: &ElementKind) -> &'static str {
    match k {
        ElementKind::Resistor { .. } => "resistor",
        ElementKind::Capacitor { .. } => "capacitor",
        ElementKind::VoltageSource { .. } => "vsource",
        ElementKind::CurrentSource { .. } => "isource",
        ElementKind::Mosfet { .. } => "mosfet",
        ElementKind::Memristor { .. } => "memristor",
    }
}

fn parse(a: &InputArgs) -> Outcome {
    let l = load(&a.input)?;
    let c = &l.circuit;
    for w in c.warnings() {
        eprintln!("warning: {w}");
    }
    let nodes_of = |e: &memtia::netlist::Element| {
        e.nodes().iter().map(|n| c.node_name(*n).to_string()).collect::<Vec<_>>()
    };
    let mut csv = String::from("element,kind,nodes\n");
    for e in c.elements() {
        let _ = writeln!(csv, "{},{},{}", e.name, kind_name(&e.kind), nodes_of(e).join(" "));
    }
    let mut json = String::from("{\n");
    let _ = writeln!(json, "  \"design\": {},", quote(&l.design));
    let _ = writeln!(json, "  \"title\": {},", quote(c.title()));
    let names: Vec<String> = c.nodes().iter().map(|n| quote(n)).collect();
    let _ = writeln!(json, "  \"nodes\": [{}],", names.join(", "));
    json.push_str("  \"elements\": [");
    for (k, e) in c.elements().iter().enumerate() {
        let nodes: Vec<String> = nodes_of(e).iter().map(|n| quote(n)).collect();
        let _ = write!(
            json,
            "{}{{\"name\": {}, \"kind\": \"{}\", \"nodes\": [{}]}}",
            if k == 0 { "\n    " } else { ",\n    " },
            quote(&e.name),
            kind_name(&e.kind),
            nodes.join(", ")
        );
    }
    json.push_str("\n  ],\n");
    let models: Vec<String> = c.models().map(|(n, _)| quote(n)).collect();
    let _ = writeln!(json, "  \"models\": [{}],", models.join(", "));
    let warnings: Vec<String> = c.warnings().iter().map(|w| quote(w)).collect();
    let _ = writeln!(json, "  \"warnings\": [{}]", warnings.join(", "));
    json.push_str("}\n");
    println!(
        "{}: {} nodes, {} elements ({} MOSFETs)",
        l.design,
        c.node_count(),
        c.elements().len(),
        c.mosfet_count()
    );
    let path = write_atomic(&a.common.out, &format!("{}.cir", l.design), &c.to_netlist())?;
    println!("wrote {}", path.display());
    emit(&a.common, &l.design, "parse", &csv, &json)
}

fn op(a: &InputArgs, newton: &NewtonConfig) -> Outcome {
    check_common(&a.common)?;
    let l = load(&a.input)?;
    let op = operating_point(&l.circuit, newton, a.common.temp)?;
    let power = op.supply_power(&l.circuit);
    let report = &op.state.report;

    let mut csv = String::from("quantity,value\n");
    let _ = writeln!(csv, "total_power_w,{}", sci(power));
    for (n, v) in &op.node_voltages {
        let _ = writeln!(csv, "v({n}),{}", sci(*v));
    }
    for (n, i) in &op.branch_currents {
        let _ = writeln!(csv, "i({n}),{}", sci(*i));
    }
    for (n, p) in &op.source_power {
        let _ = writeln!(csv, "p({n}),{}", sci(*p));
    }
    for m in &op.mosfets {
        let _ = writeln!(csv, "id({}),{}", m.name, sci(m.id));
    }

    let map = |items: &[(String, f64)]| {
        items
            .iter()
            .map(|(n, v)| format!("{}: {}", quote(n), sci(*v)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut json = String::from("{\n");
    let _ = writeln!(json, "  \"design\": {},", quote(&l.design));
    let _ = writeln!(json, "  \"temperature_c\": {},", sci(a.common.temp));
    let _ = writeln!(json, "  \"strategy\": \"{}\",", report.strategy.as_str());
    let _ = writeln!(json, "  \"iterations\": {},", report.iterations);
    let _ = writeln!(json, "  \"total_power_w\": {},", sci(power));
    let _ = writeln!(json, "  \"node_voltages\": {{{}}},", map(&op.node_voltages));
    let _ = writeln!(json, "  \"branch_currents\": {{{}}},", map(&op.branch_currents));
    let _ = writeln!(json, "  \"source_power_w\": {{{}}},", map(&op.source_power));
    json.push_str("  \"mosfets\": [");
    for (k, m) in op.mosfets.iter().enumerate() {
        let _ = write!(
            json,
            "{}{{\"name\": {}, \"region\": \"{}\", \"vgs\": {}, \"vds\": {}, \"id\": {}, \"gm\": {}, \"gds\": {}}}",
            if k == 0 { "\n    " } else { ",\n    " },
            quote(&m.name),
            m.region.as_str(),
            sci(m.vgs),
            sci(m.vds),
            sci(m.id),
            sci(m.gm),
            sci(m.gds)
        );
    }
    json.push_str(if op.mosfets.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
    println!(
        "{}: converged ({}, {} iterations), static power {:.3} µW",
        l.design,
        report.strategy.as_str(),
        report.iterations,
        power * 1e6
    );
    emit(&a.common, &l.design, "op", &csv, &json)
}

fn thd_card(circuit: &Circuit) -> Option<(f64, usize)> {
    circuit.directives().iter().find_map(|d| match d {
        Directive::Thd {
            fundamental,
            harmonics,
        } => Some((*fundamental, *harmonics)),
        _ => None,
    })
}

fn thd(a: &InputArgs, newton: &NewtonConfig) -> Outcome {
    check_common(&a.common)?;
    let l = load(&a.input)?;
    let (f0, n) = thd_card(&l.circuit).ok_or_else(|| missing_card(".thd"))?;
    let harmonics = a.common.harmonics.unwrap_or(n);
    let sweep = DcSweep::from_circuit(&l.circuit).ok_or_else(|| missing_card(".dc (it names the drive sources)"))?;
    let drive = ThdDrive {
        sources: sweep.sources.clone(),
        ..ThdDrive::differential("", "", f0, harmonics)
    };
    let amplitudes: Vec<f64> = ReportOptions::default().thd_amplitudes;
    let curve = thd_sweep(&l.circuit, &drive, &amplitudes, a.common.temp, newton)?;
    let mut series = SweepSeries::new("amplitude", "A", vec!["thd".into()]);
    for (amp, t) in curve {
        series.push(amp, vec![t], true)?;
    }
    emit_series(&a.common, &l.design, "thd", &series)
}

fn temp(a: &InputArgs, newton: &NewtonConfig) -> Outcome {
    check_common(&a.common)?;
    let l = load(&a.input)?;
    let temps = l
        .circuit
        .directives()
        .iter()
        .find_map(|d| match d {
            Directive::Temp(t) => Some(t.clone()),
            _ => None,
        })
        .unwrap_or_else(|| ReportOptions::default().temperatures);
    let sweep = DcSweep::from_circuit(&l.circuit).ok_or_else(|| missing_card(".dc"))?;
    let runs = temperature_sweep(&l.circuit, &temps, &InnerAnalysis::Dc(sweep.clone()), newton)?;

    let grid = {
        let mut g = sweep.grid()?;
        g.sort_by(f64::total_cmp);
        g
    };
    let mut signals = Vec::new();
    let mut columns = Vec::new();
    for run in &runs {
        match &run.result {
            Ok(s) => {
                let s = s.ascending();
                let label = s.signals.first().cloned().unwrap_or_else(|| "out".into());
                signals.push(format!("{label}@{}C", run.temperature));
                let conv: Vec<bool> = s.points().iter().map(|p| p.converged).collect();
                columns.push((s.column(0), conv));
                match extract_metrics(&s, None, None, None, &MetricOptions::default()) {
                    Ok(m) => println!("T = {} °C: gain {:.3} Ω", run.temperature, m.midband_gain),
                    Err(e) => println!("T = {} °C: {e}", run.temperature),
                }
            }
            Err(e) => {
                eprintln!("warning: T = {} °C failed: {e}", run.temperature);
                signals.push(format!("failed@{}C", run.temperature));
                columns.push((vec![f64::NAN; grid.len()], vec![false; grid.len()]));
            }
        }
    }
    let mut out = SweepSeries::new(&sweep_axis(&sweep), "A", signals);
    for (k, &x) in grid.iter().enumerate() {
        let values: Vec<f64> = columns.iter().map(|(v, _)| v[k]).collect();
        let ok = columns.iter().all(|(_, c)| c[k]);
        out.push(x, values, ok)?;
    }
    emit_series(&a.common, &l.design, "temp", &out)
}

fn sweep_axis(s: &DcSweep) -> String {
    s.sources.join("-").to_lowercase()
}

fn variants(ids: &[u8]) -> Result<Vec<DesignVariant>, Failure> {
    if ids.is_empty() {
        return Err(Failure::User("--designs is empty".into()));
    }
    ids.iter()
        .map(|&id| DesignVariant::new(id).map_err(Failure::from))
        .collect()
}

fn report(a: &ReportArgs, newton: &NewtonConfig) -> Outcome {
    check_common(&a.common)?;
    let variants = variants(&a.designs)?;
    let mut opts = ReportOptions {
        newton: *newton,
        temperature: a.common.temp,
        skip_thd: a.no_thd,
        ..ReportOptions::default()
    };
    opts.metrics.lin_tol = a.common.lin_tol;
    if let Some(n) = a.common.harmonics {
        opts.harmonics = n;
    }
    if a.idealized {
        opts.design = DesignOptions::idealized();
    }
    let rows = compare_designs(&variants, &opts)?;
    match a.common.format {
        Format::Csv => {
            let path = write_atomic(&a.common.out, "comparison_tia-report.csv", &comparison_csv(&rows))?;
            println!("wrote {}", path.display());
        }
        Format::Json => {
            for r in &rows {
                let json = metrics_json(&r.variant.name(), r.metrics.as_ref(), Some(r.area_um2), r.derivation.as_ref());
                let path = write_atomic(&a.common.out, &format!("{}_tia-report.json", r.variant.name()), &json)?;
                println!("wrote {}", path.display());
            }
        }
    }
    let mut incomplete = Vec::new();
    for r in &rows {
        match &r.metrics {
            Some(m) => println!(
                "{}: gain {:.1} Ω, bandwidth {} MHz, power {} µW, area {:.3} µm²",
                r.variant.name(),
                m.midband_gain,
                m.bandwidth_3db.map_or("-".into(), |b| format!("{:.3}", b / 1e6)),
                m.static_power.map_or("-".into(), |p| format!("{:.1}", p * 1e6)),
                r.area_um2
            ),
            None => println!("{}: incomplete", r.variant.name()),
        }
        for e in &r.errors {
            eprintln!("{}: {e}", r.variant.name());
        }
        if !r.complete() {
            incomplete.push(r.variant.name());
        }
    }
    if incomplete.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("incomplete rows: {}", incomplete.join(", "))))
    }
}

fn check_derivation(a: &DerivationArgs, newton: &NewtonConfig) -> Outcome {
    check_common(&a.common)?;
    let t = a.common.temp;
    let (design, probe, plain) = if a.input.starts_with("builtin:") {
        let v = resolve_builtin(&a.input)
            .ok_or_else(|| Failure::User(format!("unknown built-in design '{}'", a.input)))?;
        let mut opts = if a.idealized {
            DesignOptions::idealized()
        } else {
            DesignOptions::default()
        };
        opts.memristive_bias_only = a.memristive_bias;
        let plain = build_design_with(v, &opts)?;
        opts.input_current = a.input_ua * 1e-6;
        (v.name(), build_design_with(v, &opts)?, plain)
    } else {
        let l = load(&a.input)?;
        (l.design, l.circuit.clone(), l.circuit)
    };
    let gain = match DcSweep::from_circuit(&plain) {
        Some(sweep) => {
            let dc = dc_sweep(&plain, &sweep, t, newton)?;
            let opts = MetricOptions {
                lin_tol: a.common.lin_tol,
                ..MetricOptions::default()
            };
            Some(extract_metrics(&dc, None, None, None, &opts)?.midband_gain)
        }
        None => None,
    };
    let op = operating_point(&probe, newton, t)?;
    let d = derivation_check(&probe, &op, t, gain)?;

    let mut rows: Vec<(String, Option<f64>)> = d.residuals.iter().map(|(n, r)| (n.to_string(), Some(*r))).collect();
    rows.extend([
        ("i_g_a".to_string(), Some(d.i_g)),
        ("i_o_a".into(), Some(d.i_o)),
        ("v_o_v".into(), Some(d.v_o)),
        ("r1_ohm".into(), Some(d.r1)),
        ("r_ds13_ohm".into(), Some(d.r_ds13)),
        ("r_ds13_chord_ohm".into(), Some(d.r_ds13_chord)),
        ("v_ds_v".into(), Some(d.v_ds)),
        ("gain_predicted_ohm".into(), Some(d.gain_predicted)),
        ("gain_measured_ohm".into(), d.gain_measured),
        ("gain_error".into(), d.gain_error()),
        ("r_off_ohm".into(), d.r_off),
    ]);
    let cell = |v: &Option<f64>| v.filter(|x| x.is_finite()).map(sci);
    let mut csv = String::from("quantity,value\n");
    let mut fields = Vec::new();
    for (n, v) in &rows {
        let _ = writeln!(csv, "{n},{}", cell(v).unwrap_or_default());
        fields.push(format!("{}: {}", quote(n), cell(v).unwrap_or_else(|| "null".into())));
    }
    let json = format!(
        "{{\n  \"design\": {},\n  \"derivation\": {{{}}}\n}}\n",
        quote(&design),
        fields.join(", ")
    );
    println!(
        "{design}: predicted gain {:.3} Ω, measured {}, max residual {:.3e}",
        d.gain_predicted,
        d.gain_measured.map_or("-".into(), |g| format!("{g:.3} Ω")),
        d.max_residual()
    );
    emit(&a.common, &design, "check-derivation", &csv, &json)
}
