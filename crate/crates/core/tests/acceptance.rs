//! Acceptance criteria 1 to 9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use memtia::analyses::{
    ac_sweep, dc_sweep, extract_metrics, thd, transient, AcSweep, DcSweep, InitialCondition, MetricOptions,
    TransientConfig,
};
use memtia::devices::{memristance, mosfet_dc, MemristorParams, MosfetParams, Polarity};
use memtia::solver::{operating_point, Engine, Excitation, Strategy};
use memtia::tia::{build_design_with, compare_designs, derivation_check, DesignOptions, DesignVariant, ReportOptions};
use memtia::{Circuit, NewtonConfig};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn circuit(text: &str) -> Circuit {
    Circuit::from_source(text, "acceptance").expect("netlist parses")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn op_voltage(c: &Circuit, node: &str) -> f64 {
    operating_point(c, &NewtonConfig::default(), 27.0).unwrap().voltage(node).unwrap()
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

fn linear_solver() -> Outcome {
    let div = circuit("divider\nV1 in 0 DC 9\nR1 in mid 2k\nR2 mid 0 1k\n");
    let v = op_voltage(&div, "mid");
    ensure!(rel(v, 3.0) <= 1e-9, "divider {v}");

    let bridge = circuit("bridge\nV1 top 0 DC 1\nR1 top a 1k\nR2 a 0 2k\nR3 top b 3k\nR4 b 0 6k\nR5 a b 5k\n");
    let (a, b) = (op_voltage(&bridge, "a"), op_voltage(&bridge, "b"));
    ensure!(rel(a, 2.0 / 3.0) <= 1e-9 && rel(b, 2.0 / 3.0) <= 1e-9, "bridge {a} {b}");

    let ladder = circuit("ladder\nV1 n0 0 DC 1\nR1 n0 n1 1k\nR2 n1 0 1k\nR3 n1 n2 1k\nR4 n2 0 1k\nR5 n2 n3 1k\nR6 n3 0 1k\n");
    for (node, exact) in [("n1", 5.0 / 13.0), ("n2", 2.0 / 13.0), ("n3", 1.0 / 13.0)] {
        let v = op_voltage(&ladder, node);
        ensure!(rel(v, exact) <= 1e-9, "ladder {node} {v} vs {exact}");
    }
    Ok("divider, bridge and ladder within 1e-9".into())
}

fn ac_oracle() -> Outcome {
    let c = circuit("rc\nV1 in 0 DC 0 AC 1\nR1 in out 1k\nC1 out 0 1p\n.probe out\n");
    let cfg = NewtonConfig::default();
    let dc = dc_sweep(&c, &DcSweep { sources: vec!["V1".into()], start: -1.0, stop: 1.0, step: 0.5 }, 27.0, &cfg)
        .map_err(|e| e.to_string())?;
    let ac = ac_sweep(&c, &AcSweep { points_per_decade: 50, f_start: 1e6, f_stop: 1e10 }, 27.0, &cfg)
        .map_err(|e| e.to_string())?;
    let m = extract_metrics(&dc, Some(&ac), None, None, &MetricOptions::default()).map_err(|e| e.to_string())?;
    let fc = 1.0 / (2.0 * PI * 1e3 * 1e-12);
    let bw = m.bandwidth_3db.ok_or("no bandwidth")?;
    ensure!(rel(bw, fc) <= 1e-3, "bandwidth {bw} vs {fc}");

    let at = ac_sweep(&c, &AcSweep { points_per_decade: 1, f_start: fc, f_stop: fc * 2.0 }, 27.0, &cfg)
        .map_err(|e| e.to_string())?;
    let phase = at.points()[0].values[1];
    ensure!((phase + 45.0).abs() <= 0.1, "phase {phase}");
    Ok(format!("f_3dB error {:.2e}, phase {phase:.6} deg", rel(bw, fc)))
}

fn rc_step(h: f64) -> f64 {
    let c = circuit("rc\nV1 in 0 DC 1\nR1 in out 1k\nC1 out 0 1n\n.probe out\n");
    let cfg = TransientConfig {
        initial: InitialCondition::Zero,
        ..TransientConfig::new(h, 1e-6)
    };
    let s = transient(&c, &cfg, 27.0, &NewtonConfig::default()).unwrap();
    s.points().last().unwrap().values[0]
}

fn transient_oracle() -> Outcome {
    let exact = 1.0 - (-1.0f64).exp();
    let e1 = rel(rc_step(1e-8), exact);
    ensure!(e1 <= 1e-3, "v(tau) error {e1}");
    let coarse = (rc_step(2e-8) - exact).abs();
    let fine = (rc_step(1e-8) - exact).abs();
    let order = (coarse / fine).log2();
    ensure!(order >= 1.8, "order {order}");
    Ok(format!("v(tau) error {e1:.2e}, observed order {order:.3}"))
}

fn memristor_oracle() -> Outcome {
    let p = MemristorParams::default();
    ensure!(memristance(&p, 1.0) == p.ron && memristance(&p, 0.0) == p.roff, "endpoints");
    let c = circuit("drift\nI1 0 a DC 1m\nXU1 a 0 memristor P=0\n");
    let s = transient(&c, &TransientConfig::new(1e-4, 0.05), 27.0, &NewtonConfig::default()).map_err(|e| e.to_string())?;
    let col = s.column(s.signal_index("x(XU1)").ok_or("no state column")?);
    let k = p.uv * p.ron / (p.d * p.d);
    let mut worst = 0.0f64;
    for (t, x) in s.axis().iter().zip(&col).skip(1) {
        let expect = k * 1e-3 * t;
        if expect < 1.0 {
            worst = worst.max(rel(*x, expect));
        }
    }
    ensure!(worst <= 1e-3, "drift error {worst}");
    Ok(format!("drift error {worst:.2e}, endpoints exact"))
}

fn sampled(f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
    let spp = 320;
    ((0..8 * spp).map(|k| f(k as f64 / spp as f64)).collect(), 1.0 / spp as f64)
}

fn thd_oracle() -> Outcome {
    let (s, dt) = sampled(|t| (2.0 * PI * t).sin());
    let pure = thd(&s, dt, 1.0, 9).map_err(|e| e.to_string())?;
    ensure!(pure <= 1e-9, "pure sine {pure}");

    let (s, dt) = sampled(|t| if (t.fract() * 320.0).round() < 160.0 { 1.0 } else { -1.0 });
    let square = thd(&s, dt, 1.0, 9).map_err(|e| e.to_string())?;
    ensure!((square - 0.4288).abs() <= 0.005 * 0.4288, "square {square}");

    let (s, dt) = sampled(|t| (2.0 * PI * t).sin() + 0.1 * (4.0 * PI * t).sin());
    let second = thd(&s, dt, 1.0, 9).map_err(|e| e.to_string())?;
    ensure!((second - 0.1).abs() <= 1e-6, "second harmonic {second}");
    Ok(format!("pure {pure:.1e}, square {square:.5}, 10% H2 {second:.9}"))
}

fn derivation() -> Outcome {
    let cfg = NewtonConfig::default();
    let v1 = DesignVariant::new(1).unwrap();
    let ideal = DesignOptions::idealized();
    let sweep = ReportOptions::default().dc;
    let c = build_design_with(v1, &ideal).map_err(|e| e.to_string())?;
    let dc = dc_sweep(&c, &sweep, 27.0, &cfg).map_err(|e| e.to_string())?;
    let m = extract_metrics(&dc, None, None, None, &MetricOptions::default()).map_err(|e| e.to_string())?;
    let (lo, hi) = m.linear_range;
    let (x, y) = (dc.axis(), dc.column(0));
    let mut worst = rel(m.midband_gain, 10e3);
    for j in 0..x.len() - 1 {
        if x[j] >= lo && x[j + 1] <= hi {
            worst = worst.max(rel((y[j + 1] - y[j]) / (x[j + 1] - x[j]), 10e3));
        }
    }
    ensure!(worst <= 0.02, "transimpedance deviates {worst} from R1");

    let driven = build_design_with(v1, &DesignOptions { input_current: 20e-6, ..ideal.clone() }).map_err(|e| e.to_string())?;
    let op = operating_point(&driven, &cfg, 27.0).map_err(|e| e.to_string())?;
    let report = derivation_check(&driven, &op, 27.0, Some(m.midband_gain)).map_err(|e| e.to_string())?;
    for eq in ["eq1", "eq6", "eq7", "eq10"] {
        let r = report.residual(eq).ok_or(format!("{eq} missing"))?;
        ensure!(r <= 0.01, "{eq} residual {r}");
    }

    let mem = build_design_with(v1, &DesignOptions { memristive_bias_only: true, ..ideal }).map_err(|e| e.to_string())?;
    let dc_mem = dc_sweep(&mem, &sweep, 27.0, &cfg).map_err(|e| e.to_string())?;
    let g_mem = extract_metrics(&dc_mem, None, None, None, &MetricOptions::default()).map_err(|e| e.to_string())?.midband_gain;
    let shift = rel(g_mem, m.midband_gain);
    ensure!(shift < 1e-3, "memristive bias shifts gain by {shift}");
    Ok(format!(
        "gain {:.2} ohm over [{:.0}, {:.0}] uA, max residual {:.1e}, memristor shift {shift:.1e}",
        m.midband_gain,
        lo * 1e6,
        hi * 1e6,
        report.max_residual()
    ))
}

fn structural() -> Outcome {
    let rows = compare_designs(&DesignVariant::all(), &ReportOptions::default()).map_err(|e| e.to_string())?;
    let mut power = Vec::new();
    for row in &rows {
        let name = row.variant.name();
        ensure!(row.complete(), "{name}: {:?}", row.errors);
        let m = row.metrics.as_ref().ok_or(format!("{name}: no metrics"))?;
        ensure!(m.linear_range.0 < 0.0 && m.linear_range.1 > 0.0, "{name}: plateau {:?}", m.linear_range);
        ensure!(m.output_offset.abs() <= 1e-6, "{name}: offset {}", m.output_offset);
        power.push(m.static_power.ok_or(format!("{name}: no power"))?);
    }
    ensure!(power[1] < power[0], "variant 2 power {} not below variant 1 {}", power[1], power[0]);
    Ok(format!("plateaus and offsets ok, P1 {:.1} uW > P2 {:.1} uW", power[0] * 1e6, power[1] * 1e6))
}

fn newton_robustness() -> Outcome {
    let c = circuit("diode\n.model N NMOS\nV1 vdd 0 1.8\nR1 vdd d 10k\nM1 d d 0 0 N W=20u L=1u\n");
    let p = MosfetParams::default_card(Polarity::Nmos).with_geometry(20e-6, 1e-6);
    let oracle = bisect(0.0, 1.8, |v| (1.8 - v) / 10e3 - mosfet_dc(&p, v, v, 27.0).id);
    let v = op_voltage(&c, "d");
    ensure!((v - oracle).abs() <= 1e-6, "diode {v} vs {oracle}");

    let hard = circuit("hard\n.model N NMOS\nV1 top 0 200\nR1 top a 100k\nR2 a 0 100k\nR3 top b 1meg\nM1 b a 0 0 N W=20u L=1u\n");
    let op = operating_point(&hard, &NewtonConfig::default(), 27.0).map_err(|e| e.to_string())?;
    let strategy = op.state.report.strategy;
    ensure!(strategy != Strategy::Direct, "direct Newton converged on the hard start");
    let b_oracle = bisect(0.0, 200.0, |v| (200.0 - v) / 1e6 - mosfet_dc(&p, op.voltage("a").unwrap(), v, 27.0).id);
    let b = op.voltage("b").unwrap();
    ensure!((b - b_oracle).abs() <= 1e-6, "hard start {b} vs {b_oracle}");
    Ok(format!("diode error {:.1e} V, hard start solved by {}", (v - oracle).abs(), strategy.as_str()))
}

fn kcl_holds(c: &Circuit) -> Result<(), String> {
    let cfg = NewtonConfig::default();
    let engine = Engine::new(c, 27.0).map_err(|e| e.to_string())?;
    let mem = engine.initial_memristor_states();
    let exc = Excitation::default();
    let (x, _) = engine.solve(None, &exc, &mem, None, &cfg).map_err(|e| e.to_string())?;
    for (node, r, scale) in engine.kcl_check(&x, &exc, &mem, cfg.gmin) {
        ensure!(r.abs() <= cfg.abstol_current + cfg.reltol * scale, "{}: KCL residual {r} at {node}", c.title());
    }
    Ok(())
}

fn conservation() -> Outcome {
    let cfg = NewtonConfig::default();
    let linear = [
        "divider\nV1 in 0 DC 9\nR1 in mid 2k\nR2 mid 0 1k\n",
        "bridge\nV1 top 0 DC 1\nR1 top a 1k\nR2 a 0 2k\nR3 top b 3k\nR4 b 0 6k\nR5 a b 5k\n",
        "mixed\nV1 a 0 DC 2\nI1 0 b DC 1m\nR1 a b 1k\nR2 b 0 3k\nR3 a 0 500\nXU1 b 0 memristor X0=0.3\n",
    ];
    let mut worst_linear = 0.0f64;
    for text in linear {
        let c = circuit(text);
        let op = operating_point(&c, &cfg, 27.0).map_err(|e| e.to_string())?;
        let e = rel(op.dissipated_power, op.total_source_power());
        ensure!(e <= 1e-9, "{}: power balance {e}", c.title());
        worst_linear = worst_linear.max(e);
        kcl_holds(&c)?;
    }
    let mut worst_tia = 0.0f64;
    for v in DesignVariant::all() {
        let c = build_design_with(v, &DesignOptions::default()).map_err(|e| e.to_string())?;
        let op = operating_point(&c, &cfg, 27.0).map_err(|e| e.to_string())?;
        let e = rel(op.dissipated_power, op.total_source_power());
        ensure!(e <= 1e-6, "{}: power balance {e}", v.name());
        worst_tia = worst_tia.max(e);
        kcl_holds(&c)?;
    }
    Ok(format!("power balance linear {worst_linear:.1e}, amplifiers {worst_tia:.1e}; KCL holds"))
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Outcome, u64); 9] = [
        (1, "linear solver oracle", linear_solver, 1),
        (2, "AC oracle", ac_oracle, 1),
        (3, "transient oracle", transient_oracle, 1),
        (4, "memristor state oracle", memristor_oracle, 1),
        (5, "THD oracle", thd_oracle, 1),
        (6, "gain derivation check", derivation, 10),
        (7, "structural claims", structural, 60),
        (8, "Newton robustness", newton_robustness, 5),
        (9, "conservation suite", conservation, 5),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()))
            .and_then(|msg| {
                let took = start.elapsed();
                if took > Duration::from_secs(limit) {
                    Err(format!("took {:.2} s, limit {limit} s", took.as_secs_f64()))
                } else {
                    Ok(msg)
                }
            });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {id} ({name}, {secs:.2} s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}, {secs:.2} s): {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
