//! Render a [`Circuit`] back into the netlist grammar.
//!
//! Numbers use Rust's shortest round-trip formatting, so re-parsing the
//! output reproduces every value bit for bit.

use std::fmt::Write;

use super::{Circuit, Directive, ElementKind, NodeId, Probe};
use crate::devices::SourceWaveform;

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn source(w: &SourceWaveform) -> String {
    let mut parts = Vec::new();
    if let Some(dc) = w.dc {
        parts.push(format!("DC {}", num(dc)));
    }
    if let Some(s) = w.sin {
        parts.push(format!(
            "SIN({} {} {})",
            num(s.offset),
            num(s.amplitude),
            num(s.frequency)
        ));
    }
    if let Some(ac) = w.ac {
        parts.push(format!("AC {}", num(ac)));
    }
    parts.join(" ")
}

pub(super) fn emit(c: &Circuit) -> String {
    let n = |id: &NodeId| c.node_name(*id).to_owned();
    let mut out = String::new();
    let title = if c.title().is_empty() { "untitled" } else { c.title() };
    writeln!(out, "{title}").unwrap();
    for (name, card) in c.models() {
        let p = &card.params;
        writeln!(
            out,
            ".model {name} {} (KP={} VTO={} LAMBDA={} NN={} COXA={} TCV={} BEX={} CGSO={} CGDO={})",
            card.polarity.keyword(),
            num(p.kp),
            num(p.vto),
            num(p.lambda),
            num(p.n_n),
            num(p.coxa),
            num(p.tcv),
            num(p.bex),
            num(p.cgso),
            num(p.cgdo)
        )
        .unwrap();
    }
    for e in c.elements() {
        let line = match &e.kind {
            ElementKind::Resistor { a, b, resistance } => {
                format!("{} {} {} {}", e.name, n(a), n(b), num(*resistance))
            }
            ElementKind::Capacitor { a, b, capacitance } => {
                format!("{} {} {} {}", e.name, n(a), n(b), num(*capacitance))
            }
            ElementKind::VoltageSource { pos, neg, waveform }
            | ElementKind::CurrentSource { pos, neg, waveform } => {
                format!("{} {} {} {}", e.name, n(pos), n(neg), source(waveform))
            }
            ElementKind::Mosfet {
                drain,
                gate,
                source,
                bulk,
                model,
                params,
            } => format!(
                "{} {} {} {} {} {model} W={} L={}",
                e.name,
                n(drain),
                n(gate),
                n(source),
                n(bulk),
                num(params.w),
                num(params.l)
            ),
            ElementKind::Memristor { pos, neg, params } => format!(
                "{} {} {} memristor RON={} ROFF={} D={} UV={} X0={} P={}",
                e.name,
                n(pos),
                n(neg),
                num(params.ron),
                num(params.roff),
                num(params.d),
                num(params.uv),
                num(params.x0),
                params.p
            ),
        };
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    for d in c.directives() {
        let line = match d {
            Directive::Op => ".op".to_owned(),
            Directive::Dc {
                sources,
                start,
                stop,
                step,
            } => format!(
                ".dc {} {} {} {}",
                sources.join(" "),
                num(*start),
                num(*stop),
                num(*step)
            ),
            Directive::Ac {
                points_per_decade,
                f_start,
                f_stop,
            } => format!(".ac dec {points_per_decade} {} {}", num(*f_start), num(*f_stop)),
            Directive::Tran { step, stop } => format!(".tran {} {}", num(*step), num(*stop)),
            Directive::Temp(t) => format!(
                ".temp {}",
                t.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
            ),
            Directive::Thd {
                fundamental,
                harmonics,
            } => format!(".thd {} {harmonics}", num(*fundamental)),
            Directive::Nodeset(sets) => format!(
                ".nodeset {}",
                sets.iter()
                    .map(|(node, v)| format!("V({node})={}", num(*v)))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
            Directive::Probe(Probe::Node(a)) => format!(".probe {a}"),
            Directive::Probe(Probe::Diff(a, b)) => format!(".probe {a} {b}"),
        };
        writeln!(out, "{line}").unwrap();
    }
    out.push_str(".end\n");
    out
}
