//! Netlist builders for the four amplifier variants.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::netlist::Circuit;

/// Reference sizing per device group, in metres: (W, L).
const SIZES: [(&str, f64, f64); 5] = [
    ("quad", 20e-6, 1e-6),
    ("cascode", 170e-6, 1e-6),
    ("mirror_o", 168.6e-6, 1e-6),
    ("mirror_g13", 0.707e-6, 1e-6),
    ("mirror_g15", 500e-6, 1e-6),
];

pub const SUPPLY_V: f64 = 1.8;
pub const BIAS_RESISTANCE: f64 = 10e3;

/// One of the four amplifier designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignVariant {
    pub id: u8,
}

impl DesignVariant {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=4).contains(&id) {
            Ok(DesignVariant { id })
        } else {
            Err(Error::Circuit(format!("design variant {id} not in 1..4")))
        }
    }

    pub fn all() -> [DesignVariant; 4] {
        [1, 2, 3, 4].map(|id| DesignVariant { id })
    }

    /// R1, M6 and M9 are memristors.
    pub fn memristive(self) -> bool {
        self.id % 2 == 0
    }

    /// Divisor applied to every W and L.
    pub fn scale(self) -> f64 {
        if self.id >= 3 {
            5.0
        } else {
            1.0
        }
    }

    pub fn name(self) -> String {
        format!("tia{}", self.id)
    }

    pub fn label(self) -> &'static str {
        match self.id {
            1 => "original",
            2 => "memristive",
            3 => "scaled",
            _ => "scaled memristive",
        }
    }

    /// (W, L) of a named group after scaling.
    pub fn size(self, group: &str) -> (f64, f64) {
        let (_, w, l) = SIZES
            .iter()
            .find(|(g, _, _)| *g == group)
            .copied()
            .expect("known size group");
        (w / self.scale(), l / self.scale())
    }
}

/// Build-time knobs. The default reproduces the reference designs.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    /// Sets LAMBDA = 0 on every device, which makes the quad and all
    /// mirrors ideal.
    pub idealized: bool,
    pub load_capacitance: f64,
    pub bias_resistance: f64,
    /// Memristor card OFF resistance.
    pub roff: f64,
    pub memristor_x0: f64,
    /// Override R1 with a memristor even in a transistor-only variant.
    pub memristive_bias_only: bool,
    /// Differential DC input current `I_in+ − I_in−` (A), split ±1/2.
    pub input_current: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            idealized: false,
            load_capacitance: 1e-12,
            bias_resistance: BIAS_RESISTANCE,
            roff: BIAS_RESISTANCE,
            memristor_x0: 0.0,
            memristive_bias_only: false,
            input_current: 0.0,
        }
    }
}

impl DesignOptions {
    pub fn idealized() -> Self {
        DesignOptions {
            idealized: true,
            ..Self::default()
        }
    }
}

/// Resolve a `builtin:tiaN` reference.
pub fn resolve_builtin(name: &str) -> Option<DesignVariant> {
    let rest = name.strip_prefix("builtin:tia")?;
    let id: u8 = rest.parse().ok()?;
    DesignVariant::new(id).ok()
}

fn um(v: f64) -> String {
    let u = v * 1e6;
    let s = format!("{u:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}u")
}

/// Netlist text for a variant.
pub fn design_netlist(variant: DesignVariant, opts: &DesignOptions) -> String {
    let mut t = String::new();
    let mem = variant.memristive();
    let mem_bias = mem || opts.memristive_bias_only;
    let _ = writeln!(
        t,
        "fully differential TIA, design {} ({})",
        variant.id,
        variant.label()
    );
    let lambda = |l: f64| if opts.idealized { 0.0 } else { l };
    let _ = writeln!(t, ".model NMOSA NMOS (LAMBDA={})", lambda(0.06));
    let _ = writeln!(t, ".model PMOSA PMOS (LAMBDA={})", lambda(0.08));
    let _ = writeln!(t, "VDD vdd 0 DC {SUPPLY_V}");
    let memcard = format!("memristor ROFF={} X0={}", opts.roff, opts.memristor_x0);
    let m = |t: &mut String, name: &str, d: &str, g: &str, s: &str, pmos: bool, group: &str| {
        let (w, l) = variant.size(group);
        let (model, b) = if pmos { ("PMOSA", "vdd") } else { ("NMOSA", "0") };
        let _ = writeln!(t, "{name} {d} {g} {s} {b} {model} W={} L={}", um(w), um(l));
    };

    // bias branch
    if mem_bias {
        let _ = writeln!(t, "XU1 vdd vo {memcard}");
    } else {
        let _ = writeln!(t, "R1 vdd vo {}", opts.bias_resistance);
    }
    m(&mut t, "M13", "vo", "vo", "0", false, "mirror_g13");
    m(&mut t, "M14", "pg", "vo", "0", false, "mirror_g13");
    m(&mut t, "M15", "pg", "pg", "vdd", true, "mirror_g15");
    m(&mut t, "M16", "d1", "pg", "vdd", true, "mirror_g15");

    // branch 2: M2 defines I_O, M10 mirrors it, M6 holds V_ds2
    m(&mut t, "M10", "g1", "g1", "vdd", true, "mirror_o");
    if mem {
        let _ = writeln!(t, "XU2 g1 d2 {memcard}");
    } else {
        m(&mut t, "M6", "g1", "vc", "d2", false, "cascode");
    }
    m(&mut t, "M2", "d2", "vo", "0", false, "quad");

    // branch 1: I_O copy plus injected I_G; M5 sets the cascode gate
    if mem {
        let _ = writeln!(t, "XU3 vdd vc {memcard}");
    } else {
        m(&mut t, "M9", "vc", "g1", "vdd", true, "mirror_o");
    }
    m(&mut t, "M5", "vc", "vc", "d1", false, "cascode");
    m(&mut t, "M1", "d1", "vdd", "0", false, "quad");

    // output branches
    for (k, out, d, src) in [(3, "outp", "d3", "IINP"), (4, "outn", "d4", "IINN")] {
        m(&mut t, &format!("M{}", k + 8), out, "g1", "vdd", true, "mirror_o");
        m(&mut t, &format!("M{}", k + 4), out, "vc", d, false, "cascode");
        m(&mut t, &format!("M{k}"), d, out, "0", false, "quad");
        let sign = if k == 3 { 0.5 } else { -0.5 };
        let _ = writeln!(t, "{src} 0 {d} DC {} AC {sign}", sign * opts.input_current + 0.0);
    }
    let _ = writeln!(t, "CLP outp 0 {}", opts.load_capacitance);
    let _ = writeln!(t, "CLN outn 0 {}", opts.load_capacitance);
    let g1 = if mem { 1.25 } else { 1.22 };
    let _ = writeln!(
        t,
        ".nodeset V(vo)=1.32 V(pg)=1.29 V(g1)={g1} V(vc)=0.55 V(d1)=0.03 V(d2)=0.03"
    );
    let _ = writeln!(
        t,
        "+ V(outp)=1.3 V(outn)=1.3 V(d3)=0.03 V(d4)=0.03"
    );
    let _ = writeln!(t, ".probe outp outn");
    let _ = writeln!(t, ".op");
    let _ = writeln!(t, ".dc IINP IINN -300u 300u 5u");
    let _ = writeln!(t, ".ac dec 50 1k 10g");
    let _ = writeln!(t, ".tran 3.125n 8u");
    let _ = writeln!(t, ".thd 1meg 9");
    let _ = writeln!(t, ".temp 0 27 70");
    t.push_str(".end\n");
    t
}

/// Elaborated circuit for a variant with default options.
pub fn build_design(variant: u8) -> Result<Circuit> {
    build_design_with(DesignVariant::new(variant)?, &DesignOptions::default())
}

pub fn build_design_with(variant: DesignVariant, opts: &DesignOptions) -> Result<Circuit> {
    Circuit::from_source(&design_netlist(variant, opts), &format!("builtin:{}", variant.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::ElementKind;

    fn geometry(c: &Circuit, name: &str) -> (f64, f64) {
        match &c.element(name).unwrap().kind {
            ElementKind::Mosfet { params, .. } => (params.w, params.l),
            _ => panic!("{name} is not a MOSFET"),
        }
    }

    #[test]
    fn original_design_inventory() {
        let c = build_design(1).unwrap();
        assert_eq!(c.mosfet_count(), 16);
        assert_eq!(c.count(|k| matches!(k, ElementKind::Resistor { .. })), 1);
        assert_eq!(c.count(|k| matches!(k, ElementKind::CurrentSource { .. })), 2);
        assert_eq!(c.count(|k| matches!(k, ElementKind::VoltageSource { .. })), 1);
        assert_eq!(c.count(|k| matches!(k, ElementKind::Capacitor { .. })), 2);
        assert_eq!(geometry(&c, "M1"), (20e-6, 1e-6));
        assert_eq!(geometry(&c, "M15"), (500e-6, 1e-6));
    }

    #[test]
    fn memristive_design_replaces_three_elements() {
        let c = build_design(2).unwrap();
        assert_eq!(c.mosfet_count(), 14);
        assert_eq!(c.count(|k| matches!(k, ElementKind::Memristor { .. })), 3);
        for gone in ["R1", "M6", "M9"] {
            assert!(c.element(gone).is_none(), "{gone} still present");
        }
        for added in ["XU1", "XU2", "XU3"] {
            assert!(c.element(added).is_some(), "{added} missing");
        }
    }

    #[test]
    fn scaled_design_divides_by_five() {
        let c = build_design(3).unwrap();
        let (w, l) = geometry(&c, "M1");
        assert!((w - 4e-6).abs() < 1e-18 && (l - 0.2e-6).abs() < 1e-18);
        assert_eq!(build_design(4).unwrap().mosfet_count(), 14);
    }

    #[test]
    fn builtin_names() {
        assert_eq!(resolve_builtin("builtin:tia3").map(|v| v.id), Some(3));
        assert!(resolve_builtin("builtin:tia5").is_none());
        assert!(resolve_builtin("tia1").is_none());
        assert!(build_design(0).is_err());
    }

    #[test]
    fn netlist_round_trips() {
        for v in DesignVariant::all() {
            let c = build_design_with(v, &DesignOptions::default()).unwrap();
            let again = Circuit::from_source(&c.to_netlist(), "again").unwrap();
            assert_eq!(again.elements(), c.elements());
        }
    }
}
