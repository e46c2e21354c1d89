use crate::devices::{Polarity, SourceWaveform};

use super::Directive;

/// Parsed but not yet elaborated netlist: nodes are still names.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub title: String,
    pub elements: Vec<ParsedElement>,
    pub models: Vec<ParsedModel>,
    pub directives: Vec<Directive>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedElement {
    pub name: String,
    pub line: usize,
    pub nodes: Vec<String>,
    pub kind: ParsedKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedKind {
    Resistor(f64),
    Capacitor(f64),
    VoltageSource(SourceWaveform),
    CurrentSource(SourceWaveform),
    Mosfet {
        model: String,
        w: Option<f64>,
        l: Option<f64>,
    },
    /// Overrides as (uppercase key, value).
    Memristor(Vec<(String, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedModel {
    pub name: String,
    pub line: usize,
    pub polarity: Polarity,
    pub params: Vec<(String, f64)>,
}
