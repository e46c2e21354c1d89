//! SPICE-like netlist front end: tokenize, parse, elaborate, emit.
//!
//! Grammar, one element per logical line (the first line is the title):
//!
//! ```text
//! R<name> n+ n- value
//! C<name> n+ n- value
//! V<name> n+ n- [DC v] [SIN(off amp freq)] [AC mag]
//! I<name> n+ n- [DC i] [SIN(off amp freq)] [AC mag]
//! M<name> nd ng ns nb model W=<len> L=<len>
//! X<name> n+ n- memristor [RON=] [ROFF=] [D=] [UV=] [X0=] [P=]
//! .model <name> NMOS|PMOS (KP= VTO= LAMBDA= NN= COXA= TCV= BEX= CGSO= CGDO=)
//! .op
//! .dc <src> [<src2>] start stop step
//! .ac dec n f1 f2
//! .tran step stop
//! .temp t1 [t2 ...]
//! .thd f0 harmonics
//! .nodeset V(node)=value ...
//! .probe node+ [node-]
//! .end
//! ```
//!
//! Two sources on a `.dc` card form a differential drive: the first is set
//! to `+x/2`, the second to `-x/2`. Names are case-insensitive; `0` and
//! `gnd` are ground.

mod ast;
mod elaborate;
mod emit;
mod lexer;
mod parser;

pub use ast::{Netlist, ParsedElement, ParsedKind, ParsedModel};
pub use elaborate::elaborate;
pub use lexer::{parse_value, tokenize, SourceText, Token, TokenKind};
pub use parser::parse;

use std::collections::BTreeMap;

use crate::devices::{MemristorParams, MosfetParams, Polarity, SourceWaveform};
use crate::error::{Error, Result};

/// Index into [`Circuit::nodes`]; ground is always `NodeId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelCard {
    pub polarity: Polarity,
    /// Card parameters; `w` and `l` are unused here.
    pub params: MosfetParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        a: NodeId,
        b: NodeId,
        resistance: f64,
    },
    Capacitor {
        a: NodeId,
        b: NodeId,
        capacitance: f64,
    },
    /// Branch current is an MNA unknown, flowing from `pos` through the
    /// source to `neg`.
    VoltageSource {
        pos: NodeId,
        neg: NodeId,
        waveform: SourceWaveform,
    },
    /// Current flows from `pos` through the source into `neg`.
    CurrentSource {
        pos: NodeId,
        neg: NodeId,
        waveform: SourceWaveform,
    },
    Mosfet {
        drain: NodeId,
        gate: NodeId,
        source: NodeId,
        bulk: NodeId,
        model: String,
        params: MosfetParams,
    },
    Memristor {
        pos: NodeId,
        neg: NodeId,
        params: MemristorParams,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
}

impl Element {
    pub fn nodes(&self) -> Vec<NodeId> {
        match &self.kind {
            ElementKind::Resistor { a, b, .. } | ElementKind::Capacitor { a, b, .. } => vec![*a, *b],
            ElementKind::VoltageSource { pos, neg, .. }
            | ElementKind::CurrentSource { pos, neg, .. }
            | ElementKind::Memristor { pos, neg, .. } => vec![*pos, *neg],
            ElementKind::Mosfet {
                drain,
                gate,
                source,
                bulk,
                ..
            } => vec![*drain, *gate, *source, *bulk],
        }
    }

    pub fn is_source(&self) -> bool {
        matches!(
            self.kind,
            ElementKind::VoltageSource { .. } | ElementKind::CurrentSource { .. }
        )
    }
}

/// Output signal: a node voltage or the difference of two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Probe {
    Node(String),
    Diff(String, String),
}

impl Probe {
    pub fn label(&self) -> String {
        match self {
            Probe::Node(n) => format!("v({n})"),
            Probe::Diff(a, b) => format!("v({a})-v({b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Op,
    Dc {
        sources: Vec<String>,
        start: f64,
        stop: f64,
        step: f64,
    },
    Ac {
        points_per_decade: usize,
        f_start: f64,
        f_stop: f64,
    },
    Tran {
        step: f64,
        stop: f64,
    },
    Temp(Vec<f64>),
    Thd {
        fundamental: f64,
        harmonics: usize,
    },
    Nodeset(Vec<(String, f64)>),
    Probe(Probe),
}

/// Elaborated, validated circuit. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    title: String,
    nodes: Vec<String>,
    node_lookup: BTreeMap<String, NodeId>,
    elements: Vec<Element>,
    models: BTreeMap<String, (String, ModelCard)>,
    directives: Vec<Directive>,
    warnings: Vec<String>,
}

impl Circuit {
    pub fn title(&self) -> &str {
        &self.title
    }

    /// Node names by index; index 0 is ground and is named `0`.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0]
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        let key = name.to_lowercase();
        if key == "gnd" {
            return Some(NodeId::GROUND);
        }
        self.node_lookup.get(&key).copied()
    }

    pub fn require_node(&self, name: &str) -> Result<NodeId> {
        self.node(name)
            .ok_or_else(|| Error::Circuit(format!("unknown node '{name}'")))
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.element_index(name).map(|i| &self.elements[i])
    }

    /// Model cards in name order, with their declared spelling.
    pub fn models(&self) -> impl Iterator<Item = (&str, &ModelCard)> {
        self.models.values().map(|(n, c)| (n.as_str(), c))
    }

    pub fn directives(&self) -> &[Directive] {
        &self.directives
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn probe(&self) -> Option<&Probe> {
        self.directives.iter().rev().find_map(|d| match d {
            Directive::Probe(p) => Some(p),
            _ => None,
        })
    }

    /// Initial-guess hints from `.nodeset` cards.
    pub fn nodesets(&self) -> Vec<(NodeId, f64)> {
        self.directives
            .iter()
            .filter_map(|d| match d {
                Directive::Nodeset(v) => Some(v),
                _ => None,
            })
            .flatten()
            .filter_map(|(n, v)| self.node(n).map(|id| (id, *v)))
            .collect()
    }

    pub fn mosfet_count(&self) -> usize {
        self.count(|k| matches!(k, ElementKind::Mosfet { .. }))
    }

    pub fn count(&self, pred: impl Fn(&ElementKind) -> bool) -> usize {
        self.elements.iter().filter(|e| pred(&e.kind)).count()
    }

    /// Render back to netlist text (see [`emit`]).
    pub fn to_netlist(&self) -> String {
        emit::emit(self)
    }

    /// Parse, then elaborate.
    pub fn from_source(text: &str, origin: &str) -> Result<Circuit> {
        let source = SourceText::new(text, origin);
        let tokens = tokenize(&source)?;
        let ast = parse(source.title(), &tokens)?;
        elaborate(&ast)
    }
}
