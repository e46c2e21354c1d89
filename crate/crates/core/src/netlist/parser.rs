use std::collections::HashSet;

use super::ast::{Netlist, ParsedElement, ParsedKind, ParsedModel};
use super::lexer::{Token, TokenKind};
use super::{Directive, Probe};
use crate::devices::{Polarity, Sine, SourceWaveform};
use crate::error::{Error, Result};

const MOSFET_KEYS: [&str; 2] = ["W", "L"];
const MEMRISTOR_KEYS: [&str; 6] = ["RON", "ROFF", "D", "UV", "X0", "P"];
pub(crate) const MODEL_KEYS: [&str; 9] = [
    "KP", "VTO", "LAMBDA", "NN", "COXA", "TCV", "BEX", "CGSO", "CGDO",
];

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn remaining(&self) -> usize {
        self.tokens.len().saturating_sub(self.pos)
    }

    fn node(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(t) if matches!(t.kind, TokenKind::Word | TokenKind::Number(_)) => {
                Ok(t.lexeme.clone())
            }
            _ => Err(self.err(format!("missing {what}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        match self.next() {
            Some(t) => t
                .number()
                .ok_or_else(|| self.err(format!("expected numeric {what}, found '{}'", t.lexeme))),
            None => Err(self.err(format!("missing {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(t) if t.kind == TokenKind::Word => Ok(t.lexeme.clone()),
            _ => Err(self.err(format!("missing {what}"))),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t.kind == kind => Ok(()),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn skip(&mut self, kind: TokenKind) -> bool {
        if self.peek().map(|t| t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn finish(&self, what: &str) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.err(format!("unexpected '{}' in {what}", t.lexeme))),
        }
    }

    /// `KEY=value` pairs up to the end of the line; keys uppercased and
    /// checked against `allowed`.
    fn assignments(&mut self, allowed: &[&str], what: &str) -> Result<Vec<(String, f64)>> {
        let mut out: Vec<(String, f64)> = Vec::new();
        while let Some(t) = self.next() {
            if matches!(t.kind, TokenKind::LParen | TokenKind::RParen | TokenKind::Comma) {
                continue;
            }
            let key = t.lexeme.to_uppercase();
            if t.kind != TokenKind::Word || !allowed.contains(&key.as_str()) {
                return Err(self.err(format!("unknown {what} parameter '{}'", t.lexeme)));
            }
            self.expect(TokenKind::Equals, &format!("'=' after {key}"))?;
            let value = self.number(&key)?;
            if out.iter().any(|(k, _)| *k == key) {
                return Err(self.err(format!("parameter {key} given twice")));
            }
            out.push((key, value));
        }
        Ok(out)
    }
}

fn split_lines(tokens: &[Token]) -> Vec<&[Token]> {
    tokens
        .split(|t| t.kind == TokenKind::Eol)
        .filter(|l| !l.is_empty())
        .collect()
}

/// Parse a token stream into an unelaborated [`Netlist`].
pub fn parse(title: &str, tokens: &[Token]) -> Result<Netlist> {
    let mut netlist = Netlist {
        title: title.to_owned(),
        elements: Vec::new(),
        models: Vec::new(),
        directives: Vec::new(),
    };
    let mut names: HashSet<String> = HashSet::new();
    let mut ended = false;
    for line in split_lines(tokens) {
        let head = &line[0];
        let mut cur = Cursor {
            tokens: &line[1..],
            pos: 0,
            line: head.line,
        };
        if ended {
            let what = if head.kind == TokenKind::Directive {
                "directive"
            } else {
                "element"
            };
            return Err(cur.err(format!("{what} after .end")));
        }
        match head.kind {
            TokenKind::Directive => {
                let card = head.lexeme.to_lowercase();
                match card.as_str() {
                    ".end" => {
                        cur.finish(".end")?;
                        ended = true;
                    }
                    ".model" => {
                        let model = parse_model(&mut cur)?;
                        let key = model.name.to_lowercase();
                        if netlist.models.iter().any(|m| m.name.to_lowercase() == key) {
                            return Err(cur.err(format!("duplicate model '{}'", model.name)));
                        }
                        netlist.models.push(model);
                    }
                    _ => netlist.directives.push(parse_directive(&card, &mut cur)?),
                }
            }
            _ => {
                let element = parse_element(head, &mut cur)?;
                if !names.insert(element.name.to_lowercase()) {
                    return Err(cur.err(format!("duplicate element name '{}'", element.name)));
                }
                netlist.elements.push(element);
            }
        }
    }
    Ok(netlist)
}

fn parse_model(cur: &mut Cursor) -> Result<ParsedModel> {
    let name = cur.node("model name")?;
    let kind = cur.word("model type")?;
    let polarity = match kind.to_uppercase().as_str() {
        "NMOS" => Polarity::Nmos,
        "PMOS" => Polarity::Pmos,
        other => return Err(cur.err(format!("unknown model type '{other}'"))),
    };
    let params = cur.assignments(&MODEL_KEYS, "model")?;
    Ok(ParsedModel {
        name,
        line: cur.line,
        polarity,
        params,
    })
}

fn parse_source(cur: &mut Cursor) -> Result<SourceWaveform> {
    let mut w = SourceWaveform::default();
    while let Some(t) = cur.next() {
        match t.kind {
            TokenKind::Number(v) if w.dc.is_none() => w.dc = Some(v),
            TokenKind::Word => match t.lexeme.to_uppercase().as_str() {
                "DC" => w.dc = Some(cur.number("DC value")?),
                "AC" => w.ac = Some(cur.number("AC magnitude")?),
                "SIN" => {
                    cur.expect(TokenKind::LParen, "'(' after SIN")?;
                    let mut vals = Vec::new();
                    while !cur.skip(TokenKind::RParen) {
                        if cur.at_end() {
                            return Err(cur.err("unterminated SIN("));
                        }
                        if cur.skip(TokenKind::Comma) {
                            continue;
                        }
                        vals.push(cur.number("SIN argument")?);
                    }
                    if vals.len() != 3 {
                        return Err(cur.err(format!(
                            "SIN expects 3 arguments (offset amplitude frequency), got {}",
                            vals.len()
                        )));
                    }
                    w.sin = Some(Sine {
                        offset: vals[0],
                        amplitude: vals[1],
                        frequency: vals[2],
                    });
                }
                other => return Err(cur.err(format!("unknown source keyword '{other}'"))),
            },
            _ => return Err(cur.err(format!("unexpected '{}' in source", t.lexeme))),
        }
    }
    Ok(w)
}

fn parse_element(head: &Token, cur: &mut Cursor) -> Result<ParsedElement> {
    let name = head.lexeme.clone();
    let letter = name.chars().next().map(|c| c.to_ascii_uppercase());
    let two_terminal = |cur: &mut Cursor| -> Result<Vec<String>> {
        Ok(vec![cur.node("node n+")?, cur.node("node n-")?])
    };
    let (nodes, kind) = match letter {
        Some('R') | Some('C') => {
            if cur.remaining() != 3 {
                return Err(cur.err(format!(
                    "{name}: expected 'n+ n- value' (3 fields), got {}",
                    cur.remaining()
                )));
            }
            let nodes = two_terminal(cur)?;
            let value = cur.number("value")?;
            let kind = if letter == Some('R') {
                ParsedKind::Resistor(value)
            } else {
                ParsedKind::Capacitor(value)
            };
            (nodes, kind)
        }
        Some('V') | Some('I') => {
            if cur.remaining() < 2 {
                return Err(cur.err(format!("{name}: expected 'n+ n- [source spec]'")));
            }
            let nodes = two_terminal(cur)?;
            let w = parse_source(cur)?;
            let kind = if letter == Some('V') {
                ParsedKind::VoltageSource(w)
            } else {
                ParsedKind::CurrentSource(w)
            };
            (nodes, kind)
        }
        Some('M') => {
            if cur.remaining() < 5 {
                return Err(cur.err(format!("{name}: expected 'nd ng ns nb model W= L='")));
            }
            let nodes = vec![
                cur.node("drain")?,
                cur.node("gate")?,
                cur.node("source")?,
                cur.node("bulk")?,
            ];
            let model = cur.node("model name")?;
            let geo = cur.assignments(&MOSFET_KEYS, "MOSFET")?;
            let get = |k: &str| geo.iter().find(|(key, _)| key == k).map(|(_, v)| *v);
            (
                nodes,
                ParsedKind::Mosfet {
                    model,
                    w: get("W"),
                    l: get("L"),
                },
            )
        }
        Some('X') => {
            if cur.remaining() < 3 {
                return Err(cur.err(format!("{name}: expected 'n+ n- memristor [params]'")));
            }
            let nodes = two_terminal(cur)?;
            let device = cur.word("device type")?;
            if !device.eq_ignore_ascii_case("memristor") {
                return Err(cur.err(format!("unknown X device '{device}' (only memristor)")));
            }
            (nodes, ParsedKind::Memristor(cur.assignments(&MEMRISTOR_KEYS, "memristor")?))
        }
        _ => return Err(cur.err(format!("unknown element kind '{name}'"))),
    };
    cur.finish(&name)?;
    Ok(ParsedElement {
        name,
        line: head.line,
        nodes,
        kind,
    })
}

fn parse_directive(card: &str, cur: &mut Cursor) -> Result<Directive> {
    let d = match card {
        ".op" => Directive::Op,
        ".dc" => {
            let mut sources = Vec::new();
            while cur.peek().is_some_and(|t| t.kind == TokenKind::Word) {
                sources.push(cur.word("source")?);
            }
            if sources.is_empty() || sources.len() > 2 {
                return Err(cur.err(".dc expects one or two source names"));
            }
            let start = cur.number("start")?;
            let stop = cur.number("stop")?;
            let step = cur.number("step")?;
            if !(start < stop) {
                return Err(cur.err(".dc requires start < stop"));
            }
            if !(step > 0.0) {
                return Err(cur.err(".dc requires step > 0"));
            }
            Directive::Dc {
                sources,
                start,
                stop,
                step,
            }
        }
        ".ac" => {
            let kind = cur.word("sweep type")?;
            if !kind.eq_ignore_ascii_case("dec") {
                return Err(cur.err(format!("unsupported .ac sweep '{kind}' (only dec)")));
            }
            let n = cur.number("points per decade")?;
            let f_start = cur.number("start frequency")?;
            let f_stop = cur.number("stop frequency")?;
            if !(n >= 1.0 && n.fract() == 0.0) {
                return Err(cur.err(".ac points per decade must be a positive integer"));
            }
            if !(f_start > 0.0 && f_start < f_stop) {
                return Err(cur.err(".ac requires 0 < f_start < f_stop"));
            }
            Directive::Ac {
                points_per_decade: n as usize,
                f_start,
                f_stop,
            }
        }
        ".tran" => {
            let step = cur.number("step")?;
            let stop = cur.number("stop")?;
            if !(step > 0.0 && step < stop) {
                return Err(cur.err(".tran requires 0 < step < stop"));
            }
            Directive::Tran { step, stop }
        }
        ".temp" => {
            let mut temps = Vec::new();
            while !cur.at_end() {
                temps.push(cur.number("temperature")?);
            }
            if temps.is_empty() {
                return Err(cur.err(".temp needs at least one temperature"));
            }
            return Ok(Directive::Temp(temps));
        }
        ".thd" => {
            let fundamental = cur.number("fundamental frequency")?;
            let n = cur.number("harmonic count")?;
            if !(fundamental > 0.0) {
                return Err(cur.err(".thd fundamental must be positive"));
            }
            if !(n >= 2.0 && n.fract() == 0.0) {
                return Err(cur.err(".thd harmonic count must be an integer >= 2"));
            }
            Directive::Thd {
                fundamental,
                harmonics: n as usize,
            }
        }
        ".nodeset" => {
            let mut sets = Vec::new();
            while !cur.at_end() {
                let v = cur.word("V(node)")?;
                if !v.eq_ignore_ascii_case("v") {
                    return Err(cur.err(format!("expected V(node)=value, found '{v}'")));
                }
                cur.expect(TokenKind::LParen, "'('")?;
                let node = cur.node("node")?;
                cur.expect(TokenKind::RParen, "')'")?;
                cur.expect(TokenKind::Equals, "'='")?;
                sets.push((node, cur.number("nodeset value")?));
            }
            return Ok(Directive::Nodeset(sets));
        }
        ".probe" => {
            let a = cur.node("probe node")?;
            let p = if cur.at_end() {
                Probe::Node(a)
            } else {
                Probe::Diff(a, cur.node("probe node")?)
            };
            cur.finish(".probe")?;
            return Ok(Directive::Probe(p));
        }
        other => return Err(cur.err(format!("unknown directive '{other}'"))),
    };
    cur.finish(card)?;
    Ok(d)
}
