use std::collections::BTreeMap;

use super::ast::{Netlist, ParsedKind};
use super::{Circuit, Directive, Element, ElementKind, ModelCard, NodeId, Probe};
use crate::devices::{MemristorParams, MosfetParams};
use crate::error::{Error, Result};

fn is_ground(name: &str) -> bool {
    name == "0" || name.eq_ignore_ascii_case("gnd")
}

fn model_card(polarity: crate::devices::Polarity, params: &[(String, f64)]) -> MosfetParams {
    let mut p = MosfetParams::default_card(polarity);
    for (key, value) in params {
        let v = *value;
        match key.as_str() {
            "KP" => p.kp = v,
            "VTO" => p.vto = v,
            "LAMBDA" => p.lambda = v,
            "NN" => p.n_n = v,
            "COXA" => p.coxa = v,
            "TCV" => p.tcv = v,
            "BEX" => p.bex = v,
            "CGSO" => p.cgso = v,
            "CGDO" => p.cgdo = v,
            _ => unreachable!("parser restricts model keys"),
        }
    }
    p
}

fn memristor_params(name: &str, params: &[(String, f64)]) -> Result<MemristorParams> {
    let mut m = MemristorParams::default();
    for (key, value) in params {
        let v = *value;
        match key.as_str() {
            "RON" => m.ron = v,
            "ROFF" => m.roff = v,
            "D" => m.d = v,
            "UV" => m.uv = v,
            "X0" => m.x0 = v,
            "P" => {
                if !(v >= 0.0 && v.fract() == 0.0) {
                    return Err(Error::Elaborate(format!(
                        "{name}: window exponent P must be a non-negative integer"
                    )));
                }
                m.p = v as u32;
            }
            _ => unreachable!("parser restricts memristor keys"),
        }
    }
    m.validate().map_err(|e| Error::Elaborate(format!("{name}: {e}")))?;
    Ok(m)
}

/// Intern nodes, resolve models, and validate the circuit invariants.
pub fn elaborate(ast: &Netlist) -> Result<Circuit> {
    let mut nodes = vec!["0".to_owned()];
    let mut lookup: BTreeMap<String, NodeId> = BTreeMap::new();
    lookup.insert("0".into(), NodeId::GROUND);
    let mut uses: Vec<usize> = vec![0];

    let mut intern = |name: &str, nodes: &mut Vec<String>, uses: &mut Vec<usize>| -> NodeId {
        if is_ground(name) {
            return NodeId::GROUND;
        }
        let key = name.to_lowercase();
        let id = *lookup.entry(key).or_insert_with(|| {
            nodes.push(name.to_owned());
            uses.push(0);
            NodeId(nodes.len() - 1)
        });
        uses[id.0] += 1;
        id
    };

    let mut models = BTreeMap::new();
    for m in &ast.models {
        models.insert(
            m.name.to_lowercase(),
            (
                m.name.clone(),
                ModelCard {
                    polarity: m.polarity,
                    params: model_card(m.polarity, &m.params),
                },
            ),
        );
    }

    let mut elements = Vec::with_capacity(ast.elements.len());
    for e in &ast.elements {
        let ids: Vec<NodeId> = e
            .nodes
            .iter()
            .map(|n| intern(n, &mut nodes, &mut uses))
            .collect();
        let kind = match &e.kind {
            ParsedKind::Resistor(r) => ElementKind::Resistor {
                a: ids[0],
                b: ids[1],
                resistance: *r,
            },
            ParsedKind::Capacitor(c) => ElementKind::Capacitor {
                a: ids[0],
                b: ids[1],
                capacitance: *c,
            },
            ParsedKind::VoltageSource(w) => ElementKind::VoltageSource {
                pos: ids[0],
                neg: ids[1],
                waveform: *w,
            },
            ParsedKind::CurrentSource(w) => ElementKind::CurrentSource {
                pos: ids[0],
                neg: ids[1],
                waveform: *w,
            },
            ParsedKind::Mosfet { model, w, l } => {
                let (_, card) = models.get(&model.to_lowercase()).ok_or_else(|| {
                    Error::Elaborate(format!(
                        "{} (line {}): undefined model '{model}'",
                        e.name, e.line
                    ))
                })?;
                let (w, l) = match (w, l) {
                    (Some(w), Some(l)) => (*w, *l),
                    _ => {
                        return Err(Error::Elaborate(format!(
                            "{} (line {}): MOSFET requires both W and L",
                            e.name, e.line
                        )))
                    }
                };
                let params = card.params.with_geometry(w, l);
                params
                    .validate()
                    .map_err(|m| Error::Elaborate(format!("{}: {m}", e.name)))?;
                ElementKind::Mosfet {
                    drain: ids[0],
                    gate: ids[1],
                    source: ids[2],
                    bulk: ids[3],
                    model: model.clone(),
                    params,
                }
            }
            ParsedKind::Memristor(params) => ElementKind::Memristor {
                pos: ids[0],
                neg: ids[1],
                params: memristor_params(&e.name, params)?,
            },
        };
        elements.push(Element {
            name: e.name.clone(),
            kind,
        });
    }

    let known = |name: &str| is_ground(name) || lookup.contains_key(&name.to_lowercase());
    for d in &ast.directives {
        match d {
            Directive::Dc { sources, .. } => {
                for s in sources {
                    let found = elements
                        .iter()
                        .any(|e| e.name.eq_ignore_ascii_case(s) && e.is_source());
                    if !found {
                        return Err(Error::Elaborate(format!(".dc: no source named '{s}'")));
                    }
                }
            }
            Directive::Nodeset(sets) => {
                if let Some((n, _)) = sets.iter().find(|(n, _)| !known(n)) {
                    return Err(Error::Elaborate(format!(".nodeset: unknown node '{n}'")));
                }
            }
            Directive::Probe(p) => {
                let names: Vec<&String> = match p {
                    Probe::Node(a) => vec![a],
                    Probe::Diff(a, b) => vec![a, b],
                };
                if let Some(n) = names.into_iter().find(|n| !known(n)) {
                    return Err(Error::Elaborate(format!(".probe: unknown node '{n}'")));
                }
            }
            _ => {}
        }
    }

    let warnings = nodes
        .iter()
        .zip(&uses)
        .skip(1)
        .filter(|(_, &u)| u == 1)
        .map(|(n, _)| format!("node '{n}' has only one connection"))
        .collect();

    Ok(Circuit {
        title: ast.title.clone(),
        nodes,
        node_lookup: lookup,
        elements,
        models,
        directives: ast.directives.clone(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use crate::error::Error;
    use crate::netlist::{Circuit, ElementKind};

    #[test]
    fn divider() {
        let c = Circuit::from_source("div\nV1 in 0 1\nR1 in mid 1k\nR2 mid gnd 1k\n", "<t>").unwrap();
        assert_eq!(c.node_count(), 3);
        assert_eq!(c.elements().len(), 3);
        assert!(c.warnings().is_empty());
        assert_eq!(c.node("GND"), Some(super::NodeId::GROUND));
        assert_eq!(c.node("MID"), c.node("mid"));
    }

    #[test]
    fn missing_model_names_instance() {
        let err = Circuit::from_source("t\nM7 d g 0 0 NMOSB W=1u L=1u\nR1 d 0 1k\nR2 g 0 1k", "<t>")
            .unwrap_err();
        match err {
            Error::Elaborate(m) => assert!(m.contains("M7") && m.contains("NMOSB"), "{m}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn mosfet_needs_geometry() {
        let err = Circuit::from_source("t\n.model n NMOS\nM1 d g 0 0 n W=1u", "<t>").unwrap_err();
        assert!(err.to_string().contains("W and L"));
    }

    #[test]
    fn defaults_filled_and_overrides_applied() {
        let c = Circuit::from_source(
            "t\n.model n NMOS (LAMBDA=0)\nM1 d g 0 0 n W=20u L=1u\nXU1 d g memristor RON=50",
            "<t>",
        )
        .unwrap();
        match &c.elements()[0].kind {
            ElementKind::Mosfet { params, .. } => {
                assert_eq!(params.kp, 170e-6);
                assert_eq!(params.lambda, 0.0);
                assert_eq!(params.w, 20e-6);
            }
            k => panic!("{k:?}"),
        }
        match &c.elements()[1].kind {
            ElementKind::Memristor { params, .. } => {
                assert_eq!(params.ron, 50.0);
                assert_eq!(params.roff, 10e3);
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn dangling_node_warns() {
        let c = Circuit::from_source("t\nV1 a 0 1\nR1 a b 1k", "<t>").unwrap();
        assert_eq!(c.warnings().len(), 1);
        assert!(c.warnings()[0].contains("'b'"));
    }
}
