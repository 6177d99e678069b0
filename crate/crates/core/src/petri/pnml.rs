use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::net::PlaceTransitionNet;
use super::PetriError;

const PTNET_TYPE: &str = "http://www.pnml.org/version-2009/grammar/ptnet";

/// Serializes `net` as a PNML P/T net. Node ids double as names.
pub fn to_pnml(net: &PlaceTransitionNet) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n");
    let _ = writeln!(out, "  <net id=\"{}\" type=\"{PTNET_TYPE}\">", escape(net.name.as_str()));
    let _ = writeln!(out, "    <name><text>{}</text></name>", escape(net.name.as_str()));
    out.push_str("    <page id=\"page0\">\n");
    let m0 = net.m0();
    for (p, t) in net.places().iter().zip(&m0.0) {
        let id = escape(p.as_str());
        let _ = write!(out, "      <place id=\"{id}\">\n        <name><text>{id}</text></name>\n");
        if let Some(n) = t.finite().filter(|&n| n > 0) {
            let _ = writeln!(out, "        <initialMarking><text>{n}</text></initialMarking>");
        }
        out.push_str("      </place>\n");
    }
    for t in net.transitions() {
        let id = escape(t.as_str());
        let _ = writeln!(out, "      <transition id=\"{id}\">\n        <name><text>{id}</text></name>\n      </transition>");
    }
    for (i, a) in net.arcs().iter().enumerate() {
        let _ = writeln!(
            out,
            "      <arc id=\"a{i}\" source=\"{}\" target=\"{}\">",
            escape(a.source.as_str()),
            escape(a.target.as_str())
        );
        if a.weight != 1 {
            let _ = writeln!(out, "        <inscription><text>{}</text></inscription>", a.weight);
        }
        out.push_str("      </arc>\n");
    }
    out.push_str("    </page>\n  </net>\n</pnml>\n");
    out
}

#[derive(Default)]
struct PendingArc {
    source: String,
    target: String,
    weight: Option<String>,
}

fn attr(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, PetriError> {
    let pnml = |e: quick_xml::Error| PetriError::Pnml(e.to_string());
    match e.try_get_attribute(name).map_err(|e| PetriError::Pnml(e.to_string()))? {
        Some(a) => Ok(Some(a.normalized_value(quick_xml::XmlVersion::Implicit1_0).map_err(pnml)?.into_owned())),
        None => Ok(None),
    }
}

/// Reads the first net of a PNML document. Only places, transitions, arcs,
/// initial markings and arc inscriptions are interpreted.
pub fn from_pnml(src: &str) -> Result<PlaceTransitionNet, PetriError> {
    let mut reader = Reader::from_str(src);
    reader.config_mut().trim_text(true);
    let mut stack: Vec<String> = Vec::new();
    let mut net: Option<PlaceTransitionNet> = None;
    let mut places: Vec<(String, u64)> = Vec::new();
    let mut transitions: Vec<String> = Vec::new();
    let mut arcs: Vec<PendingArc> = Vec::new();
    let mut text = String::new();
    let mut nets_seen = 0;
    loop {
        let ev = reader.read_event().map_err(|e| PetriError::Pnml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match ev {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref().as_bytes()).into_owned();
                let empty = matches!(ev, Event::Empty(_));
                if nets_seen <= 1 {
                    match name.as_str() {
                        "net" => {
                            nets_seen += 1;
                            if nets_seen == 1 {
                                net = Some(PlaceTransitionNet::new(attr(e, "id")?.unwrap_or_else(|| "net".into())));
                            }
                        }
                        "place" if nets_seen == 1 => {
                            let id = attr(e, "id")?.ok_or_else(|| PetriError::Pnml("place without id".into()))?;
                            places.push((id, 0));
                        }
                        "transition" if nets_seen == 1 => {
                            let id = attr(e, "id")?.ok_or_else(|| PetriError::Pnml("transition without id".into()))?;
                            transitions.push(id);
                        }
                        "arc" if nets_seen == 1 => {
                            let get = |n| attr(e, n)?.ok_or_else(|| PetriError::Pnml(format!("arc without {n}")));
                            arcs.push(PendingArc { source: get("source")?, target: get("target")?, weight: None });
                        }
                        _ => {}
                    }
                }
                if !empty {
                    stack.push(name);
                }
                text.clear();
            }
            Event::Text(e) => text.push_str(&e.xml10_content()),
            Event::CData(e) => text.push_str(&e.xml10_content()),
            Event::GeneralRef(e) => {
                let raw = format!("&{};", &*e);
                text.push_str(&quick_xml::escape::unescape(&raw).map_err(|e| PetriError::Pnml(e.to_string()))?);
            }
            Event::End(_) => {
                let ctx: Vec<&str> = stack.iter().rev().take(3).map(String::as_str).collect();
                if nets_seen == 1 {
                    match ctx.as_slice() {
                        ["text", "initialMarking", "place", ..] => {
                            let n = text.trim().parse::<u64>().map_err(|_| {
                                PetriError::Pnml(format!("bad initial marking `{}`", text.trim()))
                            })?;
                            places.last_mut().expect("inside place").1 = n;
                        }
                        ["text", "inscription", "arc", ..] => {
                            arcs.last_mut().expect("inside arc").weight = Some(text.trim().to_string());
                        }
                        _ => {}
                    }
                }
                stack.pop();
                text.clear();
            }
            Event::Eof => break,
            _ => {}
        }
    }
    let mut net = net.ok_or_else(|| PetriError::Pnml("no <net> element".into()))?;
    for (id, n) in places {
        net.add_place(id, n)?;
    }
    for t in transitions {
        net.add_transition(t)?;
    }
    for a in arcs {
        let w = match a.weight {
            Some(w) => w.parse::<u64>().map_err(|_| PetriError::Pnml(format!("bad arc inscription `{w}`")))?,
            None => 1,
        };
        net.add_arc(&a.source, &a.target, w)?;
    }
    Ok(net)
}
