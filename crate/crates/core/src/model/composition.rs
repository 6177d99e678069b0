use std::collections::HashSet;

use crate::lexer::{Cursor, Tok};

use super::component::parse_tag_entry;
use super::error::ModelError;
use super::types::*;

/// Parses a composition document without resolving it against members.
pub fn parse_composition_syntax(src: &str) -> Result<ComposedComponent, ModelError> {
    let mut c = Cursor::new(src)?;
    c.expect_kw("composition")?;
    let name = c.expect_ident()?;
    let mut comp = ComposedComponent {
        name,
        members: Vec::new(),
        act_in: Vec::new(),
        act_out: Vec::new(),
        poi: Vec::new(),
        tags: SemanticTags::default(),
        taxonomy: None,
        requirements: None,
    };
    while !c.at_eof() {
        let kw = c.expect_ident()?;
        match kw.as_str() {
            "taxonomy" => comp.taxonomy = Some(expect_str(&mut c)?),
            "requirements" => comp.requirements = Some(expect_str(&mut c)?),
            "members" => {
                c.expect_sym("{")?;
                while !c.accept_sym("}") {
                    let name = c.expect_ident()?;
                    let path = expect_str(&mut c)?;
                    let mut instances = 1;
                    if c.accept_kw("instances") {
                        instances = match c.next() {
                            Tok::Int(n) if n >= 1 => n as usize,
                            other => {
                                return Err(c.error(format!("expected instance count, found {other}")).into())
                            }
                        };
                    }
                    c.accept_sym(";");
                    comp.members.push(MemberRef { name, path, instances });
                }
            }
            "act_in" | "act_out" => {
                c.expect_sym("{")?;
                let mut refs = Vec::new();
                while !c.accept_sym("}") {
                    let (m, a) = parse_action_ref(&mut c)?;
                    refs.push(format!("{m}.{a}"));
                    c.accept_sym(",");
                }
                if kw == "act_in" {
                    comp.act_in = refs;
                } else {
                    comp.act_out = refs;
                }
            }
            "semantics" => {
                c.expect_sym("{")?;
                while !c.accept_sym("}") {
                    let key = c.expect_ident()?;
                    parse_tag_entry(&mut c, &key, &mut comp.tags)?;
                }
            }
            "POI" => {
                let id = c.expect_ident()?;
                c.expect_sym(":")?;
                c.expect_sym("!")?;
                let sender = parse_action_ref(&mut c)?;
                c.expect_sym("->")?;
                let mut receivers = Vec::new();
                loop {
                    c.expect_sym("?")?;
                    receivers.push(parse_action_ref(&mut c)?);
                    if !c.accept_sym(",") {
                        break;
                    }
                }
                let socket = if c.accept_kw("socket") { Some(c.expect_ident()?) } else { None };
                c.accept_sym(";");
                comp.poi.push(PoiEntry { id, sender, receivers, socket });
            }
            other => return Err(c.error(format!("unknown composition block `{other}`")).into()),
        }
    }
    Ok(comp)
}

fn expect_str(c: &mut Cursor) -> Result<String, ModelError> {
    match c.next() {
        Tok::Str(s) => Ok(s),
        other => Err(c.error(format!("expected quoted path, found {other}")).into()),
    }
}

fn parse_action_ref(c: &mut Cursor) -> Result<ActionRef, ModelError> {
    let m = c.expect_ident()?;
    c.expect_sym(".")?;
    let a = c.expect_ident()?;
    Ok((m, a))
}

/// Parses a composition and resolves its wiring against `members`.
pub fn parse_composition(src: &str, members: &[BasicComponent]) -> Result<ComposedComponent, ModelError> {
    let comp = parse_composition_syntax(src)?;
    resolve_composition(&comp, members)?;
    Ok(comp)
}

/// Checks that every member and POI reference resolves and that send/receive
/// sides are used in the right direction.
pub fn resolve_composition(comp: &ComposedComponent, members: &[BasicComponent]) -> Result<(), ModelError> {
    if comp.members.is_empty() {
        return Err(ModelError::UnknownMember(format!("composition `{}` has no members", comp.name)));
    }
    let mut names = HashSet::new();
    for m in &comp.members {
        if !names.insert(&m.name) {
            return Err(ModelError::DuplicateId { kind: "member", id: m.name.clone() });
        }
        if !members.iter().any(|b| b.name == m.name) {
            return Err(ModelError::UnknownMember(m.name.clone()));
        }
    }
    let mut ids = HashSet::new();
    for p in &comp.poi {
        if !ids.insert(&p.id) {
            return Err(ModelError::DuplicateId { kind: "POI", id: p.id.clone() });
        }
        let lookup = |(m, a): &ActionRef, want_send: bool| -> Result<(), ModelError> {
            if !names.contains(m) {
                return Err(ModelError::UnknownMember(m.clone()));
            }
            let b = members.iter().find(|b| b.name == *m).expect("checked above");
            let dangling = |reason: &str| ModelError::DanglingAction {
                poi: p.id.clone(),
                member: m.clone(),
                action: a.clone(),
                reason: reason.to_string(),
            };
            let dir = b.action_direction(a).ok_or_else(|| dangling("does not exist"))?;
            match (want_send, dir) {
                (_, Direction::Internal) => Ok(()),
                (true, Direction::Send) | (false, Direction::Receive) => Ok(()),
                (true, Direction::Receive) => Err(dangling("is a receive action used as sender")),
                (false, Direction::Send) => Err(dangling("is a send action used as receiver")),
            }
        };
        lookup(&p.sender, true)?;
        for r in &p.receivers {
            lookup(r, false)?;
        }
    }
    Ok(())
}
