use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::expr::{
    check_block, check_guard, eval, parse_expr, parse_stmt, parse_type, Env, Expr, FirstChoice,
    TypeEnv, Value,
};
use crate::lexer::Cursor;

use super::error::ModelError;
use super::types::*;

/// Parses a component document and validates its base part. Any extension
/// block is parsed and checked too but not returned; use
/// [`parse_component_file`] to keep it.
pub fn parse_component(src: &str) -> Result<BasicComponent, ModelError> {
    parse_component_file(src).map(|(b, _)| b)
}

/// Parses a component document into its base and its extension. Components
/// without an `extension` block get the trivial extension.
pub fn parse_component_file(src: &str) -> Result<(BasicComponent, ExtendedComponent), ModelError> {
    let mut c = Cursor::new(src)?;
    let (base, raw_ext) = parse_document(&mut c)?;
    validate_base(&base)?;
    let ext = match raw_ext {
        Some(raw) => resolve_extension(&base, raw)?,
        None => ExtendedComponent::trivial(&base),
    };
    Ok((base, ext))
}

/// Parses a standalone `extension { ... }` document against `base`.
pub fn parse_extension(src: &str, base: &BasicComponent) -> Result<ExtendedComponent, ModelError> {
    let mut c = Cursor::new(src)?;
    c.expect_kw("extension")?;
    let raw = parse_extension_block(&mut c)?;
    if !c.at_eof() {
        return Err(c.error(format!("unexpected {} after extension", c.peek())).into());
    }
    resolve_extension(base, raw)
}

struct RawTransition {
    from: String,
    to: String,
    event: String,
    guard: Expr,
    action: Vec<crate::expr::Stmt>,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
}

struct RawExtension {
    vars: Vec<StateVar>,
    transitions: Vec<RawTransition>,
}

fn expr(c: &mut Cursor) -> Result<Expr, ModelError> {
    parse_expr(c).map_err(ModelError::ExprSyntax)
}

fn parse_document(c: &mut Cursor) -> Result<(BasicComponent, Option<RawExtension>), ModelError> {
    c.expect_kw("component")?;
    let name = c.expect_ident()?;
    let mut comp = BasicComponent {
        name,
        entity: None,
        events: Vec::new(),
        actions: Vec::new(),
        states: Vec::new(),
        tags: SemanticTags::default(),
        action_tags: BTreeMap::new(),
    };
    let mut ext = None;
    let mut seen = HashSet::new();
    while !c.at_eof() {
        let kw = c.expect_ident()?;
        if kw != "entity" && !seen.insert(kw.clone()) {
            return Err(c.error(format!("duplicate `{kw}` block")).into());
        }
        match kw.as_str() {
            "entity" => {
                if comp.entity.is_some() {
                    return Err(c.error("a basic component has at most one entity").into());
                }
                comp.entity = Some(parse_entity(c)?);
            }
            "events" => comp.events = parse_events(c)?,
            "actions" => comp.actions = parse_actions(c)?,
            "states" => comp.states = parse_states(c)?,
            "semantics" => parse_semantics(c, &mut comp)?,
            "extension" => ext = Some(parse_extension_block(c)?),
            other => return Err(c.error(format!("unknown block `{other}`")).into()),
        }
    }
    Ok((comp, ext))
}

fn parse_entity(c: &mut Cursor) -> Result<Entity, ModelError> {
    let name = c.expect_ident()?;
    c.expect_sym("{")?;
    let mut characteristics = Vec::new();
    while !c.accept_sym("}") {
        let id = c.expect_ident()?;
        let cname = c.expect_ident()?;
        c.expect_sym(":")?;
        let ty = parse_type(c)?;
        c.accept_sym(",");
        c.accept_sym(";");
        characteristics.push(Characteristic { id, name: cname, ty });
    }
    Ok(Entity { name, characteristics })
}

fn parse_name_list(c: &mut Cursor) -> Result<Vec<String>, ModelError> {
    let mut out = vec![c.expect_ident()?];
    while c.accept_sym(",") {
        out.push(c.expect_ident()?);
    }
    Ok(out)
}

fn parse_events(c: &mut Cursor) -> Result<Vec<EventDef>, ModelError> {
    c.expect_sym("{")?;
    let mut out = Vec::new();
    while !c.accept_sym("}") {
        let id = c.expect_ident()?;
        let name = c.expect_ident()?;
        c.expect_kw("from")?;
        let sender = c.expect_ident()?;
        if c.is_sym(",") {
            return Err(c.error(format!("event `{id}` declares more than one sender")).into());
        }
        c.expect_kw("to")?;
        let receivers = parse_name_list(c)?;
        let mut params = Vec::new();
        if c.accept_sym("(") {
            while !c.accept_sym(")") {
                let pname = c.expect_ident()?;
                c.expect_sym(":")?;
                let ty = parse_type(c)?;
                let mut param = Param { name: pname, ty, class: None, unit: None };
                loop {
                    if c.accept_kw("class") {
                        param.class = Some(c.expect_term()?);
                    } else if c.accept_kw("unit") {
                        param.unit = Some(c.expect_term()?);
                    } else {
                        break;
                    }
                }
                params.push(param);
                if !c.accept_sym(",") {
                    c.expect_sym(")")?;
                    break;
                }
            }
        }
        c.accept_sym(";");
        out.push(EventDef { id, name, sender, receivers, params });
    }
    Ok(out)
}

fn parse_actions(c: &mut Cursor) -> Result<Vec<ActionDef>, ModelError> {
    c.expect_sym("{")?;
    let mut out = Vec::new();
    while !c.accept_sym("}") {
        let id = c.expect_ident()?;
        let name = c.expect_ident()?;
        c.expect_kw("on")?;
        let event = c.expect_ident()?;
        c.accept_sym(";");
        out.push(ActionDef { id, name, event });
    }
    Ok(out)
}

fn parse_states(c: &mut Cursor) -> Result<Vec<StateDef>, ModelError> {
    c.expect_sym("{")?;
    let mut out = Vec::new();
    while !c.accept_sym("}") {
        let id = c.expect_ident()?;
        let name = c.expect_ident()?;
        let mut st = StateDef {
            id,
            name,
            is_initial: false,
            is_final: false,
            is_goal: false,
            exits: Vec::new(),
        };
        loop {
            if c.accept_kw("initial") {
                st.is_initial = true;
            } else if c.accept_kw("final") {
                st.is_final = true;
            } else if c.accept_kw("goal") {
                st.is_goal = true;
            } else {
                break;
            }
        }
        if c.accept_sym("{") {
            while !c.accept_sym("}") {
                let action = c.expect_ident()?;
                c.expect_sym("->")?;
                let next = c.expect_ident()?;
                c.accept_sym(",");
                c.accept_sym(";");
                st.exits.push(Exit { action, next });
            }
        }
        c.accept_sym(";");
        out.push(st);
    }
    Ok(out)
}

fn parse_term_list(c: &mut Cursor) -> Result<BTreeSet<String>, ModelError> {
    let mut out = BTreeSet::new();
    if c.accept_sym(";") {
        return Ok(out);
    }
    loop {
        out.insert(c.expect_term()?);
        if c.accept_sym(";") {
            return Ok(out);
        }
        c.expect_sym(",")?;
    }
}

/// `aoi: a, b; purpose: c;` pairs, shared by components and compositions.
pub(crate) fn parse_tag_entry(
    c: &mut Cursor,
    key: &str,
    tags: &mut SemanticTags,
) -> Result<(), ModelError> {
    c.expect_sym(":")?;
    let terms = parse_term_list(c)?;
    match key {
        "aoi" => tags.aoi = terms,
        "purpose" => tags.purpose = terms,
        other => return Err(c.error(format!("unknown semantic attribute `{other}`")).into()),
    }
    Ok(())
}

fn parse_semantics(c: &mut Cursor, comp: &mut BasicComponent) -> Result<(), ModelError> {
    c.expect_sym("{")?;
    while !c.accept_sym("}") {
        let key = c.expect_ident()?;
        if key == "action" {
            let id = c.expect_ident()?;
            c.expect_sym("{")?;
            let mut tags = SemanticTags::default();
            while !c.accept_sym("}") {
                let k = c.expect_ident()?;
                parse_tag_entry(c, &k, &mut tags)?;
            }
            comp.action_tags.insert(id, tags);
        } else {
            parse_tag_entry(c, &key, &mut comp.tags)?;
        }
    }
    Ok(())
}

fn parse_extension_block(c: &mut Cursor) -> Result<RawExtension, ModelError> {
    c.expect_sym("{")?;
    let mut raw = RawExtension { vars: Vec::new(), transitions: Vec::new() };
    while !c.accept_sym("}") {
        let kw = c.expect_ident()?;
        match kw.as_str() {
            "variables" => {
                c.expect_sym("{")?;
                while !c.accept_sym("}") {
                    let name = c.expect_ident()?;
                    c.expect_sym(":")?;
                    let ty = parse_type(c)?;
                    c.expect_sym("=")?;
                    let init = expr(c)?;
                    c.expect_sym(";")?;
                    let initial = eval(&init, &Env::default(), &mut FirstChoice).map_err(|e| {
                        ModelError::Reference(format!("initial value of `{name}`: {e}"))
                    })?;
                    if !initial.conforms_to(&ty) {
                        return Err(ModelError::Type {
                            context: format!("state variable `{name}`"),
                            source: crate::expr::TypeError(format!(
                                "initial value {initial} is not of type {ty}"
                            )),
                        });
                    }
                    raw.vars.push(StateVar { name, ty, initial });
                }
            }
            "transitions" => {
                c.expect_sym("{")?;
                while !c.accept_sym("}") {
                    raw.transitions.push(parse_raw_transition(c)?);
                }
            }
            other => return Err(c.error(format!("unknown extension block `{other}`")).into()),
        }
    }
    Ok(raw)
}

fn parse_raw_transition(c: &mut Cursor) -> Result<RawTransition, ModelError> {
    let from = c.expect_ident()?;
    c.expect_sym("->")?;
    let to = c.expect_ident()?;
    c.expect_kw("on")?;
    let event = c.expect_ident()?;
    let mut t = RawTransition {
        from,
        to,
        event,
        guard: Expr::Lit(Value::Bool(true)),
        action: Vec::new(),
        inputs: BTreeSet::new(),
        outputs: BTreeSet::new(),
    };
    loop {
        if c.accept_kw("guard") {
            t.guard = expr(c)?;
        } else if c.accept_kw("in") {
            t.inputs.extend(parse_name_list(c)?);
        } else if c.accept_kw("out") {
            t.outputs.extend(parse_name_list(c)?);
        } else if c.accept_kw("do") {
            c.expect_sym("{")?;
            while !c.accept_sym("}") {
                t.action.push(parse_stmt(c).map_err(ModelError::ExprSyntax)?);
            }
        } else {
            break;
        }
    }
    c.accept_sym(";");
    Ok(t)
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a String>) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(ModelError::DuplicateId { kind, id: id.clone() });
        }
    }
    Ok(())
}

/// Checks the well-formedness invariants of a basic component.
pub fn validate_base(c: &BasicComponent) -> Result<(), ModelError> {
    check_unique("event", c.events.iter().map(|e| &e.id))?;
    check_unique("action", c.actions.iter().map(|a| &a.id))?;
    check_unique("state", c.states.iter().map(|s| &s.id))?;
    check_unique("state name", c.states.iter().map(|s| &s.name))?;
    if let Some(ent) = &c.entity {
        check_unique("characteristic", ent.characteristics.iter().map(|ch| &ch.id))?;
    }
    for ev in &c.events {
        check_unique("parameter", ev.params.iter().map(|p| &p.name))?;
        if ev.sender != c.name && !ev.receivers.contains(&c.name) {
            return Err(ModelError::Reference(format!(
                "event `{}` neither sent nor received by `{}`",
                ev.id, c.name
            )));
        }
    }
    for a in &c.actions {
        if c.event(&a.event).is_none() {
            return Err(ModelError::Reference(format!(
                "action `{}` cites unknown event `{}`",
                a.id, a.event
            )));
        }
    }
    for s in &c.states {
        for x in &s.exits {
            if c.action(&x.action).is_none() {
                return Err(ModelError::Reference(format!(
                    "state `{}` exit cites unknown action `{}`",
                    s.id, x.action
                )));
            }
            if c.state(&x.next).is_none() {
                return Err(ModelError::Reference(format!(
                    "state `{}` exit cites unknown state `{}`",
                    s.id, x.next
                )));
            }
        }
    }
    for id in c.action_tags.keys() {
        if c.action(id).is_none() {
            return Err(ModelError::Reference(format!("semantic tags cite unknown action `{id}`")));
        }
    }
    match c.states.iter().filter(|s| s.is_initial).count() {
        0 => return Err(ModelError::Reference(format!("component `{}` has no initial state", c.name))),
        1 => {}
        _ => {
            return Err(ModelError::Reference(format!(
                "component `{}` has more than one initial state",
                c.name
            )))
        }
    }
    if !c.states.iter().any(|s| s.is_final || s.is_goal) {
        return Err(ModelError::Reference(format!(
            "component `{}` declares neither a final nor a goal state",
            c.name
        )));
    }
    Ok(())
}

fn resolve_extension(base: &BasicComponent, raw: RawExtension) -> Result<ExtendedComponent, ModelError> {
    check_unique("state variable", raw.vars.iter().map(|v| &v.name))?;
    for v in &raw.vars {
        for ev in &base.events {
            if ev.params.iter().any(|p| p.name == v.name) {
                return Err(ModelError::Reference(format!(
                    "state variable `{}` clashes with a parameter of event `{}`",
                    v.name, ev.id
                )));
            }
        }
        if crate::expr::is_reserved(&v.name) {
            return Err(ModelError::Reference(format!("`{}` is a reserved word", v.name)));
        }
    }
    let resolve_state = |key: &str| -> Result<String, ModelError> {
        base.resolve_state(key)
            .map(|s| s.id.clone())
            .ok_or_else(|| ModelError::BaseMismatch(format!("unknown state `{key}`")))
    };
    let mut transitions = Vec::new();
    for t in raw.transitions {
        let from = resolve_state(&t.from)?;
        let to = resolve_state(&t.to)?;
        let ev = base
            .event(&t.event)
            .or_else(|| base.events.iter().find(|e| e.name == t.event))
            .ok_or_else(|| ModelError::BaseMismatch(format!("unknown event `{}`", t.event)))?;
        for v in t.inputs.iter().chain(&t.outputs) {
            if !raw.vars.iter().any(|sv| sv.name == *v) {
                return Err(ModelError::Reference(format!(
                    "transition {from} -> {to} lists unknown state variable `{v}`"
                )));
            }
        }
        let context = format!("transition {from} -> {to} on {}", ev.id);
        let tyerr = |source| ModelError::Type { context: context.clone(), source };

        let mut env: TypeEnv = raw
            .vars
            .iter()
            .filter(|v| t.inputs.contains(&v.name))
            .map(|v| (v.name.clone(), v.ty.clone()))
            .collect();
        let dir = base.direction(ev);
        if dir == Direction::Receive {
            env.extend(ev.params.iter().map(|p| (p.name.clone(), p.ty.clone())));
        }
        check_guard(&t.guard, &env).map_err(tyerr)?;

        let mut assignable: HashSet<String> = t.outputs.iter().cloned().collect();
        for v in &raw.vars {
            if t.outputs.contains(&v.name) {
                env.insert(v.name.clone(), v.ty.clone());
            }
        }
        if dir != Direction::Receive {
            for p in &ev.params {
                env.insert(p.name.clone(), p.ty.clone());
                assignable.insert(p.name.clone());
            }
        }
        check_block(&t.action, &mut env, &assignable).map_err(tyerr)?;

        transitions.push(ExtTransition {
            from,
            to,
            event: ev.id.clone(),
            guard: t.guard,
            action: t.action,
            inputs: t.inputs,
            outputs: t.outputs,
        });
    }
    for (from, action, to) in base.exit_triples() {
        let event = &base.action(&action).expect("validated").event;
        if !transitions.iter().any(|t| t.from == from && t.to == to && t.event == *event) {
            return Err(ModelError::BaseMismatch(format!(
                "no extended transition for exit {from} --{action}/{event}--> {to}"
            )));
        }
    }
    Ok(ExtendedComponent { base: base.clone(), vars: raw.vars, transitions, trivial: false })
}
