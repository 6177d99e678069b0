//! Writers producing documents that parse back to the same structures.

use std::fmt::Write;

use super::types::*;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn terms<'a>(ts: impl Iterator<Item = &'a String>) -> String {
    ts.map(|t| quote(t)).collect::<Vec<_>>().join(", ")
}

fn write_tags(out: &mut String, indent: &str, tags: &SemanticTags) {
    let _ = writeln!(out, "{indent}aoi: {};", terms(tags.aoi.iter()));
    let _ = writeln!(out, "{indent}purpose: {};", terms(tags.purpose.iter()));
}

/// Renders a component, including its extension unless it is trivial.
pub fn component_to_string(ext: &ExtendedComponent) -> String {
    let c = &ext.base;
    let mut out = String::new();
    let _ = writeln!(out, "component {}\n", c.name);
    if let Some(ent) = &c.entity {
        let _ = writeln!(out, "entity {} {{", ent.name);
        for ch in &ent.characteristics {
            let _ = writeln!(out, "  {} {}: {}", ch.id, ch.name, ch.ty);
        }
        let _ = writeln!(out, "}}\n");
    }
    let _ = writeln!(out, "events {{");
    for e in &c.events {
        let _ = write!(out, "  {} {} from {} to {}", e.id, e.name, e.sender, e.receivers.join(", "));
        if !e.params.is_empty() {
            let ps: Vec<String> = e
                .params
                .iter()
                .map(|p| {
                    let mut s = format!("{}: {}", p.name, p.ty);
                    if let Some(cl) = &p.class {
                        s.push_str(&format!(" class {}", quote(cl)));
                    }
                    if let Some(u) = &p.unit {
                        s.push_str(&format!(" unit {}", quote(u)));
                    }
                    s
                })
                .collect();
            let _ = write!(out, " ({})", ps.join(", "));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "}}\n\nactions {{");
    for a in &c.actions {
        let _ = writeln!(out, "  {} {} on {}", a.id, a.name, a.event);
    }
    let _ = writeln!(out, "}}\n\nstates {{");
    for s in &c.states {
        let _ = write!(out, "  {} {}", s.id, s.name);
        for (flag, kw) in [(s.is_initial, "initial"), (s.is_final, "final"), (s.is_goal, "goal")] {
            if flag {
                let _ = write!(out, " {kw}");
            }
        }
        if !s.exits.is_empty() {
            let xs: Vec<String> = s.exits.iter().map(|x| format!("{} -> {}", x.action, x.next)).collect();
            let _ = write!(out, " {{ {} }}", xs.join(", "));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "}}");
    if !c.tags.is_empty() || !c.action_tags.is_empty() {
        let _ = writeln!(out, "\nsemantics {{");
        write_tags(&mut out, "  ", &c.tags);
        for (id, tags) in &c.action_tags {
            let _ = writeln!(out, "  action {id} {{");
            write_tags(&mut out, "    ", tags);
            let _ = writeln!(out, "  }}");
        }
        let _ = writeln!(out, "}}");
    }
    if !ext.trivial {
        let _ = writeln!(out, "\nextension {{\n  variables {{");
        for v in &ext.vars {
            let _ = writeln!(out, "    {}: {} = {};", v.name, v.ty, v.initial);
        }
        let _ = writeln!(out, "  }}\n  transitions {{");
        for t in &ext.transitions {
            let _ = write!(out, "    {} -> {} on {} guard {}", t.from, t.to, t.event, t.guard);
            if !t.inputs.is_empty() {
                let _ = write!(out, " in {}", t.inputs.iter().cloned().collect::<Vec<_>>().join(", "));
            }
            if !t.outputs.is_empty() {
                let _ = write!(out, " out {}", t.outputs.iter().cloned().collect::<Vec<_>>().join(", "));
            }
            if !t.action.is_empty() {
                let body: Vec<String> = t.action.iter().map(|s| s.to_string()).collect();
                let _ = write!(out, " do {{ {} }}", body.join(" "));
            }
            let _ = writeln!(out, ";");
        }
        let _ = writeln!(out, "  }}\n}}");
    }
    out
}

pub fn composition_to_string(c: &ComposedComponent) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "composition {}\n", c.name);
    if let Some(t) = &c.taxonomy {
        let _ = writeln!(out, "taxonomy {}", quote(t));
    }
    if let Some(r) = &c.requirements {
        let _ = writeln!(out, "requirements {}", quote(r));
    }
    let _ = writeln!(out, "members {{");
    for m in &c.members {
        let _ = write!(out, "  {} {}", m.name, quote(&m.path));
        if m.instances != 1 {
            let _ = write!(out, " instances {}", m.instances);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "}}");
    for (kw, refs) in [("act_in", &c.act_in), ("act_out", &c.act_out)] {
        if !refs.is_empty() {
            let _ = writeln!(out, "{kw} {{ {} }}", refs.join(", "));
        }
    }
    if !c.tags.is_empty() {
        let _ = writeln!(out, "semantics {{");
        write_tags(&mut out, "  ", &c.tags);
        let _ = writeln!(out, "}}");
    }
    out.push('\n');
    for p in &c.poi {
        let rs: Vec<String> = p.receivers.iter().map(|(m, a)| format!("?{m}.{a}")).collect();
        let _ = write!(out, "POI {}: !{}.{} -> {}", p.id, p.sender.0, p.sender.1, rs.join(", "));
        match &p.socket {
            Some(s) => {
                let _ = writeln!(out, " socket {s}");
            }
            None => out.push('\n'),
        }
    }
    out
}

pub fn requirements_to_string(r: &RequirementSpec) -> String {
    let mut out = String::new();
    let check = |c: &Option<String>| c.as_ref().map(|n| format!(" check {n}")).unwrap_or_default();
    for o in &r.objectives {
        let _ = writeln!(out, "objective {}: {}{}", o.id, o.description, check(&o.check));
    }
    for c in &r.constraints {
        let _ = writeln!(out, "constraint {}: {}{}", c.id, c.description, check(&c.check));
    }
    for q in &r.queries {
        let mode = match q.mode {
            QueryMode::Reachable => "reachable",
            QueryMode::Never => "never",
            QueryMode::Always => "always",
        };
        let _ = writeln!(out, "query {} {}: {}", q.name, mode, q.predicate);
    }
    out
}
