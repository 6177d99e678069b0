use std::fmt;

use serde::Serialize;

use crate::expr::{Block, Expr, Type, Value};

/// Direction of a communication port as seen from its component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PortTag {
    In,
    Out,
}

impl fmt::Display for PortTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PortTag::In => "IN",
            PortTag::Out => "OUT",
        })
    }
}

/// Structural layer: one place per state variable with its initial token.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvPlace {
    pub name: String,
    pub color: Type,
    pub initial: Value,
}

/// Behavioral layer place for one state; its tokens are instance ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatePlace {
    pub name: String,
    pub state_id: String,
    pub initial: bool,
}

/// Communication layer place for one event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Port {
    /// The event name; also the place name inside the component.
    pub name: String,
    pub event: String,
    pub color: Type,
    pub tag: PortTag,
    pub params: Vec<(String, Type)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoredTransition {
    /// State place names.
    pub from: String,
    pub to: String,
    pub event: String,
    pub event_name: String,
    #[serde(serialize_with = "ser_display")]
    pub guard: Expr,
    #[serde(serialize_with = "ser_block")]
    pub action: Block,
    /// State variables read through an incoming sv-arc.
    pub sv_in: Vec<String>,
    /// State variables written through an outgoing sv-arc.
    pub sv_out: Vec<String>,
    /// Index into the component's ports; `None` for internal events.
    pub port: Option<usize>,
    /// Event parameters visible to the guard (IN) or assignable by the
    /// action (OUT and internal).
    pub params: Vec<(String, Type)>,
}

fn ser_display<S: serde::Serializer, T: fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_block<S: serde::Serializer>(b: &Block, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&b.iter().map(|st| st.to_string()).collect::<Vec<_>>().join(" "))
}

/// An executable component in three layers: state variables, the state
/// machine, and typed ports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoredComponent {
    pub name: String,
    pub structural: Vec<SvPlace>,
    pub states: Vec<StatePlace>,
    pub transitions: Vec<ColoredTransition>,
    pub ports: Vec<Port>,
}

impl ColoredComponent {
    pub fn sv(&self, name: &str) -> Option<&SvPlace> {
        self.structural.iter().find(|p| p.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn port_of_event(&self, event: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.event == event)
    }

    pub fn state(&self, name: &str) -> Option<&StatePlace> {
        self.states.iter().find(|s| s.name == name)
    }

    /// Every place name of the component with its layer.
    pub fn place_names(&self) -> Vec<(&str, &'static str)> {
        let mut out: Vec<(&str, &'static str)> = Vec::new();
        out.extend(self.structural.iter().map(|p| (p.name.as_str(), "structural")));
        out.extend(self.states.iter().map(|p| (p.name.as_str(), "behavioral")));
        out.extend(self.ports.iter().map(|p| (p.name.as_str(), "communication")));
        out
    }

    /// Checks the typing invariants: port colors are the product of their
    /// parameter types, arcs reference existing places, and every place name
    /// belongs to exactly one layer.
    pub fn verify(&self) -> Result<(), String> {
        let names = self.place_names();
        for (i, (n, layer)) in names.iter().enumerate() {
            if let Some((_, other)) = names[..i].iter().find(|(m, _)| m == n) {
                return Err(format!("place `{n}` appears in the {other} and {layer} layers"));
            }
        }
        for p in &self.ports {
            let product = Type::product(&p.params.iter().map(|(_, t)| t.clone()).collect::<Vec<_>>());
            if product != p.color {
                return Err(format!("port `{}` has color {} but its parameters give {product}", p.name, p.color));
            }
        }
        for sv in &self.structural {
            if !sv.initial.conforms_to(&sv.color) {
                return Err(format!("initial token {} of `{}` is not of color {}", sv.initial, sv.name, sv.color));
            }
        }
        for t in &self.transitions {
            for s in [&t.from, &t.to] {
                if self.state(s).is_none() {
                    return Err(format!("transition on {} cites unknown state `{s}`", t.event_name));
                }
            }
            for v in t.sv_in.iter().chain(&t.sv_out) {
                if self.sv(v).is_none() {
                    return Err(format!("transition on {} cites unknown state variable `{v}`", t.event_name));
                }
            }
            if let Some(i) = t.port {
                let p = self.ports.get(i).ok_or_else(|| format!("transition on {} has no port {i}", t.event_name))?;
                if p.params != t.params {
                    return Err(format!("transition on {} disagrees with port `{}` on parameters", t.event_name, p.name));
                }
            }
        }
        if self.states.iter().filter(|s| s.initial).count() != 1 {
            return Err(format!("component `{}` needs exactly one initial state place", self.name));
        }
        Ok(())
    }
}

impl fmt::Display for ColoredComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "colored component {}", self.name)?;
        writeln!(f, "  structural")?;
        for p in &self.structural {
            writeln!(f, "    {}: {} = {}", p.name, p.color, p.initial)?;
        }
        writeln!(f, "  behavioral")?;
        for s in &self.states {
            writeln!(f, "    {}: INT{}", s.name, if s.initial { " initial" } else { "" })?;
        }
        for t in &self.transitions {
            write!(f, "    {} -> {} on {}", t.from, t.to, t.event_name)?;
            if t.guard != Expr::Lit(Value::Bool(true)) {
                write!(f, " guard {}", t.guard)?;
            }
            if !t.sv_in.is_empty() {
                write!(f, " in {}", t.sv_in.join(", "))?;
            }
            if !t.sv_out.is_empty() {
                write!(f, " out {}", t.sv_out.join(", "))?;
            }
            writeln!(f)?;
        }
        writeln!(f, "  communication")?;
        for p in &self.ports {
            writeln!(f, "    {}: {} {}", p.name, p.color, p.tag)?;
        }
        Ok(())
    }
}
