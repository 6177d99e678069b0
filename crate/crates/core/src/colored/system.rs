use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::expr::{Type, Value};

use super::component::{ColoredComponent, PortTag};

/// Layer a place of the composed system belongs to. Socket places sit in the
/// top-level net; all others belong to one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Layer {
    Structural,
    Behavioral,
    Communication,
    Socket,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceDecl {
    pub name: String,
    pub color: Type,
    pub layer: Layer,
    pub component: Option<String>,
    pub initial: Vec<Value>,
}

/// A component transition placed in the composed system, with arcs resolved
/// to place indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompTransition {
    pub component: usize,
    /// Index into the component's transitions.
    pub local: usize,
    pub instances: usize,
    /// State variables and IN ports carry `(instance, value)` tokens when
    /// the component has several instances.
    pub keyed: bool,
    pub state_in: usize,
    pub state_out: usize,
    pub sv_in: Vec<(String, usize)>,
    pub sv_out: Vec<(String, usize)>,
    pub port: Option<(usize, PortTag)>,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelayKind {
    /// Copies one token to every receiver.
    Fork,
    /// Collects one token per sender instance and forwards them together.
    Join,
}

/// Auxiliary transition between a socket and the receivers' IN ports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relay {
    pub name: String,
    pub kind: RelayKind,
    pub input: usize,
    /// Tokens consumed per firing.
    pub take: usize,
    /// Receiver port place and its instance count. With more than one
    /// instance, one copy addressed to each instance is produced.
    pub outputs: Vec<(usize, usize)>,
    /// Join only: pack the collected tokens into a sequence (false for
    /// parameterless events, which forward a single unit token).
    pub pack: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SysTransition {
    Component(CompTransition),
    Relay(Relay),
}

impl SysTransition {
    pub fn label(&self) -> &str {
        match self {
            SysTransition::Component(t) => &t.label,
            SysTransition::Relay(r) => &r.name,
        }
    }
}

/// How one interaction of the composition is realized, used to read the
/// interaction order back from an execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wire {
    pub poi: String,
    pub event: String,
    pub internal: bool,
    /// Sending transitions and the number of sender instances.
    pub senders: Vec<usize>,
    pub sends: usize,
    /// Receiving transitions and the number of receiving instances.
    pub receivers: Vec<usize>,
    pub receipts: usize,
    pub socket: Option<usize>,
}

/// Interaction of the composition to realize: the sender's OUT port and the
/// receivers' IN ports, by component index and port name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub poi: String,
    pub socket: String,
    pub event: String,
    pub sender: (usize, String),
    pub receivers: Vec<(usize, String)>,
    /// Sender and receiver are the same action of one component.
    pub internal: bool,
}

/// A set of colored components connected through socket places.
#[derive(Debug, Clone, Serialize)]
pub struct ColoredSystem {
    pub name: String,
    /// Components with their instance counts.
    pub components: Vec<(ColoredComponent, usize)>,
    pub places: Vec<PlaceDecl>,
    pub transitions: Vec<SysTransition>,
    pub wires: Vec<Wire>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

fn qualified(comp: &str, place: &str) -> String {
    format!("{comp}.{place}")
}

impl ColoredSystem {
    /// A single component in isolation with `instances` instances.
    pub fn standalone(comp: ColoredComponent, instances: usize) -> Result<Self, String> {
        let name = comp.name.clone();
        Self::compose(name, vec![(comp, instances)], &[])
    }

    /// Lays out the places and transitions of `members` and realizes each
    /// connection. A one-to-one connection between single instances fuses
    /// the OUT port, the socket and the IN port into one place; any other
    /// connection gets a socket fed by the sender and a relay transition
    /// named `join_<event>` (several sender instances) or `fork_<event>`.
    pub fn compose(
        name: impl Into<String>,
        members: Vec<(ColoredComponent, usize)>,
        connections: &[Connection],
    ) -> Result<Self, String> {
        let mut sys = ColoredSystem {
            name: name.into(),
            components: Vec::new(),
            places: Vec::new(),
            transitions: Vec::new(),
            wires: Vec::new(),
            index: HashMap::new(),
        };

        // Sockets first decide where each port lives.
        let mut port_alias: HashMap<(usize, String), String> = HashMap::new();
        let mut socket_decls: Vec<(String, Type)> = Vec::new();
        let mut relays_todo: Vec<(&Connection, String)> = Vec::new();
        let mut port_uses: HashMap<(usize, String), usize> = HashMap::new();
        for c in connections.iter().filter(|c| !c.internal) {
            *port_uses.entry(c.sender.clone()).or_default() += 1;
            for r in &c.receivers {
                *port_uses.entry(r.clone()).or_default() += 1;
            }
        }
        for c in connections.iter().filter(|c| !c.internal) {
            let (sc, sp) = &c.sender;
            let sender_port = members[*sc]
                .0
                .port(sp)
                .ok_or_else(|| format!("{}: no port `{sp}` on {}", c.poi, members[*sc].0.name))?;
            if port_uses[&c.sender] > 1 {
                return Err(format!(
                    "{}: port `{}.{sp}` is the sender of several interactions",
                    c.poi, members[*sc].0.name
                ));
            }
            port_alias.insert(c.sender.clone(), c.socket.clone());
            socket_decls.push((c.socket.clone(), sender_port.color.clone()));
            let fused = members[*sc].1 == 1
                && c.receivers.len() == 1
                && members[c.receivers[0].0].1 == 1
                && port_uses[&c.receivers[0]] == 1;
            if fused {
                port_alias.insert(c.receivers[0].clone(), c.socket.clone());
            } else {
                relays_todo.push((c, c.socket.clone()));
            }
        }
        for (s, color) in socket_decls {
            sys.add_place(PlaceDecl { name: s, color, layer: Layer::Socket, component: None, initial: Vec::new() })?;
        }

        for (ci, (comp, n)) in members.iter().enumerate() {
            let keyed = *n > 1;
            for sv in &comp.structural {
                let (color, initial) = if keyed {
                    (
                        Type::Tuple(vec![Type::Int, sv.color.clone()]),
                        (0..*n).map(|i| Value::Tuple(vec![Value::Int(i as i64), sv.initial.clone()])).collect(),
                    )
                } else {
                    (sv.color.clone(), vec![sv.initial.clone()])
                };
                sys.add_place(PlaceDecl {
                    name: qualified(&comp.name, &sv.name),
                    color,
                    layer: Layer::Structural,
                    component: Some(comp.name.clone()),
                    initial,
                })?;
            }
            for st in &comp.states {
                let initial = if st.initial { (0..*n).map(|i| Value::Int(i as i64)).collect() } else { Vec::new() };
                sys.add_place(PlaceDecl {
                    name: qualified(&comp.name, &st.name),
                    color: Type::Int,
                    layer: Layer::Behavioral,
                    component: Some(comp.name.clone()),
                    initial,
                })?;
            }
            for p in &comp.ports {
                if port_alias.contains_key(&(ci, p.name.clone())) {
                    continue;
                }
                // IN ports of a multi-instance component hold tokens
                // addressed to one instance: `(instance, value)`.
                let color = if keyed && p.tag == PortTag::In {
                    Type::Tuple(vec![Type::Int, p.color.clone()])
                } else {
                    p.color.clone()
                };
                sys.add_place(PlaceDecl {
                    name: qualified(&comp.name, &p.name),
                    color,
                    layer: Layer::Communication,
                    component: Some(comp.name.clone()),
                    initial: Vec::new(),
                })?;
            }
        }

        let port_place = |sys: &ColoredSystem, ci: usize, port: &str| -> usize {
            let comp = &members[ci].0;
            let name = port_alias.get(&(ci, port.to_string())).cloned().unwrap_or_else(|| qualified(&comp.name, port));
            sys.index[&name]
        };

        let mut trans_of: HashMap<(usize, usize), usize> = HashMap::new();
        for (ci, (comp, n)) in members.iter().enumerate() {
            for (li, t) in comp.transitions.iter().enumerate() {
                let look = |p: &str| sys.index[&qualified(&comp.name, p)];
                let port = t.port.map(|pi| {
                    let p = &comp.ports[pi];
                    (port_place(&sys, ci, &p.name), p.tag)
                });
                let label = t.event_name.clone();
                let ct = CompTransition {
                    component: ci,
                    local: li,
                    instances: *n,
                    keyed: *n > 1,
                    state_in: look(&t.from),
                    state_out: look(&t.to),
                    sv_in: t.sv_in.iter().map(|v| (v.clone(), look(v))).collect(),
                    sv_out: t.sv_out.iter().map(|v| (v.clone(), look(v))).collect(),
                    port,
                    label: qualified(&comp.name, &label),
                };
                trans_of.insert((ci, li), sys.transitions.len());
                sys.transitions.push(SysTransition::Component(ct));
            }
        }

        let mut relay_names: Vec<String> = Vec::new();
        for (c, socket) in relays_todo {
            let (sc, _) = &c.sender;
            let senders = members[*sc].1;
            let kind = if senders > 1 { RelayKind::Join } else { RelayKind::Fork };
            let base = match kind {
                RelayKind::Join => format!("join_{}", c.event),
                RelayKind::Fork => format!("fork_{}", c.event),
            };
            let name = if relay_names.contains(&base) { format!("{base}_{}", c.poi) } else { base };
            relay_names.push(name.clone());
            let input = sys.index[&socket];
            let pack = sys.places[input].color != Type::Unit;
            let outputs =
                c.receivers.iter().map(|(rc, rp)| (port_place(&sys, *rc, rp), members[*rc].1)).collect();
            sys.transitions.push(SysTransition::Relay(Relay {
                name,
                kind,
                input,
                take: if kind == RelayKind::Join { senders } else { 1 },
                outputs,
                pack: kind == RelayKind::Join && pack,
            }));
        }

        for c in connections {
            let matching = |ci: usize, port: &str| -> Vec<usize> {
                let comp = &members[ci].0;
                comp.transitions
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.event_name == port)
                    .map(|(li, _)| trans_of[&(ci, li)])
                    .collect()
            };
            let senders = matching(c.sender.0, &c.sender.1);
            let sends = members[c.sender.0].1;
            if c.internal {
                sys.wires.push(Wire {
                    poi: c.poi.clone(),
                    event: c.event.clone(),
                    internal: true,
                    senders,
                    sends,
                    receivers: Vec::new(),
                    receipts: 0,
                    socket: None,
                });
            } else {
                let receivers = c.receivers.iter().flat_map(|(rc, rp)| matching(*rc, rp)).collect();
                let receipts = c.receivers.iter().map(|(rc, _)| members[*rc].1).sum();
                sys.wires.push(Wire {
                    poi: c.poi.clone(),
                    event: c.event.clone(),
                    internal: false,
                    senders,
                    sends,
                    receivers,
                    receipts,
                    socket: Some(sys.index[&c.socket]),
                });
            }
        }
        sys.components = members;
        Ok(sys)
    }

    fn add_place(&mut self, p: PlaceDecl) -> Result<(), String> {
        if self.index.contains_key(&p.name) {
            return Err(format!("duplicate place name `{}`", p.name));
        }
        self.index.insert(p.name.clone(), self.places.len());
        self.places.push(p);
        Ok(())
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Places of the top-level net.
    pub fn top_level_places(&self) -> Vec<usize> {
        (0..self.places.len()).filter(|&i| self.places[i].layer == Layer::Socket).collect()
    }

    pub fn initial_marking(&self) -> SystemMarking {
        let mut m = SystemMarking::empty(self.places.len());
        for (i, p) in self.places.iter().enumerate() {
            for v in &p.initial {
                m.add(i, v.clone(), 1);
            }
        }
        m
    }

    pub fn component(&self, name: &str) -> Option<(&ColoredComponent, usize)> {
        self.components.iter().find(|(c, _)| c.name == name).map(|(c, n)| (c, *n))
    }

    /// `comp_transition` resolved to the component's own transition.
    pub fn local_transition(&self, t: &CompTransition) -> &super::component::ColoredTransition {
        &self.components[t.component].0.transitions[t.local]
    }
}

impl fmt::Display for ColoredSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "colored system {}", self.name)?;
        for (c, n) in &self.components {
            writeln!(f, "  component {} x{n}: {} transitions", c.name, c.transitions.len())?;
        }
        writeln!(f, "  places")?;
        for p in &self.places {
            let layer = match p.layer {
                Layer::Structural => "sv",
                Layer::Behavioral => "state",
                Layer::Communication => "port",
                Layer::Socket => "socket",
            };
            write!(f, "    {} : {} [{layer}]", p.name, p.color)?;
            if !p.initial.is_empty() {
                let init: Vec<String> = p.initial.iter().map(|v| v.to_string()).collect();
                write!(f, " = {}", init.join(" ++ "))?;
            }
            writeln!(f)?;
        }
        writeln!(f, "  relays")?;
        for t in &self.transitions {
            if let SysTransition::Relay(r) = t {
                let outs: Vec<String> =
                    r.outputs.iter().map(|(p, k)| format!("{}x{k}", self.places[*p].name)).collect();
                writeln!(f, "    {} : {} -> {}", r.name, self.places[r.input].name, outs.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Multiset of tokens per place. The representation is canonical: tokens
/// are kept sorted, so equal markings compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SystemMarking {
    places: Vec<BTreeMap<Value, u32>>,
}

impl SystemMarking {
    pub fn empty(n: usize) -> Self {
        SystemMarking { places: vec![BTreeMap::new(); n] }
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.iter().all(BTreeMap::is_empty)
    }

    pub fn tokens(&self, place: usize) -> &BTreeMap<Value, u32> {
        &self.places[place]
    }

    pub fn count(&self, place: usize) -> u64 {
        self.places[place].values().map(|&k| k as u64).sum()
    }

    pub fn multiplicity(&self, place: usize, v: &Value) -> u32 {
        self.places[place].get(v).copied().unwrap_or(0)
    }

    pub fn add(&mut self, place: usize, v: Value, k: u32) {
        if k > 0 {
            *self.places[place].entry(v).or_default() += k;
        }
    }

    /// Removes `k` copies of `v`; false (and no change) if there are fewer.
    pub fn remove(&mut self, place: usize, v: &Value, k: u32) -> bool {
        match self.places[place].get_mut(v) {
            Some(have) if *have >= k => {
                *have -= k;
                if *have == 0 {
                    self.places[place].remove(v);
                }
                true
            }
            _ => false,
        }
    }

    /// Canonical text, one non-empty place per line in place order, e.g.
    /// ``Queue.rear: 1`2``.
    pub fn describe(&self, sys: &ColoredSystem) -> String {
        self.describe_where(sys, |_| true)
    }

    /// Like [`describe`](Self::describe) restricted to places accepted by
    /// `keep`; used to trim descriptions to the top-level net.
    pub fn describe_where(&self, sys: &ColoredSystem, keep: impl Fn(&PlaceDecl) -> bool) -> String {
        let mut lines = Vec::new();
        for (i, toks) in self.places.iter().enumerate() {
            if toks.is_empty() || !keep(&sys.places[i]) {
                continue;
            }
            let ms: Vec<String> = toks.iter().map(|(v, k)| format!("{k}`{v}")).collect();
            lines.push(format!("{}: {}", sys.places[i].name, ms.join(" ++ ")));
        }
        lines.join("\n")
    }
}
