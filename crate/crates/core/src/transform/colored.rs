use crate::colored::{
    ColoredComponent, ColoredSystem, ColoredTransition, Connection, Port, PortTag, RelayKind, StatePlace,
    SvPlace, SysTransition,
};
use crate::expr::Type;
use crate::model::{Direction, ExtendedComponent, System};

use super::{action_src, event_src, exit_src, port_tag, state_src, TransformError, TransformationLog};

/// Builds the three-layer colored component of `e`, naming it `member`.
///
/// Structural layer: one place per state variable holding its initial
/// value. Behavioral layer: one INT place per state, the initial one marked,
/// and one transition per extension transition with its guard, action and
/// arcs to the variables it reads (`in`) and writes (`out`). Communication
/// layer: one port per sent or received event, colored by the product of its
/// parameter types, tagged OUT for sends and IN for receives. Internal
/// events get no port.
pub fn extended_to_colored(
    e: &ExtendedComponent,
    member: &str,
) -> Result<(ColoredComponent, TransformationLog), TransformError> {
    let base = &e.base;
    let mut log = TransformationLog::default();
    let type_err = |detail: String| TransformError::Type { component: member.to_string(), detail };

    let mut structural = Vec::new();
    for v in &e.vars {
        if !v.initial.conforms_to(&v.ty) {
            return Err(type_err(format!("initial value {} of `{}` is not of type {}", v.initial, v.name, v.ty)));
        }
        structural.push(SvPlace { name: v.name.clone(), color: v.ty.clone(), initial: v.initial.clone() });
        log.map(format!("variable {member}.{}", v.name), format!("sv place {}", v.name), "state variable to typed place");
    }

    let mut states = Vec::new();
    for s in &base.states {
        states.push(StatePlace { name: s.name.clone(), state_id: s.id.clone(), initial: s.is_initial });
        log.map(state_src(member, &s.id), format!("state place {}", s.name), "state to INT place");
        if s.is_initial {
            log.map(state_src(member, &s.id), format!("token 0 on {}", s.name), "initial state to instance token");
        }
    }

    let mut ports: Vec<Port> = Vec::new();
    for ev in &base.events {
        if !base.actions.iter().any(|a| a.event == ev.id) {
            continue;
        }
        let params: Vec<(String, Type)> = ev.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
        match port_tag(base.direction(ev)) {
            Some(tag) => {
                log.map(event_src(member, &ev.id), format!("port {} : {} {tag}", ev.name, ev.color()), "event to typed port");
                ports.push(Port { name: ev.name.clone(), event: ev.id.clone(), color: ev.color(), tag, params });
            }
            None => log.map(event_src(member, &ev.id), format!("internal transition on {}", ev.name), "internal event"),
        }
    }

    let mut transitions = Vec::new();
    for t in &e.transitions {
        let from = base.state(&t.from).ok_or_else(|| type_err(format!("unknown state {}", t.from)))?;
        let to = base.state(&t.to).ok_or_else(|| type_err(format!("unknown state {}", t.to)))?;
        let ev = base.event(&t.event).ok_or_else(|| type_err(format!("unknown event {}", t.event)))?;
        for var in t.inputs.iter().chain(&t.outputs) {
            if e.var(var).is_none() {
                return Err(type_err(format!("transition on {} uses undeclared variable `{var}`", ev.name)));
            }
        }
        let port = ports.iter().position(|p| p.event == ev.id);
        let target = format!("transition {} -> {} on {}", from.name, to.name, ev.name);
        for a in base.actions.iter().filter(|a| a.event == ev.id) {
            log.map(action_src(member, &a.id), &target, "action to guarded transition");
            if from.exits.iter().any(|x| x.action == a.id && x.next == to.id) {
                log.map(exit_src(member, &from.id, &a.id, &to.id), &target, "exit to transiting arcs");
            }
        }
        transitions.push(ColoredTransition {
            from: from.name.clone(),
            to: to.name.clone(),
            event: ev.id.clone(),
            event_name: ev.name.clone(),
            guard: t.guard.clone(),
            action: t.action.clone(),
            sv_in: t.inputs.iter().cloned().collect(),
            sv_out: t.outputs.iter().cloned().collect(),
            port,
            params: ev.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect(),
        });
    }
    for (from, action, to) in base.exit_triples() {
        if !log.maps(&exit_src(member, &from, &action, &to)) {
            log.omit(format!("{member}: exit {from} --{action}--> {to} has no transition"));
        }
    }

    let comp = ColoredComponent { name: member.to_string(), structural, states, transitions, ports };
    comp.verify().map_err(type_err)?;
    Ok((comp, log))
}

/// Transforms every member and connects the results as the POI entries
/// prescribe, checking port tags and colors on the way.
pub fn compose_colored(sys: &System) -> Result<(ColoredSystem, TransformationLog), TransformError> {
    let comp = &sys.composition;
    let mut log = TransformationLog::default();
    let mut members = Vec::new();
    for (m, ext) in sys.members() {
        let (c, l) = extended_to_colored(ext, &m.name)?;
        log.extend(l);
        members.push((c, m.instances));
    }
    let index = |name: &str| comp.members.iter().position(|m| m.name == name).expect("resolved");

    let mut connections = Vec::new();
    for p in &comp.poi {
        let sbase = sys.base(&p.sender.0);
        let sev = sbase.event_of_action(&p.sender.1).expect("resolved");
        let internal = p.receivers.len() == 1 && p.receivers[0] == p.sender;
        if internal {
            if sbase.direction(sev) != Direction::Internal {
                return Err(TransformError::PortTag {
                    poi: p.id.clone(),
                    port: format!("{}.{}", p.sender.0, sev.name),
                    tag: port_tag(sbase.direction(sev)).expect("not internal"),
                    wired: "sender and receiver of one internal event",
                });
            }
        } else {
            let si = index(&p.sender.0);
            let sport = members[si].0.port(&sev.name);
            match sport {
                Some(port) if port.tag == PortTag::Out => {}
                Some(port) => {
                    return Err(TransformError::PortTag {
                        poi: p.id.clone(),
                        port: format!("{}.{}", p.sender.0, port.name),
                        tag: port.tag,
                        wired: "sender",
                    })
                }
                None => {
                    return Err(TransformError::Compose(format!(
                        "{}: {} has no port for {}",
                        p.id, p.sender.0, sev.name
                    )))
                }
            }
            let sender_color = sev.color();
            let join = comp.instances_of(&p.sender.0) > 1;
            let forwarded = if join && sender_color != Type::Unit {
                Type::Seq(Box::new(sender_color.clone()))
            } else {
                sender_color.clone()
            };
            for (rm, ra) in &p.receivers {
                let rbase = sys.base(rm);
                let rev = rbase.event_of_action(ra).expect("resolved");
                let ri = index(rm);
                let Some(rport) = members[ri].0.port(&rev.name) else {
                    return Err(TransformError::Compose(format!("{}: {rm} has no port for {}", p.id, rev.name)));
                };
                if rport.tag != PortTag::In {
                    return Err(TransformError::PortTag {
                        poi: p.id.clone(),
                        port: format!("{rm}.{}", rport.name),
                        tag: rport.tag,
                        wired: "receiver",
                    });
                }
                if rport.color != forwarded {
                    return Err(TransformError::ColorMismatch {
                        poi: p.id.clone(),
                        receiver: format!("{rm}.{}", rport.name),
                        expected: rport.color.clone(),
                        found: forwarded.clone(),
                    });
                }
            }
        }
        connections.push(Connection {
            poi: p.id.clone(),
            socket: p.socket_name().to_string(),
            event: sev.name.clone(),
            sender: (index(&p.sender.0), sev.name.clone()),
            receivers: p
                .receivers
                .iter()
                .map(|(rm, ra)| (index(rm), sys.base(rm).event_of_action(ra).expect("resolved").name.clone()))
                .collect(),
            internal,
        });
    }

    let csys = ColoredSystem::compose(comp.name.clone(), members, &connections).map_err(TransformError::Compose)?;
    for c in &connections {
        if c.internal {
            log.map(format!("poi {}", c.poi), format!("internal transition {}.{}", comp.members[c.sender.0].name, c.event), "internal event wiring");
            continue;
        }
        log.map(format!("poi {}", c.poi), format!("socket {}", c.socket), "interaction to socket");
    }
    for t in &csys.transitions {
        if let SysTransition::Relay(r) = t {
            let kind = match r.kind {
                RelayKind::Fork => "fan-out relay",
                RelayKind::Join => "fan-in relay",
            };
            log.map(format!("socket {}", csys.places[r.input].name), format!("relay {}", r.name), kind);
        }
    }
    Ok((csys, log))
}
