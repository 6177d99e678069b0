use std::collections::HashMap;

use crate::model::System;
use crate::petri::PlaceTransitionNet;

use super::{action_src, event_src, exit_src, state_src, TransformError, TransformationLog};

/// One machine instance taking part in an interaction with the given action.
struct Participant<'a> {
    member: &'a str,
    instance: usize,
    action: &'a str,
}

/// Flattens a composition of state machines into one P/T net.
///
/// Every state of every member instance becomes a place, in member
/// declaration order, with one token on each initial state. Every POI entry
/// becomes one transition `Tk` shared by the sender and all receivers, all
/// instances of each taking part. When participants have several exits on
/// their action, one transition `Tk.j` is created per combination of exits.
/// Open compositions get one interface transition `Ik` per exit of each
/// declared input or output action.
pub fn composition_to_ptnet(sys: &System) -> Result<(PlaceTransitionNet, TransformationLog), TransformError> {
    let comp = &sys.composition;
    let mut net = PlaceTransitionNet::new(comp.name.clone());
    let mut log = TransformationLog::default();
    // (member, instance, state id) -> place name
    let mut place: HashMap<(String, usize, String), String> = HashMap::new();

    for (m, ext) in sys.members() {
        let base = &ext.base;
        for i in 0..m.instances {
            for s in &base.states {
                let id = format!("P{}", net.places().len() + 1);
                net.add_place(&id, u64::from(s.is_initial))?;
                let who = if m.instances > 1 { format!("{}#{i}.{}", m.name, s.name) } else { format!("{}.{}", m.name, s.name) };
                log.map(state_src(&m.name, &s.id), format!("{id} ({who})"), "state to place");
                if s.is_initial {
                    log.map(state_src(&m.name, &s.id), format!("{id} holds 1 token"), "initial state to token");
                }
                place.insert((m.name.clone(), i, s.id.clone()), id);
            }
        }
    }

    // Every action must be paired, or declared as an interface of an open
    // composition.
    let mut interface = Vec::new();
    for (m, ext) in sys.members() {
        for a in &ext.base.actions {
            let wired = comp.poi.iter().any(|p| {
                (p.sender.0 == m.name && p.sender.1 == a.id) || p.receivers.iter().any(|r| r.0 == m.name && r.1 == a.id)
            });
            if wired {
                continue;
            }
            let key = format!("{}.{}", m.name, a.id);
            if comp.act_in.contains(&key) || comp.act_out.contains(&key) {
                interface.push((m.name.as_str(), a.id.as_str()));
            } else {
                return Err(TransformError::UnpairedEvent {
                    member: m.name.clone(),
                    action: a.id.clone(),
                    event: ext.base.event_of_action(&a.id).map(|e| e.name.clone()).unwrap_or_default(),
                });
            }
        }
    }

    let exits_of = |member: &str, action: &str| -> Vec<(String, String)> {
        sys.base(member)
            .exit_triples()
            .into_iter()
            .filter(|(_, a, _)| a == action)
            .map(|(from, _, to)| (from, to))
            .collect()
    };

    let mut k = 0;
    for p in &comp.poi {
        let mut parts: Vec<Participant> = Vec::new();
        let mut conflict = None;
        for (mem, act) in std::iter::once(&p.sender).chain(&p.receivers) {
            for i in 0..comp.instances_of(mem) {
                match parts.iter().find(|q| q.member == mem && q.instance == i) {
                    Some(q) if q.action == act => {}
                    Some(q) => conflict = Some(format!("{mem} takes part with both {} and {act}", q.action)),
                    None => parts.push(Participant { member: mem, instance: i, action: act }),
                }
            }
        }
        if let Some(why) = conflict {
            log.omit(format!("{}: no transition, {why}", p.id));
            continue;
        }
        let choices: Vec<Vec<(String, String)>> = parts.iter().map(|q| exits_of(q.member, q.action)).collect();
        if let Some(q) = parts.iter().zip(&choices).find(|(_, c)| c.is_empty()).map(|(q, _)| q) {
            log.omit(format!("{}: no transition, {} has no exit on {}", p.id, q.member, q.action));
            continue;
        }
        k += 1;
        let sizes: Vec<usize> = choices.iter().map(Vec::len).collect();
        let combos = cartesian(&sizes);
        let single = combos.len() == 1;
        let event = sys.base(&p.sender.0).event_of_action(&p.sender.1).expect("resolved");
        for (j, combo) in combos.iter().enumerate() {
            let t = if single { format!("T{k}") } else { format!("T{k}.{}", j + 1) };
            net.add_transition(&t)?;
            log.map(format!("poi {}", p.id), &t, "paired event to shared transition");
            log.map(event_src(&p.sender.0, &event.id), &t, "paired event to shared transition");
            for (qi, (q, &c)) in parts.iter().zip(combo).enumerate() {
                let (from, to) = &choices[qi][c];
                let pin = &place[&(q.member.to_string(), q.instance, from.clone())];
                let pout = &place[&(q.member.to_string(), q.instance, to.clone())];
                net.add_arc(pin, &t, 1)?;
                net.add_arc(&t, pout, 1)?;
                let base = sys.base(q.member);
                let ev = base.event_of_action(q.action).expect("resolved");
                log.map(event_src(q.member, &ev.id), &t, "paired event to shared transition");
                log.map(action_src(q.member, q.action), &t, "action to transition");
                log.map(exit_src(q.member, from, q.action, to), format!("{pin} -> {t} -> {pout}"), "exit to arc pair");
            }
        }
    }

    let mut i = 0;
    for (mem, act) in interface {
        let base = sys.base(mem);
        let ev = base.event_of_action(act).expect("resolved");
        for inst in 0..comp.instances_of(mem) {
            for (from, to) in exits_of(mem, act) {
                i += 1;
                let t = format!("I{i}");
                net.add_transition(&t)?;
                let pin = &place[&(mem.to_string(), inst, from.clone())];
                let pout = &place[&(mem.to_string(), inst, to.clone())];
                net.add_arc(pin, &t, 1)?;
                net.add_arc(&t, pout, 1)?;
                log.map(event_src(mem, &ev.id), &t, "interface event to transition");
                log.map(action_src(mem, act), &t, "action to transition");
                log.map(exit_src(mem, &from, act, &to), format!("{pin} -> {t} -> {pout}"), "exit to arc pair");
            }
        }
    }

    for n in net.isolated_nodes() {
        if net.transition_index(&n).is_some() {
            log.omit(format!("transition {n} has no arcs"));
        }
    }
    Ok((net, log))
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}
