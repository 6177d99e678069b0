use std::collections::BTreeSet;

use crate::colored::{enabled_bindings, fire_binding, ColoredSystem, EngineError, Layer, SystemMarking};
use crate::petri::{reachability_graph, Marking, PlaceTransitionNet};

use super::graph::{try_explore, StateGraph};

/// Default node budget for generation.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Arc label of a colored binding: the transition label, plus `#i` for an
/// instance of a multi-instance component.
pub fn binding_label(label: &str, instance: Option<i64>) -> String {
    match instance {
        Some(i) => format!("{label}#{i}"),
        None => label.to_string(),
    }
}

/// The transition part of an arc label, without the instance suffix.
pub fn arc_transition(label: &str) -> &str {
    label.split_once('#').map_or(label, |(t, _)| t)
}

/// The event part of an arc label: `Battery.Fire#1` gives `Fire`.
pub fn arc_event(label: &str) -> &str {
    let t = arc_transition(label);
    t.rsplit_once('.').map_or(t, |(_, e)| e)
}

/// Colored successors of `m`, one per distinct (label, marking) pair.
pub fn colored_successors(sys: &ColoredSystem, m: &SystemMarking) -> Result<Vec<(String, SystemMarking)>, EngineError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for b in enabled_bindings(sys, m)? {
        let next = fire_binding(sys, m, &b)?;
        let label = binding_label(&b.label, b.instance);
        if seen.insert((label.clone(), next.clone())) {
            out.push((label, next));
        }
    }
    Ok(out)
}

/// Breadth-first state space of a colored system from its initial marking.
pub fn generate_colored(sys: &ColoredSystem, budget: usize) -> Result<StateGraph<SystemMarking>, EngineError> {
    try_explore(vec![sys.initial_marking()], budget, |m| colored_successors(sys, m))
}

/// Reachability graph of a P/T net; arcs carry transition ids.
pub fn generate_ptnet(net: &PlaceTransitionNet, budget: usize) -> StateGraph<Marking> {
    reachability_graph(net, budget)
}

/// Default retention for compositional reduction: some top-level (socket)
/// place holds a token.
pub fn top_level_nonempty(sys: &ColoredSystem) -> impl Fn(&SystemMarking) -> bool {
    let top = sys.top_level_places();
    move |m| top.iter().any(|&p| m.count(p) > 0)
}

/// Marking description trimmed to the top-level places.
pub fn top_level_description<'a>(sys: &'a ColoredSystem) -> impl Fn(&SystemMarking) -> String + 'a {
    move |m| m.describe_where(sys, |p| p.layer == Layer::Socket)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(binding_label("Battery.Fire", Some(1)), "Battery.Fire#1");
        assert_eq!(arc_event("Battery.Fire#1"), "Fire");
        assert_eq!(arc_transition("Battery.Fire#1"), "Battery.Fire");
        assert_eq!(arc_event("join_Fire"), "join_Fire");
    }
}
