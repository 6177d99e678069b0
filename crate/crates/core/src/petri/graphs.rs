use std::collections::HashMap;

use crate::statespace::{explore, StateGraph};

use super::net::{Marking, PlaceTransitionNet, Stepper, Tokens};

/// Upper bound on coverability-graph nodes; Karp–Miller graphs are finite but
/// can still be huge.
pub const COVERABILITY_LIMIT: usize = 1_000_000;

/// All markings reachable from `M₀`, at most `budget` of them. Arcs carry the
/// transition id.
pub fn reachability_graph(net: &PlaceTransitionNet, budget: usize) -> StateGraph<Marking> {
    let step = Stepper::new(net);
    let names = net.transitions();
    explore(vec![net.m0()], budget, |m| {
        (0..names.len())
            .filter(|&t| step.enabled(m, t))
            .map(|t| (names[t].clone(), step.fire(m, t)))
            .collect()
    })
}

/// Karp–Miller coverability graph. A successor that strictly covers a marking
/// on its discovery path gets ω in every place where it is larger.
pub fn coverability_graph(net: &PlaceTransitionNet) -> StateGraph<Marking> {
    let step = Stepper::new(net);
    let names = net.transitions();
    let mut g = StateGraph::new();
    let root = g.add_node(net.m0()).expect("open");
    g.add_root(root).expect("open");
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut markings: Vec<Marking> = vec![net.m0()];
    let mut ids: HashMap<Marking, usize> = HashMap::from([(net.m0(), root)]);
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let m = markings[v].clone();
        for t in 0..names.len() {
            if !step.enabled(&m, t) {
                continue;
            }
            let mut next = step.fire(&m, t);
            let mut changed = true;
            while changed {
                changed = false;
                let mut a = Some(v);
                while let Some(anc) = a {
                    let am = &markings[anc];
                    if next.covers(am) && &next != am {
                        for (x, y) in next.0.iter_mut().zip(&am.0) {
                            if *x > *y && *x != Tokens::Omega {
                                *x = Tokens::Omega;
                                changed = true;
                            }
                        }
                    }
                    a = parent[anc];
                }
            }
            let w = match ids.get(&next) {
                Some(&w) => w,
                None => {
                    if markings.len() >= COVERABILITY_LIMIT {
                        g.mark_truncated(v).expect("open");
                        continue;
                    }
                    let w = g.add_node(next.clone()).expect("open");
                    parent.push(Some(v));
                    markings.push(next.clone());
                    ids.insert(next, w);
                    queue.push_back(w);
                    w
                }
            };
            g.add_arc(v, w, names[t].clone()).expect("open");
        }
    }
    g.freeze()
}
