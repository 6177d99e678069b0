use num_traits::{Signed, Zero};
use serde::Serialize;

use super::algebra::incidence;
use super::graphs::{coverability_graph, reachability_graph};
use super::invariants::{p_invariants_of, t_invariants_of, Invariant};
use super::net::{Marking, PlaceTransitionNet, Tokens};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Boundedness {
    /// Largest token count seen per place.
    Bounded(Vec<u64>),
    /// Places that can hold arbitrarily many tokens.
    Unbounded(Vec<String>),
}

pub fn check_boundedness(net: &PlaceTransitionNet) -> Boundedness {
    let g = coverability_graph(net);
    let n = net.places().len();
    let mut max = vec![0u64; n];
    let mut omega = vec![false; n];
    for node in g.nodes() {
        for (p, t) in node.marking.0.iter().enumerate() {
            match t {
                Tokens::Finite(k) => max[p] = max[p].max(*k),
                Tokens::Omega => omega[p] = true,
            }
        }
    }
    if omega.iter().any(|&o| o) {
        Boundedness::Unbounded(
            net.places().iter().zip(&omega).filter(|(_, &o)| o).map(|(p, _)| p.clone()).collect(),
        )
    } else {
        Boundedness::Bounded(max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DeadlockVerdict {
    DeadlockFree,
    /// A reachable marking with no enabled transition, and a firing sequence to it.
    Deadlock { marking: Marking, path: Vec<String> },
    /// The reachable set exceeded the budget and the coverability graph
    /// showed no concrete dead marking.
    Inconclusive,
}

pub fn check_deadlock_free(net: &PlaceTransitionNet, budget: usize) -> DeadlockVerdict {
    check_deadlock_free_with(net, budget, |_| false)
}

/// Like [`check_deadlock_free`], but markings accepted by `is_final` may be dead.
pub fn check_deadlock_free_with(
    net: &PlaceTransitionNet,
    budget: usize,
    is_final: impl Fn(&Marking) -> bool,
) -> DeadlockVerdict {
    let g = reachability_graph(net, budget);
    let dead = g
        .list_dead_markings()
        .nodes
        .into_iter()
        .find(|&n| !is_final(&g.node(n).expect("node").marking));
    if let Some(n) = dead {
        let target = g.node(n).expect("node").marking.clone();
        let path = g.path_exists(0, |m| *m == target).expect("reachable");
        return DeadlockVerdict::Deadlock { marking: target, path: path.arcs.into_iter().map(|a| a.label).collect() };
    }
    if !g.budget_exceeded() {
        return DeadlockVerdict::DeadlockFree;
    }
    // ω-free coverability nodes are genuinely reachable markings.
    let cg = coverability_graph(net);
    for n in cg.list_dead_markings().nodes {
        let m = &cg.node(n).expect("node").marking;
        if !m.has_omega() && !is_final(m) {
            let path = cg.path_exists(0, |x| x == m).expect("reachable");
            return DeadlockVerdict::Deadlock { marking: m.clone(), path: path.arcs.into_iter().map(|a| a.label).collect() };
        }
    }
    DeadlockVerdict::Inconclusive
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum UnfairReason {
    /// More than one minimal T-invariant: no unique reproduction vector.
    MultipleReproductionVectors { count: usize },
    /// The reproduction vector, if any, does not fire every transition, or
    /// yields a negative token change.
    ZeroEntry { transitions: Vec<String> },
    /// No P-invariant exists.
    NotStructurallyBounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FairnessVerdict {
    Fair { reproduction_vector: Invariant, p_invariants: usize },
    Unfair(UnfairReason),
}

impl FairnessVerdict {
    pub fn is_fair(&self) -> bool {
        matches!(self, FairnessVerdict::Fair { .. })
    }
}

/// Bounded-fairness check: exactly one minimal T-invariant, strictly
/// positive with `Aᵀ·x ≥ 0`, and at least one P-invariant.
pub fn check_b_fairness(net: &PlaceTransitionNet) -> FairnessVerdict {
    let inc = incidence(net);
    let tinv = t_invariants_of(&inc);
    let x = match tinv.minimal.as_slice() {
        [x] => x,
        [] => {
            return FairnessVerdict::Unfair(UnfairReason::ZeroEntry { transitions: net.transitions().to_vec() })
        }
        many => return FairnessVerdict::Unfair(UnfairReason::MultipleReproductionVectors { count: many.len() }),
    };
    let zero: Vec<String> = x
        .vector
        .iter()
        .zip(net.transitions())
        .filter(|(v, _)| v.is_zero())
        .map(|(_, t)| t.clone())
        .collect();
    if !zero.is_empty() || inc.apply_to_transitions(&x.vector).iter().any(Signed::is_negative) {
        return FairnessVerdict::Unfair(UnfairReason::ZeroEntry { transitions: zero });
    }
    let pinv = p_invariants_of(&inc);
    if pinv.minimal.is_empty() {
        return FairnessVerdict::Unfair(UnfairReason::NotStructurallyBounded);
    }
    FairnessVerdict::Fair {
        reproduction_vector: x.clone(),
        p_invariants: pinv.minimal.len(),
    }
}
