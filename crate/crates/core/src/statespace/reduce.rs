//! Compositional reduction: keep only the nodes a retention predicate
//! accepts, and splice every path that runs through removed nodes into a
//! direct arc.
//!
//! For a retained node `u` and an out-arc `u -l-> x`, the reduced graph has
//! `u -l-> e` for every retained `e` reachable from `x` through removed
//! nodes only (just `x` when `x` is retained). This is the result of
//! deleting removed nodes one at a time and linking each predecessor to each
//! successor. Self-arcs that only arise from splicing are dropped; original
//! self-loops stay. Duplicate `(from, to, label)` arcs are merged.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

use super::graph::StateGraph;

/// Emitted when an initial node is removed. The reduced graph's roots are
/// then the retained nodes first reached from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootRemovedWarning {
    /// Removed roots (node ids of the original graph, or their count on the
    /// fly where removed nodes get no id).
    pub removed: Vec<usize>,
    pub new_roots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    /// Nodes of the unreduced graph (states visited, on the fly).
    pub original_nodes: usize,
    /// Arcs of the unreduced graph; unknown on the fly.
    pub original_arcs: Option<usize>,
    pub nodes: usize,
    pub arcs: usize,
    /// Spliced arcs that would have been self-arcs.
    pub dropped_self_arcs: usize,
    /// Spliced arcs that duplicated an existing `(from, to, label)`.
    pub merged_arcs: usize,
    pub root_removed: Option<RootRemovedWarning>,
}

impl fmt::Display for ReductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |a: usize, b: usize| if b == 0 { 100.0 } else { 100.0 * a as f64 / b as f64 };
        writeln!(
            f,
            "nodes: {} -> {} ({:.1}%)",
            self.original_nodes,
            self.nodes,
            pct(self.nodes, self.original_nodes)
        )?;
        match self.original_arcs {
            Some(a) => writeln!(f, "arcs: {a} -> {} ({:.1}%)", self.arcs, pct(self.arcs, a))?,
            None => writeln!(f, "arcs: {}", self.arcs)?,
        }
        writeln!(f, "dropped self-arcs: {}", self.dropped_self_arcs)?;
        writeln!(f, "merged duplicate arcs: {}", self.merged_arcs)?;
        if let Some(w) = &self.root_removed {
            writeln!(f, "warning: {} root(s) removed; new roots {:?}", w.removed.len(), w.new_roots)?;
        }
        Ok(())
    }
}

/// Collects arcs for the reduced graph, dropping spliced self-arcs and
/// duplicates.
#[derive(Default)]
struct ArcSink {
    seen: HashSet<(usize, usize, String)>,
    arcs: Vec<(usize, usize, String)>,
    dropped_self: usize,
    merged: usize,
}

impl ArcSink {
    fn push(&mut self, from: usize, to: usize, label: &str, spliced: bool) {
        if spliced && from == to {
            self.dropped_self += 1;
            return;
        }
        if self.seen.insert((from, to, label.to_string())) {
            self.arcs.push((from, to, label.to_string()));
        } else {
            self.merged += 1;
        }
    }
}

/// Retained exits of the removed region entered at `start`, in BFS order,
/// and whether the search touched a truncated node.
fn exits<K: Clone + Eq + Hash>(
    start: K,
    retained: &impl Fn(&K) -> bool,
    mut step: impl FnMut(&K) -> (Vec<K>, bool),
) -> (Vec<K>, bool) {
    let mut seen = HashSet::from([start.clone()]);
    let mut found = HashSet::new();
    let mut out = Vec::new();
    let mut truncated = false;
    let mut q = VecDeque::from([start]);
    while let Some(v) = q.pop_front() {
        let (succ, t) = step(&v);
        truncated |= t;
        for w in succ {
            if retained(&w) {
                if found.insert(w.clone()) {
                    out.push(w);
                }
            } else if seen.insert(w.clone()) {
                q.push_back(w);
            }
        }
    }
    (out, truncated)
}

/// Post-hoc reduction of a generated graph. Retained nodes keep their ids
/// and markings; every node of the result is flagged retained.
pub fn reduce_compositional<M: Clone>(
    g: &StateGraph<M>,
    retain: impl Fn(&M) -> bool,
) -> (StateGraph<M>, ReductionReport) {
    let keep: BTreeSet<usize> = g.nodes().filter(|n| retain(&n.marking)).map(|n| n.id).collect();
    let is_kept = |id: &usize| keep.contains(id);
    let mut cache: HashMap<usize, (Vec<usize>, bool)> = HashMap::new();
    let mut exits_of = |x: usize| {
        cache
            .entry(x)
            .or_insert_with(|| exits(x, &is_kept, |&v| (g.successors(v).collect(), g.is_truncated(v))))
            .clone()
    };

    let mut out = StateGraph::new();
    let mut sink = ArcSink::default();
    let mut truncated = BTreeSet::new();
    for &u in &keep {
        out.insert_node(u, g.node(u).expect("node").marking.clone()).expect("open");
        if g.is_truncated(u) {
            truncated.insert(u);
        }
        for a in g.out_arcs(u) {
            if keep.contains(&a.to) {
                sink.push(u, a.to, &a.label, false);
                continue;
            }
            let (ex, t) = exits_of(a.to);
            if t {
                truncated.insert(u);
            }
            for e in ex {
                sink.push(u, e, &a.label, true);
            }
        }
    }
    for (from, to, label) in &sink.arcs {
        out.add_arc(*from, *to, label.clone()).expect("kept nodes");
    }

    let mut roots = BTreeSet::new();
    let mut removed = Vec::new();
    for r in g.roots() {
        if keep.contains(&r) {
            roots.insert(r);
        } else {
            removed.push(r);
            roots.extend(exits_of(r).0);
        }
    }
    for &r in &roots {
        out.add_root(r).expect("kept node");
    }
    for t in truncated {
        out.mark_truncated(t).expect("open");
    }
    if g.budget_exceeded() {
        out.set_budget_exceeded(true).expect("open");
    }
    let report = ReductionReport {
        original_nodes: g.node_count(),
        original_arcs: Some(g.arc_count()),
        nodes: out.node_count(),
        arcs: out.arc_count(),
        dropped_self_arcs: sink.dropped_self,
        merged_arcs: sink.merged,
        root_removed: (!removed.is_empty()).then(|| RootRemovedWarning { removed, new_roots: roots.into_iter().collect() }),
    };
    (out.freeze(), report)
}

/// Reduction during generation: removed states are explored but never
/// stored. The result equals [`reduce_compositional`] applied to the full
/// graph, up to node numbering (retained nodes are numbered in discovery
/// order here). `budget` bounds the number of distinct states visited.
pub fn generate_reduced<M, E, F>(
    roots: Vec<M>,
    budget: usize,
    retain: impl Fn(&M) -> bool,
    mut successors: F,
) -> Result<(StateGraph<M>, ReductionReport), E>
where
    M: Clone + Eq + Hash,
    F: FnMut(&M) -> Result<Vec<(String, M)>, E>,
{
    let mut visited: HashSet<M> = HashSet::new();
    let mut over_budget = false;
    // Successors of `m`, with the ones beyond the budget cut off.
    let mut expand = |m: &M, visited: &mut HashSet<M>| -> Result<(Vec<(String, M)>, bool), E> {
        let mut cut = false;
        let mut out = Vec::new();
        for (l, x) in successors(m)? {
            if !visited.contains(&x) {
                if visited.len() >= budget {
                    cut = true;
                    continue;
                }
                visited.insert(x.clone());
            }
            out.push((l, x));
        }
        Ok((out, cut))
    };

    let mut g = StateGraph::new();
    let mut ids: HashMap<M, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut cache: HashMap<M, (Vec<M>, bool)> = HashMap::new();
    let mut sink = ArcSink::default();
    let mut truncated = BTreeSet::new();

    // Exits of the removed region at `x`, memoized per entry state.
    macro_rules! exits_of {
        ($x:expr) => {{
            let x: M = $x;
            if let Some(hit) = cache.get(&x) {
                hit.clone()
            } else {
                let mut err = None;
                let res = exits(x.clone(), &retain, |v| {
                    if err.is_some() {
                        return (Vec::new(), false);
                    }
                    match expand(v, &mut visited) {
                        Ok((succ, cut)) => (succ.into_iter().map(|(_, w)| w).collect(), cut),
                        Err(e) => {
                            err = Some(e);
                            (Vec::new(), false)
                        }
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                cache.insert(x, res.clone());
                res
            }
        }};
    }
    macro_rules! id_of {
        ($m:expr) => {{
            let m: M = $m;
            match ids.get(&m) {
                Some(&id) => id,
                None => {
                    let id = g.add_node(m.clone()).expect("open");
                    ids.insert(m, id);
                    queue.push_back(id);
                    id
                }
            }
        }};
    }

    let mut root_ids = BTreeSet::new();
    let mut removed_roots = 0;
    for r in roots {
        if !visited.contains(&r) {
            if visited.len() >= budget {
                over_budget = true;
                continue;
            }
            visited.insert(r.clone());
        }
        if retain(&r) {
            root_ids.insert(id_of!(r));
        } else {
            removed_roots += 1;
            let (ex, t) = exits_of!(r);
            over_budget |= t;
            for e in ex {
                root_ids.insert(id_of!(e));
            }
        }
    }

    while let Some(u) = queue.pop_front() {
        let m = g.node(u).expect("node").marking.clone();
        let (succ, cut) = expand(&m, &mut visited)?;
        if cut {
            truncated.insert(u);
        }
        for (label, x) in succ {
            if retain(&x) {
                let w = id_of!(x);
                sink.push(u, w, &label, false);
                continue;
            }
            let (ex, t) = exits_of!(x);
            if t {
                truncated.insert(u);
            }
            for e in ex {
                let w = id_of!(e);
                sink.push(u, w, &label, true);
            }
        }
    }
    for (from, to, label) in &sink.arcs {
        g.add_arc(*from, *to, label.clone()).expect("stored nodes");
    }
    for &r in &root_ids {
        g.add_root(r).expect("stored node");
    }
    for t in truncated {
        g.mark_truncated(t).expect("open");
    }
    if over_budget {
        g.set_budget_exceeded(true).expect("open");
    }
    let report = ReductionReport {
        original_nodes: visited.len(),
        original_arcs: None,
        nodes: g.node_count(),
        arcs: g.arc_count(),
        dropped_self_arcs: sink.dropped_self,
        merged_arcs: sink.merged,
        root_removed: (removed_roots > 0).then(|| RootRemovedWarning {
            removed: (0..removed_roots).collect(),
            new_roots: root_ids.into_iter().collect(),
        }),
    };
    Ok((g.freeze(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::explore;

    fn chain(n: u32) -> StateGraph<u32> {
        explore(vec![1u32], 100, |&k| if k < n { vec![(format!("t{k}"), k + 1)] } else { vec![] })
    }

    #[test]
    fn five_chain_keeps_endpoints() {
        let (r, rep) = reduce_compositional(&chain(5), |&m| m == 1 || m == 5);
        assert_eq!(r.node_count(), 2);
        assert_eq!(r.arc_count(), 1);
        assert_eq!(r.arcs()[0].label, "t1");
        assert_eq!(rep.root_removed, None);
    }

    #[test]
    fn identity_when_all_retained() {
        let g = chain(4);
        let (r, rep) = reduce_compositional(&g, |_| true);
        assert_eq!(r.arcs(), g.arcs());
        assert_eq!(r.node_ids().collect::<Vec<_>>(), g.node_ids().collect::<Vec<_>>());
        assert_eq!(rep.dropped_self_arcs, 0);
    }

    #[test]
    fn cycle_through_removed_node_drops_self_arc() {
        // 0 -> 1 -> 0, and 0 has a real self-loop
        let g = explore(vec![0u8], 10, |&k| match k {
            0 => vec![("a".into(), 1), ("loop".into(), 0)],
            _ => vec![("b".into(), 0)],
        });
        let (r, rep) = reduce_compositional(&g, |&m| m == 0);
        assert_eq!(r.arc_count(), 1);
        assert_eq!(r.arcs()[0].label, "loop");
        assert_eq!(rep.dropped_self_arcs, 1);
    }

    #[test]
    fn removed_root_is_replaced_by_its_exits() {
        let (r, rep) = reduce_compositional(&chain(5), |&m| m >= 3);
        assert_eq!(r.roots().collect::<Vec<_>>(), vec![2]);
        let w = rep.root_removed.unwrap();
        assert_eq!(w.removed, vec![0]);
        assert_eq!(w.new_roots, vec![2]);
    }

    #[test]
    fn on_the_fly_matches_post_hoc() {
        let succ = |&k: &u32| -> Result<Vec<(String, u32)>, ()> {
            Ok(vec![(format!("x{}", k % 3), (k * 7 + 3) % 40), (format!("y{}", k % 2), (k + 5) % 40)])
        };
        let g = explore(vec![0u32], 1000, |k| succ(k).unwrap());
        let retain = |&k: &u32| k % 4 == 1;
        let (post, a) = reduce_compositional(&g, retain);
        let (fly, b) = generate_reduced(vec![0u32], 1000, retain, succ).unwrap();
        let arcs = |h: &StateGraph<u32>| -> BTreeSet<(u32, u32, String)> {
            h.arcs()
                .iter()
                .map(|x| (h.node(x.from).unwrap().marking, h.node(x.to).unwrap().marking, x.label.clone()))
                .collect()
        };
        assert_eq!(arcs(&post), arcs(&fly));
        assert_eq!((a.nodes, a.arcs, a.dropped_self_arcs, a.merged_arcs), (b.nodes, b.arcs, b.dropped_self_arcs, b.merged_arcs));
        assert_eq!(a.original_nodes, b.original_nodes);
    }
}
