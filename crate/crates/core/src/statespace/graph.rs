use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::convert::Infallible;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("state graph is frozen")]
    Frozen,
    #[error("no node with id {0}")]
    UnknownNode(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node<M> {
    pub id: usize,
    pub marking: M,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

/// Directed graph of markings. Node ids are stable: they never change once
/// assigned, and reduction keeps the ids of retained nodes.
#[derive(Debug, Clone, Serialize)]
pub struct StateGraph<M> {
    nodes: BTreeMap<usize, Node<M>>,
    arcs: Vec<Arc>,
    out: BTreeMap<usize, Vec<usize>>,
    inc: BTreeMap<usize, Vec<usize>>,
    roots: BTreeSet<usize>,
    /// Nodes with successors dropped by the budget.
    truncated: BTreeSet<usize>,
    next_id: usize,
    budget_exceeded: bool,
    frozen: bool,
}

impl<M> Default for StateGraph<M> {
    fn default() -> Self {
        StateGraph {
            nodes: BTreeMap::new(),
            arcs: Vec::new(),
            out: BTreeMap::new(),
            inc: BTreeMap::new(),
            roots: BTreeSet::new(),
            truncated: BTreeSet::new(),
            next_id: 0,
            budget_exceeded: false,
            frozen: false,
        }
    }
}

/// A path as the visited node ids and the arcs taken between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub arcs: Vec<Arc>,
}

/// Dead markings; `incomplete` marks a truncated graph, where the list is
/// only a lower bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadMarkings {
    pub nodes: Vec<usize>,
    pub incomplete: bool,
}

impl<M> StateGraph<M> {
    pub fn new() -> Self {
        Self::default()
    }

    fn check_open(&self) -> Result<(), GraphError> {
        if self.frozen {
            Err(GraphError::Frozen)
        } else {
            Ok(())
        }
    }

    /// Adds a node with the next free id.
    pub fn add_node(&mut self, marking: M) -> Result<usize, GraphError> {
        let id = self.next_id;
        self.insert_node(id, marking)?;
        Ok(id)
    }

    /// Adds a node under a caller-chosen id.
    pub fn insert_node(&mut self, id: usize, marking: M) -> Result<(), GraphError> {
        self.check_open()?;
        self.nodes.insert(id, Node { id, marking, retained: true });
        self.out.entry(id).or_default();
        self.inc.entry(id).or_default();
        self.next_id = self.next_id.max(id + 1);
        Ok(())
    }

    pub fn add_arc(&mut self, from: usize, to: usize, label: impl Into<String>) -> Result<(), GraphError> {
        self.check_open()?;
        for n in [from, to] {
            if !self.nodes.contains_key(&n) {
                return Err(GraphError::UnknownNode(n));
            }
        }
        let idx = self.arcs.len();
        self.arcs.push(Arc { from, to, label: label.into() });
        self.out.get_mut(&from).expect("node").push(idx);
        self.inc.get_mut(&to).expect("node").push(idx);
        Ok(())
    }

    pub fn add_root(&mut self, id: usize) -> Result<(), GraphError> {
        self.check_open()?;
        if !self.nodes.contains_key(&id) {
            return Err(GraphError::UnknownNode(id));
        }
        self.roots.insert(id);
        Ok(())
    }

    pub fn set_budget_exceeded(&mut self, v: bool) -> Result<(), GraphError> {
        self.check_open()?;
        self.budget_exceeded = v;
        Ok(())
    }

    /// Records that some successors of `id` were not added.
    pub fn mark_truncated(&mut self, id: usize) -> Result<(), GraphError> {
        self.check_open()?;
        self.budget_exceeded = true;
        self.truncated.insert(id);
        Ok(())
    }

    pub fn is_truncated(&self, id: usize) -> bool {
        self.truncated.contains(&id)
    }

    pub fn freeze(mut self) -> Self {
        self.frozen = true;
        self
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn budget_exceeded(&self) -> bool {
        self.budget_exceeded
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn node(&self, id: usize) -> Option<&Node<M>> {
        self.nodes.get(&id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node<M>> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.keys().copied()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.roots.iter().copied()
    }

    pub fn out_arcs(&self, id: usize) -> impl Iterator<Item = &Arc> {
        self.out.get(&id).into_iter().flatten().map(|&i| &self.arcs[i])
    }

    pub fn in_arcs(&self, id: usize) -> impl Iterator<Item = &Arc> {
        self.inc.get(&id).into_iter().flatten().map(|&i| &self.arcs[i])
    }

    pub fn successors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_arcs(id).map(|a| a.to)
    }

    pub fn predecessors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_arcs(id).map(|a| a.from)
    }

    pub fn out_degree(&self, id: usize) -> usize {
        self.out.get(&id).map_or(0, Vec::len)
    }

    pub fn list_dead_markings(&self) -> DeadMarkings {
        DeadMarkings {
            nodes: self.node_ids().filter(|&n| self.out_degree(n) == 0 && !self.truncated.contains(&n)).collect(),
            incomplete: self.budget_exceeded,
        }
    }

    /// Nodes whose marking satisfies `pred`, in id order, at most `limit`.
    pub fn search_nodes(&self, pred: impl Fn(&M) -> bool, limit: Option<usize>) -> Vec<usize> {
        self.nodes
            .values()
            .filter(|n| pred(&n.marking))
            .map(|n| n.id)
            .take(limit.unwrap_or(usize::MAX))
            .collect()
    }

    pub fn search_arcs(&self, pred: impl Fn(&Arc) -> bool) -> Vec<Arc> {
        self.arcs.iter().filter(|a| pred(a)).cloned().collect()
    }

    /// Shortest path (by arc count) from `from` to a node satisfying `pred`.
    pub fn path_exists(&self, from: usize, pred: impl Fn(&M) -> bool) -> Option<Path> {
        self.path_where(from, |id| pred(&self.nodes[&id].marking))
    }

    /// Shortest path from `from` to the node `to`.
    pub fn path_to(&self, from: usize, to: usize) -> Option<Path> {
        self.path_where(from, |id| id == to)
    }

    fn path_where(&self, from: usize, pred: impl Fn(usize) -> bool) -> Option<Path> {
        self.nodes.get(&from)?;
        let mut prev: HashMap<usize, usize> = HashMap::new();
        let mut q = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(v) = q.pop_front() {
            if pred(v) {
                let mut arcs = Vec::new();
                let mut cur = v;
                while cur != from {
                    let a = &self.arcs[prev[&cur]];
                    arcs.push(a.clone());
                    cur = a.from;
                }
                arcs.reverse();
                let mut nodes = vec![from];
                nodes.extend(arcs.iter().map(|a| a.to));
                return Some(Path { nodes, arcs });
            }
            for &ai in &self.out[&v] {
                let w = self.arcs[ai].to;
                if seen.insert(w) {
                    prev.insert(w, ai);
                    q.push_back(w);
                }
            }
        }
        None
    }

    /// Node ids reachable from `from`, including itself.
    pub fn reachable(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for w in self.successors(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Sets each node's retained flag from `keep`. Flags are annotations,
    /// not structure, so this also works on frozen graphs.
    pub fn mark_retained(mut self, keep: impl Fn(&M) -> bool) -> Self {
        for n in self.nodes.values_mut() {
            n.retained = keep(&n.marking);
        }
        self
    }
}

/// Breadth-first exploration from `roots`. Nodes are numbered in discovery
/// order and successors are visited in the order `successors` returns them,
/// so identical inputs yield identical graphs. Stops adding nodes once
/// `budget` nodes exist and flags the graph as truncated.
pub fn explore<M, F>(roots: Vec<M>, budget: usize, mut successors: F) -> StateGraph<M>
where
    M: Clone + Eq + Hash,
    F: FnMut(&M) -> Vec<(String, M)>,
{
    match try_explore(roots, budget, |m| Ok::<_, Infallible>(successors(m))) {
        Ok(g) => g,
        Err(e) => match e {},
    }
}

/// [`explore`] with a successor function that can fail; the first error
/// aborts the exploration.
pub fn try_explore<M, E, F>(roots: Vec<M>, budget: usize, mut successors: F) -> Result<StateGraph<M>, E>
where
    M: Clone + Eq + Hash,
    F: FnMut(&M) -> Result<Vec<(String, M)>, E>,
{
    let mut g = StateGraph::new();
    let mut ids: HashMap<M, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for r in roots {
        if ids.contains_key(&r) {
            continue;
        }
        if ids.len() >= budget {
            g.budget_exceeded = true;
            break;
        }
        let id = g.add_node(r.clone()).expect("open");
        g.roots.insert(id);
        ids.insert(r, id);
        queue.push_back(id);
    }
    while let Some(v) = queue.pop_front() {
        let m = g.nodes[&v].marking.clone();
        for (label, next) in successors(&m)? {
            let w = match ids.get(&next) {
                Some(&w) => w,
                None => {
                    if ids.len() >= budget {
                        g.budget_exceeded = true;
                        g.truncated.insert(v);
                        continue;
                    }
                    let w = g.add_node(next.clone()).expect("open");
                    ids.insert(next, w);
                    queue.push_back(w);
                    w
                }
            };
            g.add_arc(v, w, label).expect("open");
        }
    }
    Ok(g.freeze())
}
