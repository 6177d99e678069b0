use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PetriError;

/// Token count of one place; `Omega` stands for "arbitrarily many" and only
/// shows up in coverability graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tokens {
    Finite(u64),
    Omega,
}

impl Tokens {
    pub fn finite(self) -> Option<u64> {
        match self {
            Tokens::Finite(n) => Some(n),
            Tokens::Omega => None,
        }
    }

    pub fn at_least(self, n: u64) -> bool {
        match self {
            Tokens::Finite(k) => k >= n,
            Tokens::Omega => true,
        }
    }
}

impl fmt::Display for Tokens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tokens::Finite(n) => write!(f, "{n}"),
            Tokens::Omega => f.write_str("ω"),
        }
    }
}

/// Tokens per place, in the net's place order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Marking(pub Vec<Tokens>);

impl Marking {
    pub fn from_counts(counts: &[u64]) -> Self {
        Marking(counts.iter().map(|&n| Tokens::Finite(n)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Finite counts, or `None` if some place holds ω.
    pub fn counts(&self) -> Option<Vec<u64>> {
        self.0.iter().map(|t| t.finite()).collect()
    }

    pub fn has_omega(&self) -> bool {
        self.0.contains(&Tokens::Omega)
    }

    /// `self ≥ other` in every place.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetArc {
    pub source: String,
    pub target: String,
    pub weight: u64,
}

/// A place/transition net with its initial marking. Places and transitions
/// keep their insertion order, which fixes matrix rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaceTransitionNet {
    pub name: String,
    places: Vec<String>,
    transitions: Vec<String>,
    arcs: Vec<NetArc>,
    m0: Vec<u64>,
    #[serde(skip)]
    index: HashMap<String, Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Place(usize),
    Transition(usize),
}

impl PlaceTransitionNet {
    pub fn new(name: impl Into<String>) -> Self {
        PlaceTransitionNet {
            name: name.into(),
            places: Vec::new(),
            transitions: Vec::new(),
            arcs: Vec::new(),
            m0: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn add_place(&mut self, id: impl Into<String>, tokens: u64) -> Result<usize, PetriError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(PetriError::DuplicateNode(id));
        }
        self.index.insert(id.clone(), Node::Place(self.places.len()));
        self.places.push(id);
        self.m0.push(tokens);
        Ok(self.places.len() - 1)
    }

    pub fn add_transition(&mut self, id: impl Into<String>) -> Result<usize, PetriError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(PetriError::DuplicateNode(id));
        }
        self.index.insert(id.clone(), Node::Transition(self.transitions.len()));
        self.transitions.push(id);
        Ok(self.transitions.len() - 1)
    }

    /// Adds an arc between a place and a transition. A second arc between the
    /// same pair adds its weight to the first.
    pub fn add_arc(&mut self, source: &str, target: &str, weight: u64) -> Result<(), PetriError> {
        if weight == 0 {
            return Err(PetriError::ZeroWeight { from: source.into(), to: target.into() });
        }
        let s = self.lookup(source)?;
        let t = self.lookup(target)?;
        if matches!((s, t), (Node::Place(_), Node::Place(_)) | (Node::Transition(_), Node::Transition(_))) {
            return Err(PetriError::SameKindArc { from: source.into(), to: target.into() });
        }
        match self.arcs.iter_mut().find(|a| a.source == source && a.target == target) {
            Some(a) => a.weight += weight,
            None => self.arcs.push(NetArc { source: source.into(), target: target.into(), weight }),
        }
        Ok(())
    }

    fn lookup(&self, id: &str) -> Result<Node, PetriError> {
        self.index.get(id).copied().ok_or_else(|| PetriError::UnknownNode(id.into()))
    }

    pub fn set_initial(&mut self, place: &str, tokens: u64) -> Result<(), PetriError> {
        let p = self.place_index(place).ok_or_else(|| PetriError::UnknownNode(place.into()))?;
        self.m0[p] = tokens;
        Ok(())
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[NetArc] {
        &self.arcs
    }

    pub fn m0(&self) -> Marking {
        Marking::from_counts(&self.m0)
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        match self.index.get(id) {
            Some(Node::Place(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        match self.index.get(id) {
            Some(Node::Transition(i)) => Some(*i),
            _ => None,
        }
    }

    fn require_transition(&self, id: &str) -> Result<usize, PetriError> {
        self.transition_index(id).ok_or_else(|| PetriError::UnknownTransition(id.into()))
    }

    /// Input arcs per transition as (place index, weight).
    pub fn pre_sets(&self) -> Vec<Vec<(usize, u64)>> {
        self.arc_sets(true)
    }

    /// Output arcs per transition as (place index, weight).
    pub fn post_sets(&self) -> Vec<Vec<(usize, u64)>> {
        self.arc_sets(false)
    }

    fn arc_sets(&self, input: bool) -> Vec<Vec<(usize, u64)>> {
        let mut out = vec![Vec::new(); self.transitions.len()];
        for a in &self.arcs {
            let (p, t) = if input { (&a.source, &a.target) } else { (&a.target, &a.source) };
            if let (Some(p), Some(t)) = (self.place_index(p), self.transition_index(t)) {
                out[t].push((p, a.weight));
            }
        }
        out
    }

    fn check_len(&self, m: &Marking) -> Result<(), PetriError> {
        if m.len() != self.places.len() {
            return Err(PetriError::DimensionMismatch { expected: self.places.len(), found: m.len() });
        }
        Ok(())
    }

    pub fn enabled(&self, m: &Marking, t: &str) -> Result<bool, PetriError> {
        let ti = self.require_transition(t)?;
        self.check_len(m)?;
        Ok(self.pre_sets()[ti].iter().all(|&(p, w)| m.0[p].at_least(w)))
    }

    pub fn fire(&self, m: &Marking, t: &str) -> Result<Marking, PetriError> {
        if !self.enabled(m, t)? {
            return Err(PetriError::NotEnabled { transition: t.into(), marking: m.to_string() });
        }
        let ti = self.require_transition(t)?;
        Ok(Stepper::new(self).fire(m, ti))
    }

    /// Fires `sequence` in order from `m`.
    pub fn fire_sequence<S: AsRef<str>>(&self, m: &Marking, sequence: &[S]) -> Result<Marking, PetriError> {
        sequence.iter().try_fold(m.clone(), |m, t| self.fire(&m, t.as_ref()))
    }

    /// Places with no arcs and transitions with no arcs.
    pub fn isolated_nodes(&self) -> Vec<String> {
        let touched = |id: &String| self.arcs.iter().any(|a| &a.source == id || &a.target == id);
        self.places.iter().chain(&self.transitions).filter(|id| !touched(id)).cloned().collect()
    }
}

/// Pre/post sets cached for repeated firing.
pub(crate) struct Stepper {
    pub pre: Vec<Vec<(usize, u64)>>,
    pub post: Vec<Vec<(usize, u64)>>,
}

impl Stepper {
    pub fn new(net: &PlaceTransitionNet) -> Self {
        Stepper { pre: net.pre_sets(), post: net.post_sets() }
    }

    pub fn enabled(&self, m: &Marking, t: usize) -> bool {
        self.pre[t].iter().all(|&(p, w)| m.0[p].at_least(w))
    }

    pub fn fire(&self, m: &Marking, t: usize) -> Marking {
        let mut next = m.clone();
        for &(p, w) in &self.pre[t] {
            if let Tokens::Finite(n) = &mut next.0[p] {
                *n -= w;
            }
        }
        for &(p, w) in &self.post[t] {
            if let Tokens::Finite(n) = &mut next.0[p] {
                *n += w;
            }
        }
        next
    }
}
