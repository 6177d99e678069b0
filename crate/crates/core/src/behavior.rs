//! Label-level state-machine matching: every member instance runs its state
//! machine, and each wired send fires together with all of its receivers.
//! No data or guards are involved.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::Chooser;
use crate::graph_util::{bfs_path, bottom_sccs};
use crate::model::System;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchMode {
    /// Explore every interleaving of the product automaton.
    Exhaustive,
    /// Follow one schedule picked by a seeded generator.
    Seeded(u64),
}

/// One running copy of a member's state machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MachineInstance {
    pub component: String,
    pub instance: usize,
    /// `Component` or `Component#i` when the member has several instances.
    pub label: String,
    pub states: Vec<String>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub goals: BTreeSet<usize>,
}

/// A machine moving as part of a joint step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Move {
    pub machine: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchStep {
    pub poi: String,
    pub event: String,
    pub senders: Vec<String>,
    pub receivers: Vec<String>,
    pub moves: Vec<Move>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MatchOutcome {
    AllReached,
    /// A configuration without successors where some machine is neither final nor at a goal.
    Stuck { configuration: Vec<String> },
    /// A closed set of configurations in which some machine never visits its goals.
    CycleWithoutGoal { cycle: Vec<Vec<String>>, machines: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchTrace {
    pub mode: MatchMode,
    pub machines: Vec<String>,
    pub initial: Vec<String>,
    pub steps: Vec<MatchStep>,
    pub outcome: MatchOutcome,
    /// Configurations explored (exhaustive) or visited (seeded).
    pub configurations: usize,
}

/// A POI entry turned into the machines that move together.
#[derive(Debug, Clone)]
struct Interaction {
    poi: String,
    event: String,
    senders: Vec<usize>,
    receivers: Vec<usize>,
    /// (machine index, action id), deduplicated.
    participants: Vec<(usize, String)>,
    /// Same machine asked to take two different actions: never enabled.
    conflicting: bool,
}

/// The product automaton of all member instances at the label level.
#[derive(Debug, Clone)]
pub struct LabelAutomaton {
    pub machines: Vec<MachineInstance>,
    interactions: Vec<Interaction>,
    /// For each machine and state index: action id -> next state indices.
    exits: Vec<Vec<BTreeMap<String, Vec<usize>>>>,
}

pub type Config = Vec<usize>;

impl LabelAutomaton {
    pub fn new(sys: &System) -> Self {
        let mut machines = Vec::new();
        let mut exits = Vec::new();
        let mut index_of: HashMap<String, Vec<usize>> = HashMap::new();
        for (m, ext) in sys.members() {
            let b = &ext.base;
            for i in 0..m.instances {
                let label = if m.instances > 1 { format!("{}#{i}", m.name) } else { m.name.clone() };
                index_of.entry(m.name.clone()).or_default().push(machines.len());
                machines.push(MachineInstance {
                    component: m.name.clone(),
                    instance: i,
                    label,
                    states: b.states.iter().map(|s| s.name.clone()).collect(),
                    initial: b.state_index(&b.initial_state().id).expect("validated"),
                    finals: b.states.iter().enumerate().filter(|(_, s)| s.is_final).map(|(i, _)| i).collect(),
                    goals: b.states.iter().enumerate().filter(|(_, s)| s.is_goal).map(|(i, _)| i).collect(),
                });
                exits.push(
                    b.states
                        .iter()
                        .map(|s| {
                            let mut map: BTreeMap<String, Vec<usize>> = BTreeMap::new();
                            for x in &s.exits {
                                map.entry(x.action.clone())
                                    .or_default()
                                    .push(b.state_index(&x.next).expect("validated"));
                            }
                            map
                        })
                        .collect(),
                );
            }
        }
        let interactions = sys
            .composition
            .poi
            .iter()
            .map(|p| {
                let event = sys.base(&p.sender.0).event_of_action(&p.sender.1).expect("resolved").name.clone();
                let senders = index_of[&p.sender.0].clone();
                let mut receivers = Vec::new();
                let mut participants: Vec<(usize, String)> =
                    senders.iter().map(|&i| (i, p.sender.1.clone())).collect();
                let mut conflicting = false;
                for (comp, action) in &p.receivers {
                    for &i in &index_of[comp] {
                        match participants.iter().find(|(j, _)| *j == i) {
                            Some((_, a)) if a == action => {}
                            Some(_) => conflicting = true,
                            None => {
                                receivers.push(i);
                                participants.push((i, action.clone()));
                            }
                        }
                    }
                }
                Interaction { poi: p.id.clone(), event, senders, receivers, participants, conflicting }
            })
            .collect();
        LabelAutomaton { machines, interactions, exits }
    }

    pub fn initial(&self) -> Config {
        self.machines.iter().map(|m| m.initial).collect()
    }

    pub fn describe(&self, c: &Config) -> Vec<String> {
        self.machines
            .iter()
            .zip(c)
            .map(|(m, &s)| format!("{}.{}", m.label, m.states[s]))
            .collect()
    }

    /// All joint steps enabled at `c`, in POI order, as (interaction, successor).
    fn successors(&self, c: &Config) -> Vec<(usize, Config)> {
        let mut out = Vec::new();
        for (k, it) in self.interactions.iter().enumerate() {
            if it.conflicting {
                continue;
            }
            let mut options: Vec<&[usize]> = Vec::new();
            let mut enabled = true;
            for (m, action) in &it.participants {
                match self.exits[*m][c[*m]].get(action) {
                    Some(next) => options.push(next),
                    None => {
                        enabled = false;
                        break;
                    }
                }
            }
            if !enabled {
                continue;
            }
            // Cartesian product over alternative exits with the same action.
            let mut combos: Vec<Config> = vec![c.clone()];
            for ((m, _), opts) in it.participants.iter().zip(&options) {
                combos = combos
                    .into_iter()
                    .flat_map(|base| {
                        opts.iter().map(move |&s| {
                            let mut n = base.clone();
                            n[*m] = s;
                            n
                        })
                    })
                    .collect();
            }
            out.extend(combos.into_iter().map(|n| (k, n)));
        }
        out
    }

    fn step(&self, k: usize, from: &Config, to: &Config) -> MatchStep {
        let it = &self.interactions[k];
        let label = |i: &usize| self.machines[*i].label.clone();
        MatchStep {
            poi: it.poi.clone(),
            event: it.event.clone(),
            senders: it.senders.iter().map(label).collect(),
            receivers: it.receivers.iter().map(label).collect(),
            moves: it
                .participants
                .iter()
                .map(|(m, _)| Move {
                    machine: self.machines[*m].label.clone(),
                    from: self.machines[*m].states[from[*m]].clone(),
                    to: self.machines[*m].states[to[*m]].clone(),
                })
                .collect(),
        }
    }

    fn at_rest(&self, c: &Config) -> bool {
        self.machines.iter().zip(c).all(|(m, &s)| s == m.initial || m.finals.contains(&s))
    }

    /// Explores the full configuration graph.
    pub fn explore(&self) -> ConfigGraph {
        let init = self.initial();
        let mut ids: HashMap<Config, usize> = HashMap::from([(init.clone(), 0)]);
        let mut configs = vec![init];
        let mut edges: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut q = VecDeque::from([0]);
        while let Some(v) = q.pop_front() {
            let succ = self.successors(&configs[v]);
            let mut out = Vec::new();
            for (k, n) in succ {
                let id = *ids.entry(n.clone()).or_insert_with(|| {
                    configs.push(n);
                    q.push_back(configs.len() - 1);
                    configs.len() - 1
                });
                out.push((k, id));
            }
            if edges.len() <= v {
                edges.resize(v + 1, Vec::new());
            }
            edges[v] = out;
        }
        edges.resize(configs.len(), Vec::new());
        ConfigGraph { configs, edges }
    }

    /// True if the sequence of event names is a possible run from the
    /// initial configuration.
    pub fn accepts_skeleton<S: AsRef<str>>(&self, events: &[S]) -> bool {
        let mut current: BTreeSet<Config> = BTreeSet::from([self.initial()]);
        for ev in events {
            let mut next = BTreeSet::new();
            for c in &current {
                for (k, n) in self.successors(c) {
                    if self.interactions[k].event == ev.as_ref() {
                        next.insert(n);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        true
    }
}

/// Explored configurations; node 0 is the initial configuration.
#[derive(Debug, Clone)]
pub struct ConfigGraph {
    pub configs: Vec<Config>,
    /// Per node: (interaction index, successor node).
    pub edges: Vec<Vec<(usize, usize)>>,
}

impl ConfigGraph {
    fn succ(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|es| es.iter().map(|&(_, w)| w).collect()).collect()
    }

    pub fn to_dot(&self, a: &LabelAutomaton) -> String {
        let mut out = String::from("digraph configurations {\n");
        for (i, c) in self.configs.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", a.describe(c).join("\\n"));
        }
        for (v, es) in self.edges.iter().enumerate() {
            for &(k, w) in es {
                let _ = writeln!(out, "  n{v} -> n{w} [label=\"{}\"];", a.interactions[k].event);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Coverage bookkeeping: which (machine, state) pairs a run has visited.
struct Coverage<'a> {
    a: &'a LabelAutomaton,
    visited: Vec<BTreeSet<usize>>,
}

impl<'a> Coverage<'a> {
    fn new(a: &'a LabelAutomaton, init: &Config) -> Self {
        Coverage { a, visited: init.iter().map(|&s| BTreeSet::from([s])).collect() }
    }

    fn add(&mut self, c: &Config) {
        for (v, &s) in self.visited.iter_mut().zip(c) {
            v.insert(s);
        }
    }

    fn machine_done(&self, m: usize) -> bool {
        let mi = &self.a.machines[m];
        self.visited[m].iter().any(|s| mi.finals.contains(s))
            || (!mi.goals.is_empty() && mi.goals.iter().all(|g| self.visited[m].contains(g)))
    }

    fn complete(&self) -> bool {
        (0..self.a.machines.len()).all(|m| self.machine_done(m))
    }

    /// Would visiting `c` add a state that still matters for coverage?
    fn improves(&self, c: &Config) -> bool {
        c.iter().enumerate().any(|(m, s)| {
            let mi = &self.a.machines[m];
            !self.machine_done(m) && (mi.goals.contains(s) || mi.finals.contains(s)) && !self.visited[m].contains(s)
        })
    }
}

fn judge_bottoms(a: &LabelAutomaton, g: &ConfigGraph) -> MatchOutcome {
    let succ = g.succ();
    for bottom in bottom_sccs(g.configs.len(), &succ) {
        let dead = bottom.len() == 1 && succ[bottom[0]].is_empty();
        if dead {
            let c = &g.configs[bottom[0]];
            let ok = a
                .machines
                .iter()
                .zip(c)
                .all(|(m, s)| m.finals.contains(s) || m.goals.contains(s));
            if !ok {
                return MatchOutcome::Stuck { configuration: a.describe(c) };
            }
            continue;
        }
        let mut missing = Vec::new();
        for (mi, m) in a.machines.iter().enumerate() {
            let states: BTreeSet<usize> = bottom.iter().map(|&v| g.configs[v][mi]).collect();
            let reaches_final = states.iter().any(|s| m.finals.contains(s));
            let covers_goals = !m.goals.is_empty() && m.goals.iter().all(|s| states.contains(s));
            if !reaches_final && !covers_goals {
                missing.push(m.label.clone());
            }
        }
        if !missing.is_empty() {
            return MatchOutcome::CycleWithoutGoal {
                cycle: bottom.iter().map(|&v| a.describe(&g.configs[v])).collect(),
                machines: missing,
            };
        }
    }
    MatchOutcome::AllReached
}

/// Runs label-level matching.
///
/// `Exhaustive` judges every bottom strongly connected component of the
/// configuration graph and returns a shortest witness run covering the goals;
/// `Seeded` follows a single random schedule for at most `max_steps` steps.
pub fn run_matching(sys: &System, mode: MatchMode) -> MatchTrace {
    run_matching_with(sys, mode, 10_000)
}

pub fn run_matching_with(sys: &System, mode: MatchMode, max_steps: usize) -> MatchTrace {
    let a = LabelAutomaton::new(sys);
    let init = a.initial();
    let mut steps = Vec::new();
    let (outcome, configurations) = match mode {
        MatchMode::Exhaustive => {
            let g = a.explore();
            let succ = g.succ();
            // Witness: greedily walk to the nearest configuration that adds
            // coverage, then back to a resting configuration.
            let mut cov = Coverage::new(&a, &init);
            let mut at = 0usize;
            let push_path = |path: &[usize], steps: &mut Vec<MatchStep>, cov: &mut Coverage| {
                for w in path.windows(2) {
                    let k = g.edges[w[0]].iter().find(|&&(_, t)| t == w[1]).expect("edge").0;
                    steps.push(a.step(k, &g.configs[w[0]], &g.configs[w[1]]));
                    cov.add(&g.configs[w[1]]);
                }
            };
            while !cov.complete() {
                match bfs_path(at, &succ, |v| cov.improves(&g.configs[v])) {
                    Some(path) => {
                        push_path(&path, &mut steps, &mut cov);
                        at = *path.last().expect("non-empty");
                    }
                    None => break,
                }
            }
            if cov.complete() && !a.at_rest(&g.configs[at]) {
                if let Some(path) = bfs_path(at, &succ, |v| a.at_rest(&g.configs[v])) {
                    push_path(&path, &mut steps, &mut cov);
                }
            }
            (judge_bottoms(&a, &g), g.configs.len())
        }
        MatchMode::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cov = Coverage::new(&a, &init);
            let mut c = init.clone();
            let mut seen: BTreeSet<Config> = BTreeSet::from([c.clone()]);
            let mut outcome = None;
            for _ in 0..max_steps {
                if cov.complete() && a.at_rest(&c) && !steps.is_empty() {
                    outcome = Some(MatchOutcome::AllReached);
                    break;
                }
                let succ = a.successors(&c);
                if succ.is_empty() {
                    outcome = Some(if cov.complete() {
                        MatchOutcome::AllReached
                    } else {
                        MatchOutcome::Stuck { configuration: a.describe(&c) }
                    });
                    break;
                }
                let (k, n) = succ[rng.pick(succ.len())].clone();
                steps.push(a.step(k, &c, &n));
                cov.add(&n);
                seen.insert(n.clone());
                c = n;
            }
            let outcome = outcome.unwrap_or_else(|| {
                if cov.complete() {
                    MatchOutcome::AllReached
                } else {
                    let machines = (0..a.machines.len())
                        .filter(|&m| !cov.machine_done(m))
                        .map(|m| a.machines[m].label.clone())
                        .collect();
                    MatchOutcome::CycleWithoutGoal { cycle: seen.iter().map(|c| a.describe(c)).collect(), machines }
                }
            });
            (outcome, seen.len())
        }
    };
    MatchTrace {
        mode,
        machines: a.machines.iter().map(|m| m.label.clone()).collect(),
        initial: a.describe(&init),
        steps,
        outcome,
        configurations,
    }
}

/// Per component: some final state reached or every goal state visited, by
/// every instance, along the trace.
pub fn goal_coverage(trace: &MatchTrace, sys: &System) -> BTreeMap<String, bool> {
    let mut visited: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for d in &trace.initial {
        let (m, s) = d.split_once('.').expect("machine.state");
        visited.entry(m.to_string()).or_default().insert(s.to_string());
    }
    for st in &trace.steps {
        for mv in &st.moves {
            visited.entry(mv.machine.clone()).or_default().insert(mv.to.clone());
        }
    }
    let mut out = BTreeMap::new();
    for (m, ext) in sys.members() {
        let b = &ext.base;
        let ok = (0..m.instances).all(|i| {
            let label = if m.instances > 1 { format!("{}#{i}", m.name) } else { m.name.clone() };
            let seen = visited.get(&label).cloned().unwrap_or_default();
            b.states.iter().any(|s| s.is_final && seen.contains(&s.name))
                || (b.states.iter().any(|s| s.is_goal)
                    && b.states.iter().filter(|s| s.is_goal).all(|s| seen.contains(&s.name)))
        });
        out.insert(m.name.clone(), ok);
    }
    out
}

impl fmt::Display for MatchTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial: {}", self.initial.join(", "))?;
        for (i, s) in self.steps.iter().enumerate() {
            let moves: Vec<String> = s.moves.iter().map(|m| format!("{}: {} -> {}", m.machine, m.from, m.to)).collect();
            writeln!(
                f,
                "{i:4} {} [{}] !{} ?{}  {}",
                s.event,
                s.poi,
                s.senders.join("+"),
                s.receivers.join(","),
                moves.join("; ")
            )?;
        }
        match &self.outcome {
            MatchOutcome::AllReached => writeln!(f, "outcome: all machines reached final or goal states"),
            MatchOutcome::Stuck { configuration } => writeln!(f, "outcome: stuck at {}", configuration.join(", ")),
            MatchOutcome::CycleWithoutGoal { machines, cycle } => writeln!(
                f,
                "outcome: {} configuration(s) cycle without goals for {}",
                cycle.len(),
                machines.join(", ")
            ),
        }
    }
}
