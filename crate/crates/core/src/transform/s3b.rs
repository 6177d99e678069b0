use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::behavior::LabelAutomaton;
use crate::colored::{interaction_order, simulate_until, ColoredSystem, EngineError, SystemMarking, TraceEnd};
use crate::model::System;
use crate::petri::{reachability_graph, PlaceTransitionNet};

use super::{source_elements, TransformationLog};

/// Outcome of a transformation-faithfulness check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct S3bReport {
    pub passed: bool,
    pub omissions: Vec<String>,
    /// Source elements with no mapping in the log.
    pub unmapped: Vec<String>,
    /// Goal places (P/T path) or the goal condition (colored path) and
    /// whether execution reached them.
    pub goals: BTreeMap<String, bool>,
    /// Interactions in completion order (colored path).
    pub interaction_order: Vec<String>,
    /// True if the execution follows an order the composed state machines
    /// allow (always true on the P/T path).
    pub order_accepted: bool,
}

impl fmt::Display for S3bReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "transformation check: {}", if self.passed { "PASS" } else { "FAIL" })?;
        for o in &self.omissions {
            writeln!(f, "  omission: {o}")?;
        }
        for u in &self.unmapped {
            writeln!(f, "  unmapped: {u}")?;
        }
        for (g, ok) in &self.goals {
            writeln!(f, "  goal {g}: {}", if *ok { "reached" } else { "not reached" })?;
        }
        if !self.interaction_order.is_empty() {
            writeln!(f, "  interaction order: {}", self.interaction_order.join(" "))?;
            writeln!(f, "  order allowed by the state machines: {}", self.order_accepted)?;
        }
        Ok(())
    }
}

fn unmapped(sys: &System, log: &TransformationLog) -> Vec<String> {
    sys.members()
        .flat_map(|(m, ext)| source_elements(&m.name, &ext.base))
        .filter(|s| !log.maps(s))
        .collect()
}

const PT_BUDGET: usize = 200_000;

/// P/T path: nothing omitted, every source element mapped, and every goal
/// state place of every member instance gets a token in some reachable
/// marking.
pub fn check_s3b_ptnet(sys: &System, net: &PlaceTransitionNet, log: &TransformationLog) -> S3bReport {
    let g = reachability_graph(net, PT_BUDGET);
    let mut goals = BTreeMap::new();
    let mut next = 0;
    for (m, ext) in sys.members() {
        for i in 0..m.instances {
            for s in &ext.base.states {
                let place = next;
                next += 1;
                if !s.is_goal {
                    continue;
                }
                let who = if m.instances > 1 { format!("{}#{i}.{}", m.name, s.name) } else { format!("{}.{}", m.name, s.name) };
                let reached = g.nodes().any(|n| n.marking.0.get(place).is_some_and(|t| t.at_least(1)));
                goals.insert(format!("{} ({who})", net.places()[place]), reached);
            }
        }
    }
    let unmapped = unmapped(sys, log);
    let passed = log.omissions.is_empty() && unmapped.is_empty() && goals.values().all(|&b| b);
    S3bReport {
        passed,
        omissions: log.omissions.clone(),
        unmapped,
        goals,
        interaction_order: Vec::new(),
        order_accepted: true,
    }
}

/// Colored path: nothing omitted, every source element mapped, and a seeded
/// run of the composed system reaches `goal` with its interactions
/// completing in an order the composed state machines accept.
pub fn check_s3b_colored(
    sys: &System,
    csys: &ColoredSystem,
    log: &TransformationLog,
    seed: u64,
    max_steps: usize,
    goal_name: &str,
    goal: impl Fn(&SystemMarking) -> bool,
) -> Result<S3bReport, EngineError> {
    let trace = simulate_until(csys, seed, max_steps, goal)?;
    let order = interaction_order(csys, &trace);
    let order_accepted = LabelAutomaton::new(sys).accepts_skeleton(&order);
    let reached = trace.end == TraceEnd::Stopped;
    let unmapped = unmapped(sys, log);
    Ok(S3bReport {
        passed: log.omissions.is_empty() && unmapped.is_empty() && reached && order_accepted,
        omissions: log.omissions.clone(),
        unmapped,
        goals: BTreeMap::from([(goal_name.to_string(), reached)]),
        interaction_order: order,
        order_accepted,
    })
}
