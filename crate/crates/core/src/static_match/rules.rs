use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{ActionRef, Direction, EventDef, System};

use super::taxonomy::{SemanticRelation, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchLevel {
    Syntactic,
    StaticSemantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub subject: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub level: MatchLevel,
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// Send/receive pairs that were checked, e.g. `!Robot.LoadingM1 -> ?Machine1.LoadingM1`.
    pub matched: Vec<String>,
}

impl MatchReport {
    fn new(level: MatchLevel, violations: Vec<Violation>, matched: Vec<String>) -> Self {
        MatchReport { level, passed: violations.is_empty(), violations, matched }
    }

    pub fn violated_rules(&self) -> BTreeSet<&str> {
        self.violations.iter().map(|v| v.rule.as_str()).collect()
    }
}

impl fmt::Display for MatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            MatchLevel::Syntactic => "syntactic",
            MatchLevel::StaticSemantic => "static-semantic",
        };
        writeln!(f, "{level} matching: {}", if self.passed { "PASS" } else { "FAIL" })?;
        for m in &self.matched {
            writeln!(f, "  matched {m}")?;
        }
        for v in &self.violations {
            writeln!(f, "  {} on {}: {}", v.rule, v.subject, v.detail)?;
        }
        Ok(())
    }
}

fn event_of<'a>(sys: &'a System, r: &ActionRef) -> &'a EventDef {
    sys.base(&r.0).event_of_action(&r.1).expect("composition resolved")
}

fn label(sys: &System, r: &ActionRef, send: bool) -> String {
    format!("{}{}.{}", if send { "!" } else { "?" }, r.0, event_of(sys, r).name)
}

/// Applies SM-Rules 1 to 3. Violations are accumulated, never short-circuited.
pub fn check_syntactic(sys: &System) -> MatchReport {
    let mut violations = Vec::new();
    let mut matched = Vec::new();
    let comp = &sys.composition;

    for p in &comp.poi {
        let send_ev = event_of(sys, &p.sender);
        for r in &p.receivers {
            let recv_ev = event_of(sys, r);
            let internal = *r == p.sender;
            let subject = format!("{} -> {}", label(sys, &p.sender, true), label(sys, r, false));
            if recv_ev.name != send_ev.name {
                violations.push(Violation {
                    rule: "SM-Rule1".into(),
                    subject: subject.clone(),
                    detail: format!("send-event `{}` and receive-event `{}` differ", send_ev.name, recv_ev.name),
                });
            }
            if recv_ev.params.len() != send_ev.params.len() {
                violations.push(Violation {
                    rule: "SM-Rule3".into(),
                    subject: subject.clone(),
                    detail: format!(
                        "send-event has {} parameter(s), receive-event has {}",
                        send_ev.params.len(),
                        recv_ev.params.len()
                    ),
                });
            }
            if !internal {
                matched.push(subject);
            }
        }
    }

    // SM-Rule 2: every send action is wired as a sender and every receive
    // action as a receiver.
    for (m, ext) in sys.members() {
        let base = &ext.base;
        for a in &base.actions {
            let r: ActionRef = (m.name.clone(), a.id.clone());
            let dir = base.action_direction(&a.id).expect("validated");
            let as_sender = comp.poi.iter().any(|p| p.sender == r);
            let as_receiver = comp.poi.iter().any(|p| p.receivers.contains(&r));
            let ev_name = &base.event_of_action(&a.id).expect("validated").name;
            let missing = match dir {
                Direction::Send if !as_sender => Some(("!", "has no corresponding receive-event")),
                Direction::Receive if !as_receiver => Some(("?", "has no corresponding send-event")),
                Direction::Internal if !as_sender || !as_receiver => Some(("!?", "is not wired to itself")),
                _ => None,
            };
            if let Some((sigil, detail)) = missing {
                violations.push(Violation {
                    rule: "SM-Rule2".into(),
                    subject: format!("{}.{sigil}{ev_name}", m.name),
                    detail: format!("action {} {detail}", a.id),
                });
            }
        }
        for ev in &base.events {
            if !base.actions.iter().any(|a| a.event == ev.id) {
                violations.push(Violation {
                    rule: "SM-Rule2".into(),
                    subject: format!("{}.{}", m.name, ev.name),
                    detail: format!("event {} is used by no action", ev.id),
                });
            }
        }
    }
    MatchReport::new(MatchLevel::Syntactic, violations, matched)
}

fn is_known(t: &Taxonomy, a: &str, b: &str) -> bool {
    a == b || (t.knows(a) && t.knows(b))
}

fn relation_detail(t: &Taxonomy, a: &str, b: &str, rel: SemanticRelation) -> String {
    if is_known(t, a, b) {
        format!("`{a}` relates to `{b}` as {rel:?}")
    } else {
        let unknown: Vec<&str> = [a, b].into_iter().filter(|x| !t.knows(x)).collect();
        format!("unknown term(s) {unknown:?} comparing `{a}` with `{b}`")
    }
}

/// Applies SSM-Rules 1 to 4 against `tax`.
pub fn check_static_semantic(sys: &System, tax: &Taxonomy) -> MatchReport {
    let mut violations = Vec::new();
    let mut matched = Vec::new();
    let comp = &sys.composition;

    // Rules 1 and 2: the tags shared by every wired action must all match a
    // tag of the composition.
    let mut involved: Vec<&ActionRef> = Vec::new();
    for p in &comp.poi {
        for r in std::iter::once(&p.sender).chain(&p.receivers) {
            if !involved.contains(&r) {
                involved.push(r);
            }
        }
    }
    let rule_sets: [(&str, &str, fn(&crate::model::SemanticTags) -> &BTreeSet<String>); 2] = [
        ("SSM-Rule1", "area of interest", |t| &t.aoi),
        ("SSM-Rule2", "purpose", |t| &t.purpose),
    ];
    for (rule, what, pick) in rule_sets {
        let mut common: Option<BTreeSet<String>> = None;
        for r in &involved {
            let tags = pick(sys.base(&r.0).tags_for(&r.1));
            common = Some(match common {
                None => tags.clone(),
                Some(c) => c.intersection(tags).cloned().collect(),
            });
        }
        let common = common.unwrap_or_default();
        let target = pick(&comp.tags);
        if common.is_empty() {
            violations.push(Violation {
                rule: rule.into(),
                subject: comp.name.clone(),
                detail: format!("the wired actions share no {what}"),
            });
            continue;
        }
        for term in &common {
            let ok = target.iter().any(|x| {
                matches!(tax.relation(term, x), SemanticRelation::Exact | SemanticRelation::Equivalent)
            });
            if !ok {
                let detail = if tax.knows(term) || target.contains(term) {
                    format!("common {what} `{term}` matches no composition {what} {target:?}")
                } else {
                    format!("unknown term `{term}`: common {what} matches no composition {what} {target:?}")
                };
                violations.push(Violation { rule: rule.into(), subject: comp.name.clone(), detail });
            }
        }
        if violations.iter().all(|v| v.rule != rule) {
            matched.push(format!("{what} {common:?}"));
        }
    }

    // Rules 3 and 4: parameter types and units, position by position.
    for p in &comp.poi {
        let send_ev = event_of(sys, &p.sender);
        for r in &p.receivers {
            let recv_ev = event_of(sys, r);
            let subject = format!("{} -> {}", label(sys, &p.sender, true), label(sys, r, false));
            // Several sender instances feeding one receiver are joined: the
            // receiver gets the sequence of all sent values.
            let joined = comp.instances_of(&p.sender.0) > 1 && comp.instances_of(&r.0) == 1;
            for (sp, rp) in send_ev.params.iter().zip(&recv_ev.params) {
                let a = if joined { format!("seq({})", sp.type_term()) } else { sp.type_term() };
                let b = rp.type_term();
                let rel = tax.relation(&a, &b);
                if !matches!(
                    rel,
                    SemanticRelation::Exact | SemanticRelation::Equivalent | SemanticRelation::DirectChild
                ) {
                    violations.push(Violation {
                        rule: "SSM-Rule3".into(),
                        subject: format!("{subject} parameter {}", sp.name),
                        detail: relation_detail(tax, &a, &b, rel),
                    });
                }
                match (&sp.unit, &rp.unit) {
                    (None, None) => {}
                    (Some(ua), Some(ub)) => {
                        let rel = tax.relation(ua, ub);
                        if matches!(rel, SemanticRelation::Indirect | SemanticRelation::None) {
                            violations.push(Violation {
                                rule: "SSM-Rule4".into(),
                                subject: format!("{subject} parameter {}", sp.name),
                                detail: relation_detail(tax, ua, ub, rel),
                            });
                        }
                    }
                    (ua, ub) => violations.push(Violation {
                        rule: "SSM-Rule4".into(),
                        subject: format!("{subject} parameter {}", sp.name),
                        detail: format!("unit present on one side only ({ua:?} vs {ub:?})"),
                    }),
                }
            }
        }
    }
    MatchReport::new(MatchLevel::StaticSemantic, violations, matched)
}
