//! The staged verification run: syntactic, static-semantic and
//! state-machine matching, transformation with its faithfulness check, and
//! one dynamic analysis technique checking the requirements.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::behavior::{run_matching, MatchMode, MatchOutcome};
use crate::colored::{ColoredSystem, SystemMarking};
use crate::model::{load_system, ConstraintKind, ModelError, NamedQuery, QueryMode, System};
use crate::petri::{
    check_b_fairness, check_boundedness, check_deadlock_free, incidence, p_invariants, t_invariants, Boundedness,
    DeadlockVerdict, FairnessVerdict, PlaceTransitionNet, UnfairReason,
};
use crate::static_match::{check_static_semantic, check_syntactic, MatchReport};
use crate::statespace::{
    evaluate_query, export, generate_colored, reduce_compositional, top_level_description, top_level_nonempty,
    ExportError, ExportFormat, MarkingView, Predicate, StateGraph, DEFAULT_BUDGET,
};
use crate::transform::{check_s3b_colored, check_s3b_ptnet, compose_colored, composition_to_ptnet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unknown technique `{0}` (expected algebraic or statespace)")]
    UnknownTechnique(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("export failed: {0}")]
    Export(#[from] ExportError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Technique {
    /// Incidence matrices, invariants and structural property checks on the
    /// P/T net.
    Algebraic,
    /// State-space generation and predicate queries on the colored system.
    StateSpace,
}

impl FromStr for Technique {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "algebraic" => Ok(Technique::Algebraic),
            "statespace" | "state-space" => Ok(Technique::StateSpace),
            _ => Err(PipelineError::UnknownTechnique(s.to_string())),
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technique::Algebraic => "algebraic",
            Technique::StateSpace => "statespace",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub technique: Technique,
    /// Node budget for reachability and state-space generation.
    pub budget: usize,
    /// Seed of the simulation run by the colored faithfulness check.
    pub seed: u64,
    pub max_steps: usize,
    /// Also compute the compositional reduction (state-space technique).
    pub reduce: bool,
    /// Write the (reduced, if requested) state graph here.
    pub export: Option<(ExportFormat, PathBuf)>,
}

impl PipelineOptions {
    pub fn new(technique: Technique) -> Self {
        PipelineOptions { technique, budget: DEFAULT_BUDGET, seed: 1, max_steps: 10_000, reduce: false, export: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Stage {
    Parse,
    S1,
    S2,
    S3a,
    S3b,
    Dynamic,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse",
            Stage::S1 => "S1 syntactic matching",
            Stage::S2 => "S2 static-semantic matching",
            Stage::S3a => "S3a state-machine matching",
            Stage::S3b => "S3b transformation",
            Stage::Dynamic => "dynamic analysis",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageResult {
    pub stage: Stage,
    pub passed: bool,
    /// Rule ids of the violations, e.g. `SM-Rule2`.
    pub violated_rules: Vec<String>,
    pub report: String,
}

/// Outcome of one objective or constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequirementResult {
    pub id: String,
    pub description: String,
    pub check: Option<String>,
    /// `None` when the requirement names no check.
    pub satisfied: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Verified,
    Failed { stage: Stage, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineRun {
    pub composition: String,
    pub technique: Technique,
    pub stages: Vec<StageResult>,
    pub requirements: Vec<RequirementResult>,
    pub verdict: Verdict,
    pub artifacts: Vec<String>,
}

impl PipelineRun {
    pub fn verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

impl fmt::Display for PipelineRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "composition {} ({} technique)", self.composition, self.technique)?;
        for s in &self.stages {
            writeln!(f, "== {}: {}", s.stage, if s.passed { "PASS" } else { "FAIL" })?;
            for line in s.report.lines() {
                writeln!(f, "   {line}")?;
            }
        }
        if !self.requirements.is_empty() {
            writeln!(f, "== requirements")?;
            for r in &self.requirements {
                let status = match r.satisfied {
                    Some(true) => "satisfied",
                    Some(false) => "VIOLATED",
                    None => "not checked",
                };
                writeln!(f, "   {} [{status}] {}", r.id, r.description)?;
                if !r.detail.is_empty() {
                    writeln!(f, "      {}", r.detail)?;
                }
            }
        }
        for a in &self.artifacts {
            writeln!(f, "artifact: {a}")?;
        }
        match &self.verdict {
            Verdict::Verified => writeln!(f, "verdict: verified"),
            Verdict::Failed { stage, detail } => writeln!(f, "verdict: failed at {stage}: {detail}"),
        }
    }
}

/// Technique guidelines for `sys`. Advice only; the run uses whatever
/// technique the caller picks.
pub fn advise(sys: &System) -> Vec<String> {
    let vars: usize = sys.members().map(|(_, e)| e.vars.len()).sum();
    let params: usize = sys.members().flat_map(|(_, e)| e.base.events.iter()).map(|ev| ev.params.len()).sum();
    let queries = sys.requirements.queries.len();
    let fairness = sys
        .requirements
        .objectives
        .iter()
        .filter_map(|o| o.check.as_deref())
        .chain(sys.requirements.constraints.iter().filter_map(|c| c.check.as_deref()))
        .any(|c| c == "b-fairness");
    let mut out = Vec::new();
    if vars == 0 && params == 0 {
        out.push("no state variables or event parameters: the algebraic technique covers the behavior".to_string());
    } else {
        out.push(format!(
            "{vars} state variable(s) and {params} event parameter(s): data-dependent behavior suggests the statespace technique"
        ));
    }
    if fairness {
        out.push("a requirement asks for b-fairness, which only the algebraic technique checks".to_string());
    }
    if queries > 0 {
        out.push(format!("{queries} predicate query(ies) defined: these run under the statespace technique"));
    }
    out
}

fn match_stage(stage: Stage, r: &MatchReport) -> StageResult {
    StageResult {
        stage,
        passed: r.passed,
        violated_rules: r.violated_rules().into_iter().map(str::to_string).collect(),
        report: r.to_string(),
    }
}

fn failed(stage: &StageResult) -> Verdict {
    let detail = if stage.violated_rules.is_empty() {
        stage.report.lines().find(|l| l.contains("FAIL") || l.contains("outcome")).unwrap_or("failed").trim().to_string()
    } else {
        format!("violated {}", stage.violated_rules.join(", "))
    };
    Verdict::Failed { stage: stage.stage, detail }
}

/// Loads the composition at `path` and runs the pipeline on it.
pub fn run_pipeline(path: impl AsRef<Path>, options: &PipelineOptions) -> Result<PipelineRun, PipelineError> {
    let sys = load_system(path)?;
    run_pipeline_on(&sys, options)
}

/// Goal-state coverage of a colored run: every instance of every member
/// has been in one of its goal (or, lacking goals, final) states.
fn goal_tracker(sys: &System, csys: &ColoredSystem) -> impl Fn(&SystemMarking) -> bool {
    let mut targets = Vec::new();
    for (m, ext) in sys.members() {
        let goal: Vec<_> = ext.base.states.iter().filter(|s| s.is_goal).collect();
        let pick = if goal.is_empty() { ext.base.states.iter().filter(|s| s.is_final).collect() } else { goal };
        for i in 0..m.instances {
            let places: Vec<usize> =
                pick.iter().filter_map(|s| csys.place_index(&format!("{}.{}", m.name, s.name))).collect();
            if !places.is_empty() {
                targets.push((i as i64, places));
            }
        }
    }
    let seen = RefCell::new(BTreeSet::new());
    move |mk| {
        let mut seen = seen.borrow_mut();
        for (k, (i, places)) in targets.iter().enumerate() {
            if places.iter().any(|&p| mk.multiplicity(p, &crate::expr::Value::Int(*i)) > 0) {
                seen.insert(k);
            }
        }
        seen.len() == targets.len()
    }
}

/// The first reachable query an objective names, used as the goal of the
/// colored faithfulness run.
fn goal_query(sys: &System) -> Option<&NamedQuery> {
    sys.requirements
        .objectives
        .iter()
        .filter_map(|o| o.check.as_deref())
        .filter_map(|c| sys.requirements.query(c))
        .find(|q| q.mode == QueryMode::Reachable)
}

pub fn run_pipeline_on(sys: &System, options: &PipelineOptions) -> Result<PipelineRun, PipelineError> {
    let mut run = PipelineRun {
        composition: sys.composition.name.clone(),
        technique: options.technique,
        stages: vec![StageResult {
            stage: Stage::Parse,
            passed: true,
            violated_rules: Vec::new(),
            report: format!("{} member(s), {} interaction(s)", sys.composition.members.len(), sys.composition.poi.len()),
        }],
        requirements: Vec::new(),
        verdict: Verdict::Verified,
        artifacts: Vec::new(),
    };
    macro_rules! stage {
        ($r:expr) => {{
            let r: StageResult = $r;
            let ok = r.passed;
            if !ok {
                run.verdict = failed(&r);
            }
            run.stages.push(r);
            if !ok {
                return Ok(run);
            }
        }};
    }

    stage!(match_stage(Stage::S1, &check_syntactic(sys)));
    stage!(match_stage(Stage::S2, &check_static_semantic(sys, &sys.taxonomy)));
    let trace = run_matching(sys, MatchMode::Exhaustive);
    stage!(StageResult {
        stage: Stage::S3a,
        passed: trace.outcome == MatchOutcome::AllReached,
        violated_rules: Vec::new(),
        report: trace.to_string(),
    });

    match options.technique {
        Technique::Algebraic => {
            let (net, log) = match composition_to_ptnet(sys) {
                Ok(x) => x,
                Err(e) => {
                    stage!(StageResult { stage: Stage::S3b, passed: false, violated_rules: Vec::new(), report: format!("FAIL: {e}") });
                    unreachable!()
                }
            };
            let rep = check_s3b_ptnet(sys, &net, &log);
            stage!(StageResult { stage: Stage::S3b, passed: rep.passed, violated_rules: Vec::new(), report: rep.to_string() });
            algebraic(sys, &net, options, &mut run);
        }
        Technique::StateSpace => {
            let (csys, log) = match compose_colored(sys) {
                Ok(x) => x,
                Err(e) => {
                    stage!(StageResult { stage: Stage::S3b, passed: false, violated_rules: Vec::new(), report: format!("FAIL: {e}") });
                    unreachable!()
                }
            };
            let rep = match goal_query(sys) {
                Some(q) => match Predicate::parse(&q.predicate).and_then(|p| p.bind(&|n| csys.place_index(n))) {
                    Ok(p) => check_s3b_colored(sys, &csys, &log, options.seed, options.max_steps, &q.name, |m| p.eval(m)),
                    Err(e) => {
                        stage!(StageResult {
                            stage: Stage::S3b,
                            passed: false,
                            violated_rules: Vec::new(),
                            report: format!("FAIL: goal query {}: {e}", q.name),
                        });
                        unreachable!()
                    }
                },
                None => check_s3b_colored(sys, &csys, &log, options.seed, options.max_steps, "goal states", goal_tracker(sys, &csys)),
            };
            match rep {
                Ok(rep) => stage!(StageResult { stage: Stage::S3b, passed: rep.passed, violated_rules: Vec::new(), report: rep.to_string() }),
                Err(e) => stage!(StageResult { stage: Stage::S3b, passed: false, violated_rules: Vec::new(), report: format!("FAIL: {e}") }),
            }
            statespace(sys, &csys, options, &mut run)?;
        }
    }
    Ok(run)
}

fn mandatory_result(kind: ConstraintKind, run: &PipelineRun) -> Option<bool> {
    let stage = match kind {
        ConstraintKind::S1Syntactic => Stage::S1,
        ConstraintKind::S2StaticSemantic => Stage::S2,
        ConstraintKind::S3aStateMachine => Stage::S3a,
        ConstraintKind::S3bTransformation => Stage::S3b,
        ConstraintKind::Custom => return None,
    };
    run.stages.iter().find(|s| s.stage == stage).map(|s| s.passed)
}

/// Runs `check` for every requirement and closes the run with the verdict.
fn judge(sys: &System, run: &mut PipelineRun, dynamic: String, mut check: impl FnMut(&str) -> (bool, String)) {
    let reqs = &sys.requirements;
    let items = reqs
        .objectives
        .iter()
        .map(|o| (o.id.clone(), o.description.clone(), o.check.clone(), ConstraintKind::Custom))
        .chain(reqs.constraints.iter().map(|c| (c.id.clone(), c.description.clone(), c.check.clone(), c.kind)));
    for (id, description, chk, kind) in items {
        let (satisfied, detail) = match (&chk, mandatory_result(kind, run)) {
            (_, Some(ok)) => (Some(ok), "mandatory stage".to_string()),
            (Some(c), None) => {
                let (ok, d) = check(c);
                (Some(ok), d)
            }
            (None, None) => (None, String::new()),
        };
        run.requirements.push(RequirementResult { id, description, check: chk, satisfied, detail });
    }
    let failing: Vec<&RequirementResult> = run.requirements.iter().filter(|r| r.satisfied == Some(false)).collect();
    let passed = failing.is_empty();
    if !passed {
        let ids: Vec<&str> = failing.iter().map(|r| r.id.as_str()).collect();
        run.verdict = Verdict::Failed { stage: Stage::Dynamic, detail: format!("{}: {}", ids.join(", "), failing[0].detail) };
    }
    run.stages.push(StageResult { stage: Stage::Dynamic, passed, violated_rules: Vec::new(), report: dynamic });
}

fn query_check<M: MarkingView>(
    sys: &System,
    g: &StateGraph<M>,
    name: &str,
    resolve: impl Fn(&str) -> Option<usize>,
) -> Option<(bool, String)> {
    let q = sys.requirements.query(name)?;
    Some(match evaluate_query(g, q, resolve) {
        Ok(o) => (o.satisfied && o.conclusive(), o.to_string()),
        Err(e) => (false, format!("{name}: {e}")),
    })
}

pub fn fairness_summary(v: &FairnessVerdict) -> String {
    match v {
        FairnessVerdict::Fair { reproduction_vector, p_invariants } => format!(
            "Fair: reproduction vector {:?}, {p_invariants} P-invariant(s)",
            reproduction_vector.to_u64().unwrap_or_default()
        ),
        FairnessVerdict::Unfair(UnfairReason::MultipleReproductionVectors { count }) => {
            format!("Unfair: {count} minimal T-invariants, no unique reproduction vector")
        }
        FairnessVerdict::Unfair(UnfairReason::ZeroEntry { transitions }) => {
            format!("Unfair: no strictly positive reproduction vector (zero on {})", transitions.join(", "))
        }
        FairnessVerdict::Unfair(UnfairReason::NotStructurallyBounded) => "Unfair: no P-invariant".to_string(),
    }
}

fn algebraic(sys: &System, net: &PlaceTransitionNet, options: &PipelineOptions, run: &mut PipelineRun) {
    let inc = incidence::<i64>(net);
    let pinv = p_invariants(net);
    let tinv = t_invariants(net);
    let mut report = format!(
        "P/T net: {} places, {} transitions\nincidence rows (transitions x places):\n",
        net.places().len(),
        net.transitions().len()
    );
    for (t, row) in net.transitions().iter().zip(&inc.a) {
        report.push_str(&format!("  {t}: {row:?}\n"));
    }
    for y in pinv.minimal_u64() {
        report.push_str(&format!("P-invariant {y:?}\n"));
    }
    for x in tinv.minimal_u64() {
        report.push_str(&format!("T-invariant {x:?}\n"));
    }
    let mut graph = None;
    judge(sys, run, report, |check| match check {
        "b-fairness" => {
            let v = check_b_fairness(net);
            (v.is_fair(), fairness_summary(&v))
        }
        "deadlock-free" => {
            let v = check_deadlock_free(net, options.budget);
            (v == DeadlockVerdict::DeadlockFree, format!("{v:?}"))
        }
        "bounded" => {
            let v = check_boundedness(net);
            (matches!(v, Boundedness::Bounded(_)), format!("{v:?}"))
        }
        other => {
            let g = graph.get_or_insert_with(|| crate::statespace::generate_ptnet(net, options.budget));
            query_check(sys, g, other, |n| net.place_index(n))
                .unwrap_or_else(|| (false, format!("unknown check `{other}`")))
        }
    });
}

fn statespace(
    sys: &System,
    csys: &ColoredSystem,
    options: &PipelineOptions,
    run: &mut PipelineRun,
) -> Result<(), PipelineError> {
    let g = match generate_colored(csys, options.budget) {
        Ok(g) => g,
        Err(e) => {
            judge(sys, run, format!("state-space generation failed: {e}"), |_| (false, e.to_string()));
            return Ok(());
        }
    };
    let mut report = format!(
        "state space: {} nodes, {} arcs{}\ndead markings: {}\n",
        g.node_count(),
        g.arc_count(),
        if g.budget_exceeded() { " (budget exceeded)" } else { "" },
        g.list_dead_markings().nodes.len()
    );
    let reduced = options.reduce.then(|| {
        let (r, rep) = reduce_compositional(&g, top_level_nonempty(csys));
        report.push_str("compositional reduction:\n");
        for line in rep.to_string().lines() {
            report.push_str(&format!("  {line}\n"));
        }
        r
    });
    if let Some((format, path)) = &options.export {
        let file = std::fs::File::create(path).map_err(ExportError::Io)?;
        export(reduced.as_ref().unwrap_or(&g), *format, top_level_description(csys), std::io::BufWriter::new(file))?;
        run.artifacts.push(path.display().to_string());
    }
    judge(sys, run, report, |check| match check {
        "deadlock-free" => {
            let dead = g.list_dead_markings();
            (dead.nodes.is_empty() && !dead.incomplete, format!("dead markings: {:?}", dead.nodes))
        }
        other => query_check(sys, &g, other, |n| csys.place_index(n)).unwrap_or_else(|| {
            (false, format!("check `{other}` is not available under the statespace technique"))
        }),
    });
    Ok(())
}
