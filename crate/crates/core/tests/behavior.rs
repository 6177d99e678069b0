mod common;

use compverify::behavior::*;
use common::{load, system};

const SENDER_X: &str = "component A
events { E0 X from A to B }
actions { A0 X on E0 }
states { S0 Start initial { A0 -> S1 }
 S1 Done final }";

const RECEIVER_Y: &str = "component B
events { E1 Y from A to B }
actions { A1 Y on E1 }
states { S2 Wait initial { A1 -> S3 }
 S3 Done final }";

#[test]
fn manufacturing_reaches_every_goal() {
    let sys = load("manufacturing-1.cmp");
    let trace = run_matching(&sys, MatchMode::Exhaustive);
    assert_eq!(trace.outcome, MatchOutcome::AllReached, "{trace}");
    let cov = goal_coverage(&trace, &sys);
    assert!(cov.values().all(|&ok| ok), "{cov:?}");
    let visited: Vec<&str> = trace.steps.iter().flat_map(|s| s.moves.iter().map(|m| m.to.as_str())).collect();
    assert!(visited.contains(&"M1Completed") && visited.contains(&"M2Completed"));
    // Machines can be at S0/S1/S2 and the robot Idle/Busy, but the robot is
    // busy with at most one machine.
    assert!(trace.configurations > 1 && trace.configurations < 18);
}

#[test]
fn controlled_manufacturing_reaches_every_goal() {
    let sys = load("manufacturing-2.cmp");
    let trace = run_matching(&sys, MatchMode::Exhaustive);
    assert_eq!(trace.outcome, MatchOutcome::AllReached, "{trace}");
    assert!(goal_coverage(&trace, &sys).values().all(|&ok| ok));
    // The controller's load event moves three machines at once.
    let fan = trace.steps.iter().find(|s| s.event == "LoadingM1").unwrap();
    assert_eq!(fan.moves.len(), 3);
}

#[test]
fn mismatched_labels_get_stuck() {
    // The POI names the actions, but they never agree on a label: the receiver
    // expects Y while the sender offers X, so nothing can fire.
    let a = "component A
events { E0 X from A to B }
actions { A0 X on E0 }
states { S0 Start initial { A0 -> S1 }
 S1 Done final }";
    let b = "component B
events { E0 X from A to B
 E1 Y from A to B }
actions { A1 Y on E1
 A2 X on E0 }
states { S2 Wait initial { A1 -> S3 }
 S3 Got { A2 -> S4 }
 S4 Done final }";
    let sys = system(&[a, b], "composition C\nmembers { A \"a\"\n B \"b\" }\nPOI P0: !A.A0 -> ?B.A2");
    let trace = run_matching(&sys, MatchMode::Exhaustive);
    match &trace.outcome {
        MatchOutcome::Stuck { configuration } => {
            assert_eq!(configuration, &vec!["A.Start".to_string(), "B.Wait".to_string()]);
        }
        other => panic!("expected stuck, got {other:?}"),
    }
    assert!(trace.steps.is_empty());
}

#[test]
fn unwired_pair_is_stuck() {
    let sys = system(&[SENDER_X, RECEIVER_Y], "composition C\nmembers { A \"a\"\n B \"b\" }");
    let trace = run_matching(&sys, MatchMode::Seeded(3));
    assert!(matches!(trace.outcome, MatchOutcome::Stuck { .. }));
    assert_eq!(goal_coverage(&trace, &sys).values().filter(|&&ok| !ok).count(), 2);
}

#[test]
fn machine_that_never_starts_fails_coverage() {
    // Robot only ever serves Machine1: Machine2 stays in M2Waiting forever.
    let mut sys = load("manufacturing-1.cmp");
    let robot = sys.components.get_mut("Robot").unwrap();
    for s in &mut robot.base.states {
        s.exits.retain(|x| x.action != "A8" && x.action != "A9");
    }
    let exhaustive = run_matching(&sys, MatchMode::Exhaustive);
    match &exhaustive.outcome {
        MatchOutcome::CycleWithoutGoal { machines, .. } => assert_eq!(machines, &vec!["Machine2".to_string()]),
        other => panic!("expected cycle without goal, got {other:?}"),
    }
    let seeded = run_matching_with(&sys, MatchMode::Seeded(11), 500);
    assert_eq!(seeded.steps.len(), 500);
    let cov = goal_coverage(&seeded, &sys);
    assert_eq!(cov["Machine2"], false);
    assert_eq!(cov["Machine1"], true);
}

#[test]
fn seeded_runs_are_reproducible() {
    let sys = load("manufacturing-1.cmp");
    let a = run_matching(&sys, MatchMode::Seeded(42));
    let b = run_matching(&sys, MatchMode::Seeded(42));
    assert_eq!(a, b);
    assert_eq!(a.outcome, MatchOutcome::AllReached);
    assert!(goal_coverage(&a, &sys).values().all(|&ok| ok));
    let differs = (0..20).any(|s| run_matching(&sys, MatchMode::Seeded(s)).steps != a.steps);
    assert!(differs);
}

#[test]
fn trace_replays_on_the_product() {
    let sys = load("manufacturing-1.cmp");
    let automaton = LabelAutomaton::new(&sys);
    for mode in [MatchMode::Exhaustive, MatchMode::Seeded(7)] {
        let trace = run_matching(&sys, mode);
        let events: Vec<&str> = trace.steps.iter().map(|s| s.event.as_str()).collect();
        assert!(automaton.accepts_skeleton(&events));
    }
    assert!(!automaton.accepts_skeleton(&["UnloadingM1"]));
    assert!(automaton.accepts_skeleton(&["LoadingM1", "UnloadingM1", "ResetM1"]));
}

#[test]
fn instances_move_together_as_senders() {
    let sender = "component S
events { E0 Go from S to R }
actions { A0 Go on E0 }
states { S0 Ready initial { A0 -> S1 }
 S1 Sent final }";
    let receiver = "component R
events { E0 Go from S to R }
actions { A1 Go on E0 }
states { S2 Wait initial { A1 -> S3 }
 S3 Got final }";
    let sys = system(
        &[sender, receiver],
        "composition C\nmembers { S \"s\" instances 3\n R \"r\" }\nPOI P0: !S.A0 -> ?R.A1",
    );
    let trace = run_matching(&sys, MatchMode::Exhaustive);
    assert_eq!(trace.outcome, MatchOutcome::AllReached);
    assert_eq!(trace.machines, ["S#0", "S#1", "S#2", "R"]);
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(trace.steps[0].senders, ["S#0", "S#1", "S#2"]);
    assert_eq!(trace.steps[0].moves.len(), 4);
}

#[test]
fn config_graph_dot_lists_every_configuration() {
    let sys = load("manufacturing-1.cmp");
    let a = LabelAutomaton::new(&sys);
    let g = a.explore();
    let dot = a.explore().to_dot(&a);
    assert_eq!(dot.matches(" [label=\"").count(), g.configs.len() + g.edges.iter().map(Vec::len).sum::<usize>());
}

#[test]
fn field_artillery_reaches_every_goal() {
    let sys = load("field-artillery.cmp");
    let trace = run_matching(&sys, MatchMode::Exhaustive);
    assert_eq!(trace.outcome, MatchOutcome::AllReached, "{trace}");
    let cov = goal_coverage(&trace, &sys);
    assert_eq!(cov.len(), 5);
    assert!(cov.values().all(|&ok| ok), "{cov:?}");
    // The engagement order: spot, request, approve, assign, fire, assess.
    let events: Vec<&str> = trace.steps.iter().map(|s| s.event.as_str()).collect();
    let pos = |e: &str| events.iter().position(|x| *x == e).unwrap_or_else(|| panic!("{e} missing: {events:?}"));
    let order = ["TargetSpotted", "CallForFireSupport", "ProcessRequest", "RequestApproved", "AssignTarget", "Fire", "FiringCompleted", "TargetDestroyed"];
    for w in order.windows(2) {
        assert!(pos(w[0]) < pos(w[1]), "{} before {}", w[0], w[1]);
    }
}
