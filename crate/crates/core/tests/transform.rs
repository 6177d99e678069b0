mod common;

use std::collections::BTreeMap;

use compverify::behavior::LabelAutomaton;
use compverify::colored::*;
use compverify::expr::{Type, Value};
use compverify::model::{parse_component, parse_extension};
use compverify::petri::{incidence, IncidenceMatrices};
use compverify::transform::*;
use common::{load, system, QUEUE, QUEUE_EXT};

const FIXTURES: [&str; 5] =
    ["manufacturing-1.cmp", "manufacturing-2.cmp", "pingpong.cmp", "field-artillery.cmp", "field-artillery-faulty-fdc.cmp"];

fn text(s: &str) -> Value {
    Value::Text(s.into())
}

fn int(i: i64) -> Value {
    Value::Int(i)
}

fn target_spotted(v: &Value) -> bool {
    *v == Value::Tuple(vec![int(0), int(0), text("")])
}

#[test]
fn manufacturing_ptnet_matches_hand_built_net() {
    let (net, log) = composition_to_ptnet(&load("manufacturing-1.cmp")).unwrap();
    assert!(log.omissions.is_empty(), "{log}");
    assert_eq!(net.places(), ["P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8"]);
    assert_eq!(net.transitions(), ["T1", "T2", "T3", "T4", "T5", "T6"]);
    assert_eq!(net.m0().counts().unwrap(), vec![1, 0, 0, 1, 0, 0, 1, 0]);
    let a: IncidenceMatrices<i64> = incidence(&net);
    assert_eq!(
        a.a,
        vec![
            vec![-1, 1, 0, 0, 0, 0, -1, 1],
            vec![0, -1, 1, 0, 0, 0, 1, -1],
            vec![1, 0, -1, 0, 0, 0, 0, 0],
            vec![0, 0, 0, -1, 1, 0, -1, 1],
            vec![0, 0, 0, 0, -1, 1, 1, -1],
            vec![0, 0, 0, 1, 0, -1, 0, 0],
        ]
    );

    let (net2, _) = composition_to_ptnet(&load("manufacturing-2.cmp")).unwrap();
    assert_eq!(net2.places().len(), 10);
    let a2: IncidenceMatrices<i64> = incidence(&net2);
    assert_eq!(a2.a[0], vec![-1, 1, 0, 0, 0, 0, -1, 1, -1, 1]);
    assert_eq!(a2.a[3], vec![0, 0, 0, -1, 1, 0, -1, 1, 1, -1]);
}

#[test]
fn both_paths_omit_nothing_on_fixtures() {
    for f in FIXTURES {
        let sys = load(f);
        let (net, log) = composition_to_ptnet(&sys).unwrap();
        let rep = check_s3b_ptnet(&sys, &net, &log);
        assert!(rep.passed, "{f}: {rep}");
        let (_, clog) = compose_colored(&sys).unwrap();
        assert!(clog.omissions.is_empty(), "{f}: {clog}");
    }
}

#[test]
fn manufacturing_net_reaches_goal_places() {
    let sys = load("manufacturing-1.cmp");
    let (net, log) = composition_to_ptnet(&sys).unwrap();
    let rep = check_s3b_ptnet(&sys, &net, &log);
    let goals: Vec<&str> = rep.goals.keys().map(|k| k.split(' ').next().unwrap()).collect();
    // Completed states of both machines (the robot's idle state is a goal too).
    assert!(goals.contains(&"P3") && goals.contains(&"P6"), "{goals:?}");
    assert!(rep.goals.values().all(|&b| b));
}

#[test]
fn single_state_component() {
    let src = "component Lamp\nevents {}\nactions {}\nstates { S0 On initial goal }";
    let sys = system(&[src], "composition Solo\nmembers { Lamp \"lamp.comp\" }");
    let (net, log) = composition_to_ptnet(&sys).unwrap();
    assert_eq!((net.places().len(), net.transitions().len()), (1, 0));
    assert!(check_s3b_ptnet(&sys, &net, &log).passed);
    let (c, _) = extended_to_colored(sys.ext("Lamp"), "Lamp").unwrap();
    assert!(c.structural.is_empty() && c.ports.is_empty() && c.transitions.is_empty());
    let csys = ColoredSystem::standalone(c, 1).unwrap();
    let trace = simulate_until(&csys, 0, 10, |_| false).unwrap();
    assert_eq!((trace.end, trace.steps.len()), (TraceEnd::Deadlock, 0));
}

fn queue() -> ColoredComponent {
    let base = parse_component(QUEUE).unwrap();
    let ext = parse_extension(QUEUE_EXT, &base).unwrap();
    extended_to_colored(&ext, "Queue").unwrap().0
}

#[test]
fn queue_layers() {
    let q = queue();
    let svs: Vec<(&str, &Type)> = q.structural.iter().map(|s| (s.name.as_str(), &s.color)).collect();
    assert_eq!(
        svs,
        [("front", &Type::Int), ("rear", &Type::Int), ("Max", &Type::Int), ("data", &Type::Seq(Box::new(Type::Text)))]
    );
    let ports: Vec<(&str, PortTag)> = q.ports.iter().map(|p| (p.name.as_str(), p.tag)).collect();
    assert_eq!(ports, [("Put", PortTag::In), ("Get", PortTag::Out)]);
    assert_eq!(q.states.iter().filter(|s| s.initial).count(), 1);
    assert_eq!(q.transitions.len(), 4);
}

#[test]
fn queue_is_fifo() {
    let items: Vec<Value> = ["a", "b", "c", "d", "e"].into_iter().map(text).collect();
    let expected = items.clone();
    let rep = functional_test(&queue(), &[("Put".into(), items)], |out| out["Get"] == expected).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.quiescent);
}

#[test]
fn queue_without_input_deadlocks_at_once() {
    let sys = ColoredSystem::standalone(queue(), 1).unwrap();
    assert!(enabled_bindings(&sys, &sys.initial_marking()).unwrap().is_empty());
    let empty = SystemMarking::empty(sys.places.len());
    assert!(enabled_bindings(&sys, &empty).unwrap().is_empty());
    let trace = simulate(&sys, SimulationMode::Auto { seed: 3, max_steps: 50 }).unwrap();
    assert_eq!(trace.end, TraceEnd::Deadlock);
    assert!(trace.steps.is_empty());
}

#[test]
fn firing_a_binding_twice_is_stale() {
    let sys = ColoredSystem::standalone(queue(), 1).unwrap();
    let mut m = sys.initial_marking();
    m.add(sys.place_index("Queue.Put").unwrap(), text("x"), 1);
    let b = enabled_bindings(&sys, &m).unwrap().remove(0);
    let next = fire_binding(&sys, &m, &b).unwrap();
    assert!(matches!(fire_binding(&sys, &next, &b), Err(EngineError::StaleBinding(_))));
}

#[test]
fn battery_ports() {
    let sys = load("field-artillery.cmp");
    let (b, _) = extended_to_colored(sys.ext("Battery"), "Battery").unwrap();
    let target = Type::Tuple(vec![Type::Int, Type::Int, Type::Text, Type::Seq(Box::new(Type::Bool))]);
    let ports: Vec<(&str, PortTag, &Type)> = b.ports.iter().map(|p| (p.name.as_str(), p.tag, &p.color)).collect();
    assert_eq!(
        ports,
        [
            ("AssignTarget", PortTag::In, &target),
            ("Fire", PortTag::Out, &Type::Tuple(vec![Type::Int; 4])),
            ("FiringCompleted", PortTag::Out, &Type::Unit),
        ]
    );
}

#[test]
fn fdc_approves_enemies_only() {
    let sys = load("field-artillery.cmp");
    let (fdc, _) = extended_to_colored(sys.ext("FDC"), "FDC").unwrap();
    let req = |id: i64, grid: i64, kind: &str| Value::Tuple(vec![int(id), int(grid), text(kind)]);
    let stimuli = [("ProcessRequest".to_string(), vec![req(1, 123456, "Artillery"), req(3, 345678, "Troops"), req(9, 1, "Ghost")])];
    let rep = functional_test(&fdc, &stimuli, |out: &BTreeMap<String, Vec<Value>>| {
        out["RequestApproved"].len() == 1 && out["RequestDenied"].len() == 2
    })
    .unwrap();
    assert!(rep.passed, "{rep:?}");
}

#[test]
fn field_artillery_colored_run_reaches_goal_in_order() {
    for f in ["field-artillery.cmp", "field-artillery-faulty-fdc.cmp"] {
        let sys = load(f);
        let (csys, log) = compose_colored(&sys).unwrap();
        let ts = csys.place_index("TS").unwrap();
        for seed in 0..5 {
            let rep = check_s3b_colored(&sys, &csys, &log, seed, 5000, "AllTargetDestroyed", |m| {
                m.tokens(ts).keys().any(target_spotted)
            })
            .unwrap();
            assert!(rep.passed, "{f} seed {seed}: {rep}");
            assert!(rep.interaction_order.starts_with(&["ObserveField".to_string(), "TargetSpotted".to_string()]));
        }
    }
}

#[test]
fn seeded_simulation_is_deterministic() {
    let (csys, _) = compose_colored(&load("field-artillery.cmp")).unwrap();
    let run = |seed| simulate(&csys, SimulationMode::Auto { seed, max_steps: 300 }).unwrap();
    assert_eq!(run(7).render(&csys), run(7).render(&csys));
    assert_ne!(run(7).labels(), run(8).labels());
}

#[test]
fn instances_are_conserved() {
    let (csys, _) = compose_colored(&load("field-artillery.cmp")).unwrap();
    let (battery, n) = csys.component("Battery").unwrap();
    assert_eq!(n, 3);
    let places: Vec<usize> =
        battery.states.iter().map(|s| csys.place_index(&format!("Battery.{}", s.name)).unwrap()).collect();
    let trace = simulate(&csys, SimulationMode::Auto { seed: 11, max_steps: 400 }).unwrap();
    let mut m = csys.initial_marking();
    for step in &trace.steps {
        m = fire_binding(&csys, &m, &step.binding).unwrap();
        for i in 0..3 {
            let held: u32 = places.iter().map(|&p| m.multiplicity(p, &int(i))).sum();
            assert_eq!(held, 1, "instance {i} after step {}", step.step);
        }
        let total: u64 = places.iter().map(|&p| m.count(p)).sum();
        assert_eq!(total, 3);
    }
    assert_eq!(m, trace.final_marking);
}

#[test]
fn interaction_order_is_accepted_by_the_state_machines() {
    let sys = load("field-artillery.cmp");
    let (csys, _) = compose_colored(&sys).unwrap();
    let trace = simulate(&csys, SimulationMode::Auto { seed: 2, max_steps: 600 }).unwrap();
    let order = interaction_order(&csys, &trace);
    assert!(order.len() > 10);
    assert!(LabelAutomaton::new(&sys).accepts_skeleton(&order), "{order:?}");
}

const SENDER: &str = "component A
events { E0 X from A to B (v: INT) }
actions { A0 X on E0 }
states { S0 Start initial { A0 -> S1 }
 S1 Done final }
extension { transitions { Start -> Done on E0 do { v := 1; } } }";

const RECEIVER_TEXT: &str = "component B
events { E1 X from A to B (v: TEXT) }
actions { A1 X on E1 }
states { S2 Wait initial { A1 -> S3 }
 S3 Done final }";

const WIRING: &str = "composition C\nmembers { A \"a\"\n B \"b\" }\nPOI P0: !A.A0 -> ?B.A1";

#[test]
fn color_mismatch_is_rejected() {
    let sys = system(&[SENDER, RECEIVER_TEXT], WIRING);
    match compose_colored(&sys) {
        Err(TransformError::ColorMismatch { poi, expected, found, .. }) => {
            assert_eq!(poi, "P0");
            assert_eq!((expected, found), (Type::Text, Type::Int));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unwired_send_is_unpaired() {
    let receiver = RECEIVER_TEXT.replace("TEXT", "INT");
    let sys = system(&[SENDER, &receiver], "composition C\nmembers { A \"a\"\n B \"b\" }");
    assert!(matches!(composition_to_ptnet(&sys), Err(TransformError::UnpairedEvent { .. })));
}
