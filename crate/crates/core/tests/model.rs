mod common;

use compverify::model::*;
use common::{fixture, load, QUEUE, QUEUE_EXT};

#[test]
fn machine1_document() {
    let src = std::fs::read_to_string(fixture("manufacturing/machine1.comp")).unwrap();
    let c = parse_component(&src).unwrap();
    assert_eq!(c.entity.as_ref().unwrap().characteristics.len(), 1);
    assert_eq!((c.events.len(), c.actions.len(), c.states.len()), (3, 3, 3));
    let names: Vec<_> = c.states.iter().map(|s| (s.id.as_str(), s.name.as_str())).collect();
    assert_eq!(names, [("S0", "M1Waiting"), ("S1", "M1Processing"), ("S2", "M1Completed")]);
    assert_eq!(c.action_direction("A0"), Some(Direction::Receive));
    assert_eq!(c.action_direction("A2"), Some(Direction::Internal));
}

#[test]
fn component_without_states_is_rejected() {
    let err = parse_component("component X\nevents {}\nactions {}\nstates {}").unwrap_err();
    assert!(matches!(err, ModelError::Reference(_)), "{err}");
}

#[test]
fn dangling_references() {
    let base = "component X\nevents { E0 Go from X to Y }\nactions { A0 Go on E9 }\nstates { S0 A initial goal }";
    assert!(matches!(parse_component(base).unwrap_err(), ModelError::Reference(_)));
    let exit = "component X\nevents { E0 Go from X to Y }\nactions { A0 Go on E0 }\nstates { S0 A initial goal { A0 -> S7 } }";
    assert!(matches!(parse_component(exit).unwrap_err(), ModelError::Reference(_)));
    let dup = "component X\nevents { E0 Go from X to Y\n E0 Stop from X to Y }\nactions {}\nstates { S0 A initial goal }";
    assert!(matches!(parse_component(dup).unwrap_err(), ModelError::DuplicateId { .. }));
    let two_senders = "component X\nevents { E0 Go from X, Z to Y }\nactions {}\nstates { S0 A initial goal }";
    assert!(matches!(parse_component(two_senders).unwrap_err(), ModelError::Syntax(_)));
}

#[test]
fn composition_wiring() {
    let sys = load("manufacturing-1.cmp");
    assert_eq!(sys.composition.poi.len(), 6);
    assert_eq!(sys.composition.poi[0].sender, ("Robot".to_string(), "A6".to_string()));
    assert!(sys.composition.is_closed());

    let sys2 = load("manufacturing-2.cmp");
    let fan = &sys2.composition.poi[0];
    assert_eq!(fan.sender, ("Controller".to_string(), "A10".to_string()));
    assert_eq!(fan.receivers, vec![("Machine1".into(), "A0".into()), ("Robot".into(), "A6".into())]);
}

#[test]
fn composition_errors() {
    let sys = load("manufacturing-1.cmp");
    let bases: Vec<BasicComponent> = sys.components.values().map(|e| e.base.clone()).collect();
    let empty = "composition C\nmembers {}";
    assert!(matches!(parse_composition(empty, &bases).unwrap_err(), ModelError::UnknownMember(_)));
    let unknown = "composition C\nmembers { Ghost \"g.comp\" }";
    assert!(matches!(parse_composition(unknown, &bases).unwrap_err(), ModelError::UnknownMember(_)));
    let dangling = "composition C\nmembers { Robot \"r\"\n Machine1 \"m\" }\nPOI P: !Robot.A42 -> ?Machine1.A0";
    assert!(matches!(parse_composition(dangling, &bases).unwrap_err(), ModelError::DanglingAction { .. }));
    let reversed = "composition C\nmembers { Robot \"r\"\n Machine1 \"m\" }\nPOI P: !Machine1.A0 -> ?Robot.A6";
    assert!(matches!(parse_composition(reversed, &bases).unwrap_err(), ModelError::DanglingAction { .. }));
}

#[test]
fn requirements_of_manufacturing() {
    let sys = load("manufacturing-1.cmp");
    assert_eq!(sys.requirements.objectives.len(), 3);
    assert_eq!(sys.requirements.constraints.len(), 5);
}

#[test]
fn queue_extension() {
    let base = parse_component(QUEUE).unwrap();
    let ext = parse_extension(QUEUE_EXT, &base).unwrap();
    let names: Vec<_> = ext.vars.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["front", "rear", "Max", "data"]);
    assert_eq!(ext.transitions.len(), 4);
    assert_eq!(ext.transitions[1].guard.to_string(), "(rear < Max)");
}

#[test]
fn extension_errors() {
    let base = parse_component(QUEUE).unwrap();
    let bad_guard = QUEUE_EXT.replace("guard rear < Max", "guard rear + 1");
    assert!(matches!(parse_extension(&bad_guard, &base).unwrap_err(), ModelError::Type { .. }));
    let dropped = QUEUE_EXT.replace(
        "nonempty -> empty on E1 guard front + 1 = rear in front, rear, data out front, rear, data\n      do { obj := nth(data, front); front := 0; rear := 0; data := []; }",
        "",
    );
    assert!(matches!(parse_extension(&dropped, &base).unwrap_err(), ModelError::BaseMismatch(_)));
    let bad_syntax = QUEUE_EXT.replace("rear < Max", "rear < < Max");
    assert!(matches!(parse_extension(&bad_syntax, &base).unwrap_err(), ModelError::ExprSyntax(_)));
    let reads_unlisted = QUEUE_EXT.replace("guard rear < Max in rear, data, Max", "guard rear < Max in rear, data");
    assert!(matches!(parse_extension(&reads_unlisted, &base).unwrap_err(), ModelError::Type { .. }));
}

fn assert_round_trip(ext: &ExtendedComponent) {
    let text = component_to_string(ext);
    let (base2, ext2) = parse_component_file(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(base2, ext.base);
    assert_eq!(&ext2, ext, "{text}");
}

#[test]
fn round_trip_every_fixture() {
    for comp in [
        "manufacturing-1.cmp",
        "manufacturing-2.cmp",
        "pingpong.cmp",
        "field-artillery.cmp",
        "field-artillery-faulty-fdc.cmp",
    ] {
        let sys = load(comp);
        for ext in sys.components.values() {
            assert_round_trip(ext);
        }
        let text = composition_to_string(&sys.composition);
        assert_eq!(parse_composition_syntax(&text).unwrap(), sys.composition);
        let req = requirements_to_string(&sys.requirements);
        assert_eq!(parse_requirements(&req).unwrap(), sys.requirements);
    }
    let base = parse_component(QUEUE).unwrap();
    assert_round_trip(&parse_extension(QUEUE_EXT, &base).unwrap());
}

#[test]
fn extension_contains_base() {
    for comp in ["manufacturing-2.cmp", "field-artillery.cmp"] {
        let sys = load(comp);
        for ext in sys.components.values() {
            for (from, action, to) in ext.base.exit_triples() {
                let ev = &ext.base.action(&action).unwrap().event;
                assert!(ext.transitions.iter().any(|t| t.from == from && t.to == to && t.event == *ev));
            }
        }
    }
}
