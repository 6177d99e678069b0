mod common;

use compverify::model::{Param, System};
use compverify::static_match::*;
use common::load;

fn robot_event<'a>(sys: &'a mut System, id: &str) -> &'a mut compverify::model::EventDef {
    let robot = sys.components.get_mut("Robot").unwrap();
    robot.base.events.iter_mut().find(|e| e.id == id).unwrap()
}

fn machine1_event<'a>(sys: &'a mut System, id: &str) -> &'a mut compverify::model::EventDef {
    let m = sys.components.get_mut("Machine1").unwrap();
    m.base.events.iter_mut().find(|e| e.id == id).unwrap()
}

fn param(name: &str, class: &str, unit: Option<&str>) -> Param {
    Param {
        name: name.into(),
        ty: compverify::expr::Type::Int,
        class: Some(class.into()),
        unit: unit.map(str::to_string),
    }
}

#[test]
fn manufacturing_passes_both_tiers() {
    let sys = load("manufacturing-1.cmp");
    let syn = check_syntactic(&sys);
    assert!(syn.passed, "{syn}");
    assert_eq!(syn.matched.len(), 4);
    assert!(syn.matched.contains(&"!Robot.LoadingM1 -> ?Machine1.LoadingM1".to_string()));
    let sem = check_static_semantic(&sys, &sys.taxonomy);
    assert!(sem.passed, "{sem}");

    let sys2 = load("manufacturing-2.cmp");
    assert!(check_syntactic(&sys2).passed);
    assert!(check_static_semantic(&sys2, &sys2.taxonomy).passed);
}

/// Applies `mutate`, then expects exactly `rule` among the violations of `level`.
fn expect_only(rule: &str, mutate: impl FnOnce(&mut System)) {
    let mut sys = load("manufacturing-1.cmp");
    mutate(&mut sys);
    let syn = check_syntactic(&sys);
    let report = if rule.starts_with("SM-") { syn } else {
        assert!(syn.passed, "{syn}");
        check_static_semantic(&sys, &sys.taxonomy)
    };
    assert!(!report.passed);
    assert_eq!(report.violated_rules().into_iter().collect::<Vec<_>>(), vec![rule], "{report}");
}

#[test]
fn name_mismatch_is_sm_rule1() {
    expect_only("SM-Rule1", |s| machine1_event(s, "E0").name = "LoadM1".into());
}

#[test]
fn incomplete_pair_is_sm_rule2() {
    let mut sys = load("manufacturing-1.cmp");
    let robot = sys.components.get_mut("Robot").unwrap();
    robot.base.events.retain(|e| e.id != "E7");
    robot.base.actions.retain(|a| a.id != "A7");
    for s in &mut robot.base.states {
        s.exits.retain(|x| x.action != "A7");
    }
    sys.composition.poi.retain(|p| p.id != "POI1");
    let r = check_syntactic(&sys);
    assert_eq!(r.violated_rules().into_iter().collect::<Vec<_>>(), vec!["SM-Rule2"]);
    assert_eq!(r.violations[0].subject, "Machine1.?UnloadingM1");
}

#[test]
fn arity_mismatch_is_sm_rule3() {
    expect_only("SM-Rule3", |s| robot_event(s, "E6").params.push(param("extra", "INT", None)));
}

#[test]
fn disjoint_interest_is_ssm_rule1() {
    expect_only("SSM-Rule1", |s| {
        let robot = s.components.get_mut("Robot").unwrap();
        robot.base.tags.aoi = ["Conveyer".to_string(), "Automation".to_string()].into();
    });
}

#[test]
fn extra_common_purpose_is_ssm_rule2() {
    expect_only("SSM-Rule2", |s| {
        for m in ["Machine1", "Machine2", "Robot"] {
            s.components.get_mut(m).unwrap().base.tags.purpose.insert("Warehousing".into());
        }
    });
}

#[test]
fn inverted_type_hierarchy_is_ssm_rule3() {
    expect_only("SSM-Rule3", |s| {
        robot_event(s, "E6").params.push(param("d", "time", None));
        machine1_event(s, "E0").params.push(param("d", "second", None));
    });
}

#[test]
fn narrowing_type_is_accepted() {
    let mut sys = load("manufacturing-1.cmp");
    robot_event(&mut sys, "E6").params.push(param("d", "second", None));
    machine1_event(&mut sys, "E0").params.push(param("d", "time", None));
    assert!(check_static_semantic(&sys, &sys.taxonomy).passed);
}

#[test]
fn sibling_units_are_ssm_rule4() {
    expect_only("SSM-Rule4", |s| {
        robot_event(s, "E6").params.push(param("v", "INT", Some("m/s")));
        machine1_event(s, "E0").params.push(param("v", "INT", Some("km/h")));
    });
}

#[test]
fn unknown_unit_fails_closed() {
    let mut sys = load("manufacturing-1.cmp");
    robot_event(&mut sys, "E6").params.push(param("v", "INT", Some("furlong")));
    machine1_event(&mut sys, "E0").params.push(param("v", "INT", Some("m/s")));
    let r = check_static_semantic(&sys, &sys.taxonomy);
    assert!(r.violations[0].detail.contains("unknown term"), "{r}");
}

#[test]
fn relation_is_antisymmetric_on_fixture_taxonomy() {
    let sys = load("manufacturing-1.cmp");
    let t = &sys.taxonomy;
    let terms = ["Production", "Manufacturing", "Lathing", "time", "second", "Speed", "m/s", "km/h", "Healthcare", "Medical", "nope"];
    for a in terms {
        for b in terms {
            let (ab, ba) = (t.relation(a, b), t.relation(b, a));
            match ab {
                SemanticRelation::DirectParent => assert_eq!(ba, SemanticRelation::DirectChild),
                SemanticRelation::DirectChild => assert_eq!(ba, SemanticRelation::DirectParent),
                other => assert_eq!(ba, other),
            }
        }
    }
}

#[test]
fn field_artillery_passes_both_tiers() {
    for f in ["field-artillery.cmp", "field-artillery-faulty-fdc.cmp"] {
        let sys = load(f);
        let syn = check_syntactic(&sys);
        assert!(syn.passed, "{f}: {syn}");
        // One pair per receiver of every interaction.
        let pairs: usize = sys.composition.poi.iter().map(|p| p.receivers.len()).sum();
        assert_eq!(syn.matched.len(), pairs);
        let sem = check_static_semantic(&sys, &sys.taxonomy);
        assert!(sem.passed, "{f}: {sem}");
    }
}
