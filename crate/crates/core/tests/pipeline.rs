mod common;

use compverify::pipeline::*;
use compverify::statespace::ExportFormat;
use common::{fixture, load};

fn run(file: &str, technique: Technique) -> PipelineRun {
    run_pipeline(fixture(file), &PipelineOptions::new(technique)).unwrap()
}

fn stage(run: &PipelineRun, s: Stage) -> &StageResult {
    run.stages.iter().find(|r| r.stage == s).unwrap_or_else(|| panic!("no {s} stage in\n{run}"))
}

#[test]
fn manufacturing_one_fails_dynamic_analysis() {
    let r = run("manufacturing-1.cmp", Technique::Algebraic);
    for s in [Stage::S1, Stage::S2, Stage::S3a, Stage::S3b] {
        assert!(stage(&r, s).passed, "{r}");
    }
    match &r.verdict {
        Verdict::Failed { stage, detail } => {
            assert_eq!(*stage, Stage::Dynamic);
            assert!(detail.contains("s4"), "{detail}");
        }
        Verdict::Verified => panic!("{r}"),
    }
    let s4 = r.requirements.iter().find(|q| q.id == "s4").unwrap();
    assert_eq!(s4.satisfied, Some(false));
}

#[test]
fn manufacturing_two_is_verified() {
    let r = run("manufacturing-2.cmp", Technique::Algebraic);
    assert!(r.verified(), "{r}");
    assert!(r.requirements.iter().all(|q| q.satisfied != Some(false)), "{r}");
    assert!(r.to_string().ends_with("verdict: verified\n"));
}

#[test]
fn field_artillery_statespace_is_verified() {
    let r = run("field-artillery.cmp", Technique::StateSpace);
    assert!(r.verified(), "{r}");
    let s4 = r.requirements.iter().find(|q| q.id == "s4").unwrap();
    assert_eq!(s4.satisfied, Some(true));
}

#[test]
fn faulty_fdc_fails_friendly_fire_constraint() {
    let r = run("field-artillery-faulty-fdc.cmp", Technique::StateSpace);
    assert!(stage(&r, Stage::S3b).passed, "{r}");
    assert!(matches!(&r.verdict, Verdict::Failed { stage: Stage::Dynamic, detail } if detail.starts_with("s4")), "{r}");
}

#[test]
fn pingpong_passes_under_both_techniques() {
    for t in [Technique::Algebraic, Technique::StateSpace] {
        let r = run("pingpong.cmp", t);
        assert!(r.verified(), "{r}");
    }
}

#[test]
fn syntactic_violation_stops_at_s1() {
    let mut sys = load("manufacturing-1.cmp");
    let m = sys.components.get_mut("Machine1").unwrap();
    m.base.events.iter_mut().find(|e| e.id == "E0").unwrap().name = "LoadM1".into();
    let r = run_pipeline_on(&sys, &PipelineOptions::new(Technique::Algebraic)).unwrap();
    let last = r.stages.last().unwrap();
    assert_eq!(last.stage, Stage::S1);
    assert!(!last.passed);
    assert_eq!(last.violated_rules, ["SM-Rule1"]);
    assert!(matches!(r.verdict, Verdict::Failed { stage: Stage::S1, .. }));
}

#[test]
fn technique_names_parse() {
    assert_eq!("algebraic".parse::<Technique>().unwrap(), Technique::Algebraic);
    assert_eq!("statespace".parse::<Technique>().unwrap(), Technique::StateSpace);
    assert!(matches!("bogus".parse::<Technique>(), Err(PipelineError::UnknownTechnique(_))));
}

#[test]
fn reduced_export_is_written() {
    let dir = std::env::temp_dir().join(format!("compverify-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("pingpong.dot");
    let mut opts = PipelineOptions::new(Technique::StateSpace);
    opts.reduce = true;
    opts.export = Some((ExportFormat::Dot, out.clone()));
    let r = run_pipeline(fixture("pingpong.cmp"), &opts).unwrap();
    assert!(r.verified(), "{r}");
    let doc = std::fs::read_to_string(&out).unwrap();
    assert!(doc.starts_with("digraph"));
    assert_eq!(r.artifacts.len(), 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn advice_follows_model_shape() {
    let fair = advise(&load("manufacturing-1.cmp"));
    assert!(fair.iter().any(|l| l.contains("b-fairness")), "{fair:?}");
    let data = advise(&load("field-artillery.cmp"));
    assert!(data[0].contains("statespace"), "{data:?}");
    assert!(data.iter().any(|l| l.contains("query")), "{data:?}");
}

#[test]
fn missing_file_is_an_error() {
    assert!(run_pipeline(fixture("nope.cmp"), &PipelineOptions::new(Technique::Algebraic)).is_err());
}
