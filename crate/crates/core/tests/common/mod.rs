#![allow(dead_code)]

use std::path::PathBuf;

use compverify::model::{load_system, System};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn load(rel: &str) -> System {
    load_system(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Builds a system from in-memory component and composition sources.
pub fn system(components: &[&str], composition: &str) -> System {
    use compverify::model::{parse_component_file, parse_composition, parse_requirements};
    let exts: Vec<_> = components.iter().map(|c| parse_component_file(c).unwrap().1).collect();
    let bases: Vec<_> = exts.iter().map(|e| e.base.clone()).collect();
    let comp = parse_composition(composition, &bases).unwrap();
    System::new(comp, exts, compverify::static_match::Taxonomy::new(), parse_requirements("").unwrap()).unwrap()
}

/// A bounded FIFO queue: `Put` fills it up to `Max` items, `Get` hands
/// them out in order.
pub const QUEUE: &str = r#"
component Queue
events {
  E0 Put from Producer to Queue (obj: TEXT)
  E1 Get from Queue to Consumer (obj: TEXT)
}
actions {
  A0 Put on E0
  A1 Get on E1
}
states {
  S0 empty initial goal { A0 -> S1 }
  S1 nonempty { A0 -> S1, A1 -> S1, A1 -> S0 }
}
"#;

pub const QUEUE_EXT: &str = r#"
extension {
  variables {
    front: INT = 0;
    rear: INT = 0;
    Max: INT = 3;
    data: seq(TEXT) = [];
  }
  transitions {
    empty -> nonempty on E0 in rear, data, Max out rear, data, Max
      do { data := append(data, obj); rear := rear + 1; }
    nonempty -> nonempty on E0 guard rear < Max in rear, data, Max out rear, data, Max
      do { data := append(data, obj); rear := rear + 1; }
    nonempty -> nonempty on E1 guard front + 1 < rear in front, rear, data out front, rear, data
      do { obj := nth(data, front); front := front + 1; }
    nonempty -> empty on E1 guard front + 1 = rear in front, rear, data out front, rear, data
      do { obj := nth(data, front); front := 0; rear := 0; data := []; }
  }
}
"#;
