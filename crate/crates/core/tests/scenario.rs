use std::path::PathBuf;

use ensemble_planner::scenario::builtin::{builtin, builtin_scenarios, NAMES};
use ensemble_planner::scenario::{load_scenario, load_scenario_file, serialize_scenario};
use ensemble_planner::Error;

#[test]
fn aliases_resolve_to_canonical_scenarios() {
    let upper = builtin("t_junction_row_upper").unwrap();
    assert_eq!(upper.name, "t_junction_row");
    assert_eq!(upper.vehicles.len(), 2);
    assert_eq!(upper.right_of_way, vec![("upper".to_string(), "lower".to_string())]);
    let lower = builtin("t_junction_row_lower").unwrap();
    assert_eq!(lower.right_of_way, vec![("lower".to_string(), "upper".to_string())]);
    assert!(matches!(builtin("roundabout"), Err(Error::UnknownScenario(_))));
}

#[test]
fn builtins_have_distinct_names() {
    let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
    assert_eq!(names, NAMES);
}

#[test]
fn shipped_files_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let s = load_scenario_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(path.file_stem().unwrap().to_str(), Some(s.name.as_str()));
        count += 1;
    }
    assert!(count >= 2);
}

#[test]
fn builtins_round_trip() {
    for s in builtin_scenarios() {
        let text = serialize_scenario(&s).unwrap();
        let back = load_scenario(&text).unwrap();
        assert_eq!(serialize_scenario(&back).unwrap(), text, "{}", s.name);
        assert_eq!(back.right_of_way, s.right_of_way);
        assert_eq!(back.sampling, s.sampling);
        for (a, b) in s.vehicles.iter().zip(&back.vehicles) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.initial, b.initial);
            assert_eq!(a.limits, b.limits);
            assert_eq!(a.costs, b.costs);
            assert_eq!(a.path.waypoints(), b.path.waypoints());
        }
    }
}

#[test]
fn invalid_documents_are_rejected() {
    let base = r#"
name = "x"
speed_limit = 10.0
ego = "a"
[[vehicles]]
id = "a"
length = 4.0
width = 1.8
initial = { s = 0.0, v = 5.0, a = 0.0 }
path = { waypoints = [[0.0, 0.0], [100.0, 0.0]], corridor_halfwidth = 1.75 }
"#;
    assert!(load_scenario(base).is_ok());
    for (from, to) in [
        ("ego = \"a\"", "ego = \"b\""),
        ("s = 0.0", "s = 150.0"),
        ("v = 5.0", "v = 50.0"),
        ("[[0.0, 0.0], [100.0, 0.0]]", "[[0.0, 0.0]]"),
        ("length = 4.0", "length = 4.0\ncolour = \"red\""),
        ("speed_limit = 10.0", "speed_limit = 10.0\n[sampling]\nhorizon = 8.1"),
        ("speed_limit = 10.0", "speed_limit = 10.0\n[sampling]\njerk_levels = [9.0]"),
    ] {
        let doc = base.replacen(from, to, 1);
        assert!(load_scenario(&doc).is_err(), "accepted after {from} -> {to}");
    }
}
