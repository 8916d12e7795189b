use std::fs;
use std::path::PathBuf;

use lieq::corpus;
use lieq::enveloping::EpsMode;
use lieq::error::Error;
use lieq::graphs::{wedge_table, WeightTable};
use lieq::workbench::{
    exit_code, ingest, ingest_str, library_dir, parse_lambda_list, resolve, run, validation_report, AlgebraFile,
    ArtifactCache, Command, Side, StarMethod, Target,
};
use serde_json::{json, Value};

fn bless() -> bool {
    std::env::var_os("LIEQ_BLESS").is_some()
}

fn library_file(name: &str) -> PathBuf {
    library_dir().join(format!("{name}.json"))
}

#[test]
fn library_files_match_builtins_and_goldens() {
    for name in corpus::NAMES {
        let alg = corpus::by_name(name).unwrap();
        let setup = corpus::default_setup(name);
        let file = AlgebraFile::from_algebra(&alg, setup.as_ref());
        let golden = library_dir().join("golden").join(format!("{name}.validation.json"));
        let report = validation_report(&alg, setup.as_ref());
        let report_text = serde_json::to_string_pretty(&report).unwrap() + "\n";
        if bless() {
            fs::write(library_file(name), file.to_json_string()).unwrap();
            fs::write(&golden, &report_text).unwrap();
        }
        let ing = ingest(&library_file(name)).unwrap();
        assert!(ing.algebra == alg, "{name}");
        assert_eq!(ing.setup, setup, "{name}");
        assert_eq!(fs::read_to_string(&golden).unwrap(), report_text, "{name}");
        let via_cmd = run(&Command::Validate { path: library_file(name) }, false).unwrap();
        assert_eq!(via_cmd.results, report);
        assert_eq!(via_cmd.exit_code, 0);
    }
}

#[test]
fn builtin_resolution() {
    let h = resolve("heisenberg3").unwrap();
    assert_eq!(h.algebra.dim(), 3);
    let f = resolve("filiform4").unwrap();
    assert_eq!(f.algebra.lower_central_series(), vec![4, 2, 1, 0]);
    assert!(matches!(resolve("nope"), Err(Error::InvalidArgument(_))));
}

#[test]
fn all_violations_are_reported() {
    // [X,Y] = Y, [X,Z] = Z, [Y,Z] = X breaks Jacobi; lambda(Y) on h = <X,Y> breaks the character
    let text = r#"{
        "name": "bad",
        "basis": ["X", "Y", "Z"],
        "brackets": [
            {"left": "X", "right": "Y", "result": {"Y": "1"}},
            {"left": "X", "right": "Z", "result": {"Z": "1"}},
            {"left": "Y", "right": "Z", "result": {"X": "1"}}
        ],
        "subalgebra": ["X", "Y"],
        "lambda": {"Y": "1", "W": "2"}
    }"#;
    match ingest_str(text) {
        Err(Error::Validation(errs)) => {
            assert!(errs.iter().any(|e| e.contains("Jacobi")), "{errs:?}");
            assert!(errs.iter().any(|e| e.contains("\"W\"")), "{errs:?}");
        }
        other => panic!("{other:?}"),
    }
    let char_only = r#"{
        "name": "aff", "basis": ["X", "Y"],
        "brackets": [{"left": "X", "right": "Y", "result": {"Y": "1"}}],
        "subalgebra": ["X", "Y"], "lambda": {"Y": "1"}
    }"#;
    match ingest_str(char_only) {
        Err(Error::Validation(errs)) => assert!(errs.iter().any(|e| e.contains("character violation")), "{errs:?}"),
        other => panic!("{other:?}"),
    }
    let many = r#"{"name": "m", "basis": ["A", "A", "eps"],
        "brackets": [{"left": "A", "right": "Q", "result": {"A": "x/2"}}]}"#;
    match ingest_str(many) {
        Err(Error::Validation(errs)) => assert!(errs.len() >= 4, "{errs:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn parse_errors_carry_position() {
    match ingest_str("{\n  \"name\": \"x\",\n  \"basis\": [1]\n}") {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column > 0), (3, true)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_file_gives_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"name": "b", "basis": ["X", "Y"], "brackets": [{"left": "X", "right": "X", "result": {"Y": "1"}}]}"#)
        .unwrap();
    let r = run(&Command::Validate { path: p }, false).unwrap();
    assert_eq!(r.exit_code, 2);
    assert_eq!(r.results["valid"], json!(false));
    assert_eq!(exit_code(&Error::DegreeOverflow { degree: 13, max: 12 }), 3);
    assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 1);
}

#[test]
fn invariants_command_example() {
    let t = Target::builtin("heisenberg3").with_subalgebra(&["Y", "Z"], &[("Z", "1")]);
    let cmd = Command::Invariants {
        target: t,
        n: 6,
        side: Side::U,
        eps: EpsMode::Symbolic,
        lambda_eps_scaling: false,
    };
    let a = run(&cmd, false).unwrap();
    assert_eq!(a.results["basis"], json!(["1"]));
    assert_eq!(a.results["commutative"], json!(true));
    // byte-identical reruns, no timings unless asked
    let b = run(&cmd, false).unwrap();
    assert_eq!(a.to_json_string(), b.to_json_string());
    assert!(a.to_json().get("timings").is_none());
    assert!(run(&cmd, true).unwrap().to_json().get("timings").is_some());
    let c = run(
        &Command::Commutativity {
            target: Target::builtin("heisenberg3").with_subalgebra(&["Z"], &[("Z", "1")]),
            n: 2,
            eps: EpsMode::Symbolic,
        },
        false,
    )
    .unwrap();
    assert_eq!(c.results["commutative"], json!(false));
    let w = &c.results["witness"];
    let expected = if w["left"] == json!("X") { "-eps" } else { "eps" };
    assert_eq!(w["commutator"], json!(expected), "{w}");
}

#[test]
fn graph_and_weight_commands() {
    let g = run(&Command::GraphsEnum { n: 1, m: 2, up_to_iso: false }, false).unwrap();
    assert_eq!(g.results["count"], json!(2));
    let id = g.results["graphs"][0].as_str().unwrap().to_string();
    let w = run(&Command::WeightsMc { graph: id.clone(), samples: 20_000, seed: 42 }, false).unwrap();
    let w2 = run(&Command::WeightsMc { graph: id, samples: 20_000, seed: 42 }, false).unwrap();
    assert_eq!(w.to_json_string(), w2.to_json_string());
    assert_eq!(w.seeds, vec![42]);
    assert!((w.results["estimate"].as_f64().unwrap().abs() - 0.5).abs() < 0.05);
}

#[test]
fn star_and_reduction_commands() {
    let s = run(
        &Command::Star {
            target: "heisenberg3".into(),
            method: StarMethod::Gutt,
            order: 2,
            f: "X".into(),
            g: "Y".into(),
            weights: None,
        },
        false,
    )
    .unwrap();
    assert_eq!(s.results["per_order"], json!(["X*Y", "1/2*Z", "0"]));
    let k = run(
        &Command::Star {
            target: "heisenberg3".into(),
            method: StarMethod::Kontsevich,
            order: 2,
            f: "X".into(),
            g: "Y".into(),
            weights: None,
        },
        false,
    )
    .unwrap();
    assert_eq!(k.results["per_order"], s.results["per_order"]);
    let r = run(
        &Command::Reduce {
            target: Target::builtin("heisenberg3"),
            n: 4,
            eps_order: 3,
            weights: None,
        },
        false,
    )
    .unwrap();
    assert_eq!(r.results["assumed_zero_orders"], json!([3]));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("w.json");
    fs::write(&p, serde_json::to_string(&wedge_table().to_json()).unwrap()).unwrap();
    let missing = run(
        &Command::Reduce {
            target: Target::builtin("heisenberg3"),
            n: 4,
            eps_order: 3,
            weights: Some(p),
        },
        false,
    );
    assert!(matches!(missing, Err(Error::MissingWeights(_))));
    assert!(matches!(
        run(&Command::Duflo { target: "axb".into(), truncation: 2 }, false).unwrap().results["q"].as_str(),
        Some("1/24*H^2 + 1")
    ));
}

#[test]
fn theorem_commands() {
    let t5 = run(
        &Command::Theorem5Roundtrip {
            target: Target::builtin("heisenberg3").with_subalgebra(&["Z"], &[("Z", "1")]),
            n: 2,
            eps_order: 1,
        },
        false,
    )
    .unwrap();
    assert_eq!(t5.results["all_ok"], json!(true));
    let t6 = run(
        &Command::Theorem6Check {
            target: Target::builtin("abelian2"),
            n: 2,
            eps_order: 1,
        },
        false,
    )
    .unwrap();
    assert_eq!(t6.results["verdict"], json!("consistent"));
    assert_eq!(t6.exit_code, 0);
    let cc = run(&Command::CentersCompare { target: Target::builtin("heisenberg3").with_subalgebra(&["X", "Y", "Z"], &[]), n: 3 }, false).unwrap();
    assert_eq!(cc.results["dims_match"], json!(true));
}

#[test]
fn lambda_lists() {
    assert_eq!(parse_lambda_list("Z=1, Y=-1/2").unwrap(), vec![("Z".into(), "1".into()), ("Y".into(), "-1/2".into())]);
    assert!(parse_lambda_list("Z").is_err());
    assert!(parse_lambda_list("Z=x").is_err());
}

#[test]
fn cache_roundtrip_and_integrity() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ArtifactCache::new(dir.path());
    let key = json!({"algebra": "heisenberg3", "n": 4});
    assert_eq!(cache.load("presentation", &key).unwrap(), None);
    let payload = json!({"basis": ["1", "X"]});
    let p1 = cache.store("presentation", &key, &payload).unwrap();
    let p2 = cache.store("presentation", &key, &payload).unwrap();
    assert_eq!(p1, p2);
    assert_eq!(cache.load("presentation", &key).unwrap(), Some(payload.clone()));
    // a version bump misses
    let newer = ArtifactCache::with_version(dir.path(), "99.0.0");
    assert_eq!(newer.load("presentation", &key).unwrap(), None);
    // tampering is refused
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&p1).unwrap()).unwrap();
    doc["payload"]["basis"][1] = json!("Y");
    fs::write(&p1, doc.to_string()).unwrap();
    assert!(matches!(cache.load("presentation", &key), Err(Error::Cache(_))));
    let t = wedge_table();
    cache.store_weights(&json!("wedge"), &t).unwrap();
    let back: WeightTable = cache.load_weights(&json!("wedge")).unwrap().unwrap();
    assert_eq!(back.to_json(), t.to_json());
}

#[test]
fn concurrent_duplicate_stores() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ArtifactCache::new(dir.path());
    let key = json!("k");
    let payload = json!({"v": [1, 2, 3]});
    std::thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| cache.store("x", &key, &payload).unwrap());
        }
    });
    assert_eq!(cache.load("x", &key).unwrap(), Some(payload));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}
