use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn tropun(args: &[&str], dir: &Path) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_tropun")).args(args).current_dir(dir).env_remove("TROPUN_CACHE_DIR").output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn examples() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = tropun(&["examples", "--out", "."], dir.path());
    assert_eq!(code, 0);
    dir
}

#[test]
fn documented_sequence() {
    let d = examples();
    let p = d.path();
    let (c, v) = tropun(&["validate", "line.json"], p);
    assert_eq!((c, v["face_count"].as_u64()), (0, Some(4)));
    let (c, v) = tropun(&["validate", "elliptic.json"], p);
    assert_eq!(c, 0);
    assert_eq!(v["recession_fan"]["faces_by_dim"], serde_json::json!([1, 5]));
    let (_, v) = tropun(&["forms", "plane.json", "--open", "star:@2,0", "--p", "1"], p);
    assert_eq!(v["dim"], 1);
    assert_eq!(v["basis"], serde_json::json!([["0", "1", "0"]]));
    assert_eq!(v["star_quotient"]["isomorphism"], true);
    for k in ["2", "3"] {
        let (_, v) = tropun(&["forms", "plane.json", "--open", "star:@2,0", "--p", k], p);
        assert_eq!(v["dim"], 0);
    }
    let (_, v) = tropun(&["forms", "line.json", "--p", "1"], p);
    assert_eq!(v["basis"], serde_json::json!([["1", "0", "0"], ["0", "1", "0"]]));
    assert_eq!(tropun(&["forms", "line.json", "--p", "2"], p).1["dim"], 0);
    assert_eq!(tropun(&["forms", "elliptic.json"], p).1["dim"], 1);
    let (c, v) = tropun(&["bar-dims", "--max-len", "4", "line.json"], p);
    assert_eq!(c, 0);
    assert_eq!(v["dims"], serde_json::json!([1, 2, 4, 8, 16]));
    assert_eq!(v["free_rank_if_free"], 2);
    let (_, v) = tropun(&["bergman", "--matroid", "u23.matroid.json"], p);
    assert_eq!(v["faces"].as_array().unwrap().len(), 3);
    let (c, v) = tropun(&["check-balanced", "u34-bergman.json"], p);
    assert_eq!((c, &v["balanced"]), (0, &Value::Bool(true)));
    assert_eq!(tropun(&["check-smooth", "line.json", "--certificate", "line-cert.json"], p).0, 0);
    assert_eq!(tropun(&["check-smooth", "line.json", "--certificate", "line-cert-mismatch.json"], p).0, 1);
    assert_eq!(tropun(&["connection-check", "line-e12.json"], p).1["integrable"], true);
    let (c, v) = tropun(&["connection-check", "u34-nonintegrable.json"], p);
    assert_eq!((c, &v["integrable"]), (1, &Value::Bool(false)));
    assert_eq!(tropun(&["horizontal", "line-e12.json"], p).1["dim"], 1);
    assert_eq!(tropun(&["hom", "line-unit.json", "line-e12.json"], p).1["dim"], 1);
    let (c, v) = tropun(&["descent-validate", "elliptic-st.json"], p);
    assert_eq!((c, v["skeleton"]["edges"].as_array().unwrap().len()), (0, 5));
    assert_eq!(v["skeleton"]["is_cycle"], true);
    let (c, v) = tropun(&["descent-validate", "elliptic-noncommuting.json"], p);
    assert_eq!(c, 1);
    assert_eq!(v["violations"][0]["kind"], "intertwining");
    assert_eq!(tropun(&["descent-unipotent", "elliptic-st.json"], p).1["unipotent"], true);
    let (_, v) = tropun(&["elliptic-extract", "elliptic-st.json"], p);
    assert_eq!(v["S"], serde_json::json!([["0", "1"], ["0", "0"]]));
    assert_eq!(v["T"], serde_json::json!([["1", "1"], ["0", "1"]]));
    assert_eq!(tropun(&["descent-hom", "elliptic-unit.json", "elliptic-st.json"], p).1["dim"], 1);
    assert_eq!(tropun(&["descent-hom", "elliptic-st.json", "elliptic-st.json"], p).1["dim"], 2);
}

#[test]
fn exit_codes_separate_parse_errors_from_failures() {
    let d = examples();
    let p = d.path();
    std::fs::write(p.join("truncated.json"), "{\"rank\": 2").unwrap();
    assert_eq!(tropun(&["validate", "truncated.json"], p).0, 2);
    assert_eq!(tropun(&["validate", "missing.json"], p).0, 2);
    std::fs::write(p.join("bad-rational.json"), r#"{"rank": 1, "faces": [{"vertices": [["x"]]}]}"#).unwrap();
    assert_eq!(tropun(&["validate", "bad-rational.json"], p).0, 2);
    std::fs::write(p.join("overlap.json"), r#"{"rank": 1, "faces": [{"vertices": [[0], [2]]}, {"vertices": [[1], [3]]}]}"#).unwrap();
    let (c, v) = tropun(&["validate", "overlap.json"], p);
    assert_eq!((c, &v["kind"]), (1, &Value::from("validation_failure")));
    assert_eq!(tropun(&["forms", "line.json", "--open", "star:99"], p).0, 1);
    assert_eq!(tropun(&["forms", "line.json", "--open", "sideways"], p).0, 2);
    assert_eq!(tropun(&["no-such-command"], p).0, 2);
}

#[test]
fn output_is_stable() {
    let d = examples();
    let p = d.path();
    for args in [
        vec!["validate", "plane.json"],
        vec!["forms", "u34-bergman.json", "--p", "2"],
        vec!["bar-dims", "u34-bergman.json", "--max-len", "3"],
        vec!["descent-hom", "elliptic-st.json", "elliptic-st.json"],
    ] {
        let a = Command::new(env!("CARGO_BIN_EXE_tropun")).args(&args).current_dir(p).output().unwrap();
        let b = Command::new(env!("CARGO_BIN_EXE_tropun")).args(&args).current_dir(p).output().unwrap();
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn cache_directory_replays_results() {
    let d = examples();
    let p = d.path();
    let cache = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_tropun"))
            .args(["check-smooth", "line.json", "--certificate", "line-cert-mismatch.json"])
            .current_dir(p)
            .env("TROPUN_CACHE_DIR", cache.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 1);
    let second = run();
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(second.status.code(), Some(1));
}
