use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn sbls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbls")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("sbls-cli-{}-{name}", std::process::id()))
}

#[test]
fn repro_example_a_reports_values() {
    let out = sbls(&["repro", "paperA"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    let find = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap()["actual"].clone();
    assert_eq!(find("objective at (1,1,0,1,1,0)"), "2.5");
    assert_eq!(find("gradient"), "(0,0,2,0,0,-5)");
    assert_eq!(find("NB"), "true");
    assert_eq!(find("CW"), "false");
}

#[test]
fn repro_likeproj1_and_example_b_note() {
    let out = sbls(&["repro", "likeproj1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("{(0,0,1,9,-12,0)}"));

    let out = sbls(&["repro", "paperB"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["notes"][0].as_str().unwrap().contains("(2,0,0,0,0,0,0,0)"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("note:"));
}

#[test]
fn check_reports_flags_and_exit_codes() {
    let a = data("paper_a.json");
    let out = sbls(&["check", &a]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["flags"]["NB"], true);
    assert_eq!(v["flags"]["CW"], false);
    assert_eq!(v["minimal_L"], 5.0);
    assert_eq!(v["cw"]["witness"]["objective"], 0.0);

    let out = sbls(&["check", &a, "--point", "1,1,0,1,1,0", "--L", "1"]);
    assert_eq!(json(&out)["flags"]["Llike"], false);

    let out = sbls(&["check", &a, "--point", "0,0,0,1,1,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));

    let out = sbls(&["check", &a, "--point", "1,1,1,1,1,0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors() {
    assert_eq!(sbls(&[]).status.code(), Some(2));
    assert_eq!(sbls(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sbls(&["repro", "paperC"]).status.code(), Some(2));
    let a = data("paper_a.json");
    assert_eq!(sbls(&["check", &a, "--point", "1,2,x"]).status.code(), Some(2));
    assert_eq!(sbls(&["check", &a, "--point", "1,1"]).status.code(), Some(2));
    assert_eq!(sbls(&["check", "/nonexistent/file.json"]).status.code(), Some(1));
}

#[test]
fn project_from_dims_and_file() {
    let out = sbls(&["project", "3,3,2,2", "--point", "0,0,0,3,-4,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["minimizers"].as_array().unwrap().len(), 3);
    assert_eq!(v["distance_sq"], 5.0);

    let out = sbls(&["project", &data("paper_a.json"), "--point", "0,0,3,3,-4,2", "--classic"]);
    assert_eq!(json(&out)["minimizers"].as_array().unwrap().len(), 2);
}

#[test]
fn gen_solve_oracle_pipeline() {
    let path = temp_path("planted.json");
    let p = path.display().to_string();
    let out = sbls(&["gen", "planted", "--l", "8", "--m", "4", "--n", "4", "--s", "2", "--t", "2", "--seed", "3", "--out", &p]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let known = sbls(&["check", &p]);
    assert_eq!(known.status.code(), Some(0));
    assert_eq!(json(&known)["objective"], 0.0);

    let solved = sbls(&["solve", &p, "--starts", "20", "--seed", "1"]);
    assert_eq!(solved.status.code(), Some(0));
    let v = json(&solved);
    assert!(v["best"]["objective"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["runs"].as_array().unwrap().len(), 40);
    let again = sbls(&["solve", &p, "--starts", "20", "--seed", "1"]);
    assert_eq!(again.stdout, solved.stdout);

    let oracle = sbls(&["oracle", &p, "--starts", "2"]);
    let v = json(&oracle);
    assert_eq!(v["certified"], true);
    assert_eq!(v["heuristic"], false);
    std::fs::remove_file(&path).ok();

    for kind in ["blind-deconv", "matrix-sensing", "random"] {
        let out = sbls(&["gen", kind, "--l", "3", "--m", "3", "--n", "4", "--s", "1", "--t", "2"]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["known_point"].is_array(), kind != "random");
    }
    assert_eq!(sbls(&["gen", "planted", "--l", "3", "--m", "3", "--n", "3", "--s", "3", "--t", "1"]).status.code(), Some(2));
}
