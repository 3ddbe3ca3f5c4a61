use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn qmst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({}): {}\nstderr: {}",
            e,
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TRIANGLE: &str =
    r#"{"graph":{"num_vertices":3,"edges":[[0,1],[1,2],[0,2]]},"q":[[1,2,3],[2,3,4],[3,4,5]],"conflicts":[],"kind":"QMST"}"#;

#[test]
fn generate_sizes() {
    let out = qmst(&["generate", "--family", "kn-ladder", "--k", "5", "--n", "7"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["graph"]["edges"].as_array().unwrap().len(), 29);
    let fan = qmst(&["generate", "--family", "fan", "--n", "6"]);
    assert_eq!(json(&fan)["graph"]["edges"].as_array().unwrap().len(), 11);
    assert_eq!(code(&qmst(&["generate", "--family", "kn-ladder", "--k", "3", "--n", "3"])), 1);
}

#[test]
fn graded_costs_are_recognised() {
    let dir = TempDir::new().unwrap();
    let inst = p(&dir, "g.json");
    let gen = qmst(&[
        "generate", "--family", "random", "--n", "6", "--m", "10", "--costs", "graded", "--seed", "4", "--out",
        s(&inst),
    ]);
    assert_eq!(code(&gen), 0);
    let bound = json(&qmst(&["bound", s(&inst)]));
    assert_eq!(bound["graded"], "doubly_graded");
    let graded = json(&qmst(&["solve", s(&inst)]));
    let exact = json(&qmst(&["solve", s(&inst), "--method", "enum"]));
    assert_eq!(graded["method"], "graded");
    assert_eq!(graded["value"], exact["value"]);
    assert_eq!(graded["value"], bound["lower_bound"]);
}

#[test]
fn triangle_and_verify() {
    let dir = TempDir::new().unwrap();
    let inst = p(&dir, "t.json");
    std::fs::write(&inst, TRIANGLE).unwrap();
    let res = p(&dir, "r.json");
    let out = qmst(&["solve", s(&inst), "--method", "enum", "--out", s(&res)]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    assert_eq!(r["value"], 8);
    assert_eq!(r["tree"], serde_json::json!([0, 1]));
    assert_eq!(code(&qmst(&["verify", s(&inst), s(&res)])), 0);

    let mut bad_tree = r.clone();
    bad_tree["tree"] = serde_json::json!([0, 2]);
    let bt = p(&dir, "bt.json");
    std::fs::write(&bt, bad_tree.to_string()).unwrap();
    let v = qmst(&["verify", s(&inst), s(&bt)]);
    assert_eq!((code(&v), json(&v)["valid"].clone()), (1, Value::Bool(false)));

    let mut bad_value = r.clone();
    bad_value["value"] = serde_json::json!(7);
    let bv = p(&dir, "bv.json");
    std::fs::write(&bv, bad_value.to_string()).unwrap();
    assert_eq!(code(&qmst(&["verify", s(&inst), s(&bv)])), 1);
}

#[test]
fn ladder_dp_matches_enum_and_verifies() {
    let dir = TempDir::new().unwrap();
    let inst = p(&dir, "l.json");
    let gen = qmst(&[
        "generate", "--family", "kn-ladder", "--k", "4", "--n", "3", "--costs", "adjacent-random", "--lo", "-5",
        "--hi", "9", "--conflicts", "0.2", "--kind", "AQMST", "--seed", "11", "--out", s(&inst),
    ]);
    assert_eq!(code(&gen), 0);
    assert!(p(&dir, "l.structure.json").exists());
    for kind in ["AQMST", "AQBST", "MSTAC", "BSTAC", "FSTAC"] {
        let res = p(&dir, &format!("{}.json", kind));
        let dp = qmst(&["solve", s(&inst), "--kind", kind, "--method", "ladder-dp", "--out", s(&res)]);
        let ex = json(&qmst(&["solve", s(&inst), "--kind", kind, "--method", "enum"]));
        let dpv: Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
        assert_eq!((dpv["status"].clone(), dpv["value"].clone()), (ex["status"].clone(), ex["value"].clone()), "{}", kind);
        let auto = json(&qmst(&["solve", s(&inst), "--kind", kind]));
        assert_eq!(auto["method"], "ladder-dp");
        assert_eq!(code(&dp), if dpv["status"] == "optimal" { 0 } else { 2 });
        if dpv["status"] == "optimal" {
            assert_eq!(code(&qmst(&["verify", s(&inst), s(&res)])), 0, "{}", kind);
        }
    }
}

#[test]
fn seeded_output_is_byte_identical() {
    let args = [
        "generate", "--family", "kn-ladder", "--k", "6", "--n", "5", "--free-edges", "seeded", "--costs", "random",
        "--conflicts", "0.3", "--conflict-scope", "any", "--seed", "42",
    ];
    let a = qmst(&args);
    let b = qmst(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "43";
    assert_ne!(a.stdout, qmst(&other).stdout);
}

#[test]
fn counting_commands() {
    let rec = json(&qmst(&["count", "--method", "recursion", "--k", "3", "--n", "3"]));
    assert_eq!(rec["count"], "21");
    let closed = json(&qmst(&["count", "--method", "closed-form", "--k", "4", "--n", "2"]));
    assert_eq!(closed["count"], "15");
    let dir = TempDir::new().unwrap();
    let inst = p(&dir, "w.json");
    qmst(&["generate", "--family", "wheel", "--n", "3", "--out", s(&inst)]);
    for method in ["matrix-tree", "deletion-contraction"] {
        assert_eq!(json(&qmst(&["count", s(&inst), "--method", method]))["count"], "16");
    }
}

#[test]
fn reductions_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cnf = p(&dir, "u.cnf");
    let mut text = String::from("c all sign patterns\np cnf 3 8\n");
    for mask in 0..8 {
        let lits: Vec<String> = (0..3)
            .map(|v| if mask >> v & 1 == 1 { format!("{}", v + 1) } else { format!("-{}", v + 1) })
            .collect();
        text += &format!("{} 0\n", lits.join(" "));
    }
    std::fs::write(&cnf, text).unwrap();
    for to in ["fanstar", "ladder"] {
        let inst = p(&dir, &format!("{}.json", to));
        assert_eq!(code(&qmst(&["reduce", s(&cnf), "--to", to, "--out", s(&inst)])), 0);
        assert!(p(&dir, &format!("{}.reduction.json", to)).exists());
        let out = qmst(&["solve", s(&inst)]);
        assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["status"], "infeasible");
        assert_eq!(code(&qmst(&["solve", s(&inst), "--method", "enum"])), 3);
    }
    let sat = p(&dir, "s.cnf");
    std::fs::write(&sat, "p cnf 3 2\n1 2 3 0\n-1 2 3 0\n").unwrap();
    let inst = p(&dir, "s.json");
    qmst(&["reduce", s(&sat), "--out", s(&inst)]);
    let res = p(&dir, "sr.json");
    assert_eq!(code(&qmst(&["solve", s(&inst), "--out", s(&res)])), 0);
    assert_eq!(code(&qmst(&["verify", s(&inst), s(&res)])), 0);

    assert_eq!(code(&qmst(&["solve"])), 1);
    assert_eq!(code(&qmst(&["solve", "/nonexistent/instance.json"])), 1);
    assert_eq!(code(&qmst(&["--help"])), 0);
}

#[test]
fn manifest_records_inputs() {
    let dir = TempDir::new().unwrap();
    let inst = p(&dir, "t.json");
    std::fs::write(&inst, TRIANGLE).unwrap();
    let man = p(&dir, "m.json");
    assert_eq!(code(&qmst(&["solve", s(&inst), "--manifest", s(&man)])), 0);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&man).unwrap()).unwrap();
    assert_eq!(m["command"], "solve");
    assert_eq!(m["rng"], "ChaCha8");
    assert_eq!(m["exit_code"], 0);
    let hash = m["input_hashes"][s(&inst)].as_str().unwrap();
    let expected = hex::encode(Sha256::digest(TRIANGLE.as_bytes()));
    assert_eq!(hash, expected);
}

#[test]
fn bench_reports_linear_counts() {
    let out = qmst(&["bench", "--k", "4", "--n", "2000"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let ratio = r["recurrence_ratio"].as_f64().unwrap();
    assert!((1.9..=2.1).contains(&ratio));
    assert_eq!(r["runs"][0]["recurrence_applications"], 7 * 1999);
}
