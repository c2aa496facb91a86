use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn khbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khbm"))
        .args(args)
        .env_remove("KHBM_BUDGET")
        .output()
        .expect("run khbm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("khbm-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn constants_json() {
    let o = khbm(&["constants", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["a_p"], 1.0);
    assert_eq!(v["result"]["b_p"], 1.0);
    for key in ["version", "seed", "budget", "slack"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn output_is_reproducible() {
    let v = temp_file("repro.csv", "1,0.5\n-0.25,2\n3,1\n");
    let args = [
        "ipf", "--vectors", v.to_str().unwrap(), "--atoms", "atoms:2,0.125;1,0.25", "--p", "3", "--norm",
        "lp:1.5:2", "--method", "mc", "--samples", "5000", "--seed", "7",
    ];
    let a = khbm(&args);
    let b = khbm(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = khbm(&[&args[..args.len() - 1], &["8"]].concat());
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn bm_planar_pair() {
    let o = khbm(&["bm", "--pair", "1", "inf", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["consistent"], true);
    assert_eq!(v["result"]["upper_bound"]["value"], 1.0);
    let csv = stdout(&khbm(&["bm", "--pair", "1", "inf", "4", "--format", "csv", "--methods", "cor1"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "method,value,witness_p,rigorous,known,upper,consistent");
    assert!(lines.next().unwrap().starts_with("cor1,"));
}

#[test]
fn violations_exit_one() {
    let e = temp_file("e12.csv", "1,0\n0,1\n");
    let o = khbm(&["hanner", "--norm", "lp:1:2", "--q", "1", "--mode", "type", "--vectors", e.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = khbm(&["hanner", "--norm", "lp:1:2", "--q", "1", "--mode", "cotype", "--vectors", e.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let one = temp_file("one.csv", "1\n");
    let base = ["verify-theorem1", "--vectors", one.to_str().unwrap(), "--atoms", "atoms:1,0.125", "--p", "1",
        "--norm", "lp:2:1", "--l2", "--side", "lower"];
    assert_eq!(khbm(&base).status.code(), Some(0));
    let o = khbm(&[&base[..], &["--paper-l2-constant"]].concat());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    let bad = temp_file("bad.csv", "1,2\n3,oops\n");
    let o = khbm(&["ipf", "--vectors", bad.to_str().unwrap(), "--atoms", "rademacher", "--p", "2", "--norm", "lp:2:2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2, column 2"), "{err}");
    let good = temp_file("good.csv", "1,2\n3,4\n");
    let o = khbm(&["ipf", "--vectors", good.to_str().unwrap(), "--atoms", "atoms:1,0.7", "--p", "2", "--norm", "lp:2:2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = khbm(&["ipf", "--vectors", good.to_str().unwrap(), "--atoms", "rademacher", "--p", "2", "--norm", "lp:2:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(khbm(&["bm", "--pair", "1", "inf"]).status.code(), Some(2));
}

#[test]
fn budget_from_environment() {
    let v = temp_file("twelve.csv", &"1\n".repeat(12));
    let args = ["ipf", "--vectors", v.to_str().unwrap(), "--atoms", "atoms:1,0.25", "--p", "2", "--norm", "lp:2:1"];
    assert_eq!(khbm(&args).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_khbm"))
        .args(args)
        .env("KHBM_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("budget"));
}

#[test]
fn lemma1_table() {
    let o = khbm(&["lemma1", "--x", "1,0,0,0", "--k", "2", "--alpha", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.5);
    assert_eq!(row[6], "true");
}
