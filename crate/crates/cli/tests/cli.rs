use std::path::PathBuf;
use std::process::{Command, Output};

fn sfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfree")).args(args).output().expect("run sfree")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sfree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&sfree(&["--help"])), 0);
    assert_eq!(code(&sfree(&["no-such-command"])), 1);
    assert_eq!(code(&sfree(&["gen-module", "--p", "4", "--n", "1"])), 1);
    assert_eq!(code(&sfree(&["gen-module", "--n", "0"])), 1);
}

#[test]
fn builtin_squares_pass() {
    for which in ["a", "B"] {
        let o = sfree(&["check-square", "--which", which, "--p", "3", "--samples", "30"]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
    }
    let o = sfree(&["check-square", "--which", "sigma", "--group", "2,2", "--subgroup", "1,0", "--samples", "30"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn corrupted_square_is_rejected() {
    let o = sfree(&["--format", "json", "describe-square", "--which", "a", "--p", "2"]);
    assert_eq!(code(&o), 0);
    let mut d: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let good = scratch("good-square.json");
    std::fs::write(&good, d.to_string()).unwrap();
    assert_eq!(code(&sfree(&["check-square", "--square", good.to_str().unwrap(), "--samples", "20"])), 0);

    d["psi_minus"] = serde_json::json!(["1"]);
    let bad = scratch("bad-square.json");
    std::fs::write(&bad, d.to_string()).unwrap();
    assert_eq!(code(&sfree(&["check-square", "--square", bad.to_str().unwrap(), "--samples", "20"])), 2);
}

#[test]
fn gen_module_text() {
    let o = sfree(&["gen-module", "--p", "3", "--n", "2"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("T_0 = 1"), "{s}");
    assert!(s.contains("T_1 = t - s^2*t*s^-2"), "{s}");
}

#[test]
fn certify_json() {
    let o = sfree(&["--format", "json", "certify", "--p", "2", "--n", "1", "--n2", "3", "--len-bound", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["verdict"], "distinct");
    assert_eq!(v["agree"], true);
    let o = sfree(&["--format", "json", "certify", "--p", "3", "--n", "2", "--n2", "2", "--len-bound", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["verdict"], "equivalent");
}

#[test]
fn certificate_round_trip_and_tamper() {
    let path = scratch("cert.json");
    let o = sfree(&["--out", path.to_str().unwrap(), "trivialize", "--p", "3", "--n", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&sfree(&["verify-certificate", path.to_str().unwrap()])), 0);

    let mut c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    c["factors"][0]["a"] = serde_json::json!("1 + x*t");
    let bad = scratch("cert-bad.json");
    std::fs::write(&bad, c.to_string()).unwrap();
    assert_eq!(code(&sfree(&["verify-certificate", bad.to_str().unwrap()])), 2);

    let junk = scratch("junk.json");
    std::fs::write(&junk, "{not json").unwrap();
    assert_eq!(code(&sfree(&["verify-certificate", junk.to_str().unwrap()])), 2);
    assert_eq!(code(&sfree(&["verify-certificate", "/nonexistent/cert.json"])), 1);
}

#[test]
fn family_matrix() {
    let o = sfree(&["family", "--p", "2", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("delta_3 = 1 + (1+x)*(t + s^3*t*s^-3)"), "{s}");
    assert!(s.contains("  = D D\n  D = D\n  D D =\n"), "{s}");
}

#[test]
fn unit_search_negative_control() {
    let o = sfree(&["--format", "json", "unit-search", "--ring", "fpcp", "--p", "2", "--m", "0", "--support-bound", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["units"], serde_json::json!(["1", "x"]));
}
