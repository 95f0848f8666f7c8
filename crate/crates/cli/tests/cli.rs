use std::process::{Command, Output};

fn lcu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcu")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("lcu-cli-{}-{name}", std::process::id()))
}

#[test]
fn walks_search_emits_the_documented_fields() {
    let v = json(&lcu(&["walks-search", "--graph", "cycle:8", "--marked", "0", "--algo", "1", "--trials", "300", "--seed", "5"]));
    for k in ["HT", "T", "empirical_success", "oracle_success", "theorem1_slack"] {
        assert!(v["results"][k].is_number(), "{k}");
    }
    assert_eq!(v["config"]["trials"], 300);
}

#[test]
fn global_flags_work_on_either_side() {
    let a = json(&lcu(&["--seed", "4", "decomp-check", "--kind", "exp", "--t", "3"]));
    let b = json(&lcu(&["decomp-check", "--kind", "exp", "--t", "3", "--seed", "4"]));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["config"]["seed"], 4);
}

#[test]
fn config_file_and_flag_precedence() {
    let file = temp("run.cfg");
    std::fs::write(&file, "# decomposition\nkind = inverse\neps = 0.05\nkappa = 4\n").unwrap();
    let v = json(&lcu(&["decomp-check", "--config", file.to_str().unwrap(), "--eps", "0.02"]));
    assert_eq!(v["config"]["eps"], 0.02);
    assert_eq!(v["config"]["kappa"], 4.0);
    assert_eq!(v["results"]["kind"], "inverse");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| lcu(args).status.code().unwrap();
    assert_eq!(code(&["decomp-check", "--kind", "gaussian", "--t", "2"]), 0);
    assert_eq!(code(&["gsp", "--eps", "0.1", "--eps", "0.2"]), 2);
    assert_eq!(code(&["gsp", "--eps", "zero"]), 2);
    assert_eq!(code(&["gsp", "--bogus", "1"]), 2);
    assert_eq!(code(&["walks-search", "--eps", "0.1"]), 2);
    assert_eq!(code(&["gsp", "--config", "/nonexistent/file.cfg"]), 2);
    assert_eq!(code(&["walks-search", "--marked", ""]), 3);
    assert_eq!(code(&["hamsim", "--time", "-1"]), 3);
    assert_eq!(code(&["analog-qls", "--ancilla", "gaussian"]), 3);
    assert_eq!(code(&["analog-gsp", "--gap", "0.001"]), 4);
}

#[test]
fn sweep_writes_csv_and_trace_needs_out() {
    let out = lcu(&["sweep", "--target", "decomp-check", "--axis", "t", "--values", "2,8,32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("t,seed,"));
    assert_eq!(lcu(&["hamsim", "--repetitions", "20", "--trace"]).status.code(), Some(2));
    let path = temp("hamsim.json");
    let ok = lcu(&["hamsim", "--repetitions", "20", "--trace", "--out", path.to_str().unwrap()]);
    assert!(ok.status.success());
    assert!(ok.stdout.is_empty());
    let trace = std::fs::read_to_string(format!("{}.trace.csv", path.display())).unwrap();
    assert_eq!(trace.lines().count(), 21);
}

#[test]
fn identical_invocations_give_identical_results() {
    let args = ["qls", "--repetitions", "20000", "--seed", "3", "--mode", "shot"];
    assert_eq!(json(&lcu(&args))["results"], json(&lcu(&args))["results"]);
}
