use lcu_core::harness::*;
use serde_json::Value;

fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/run_report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn run_json(c: &ExperimentConfig) -> Value {
    let out = run(c).unwrap();
    serde_json::from_str(&report_json(&out.report)).unwrap()
}

fn assert_valid(v: &Value) {
    let s = schema();
    let errors: Vec<String> = s.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("lcu-harness-{}-{name}", std::process::id()))
}

#[test]
fn gsp_flags_parse() {
    let c = parse_config(Command::Gsp, &flags(&[("eps", "0.1"), ("delta", "0.05"), ("seed", "7")]), None).unwrap();
    assert_eq!(c.master_seed, 7);
    assert_eq!(c.float("eps").unwrap(), 0.1);
    assert_eq!(c.float("delta").unwrap(), 0.05);
    assert_eq!(c.text("hamiltonian").unwrap(), "0.5*II - 0.5*ZZ + 0.1*XI");
    assert!(!c.trace);
}

#[test]
fn duplicate_flags() {
    let err = parse_config(Command::Gsp, &flags(&[("eps", "0.1"), ("eps", "0.2")]), None).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(parse_config(Command::Gsp, &flags(&[("eps", "0.1"), ("eps", "0.1")]), None).is_ok());
}

#[test]
fn precedence_flags_over_file_over_defaults() {
    let file = "# run settings\neps = 0.2\ndelta=0.07\n\nkappa=4\n";
    let c = parse_config(Command::Qls, &flags(&[("eps", "0.3")]), Some(file)).unwrap();
    assert_eq!(c.float("eps").unwrap(), 0.3);
    assert_eq!(c.float("delta").unwrap(), 0.07);
    assert_eq!(c.float("kappa").unwrap(), 4.0);
    assert_eq!(c.text("observable").unwrap(), "ZI");
    let dup = parse_config(Command::Qls, &[], Some("eps=0.2\neps=0.3\n")).unwrap_err();
    assert_eq!(dup.exit_code(), 2);
}

#[test]
fn flag_spelling_with_dashes() {
    let c = parse_config(Command::Gsp, &flags(&[("--eps-g", "0.02")]), None).unwrap();
    assert_eq!(c.float("eps_g").unwrap(), 0.02);
}

#[test]
fn config_errors() {
    type Case<'a> = (Command, Vec<(String, String)>, Option<&'a str>);
    let cases: Vec<Case> = vec![
        (Command::Gsp, flags(&[("bogus", "1")]), None),
        (Command::Gsp, flags(&[("kappa", "3")]), None),
        (Command::Gsp, flags(&[("eps", "abc")]), None),
        (Command::Gsp, flags(&[("seed", "-1")]), None),
        (Command::Gsp, flags(&[("trace", "yes")]), None),
        (Command::Gsp, vec![], Some("no equals sign\n")),
        (Command::Gsp, vec![], Some("unknown=1\n")),
        (Command::Sweep, flags(&[("axis", "time"), ("values", "1")]), None),
        (Command::Sweep, flags(&[("target", "hamsim"), ("values", "1")]), None),
        (Command::Sweep, flags(&[("target", "hamsim"), ("axis", "kappa"), ("values", "1")]), None),
        (Command::Sweep, flags(&[("target", "hamsim"), ("axis", "time"), ("values", "1,x")]), None),
        (Command::Sweep, flags(&[("target", "sweep"), ("axis", "seed"), ("values", "1")]), None),
    ];
    for (cmd, f, file) in cases {
        let err = parse_config(cmd, &f, file).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{cmd} {f:?} {file:?}: {err}");
    }
}

#[test]
fn every_command_has_its_keys() {
    for cmd in Command::ALL {
        assert_eq!(cmd.name().parse::<Command>().unwrap(), cmd);
        let keys: Vec<&str> = KEYS.iter().filter(|k| k.applies_to(cmd)).map(|k| k.name).collect();
        assert!(keys.contains(&"seed") && keys.contains(&"out") && keys.contains(&"trace"));
    }
    assert!("nope".parse::<Command>().is_err());
}

#[test]
fn state_strings() {
    let s = parse_state("+0").unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let want = [h, 0.0, h, 0.0];
    for (a, b) in s.amplitudes().iter().zip(want) {
        assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
    }
    let s = parse_state("1,1,0,0").unwrap();
    assert!((s.amplitudes()[1].re - h).abs() < 1e-15);
    assert_eq!(parse_state("1").unwrap().amplitudes()[1].re, 1.0);
    assert!(parse_state("0x").is_err());
    assert!(parse_state("1,2,3").is_err());
    assert!(parse_state("").is_err());
}

#[test]
fn graph_specs() {
    assert_eq!(parse_graph("cycle:5").unwrap().n(), 5);
    assert_eq!(parse_graph("complete:4").unwrap().n(), 4);
    let p = temp_path("graph.txt");
    std::fs::write(&p, "0 1 1\n1 2 2\n2 0 1\n").unwrap();
    assert_eq!(parse_graph(&format!("file:{}", p.display())).unwrap().n(), 3);
    assert!(parse_graph("line:3").is_err());
    assert!(parse_graph("cycle").is_err());
    assert_eq!(parse_graph("file:/nonexistent/graph").unwrap_err().exit_code(), 2);
}

#[test]
fn decomposition_reports() {
    for kind in ["gaussian", "inverse", "chebyshev", "exp"] {
        let f = match kind {
            "inverse" => flags(&[("kind", kind), ("eps", "0.01"), ("kappa", "10")]),
            "chebyshev" => flags(&[("kind", kind), ("eps", "1e-6"), ("t", "50")]),
            "exp" => flags(&[("kind", kind), ("eps", "0.01"), ("t", "4")]),
            _ => flags(&[("kind", kind)]),
        };
        let c = parse_config(Command::DecompCheck, &f, None).unwrap();
        let v = run_json(&c);
        assert_valid(&v);
        let r = &v["results"];
        let err = r["scalar_sup_error"].as_f64().unwrap();
        let target = c.float("eps").unwrap();
        assert!(err <= target, "{kind}: {err} > {target}");
        if kind == "inverse" {
            assert!(r["J"].as_u64().unwrap() > 0 && r["K"].as_u64().unwrap() > 0);
        }
    }
    let bad = parse_config(Command::DecompCheck, &flags(&[("kind", "chebyshev"), ("t", "2.5")]), None).unwrap();
    assert_eq!(run(&bad).unwrap_err().exit_code(), 2);
}

#[test]
fn identical_seed_gives_identical_results() {
    let f = flags(&[("seed", "11"), ("repetitions", "3000"), ("mode", "shot")]);
    let c = parse_config(Command::Hamsim, &f, None).unwrap();
    let a = run_json(&c);
    let b = run_json(&c);
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["config"], b["config"]);
    let other = parse_config(Command::Hamsim, &flags(&[("seed", "12"), ("repetitions", "3000"), ("mode", "shot")]), None).unwrap();
    assert_ne!(run_json(&other)["results"]["mu"], a["results"]["mu"]);
}

#[test]
fn estimator_reports_validate() {
    for (cmd, extra) in [
        (Command::Hamsim, vec![("repetitions", "2000")]),
        (Command::Gsp, vec![("repetitions", "2000")]),
        (Command::Gsp, vec![("repetitions", "2000"), ("perturbation", "bound")]),
        (Command::Qls, vec![("repetitions", "400000")]),
    ] {
        let c = parse_config(cmd, &flags(&extra), None).unwrap();
        let v = run_json(&c);
        assert_valid(&v);
        assert_eq!(v["command"], cmd.name());
        assert_eq!(v["config"]["seed"], 0);
        assert!(v["results"]["oracle"]["exact"].is_number());
    }
}

#[test]
fn analog_reports_validate() {
    let c = parse_config(Command::AnalogGsp, &[], None).unwrap();
    let v = run_json(&c);
    assert_valid(&v);
    let r = &v["results"];
    assert!(r["fidelity_or_error"].as_f64().unwrap() <= 0.01 + 1e-10);
    assert!(r["success_relative_error"].as_f64().unwrap() <= 0.1);
    let c = parse_config(Command::AnalogQls, &[], None).unwrap();
    let v = run_json(&c);
    assert_valid(&v);
    let r = &v["results"];
    assert!(r["fidelity_or_error"].as_f64().unwrap() <= r["error_bound"].as_f64().unwrap());
    let c = parse_config(Command::AnalogQls, &flags(&[("ancilla", "gaussian"), ("hamiltonian", "0.55*I + 0.45*Z"), ("kappa", "10"), ("state", "+"), ("eps", "0.1")]), None).unwrap();
    let v = run_json(&c);
    assert_valid(&v);
    let indefinite = parse_config(Command::AnalogQls, &flags(&[("ancilla", "gaussian")]), None).unwrap();
    assert_eq!(run(&indefinite).unwrap_err().exit_code(), 3);
    let unknown = parse_config(Command::AnalogQls, &flags(&[("ancilla", "square")]), None).unwrap();
    assert_eq!(run(&unknown).unwrap_err().exit_code(), 2);
}

#[test]
fn walks_report_validates() {
    let c = parse_config(Command::WalksSearch, &flags(&[("graph", "cycle:8"), ("trials", "400"), ("algo", "2"), ("seed", "3")]), None).unwrap();
    let v = run_json(&c);
    assert_valid(&v);
    let r = &v["results"];
    let z = r["z_score"].as_f64().unwrap();
    assert!(z.abs() <= 3.0, "{z}");
    assert!(r["theorem1_slack"].as_f64().unwrap() >= 0.0);
    assert!((r["HT"].as_f64().unwrap() - 24.0).abs() < 1e-9);
    let none = parse_config(Command::WalksSearch, &flags(&[("marked", "")]), None).unwrap();
    assert_eq!(run(&none).unwrap_err().exit_code(), 3);
    let bad_algo = parse_config(Command::WalksSearch, &flags(&[("algo", "3")]), None).unwrap();
    assert_eq!(run(&bad_algo).unwrap_err().exit_code(), 2);
}

#[test]
fn hamsim_time_sweep_has_monotone_tau_max() {
    let c = parse_config(
        Command::Sweep,
        &flags(&[("target", "hamsim"), ("axis", "time"), ("values", "0.25,0.5,1,2"), ("repetitions", "500"), ("seed", "9")]),
        None,
    )
    .unwrap();
    let rows = sweep(&c).unwrap();
    assert_eq!(rows.len(), 4);
    let tau: Vec<f64> = rows.iter().map(|r| r.metrics["tau_max"]).collect();
    assert!(tau.windows(2).all(|w| w[1] >= w[0]), "{tau:?}");
    let seeds: std::collections::BTreeSet<u64> = rows.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 4);
    assert_eq!(rows[0].seed, lcu_core::rng::counter_hash(9, EXPERIMENT_SWEEP, 0));
    let csv = sweep_csv(&c, &rows);
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 5);
    assert!(data[0].starts_with("time,seed,"));
    assert!(csv.contains("# target=hamsim"));
    let v = run_json(&c);
    assert_valid(&v);
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn halving_eps_quadruples_required_samples() {
    let c = parse_config(
        Command::Sweep,
        &flags(&[("target", "gsp"), ("axis", "eps"), ("values", "0.2,0.1,0.05"), ("repetitions", "200")]),
        None,
    )
    .unwrap();
    let rows = sweep(&c).unwrap();
    let counts: Vec<f64> = rows.iter().map(|r| r.metrics["details.t_theorem_mu"]).collect();
    let l1: Vec<f64> = rows.iter().map(|r| r.metrics["l1_norm"]).collect();
    for k in 0..2 {
        // T ∝ ‖c‖₁⁴/ε²: divide out the change of ‖c‖₁ with ε.
        let ratio = counts[k + 1] / counts[k] * (l1[k] / l1[k + 1]).powi(4);
        assert!((ratio - 4.0).abs() < 1e-3 * 4.0, "{counts:?} {l1:?}");
    }
}

#[test]
fn outputs_and_trace_files() {
    let out = temp_path("report.json");
    let c = parse_config(
        Command::Hamsim,
        &flags(&[("repetitions", "50"), ("trace", "true"), ("out", out.to_str().unwrap())]),
        None,
    )
    .unwrap();
    let o = run(&c).unwrap();
    assert_eq!(write_outputs(&c, &o).unwrap(), None);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_valid(&v);
    let trace = std::fs::read_to_string(format!("{}.trace.csv", out.display())).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "index,term1,term2,value,cost");
    assert_eq!(lines.len(), 51);
    let value = lines[1].split(',').nth(3).unwrap();
    assert!(value.contains('e') && value.split('e').next().unwrap().len() >= 18);
    let no_out = parse_config(Command::Hamsim, &flags(&[("repetitions", "50"), ("trace", "true")]), None).unwrap();
    let o = run(&no_out).unwrap();
    assert_eq!(write_outputs(&no_out, &o).unwrap_err().exit_code(), 2);
    let stdout = parse_config(Command::DecompCheck, &[], None).unwrap();
    let body = write_outputs(&stdout, &run(&stdout).unwrap()).unwrap().unwrap();
    assert!(body.starts_with('{'));
}

#[test]
fn json_floats_round_trip() {
    let c = parse_config(Command::DecompCheck, &flags(&[("kind", "gaussian"), ("t", "2")]), None).unwrap();
    let o = run(&c).unwrap();
    let text = report_json(&o.report);
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["results"], o.report.results);
}
