use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ergolab_cli::suite::check;
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ergolab")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

#[test]
fn roth_config_to_stdout() {
    let out = run(&["--config", example("roth_golden.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["task"], "roth");
    assert_eq!(doc["result"]["i_min"], 13);
    assert_eq!(doc["result"]["witness"]["lo"], "307/9870");
    assert!(String::from_utf8_lossy(&out.stderr).contains("i = 13"));
}

#[test]
fn stage_height_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/stage.json");
    let out = run(&["--config", example("stage_katok.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["result"]["h"], 87);
    assert_eq!(doc["result"]["total"], "29/16");
}

#[test]
fn zero_denominator_names_field_and_line() {
    let out = run(&["--config", example("invalid_zero_denominator.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("validation error"), "{err}");
    assert!(err.contains("line 5"), "{err}");
    assert!(err.contains("`angle`"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_task_and_unknown_field_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad_task = write_config(dir.path(), "t.json", &json!({"task": "nonsense", "system": {"kind": "bernoulli"}}));
    let out = run(&["--config", bad_task.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`task`"));

    let extra = write_config(
        dir.path(),
        "u.json",
        &json!({"task": "roth", "system": {"kind": "bernoulli"}, "A": "{0:1}", "i_max": 3, "colour": "red"}),
    );
    let out = run(&["--config", extra.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn missing_config_is_an_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_table_next_to_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corr.json");
    let out = run(&["--config", example("correlate_golden_arcs.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("corr.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,lo,hi,lo_f64,hi_f64"));
    assert_eq!(lines.next(), Some("0,1/2,1/2,0.5,0.5"));
    assert_eq!(csv.lines().count(), 1 + 41);
}

#[test]
fn seeded_output_is_byte_identical_and_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("poisson_pmf_half.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    for (p, threads) in [(&a, "1"), (&b, "4")] {
        let out = run(&["--config", cfg.to_str().unwrap(), "--seed", "77", "--threads", threads, "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let doc: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(doc["seed"], 77);

    let out = run(&["--config", cfg.to_str().unwrap(), "--seed", "78", "--out", c.to_str().unwrap()]);
    assert!(out.status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn suite_reports_failures_with_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    fs::copy(example("stage_katok.json"), configs.join("a.json")).unwrap();
    write_config(&configs, "b.json", &json!({"task": "stage", "preset": "katok", "j": 4, "expect": {"result.h": 88}}));
    let out = run(&["--suite", configs.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("ok   a:"), "{text}");
    assert!(text.contains("FAIL b: result.h: got 87, expected 88"), "{text}");
    assert!(text.ends_with("1 of 2 configs passed\n"));
    assert!(dir.path().join("out/a.json").exists());
}

#[test]
fn check_expectation_forms() {
    let doc = json!({"result": {"q": "1/4", "n": 3, "xs": [1.5, 2.0], "flag": true}});
    assert!(check(&doc, "result.n", &json!(3)).is_ok());
    assert!(check(&doc, "result.q", &json!("1/4")).is_ok());
    assert!(check(&doc, "result.q", &json!("2/8")).is_ok());
    assert!(check(&doc, "result.q", &json!(0.25)).is_err());
    assert!(check(&doc, "result.q", &json!({"min": "1/5", "max": 0.3})).is_ok());
    assert!(check(&doc, "result.q", &json!({"max": "1/5"})).is_err());
    assert!(check(&doc, "result.xs.1", &json!({"approx": 2.05, "tol": 0.1})).is_ok());
    assert!(check(&doc, "result.xs", &json!({"len": 2})).is_ok());
    assert!(check(&doc, "result.xs", &json!({"len": 3})).is_err());
    assert!(check(&doc, "result.flag", &json!(true)).is_ok());
    assert_eq!(check(&doc, "result.missing", &json!(1)), Err("result.missing: missing".into()));
    assert!(check(&doc, "result.xs.5", &json!(1)).is_err());
}
