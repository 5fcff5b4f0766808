//! Runs a directory of configs and checks each one's `expect` block.
//!
//! `expect` maps dotted paths into the output document (`result.i_min`,
//! `result.atoms.0.mass`) to either a literal, `{"min": a, "max": b}`,
//! `{"approx": x, "tol": t}` or `{"len": n}`. Numeric checks accept `"p/q"`
//! strings. A config with `"expect_error": true` passes when it is rejected.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ergolab_core::rational::{parse_q, to_f64};
use serde_json::Value;

use crate::{load_config, render, write_rendered};

pub struct SuiteReport {
    pub total: usize,
    pub passed: usize,
    pub lines: Vec<String>,
}

pub fn configs_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn run_suite(dir: &Path, out: &Path, seed: Option<u64>) -> Result<SuiteReport> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let paths = configs_in(dir)?;
    let mut report = SuiteReport { total: paths.len(), passed: 0, lines: Vec::new() };
    for path in &paths {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let (ok, detail) = match run_one(path, &out.join(format!("{name}.json")), seed) {
            Ok(r) => r,
            Err(e) => (false, format!("{e:#}")),
        };
        report.passed += ok as usize;
        report.lines.push(format!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" }));
    }
    Ok(report)
}

fn run_one(path: &Path, out: &Path, seed: Option<u64>) -> Result<(bool, String)> {
    let text = fs::read_to_string(path)?;
    let raw: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
    let expect_error = raw.get("expect_error").and_then(Value::as_bool).unwrap_or(false);
    let result = load_config(path).and_then(|cfg| render(&cfg, seed));
    match (result, expect_error) {
        (Err(e), true) => {
            let msg = format!("{} error: {e:#}\n", crate::tasks::error_kind(&e));
            fs::write(out.with_extension("error.txt"), &msg)?;
            Ok((true, format!("rejected as expected ({})", msg.trim_end())))
        }
        (Ok(_), true) => Ok((false, "expected an error, but the task succeeded".into())),
        (Err(e), false) => Err(e),
        (Ok(r), false) => {
            write_rendered(&r, out)?;
            let failures = match raw.get("expect") {
                Some(Value::Object(m)) => m
                    .iter()
                    .filter_map(|(k, want)| check(&r.document, k, want).err())
                    .collect::<Vec<_>>(),
                _ => Vec::new(),
            };
            if failures.is_empty() {
                Ok((true, r.summary))
            } else {
                Ok((false, failures.join("; ")))
            }
        }
    }
}

fn lookup<'a>(doc: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(doc, |v, seg| match v {
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        Value::Object(o) => o.get(seg),
        _ => None,
    })
}

fn numeric(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_q(s).ok().map(|q| to_f64(&q)),
        _ => None,
    }
}

/// Checks one expectation; the error names the path and what was found.
pub fn check(doc: &Value, path: &str, want: &Value) -> std::result::Result<(), String> {
    let got = lookup(doc, path).ok_or_else(|| format!("{path}: missing"))?;
    let fail = || format!("{path}: got {got}, expected {want}");
    if let Value::Object(spec) = want {
        if let Some(n) = spec.get("len") {
            let len = got.as_array().map(Vec::len);
            return (len.map(|l| l as u64) == n.as_u64()).then_some(()).ok_or_else(fail);
        }
        let x = numeric(got).ok_or_else(fail)?;
        if let Some(c) = spec.get("approx").and_then(Value::as_f64) {
            let tol = spec.get("tol").and_then(Value::as_f64).unwrap_or(1e-9);
            return ((x - c).abs() <= tol).then_some(()).ok_or_else(fail);
        }
        let lo = spec.get("min").and_then(numeric).unwrap_or(f64::NEG_INFINITY);
        let hi = spec.get("max").and_then(numeric).unwrap_or(f64::INFINITY);
        return (lo <= x && x <= hi).then_some(()).ok_or_else(fail);
    }
    if got == want {
        return Ok(());
    }
    match (numeric(got), numeric(want)) {
        (Some(a), Some(b)) if got.is_number() == want.is_number() && a == b => Ok(()),
        _ => Err(fail()),
    }
}
