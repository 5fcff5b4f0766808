//! `ergolab` batch front end.
//!
//! One JSON config describes one task. Outputs are a stable-key-ordered JSON
//! report and, for sequence-valued tasks, a CSV table next to it. Given the same
//! config and seed the bytes written are identical.

pub mod config;
pub mod suite;
pub mod tasks;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::{json, Value};

pub use config::{Config, ConfigError};
pub use tasks::{Output, Table};

#[derive(Debug, Parser)]
#[command(name = "ergolab", version, about = "Exact computations for measure-preserving dynamics")]
pub struct Args {
    /// Task config (JSON).
    #[arg(long, conflicts_with = "suite")]
    pub config: Option<PathBuf>,
    /// Directory of configs to run in name order; `--out` is then a directory.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON output path; a CSV table, if any, goes next to it. Defaults to the
    /// config's `out`, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A finished task: the JSON document and optional CSV, already rendered.
pub struct Rendered {
    pub summary: String,
    pub json: String,
    pub csv: Option<String>,
    pub document: Value,
}

pub fn render(cfg: &Config, seed_override: Option<u64>) -> Result<Rendered> {
    let seed = match seed_override {
        Some(s) => s,
        None => cfg.seed()?,
    };
    let task = cfg.task()?;
    let out = tasks::run_task(cfg, seed)?;
    let document = json!({
        "task": task,
        "seed": seed,
        "summary": out.summary,
        "result": out.result,
    });
    // serde_json's map is ordered by key, so this is stable.
    let mut json = serde_json::to_string_pretty(&document)?;
    json.push('\n');
    let csv = out.table.as_ref().map(table_csv).transpose()?;
    Ok(Rendered { summary: out.summary, json, csv, document })
}

pub fn table_csv(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes `<path>` and, for tables, `<path>` with a `.csv` extension.
pub fn write_rendered(r: &Rendered, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, &r.json).with_context(|| format!("writing {}", path.display()))?;
    if let Some(csv) = &r.csv {
        let p = path.with_extension("csv");
        fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Config::parse(&text)?)
}

/// Runs the command line; returns the process exit code.
pub fn run(args: Args) -> Result<i32> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    if let Some(dir) = &args.suite {
        let out = args.out.clone().unwrap_or_else(|| PathBuf::from("suite-out"));
        let report = suite::run_suite(dir, &out, args.seed)?;
        for line in &report.lines {
            println!("{line}");
        }
        println!("{} of {} configs passed", report.passed, report.total);
        return Ok(if report.passed == report.total { 0 } else { 1 });
    }
    let Some(path) = &args.config else {
        anyhow::bail!("give --config PATH or --suite DIR");
    };
    let cfg = load_config(path)?;
    let rendered = render(&cfg, args.seed)?;
    let out = match &args.out {
        Some(p) => Some(p.clone()),
        None => cfg.opt_string("out")?.map(PathBuf::from),
    };
    match out {
        Some(p) => {
            write_rendered(&rendered, &p)?;
            println!("{}", rendered.summary);
        }
        None => {
            print!("{}", rendered.json);
            eprintln!("{}", rendered.summary);
        }
    }
    Ok(0)
}
