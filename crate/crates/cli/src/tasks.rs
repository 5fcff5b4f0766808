//! Task dispatch: one config, one computation, one JSON report (plus a CSV
//! table for tasks that produce sequences).

use anyhow::{Context, Result};
use ergolab_core::koopman::{
    cesaro_diagnostics, correlation_series, fit_weak_limit, halmos_distance, test_pair_family, weak_distance, BasisTerm,
    OperatorModel,
};
use ergolab_core::pentropy::{dyadic_partitions, pentropy_profile, ModelPartition, ProgressionFamily};
use ergolab_core::poisson::{count_distribution, independence_check, sample_configs, suspension_pentropy, PoissonWindow};
use ergolab_core::rank_one::{LevelSet, RankOne};
use ergolab_core::rational::{fmt_q, to_f64, Bounds, Q};
use ergolab_core::recurrence::{birkhoff_average, cocycle_first_zero, multirec_average, roth_min_i, vn_norm};
use ergolab_core::sets::{Ambient, MeasSet, Partition, RationalIntervalSet};
use ergolab_core::spectral::{autocovariance, eigen_scan, fejer_density, toeplitz_min_eig, FunctionSpec, DEFAULT_GRID};
use ergolab_core::systems::System;
use ergolab_core::{Model, ModelSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;

pub const TASKS: &[&str] = &[
    "stage",
    "correlate",
    "cesaro",
    "fit-limit",
    "metric",
    "spectrum",
    "atoms",
    "entropy",
    "recur",
    "roth",
    "cocycle",
    "poisson-pmf",
    "poisson-indep",
    "poisson-entropy",
    "birkhoff",
    "vonneumann",
];

/// A rectangular table written as CSV.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Output {
    pub summary: String,
    pub result: Value,
    pub table: Option<Table>,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).context("serializing result")
}

fn bounds_cells(b: &Bounds) -> Vec<String> {
    vec![fmt_q(&b.lo), fmt_q(&b.hi), format!("{}", to_f64(&b.lo)), format!("{}", to_f64(&b.hi))]
}

pub fn run_task(cfg: &Config, seed: u64) -> Result<Output> {
    let task = cfg.task()?;
    let out = match task.as_str() {
        "stage" => stage(cfg),
        "correlate" => correlate(cfg),
        "cesaro" => cesaro(cfg),
        "fit-limit" => fit_limit(cfg, seed),
        "metric" => metric(cfg),
        "spectrum" => spectrum(cfg),
        "atoms" => atoms(cfg),
        "entropy" => entropy(cfg),
        "recur" => recur(cfg),
        "roth" => roth(cfg),
        "cocycle" => cocycle(cfg, seed),
        "poisson-pmf" => poisson_pmf(cfg, seed),
        "poisson-indep" => poisson_indep(cfg, seed),
        "poisson-entropy" => poisson_entropy(cfg, seed),
        "birkhoff" => birkhoff(cfg, seed),
        "vonneumann" => vonneumann(cfg),
        other => return Err(cfg.error("task", format!("unknown task {other:?}; expected one of {}", TASKS.join(", "))).into()),
    }?;
    cfg.check_unused()?;
    Ok(out)
}

fn set(cfg: &Config, model: &Model, key: &str) -> Result<ModelSet> {
    let text = cfg.set_text(key, cfg.require(key)?)?;
    model.parse_set(&text).map_err(|e| cfg.error(key, e.to_string()).into())
}

fn set_list(cfg: &Config, model: &Model, key: &str) -> Result<Vec<ModelSet>> {
    let v = cfg.require(key)?;
    let arr = v.as_array().ok_or_else(|| cfg.error(key, "expected a list of sets"))?;
    arr.iter()
        .map(|x| {
            let text = cfg.set_text(key, x)?;
            model.parse_set(&text).map_err(|e| cfg.error(key, e.to_string()).into())
        })
        .collect()
}

fn system(cfg: &Config, model: &Model) -> Result<System> {
    match model {
        Model::System(s) => Ok(s.clone()),
        Model::RankOne(_) => Err(cfg.error("system", "this task needs one of the exact systems").into()),
    }
}

fn rank_one(cfg: &Config, model: &Model) -> Result<RankOne> {
    match model {
        Model::RankOne(r) => Ok(r.clone()),
        Model::System(_) => Err(cfg.error("preset", "this task needs a rank-one construction").into()),
    }
}

fn tol(cfg: &Config) -> Result<Option<Q>> {
    Ok(cfg.opt_rational("tol")?)
}

/// `f`: a set (indicator) or `{"terms": [[coef, set], ...], "center": bool}`.
fn function(cfg: &Config, model: &Model) -> Result<FunctionSpec> {
    let key = "f";
    let v = cfg.require(key)?;
    let center_default = cfg.bool_or("center", false)?;
    match v {
        Value::String(_) => {
            let text = cfg.set_text(key, v)?;
            let s = model.parse_set(&text).map_err(|e| cfg.error(key, e.to_string()))?;
            Ok(FunctionSpec::indicator(s, center_default))
        }
        Value::Object(o) => {
            let terms = o.get("terms").and_then(Value::as_array).ok_or_else(|| cfg.error(key, "expected `terms`"))?;
            let mut out = Vec::with_capacity(terms.len());
            for t in terms {
                let pair = t.as_array().filter(|p| p.len() == 2).ok_or_else(|| cfg.error(key, "each term is [coef, set]"))?;
                let c = cfg.rational_value(key, &pair[0])?;
                let text = cfg.set_text(key, &pair[1])?;
                let s = model.parse_set(&text).map_err(|e| cfg.error(key, e.to_string()))?;
                out.push((c, s));
            }
            let center = match o.get("center") {
                Some(b) => b.as_bool().ok_or_else(|| cfg.error(key, "`center` must be a boolean"))?,
                None => center_default,
            };
            Ok(FunctionSpec { terms: out, center })
        }
        _ => Err(cfg.error(key, "expected a set or an object with `terms`").into()),
    }
}

fn stage(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let eng = rank_one(cfg, &model)?;
    let j = cfg.positive("j")?;
    let s = eng.build_stage(j).map_err(|e| cfg.error("j", e.to_string()))?;
    let mut result = to_value(&s)?;
    if let Ok(m) = eng.total_measure() {
        result["total_measure"] = to_value(&m)?;
    }
    Ok(Output {
        summary: format!("{} stage {j}: h = {}, m_j = {}", eng.spec().name(), s.h, fmt_q(&s.total)),
        result,
        table: None,
    })
}

fn n_range(cfg: &Config) -> Result<(i64, i64)> {
    let list = cfg.int_list("n")?;
    match list.as_slice() {
        [a, b] if a <= b => Ok((*a, *b)),
        _ => Err(cfg.error("n", "expected [n_min, n_max] with n_min ≤ n_max").into()),
    }
}

fn correlate(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let (a, b) = (set(cfg, &model, "A")?, set(cfg, &model, "B")?);
    let (lo, hi) = n_range(cfg)?;
    let tol = tol(cfg)?;
    let series = correlation_series(&model, &a, &b, lo..=hi, tol.as_ref())?;
    let mut table = Table::new(&["n", "lo", "hi", "lo_f64", "hi_f64"]);
    for (n, v) in series.ns.iter().zip(&series.values) {
        let mut row = vec![n.to_string()];
        row.extend(bounds_cells(v));
        table.push(row);
    }
    let mut result = to_value(&series)?;
    result.as_object_mut().unwrap().remove("values");
    result.as_object_mut().unwrap().remove("ns");
    result["n_min"] = json!(lo);
    result["n_max"] = json!(hi);
    Ok(Output {
        summary: format!("{}: {} correlations for n in {lo}..={hi} (exact: {})", model.name(), series.ns.len(), series.exact),
        result,
        table: Some(table),
    })
}

fn cesaro(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let (a, b) = (set(cfg, &model, "A")?, set(cfg, &model, "B")?);
    let big_n = cfg.positive("N")?;
    let target = cfg.opt_rational("target")?.map(Bounds::exact);
    let tol = tol(cfg)?;
    let series = correlation_series(&model, &a, &b, 1..=big_n as i64, tol.as_ref())?;
    let c = cesaro_diagnostics(&series, big_n, target)?;
    let mut table = Table::new(&["N", "avg_lo", "avg_hi", "avg_lo_f64", "avg_hi_f64", "absdev_lo", "absdev_hi", "absdev_lo_f64", "absdev_hi_f64"]);
    for (i, (av, ad)) in c.avg.iter().zip(&c.absdev).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(bounds_cells(av));
        row.extend(bounds_cells(ad));
        table.push(row);
    }
    let gap = c.last_avg().abs_dev(&c.target.mid());
    let result = json!({
        "A": series.a,
        "B": series.b,
        "N": big_n,
        "target": to_value(&c.target)?,
        "avg": to_value(c.last_avg())?,
        "absdev": to_value(c.last_absdev())?,
        "gap": to_value(&gap)?,
    });
    Ok(Output {
        summary: format!("{}: Cesàro average at N = {big_n} is {}, target {}", model.name(), c.last_avg(), c.target),
        result,
        table: Some(table),
    })
}

fn fit_limit(cfg: &Config, seed: u64) -> Result<Output> {
    let model = cfg.model()?;
    let n = match cfg.get("n") {
        Some(v) => cfg.int_value("n", v)?,
        None => {
            // `n_stage`: the height h_j of a rank-one stage.
            let j = cfg.positive("n_stage")?;
            let eng = rank_one(cfg, &model)?;
            let h = eng.height(j).map_err(|e| cfg.error("n_stage", e.to_string()))?;
            i64::try_from(h).map_err(|_| cfg.error("n_stage", "height exceeds i64"))?
        }
    };
    let powers = cfg.opt_int_list("powers")?.unwrap_or_default();
    let with_theta = cfg.bool_or("theta", true)?;
    let pairs = match cfg.get("pairs") {
        Some(Value::Array(list)) => list
            .iter()
            .map(|p| {
                let pair = p.as_array().filter(|x| x.len() == 2).ok_or_else(|| cfg.error("pairs", "each pair is [A, B]"))?;
                let a = model.parse_set(&cfg.set_text("pairs", &pair[0])?).map_err(|e| cfg.error("pairs", e.to_string()))?;
                let b = model.parse_set(&cfg.set_text("pairs", &pair[1])?).map_err(|e| cfg.error("pairs", e.to_string()))?;
                Ok((a, b))
            })
            .collect::<Result<Vec<_>>>()?,
        Some(Value::Object(o)) => {
            let count = o.get("count").and_then(Value::as_u64).ok_or_else(|| cfg.error("pairs", "expected `count`"))?;
            let fineness = o.get("fineness").and_then(Value::as_u64).ok_or_else(|| cfg.error("pairs", "expected `fineness`"))?;
            let s = o.get("seed").and_then(Value::as_u64).unwrap_or(seed);
            test_pair_family(&model, count as usize, fineness as usize, s)?
        }
        Some(_) => return Err(cfg.error("pairs", "expected a list of pairs or {count, fineness}").into()),
        None => return Err(cfg.error("pairs", "missing required field").into()),
    };
    let tol = tol(cfg)?;
    let fit = fit_weak_limit(&model, n, &pairs, &powers, with_theta, tol.as_ref())?;
    let mut result = to_value(&fit)?;
    let theta = fit.coefficient(BasisTerm::Theta);
    result["a_theta"] = json!(theta);
    let terms: Vec<String> = fit.basis.iter().zip(&fit.coefficients).map(|(b, c)| format!("{b}={c:.4}")).collect();
    Ok(Output {
        summary: format!("{}: fit at n = {n}: {} (residual {:.3e})", model.name(), terms.join(", "), fit.residual),
        result,
        table: None,
    })
}

fn operator<'a>(cfg: &Config, key: &str, model: &'a Model) -> Result<OperatorModel<'a>> {
    match cfg.require(key)? {
        Value::String(s) if s == "theta" => Ok(OperatorModel::Theta(model)),
        Value::Object(o) => {
            let k = o.get("power").and_then(Value::as_i64).ok_or_else(|| cfg.error(key, "expected {\"power\": k}"))?;
            Ok(OperatorModel::Power(model, k))
        }
        _ => Err(cfg.error(key, "expected \"theta\" or {\"power\": k}").into()),
    }
}

fn metric(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let depth = cfg.positive("depth")?;
    let kind = cfg.string("metric")?;
    let d = match kind.as_str() {
        "halmos" => {
            let s = system(cfg, &model)?;
            let t = match cfg.get("other") {
                Some(v) => cfg.system_value("other", v)?,
                None => s.clone(),
            };
            let sp = cfg.opt_int("s_power")?.unwrap_or(1);
            let tp = cfg.opt_int("t_power")?.unwrap_or(1);
            halmos_distance(&s, sp, &t, tp, depth)?
        }
        "weak" => {
            let u = operator(cfg, "u", &model)?;
            let v = operator(cfg, "v", &model)?;
            weak_distance(&u, &v, depth)?
        }
        other => return Err(cfg.error("metric", format!("unknown metric {other:?}; expected halmos or weak")).into()),
    };
    Ok(Output {
        summary: format!("{kind} distance at depth {depth}: {} (tail ≤ {})", fmt_q(&d.value), fmt_q(&d.tail_bound)),
        result: json!({"metric": kind, "value": fmt_q(&d.value), "value_f64": to_f64(&d.value), "tail_bound": fmt_q(&d.tail_bound), "depth": d.depth}),
        table: None,
    })
}

fn spectrum(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let f = function(cfg, &model)?;
    let big_n = cfg.positive("N")?;
    let grid = cfg.positive_or("grid", DEFAULT_GRID)?;
    let tsize = cfg.positive_or("toeplitz", (big_n + 1).min(256))?;
    let tol = tol(cfg)?;
    let ac = autocovariance(&model, &f, big_n, tol.as_ref())?;
    let d = fejer_density(&ac, big_n, grid)?;
    let eig = toeplitz_min_eig(&ac, tsize)?;
    let mut table = Table::new(&["theta", "rho"]);
    for (t, r) in d.theta.iter().zip(&d.rho) {
        table.push(vec![format!("{t}"), format!("{r}")]);
    }
    let result = json!({
        "f": f.describe(),
        "N": big_n,
        "grid": grid,
        "sigma0": to_value(&ac.values[0])?,
        "rho_min": d.min(),
        "rho_mean": d.mean(),
        "toeplitz_size": tsize,
        "toeplitz_min_eig": eig,
        "exact": ac.exact,
    });
    Ok(Output {
        summary: format!("{}: Fejér density N = {big_n}: min {:.6}, mean {:.6}; Toeplitz min eig {:.3e}", model.name(), d.min(), d.mean(), eig),
        result,
        table: Some(table),
    })
}

fn atoms(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let f = function(cfg, &model)?;
    let big_n = cfg.positive("N")?;
    let grid = cfg.positive_or("grid", DEFAULT_GRID)?;
    let threshold = cfg.float_or("threshold", 1e-3)?;
    let tol = tol(cfg)?;
    let ac = autocovariance(&model, &f, big_n, tol.as_ref())?;
    let scan = eigen_scan(&ac, big_n, grid, threshold)?;
    let mut table = Table::new(&["angle", "mass"]);
    for a in &scan.atoms {
        table.push(vec![format!("{}", a.angle), format!("{}", a.mass)]);
    }
    let mut result = to_value(&scan)?;
    result["f"] = json!(f.describe());
    Ok(Output {
        summary: format!("{}: {} atoms above {threshold} at N = {big_n}; closed under addition: {}", model.name(), scan.atoms.len(), scan.closed),
        result,
        table: Some(table),
    })
}

fn partition(cfg: &Config, model: &Model) -> Result<ModelPartition> {
    let key = "xi";
    match (cfg.require(key)?, model) {
        (Value::Object(o), Model::System(s)) => {
            let level = o.get("dyadic").and_then(Value::as_u64).ok_or_else(|| cfg.error(key, "expected {\"dyadic\": level}"))?;
            if level == 0 {
                return Err(cfg.error(key, "dyadic level must be at least 1").into());
            }
            let mut parts = dyadic_partitions(s.family(), level as usize)?;
            Ok(ModelPartition::Exact(parts.remove(level as usize - 1)))
        }
        (Value::Array(_), Model::System(_)) => {
            let cells: Vec<MeasSet> = set_list(cfg, model, key)?
                .into_iter()
                .map(|s| match s {
                    ModelSet::Meas(m) => m,
                    ModelSet::Levels(_) => unreachable!("system sets"),
                })
                .collect();
            Ok(ModelPartition::Exact(Partition::from_cells(cells).map_err(|e| cfg.error(key, e.to_string()))?))
        }
        (Value::Array(_), Model::RankOne(_)) => {
            let cells: Vec<LevelSet> = set_list(cfg, model, key)?
                .into_iter()
                .map(|s| match s {
                    ModelSet::Levels(l) => l,
                    ModelSet::Meas(_) => unreachable!("rank-one sets"),
                })
                .collect();
            Ok(ModelPartition::Levels(cells))
        }
        _ => Err(cfg.error(key, "expected a list of sets or {\"dyadic\": level}").into()),
    }
}

fn progression_family(cfg: &Config) -> Result<ProgressionFamily> {
    let key = "L";
    match cfg.require(key)? {
        Value::Number(n) => {
            let l = n.as_u64().filter(|l| *l > 0).ok_or_else(|| cfg.error(key, "L must be a positive integer"))?;
            Ok(ProgressionFamily::Constant { l })
        }
        Value::Object(o) => {
            if let Some(a) = o.get("linear") {
                let a = a.as_u64().filter(|a| *a > 0).ok_or_else(|| cfg.error(key, "`linear` must be a positive integer"))?;
                Ok(ProgressionFamily::Linear { a })
            } else if let Some(t) = o.get("table") {
                let values: Vec<u64> = serde_json::from_value(t.clone()).map_err(|_| cfg.error(key, "`table` must be a list of integers"))?;
                Ok(ProgressionFamily::Table { values })
            } else {
                Err(cfg.error(key, "expected {\"linear\": a} or {\"table\": [...]}").into())
            }
        }
        _ => Err(cfg.error(key, "expected an integer or an object").into()),
    }
}

fn entropy(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let xi = partition(cfg, &model)?;
    let family = progression_family(cfg)?;
    let j_max = cfg.positive("j_max")?;
    let p = pentropy_profile(&model, &xi, &family, j_max)?;
    let mut table = Table::new(&["j", "L", "lo", "hi", "cells", "unresolved"]);
    for r in &p.rows {
        table.push(vec![r.j.to_string(), r.l.to_string(), format!("{}", r.lo), format!("{}", r.hi), r.cells.to_string(), format!("{}", r.unresolved)]);
    }
    Ok(Output {
        summary: format!("{}: P-entropy for j ≤ {j_max} ({}): limsup in [{:.6}, {:.6}]", model.name(), family.describe(), p.limsup_lo, p.limsup_hi),
        result: to_value(&p)?,
        table: Some(table),
    })
}

fn recur(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let sets = set_list(cfg, &model, "intersect")?;
    let big_n = cfg.positive("N")?;
    let r = multirec_average(&model, &sets, big_n)?;
    let mut table = Table::new(&["i", "term_lo", "term_hi", "term_lo_f64", "term_hi_f64", "avg_lo", "avg_hi", "avg_lo_f64", "avg_hi_f64"]);
    for (i, (t, a)) in r.terms.iter().zip(&r.running).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(bounds_cells(t));
        row.extend(bounds_cells(a));
        table.push(row);
    }
    let mut product = Q::from_integer(1.into());
    for s in &sets {
        product *= model.measure(s)?;
    }
    let last = r.running.last().cloned().unwrap_or_else(Bounds::zero);
    let result = json!({
        "k": r.k,
        "N": big_n,
        "average": to_value(&last)?,
        "product_of_measures": fmt_q(&product),
    });
    Ok(Output {
        summary: format!("{}: multiple recurrence average over i ≤ {big_n}: {} (∏μ = {})", model.name(), last, fmt_q(&product)),
        result,
        table: Some(table),
    })
}

fn roth(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let a = set(cfg, &model, "A")?;
    let i_max = cfg.int("i_max")?;
    if i_max < 1 {
        return Err(cfg.error("i_max", "must be at least 1").into());
    }
    let rep = roth_min_i(&model, &a, i_max)?;
    let summary = match (&rep.i_min, &rep.witness) {
        (Some(i), Some(w)) => format!("{}: smallest i = {i}, μ(A ∩ T^-i A ∩ T^-2i A) = {w}", model.name()),
        _ => format!("{}: no i ≤ {i_max} with positive triple intersection", model.name()),
    };
    Ok(Output { summary, result: to_value(&rep)?, table: None })
}

fn cocycle(cfg: &Config, seed: u64) -> Result<Output> {
    let model = cfg.model()?;
    let sys = system(cfg, &model)?;
    let f = function(cfg, &model)?;
    let n_floor = cfg.uint_or("n_floor", 0)?;
    let budget = cfg.uint("budget")?;
    if let Some(starts) = cfg.opt_int("starts")? {
        if starts < 1 {
            return Err(cfg.error("starts", "must be at least 1").into());
        }
        let mut table = Table::new(&["seed", "n_x"]);
        let mut found = 0usize;
        for s in seed..seed + starts as u64 {
            let x = sys.seeded_point(s);
            let n = cocycle_first_zero(&sys, &f, &x, n_floor, budget)?;
            found += n.is_some() as usize;
            table.push(vec![s.to_string(), n.map(|v| v.to_string()).unwrap_or_default()]);
        }
        return Ok(Output {
            summary: format!("{}: {found}/{starts} starts reach a zero sum after N = {n_floor} within {budget} steps", model.name()),
            result: json!({"starts": starts, "found": found, "n_floor": n_floor, "budget": budget, "f": f.describe()}),
            table: Some(table),
        });
    }
    let x = cfg.point("x", &sys, seed)?;
    let n = cocycle_first_zero(&sys, &f, &x, n_floor, budget)?;
    Ok(Output {
        summary: match n {
            Some(v) => format!("{}: first zero partial sum after N = {n_floor} at N(x) = {v}", model.name()),
            None => format!("{}: no zero partial sum within {budget} steps", model.name()),
        },
        result: json!({"n_x": n, "n_floor": n_floor, "budget": budget, "f": f.describe()}),
        table: None,
    })
}

fn window(cfg: &Config) -> Result<PoissonWindow> {
    let model = cfg.model()?;
    let eng = rank_one(cfg, &model)?;
    let stage = cfg.positive("window_stage")?;
    PoissonWindow::new(eng, stage).map_err(|e| cfg.error("window_stage", e.to_string()).into())
}

/// A window subset: `@j:levels` or an interval literal on the ray.
fn window_set(cfg: &Config, w: &PoissonWindow, key: &str) -> Result<RationalIntervalSet> {
    let text = cfg.set_text(key, cfg.require(key)?)?;
    let set = if text.trim_start().starts_with('@') {
        let ls = LevelSet::parse(&text).map_err(|e| cfg.error(key, e.to_string()))?;
        w.level_intervals(&ls)
    } else {
        RationalIntervalSet::parse(&text, Ambient::Ray)
    };
    set.map_err(|e| cfg.error(key, e.to_string()).into())
}

fn poisson_pmf(cfg: &Config, seed: u64) -> Result<Output> {
    let w = window(cfg)?;
    let a = window_set(cfg, &w, "A")?;
    let count = cfg.positive("count")?;
    let sample = sample_configs(&w, count, seed)?;
    let d = count_distribution(&w, &sample, &a)?;
    let mut table = Table::new(&["k", "tail", "empirical", "reference", "sigma", "pass"]);
    for r in &d.rows {
        table.push(vec![r.k.to_string(), r.tail.to_string(), format!("{}", r.empirical), format!("{}", r.reference), format!("{}", r.sigma), r.pass.to_string()]);
    }
    let empty = sample.configs.iter().filter(|c| c.is_empty()).count() as f64 / count as f64;
    let mut result = to_value(&d)?;
    result["window_mass"] = json!(fmt_q(w.mass()));
    result["empty_fraction"] = json!(empty);
    result["batch"] = json!(sample.batch);
    Ok(Output {
        summary: format!("Poisson counts on μ(A) = {}: chi-square {:.3} on {} dof (p = {:.3})", fmt_q(&d.mu), d.chi_square, d.dof, d.p_value),
        result,
        table: Some(table),
    })
}

fn poisson_indep(cfg: &Config, seed: u64) -> Result<Output> {
    let w = window(cfg)?;
    let a = window_set(cfg, &w, "A")?;
    let b = window_set(cfg, &w, "B")?;
    let count = cfg.positive("count")?;
    let sample = sample_configs(&w, count, seed)?;
    let r = independence_check(&w, &sample, &a, &b)?;
    let mut table = Table::new(&["k", "m", "joint", "product", "sigma", "pass"]);
    for c in &r.cells {
        table.push(vec![c.k.to_string(), c.m.to_string(), format!("{}", c.joint), format!("{}", c.product), format!("{}", c.sigma), c.pass.to_string()]);
    }
    let mut result = to_value(&r)?;
    result["batch"] = json!(sample.batch);
    Ok(Output {
        summary: format!("Poisson independence: {}/9 cells within 4σ, correlation {:.4} (pass: {})", r.cells.iter().filter(|c| c.pass).count(), r.correlation, r.pass),
        result,
        table: Some(table),
    })
}

fn poisson_entropy(cfg: &Config, seed: u64) -> Result<Output> {
    let w = window(cfg)?;
    let text = cfg.set_text("A", cfg.require("A")?)?;
    let a = LevelSet::parse(&text).map_err(|e| cfg.error("A", e.to_string()))?;
    let j = cfg.positive("j")?;
    let l = cfg.positive("L")? as u64;
    let count = cfg.positive("count")?;
    let r = suspension_pentropy(&w, &a, j, l, count, seed)?;
    Ok(Output {
        summary: format!("suspension P-entropy j = {j}, L = {l}: {:.5} vs H(ξ) = {:.5} (ratio {:.4})", r.estimate, r.reference, r.ratio),
        result: to_value(&r)?,
        table: None,
    })
}

fn birkhoff(cfg: &Config, seed: u64) -> Result<Output> {
    let model = cfg.model()?;
    let sys = system(cfg, &model)?;
    let f = function(cfg, &model)?;
    let big_n = cfg.positive("N")?;
    let x = cfg.point("x", &sys, seed)?;
    let avg = birkhoff_average(&sys, &f, &x, big_n)?;
    let mean = f.mean(&model)?;
    let table = if cfg.bool_or("running", false)? {
        let mut t = Table::new(&["N", "average", "average_f64"]);
        for (i, v) in avg.running().iter().enumerate() {
            t.push(vec![(i + 1).to_string(), fmt_q(v), format!("{}", to_f64(v))]);
        }
        Some(t)
    } else {
        None
    };
    Ok(Output {
        summary: format!("{}: orbit average over N = {big_n}: {} ≈ {:.6} (space mean {})", model.name(), fmt_q(&avg.average), to_f64(&avg.average), mean),
        result: json!({"N": big_n, "average": fmt_q(&avg.average), "average_f64": to_f64(&avg.average), "space_mean": to_value(&mean)?, "f": f.describe()}),
        table,
    })
}

fn vonneumann(cfg: &Config) -> Result<Output> {
    let model = cfg.model()?;
    let f = function(cfg, &model)?;
    let ns = cfg.int_list("N")?;
    if ns.is_empty() || ns.iter().any(|n| *n < 1) {
        return Err(cfg.error("N", "expected a non-empty list of positive integers").into());
    }
    let max = *ns.iter().max().unwrap() as usize;
    let tol = tol(cfg)?;
    let ac = autocovariance(&model, &f, max, tol.as_ref())?;
    let mut table = Table::new(&["N", "norm"]);
    let mut norms = Vec::new();
    for &n in &ns {
        let v = vn_norm(&ac, n as usize)?;
        norms.push(json!({"N": n, "norm": v}));
        table.push(vec![n.to_string(), format!("{v}")]);
    }
    Ok(Output {
        summary: format!("{}: ergodic-average L² norms at {} values of N", model.name(), ns.len()),
        result: json!({"f": f.describe(), "norms": norms}),
        table: Some(table),
    })
}

pub fn error_kind(e: &anyhow::Error) -> &'static str {
    if e.downcast_ref::<crate::config::ConfigError>().is_some() {
        "validation"
    } else if let Some(core) = e.downcast_ref::<ergolab_core::Error>() {
        match core {
            ergolab_core::Error::Domain(_) => "domain",
            ergolab_core::Error::Parse(_) => "parse",
            _ => "resource",
        }
    } else {
        "error"
    }
}
