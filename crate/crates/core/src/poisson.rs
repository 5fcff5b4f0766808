//! Poisson suspension sampling over a finite window of a rank-one base.
//!
//! Configurations are finite point sets in the stage-`J` tower of a rank-one
//! construction. The suspension map is never simulated: the count of
//! `T_∘^p x_∘` in `A` equals the count of `x_∘` in `T^{-p}A`, so counts on
//! translates are read off exactly computed level sets.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rank_one::{shifted_meet, LevelSet, RankOne};
use crate::rational::{fmt_q, ser_q, to_f64, Q};
use crate::sets::RationalIntervalSet;

/// Configurations per rayon batch; each batch draws from its own ChaCha stream.
const BATCH: usize = 4096;
/// Inversion from `e^{-m}` underflows beyond this mass.
const MAX_MASS: f64 = 600.0;

#[derive(Clone, Debug)]
pub struct PoissonWindow {
    engine: RankOne,
    stage: usize,
    support: RationalIntervalSet,
    mass: Q,
}

impl PoissonWindow {
    pub fn new(engine: RankOne, stage: usize) -> Result<Self> {
        let tower = engine.tower(stage)?;
        let support = engine.to_intervals(&tower)?;
        let mass = engine.total(stage)?;
        debug_assert_eq!(support.measure(), mass);
        Ok(PoissonWindow { engine, stage, support, mass })
    }

    pub fn engine(&self) -> &RankOne {
        &self.engine
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn support(&self) -> &RationalIntervalSet {
        &self.support
    }

    pub fn mass(&self) -> &Q {
        &self.mass
    }

    /// Interval form of a level set, checked to lie inside the window.
    pub fn level_intervals(&self, ls: &LevelSet) -> Result<RationalIntervalSet> {
        let set = self.engine.to_intervals(ls)?;
        self.check_inside(&set)?;
        Ok(set)
    }

    fn check_inside(&self, a: &RationalIntervalSet) -> Result<()> {
        if !a.difference(&self.support)?.is_empty() {
            return Err(Error::domain("query set is not contained in the window"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonSample {
    pub seed: u64,
    pub batch: usize,
    #[serde(serialize_with = "ser_q")]
    pub mass: Q,
    pub count: usize,
    /// Sorted point locations of each configuration.
    #[serde(skip)]
    pub configs: Vec<Vec<f64>>,
}

impl PoissonSample {
    /// `|x_∘ ∩ A|` for every configuration.
    pub fn counts(&self, a: &RationalIntervalSet) -> Vec<u32> {
        let pieces: Vec<(f64, f64)> = a.intervals().iter().map(|(l, r)| (to_f64(l), to_f64(r))).collect();
        self.configs
            .par_iter()
            .map(|pts| pts.iter().filter(|x| in_pieces(&pieces, **x)).count() as u32)
            .collect()
    }

    pub fn totals(&self) -> Vec<u32> {
        self.configs.iter().map(|c| c.len() as u32).collect()
    }
}

fn in_pieces(pieces: &[(f64, f64)], x: f64) -> bool {
    let i = pieces.partition_point(|(l, _)| *l <= x);
    i > 0 && x < pieces[i - 1].1
}

fn poisson_inverse(m: f64, u: f64) -> u32 {
    let mut k = 0u32;
    let mut p = (-m).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= m / k as f64;
        cdf += p;
    }
    k
}

/// Draws `count` independent configurations on the window.
pub fn sample_configs(window: &PoissonWindow, count: usize, seed: u64) -> Result<PoissonSample> {
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    let m = to_f64(&window.mass);
    if m > MAX_MASS {
        return Err(Error::domain(format!("window mass {m} too large for inversion sampling")));
    }
    let pieces: Vec<(f64, f64)> = window
        .support
        .intervals()
        .iter()
        .map(|(l, r)| (to_f64(l), to_f64(r)))
        .collect();
    // Component choice proportional to exact lengths.
    let mut cum = Vec::with_capacity(pieces.len());
    let mut acc = Q::zero();
    for (l, r) in window.support.intervals() {
        acc += r - l;
        cum.push(to_f64(&(&acc / &window.mass)));
    }
    let batches = count.div_ceil(BATCH);
    let configs: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = BATCH.min(count - b * BATCH);
            let (pieces, cum) = (&pieces, &cum);
            (0..n)
                .map(move |_| {
                    if m == 0.0 {
                        return Vec::new();
                    }
                    let k = poisson_inverse(m, rng.random::<f64>());
                    let mut pts: Vec<f64> = (0..k)
                        .map(|_| {
                            let c = rng.random::<f64>();
                            let i = cum.partition_point(|x| *x <= c).min(pieces.len() - 1);
                            let (l, r) = pieces[i];
                            l + rng.random::<f64>() * (r - l)
                        })
                        .collect();
                    pts.sort_by(f64::total_cmp);
                    pts
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(PoissonSample { seed, batch: BATCH, mass: window.mass.clone(), count, configs })
}

pub fn poisson_pmf(mu: f64, k: u32) -> f64 {
    let mut p = (-mu).exp();
    for i in 1..=k {
        p *= mu / i as f64;
    }
    p
}

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    /// `k`, or the pooled tail `≥ k` on the last row.
    pub k: u32,
    pub tail: bool,
    pub empirical: f64,
    pub reference: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountDistribution {
    pub set: String,
    #[serde(serialize_with = "ser_q")]
    pub mu: Q,
    pub rows: Vec<CountRow>,
    pub mean: f64,
    pub variance: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    pub seed: u64,
    pub count: usize,
}

/// Empirical pmf of `|x_∘ ∩ A|` against Poisson(μ(A)), with a chi-square
/// statistic over bins `0..K-1` and a pooled tail `≥ K` (each expected ≥ 5).
pub fn count_distribution(window: &PoissonWindow, sample: &PoissonSample, a: &RationalIntervalSet) -> Result<CountDistribution> {
    window.check_inside(a)?;
    let mu_q = a.measure();
    let mu = to_f64(&mu_q);
    let counts = sample.counts(a);
    let n = counts.len() as f64;
    let kmax = counts.iter().copied().max().unwrap_or(0);
    // Bins 0..big, where every bin and the tail keep expected count ≥ 5.
    let mut big = 0u32;
    let mut below = 0.0;
    loop {
        let p = poisson_pmf(mu, big);
        if n * p < 5.0 || n * (1.0 - below - p) < 5.0 {
            break;
        }
        below += p;
        big += 1;
    }
    let mut hist = vec![0usize; kmax.max(big) as usize + 1];
    for &c in &counts {
        hist[c as usize] += 1;
    }
    let mut rows = Vec::new();
    let mut chi = 0.0;
    let mut cum_emp = 0.0;
    let mut cum_ref = 0.0;
    for k in 0..big {
        let e = hist[k as usize] as f64 / n;
        let r = poisson_pmf(mu, k);
        chi += n * (e - r).powi(2) / r;
        cum_emp += e;
        cum_ref += r;
        rows.push(count_row(k, false, e, r, n));
    }
    let (te, tr) = ((1.0 - cum_emp).max(0.0), (1.0 - cum_ref).max(0.0));
    if tr > 0.0 {
        chi += n * (te - tr).powi(2) / tr;
    }
    rows.push(count_row(big, true, te, tr, n));
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let variance = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    let dof = rows.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).map_err(|e| Error::domain(e.to_string()))?.cdf(chi)
    };
    Ok(CountDistribution {
        set: describe(a),
        mu: mu_q,
        rows,
        mean,
        variance,
        chi_square: chi,
        dof,
        p_value,
        seed: sample.seed,
        count: sample.count,
    })
}

fn count_row(k: u32, tail: bool, empirical: f64, reference: f64, n: f64) -> CountRow {
    let sigma = (reference * (1.0 - reference) / n).sqrt();
    CountRow { k, tail, empirical, reference, sigma, pass: (empirical - reference).abs() <= 4.0 * sigma + 1e-15 }
}

fn describe(a: &RationalIntervalSet) -> String {
    a.intervals().iter().map(|(l, r)| format!("{}..{}", fmt_q(l), fmt_q(r))).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceCell {
    pub k: u32,
    pub m: u32,
    pub joint: f64,
    pub product: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub a: String,
    pub b: String,
    pub cells: Vec<IndependenceCell>,
    pub correlation: f64,
    pub correlation_bound: f64,
    pub pass: bool,
    pub seed: u64,
    pub count: usize,
}

/// Compares `P(C(A,k) ∩ C(B,m))` with `P(C(A,k))·P(C(B,m))` for `k, m ∈ {0,1,2}`.
pub fn independence_check(
    window: &PoissonWindow,
    sample: &PoissonSample,
    a: &RationalIntervalSet,
    b: &RationalIntervalSet,
) -> Result<IndependenceReport> {
    window.check_inside(a)?;
    window.check_inside(b)?;
    if !a.intersect(b)?.is_empty() {
        return Err(Error::domain("independence needs disjoint sets"));
    }
    let ca = sample.counts(a);
    let cb = sample.counts(b);
    let n = ca.len() as f64;
    let freq = |c: &[u32], k: u32| c.iter().filter(|&&x| x == k).count() as f64 / n;
    let mut cells = Vec::with_capacity(9);
    for k in 0..3 {
        for m in 0..3 {
            let joint = ca.iter().zip(&cb).filter(|(x, y)| **x == k && **y == m).count() as f64 / n;
            let product = freq(&ca, k) * freq(&cb, m);
            let sigma = (product * (1.0 - product) / n).sqrt();
            cells.push(IndependenceCell { k, m, joint, product, sigma, pass: (joint - product).abs() <= 4.0 * sigma + 1e-15 });
        }
    }
    let correlation = pearson(&ca, &cb);
    let correlation_bound = 4.0 / n.sqrt();
    let pass = cells.iter().all(|c| c.pass) && correlation.abs() <= correlation_bound;
    Ok(IndependenceReport {
        a: describe(a),
        b: describe(b),
        cells,
        correlation,
        correlation_bound,
        pass,
        seed: sample.seed,
        count: sample.count,
    })
}

fn pearson(x: &[u32], y: &[u32]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().map(|&v| v as f64).sum::<f64>() / n;
    let my = y.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a as f64 - mx, *b as f64 - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuspensionEntropy {
    pub j: usize,
    pub l: u64,
    pub h_j: u64,
    pub window_stage: usize,
    #[serde(serialize_with = "ser_q")]
    pub mu_a: Q,
    pub certified_pairs: usize,
    pub estimate: f64,
    /// Plugin entropy of the single partition `{C(A,0), C(A,1), C(A,≥2)}`.
    pub single_plugin: f64,
    pub reference: f64,
    pub ratio: f64,
    pub seed: u64,
    pub count: usize,
}

/// Exact `H(ξ)` for `ξ = {C(A,0), C(A,1), C(A,≥2)}` with `μ(A) = mu`.
pub fn count_partition_entropy(mu: f64) -> f64 {
    let p0 = (-mu).exp();
    let p1 = mu * p0;
    [p0, p1, 1.0 - p0 - p1].iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
}

fn plugin_entropy<K: Ord>(labels: impl Iterator<Item = K>) -> f64 {
    let mut hist: BTreeMap<K, usize> = BTreeMap::new();
    let mut n = 0usize;
    for k in labels {
        *hist.entry(k).or_default() += 1;
        n += 1;
    }
    let n = n as f64;
    hist.values().map(|&c| c as f64 / n).map(|p| -p * p.ln()).sum()
}

/// Stage at which all of `A, T^{h_j}A, …, T^{L h_j}A` are level sets of one tower.
fn translate_stage(eng: &RankOne, a: &LevelSet, shift: u128) -> Result<usize> {
    let mut stage = a.stage;
    loop {
        let ls = eng.refine(a, stage)?;
        let top = ls.levels().last().copied().unwrap_or(0);
        if top + shift < eng.height(stage)? {
            return Ok(stage);
        }
        stage += 1;
        if stage > eng.stage_cap() {
            return Err(Error::resource("translates do not fit below the stage cap"));
        }
    }
}

/// Plugin entropy of the join of `ξ` along `T_∘^{p h_j}`, `p = 1..L`, divided by `L`.
///
/// Before sampling, every pair among `A, T^{h_j}A, …, T^{L h_j}A` must have an
/// exact zero upper bound from the shifted-meet engine.
pub fn suspension_pentropy(
    window: &PoissonWindow,
    a: &LevelSet,
    j: usize,
    l: u64,
    count: usize,
    seed: u64,
) -> Result<SuspensionEntropy> {
    if l == 0 {
        return Err(Error::domain("L must be at least 1"));
    }
    if a.stage != j {
        return Err(Error::domain(format!("A must be a stage-{j} level set")));
    }
    let eng = window.engine();
    eng.validate(a)?;
    let h = eng.height(j)?;
    for spacer in eng.spec().spacers(j, h).unwrap_or_default() {
        if spacer <= l as u128 * h {
            return Err(Error::domain(format!("stage {j} spacer {spacer} does not exceed L·h_j")));
        }
    }
    for p in 1..=l as i128 {
        let meet = shifted_meet(eng, a, a, p * h as i128, None)?;
        if !meet.bounds.hi.is_zero() {
            return Err(Error::domain(format!("translate by {}·h_j not certified disjoint", p)));
        }
    }
    let stage = translate_stage(eng, a, l as u128 * h)?;
    if stage > window.stage {
        return Err(Error::domain(format!("window stage {} below required stage {stage}", window.stage)));
    }
    let base = eng.refine(a, stage)?;
    let translates: Result<Vec<RationalIntervalSet>> = (1..=l as u128)
        .map(|p| {
            let ls = eng.level_set(stage, base.levels().iter().map(|x| x + p * h).collect())?;
            window.level_intervals(&ls)
        })
        .collect();
    let translates = translates?;
    let sample = sample_configs(window, count, seed)?;
    let counts: Vec<Vec<u32>> = translates.iter().map(|t| sample.counts(t)).collect();
    let label = |c: u32| c.min(2) as u8;
    let estimate = plugin_entropy((0..count).map(|i| counts.iter().map(|c| label(c[i])).collect::<Vec<u8>>())) / l as f64;
    let single_plugin = plugin_entropy(counts[0].iter().map(|c| label(*c)));
    let mu_a = eng.measure(a);
    let reference = count_partition_entropy(to_f64(&mu_a));
    Ok(SuspensionEntropy {
        j,
        l,
        h_j: h as u64,
        window_stage: window.stage,
        mu_a,
        certified_pairs: l as usize,
        estimate,
        single_plugin,
        reference,
        ratio: if reference > 0.0 { estimate / reference } else { f64::NAN },
        seed,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_endpoints() {
        assert_eq!(poisson_inverse(1.0, 0.0), 0);
        assert_eq!(poisson_inverse(1.0, 0.36), 0);
        assert_eq!(poisson_inverse(1.0, 0.37), 1);
        assert_eq!(poisson_inverse(0.0, 0.9), 0);
    }

    #[test]
    fn piece_membership() {
        let p = [(0.0, 0.5), (1.0, 2.0)];
        assert!(in_pieces(&p, 0.0) && in_pieces(&p, 1.5));
        assert!(!in_pieces(&p, 0.5) && !in_pieces(&p, 2.0) && !in_pieces(&p, -1.0));
    }
}
