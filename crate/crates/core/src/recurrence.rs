//! Ergodic averages along orbits and in norm, multiple-recurrence averages,
//! the minimal return time of three-term progressions, and zero-sum times of
//! integer cocycles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Model, ModelSet};
use crate::error::{Error, Result};
use crate::rational::{ser_q, Bounds, Q};
use crate::sets::MeasSet;
use crate::spectral::{Autocovariance, FunctionSpec};
use crate::systems::{PointState, System, SystemSpec};

/// Evaluates `f(Tⁱx)` for `i = 0, 1, 2, …` as integers over a common
/// denominator. Rotations run on integer residues; other systems step points.
struct OrbitWalk<'a> {
    sys: &'a System,
    /// `(numerator of q_k·den, set)`.
    terms: Vec<(BigInt, &'a MeasSet)>,
    den: BigInt,
    fast: Option<FastRotation>,
    point: PointState,
}

struct FastRotation {
    modulus: u128,
    step: u128,
    pos: u128,
    /// Per term: integer windows `[lo, hi)` of residues inside the set.
    windows: Vec<Vec<(u128, u128)>>,
    values: Vec<i128>,
}

impl<'a> OrbitWalk<'a> {
    fn new(sys: &'a System, f: &'a FunctionSpec, x: &PointState) -> Result<Self> {
        if f.center {
            return Err(Error::domain("orbit evaluation takes uncentered functions"));
        }
        let mut den = BigInt::one();
        let mut sets = Vec::new();
        for (c, s) in &f.terms {
            den = den.lcm(c.denom());
            match s {
                ModelSet::Meas(m) if m.family() == sys.family() => sets.push(m),
                _ => return Err(Error::domain("function term is not a set of this system")),
            }
        }
        let terms: Vec<(BigInt, &MeasSet)> = f
            .terms
            .iter()
            .zip(sets)
            .map(|((c, _), s)| ((c * Q::from_integer(den.clone())).to_integer(), s))
            .collect();
        let fast = match (sys.spec(), x) {
            (SystemSpec::Rotation { angle }, PointState::Rotation(p)) => FastRotation::new(angle, p, &terms),
            _ => None,
        };
        Ok(OrbitWalk {
            sys,
            terms,
            den,
            fast,
            point: x.clone(),
        })
    }

    /// `den · f(current point)`, then advance one step.
    fn next_value(&mut self) -> Result<BigInt> {
        if let Some(fr) = &mut self.fast {
            let v = fr.value();
            fr.pos = (fr.pos + fr.step) % fr.modulus;
            return Ok(BigInt::from(v));
        }
        let mut v = BigInt::zero();
        for (c, s) in &self.terms {
            if self.point.contains(s)? {
                v += c;
            }
        }
        self.point = self.sys.orbit_point(&self.point, 1)?;
        Ok(v)
    }
}

impl FastRotation {
    fn new(angle: &Q, x: &Q, terms: &[(BigInt, &MeasSet)]) -> Option<Self> {
        let d = angle.denom().lcm(x.denom());
        let modulus = d.to_u128()?;
        if modulus > 1 << 100 {
            return None;
        }
        let scale = Q::from_integer(d);
        let to_int = |v: &Q| (v * &scale).ceil().to_integer().to_u128();
        let mut windows = Vec::new();
        let mut values = Vec::new();
        for (c, s) in terms {
            let MeasSet::Interval(iv) = s else { return None };
            let mut w = Vec::new();
            for (l, r) in iv.intervals() {
                w.push((to_int(l)?, to_int(r)?));
            }
            windows.push(w);
            values.push(c.to_i128()?);
        }
        Some(FastRotation {
            modulus,
            step: (angle * &scale).to_integer().to_u128()?,
            pos: (x * &scale).to_integer().to_u128()?,
            windows,
            values,
        })
    }

    fn value(&self) -> i128 {
        self.windows
            .iter()
            .zip(&self.values)
            .filter(|(w, _)| w.iter().any(|(lo, hi)| *lo <= self.pos && self.pos < *hi))
            .map(|(_, v)| *v)
            .sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitAverage {
    pub n: usize,
    /// `f(Tⁱx)` for `i = 1..=N`.
    #[serde(skip)]
    pub terms: Vec<Q>,
    /// `(1/N) Σ_{i=1}^N f(Tⁱx)`.
    #[serde(serialize_with = "ser_q")]
    pub average: Q,
}

impl OrbitAverage {
    /// Running averages `(1/n) Σ_{i≤n} f(Tⁱx)`.
    pub fn running(&self) -> Vec<Q> {
        let mut sum = Q::zero();
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                sum += t;
                &sum / Q::from_integer((i + 1).into())
            })
            .collect()
    }
}

/// `(1/N) Σ_{i=1}^N f(Tⁱx)`, exact.
pub fn birkhoff_average(sys: &System, f: &FunctionSpec, x: &PointState, big_n: usize) -> Result<OrbitAverage> {
    if big_n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let mut walk = OrbitWalk::new(sys, f, x)?;
    walk.next_value()?; // i = 0 is not part of the average
    let den = Q::from_integer(walk.den.clone());
    let mut terms = Vec::with_capacity(big_n);
    let mut sum = BigInt::zero();
    for _ in 0..big_n {
        let v = walk.next_value()?;
        sum += &v;
        terms.push(Q::from_integer(v) / &den);
    }
    let average = Q::new(sum, walk.den.clone() * BigInt::from(big_n));
    Ok(OrbitAverage { n: big_n, terms, average })
}

/// `‖(1/N) Σ_{i=1}^N Uⁱf‖ = sqrt((1/N²) Σ_{i,j} σ̂(i − j))`.
pub fn vn_norm(ac: &Autocovariance, big_n: usize) -> Result<f64> {
    if big_n == 0 || ac.max_lag() + 1 < big_n {
        return Err(Error::domain(format!(
            "norm of the N = {big_n} average needs lags below {big_n}"
        )));
    }
    let n = big_n as f64;
    let off: f64 = (1..big_n).map(|k| (big_n - k) as f64 * ac.at(k as i64)).sum();
    let sq = (n * ac.at(0) + 2.0 * off) / (n * n);
    Ok(sq.max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiRecurrence {
    pub k: usize,
    /// `μ(A ∩ TⁱA_1 ∩ … ∩ T^{ki}A_k)` for `i = 1..=N`.
    pub terms: Vec<Bounds>,
    pub running: Vec<Bounds>,
}

/// Running averages of `μ(A ∩ TⁱA_1 ∩ T^{2i}A_2 ∩ … ∩ T^{ki}A_k)`.
pub fn multirec_average(model: &Model, sets: &[ModelSet], big_n: usize) -> Result<MultiRecurrence> {
    if sets.len() < 2 {
        return Err(Error::domain("need A and at least one A_i"));
    }
    if big_n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let k = sets.len() - 1;
    let terms: Vec<Bounds> = (1..=big_n as i64)
        .into_par_iter()
        .map(|i| {
            let shifts: Vec<i64> = (1..=k as i64).map(|t| t * i).collect();
            model.multi_meet(sets, &shifts, None)
        })
        .collect::<Result<_>>()?;
    let mut sum = Bounds::zero();
    let running = terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            sum = sum.add(t);
            sum.scale(&Q::new(1.into(), (i + 1).into()))
        })
        .collect();
    Ok(MultiRecurrence { k, terms, running })
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub i_min: Option<i64>,
    /// `μ(A ∩ T^{i_min}A ∩ T^{2 i_min}A)`.
    pub witness: Option<Bounds>,
    pub search_bound: i64,
    /// `i < i_min` (or up to the bound) that could not be decided either way.
    pub indeterminate: Vec<i64>,
    /// Every `i` below `i_min` has triple measure certified to be 0.
    pub zeros_certified: bool,
}

/// Smallest `i ∈ 1..=i_max` with `μ(A ∩ TⁱA ∩ T^{2i}A) > 0` (certified: lower bound positive).
pub fn roth_min_i(model: &Model, a: &ModelSet, i_max: i64) -> Result<RecurrenceReport> {
    if model.measure(a)?.is_zero() {
        return Err(Error::domain("A must have positive measure"));
    }
    let sets = [a.clone(), a.clone(), a.clone()];
    let mut indeterminate = Vec::new();
    for i in 1..=i_max {
        let b = model.multi_meet(&sets, &[i, 2 * i], None)?;
        if b.lo.is_positive() {
            return Ok(RecurrenceReport {
                i_min: Some(i),
                witness: Some(b),
                search_bound: i_max,
                zeros_certified: indeterminate.is_empty(),
                indeterminate,
            });
        }
        if !b.hi.is_zero() {
            indeterminate.push(i);
        }
    }
    Ok(RecurrenceReport {
        i_min: None,
        witness: None,
        search_bound: i_max,
        zeros_certified: indeterminate.is_empty(),
        indeterminate,
    })
}

/// Smallest `N > N_floor` with `Σ_{i=0}^{N−1} f(Tⁱx) = 0`, scanning at most
/// `budget` values of `N`; `None` when the budget runs out.
pub fn cocycle_first_zero(sys: &System, f: &FunctionSpec, x: &PointState, n_floor: u64, budget: u64) -> Result<Option<u64>> {
    if f.terms.iter().any(|(c, _)| !c.is_integer()) {
        return Err(Error::domain("cocycle must take integer values"));
    }
    let model = Model::System(sys.clone());
    let mean = f.mean(&model)?;
    if !mean.lo.is_zero() || !mean.hi.is_zero() {
        return Err(Error::domain("cocycle must have zero mean"));
    }
    let mut walk = OrbitWalk::new(sys, f, x)?;
    let mut sum = BigInt::zero();
    for n in 1..=n_floor.saturating_add(budget) {
        sum += walk.next_value()?;
        if n > n_floor && sum.is_zero() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
