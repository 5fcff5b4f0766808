//! Correlation sequences `c_n = μ(TⁿA ∩ B)` and what is read off them:
//! Cesàro averages, weak-limit fits and distances between transformations.

mod fit;
mod metric;

pub use fit::{fit_weak_limit, solve_simplex_ls, BasisTerm, FitStatus, SimplexSolution, WeakLimitFit};
pub use metric::{canonical_family, halmos_distance, weak_distance, Distance, OperatorModel};

use serde::Serialize;

use crate::dynamics::{Model, ModelSet};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, ser_q, Bounds, Q};
use crate::sets::MeasSet;

/// `c_n = μ(TⁿA ∩ B)` over a range of `n`.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationSeries {
    pub a: String,
    pub b: String,
    #[serde(serialize_with = "ser_q")]
    pub mu_a: Q,
    #[serde(serialize_with = "ser_q")]
    pub mu_b: Q,
    /// `μ(A)μ(B)/μ(X)` when the total measure is finite.
    pub theta: Option<Bounds>,
    pub ns: Vec<i64>,
    pub values: Vec<Bounds>,
    pub exact: bool,
}

impl CorrelationSeries {
    pub fn get(&self, n: i64) -> Option<&Bounds> {
        self.ns.iter().position(|&m| m == n).map(|i| &self.values[i])
    }

    /// `(n, lo, hi)` rows with rationals as `p/q`.
    pub fn rows(&self) -> Vec<(i64, String, String)> {
        self.ns
            .iter()
            .zip(&self.values)
            .map(|(n, b)| (*n, fmt_q(&b.lo), fmt_q(&b.hi)))
            .collect()
    }

    /// Terms `c_1, …, c_N` in order, if the series covers them.
    fn head(&self, big_n: usize) -> Result<&[Bounds]> {
        let start = self
            .ns
            .iter()
            .position(|&n| n == 1)
            .ok_or_else(|| Error::domain("series does not contain n = 1"))?;
        let ok = start + big_n <= self.ns.len()
            && self.ns[start..start + big_n]
                .iter()
                .enumerate()
                .all(|(i, &n)| n == i as i64 + 1);
        if !ok {
            return Err(Error::domain(format!("series does not cover 1..{big_n}")));
        }
        Ok(&self.values[start..start + big_n])
    }
}

pub fn correlation_series(
    model: &Model,
    a: &ModelSet,
    b: &ModelSet,
    range: std::ops::RangeInclusive<i64>,
    tol: Option<&Q>,
) -> Result<CorrelationSeries> {
    let ns: Vec<i64> = range.collect();
    let values = model.meets(a, b, &ns, tol)?;
    Ok(CorrelationSeries {
        a: a.to_string(),
        b: b.to_string(),
        mu_a: model.measure(a)?,
        mu_b: model.measure(b)?,
        theta: model.theta(a, b).ok(),
        exact: values.iter().all(Bounds::is_exact),
        ns,
        values,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Cesaro {
    pub target: Bounds,
    /// `avg[N-1] = (1/N) Σ_{i=1}^N c_i`.
    pub avg: Vec<Bounds>,
    /// `absdev[N-1] = (1/N) Σ_{i=1}^N |c_i − target|`.
    pub absdev: Vec<Bounds>,
}

impl Cesaro {
    pub fn last_avg(&self) -> &Bounds {
        self.avg.last().expect("non-empty")
    }

    pub fn last_absdev(&self) -> &Bounds {
        self.absdev.last().expect("non-empty")
    }
}

/// Running averages over `n = 1..N`; `target` defaults to `μ(A)μ(B)/μ(X)`.
/// A target given as bounds widens the deviation accordingly.
pub fn cesaro_diagnostics(series: &CorrelationSeries, big_n: usize, target: Option<Bounds>) -> Result<Cesaro> {
    if big_n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let target = match target.or_else(|| series.theta.clone()) {
        Some(t) => t,
        None => return Err(Error::domain("no target: total measure is not finite")),
    };
    let terms = series.head(big_n)?;
    let mut sum = Bounds::zero();
    let mut dev = Bounds::zero();
    let mut avg = Vec::with_capacity(big_n);
    let mut absdev = Vec::with_capacity(big_n);
    for (i, c) in terms.iter().enumerate() {
        sum = sum.add(c);
        dev = dev.add(&abs_gap(c, &target));
        let inv = Q::new(1.into(), (i as u128 + 1).into());
        avg.push(sum.scale(&inv));
        absdev.push(dev.scale(&inv));
    }
    Ok(Cesaro { target, avg, absdev })
}

/// Range of `|x − t|` for `x`, `t` in the two intervals.
fn abs_gap(x: &Bounds, t: &Bounds) -> Bounds {
    let d = x.sub(t);
    let zero = Q::from_integer(0.into());
    let hi = if d.hi.clone() > -d.lo.clone() { d.hi.clone() } else { -d.lo.clone() };
    let lo = if d.contains(&zero) {
        zero
    } else if d.lo > zero {
        d.lo.clone()
    } else {
        -d.hi.clone()
    };
    Bounds::new(lo, hi)
}

/// `count` pseudo-random pairs `(A, B)` for fits. Each set is a union of
/// atoms chosen with probability 1/2: the `2^fineness` canonical sets of level
/// `fineness` for a probability system, the levels of stage `fineness` for a
/// rank-one construction.
pub fn test_pair_family(model: &Model, count: usize, fineness: usize, seed: u64) -> Result<Vec<(ModelSet, ModelSet)>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |n: usize| -> Vec<usize> {
        loop {
            let chosen: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if !chosen.is_empty() && chosen.len() < n {
                return chosen;
            }
        }
    };
    let mut out = Vec::with_capacity(count);
    match model {
        Model::System(sys) => {
            if fineness == 0 || fineness > 12 {
                return Err(Error::domain("fineness must be in 1..=12"));
            }
            let dim = match sys.family() {
                crate::sets::Family::Torus(d) => d,
                _ => 1,
            };
            if fineness * dim > 12 {
                return Err(Error::domain("too many atoms for a test family"));
            }
            let per_level = |l: usize| 1usize << (l * dim);
            let skip: usize = (1..fineness).map(per_level).sum();
            let atoms: Vec<MeasSet> = canonical_family(sys.family(), skip + per_level(fineness))?
                .split_off(skip);
            let union = |idx: Vec<usize>| -> Result<ModelSet> {
                let mut acc = MeasSet::empty(sys.family());
                for i in idx {
                    acc = acc.union(&atoms[i])?;
                }
                Ok(ModelSet::Meas(acc))
            };
            for _ in 0..count {
                let a = union(pick(atoms.len()))?;
                let b = union(pick(atoms.len()))?;
                out.push((a, b));
            }
        }
        Model::RankOne(eng) => {
            let h = eng.height(fineness)?;
            if h < 2 || h > 1 << 16 {
                return Err(Error::domain("stage must have between 2 and 65536 levels"));
            }
            let mut levels = |n: usize| pick(n).into_iter().map(|l| l as u128).collect::<Vec<_>>();
            for _ in 0..count {
                let a = eng.level_set(fineness, levels(h as usize))?;
                let b = eng.level_set(fineness, levels(h as usize))?;
                out.push((a.into(), b.into()));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::sets::CylinderSet;
    use crate::systems::System;

    #[test]
    fn constant_series() {
        let s = CorrelationSeries {
            a: "A".into(),
            b: "B".into(),
            mu_a: q(1, 2),
            mu_b: q(1, 2),
            theta: Some(Bounds::exact(q(1, 4))),
            ns: (0..=5).collect(),
            values: vec![Bounds::exact(q(1, 3)); 6],
            exact: true,
        };
        let c = cesaro_diagnostics(&s, 5, None).unwrap();
        assert_eq!(c.last_avg(), &Bounds::exact(q(1, 3)));
        assert_eq!(c.last_absdev(), &Bounds::exact(q(1, 12)));
        assert!(cesaro_diagnostics(&s, 6, None).is_err());
    }

    #[test]
    fn bernoulli_coordinate_series() {
        let m = Model::System(System::bernoulli());
        let a: ModelSet = MeasSet::Cylinder(CylinderSet::from_assignment(&[(0, false)]).unwrap()).into();
        let s = correlation_series(&m, &a, &a, -3..=3, None).unwrap();
        for (n, v) in s.ns.iter().zip(&s.values) {
            let want = if *n == 0 { q(1, 2) } else { q(1, 4) };
            assert_eq!(v, &Bounds::exact(want));
        }
        let c = cesaro_diagnostics(&s, 3, None).unwrap();
        assert_eq!(c.last_absdev(), &Bounds::zero());
    }
}
