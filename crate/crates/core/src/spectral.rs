//! Spectral measure of a simple function from its autocovariances
//! `σ̂(i) = ⟨Uⁱf, f⟩`: Fejér densities, Wiener atom estimates, eigenvalue scans.
//!
//! Angles are in `[0, 2π)`; the spectral variable is `z = e^{iθ}`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Model, ModelSet};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, Bounds, Q};

pub const DEFAULT_GRID: usize = 4096;

/// `f = Σ q_k χ_{S_k}`, optionally minus its mean.
#[derive(Clone, Debug)]
pub struct FunctionSpec {
    pub terms: Vec<(Q, ModelSet)>,
    pub center: bool,
}

impl FunctionSpec {
    pub fn indicator(s: ModelSet, center: bool) -> Self {
        FunctionSpec {
            terms: vec![(Q::one(), s)],
            center,
        }
    }

    /// `∫ f dμ` over the normalized measure.
    pub fn mean(&self, model: &Model) -> Result<Bounds> {
        let mut raw = Q::zero();
        for (c, s) in &self.terms {
            raw += c * model.measure(s)?;
        }
        Ok(Bounds::exact(raw).div_pos(&model.total_measure()?))
    }

    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, s)| format!("{}*[{}]", fmt_q(c), s))
            .collect();
        if self.center {
            parts.push("-mean".into());
        }
        parts.join(" + ")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Autocovariance {
    /// `values[i] = σ̂(i)` for `0 ≤ i ≤ N`; `σ̂(−i) = σ̂(i)` since `f` is real.
    pub values: Vec<Bounds>,
    pub exact: bool,
}

impl Autocovariance {
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let values = values
            .iter()
            .map(|&v| crate::rational::from_f64(v).map(Bounds::exact))
            .collect::<Result<_>>()?;
        Ok(Autocovariance { values, exact: false })
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn at(&self, i: i64) -> f64 {
        self.values[i.unsigned_abs() as usize].mid_f64()
    }

    fn floats(&self) -> Vec<f64> {
        self.values.iter().map(Bounds::mid_f64).collect()
    }
}

/// `σ̂(i) = Σ_{k,l} q_k q_l μ(TⁱS_k ∩ S_l)/μ(X) − (mean²)` for `i = 0..=N`.
pub fn autocovariance(model: &Model, f: &FunctionSpec, big_n: usize, tol: Option<&Q>) -> Result<Autocovariance> {
    if big_n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let norm = match model.total_measure() {
        Ok(m) => m,
        Err(e) if f.center => return Err(e),
        Err(_) => Bounds::exact(Q::one()),
    };
    let ns: Vec<i64> = (0..=big_n as i64).collect();
    let mut values = vec![Bounds::zero(); big_n + 1];
    for (ck, sk) in &f.terms {
        for (cl, sl) in &f.terms {
            let coef = ck * cl;
            for (v, c) in values.iter_mut().zip(model.meets(sk, sl, &ns, tol)?) {
                *v = v.add(&c.scale(&coef));
            }
        }
    }
    let mean_sq = if f.center {
        let m = f.mean(model)?;
        Some(m.mul(&m))
    } else {
        None
    };
    let values: Vec<Bounds> = values
        .into_iter()
        .map(|v| {
            let v = v.div_pos(&norm);
            match &mean_sq {
                Some(m) => v.sub(m),
                None => v,
            }
        })
        .collect();
    Ok(Autocovariance {
        exact: values.iter().all(Bounds::is_exact),
        values,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralDensity {
    pub n: usize,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
}

impl SpectralDensity {
    pub fn mean(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.rho.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `ρ_N(θ) = Σ_{|i|<N} (1 − |i|/N) σ̂(i) e^{−iiθ}` on `M` equally spaced angles.
pub fn fejer_density(ac: &Autocovariance, big_n: usize, grid: usize) -> Result<SpectralDensity> {
    if big_n == 0 || grid == 0 {
        return Err(Error::domain("N and M must be positive"));
    }
    if ac.max_lag() + 1 < big_n {
        return Err(Error::domain(format!(
            "Fejér order {big_n} needs lags below {big_n}, have up to {}",
            ac.max_lag()
        )));
    }
    let s = ac.floats();
    let nf = big_n as f64;
    let theta: Vec<f64> = (0..grid).map(|k| TAU * k as f64 / grid as f64).collect();
    let rho = theta
        .par_iter()
        .map(|&t| {
            let tail: f64 = (1..big_n)
                .map(|i| (1.0 - i as f64 / nf) * s[i] * (i as f64 * t).cos())
                .sum();
            s[0] + 2.0 * tail
        })
        .collect();
    Ok(SpectralDensity { n: big_n, theta, rho })
}

/// `(1/N)|Σ_{i=1}^N σ̂(i) e^{−i·angle·i}|`, the mass estimate of an atom at `e^{i·angle}`.
pub fn wiener_atom(ac: &Autocovariance, angle: f64, big_n: usize) -> Result<f64> {
    if big_n == 0 || ac.max_lag() < big_n {
        return Err(Error::domain(format!(
            "Wiener average over 1..{big_n} needs lags up to {big_n}, have {}",
            ac.max_lag()
        )));
    }
    Ok(wiener_floats(&ac.floats(), angle, big_n))
}

fn wiener_floats(s: &[f64], angle: f64, big_n: usize) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in s.iter().enumerate().take(big_n + 1).skip(1) {
        let (sn, cs) = (i as f64 * angle).sin_cos();
        re += v * cs;
        im -= v * sn;
    }
    re.hypot(im) / big_n as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureCheck {
    pub alpha: f64,
    pub beta: f64,
    pub sum: f64,
    pub present: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenScan {
    pub n: usize,
    pub grid: usize,
    pub threshold: f64,
    pub atoms: Vec<Atom>,
    pub closure: Vec<ClosureCheck>,
    /// Every detected sum (and the identity angle) is itself detected.
    pub closed: bool,
}

/// Atoms whose Wiener estimate exceeds `threshold`, plus the closure report
/// for all detected pairs.
///
/// Candidates are grid local maxima above `threshold/2`; each is refined to
/// the best angle within one grid step, kept if the refined estimate clears
/// `threshold`, peaks closer than `3·2π/N` are merged into the strongest,
/// and weaker peaks explained by kernel leakage from stronger atoms are dropped. Angle 0 counts as present in closure checks:
/// the eigenvalue 1 always exists, even when `f` has no mass on constants.
pub fn eigen_scan(ac: &Autocovariance, big_n: usize, grid: usize, threshold: f64) -> Result<EigenScan> {
    if threshold <= 0.0 || grid < 3 {
        return Err(Error::domain("threshold must be positive and the grid at least 3"));
    }
    wiener_atom(ac, 0.0, big_n)?;
    let s = ac.floats();
    let step = TAU / grid as f64;
    let est: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|k| wiener_floats(&s, step * k as f64, big_n))
        .collect();
    let mut peaks: Vec<Atom> = (0..grid)
        .into_par_iter()
        .filter(|&k| {
            let (prev, next) = (est[(k + grid - 1) % grid], est[(k + 1) % grid]);
            est[k] > 0.5 * threshold && est[k] >= prev && est[k] >= next
        })
        .map(|k| refine_peak(&s, big_n, step * k as f64, step))
        .filter(|a| a.mass > threshold)
        .collect();
    peaks.sort_by(|a, b| b.mass.total_cmp(&a.mass).then(a.angle.total_cmp(&b.angle)));
    let merge = (3.0 * TAU / big_n as f64).max(1.5 * step);
    let mut atoms: Vec<Atom> = Vec::new();
    for p in peaks {
        if atoms.iter().any(|a| circ_dist(a.angle, p.angle) <= merge) {
            continue;
        }
        // An atom of mass m leaks at most m·min(1, 1/(N|sin(d/2)|)) into the
        // estimate at distance d; peaks within twice that are side lobes.
        let leak: f64 = atoms
            .iter()
            .map(|a| {
                let d = circ_dist(a.angle, p.angle);
                a.mass * (1.0 / (big_n as f64 * (d / 2.0).sin())).min(1.0)
            })
            .sum();
        if p.mass > 2.0 * leak {
            atoms.push(p);
        }
    }
    atoms.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let tol = merge;
    let present = |x: f64| circ_dist(x, 0.0) <= tol || atoms.iter().any(|a| circ_dist(a.angle, x) <= tol);
    let mut closure = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i..] {
            let sum = (a.angle + b.angle).rem_euclid(TAU);
            closure.push(ClosureCheck {
                alpha: a.angle,
                beta: b.angle,
                sum,
                present: present(sum),
            });
        }
    }
    let inverses = atoms.iter().all(|a| present((TAU - a.angle).rem_euclid(TAU)));
    Ok(EigenScan {
        n: big_n,
        grid,
        threshold,
        closed: inverses && closure.iter().all(|c| c.present),
        atoms,
        closure,
    })
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Best estimate on a fine sub-grid within one grid step of `center`.
fn refine_peak(s: &[f64], big_n: usize, center: f64, step: f64) -> Atom {
    const SUB: i32 = 32;
    (-SUB..=SUB)
        .map(|t| {
            let angle = (center + step * t as f64 / SUB as f64).rem_euclid(TAU);
            Atom {
                angle,
                mass: wiener_floats(s, angle, big_n),
            }
        })
        .fold(
            Atom {
                angle: center,
                mass: f64::NEG_INFINITY,
            },
            |best, a| if a.mass > best.mass { a } else { best },
        )
}

/// Smallest eigenvalue of the `size × size` Toeplitz matrix `[σ̂(i − j)]`.
pub fn toeplitz_min_eig(ac: &Autocovariance, size: usize) -> Result<f64> {
    if size == 0 || ac.max_lag() + 1 < size {
        return Err(Error::domain("not enough lags for the Toeplitz matrix"));
    }
    let m = DMatrix::from_fn(size, size, |i, j| ac.at(i as i64 - j as i64));
    Ok(SymmetricEigen::new(m).eigenvalues.min())
}
