//! Least-squares fit of `c_n(A,B) ≈ a_Θ·Θ(A,B) + Σ_k a_k c_k(A,B)` on the simplex.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{Model, ModelSet};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Q};

pub const MAX_POWERS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisTerm {
    Theta,
    Power(i64),
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTerm::Theta => write!(f, "Theta"),
            BasisTerm::Power(k) => write!(f, "T^{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// The design matrix is rank deficient; the coefficients are one minimizer among many.
    RankDeficient,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakLimitFit {
    pub n: i64,
    pub basis: Vec<String>,
    #[serde(skip)]
    pub terms: Vec<BasisTerm>,
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub status: FitStatus,
    pub pairs: usize,
    /// Widest correlation interval that entered the fit.
    pub input_width: f64,
}

impl WeakLimitFit {
    pub fn coefficient(&self, term: BasisTerm) -> Option<f64> {
        self.terms.iter().position(|t| *t == term).map(|i| self.coefficients[i])
    }
}

#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub active: Vec<usize>,
    pub rank_deficient: bool,
}

/// `min ‖y − Xa‖²` over `a ≥ 0, Σa = 1`, by enumerating supports and solving
/// the equality-constrained problem on each. Among supports reaching the
/// minimum the lexicographically smallest wins.
pub fn solve_simplex_ls(x: &DMatrix<f64>, y: &DVector<f64>) -> SimplexSolution {
    let v = x.ncols();
    assert!(v >= 1 && v <= MAX_POWERS + 1);
    let rank = x.clone().svd(false, false).rank(1e-10 * x.norm().max(1.0));
    let mut supports: Vec<Vec<usize>> = (1u32..1 << v)
        .map(|mask| (0..v).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    supports.sort();
    let mut best: Option<SimplexSolution> = None;
    for s in supports {
        let Some(a) = solve_on_support(x, y, &s) else {
            continue;
        };
        let r = (y - x * &a).norm_squared();
        let better = match &best {
            None => true,
            Some(b) => r < b.residual - 1e-12 * b.residual.max(1e-12),
        };
        if better {
            best = Some(SimplexSolution {
                coefficients: a.iter().copied().collect(),
                residual: r,
                active: s,
                rank_deficient: rank < v,
            });
        }
    }
    best.expect("singletons are always feasible")
}

fn solve_on_support(x: &DMatrix<f64>, y: &DVector<f64>, s: &[usize]) -> Option<DVector<f64>> {
    let k = s.len();
    let xs = x.select_columns(s);
    let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
    let gram = xs.transpose() * &xs;
    kkt.view_mut((0, 0), (k, k)).copy_from(&(gram * 2.0));
    for i in 0..k {
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs.rows_mut(0, k).copy_from(&(xs.transpose() * y * 2.0));
    rhs[k] = 1.0;
    let sol = kkt.svd(true, true).solve(&rhs, 1e-13).ok()?;
    if (0..k).any(|i| sol[i] < -1e-12) {
        return None;
    }
    let mut a = DVector::<f64>::zeros(x.ncols());
    let total: f64 = (0..k).map(|i| sol[i].max(0.0)).sum();
    for (i, &col) in s.iter().enumerate() {
        a[col] = sol[i].max(0.0) / total;
    }
    Some(a)
}

/// Fits `Tⁿ` against `a_Θ Θ + Σ_{k∈K} a_k T^k` over a finite family of set pairs.
pub fn fit_weak_limit(
    model: &Model,
    n: i64,
    pairs: &[(ModelSet, ModelSet)],
    powers: &[i64],
    with_theta: bool,
    tol: Option<&Q>,
) -> Result<WeakLimitFit> {
    if powers.len() > MAX_POWERS {
        return Err(Error::domain(format!("at most {MAX_POWERS} powers in the basis")));
    }
    let mut terms: Vec<BasisTerm> = Vec::new();
    if with_theta {
        terms.push(BasisTerm::Theta);
    }
    terms.extend(powers.iter().map(|&k| BasisTerm::Power(k)));
    if terms.is_empty() {
        return Err(Error::domain("empty basis"));
    }
    if pairs.len() < terms.len() {
        return Err(Error::domain(format!(
            "{} basis terms need at least {} test pairs, got {}",
            terms.len(),
            terms.len(),
            pairs.len()
        )));
    }
    let mut lags: Vec<i64> = powers.to_vec();
    lags.push(n);
    lags.sort_unstable();
    lags.dedup();
    let mut x = DMatrix::<f64>::zeros(pairs.len(), terms.len());
    let mut y = DVector::<f64>::zeros(pairs.len());
    let mut width: f64 = 0.0;
    for (p, (a, b)) in pairs.iter().enumerate() {
        let vals = model.meets(a, b, &lags, tol)?;
        let at = |k: i64| &vals[lags.binary_search(&k).unwrap()];
        for v in &vals {
            width = width.max(to_f64(&v.width()));
        }
        y[p] = at(n).mid_f64();
        for (t, term) in terms.iter().enumerate() {
            x[(p, t)] = match term {
                BasisTerm::Theta => model.theta(a, b)?.mid_f64(),
                BasisTerm::Power(k) => at(*k).mid_f64(),
            };
        }
    }
    let sol = solve_simplex_ls(&x, &y);
    Ok(WeakLimitFit {
        n,
        basis: terms.iter().map(|t| t.to_string()).collect(),
        terms,
        coefficients: sol.coefficients,
        residual: sol.residual,
        status: if sol.rank_deficient {
            FitStatus::RankDeficient
        } else {
            FitStatus::Ok
        },
        pairs: pairs.len(),
        input_width: width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_convex_combination() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 0.2, 0.0, 1.0, 0.3, 0.5, 0.5, 0.1, 0.2, 0.9, 0.7]);
        let a = DVector::from_vec(vec![0.25, 0.75, 0.0]);
        let y = &x * &a;
        let s = solve_simplex_ls(&x, &y);
        assert!((s.coefficients[0] - 0.25).abs() < 1e-10);
        assert!((s.coefficients[1] - 0.75).abs() < 1e-10);
        assert!(s.residual < 1e-20);
        assert!(!s.rank_deficient);
    }

    #[test]
    fn projects_outside_points_onto_simplex() {
        let x = DMatrix::identity(2, 2);
        let y = DVector::from_vec(vec![2.0, -1.0]);
        let s = solve_simplex_ls(&x, &y);
        assert_eq!(s.coefficients, vec![1.0, 0.0]);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn duplicate_columns_flagged() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.5, 0.5, 0.2, 0.2]);
        let y = DVector::from_vec(vec![1.0, 0.5, 0.2]);
        let s = solve_simplex_ls(&x, &y);
        assert!(s.rank_deficient);
        assert_eq!(s.active, vec![0]);
    }
}
