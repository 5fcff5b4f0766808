//! Measures of shifted intersections `μ(TⁿA ∩ B)` of level sets.
//!
//! At stage `J` the map `Tⁿ` sends level `x` to level `x + n` whenever both
//! lie in the tower, so the resolved part of the meet is `C_J(n)·w_J` where
//! `C_J(m)` counts pairs `x ∈ A_J, x + m ∈ B_J`. Counting is done without
//! materializing `A_J`:
//!
//! `C_{k+1}(m) = Σ_{i,i'} C_k(m + offset_i − offset_{i'})`,
//!
//! keeping only the terms with `|m + offset_i − offset_{i'}| < h_k`. The
//! levels of `A_J` whose orbit leaves the tower form the residual.

use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;

use super::{LevelSet, RankOne};
use crate::error::{Error, Result};
use crate::rational::{min_q, q_u128, Bounds, Q};

#[derive(Clone, Debug, Serialize)]
pub struct MeetResult {
    pub bounds: Bounds,
    /// Stage at which the bounds were obtained.
    pub stage: usize,
}

/// Shared state for repeated meets of one pair `(A, B)`.
pub struct Correlator<'a> {
    eng: &'a RankOne,
    a: LevelSet,
    b: LevelSet,
    base: usize,
    base_a: Vec<u128>,
    base_b: Vec<u64>,
    memo: HashMap<(usize, i128), u128>,
    mu_b: Q,
}

impl<'a> Correlator<'a> {
    pub fn new(eng: &'a RankOne, a: &LevelSet, b: &LevelSet) -> Result<Self> {
        eng.validate(a)?;
        eng.validate(b)?;
        let base = a.stage.max(b.stage);
        let base_a = eng.refine(a, base)?.levels;
        let b_ref = eng.refine(b, base)?;
        let h = eng.stage(base).h as usize;
        let mut base_b = vec![0u64; h.div_ceil(64)];
        for &l in &b_ref.levels {
            base_b[(l / 64) as usize] |= 1 << (l % 64);
        }
        Ok(Correlator {
            eng,
            a: a.clone(),
            b: b.clone(),
            base,
            base_a,
            base_b,
            memo: HashMap::new(),
            mu_b: eng.measure(b),
        })
    }

    /// First stage at which both sets are expressed.
    pub fn base_stage(&self) -> usize {
        self.base
    }

    pub fn default_tol(&self) -> Q {
        self.eng.stage(self.base).total.clone() / q_u128(1u128 << 40)
    }

    fn in_b(&self, l: i128) -> bool {
        l >= 0 && {
            let l = l as usize;
            l / 64 < self.base_b.len() && self.base_b[l / 64] >> (l % 64) & 1 == 1
        }
    }

    /// `C_k(m)`: number of stage-`k` levels `x ∈ A` with `x + m ∈ B`.
    fn count(&mut self, k: usize, m: i128) -> u128 {
        let h = self.eng.stage(k).h as i128;
        if m >= h || m <= -h {
            return 0;
        }
        if let Some(&c) = self.memo.get(&(k, m)) {
            return c;
        }
        let c = if k == self.base {
            self.base_a.iter().filter(|&&x| self.in_b(x as i128 + m)).count() as u128
        } else {
            let h_below = self.eng.stage(k - 1).h as i128;
            let offsets: Vec<i128> = self.eng.cut(k - 1).offsets.iter().map(|&o| o as i128).collect();
            let mut total = 0u128;
            for &oi in &offsets {
                // need |m + oi − oj| < h_below, i.e. oj ∈ (m + oi − h_below, m + oi + h_below)
                let lo = m + oi - h_below;
                let hi = m + oi + h_below;
                let start = offsets.partition_point(|&o| o <= lo);
                for &oj in offsets[start..].iter().take_while(|&&o| o < hi) {
                    total += self.count(k - 1, m + oi - oj);
                }
            }
            total
        };
        self.memo.insert((k, m), c);
        c
    }

    /// Number of stage-`k` levels of `A` that are `≥ t`.
    fn count_ge(&self, k: usize, t: i128) -> u128 {
        let st = self.eng.stage(k);
        let full = self.a.levels.len() as u128 * self.multiplicity(k);
        if t <= 0 {
            return full;
        }
        if t >= st.h as i128 {
            return 0;
        }
        if k == self.a.stage {
            let idx = self.a.levels.partition_point(|&l| (l as i128) < t);
            return (self.a.levels.len() - idx) as u128;
        }
        self.eng
            .cut(k - 1)
            .offsets
            .iter()
            .map(|&o| self.count_ge(k - 1, t - o as i128))
            .sum()
    }

    /// `Π_{a ≤ k' < k} r_{k'}`: copies of each `A` level at stage `k`.
    fn multiplicity(&self, k: usize) -> u128 {
        (self.a.stage..k).map(|k| self.eng.cut(k).r as u128).product()
    }

    /// Levels of `A` at stage `k` whose `n`-step orbit leaves the tower.
    fn unresolved(&self, k: usize, n: i128) -> u128 {
        let h = self.eng.stage(k).h as i128;
        if n >= 0 {
            self.count_ge(k, h - n)
        } else {
            self.count_ge(k, 0) - self.count_ge(k, -n)
        }
    }

    /// Bounds on `μ(TⁿA ∩ B)` using the stage-`stage` tower.
    pub fn bounds_at(&mut self, n: i128, stage: usize) -> Result<Bounds> {
        if stage < self.base {
            return Err(Error::domain(format!(
                "stage {stage} is coarser than the sets (stage {})",
                self.base
            )));
        }
        self.eng.check_stage(stage)?;
        let w = self.eng.stage(stage).width.clone();
        let lo = &w * q_u128(self.count(stage, n));
        let slack = &w * q_u128(self.unresolved(stage, n));
        let room = &self.mu_b - &lo;
        let hi = &lo + min_q(&slack, &room);
        Ok(Bounds::new(lo, hi))
    }

    /// Refines until `hi − lo ≤ tol`; on failure the error carries the best bounds.
    pub fn meet(&mut self, n: i128, tol: &Q) -> Result<MeetResult> {
        if *tol <= Q::zero() {
            return Err(Error::domain("tolerance must be positive"));
        }
        let mut best = None;
        for stage in self.base..=self.eng.max_stage() {
            let b = self.bounds_at(n, stage)?;
            if b.width() <= *tol {
                return Ok(MeetResult { bounds: b, stage });
            }
            best = Some(b);
        }
        Err(Error::Resource {
            message: format!(
                "tolerance not reached for n = {n} on {} {} by stage {}",
                self.a,
                self.b,
                self.eng.max_stage()
            ),
            best,
        })
    }
}

/// Certified bounds on `μ(TⁿA ∩ B)`; `tol` defaults to `m_j·2^{-40}` at the sets' stage.
pub fn shifted_meet(
    eng: &RankOne,
    a: &LevelSet,
    b: &LevelSet,
    n: i128,
    tol: Option<&Q>,
) -> Result<MeetResult> {
    let mut c = Correlator::new(eng, a, b)?;
    let tol = tol.cloned().unwrap_or_else(|| c.default_tol());
    c.meet(n, &tol)
}

/// Largest stage-`J` level list `multi_meet` will materialize.
pub const MULTI_LEVEL_CAP: u128 = 1 << 23;

/// Bounds on `μ(A_0 ∩ T^{n_1}A_1 ∩ … ∩ T^{n_k}A_k)`, refining while the
/// tower stays below the level cap or until the width is at most `tol`.
pub fn multi_meet(eng: &RankOne, sets: &[LevelSet], shifts: &[i128], tol: &Q) -> Result<MeetResult> {
    if sets.is_empty() || sets.len() != shifts.len() + 1 {
        return Err(Error::domain("multi_meet needs sets A_0..A_k and shifts n_1..n_k"));
    }
    for s in sets {
        eng.validate(s)?;
    }
    let base = sets.iter().map(|s| s.stage).max().unwrap();
    let mut best: Option<MeetResult> = None;
    let mut stage = base;
    while stage <= eng.max_stage() && eng.stage(stage).h <= MULTI_LEVEL_CAP {
        let h = eng.stage(stage).h as i128;
        let a0 = eng.refine(&sets[0], stage)?;
        let bits: Vec<Vec<u64>> = sets[1..]
            .iter()
            .map(|s| {
                let mut v = vec![0u64; (h as usize).div_ceil(64)];
                for &l in &eng.refine(s, stage).expect("validated").levels {
                    v[(l / 64) as usize] |= 1 << (l % 64);
                }
                v
            })
            .collect();
        let (mut hit, mut open) = (0u128, 0u128);
        for &y in &a0.levels {
            let mut unknown = false;
            let mut ok = true;
            for (bv, &n) in bits.iter().zip(shifts) {
                let x = y as i128 - n;
                if x < 0 || x >= h {
                    unknown = true;
                } else if bv[x as usize / 64] >> (x as usize % 64) & 1 == 0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                if unknown {
                    open += 1;
                } else {
                    hit += 1;
                }
            }
        }
        let w = &eng.stage(stage).width;
        let lo = w * q_u128(hit);
        let hi = w * q_u128(hit + open);
        let res = MeetResult {
            bounds: Bounds::new(lo, hi),
            stage,
        };
        if res.bounds.width() <= *tol {
            return Ok(res);
        }
        best = Some(res);
        stage += 1;
    }
    best.ok_or_else(|| Error::resource("sets too fine for the multi-meet level cap"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank_one::RankOneSpec;
    use crate::rational::q;

    #[test]
    fn identity_shift() {
        let eng = RankOne::new(RankOneSpec::Katok);
        let a = eng.level_set(3, vec![0, 4, 5]).unwrap();
        let r = shifted_meet(&eng, &a, &a, 0, None).unwrap();
        assert_eq!(r.bounds, Bounds::exact(eng.measure(&a)));
    }

    #[test]
    fn staircase_return_is_partial() {
        let eng = RankOne::new(RankOneSpec::Staircase);
        // the base alone never returns after h_3 steps (every column gets spacers)
        let base = eng.level_set(3, vec![0]).unwrap();
        let r = shifted_meet(&eng, &base, &base, 21, None).unwrap();
        assert_eq!(r.bounds, Bounds::zero());
        let a = eng.tower(3).unwrap();
        let r = shifted_meet(&eng, &a, &a, 21, None).unwrap();
        assert!(r.bounds.lo > Q::zero());
        assert!(r.bounds.hi < eng.measure(&a));
    }

    #[test]
    fn infinite_l_translates_disjoint() {
        let eng = RankOne::new(RankOneSpec::InfiniteL);
        let a = eng.level_set(1, vec![0]).unwrap();
        let mut c = Correlator::new(&eng, &a, &a).unwrap();
        let b = c.bounds_at(114, 4).unwrap();
        assert_eq!(b, Bounds::zero());
        assert_eq!(eng.measure(&a), q(1, 1));
    }

    #[test]
    fn multi_meet_pairs_agree() {
        let eng = RankOne::new(RankOneSpec::Katok);
        let a = eng.level_set(2, vec![0, 1]).unwrap();
        let b = eng.level_set(2, vec![1, 2]).unwrap();
        let tol = q(1, 1 << 20);
        let m = multi_meet(&eng, &[b.clone(), a.clone()], &[3], &tol).unwrap();
        let s = shifted_meet(&eng, &a, &b, 3, Some(&tol)).unwrap();
        assert!(m.bounds.lo <= s.bounds.hi && s.bounds.lo <= m.bounds.hi);
    }
}
