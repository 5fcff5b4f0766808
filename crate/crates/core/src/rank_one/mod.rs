//! Rank-one cutting and stacking.
//!
//! Stage `j` is a tower of `h_j` levels of width `w_j`. Going to stage `j+1`
//! the base is cut into `r_j` columns, column `i` receives `s_j(i)` spacer
//! levels on top and the columns are stacked left to right, so level `l` of
//! stage `j` reappears at levels `offset_i + l` with `offset_1 = 0` and
//! `offset_{i+1} = offset_i + h_j + s_j(i)`.
//!
//! Geometry: `E_1 = [0, 1)` and every new spacer interval is placed at the
//! next free position of the ray, so the stage-`j` tower is exactly
//! `[0, m_j)` with `m_j = w_j h_j`.

pub mod layout;
mod meet;
pub mod spec;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

pub use meet::{multi_meet, shifted_meet, Correlator, MeetResult};
pub use spec::RankOneSpec;

use crate::error::{Error, Result};
use crate::rational::{q_u128, ser_q, Bounds, Q};
use crate::sets::{Ambient, RationalIntervalSet};

pub const DEFAULT_STAGE_CAP: usize = 24;
/// Largest level set `refine` will materialize.
pub const LEVEL_CAP: usize = 1 << 24;

/// Cut data taking stage `j` to stage `j + 1`.
#[derive(Clone, Debug)]
pub(crate) struct Cut {
    pub r: u64,
    pub spacers: Vec<u128>,
    pub offsets: Vec<u128>,
    pub spacer_total: u128,
}

#[derive(Clone, Debug)]
pub(crate) struct Stage {
    pub h: u128,
    pub width: Q,
    pub total: Q,
    pub cut: Option<Cut>,
}

/// A rank-one construction with its stages precomputed up to a cap.
#[derive(Clone, Debug)]
pub struct RankOne {
    spec: RankOneSpec,
    stages: Vec<Stage>,
    cap: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub j: usize,
    pub h: u128,
    #[serde(serialize_with = "ser_q")]
    pub width: Q,
    #[serde(serialize_with = "ser_q")]
    pub total: Q,
    pub cuts: Option<u64>,
    pub spacers: Vec<u128>,
    pub offsets: Vec<u128>,
    #[serde(serialize_with = "ser_set")]
    pub support: RationalIntervalSet,
}

fn ser_set<S: serde::Serializer>(s: &RationalIntervalSet, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&s.to_string())
}

/// Levels of the stage-`stage` tower.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelSet {
    pub stage: usize,
    levels: Vec<u128>,
}

impl LevelSet {
    pub fn new(stage: usize, mut levels: Vec<u128>) -> Self {
        levels.sort_unstable();
        levels.dedup();
        LevelSet { stage, levels }
    }

    pub fn levels(&self) -> &[u128] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, l: u128) -> bool {
        self.levels.binary_search(&l).is_ok()
    }

    /// Parses `@3:0,2,5-9` (stage 3; ranges inclusive).
    pub fn parse(text: &str) -> Result<Self> {
        let body = text
            .trim()
            .strip_prefix('@')
            .ok_or_else(|| Error::parse(format!("level set must start with '@', got {text:?}")))?;
        let (stage, list) = body
            .split_once(':')
            .ok_or_else(|| Error::parse("expected `@stage:levels`"))?;
        let stage: usize = stage
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad stage {stage:?}")))?;
        if stage == 0 {
            return Err(Error::parse("stages start at 1"));
        }
        let mut levels = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let num = |s: &str| -> Result<u128> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad level {s:?}")))
            };
            match item.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b)?);
                    if b < a || b - a > LEVEL_CAP as u128 {
                        return Err(Error::parse(format!("bad level range {item:?}")));
                    }
                    levels.extend(a..=b);
                }
                None => levels.push(num(item)?),
            }
        }
        Ok(LevelSet::new(stage, levels))
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.levels.len() {
            let start = self.levels[i];
            let mut end = start;
            while i + 1 < self.levels.len() && self.levels[i + 1] == end + 1 {
                i += 1;
                end += 1;
            }
            parts.push(if end == start {
                start.to_string()
            } else {
                format!("{start}-{end}")
            });
            i += 1;
        }
        write!(f, "@{}:{}", self.stage, parts.join(","))
    }
}

impl RankOne {
    pub fn new(spec: RankOneSpec) -> Self {
        Self::with_cap(spec, DEFAULT_STAGE_CAP)
    }

    /// Precomputes stages `1..=cap`, stopping early at the end of a custom
    /// table or when heights leave `u128`.
    pub fn with_cap(spec: RankOneSpec, cap: usize) -> Self {
        let mut stages = vec![Stage {
            h: 1,
            width: Q::one(),
            total: Q::one(),
            cut: None,
        }];
        while stages.len() < cap {
            let j = stages.len();
            let h = stages[j - 1].h;
            let (Some(r), Some(spacers)) = (spec.cut(j), spec.spacers(j, h)) else {
                break;
            };
            let Some(cut) = make_cut(h, r, spacers) else {
                break;
            };
            let Some(next_h) = h
                .checked_mul(r as u128)
                .and_then(|x| x.checked_add(cut.spacer_total))
            else {
                break;
            };
            let width = &stages[j - 1].width / BigRational::from_integer(BigInt::from(r));
            let total = &width * q_u128(next_h);
            stages[j - 1].cut = Some(cut);
            stages.push(Stage {
                h: next_h,
                width,
                total,
                cut: None,
            });
        }
        RankOne { spec, stages, cap }
    }

    pub fn spec(&self) -> &RankOneSpec {
        &self.spec
    }

    pub fn stage_cap(&self) -> usize {
        self.cap
    }

    /// Deepest stage available.
    pub fn max_stage(&self) -> usize {
        self.stages.len()
    }

    pub(crate) fn stage(&self, j: usize) -> &Stage {
        &self.stages[j - 1]
    }

    pub(crate) fn cut(&self, j: usize) -> &Cut {
        self.stages[j - 1]
            .cut
            .as_ref()
            .expect("cut requested below the deepest stage")
    }

    fn check_stage(&self, j: usize) -> Result<()> {
        if j == 0 {
            return Err(Error::domain("stages start at 1"));
        }
        if j > self.max_stage() {
            return Err(Error::resource(format!(
                "stage {j} beyond the deepest available stage {} of {}",
                self.max_stage(),
                self.spec
            )));
        }
        Ok(())
    }

    pub fn height(&self, j: usize) -> Result<u128> {
        self.check_stage(j)?;
        Ok(self.stage(j).h)
    }

    pub fn width(&self, j: usize) -> Result<Q> {
        self.check_stage(j)?;
        Ok(self.stage(j).width.clone())
    }

    pub fn total(&self, j: usize) -> Result<Q> {
        self.check_stage(j)?;
        Ok(self.stage(j).total.clone())
    }

    pub fn build_stage(&self, j: usize) -> Result<StageSummary> {
        self.check_stage(j)?;
        let st = self.stage(j);
        let (cuts, spacers, offsets) = match &st.cut {
            Some(c) => (Some(c.r), c.spacers.clone(), c.offsets.clone()),
            None => (self.spec.cut(j), Vec::new(), Vec::new()),
        };
        Ok(StageSummary {
            j,
            h: st.h,
            width: st.width.clone(),
            total: st.total.clone(),
            cuts,
            spacers,
            offsets,
            support: RationalIntervalSet::interval(Q::zero(), st.total.clone(), Ambient::Ray)?,
        })
    }

    pub fn level_set(&self, stage: usize, levels: Vec<u128>) -> Result<LevelSet> {
        self.check_stage(stage)?;
        let h = self.stage(stage).h;
        if let Some(bad) = levels.iter().find(|&&l| l >= h) {
            return Err(Error::domain(format!(
                "level {bad} outside the stage-{stage} tower of height {h}"
            )));
        }
        Ok(LevelSet::new(stage, levels))
    }

    pub fn validate(&self, ls: &LevelSet) -> Result<()> {
        self.check_stage(ls.stage)?;
        let h = self.stage(ls.stage).h;
        match ls.levels.last() {
            Some(&l) if l >= h => Err(Error::domain(format!(
                "level {l} outside the stage-{} tower of height {h}",
                ls.stage
            ))),
            _ => Ok(()),
        }
    }

    /// All levels of the stage-`j` tower.
    pub fn tower(&self, j: usize) -> Result<LevelSet> {
        let h = self.height(j)?;
        if h > LEVEL_CAP as u128 {
            return Err(Error::resource("tower too tall to list"));
        }
        Ok(LevelSet::new(j, (0..h).collect()))
    }

    pub fn measure(&self, ls: &LevelSet) -> Q {
        &self.stage(ls.stage).width * q_u128(ls.levels.len() as u128)
    }

    /// Same set expressed through the levels of a deeper stage.
    pub fn refine(&self, ls: &LevelSet, to_stage: usize) -> Result<LevelSet> {
        self.validate(ls)?;
        if to_stage < ls.stage {
            return Err(Error::domain("refine cannot go to an earlier stage"));
        }
        self.check_stage(to_stage)?;
        let mut levels = ls.levels.clone();
        for k in ls.stage..to_stage {
            let cut = self.cut(k);
            let n = levels.len().saturating_mul(cut.r as usize);
            if n > LEVEL_CAP {
                return Err(Error::resource(format!(
                    "refinement to stage {to_stage} needs {n} levels (cap {LEVEL_CAP})"
                )));
            }
            let mut next = Vec::with_capacity(n);
            for off in &cut.offsets {
                next.extend(levels.iter().map(|l| l + off));
            }
            next.sort_unstable();
            levels = next;
        }
        Ok(LevelSet::new(to_stage, levels))
    }

    /// Left endpoint of level `l` of stage `j` on the ray.
    pub fn level_left(&self, j: usize, l: u128) -> Result<Q> {
        self.check_stage(j)?;
        if l >= self.stage(j).h {
            return Err(Error::domain("level outside tower"));
        }
        let mut acc = Q::zero();
        let (mut j, mut l) = (j, l);
        while j > 1 {
            let below = self.stage(j - 1);
            let cut = self.cut(j - 1);
            let w = &self.stage(j).width;
            let i = cut.offsets.partition_point(|&o| o <= l) - 1;
            let rel = l - cut.offsets[i];
            if rel < below.h {
                acc += w * q_u128(i as u128);
                l = rel;
                j -= 1;
            } else {
                let before: u128 = cut.spacers[..i].iter().sum();
                let idx = before + (rel - below.h);
                return Ok(acc + &below.total + w * q_u128(idx));
            }
        }
        Ok(acc)
    }

    pub fn level_interval(&self, j: usize, l: u128) -> Result<(Q, Q)> {
        let left = self.level_left(j, l)?;
        let right = &left + &self.stage(j).width;
        Ok((left, right))
    }

    /// The level set as a union of intervals of the ray.
    pub fn to_intervals(&self, ls: &LevelSet) -> Result<RationalIntervalSet> {
        self.validate(ls)?;
        let pieces: Result<Vec<(Q, Q)>> = ls
            .levels
            .iter()
            .map(|&l| self.level_interval(ls.stage, l))
            .collect();
        RationalIntervalSet::from_pieces(pieces?, Ambient::Ray)
    }

    /// Certified bounds on the total measure `m_∞` for the finite-measure presets.
    pub fn total_measure(&self) -> Result<Bounds> {
        const K: usize = 20;
        let ratio_bound = |k: usize| -> Q {
            let k = k as i64;
            match self.spec {
                RankOneSpec::Staircase => crate::rational::q(k + 3, (k + 1) * (k + 2)),
                RankOneSpec::Katok => crate::rational::q(1, 2 * k),
                _ => unreachable!(),
            }
        };
        match self.spec {
            RankOneSpec::Staircase | RankOneSpec::Katok => {
                // m_K = 1 + Σ_{k<K} t_k with t_k = w_{k+1} Σ_i s_k(i); the term ratio
                // t_{k+1}/t_k is nonincreasing, so the tail is at most t_K / (1 - ρ_K).
                let mut width = Q::one();
                let mut mass = Q::one();
                let mut term = Q::zero();
                for k in 1..=K {
                    let r = self.spec.cut(k).expect("preset defined everywhere");
                    width /= BigRational::from_integer(BigInt::from(r));
                    let s: u128 = self.spec.spacers(k, 0).expect("preset").iter().sum();
                    term = &width * q_u128(s);
                    if k < K {
                        mass += &term;
                    }
                }
                let tail = &term / (Q::one() - ratio_bound(K));
                Ok(Bounds::new(mass.clone(), mass + tail))
            }
            RankOneSpec::InfiniteL => Err(Error::domain(
                "infinite_L has infinite total measure; use un-normalized stage totals",
            )),
            RankOneSpec::Custom { .. } => Err(Error::domain(
                "total measure of a custom table is not certified; use un-normalized stage totals",
            )),
        }
    }

    /// Exact lower bound on the fraction of the normalized space covered by the stage-`j` tower.
    pub fn tower_cover(&self, j: usize) -> Result<Q> {
        let m_inf = self.total_measure()?;
        let m_j = self.total(j)?;
        Ok(m_j / m_inf.hi)
    }
}

fn make_cut(h: u128, r: u64, spacers: Vec<u128>) -> Option<Cut> {
    let mut offsets = Vec::with_capacity(r as usize);
    let mut off = 0u128;
    for (i, s) in spacers.iter().enumerate() {
        offsets.push(off);
        if i + 1 < spacers.len() {
            off = off.checked_add(h)?.checked_add(*s)?;
        }
    }
    let spacer_total = spacers.iter().try_fold(0u128, |a, s| a.checked_add(*s))?;
    Some(Cut {
        r,
        spacers,
        offsets,
        spacer_total,
    })
}
