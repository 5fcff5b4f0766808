//! One front for exact systems and rank-one constructions.

use std::fmt;

use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rank_one::{multi_meet, Correlator, LevelSet, RankOne};
use crate::rational::{Bounds, Q};
use crate::sets::{Family, MeasSet};
use crate::systems::System;

#[derive(Clone, Debug)]
pub enum Model {
    System(System),
    RankOne(RankOne),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModelSet {
    Meas(MeasSet),
    Levels(LevelSet),
}

impl fmt::Display for ModelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSet::Meas(s) => write!(f, "{s}"),
            ModelSet::Levels(l) => write!(f, "{l}"),
        }
    }
}

impl From<MeasSet> for ModelSet {
    fn from(s: MeasSet) -> Self {
        ModelSet::Meas(s)
    }
}

impl From<LevelSet> for ModelSet {
    fn from(s: LevelSet) -> Self {
        ModelSet::Levels(s)
    }
}

impl From<System> for Model {
    fn from(s: System) -> Self {
        Model::System(s)
    }
}

impl From<RankOne> for Model {
    fn from(r: RankOne) -> Self {
        Model::RankOne(r)
    }
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::System(s) => s.to_string(),
            Model::RankOne(r) => r.spec().to_string(),
        }
    }

    /// Whether meets are exact (`lo = hi`) rather than bounds.
    pub fn is_exact(&self) -> bool {
        matches!(self, Model::System(_))
    }

    /// Family of the sets this model acts on (`None` for level sets).
    pub fn family(&self) -> Option<Family> {
        match self {
            Model::System(s) => Some(s.family()),
            Model::RankOne(_) => None,
        }
    }

    pub fn parse_set(&self, text: &str) -> Result<ModelSet> {
        match self {
            Model::System(s) => Ok(ModelSet::Meas(MeasSet::parse(text, s.family())?)),
            Model::RankOne(r) => {
                let ls = LevelSet::parse(text)?;
                r.validate(&ls)?;
                Ok(ModelSet::Levels(ls))
            }
        }
    }

    pub fn measure(&self, s: &ModelSet) -> Result<Q> {
        match (self, s) {
            (Model::System(sys), ModelSet::Meas(m)) => {
                if m.family() != sys.family() {
                    return Err(mismatch());
                }
                Ok(m.measure())
            }
            (Model::RankOne(r), ModelSet::Levels(l)) => {
                r.validate(l)?;
                Ok(r.measure(l))
            }
            _ => Err(mismatch()),
        }
    }

    /// Total measure of the space: exactly 1 for probability systems,
    /// certified bounds for finite rank-one presets.
    pub fn total_measure(&self) -> Result<Bounds> {
        match self {
            Model::System(_) => Ok(Bounds::exact(Q::one())),
            Model::RankOne(r) => r.total_measure(),
        }
    }

    /// `μ(A)μ(B)/μ(X)`, the value `Θ` assigns to the pair.
    pub fn theta(&self, a: &ModelSet, b: &ModelSet) -> Result<Bounds> {
        let prod = Bounds::exact(self.measure(a)? * self.measure(b)?);
        Ok(prod.div_pos(&self.total_measure()?))
    }

    /// `μ(TⁿA ∩ B)`.
    pub fn meet(&self, a: &ModelSet, b: &ModelSet, n: i64, tol: Option<&Q>) -> Result<Bounds> {
        Ok(self.meets(a, b, &[n], tol)?.remove(0))
    }

    /// `μ(TⁿA ∩ B)` for each `n`, in input order. Parallel over `n`.
    pub fn meets(&self, a: &ModelSet, b: &ModelSet, ns: &[i64], tol: Option<&Q>) -> Result<Vec<Bounds>> {
        match (self, a, b) {
            (Model::System(sys), ModelSet::Meas(a), ModelSet::Meas(b)) => {
                if a.family() != sys.family() || b.family() != sys.family() {
                    return Err(mismatch());
                }
                ns.par_iter()
                    .map(|&n| Ok(Bounds::exact(sys.image(a, n)?.intersect(b)?.measure())))
                    .collect()
            }
            (Model::RankOne(r), ModelSet::Levels(a), ModelSet::Levels(b)) => {
                let chunk = ns.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
                let parts: Result<Vec<Vec<Bounds>>> = ns
                    .par_chunks(chunk)
                    .map(|part| {
                        let mut c = Correlator::new(r, a, b)?;
                        let tol = tol.cloned().unwrap_or_else(|| c.default_tol());
                        part.iter()
                            .map(|&n| Ok(c.meet(n as i128, &tol)?.bounds))
                            .collect()
                    })
                    .collect();
                Ok(parts?.into_iter().flatten().collect())
            }
            _ => Err(mismatch()),
        }
    }

    /// `μ(A_0 ∩ T^{n_1}A_1 ∩ … ∩ T^{n_k}A_k)`.
    pub fn multi_meet(&self, sets: &[ModelSet], shifts: &[i64], tol: Option<&Q>) -> Result<Bounds> {
        if sets.len() != shifts.len() + 1 {
            return Err(Error::domain("need one more set than shifts"));
        }
        match self {
            Model::System(sys) => {
                let meas: Vec<&MeasSet> = sets
                    .iter()
                    .map(|s| match s {
                        ModelSet::Meas(m) if m.family() == sys.family() => Ok(m),
                        _ => Err(mismatch()),
                    })
                    .collect::<Result<_>>()?;
                let mut acc = meas[0].clone();
                for (s, &n) in meas[1..].iter().zip(shifts) {
                    if acc.is_empty() {
                        break;
                    }
                    acc = acc.intersect(&sys.image(s, n)?)?;
                }
                Ok(Bounds::exact(acc.measure()))
            }
            Model::RankOne(r) => {
                let levels: Vec<LevelSet> = sets
                    .iter()
                    .map(|s| match s {
                        ModelSet::Levels(l) => Ok(l.clone()),
                        _ => Err(mismatch()),
                    })
                    .collect::<Result<_>>()?;
                let shifts: Vec<i128> = shifts.iter().map(|&n| n as i128).collect();
                let tol = tol.cloned().unwrap_or_else(|| crate::rational::q(1, 1 << 30));
                Ok(multi_meet(r, &levels, &shifts, &tol)?.bounds)
            }
        }
    }
}

fn mismatch() -> Error {
    Error::domain("set does not belong to this system")
}
