//! Literal cut-and-stack layout: every level of a stage as an explicit
//! rational interval on the ray. Slow, but shares nothing with the counting
//! engine, so it serves as a reference for it.

use num_traits::Zero;

use super::{LevelSet, RankOneSpec};
use crate::error::{Error, Result};
use crate::rational::{q_u128, Bounds, Q};
use crate::sets::{Ambient, RationalIntervalSet};

pub struct Layout {
    /// `levels[j-1][l]` is level `l` of stage `j`.
    levels: Vec<Vec<(Q, Q)>>,
}

impl Layout {
    /// Cuts and stacks intervals up to stage `depth`, refusing towers above `max_levels`.
    pub fn build(spec: &RankOneSpec, depth: usize, max_levels: usize) -> Result<Self> {
        let mut tower: Vec<(Q, Q)> = vec![(Q::zero(), q_u128(1))];
        let mut end = q_u128(1);
        let mut levels = vec![tower.clone()];
        for j in 1..depth {
            let r = spec
                .cut(j)
                .ok_or_else(|| Error::domain("spec ends before the requested depth"))?;
            let spacers = spec
                .spacers(j, tower.len() as u128)
                .ok_or_else(|| Error::domain("spacer overflow"))?;
            let total: u128 = tower.len() as u128 * r as u128 + spacers.iter().sum::<u128>();
            if total > max_levels as u128 {
                return Err(Error::resource("layout too tall"));
            }
            let piece = (&tower[0].1 - &tower[0].0) / q_u128(r as u128);
            let mut next = Vec::with_capacity(total as usize);
            for (i, s) in spacers.iter().enumerate() {
                for (a, _) in &tower {
                    let left = a + &piece * q_u128(i as u128);
                    let right = &left + &piece;
                    next.push((left, right));
                }
                for _ in 0..*s {
                    let right = &end + &piece;
                    next.push((end.clone(), right.clone()));
                    end = right;
                }
            }
            tower = next;
            levels.push(tower.clone());
        }
        Ok(Layout { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn height(&self, j: usize) -> usize {
        self.levels[j - 1].len()
    }

    pub fn level(&self, j: usize, l: usize) -> &(Q, Q) {
        &self.levels[j - 1][l]
    }

    pub fn set(&self, ls: &LevelSet) -> Result<RationalIntervalSet> {
        let pieces = ls
            .levels()
            .iter()
            .map(|&l| self.levels[ls.stage - 1][l as usize].clone())
            .collect();
        RationalIntervalSet::from_pieces(pieces, Ambient::Ray)
    }

    /// `μ(TⁿA ∩ B)` bounds from the deepest stage: pieces of `A` carried by
    /// translation to their image levels; the mass whose orbit leaves the
    /// tower is the slack.
    pub fn shifted_meet(&self, a: &LevelSet, b: &LevelSet, n: i64) -> Result<Bounds> {
        let a_set = self.set(a)?;
        let b_set = self.set(b)?;
        let tower = self.levels.last().unwrap();
        let h = tower.len() as i64;
        let mut image = Vec::new();
        let mut lost = Q::zero();
        for (k, (l, r)) in tower.iter().enumerate() {
            // every deepest-stage level lies inside A or is disjoint from it
            if !a_set.contains(l) {
                continue;
            }
            let target = k as i64 + n;
            if target < 0 || target >= h {
                lost += r - l;
                continue;
            }
            image.push(tower[target as usize].clone());
        }
        let moved = RationalIntervalSet::from_pieces(image, Ambient::Ray)?;
        let lo = moved.intersect(&b_set)?.measure();
        let room = b_set.measure() - &lo;
        let hi = &lo + if lost < room { lost } else { room };
        Ok(Bounds::new(lo, hi))
    }
}
