//! Finite unions of half-open rational intervals `[l, r)`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ambient {
    /// `[0, 1)`, read as the circle for rotations.
    Unit,
    /// `[0, ∞)`, the phase space of rank-one towers.
    Ray,
}

/// Canonical form: sorted, pairwise disjoint, non-adjacent, non-empty pieces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalIntervalSet {
    intervals: Vec<(Q, Q)>,
    ambient: Ambient,
}

impl RationalIntervalSet {
    pub fn empty(ambient: Ambient) -> Self {
        RationalIntervalSet {
            intervals: Vec::new(),
            ambient,
        }
    }

    pub fn unit() -> Self {
        Self::interval(Q::zero(), Q::one(), Ambient::Unit).expect("unit interval")
    }

    pub fn interval(l: Q, r: Q, ambient: Ambient) -> Result<Self> {
        Self::from_pieces(vec![(l, r)], ambient)
    }

    /// Builds a set from arbitrary (possibly overlapping, unsorted) pieces.
    pub fn from_pieces(pieces: Vec<(Q, Q)>, ambient: Ambient) -> Result<Self> {
        for (l, r) in &pieces {
            if l > r {
                return Err(Error::domain(format!(
                    "interval [{}, {}) has left > right",
                    fmt_q(l),
                    fmt_q(r)
                )));
            }
            if *l < Q::zero() {
                return Err(Error::domain("interval endpoints must be >= 0"));
            }
            if ambient == Ambient::Unit && *r > Q::one() {
                return Err(Error::domain("interval endpoints must be <= 1 on the unit ambient"));
            }
        }
        Ok(Self::canonical(pieces, ambient))
    }

    fn canonical(mut pieces: Vec<(Q, Q)>, ambient: Ambient) -> Self {
        pieces.retain(|(l, r)| l < r);
        pieces.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(pieces.len());
        for (l, r) in pieces {
            match out.last_mut() {
                Some(last) if l <= last.1 => {
                    if r > last.1 {
                        last.1 = r;
                    }
                }
                _ => out.push((l, r)),
            }
        }
        RationalIntervalSet {
            intervals: out,
            ambient,
        }
    }

    pub fn intervals(&self) -> &[(Q, Q)] {
        &self.intervals
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Q {
        self.intervals
            .iter()
            .fold(Q::zero(), |acc, (l, r)| acc + (r - l))
    }

    pub fn contains(&self, x: &Q) -> bool {
        // Binary search for the last piece starting at or before x.
        let idx = self.intervals.partition_point(|(l, _)| l <= x);
        idx > 0 && *x < self.intervals[idx - 1].1
    }

    /// Smallest closed interval containing the set, `None` if empty.
    pub fn hull(&self) -> Option<(Q, Q)> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some((first.0.clone(), last.1.clone()))
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::domain("interval sets live on different ambients"));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let l = if a[i].0 > b[j].0 { &a[i].0 } else { &b[j].0 };
            let r = if a[i].1 < b[j].1 { &a[i].1 } else { &b[j].1 };
            if l < r {
                out.push((l.clone(), r.clone()));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces of two canonical sets intersect into sorted disjoint pieces,
        // but two of them may touch; canonical() merges those.
        Ok(Self::canonical(out, self.ambient))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let mut pieces = self.intervals.clone();
        pieces.extend(other.intervals.iter().cloned());
        Ok(Self::canonical(pieces, self.ambient))
    }

    /// Complement inside `[lo, hi)`.
    pub fn complement_within(&self, lo: &Q, hi: &Q) -> Self {
        let mut out = Vec::new();
        let mut cursor = lo.clone();
        for (l, r) in &self.intervals {
            if r <= lo {
                continue;
            }
            if l >= hi {
                break;
            }
            if *l > cursor {
                out.push((cursor.clone(), l.clone()));
            }
            if *r > cursor {
                cursor = r.clone();
            }
        }
        if cursor < *hi {
            out.push((cursor, hi.clone()));
        }
        Self::canonical(out, self.ambient)
    }

    /// Complement in the unit ambient, or in the hull's window `[0, sup)` on the ray.
    pub fn complement(&self) -> Self {
        let hi = match self.ambient {
            Ambient::Unit => Q::one(),
            Ambient::Ray => self.hull().map(|h| h.1).unwrap_or_else(Q::zero),
        };
        self.complement_within(&Q::zero(), &hi)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let hi = match (self.hull(), other.hull()) {
            (Some(a), Some(b)) => {
                if a.1 > b.1 {
                    a.1
                } else {
                    b.1
                }
            }
            (Some(a), None) => a.1,
            _ => return Ok(Self::empty(self.ambient)),
        };
        self.intersect(&other.complement_within(&Q::zero(), &hi))
    }

    pub fn symdiff(&self, other: &Self) -> Result<Self> {
        self.difference(other)?.union(&other.difference(self)?)
    }

    /// Translation by `t` on the ray (`t` may be negative; the result must stay in `[0, ∞)`).
    pub fn translate(&self, t: &Q) -> Result<Self> {
        let pieces: Vec<(Q, Q)> = self
            .intervals
            .iter()
            .map(|(l, r)| (l + t, r + t))
            .collect();
        Self::from_pieces(pieces, self.ambient)
    }

    /// Rotation by `t` modulo 1 on the unit circle.
    pub fn rotate(&self, t: &Q) -> Self {
        debug_assert_eq!(self.ambient, Ambient::Unit);
        let one = Q::one();
        let shift = frac(t);
        let mut pieces = Vec::with_capacity(self.intervals.len() + 1);
        for (l, r) in &self.intervals {
            let (l2, r2) = (l + &shift, r + &shift);
            if r2 <= one {
                pieces.push((l2, r2));
            } else if l2 >= one {
                pieces.push((l2 - &one, r2 - &one));
            } else {
                pieces.push((l2, one.clone()));
                pieces.push((Q::zero(), r2 - &one));
            }
        }
        Self::canonical(pieces, Ambient::Unit)
    }

    /// Parses `a..b` pieces separated by commas, e.g. `0..1/4, 1/2..3/4`.
    pub fn parse(text: &str, ambient: Ambient) -> Result<Self> {
        let mut pieces = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (l, r) = part
                .split_once("..")
                .ok_or_else(|| Error::parse(format!("expected `a..b`, got {part:?}")))?;
            pieces.push((parse_q(l)?, parse_q(r)?));
        }
        Self::from_pieces(pieces, ambient)
    }
}

/// Fractional part `{t}` in `[0, 1)`.
pub fn frac(t: &Q) -> Q {
    t - t.floor()
}

impl fmt::Display for RationalIntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(l, r)| format!("{}..{}", fmt_q(l), fmt_q(r)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}
