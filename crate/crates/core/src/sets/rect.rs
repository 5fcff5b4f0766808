//! Finite unions of dyadic rectangles in the unit square, the phase space of the baker's map.
//!
//! A point `(x, y)` is coded by a two-sided bit sequence: the binary digits of
//! `x` are `x_1, x_2, ...` and those of `y` are `x_0, x_{-1}, ...`. Under this
//! coding the baker's map is the shift, and every dyadic rectangle is a
//! cylinder. Sets are stored in that cylinder form.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::cylinder::{CylinderSet, WORD_CAP};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, Q};
use crate::sets::interval::{Ambient, RationalIntervalSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRectangleSet {
    code: CylinderSet,
}

/// `log2` of the denominator when it is a power of two.
fn dyadic_level(x: &Q) -> Result<u32> {
    let d = x.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    if *d != BigInt::one() << tz {
        return Err(Error::domain(format!(
            "{} is not a dyadic rational",
            fmt_q(x)
        )));
    }
    Ok(tz as u32)
}

/// Words `v` (most significant digit first) with `v / 2^k` in `[lo, hi)`.
fn digit_range(lo: &Q, hi: &Q, k: u32) -> Result<std::ops::Range<u64>> {
    let scale = BigRational::from_integer(BigInt::one() << k);
    let a = (lo * &scale).to_integer().to_u64();
    let b = (hi * &scale).to_integer().to_u64();
    match (a, b) {
        (Some(a), Some(b)) => Ok(a..b),
        _ => Err(Error::resource("rectangle too fine")),
    }
}

impl DyadicRectangleSet {
    pub fn empty() -> Self {
        DyadicRectangleSet {
            code: CylinderSet::empty(),
        }
    }

    pub fn full() -> Self {
        DyadicRectangleSet {
            code: CylinderSet::full(),
        }
    }

    pub fn from_code(code: CylinderSet) -> Self {
        DyadicRectangleSet { code }
    }

    pub fn code(&self) -> &CylinderSet {
        &self.code
    }

    /// `[x0, x1) × [y0, y1)` with dyadic endpoints in `[0, 1]`.
    pub fn rectangle(x0: &Q, x1: &Q, y0: &Q, y1: &Q) -> Result<Self> {
        let zero = Q::zero();
        let one = Q::one();
        for v in [x0, x1, y0, y1] {
            if *v < zero || *v > one {
                return Err(Error::domain("rectangle endpoints must lie in [0, 1]"));
            }
        }
        if x0 >= x1 || y0 >= y1 {
            return Ok(Self::empty());
        }
        let kx = dyadic_level(x0)?.max(dyadic_level(x1)?);
        let ky = dyadic_level(y0)?.max(dyadic_level(y1)?);
        if kx + ky > 40 {
            return Err(Error::resource("rectangle needs more than 40 binary digits"));
        }
        let xs = digit_range(x0, x1, kx)?;
        let ys = digit_range(y0, y1, ky)?;
        if (xs.end - xs.start).saturating_mul(ys.end - ys.start) > WORD_CAP as u64 {
            return Err(Error::resource("rectangle expands beyond the word cap"));
        }
        // Sorted coordinates: y digits ky..1 map to coords 1-ky..0, x digits 1..kx to 1..kx.
        let coords: Vec<i64> = ((1 - ky as i64)..=(kx as i64)).collect();
        let mut words = Vec::new();
        for vy in ys.clone() {
            // y digit i sits at coord 1-i, i.e. position ky - i.
            let mut wy = 0u64;
            for i in 1..=ky {
                let digit = (vy >> (ky - i)) & 1;
                wy |= digit << (ky - i);
            }
            for vx in xs.clone() {
                let mut wx = 0u64;
                for i in 1..=kx {
                    let digit = (vx >> (kx - i)) & 1;
                    wx |= digit << (ky + i - 1);
                }
                words.push(wy | wx);
            }
        }
        Ok(Self::from_code(CylinderSet::from_words(coords, words)))
    }

    pub fn measure(&self) -> Q {
        self.code.measure()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_code(self.code.intersect(&other.code)?))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_code(self.code.union(&other.code)?))
    }

    pub fn symdiff(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_code(self.code.symdiff(&other.code)?))
    }

    pub fn complement(&self) -> Result<Self> {
        Ok(Self::from_code(self.code.complement()?))
    }

    pub fn shift(&self, n: i64) -> Self {
        Self::from_code(self.code.shift(n))
    }

    /// Disjoint elementary rectangles covering the set.
    pub fn rectangles(&self) -> Result<Vec<(RationalIntervalSet, RationalIntervalSet)>> {
        if self.code.is_empty() {
            return Ok(Vec::new());
        }
        let cs = self.code.coords();
        let kx = cs.iter().copied().filter(|c| *c >= 1).max().unwrap_or(0);
        let ky = 1 - cs.iter().copied().filter(|c| *c <= 0).min().unwrap_or(1);
        let window: Vec<i64> = ((1 - ky)..=kx).collect();
        if window.len() > 20 {
            return Err(Error::resource("rectangle listing beyond 20 digits"));
        }
        let expanded = expand_words(&self.code, &window)?;
        let (kx, ky) = (kx as u32, ky as u32);
        let sx = BigRational::from_integer(BigInt::one() << kx);
        let sy = BigRational::from_integer(BigInt::one() << ky);
        let mut out = Vec::with_capacity(expanded.len());
        for w in expanded {
            let mut vy = 0u64;
            for i in 1..=ky {
                vy |= ((w >> (ky - i)) & 1) << (ky - i);
            }
            let mut vx = 0u64;
            for i in 1..=kx {
                vx |= ((w >> (ky + i - 1)) & 1) << (kx - i);
            }
            let x0 = BigRational::from_integer(BigInt::from(vx)) / &sx;
            let y0 = BigRational::from_integer(BigInt::from(vy)) / &sy;
            let x1 = &x0 + sx.recip();
            let y1 = &y0 + sy.recip();
            out.push((
                RationalIntervalSet::interval(x0, x1, Ambient::Unit)?,
                RationalIntervalSet::interval(y0, y1, Ambient::Unit)?,
            ));
        }
        Ok(out)
    }

    /// Parses `x0..x1 x y0..y1` terms joined by `|`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut acc = Self::empty();
        for term in text.split('|') {
            let (xs, ys) = term
                .split_once(" x ")
                .ok_or_else(|| Error::parse(format!("expected `a..b x c..d`, got {term:?}")))?;
            let xs = RationalIntervalSet::parse(xs, Ambient::Unit)?;
            let ys = RationalIntervalSet::parse(ys, Ambient::Unit)?;
            for (x0, x1) in xs.intervals() {
                for (y0, y1) in ys.intervals() {
                    acc = acc.union(&Self::rectangle(x0, x1, y0, y1)?)?;
                }
            }
        }
        Ok(acc)
    }
}

fn expand_words(code: &CylinderSet, window: &[i64]) -> Result<Vec<u64>> {
    let placement: Vec<usize> = code
        .coords()
        .iter()
        .map(|c| window.binary_search(c).expect("coordinate inside window"))
        .collect();
    let free: Vec<usize> = (0..window.len()).filter(|p| !placement.contains(p)).collect();
    let mut out = Vec::new();
    for &w in code.words() {
        let base = placement
            .iter()
            .enumerate()
            .fold(0u64, |acc, (t, &p)| acc | (((w >> t) & 1) << p));
        for fill in 0..(1u64 << free.len()) {
            let extra = free
                .iter()
                .enumerate()
                .fold(0u64, |acc, (t, &p)| acc | (((fill >> t) & 1) << p));
            out.push(base | extra);
            if out.len() > WORD_CAP {
                return Err(Error::resource("rectangle listing exceeds word cap"));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

impl fmt::Display for DyadicRectangleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rectangles() {
            Ok(rs) if rs.is_empty() => write!(f, "empty"),
            Ok(rs) => {
                let parts: Vec<String> = rs.iter().map(|(x, y)| format!("{x} x {y}")).collect();
                write!(f, "{}", parts.join(" | "))
            }
            Err(_) => write!(f, "{}", self.code),
        }
    }
}
