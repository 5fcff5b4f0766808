//! Cylinder sets of the two-sided shift on `{0,1}^Z` with the (1/2, 1/2) Bernoulli measure.
//!
//! A set is stored as a sorted list of coordinates plus the admissible words on
//! those coordinates (bit `t` of a word is the value at `coords[t]`). The
//! canonical form drops every coordinate the mask does not depend on, so the
//! measure `|words| / 2^|coords|` never depends on the chosen window.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::rational::Q;

/// Largest number of admissible words materialized by any operation.
pub const WORD_CAP: usize = 1 << 20;
const MAX_COORDS: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CylinderSet {
    coords: Vec<i64>,
    words: Vec<u64>,
}

impl CylinderSet {
    pub fn empty() -> Self {
        CylinderSet {
            coords: Vec::new(),
            words: Vec::new(),
        }
    }

    pub fn full() -> Self {
        CylinderSet {
            coords: Vec::new(),
            words: vec![0],
        }
    }

    /// The cylinder fixing `x_c = v` for every `(c, v)` in `fixed`.
    pub fn from_assignment(fixed: &[(i64, bool)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(c, v) in fixed {
            if let Some(prev) = map.insert(c, v) {
                if prev != v {
                    return Ok(Self::empty());
                }
            }
        }
        if map.len() > MAX_COORDS {
            return Err(Error::resource("cylinder fixes too many coordinates"));
        }
        let coords: Vec<i64> = map.keys().copied().collect();
        let word = map
            .values()
            .enumerate()
            .fold(0u64, |w, (t, &v)| if v { w | (1 << t) } else { w });
        Ok(Self::from_words(coords, vec![word]))
    }

    /// Builds a canonical set from a coordinate list and admissible words.
    pub fn from_words(coords: Vec<i64>, mut words: Vec<u64>) -> Self {
        debug_assert!(coords.windows(2).all(|w| w[0] < w[1]));
        words.sort_unstable();
        words.dedup();
        let mut set = CylinderSet { coords, words };
        set.canonicalize();
        set
    }

    fn canonicalize(&mut self) {
        if self.words.is_empty() {
            self.coords.clear();
            return;
        }
        let mut t = self.coords.len();
        while t > 0 {
            t -= 1;
            let bit = 1u64 << t;
            let irrelevant = self
                .words
                .iter()
                .all(|w| self.words.binary_search(&(w ^ bit)).is_ok());
            if irrelevant {
                let low = bit - 1;
                let mut words: Vec<u64> = self
                    .words
                    .iter()
                    .filter(|w| *w & bit == 0)
                    .map(|w| (w & low) | ((w >> 1) & !low))
                    .collect();
                words.sort_unstable();
                self.words = words;
                self.coords.remove(t);
            }
        }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn measure(&self) -> Q {
        BigRational::new(
            BigInt::from(self.words.len()),
            BigInt::from(1u8) << self.coords.len(),
        )
    }

    /// Coordinate span `[min, max]`, `None` when the set depends on no coordinate.
    pub fn window(&self) -> Option<(i64, i64)> {
        Some((*self.coords.first()?, *self.coords.last()?))
    }

    /// Image under the n-th power of the shift `T(x)_z = x_{z-1}`.
    pub fn shift(&self, n: i64) -> Self {
        CylinderSet {
            coords: self.coords.iter().map(|c| c + n).collect(),
            words: self.words.clone(),
        }
    }

    /// Membership for a point given by its coordinate oracle.
    pub fn contains_with(&self, bit: impl Fn(i64) -> bool) -> bool {
        if self.words.is_empty() {
            return false;
        }
        let w = self
            .coords
            .iter()
            .enumerate()
            .fold(0u64, |w, (t, &c)| if bit(c) { w | (1 << t) } else { w });
        self.words.binary_search(&w).is_ok()
    }

    fn merged_coords(&self, other: &Self) -> Result<Vec<i64>> {
        let mut u: Vec<i64> = self.coords.iter().chain(&other.coords).copied().collect();
        u.sort_unstable();
        u.dedup();
        if u.len() > MAX_COORDS {
            return Err(Error::resource(format!(
                "cylinder operation needs {} coordinates (max {MAX_COORDS})",
                u.len()
            )));
        }
        Ok(u)
    }

    /// Positions of `self.coords` inside the superset `u`.
    fn placement(&self, u: &[i64]) -> Vec<usize> {
        self.coords
            .iter()
            .map(|c| u.binary_search(c).expect("coordinate in superset"))
            .collect()
    }

    fn place(word: u64, placement: &[usize]) -> u64 {
        placement
            .iter()
            .enumerate()
            .fold(0u64, |acc, (t, &p)| acc | (((word >> t) & 1) << p))
    }

    /// All words over `u` extending the set's words.
    fn extend_to(&self, u: &[i64]) -> Result<Vec<u64>> {
        let placement = self.placement(u);
        let free: Vec<usize> = (0..u.len()).filter(|p| !placement.contains(p)).collect();
        let total = self
            .words
            .len()
            .checked_mul(1usize.checked_shl(free.len() as u32).unwrap_or(usize::MAX))
            .unwrap_or(usize::MAX);
        if total > WORD_CAP {
            return Err(Error::resource(format!(
                "cylinder extension needs {total} words (cap {WORD_CAP})"
            )));
        }
        let mut out = Vec::with_capacity(total);
        for &w in &self.words {
            let base = Self::place(w, &placement);
            for fill in 0..(1u64 << free.len()) {
                let extra = free
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (t, &p)| acc | (((fill >> t) & 1) << p));
                out.push(base | extra);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.is_empty() || other.is_empty() {
            return Ok(Self::empty());
        }
        let u = self.merged_coords(other)?;
        let (pa, pb) = (self.placement(&u), other.placement(&u));
        let mask_a = pa.iter().fold(0u64, |m, &p| m | (1 << p));
        let mask_b = pb.iter().fold(0u64, |m, &p| m | (1 << p));
        let common = mask_a & mask_b;
        if self.words.len().saturating_mul(other.words.len()) > WORD_CAP * 16 {
            return Err(Error::resource("cylinder intersection too large"));
        }
        let placed_b: Vec<u64> = other.words.iter().map(|&w| Self::place(w, &pb)).collect();
        let mut out = Vec::new();
        for &wa in &self.words {
            let a = Self::place(wa, &pa);
            for &b in &placed_b {
                if (a ^ b) & common == 0 {
                    out.push(a | b);
                }
            }
        }
        if out.len() > WORD_CAP {
            return Err(Error::resource("cylinder intersection exceeds word cap"));
        }
        Ok(Self::from_words(u, out))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let u = self.merged_coords(other)?;
        let mut words = self.extend_to(&u)?;
        words.extend(other.extend_to(&u)?);
        Ok(Self::from_words(u, words))
    }

    pub fn symdiff(&self, other: &Self) -> Result<Self> {
        let u = self.merged_coords(other)?;
        let a = self.extend_to(&u)?;
        let b = other.extend_to(&u)?;
        let words = sorted_symdiff(&a, &b);
        Ok(Self::from_words(u, words))
    }

    /// Complement in the full shift space, computed on the set's own window.
    pub fn complement(&self) -> Result<Self> {
        let n = self.coords.len();
        if (1usize << n) > WORD_CAP {
            return Err(Error::resource("cylinder complement exceeds word cap"));
        }
        let words: Vec<u64> = (0..(1u64 << n))
            .filter(|w| self.words.binary_search(w).is_err())
            .collect();
        Ok(Self::from_words(self.coords.clone(), words))
    }

    /// Parses `{0:0,3:1}` terms joined by `|` (a union of basic cylinders).
    pub fn parse(text: &str) -> Result<Self> {
        let mut acc = Self::empty();
        for term in text.split('|') {
            let body = term
                .trim()
                .strip_prefix('{')
                .and_then(|t| t.strip_suffix('}'))
                .ok_or_else(|| Error::parse(format!("expected `{{c:v,...}}`, got {term:?}")))?;
            let mut fixed = Vec::new();
            for pair in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (c, v) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::parse(format!("expected `coord:bit`, got {pair:?}")))?;
                let c: i64 = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad coordinate {c:?}")))?;
                let v = match v.trim() {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::parse(format!("bit must be 0 or 1, got {other:?}"))),
                };
                fixed.push((c, v));
            }
            acc = acc.union(&Self::from_assignment(&fixed)?)?;
        }
        Ok(acc)
    }
}

fn sorted_symdiff(a: &[u64], b: &[u64]) -> Vec<u64> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.words.is_empty() {
            return write!(f, "empty");
        }
        let terms: Vec<String> = self
            .words
            .iter()
            .map(|w| {
                let body: Vec<String> = self
                    .coords
                    .iter()
                    .enumerate()
                    .map(|(t, c)| format!("{c}:{}", (w >> t) & 1))
                    .collect();
                format!("{{{}}}", body.join(","))
            })
            .collect();
        write!(f, "{}", terms.join("|"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn two_fixed_coordinates() {
        let c = CylinderSet::parse("{0:0,3:1}").unwrap();
        assert_eq!(c.measure(), q(1, 4));
    }

    #[test]
    fn intersection_of_coordinates() {
        let a = CylinderSet::parse("{0:0}").unwrap();
        let b = CylinderSet::parse("{1:0}").unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.coords(), &[0, 1]);
        assert_eq!(c.words(), &[0b00]);
        assert_eq!(c.measure(), q(1, 4));
    }

    #[test]
    fn canonical_trims_irrelevant_coordinates() {
        // {x0=0} written over the window [0, 2].
        let c = CylinderSet::from_words(vec![0, 1, 2], vec![0b000, 0b010, 0b100, 0b110]);
        assert_eq!(c.coords(), &[0]);
        assert_eq!(c.words(), &[0]);
        let full = CylinderSet::parse("{0:0}|{0:1}").unwrap();
        assert_eq!(full, CylinderSet::full());
    }

    #[test]
    fn symdiff_self_empty() {
        let a = CylinderSet::parse("{0:1,2:0}|{5:1}").unwrap();
        assert!(a.symdiff(&a).unwrap().is_empty());
    }

    #[test]
    fn complement_measure() {
        let a = CylinderSet::parse("{0:1,2:0}").unwrap();
        assert_eq!(a.complement().unwrap().measure(), q(3, 4));
    }

    #[test]
    fn contradictory_assignment_is_empty() {
        let c = CylinderSet::from_assignment(&[(0, true), (0, false)]).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn parse_errors() {
        assert!(CylinderSet::parse("{0:2}").is_err());
        assert!(CylinderSet::parse("0:1").is_err());
    }
}
