//! Finite disjoint unions of boxes on the torus `[0,1)^d`; each box is a
//! product of interval sets, one per coordinate.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;
use crate::sets::interval::{Ambient, RationalIntervalSet};

type TorusBox = Vec<RationalIntervalSet>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusSet {
    dim: usize,
    boxes: Vec<TorusBox>,
}

impl TorusSet {
    pub fn empty(dim: usize) -> Self {
        TorusSet {
            dim,
            boxes: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        TorusSet {
            dim,
            boxes: vec![vec![RationalIntervalSet::unit(); dim]],
        }
    }

    pub fn product(factors: Vec<RationalIntervalSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::domain("torus box needs at least one factor"));
        }
        if factors.iter().any(|f| f.ambient() != Ambient::Unit) {
            return Err(Error::domain("torus factors must live on [0, 1)"));
        }
        let dim = factors.len();
        Ok(Self::from_boxes(dim, vec![factors]))
    }

    fn from_boxes(dim: usize, mut boxes: Vec<TorusBox>) -> Self {
        boxes.retain(|b| b.iter().all(|f| !f.is_empty()));
        boxes.sort_by_key(|b| b.iter().map(|f| f.to_string()).collect::<Vec<_>>());
        TorusSet { dim, boxes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[TorusBox] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn measure(&self) -> Q {
        self.boxes
            .iter()
            .map(|b| b.iter().fold(Q::one(), |acc, f| acc * f.measure()))
            .fold(Q::zero(), |acc, m| acc + m)
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.boxes
            .iter()
            .any(|b| b.iter().zip(x).all(|(f, xi)| f.contains(xi)))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::domain("torus sets of different dimension"));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                let meet: Result<TorusBox> = a.iter().zip(b).map(|(x, y)| x.intersect(y)).collect();
                out.push(meet?);
            }
        }
        Ok(Self::from_boxes(self.dim, out))
    }

    pub fn complement(&self) -> Result<Self> {
        let mut acc = Self::full(self.dim);
        for b in &self.boxes {
            // Complement of a box as a disjoint union: first differing coordinate t.
            let mut pieces = Vec::with_capacity(self.dim);
            for t in 0..self.dim {
                let mut piece: TorusBox = Vec::with_capacity(self.dim);
                piece.extend(b[..t].iter().cloned());
                piece.push(b[t].complement());
                piece.extend(std::iter::repeat_n(RationalIntervalSet::unit(), self.dim - t - 1));
                pieces.push(piece);
            }
            acc = acc.intersect(&Self::from_boxes(self.dim, pieces))?;
        }
        Ok(acc)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.intersect(&other.complement()?)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let extra = other.difference(self)?;
        let mut boxes = self.boxes.clone();
        boxes.extend(extra.boxes);
        Ok(Self::from_boxes(self.dim, boxes))
    }

    pub fn symdiff(&self, other: &Self) -> Result<Self> {
        let a = self.difference(other)?;
        let b = other.difference(self)?;
        let mut boxes = a.boxes;
        boxes.extend(b.boxes);
        Ok(Self::from_boxes(self.dim, boxes))
    }

    /// Coordinatewise rotation by `shift`.
    pub fn rotate(&self, shift: &[Q]) -> Self {
        let boxes = self
            .boxes
            .iter()
            .map(|b| b.iter().zip(shift).map(|(f, s)| f.rotate(s)).collect())
            .collect();
        Self::from_boxes(self.dim, boxes)
    }

    /// Parses `0..1/2 x 0..1/4` products joined by `|`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut acc: Option<Self> = None;
        for term in text.split('|') {
            let factors: Result<Vec<_>> = term
                .split(" x ")
                .map(|f| RationalIntervalSet::parse(f, Ambient::Unit))
                .collect();
            let b = Self::product(factors?)?;
            acc = Some(match acc {
                None => b,
                Some(a) => a.union(&b)?,
            });
        }
        acc.ok_or_else(|| Error::parse("empty torus literal"))
    }
}

impl fmt::Display for TorusSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return write!(f, "empty");
        }
        let parts: Vec<String> = self
            .boxes
            .iter()
            .map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" x "))
            .collect();
        write!(f, "{}", parts.join(" | "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn box_algebra() {
        let a = TorusSet::parse("0..1/2 x 0..1/2").unwrap();
        let b = TorusSet::parse("1/4..3/4 x 0..1").unwrap();
        assert_eq!(a.measure(), q(1, 4));
        assert_eq!(a.intersect(&b).unwrap().measure(), q(1, 8));
        assert_eq!(a.union(&b).unwrap().measure(), q(5, 8));
        assert_eq!(a.complement().unwrap().measure(), q(3, 4));
        assert!(a.symdiff(&a).unwrap().is_empty());
    }
}
