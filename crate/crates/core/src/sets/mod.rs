//! Measurable-set families, their algebra, and finite partitions.

pub mod cylinder;
pub mod interval;
pub mod rect;
pub mod torus;

use std::fmt;

use num_traits::{One, Zero};

pub use cylinder::CylinderSet;
pub use interval::{Ambient, RationalIntervalSet};
pub use rect::DyadicRectangleSet;
pub use torus::TorusSet;

use crate::error::{Error, Result};
use crate::rational::{to_f64, Q};

/// Default cap on the number of cells a join may produce.
pub const JOIN_CELL_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Interval(Ambient),
    Cylinder,
    Rectangle,
    Torus(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Interval(Ambient::Unit) => write!(f, "unit-interval"),
            Family::Interval(Ambient::Ray) => write!(f, "ray-interval"),
            Family::Cylinder => write!(f, "cylinder"),
            Family::Rectangle => write!(f, "dyadic-rectangle"),
            Family::Torus(d) => write!(f, "torus{d}"),
        }
    }
}

/// A set from any of the supported families.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MeasSet {
    Interval(RationalIntervalSet),
    Cylinder(CylinderSet),
    Rectangle(DyadicRectangleSet),
    Torus(TorusSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Intersect,
    Union,
    Symdiff,
    /// Complement of `a` inside `b` (the window), i.e. `b \ a`.
    ComplementIn,
}

impl MeasSet {
    pub fn family(&self) -> Family {
        match self {
            MeasSet::Interval(s) => Family::Interval(s.ambient()),
            MeasSet::Cylinder(_) => Family::Cylinder,
            MeasSet::Rectangle(_) => Family::Rectangle,
            MeasSet::Torus(t) => Family::Torus(t.dim()),
        }
    }

    pub fn empty(family: Family) -> Self {
        match family {
            Family::Interval(a) => MeasSet::Interval(RationalIntervalSet::empty(a)),
            Family::Cylinder => MeasSet::Cylinder(CylinderSet::empty()),
            Family::Rectangle => MeasSet::Rectangle(DyadicRectangleSet::empty()),
            Family::Torus(d) => MeasSet::Torus(TorusSet::empty(d)),
        }
    }

    /// The whole probability space; `None` on the ray.
    pub fn full(family: Family) -> Option<Self> {
        Some(match family {
            Family::Interval(Ambient::Unit) => MeasSet::Interval(RationalIntervalSet::unit()),
            Family::Interval(Ambient::Ray) => return None,
            Family::Cylinder => MeasSet::Cylinder(CylinderSet::full()),
            Family::Rectangle => MeasSet::Rectangle(DyadicRectangleSet::full()),
            Family::Torus(d) => MeasSet::Torus(TorusSet::full(d)),
        })
    }

    pub fn measure(&self) -> Q {
        match self {
            MeasSet::Interval(s) => s.measure(),
            MeasSet::Cylinder(s) => s.measure(),
            MeasSet::Rectangle(s) => s.measure(),
            MeasSet::Torus(s) => s.measure(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            MeasSet::Interval(s) => s.is_empty(),
            MeasSet::Cylinder(s) => s.is_empty(),
            MeasSet::Rectangle(s) => s.is_empty(),
            MeasSet::Torus(s) => s.is_empty(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.algebra(other, SetOp::Intersect)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.algebra(other, SetOp::Union)
    }

    pub fn symdiff(&self, other: &Self) -> Result<Self> {
        self.algebra(other, SetOp::Symdiff)
    }

    /// Complement in the whole space (the hull window on the ray).
    pub fn complement(&self) -> Result<Self> {
        Ok(match self {
            MeasSet::Interval(s) => MeasSet::Interval(s.complement()),
            MeasSet::Cylinder(s) => MeasSet::Cylinder(s.complement()?),
            MeasSet::Rectangle(s) => MeasSet::Rectangle(s.complement()?),
            MeasSet::Torus(s) => MeasSet::Torus(s.complement()?),
        })
    }

    /// Exact canonical result of a binary set operation on two sets of one family.
    pub fn algebra(&self, other: &Self, op: SetOp) -> Result<Self> {
        use MeasSet::*;
        if self.family() != other.family() {
            return Err(Error::domain(format!(
                "set family mismatch: {} vs {}",
                self.family(),
                other.family()
            )));
        }
        Ok(match (self, other, op) {
            (Interval(a), Interval(b), SetOp::Intersect) => Interval(a.intersect(b)?),
            (Interval(a), Interval(b), SetOp::Union) => Interval(a.union(b)?),
            (Interval(a), Interval(b), SetOp::Symdiff) => Interval(a.symdiff(b)?),
            (Interval(a), Interval(b), SetOp::ComplementIn) => Interval(b.difference(a)?),
            (Cylinder(a), Cylinder(b), SetOp::Intersect) => Cylinder(a.intersect(b)?),
            (Cylinder(a), Cylinder(b), SetOp::Union) => Cylinder(a.union(b)?),
            (Cylinder(a), Cylinder(b), SetOp::Symdiff) => Cylinder(a.symdiff(b)?),
            (Cylinder(a), Cylinder(b), SetOp::ComplementIn) => {
                Cylinder(b.intersect(&a.complement()?)?)
            }
            (Rectangle(a), Rectangle(b), SetOp::Intersect) => Rectangle(a.intersect(b)?),
            (Rectangle(a), Rectangle(b), SetOp::Union) => Rectangle(a.union(b)?),
            (Rectangle(a), Rectangle(b), SetOp::Symdiff) => Rectangle(a.symdiff(b)?),
            (Rectangle(a), Rectangle(b), SetOp::ComplementIn) => {
                Rectangle(b.intersect(&a.complement()?)?)
            }
            (Torus(a), Torus(b), SetOp::Intersect) => Torus(a.intersect(b)?),
            (Torus(a), Torus(b), SetOp::Union) => Torus(a.union(b)?),
            (Torus(a), Torus(b), SetOp::Symdiff) => Torus(a.symdiff(b)?),
            (Torus(a), Torus(b), SetOp::ComplementIn) => Torus(b.difference(a)?),
            _ => unreachable!("family checked above"),
        })
    }

    /// Parses a set literal for the given family:
    /// intervals `0..1/4,1/2..3/4`; cylinders `{0:0,3:1}|{1:1}`;
    /// rectangles and torus boxes `0..1/2 x 0..1`, joined by `|`.
    pub fn parse(text: &str, family: Family) -> Result<Self> {
        Ok(match family {
            Family::Interval(a) => MeasSet::Interval(RationalIntervalSet::parse(text, a)?),
            Family::Cylinder => MeasSet::Cylinder(CylinderSet::parse(text)?),
            Family::Rectangle => MeasSet::Rectangle(DyadicRectangleSet::parse(text)?),
            Family::Torus(d) => {
                let t = TorusSet::parse(text)?;
                if t.dim() != d {
                    return Err(Error::domain(format!(
                        "torus literal has dimension {}, system has {d}",
                        t.dim()
                    )));
                }
                MeasSet::Torus(t)
            }
        })
    }
}

impl fmt::Display for MeasSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasSet::Interval(s) => write!(f, "{s}"),
            MeasSet::Cylinder(s) => write!(f, "{s}"),
            MeasSet::Rectangle(s) => write!(f, "{s}"),
            MeasSet::Torus(s) => write!(f, "{s}"),
        }
    }
}

/// A finite measurable partition: disjoint cells of one family.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    cells: Vec<MeasSet>,
    labels: Vec<String>,
}

impl Partition {
    /// Validates disjointness and, on probability families, that the cells cover the space.
    pub fn new(cells: Vec<MeasSet>, labels: Vec<String>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::domain("partition needs at least one cell"));
        }
        if labels.len() != cells.len() {
            return Err(Error::domain("one label per cell"));
        }
        let family = cells[0].family();
        if cells.iter().any(|c| c.family() != family) {
            return Err(Error::domain("partition cells from different families"));
        }
        for i in 0..cells.len() {
            for j in (i + 1)..cells.len() {
                if !cells[i].intersect(&cells[j])?.measure().is_zero() {
                    return Err(Error::domain(format!(
                        "partition cells {} and {} overlap",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        if family != Family::Interval(Ambient::Ray) {
            let total: Q = cells.iter().map(MeasSet::measure).sum();
            if !total.is_one() {
                return Err(Error::domain("partition cells do not cover the space"));
            }
        }
        Ok(Partition { cells, labels })
    }

    /// Cells labelled `0, 1, ...`.
    pub fn from_cells(cells: Vec<MeasSet>) -> Result<Self> {
        let labels = (0..cells.len()).map(|i| i.to_string()).collect();
        Self::new(cells, labels)
    }

    /// The one-cell partition of a probability space.
    pub fn trivial(family: Family) -> Result<Self> {
        let full = MeasSet::full(family)
            .ok_or_else(|| Error::domain("no trivial partition on the ray"))?;
        Self::from_cells(vec![full])
    }

    pub(crate) fn from_parts_unchecked(cells: Vec<MeasSet>, labels: Vec<String>) -> Self {
        Partition { cells, labels }
    }

    pub fn cells(&self) -> &[MeasSet] {
        &self.cells
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn family(&self) -> Family {
        self.cells[0].family()
    }

    pub fn measures(&self) -> Vec<Q> {
        self.cells.iter().map(MeasSet::measure).collect()
    }

    /// `-Σ μ(C) ln μ(C)` in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of_masses(&self.measures())
    }

    /// Common refinement: all non-empty pairwise intersections.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.join_capped(other, JOIN_CELL_CAP)
    }

    pub fn join_capped(&self, other: &Partition, cap: usize) -> Result<Partition> {
        if self.family() != other.family() {
            return Err(Error::domain("joined partitions from different families"));
        }
        let mut cells = Vec::new();
        let mut labels = Vec::new();
        for (a, la) in self.cells.iter().zip(&self.labels) {
            for (b, lb) in other.cells.iter().zip(&other.labels) {
                let c = a.intersect(b)?;
                if c.measure().is_zero() {
                    continue;
                }
                if cells.len() == cap {
                    return Err(Error::resource(format!(
                        "join exceeds the cell cap of {cap}"
                    )));
                }
                cells.push(c);
                labels.push(format!("{la}&{lb}"));
            }
        }
        Ok(Partition { cells, labels })
    }
}

/// Partition entropy from exact cell masses, `0 ln 0 = 0`.
pub fn entropy_of_masses(masses: &[Q]) -> f64 {
    let terms: Vec<f64> = masses
        .iter()
        .filter(|m| !m.is_zero())
        .map(|m| {
            let p = to_f64(m);
            -p * p.ln()
        })
        .collect();
    neumaier_sum(&terms)
}

/// Compensated summation.
pub(crate) fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}
