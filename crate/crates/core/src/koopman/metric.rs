//! The Halmos metric and the weak-operator metric over a frozen family of sets.
//!
//! The family `A_1, A_2, …` is enumerated level by level. Level `n` holds
//! the `2ⁿ` dyadic intervals `[k/2ⁿ, (k+1)/2ⁿ)` on the circle, the `2ⁿ`
//! cylinders fixing the coordinates `−⌊n/2⌋, …, −⌊n/2⌋ + n − 1` for the
//! shift (and, through the digit coding, the baker's map), and the `2^{nd}`
//! dyadic boxes of side `2⁻ⁿ` on a `d`-torus.

use num_traits::Zero;
use serde::Serialize;

use crate::dynamics::{Model, ModelSet};
use crate::error::{Error, Result};
use crate::rational::{q_u128, ser_q, Bounds, Q};
use crate::sets::{
    Ambient, CylinderSet, DyadicRectangleSet, Family, MeasSet, RationalIntervalSet, TorusSet,
};
use crate::systems::System;

/// An operator whose matrix coefficients `⟨Uχ_A, χ_B⟩` we can evaluate:
/// the set map `Tⁿ` of a model, read as `μ(TⁿA ∩ B)`, or `Θ`.
#[derive(Clone, Copy, Debug)]
pub enum OperatorModel<'a> {
    Power(&'a Model, i64),
    Theta(&'a Model),
}

impl OperatorModel<'_> {
    fn model(&self) -> &Model {
        match self {
            OperatorModel::Power(m, _) | OperatorModel::Theta(m) => m,
        }
    }

    fn coefficient(&self, a: &ModelSet, b: &ModelSet) -> Result<Bounds> {
        match self {
            OperatorModel::Power(m, n) => m.meet(a, b, *n, None),
            OperatorModel::Theta(m) => m.theta(a, b),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Distance {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    /// Upper bound on the contribution of the sets beyond `depth`.
    #[serde(serialize_with = "ser_q")]
    pub tail_bound: Q,
    pub depth: usize,
}

fn pow2(k: usize) -> Q {
    q_u128(1u128 << k)
}

/// The first `count` sets of the canonical family.
pub fn canonical_family(family: Family, count: usize) -> Result<Vec<MeasSet>> {
    let mut out = Vec::with_capacity(count);
    let mut level = 1usize;
    while out.len() < count {
        if level > 60 {
            return Err(Error::resource("canonical family level overflow"));
        }
        match family {
            Family::Interval(Ambient::Unit) => {
                let side = pow2(level).recip();
                for k in 0..(1u128 << level) {
                    let l = &side * q_u128(k);
                    let r = &l + &side;
                    out.push(MeasSet::Interval(RationalIntervalSet::interval(l, r, Ambient::Unit)?));
                    if out.len() == count {
                        break;
                    }
                }
            }
            Family::Cylinder | Family::Rectangle => {
                let first = -((level / 2) as i64);
                for word in 0..(1u64 << level) {
                    let fixed: Vec<(i64, bool)> = (0..level)
                        .map(|t| (first + t as i64, word >> t & 1 == 1))
                        .collect();
                    let c = CylinderSet::from_assignment(&fixed)?;
                    out.push(if family == Family::Cylinder {
                        MeasSet::Cylinder(c)
                    } else {
                        MeasSet::Rectangle(DyadicRectangleSet::from_code(c))
                    });
                    if out.len() == count {
                        break;
                    }
                }
            }
            Family::Torus(d) => {
                let per_axis = 1u128 << level;
                let side = pow2(level).recip();
                let total = per_axis
                    .checked_pow(d as u32)
                    .ok_or_else(|| Error::resource("torus family too large"))?;
                for idx in 0..total {
                    let mut rest = idx;
                    let mut factors = vec![RationalIntervalSet::unit(); d];
                    for f in factors.iter_mut().rev() {
                        let k = rest % per_axis;
                        rest /= per_axis;
                        let l = &side * q_u128(k);
                        *f = RationalIntervalSet::interval(l.clone(), l + &side, Ambient::Unit)?;
                    }
                    out.push(MeasSet::Torus(TorusSet::product(factors)?));
                    if out.len() == count {
                        break;
                    }
                }
            }
            Family::Interval(Ambient::Ray) => {
                return Err(Error::domain("no canonical family on the ray"))
            }
        }
        level += 1;
    }
    Ok(out)
}

/// `Σ_{i ≤ depth} 2^{-i} (μ(SA_i Δ TA_i) + μ(S⁻¹A_i Δ T⁻¹A_i))` for the set
/// maps `S = s^{s_pow}` and `T = t^{t_pow}`.
pub fn halmos_distance(s: &System, s_pow: i64, t: &System, t_pow: i64, depth: usize) -> Result<Distance> {
    if s.family() != t.family() {
        return Err(Error::domain(format!(
            "systems act on different spaces: {} vs {}",
            s.family(),
            t.family()
        )));
    }
    let family = canonical_family(s.family(), depth)?;
    let mut value = Q::zero();
    for (i, a) in family.iter().enumerate() {
        let fwd = s.image(a, s_pow)?.symdiff(&t.image(a, t_pow)?)?.measure();
        let back = s.image(a, -s_pow)?.symdiff(&t.image(a, -t_pow)?)?.measure();
        value += (fwd + back) / pow2(i + 1);
    }
    Ok(Distance {
        value,
        tail_bound: q_u128(4) / pow2(depth),
        depth,
    })
}

/// `Σ_{i,j ≤ depth} 2^{-i-j} |⟨(U − V)χ_{A_i}, χ_{A_j}⟩|`; exact for exact systems.
pub fn weak_distance(u: &OperatorModel, v: &OperatorModel, depth: usize) -> Result<Distance> {
    let fam = match (u.model().family(), v.model().family()) {
        (Some(f), Some(g)) if f == g => f,
        (Some(_), Some(_)) => return Err(Error::domain("operators act on different spaces")),
        _ => return Err(Error::domain("weak distance needs a probability system")),
    };
    let sets: Vec<ModelSet> = canonical_family(fam, depth)?
        .into_iter()
        .map(ModelSet::Meas)
        .collect();
    let mut value = Q::zero();
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate() {
            let d = u.coefficient(a, b)?.sub(&v.coefficient(a, b)?);
            debug_assert!(d.is_exact());
            let gap = if d.lo < Q::zero() { -d.lo } else { d.lo };
            value += gap / pow2(i + j + 2);
        }
    }
    Ok(Distance {
        value,
        tail_bound: q_u128(2) / pow2(depth),
        depth,
    })
}
