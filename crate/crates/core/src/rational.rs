//! Exact rationals and rational bounds.
//!
//! `Q` is an arbitrary-precision rational kept in lowest terms with a positive
//! denominator (guaranteed by `num_rational::BigRational`). Text form is `p/q`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_u128(n: u128) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or `p`. Rejects zero denominators and anything else.
pub fn parse_q(text: &str) -> Result<Q> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::parse(format!("malformed rational {text:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::parse(format!("malformed rational {text:?}")))?;
    if d.is_zero() {
        return Err(Error::parse(format!("zero denominator in {text:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Canonical `p/q` text, always with an explicit denominator.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Huge numerators and denominators: fall back to a scaled division.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact conversion of a finite double.
pub fn from_f64(x: f64) -> Result<Q> {
    BigRational::from_float(x).ok_or_else(|| Error::domain(format!("non-finite value {x}")))
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Closed rational interval `[lo, hi]` holding an exactly-bounded quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lo: Q,
    pub hi: Q,
}

impl Bounds {
    pub fn new(lo: Q, hi: Q) -> Self {
        debug_assert!(lo <= hi, "inverted bounds");
        Bounds { lo, hi }
    }

    pub fn exact(v: Q) -> Self {
        Bounds {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn zero() -> Self {
        Bounds::exact(Q::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Q) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// `self ⊆ outer`.
    pub fn within(&self, outer: &Bounds) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / qi(2)
    }

    pub fn mid_f64(&self) -> f64 {
        to_f64(&self.mid())
    }

    pub fn add(&self, other: &Bounds) -> Bounds {
        Bounds::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Bounds) -> Bounds {
        Bounds::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn scale(&self, c: &Q) -> Bounds {
        if c.is_negative() {
            Bounds::new(&self.hi * c, &self.lo * c)
        } else {
            Bounds::new(&self.lo * c, &self.hi * c)
        }
    }

    pub fn mul(&self, other: &Bounds) -> Bounds {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Bounds::new(lo, hi)
    }

    /// Division by a strictly positive interval.
    pub fn div_pos(&self, d: &Bounds) -> Bounds {
        debug_assert!(d.lo.is_positive());
        let inv = Bounds::new(d.hi.recip(), d.lo.recip());
        self.mul(&inv)
    }

    /// Range of `|x - t|` over the interval.
    pub fn abs_dev(&self, t: &Q) -> Bounds {
        let a = (&self.lo - t).abs();
        let b = (&self.hi - t).abs();
        let hi = max_q(&a, &b);
        let lo = if self.contains(t) { Q::zero() } else { min_q(&a, &b) };
        Bounds::new(lo, hi)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", fmt_q(&self.lo))
        } else {
            write!(f, "[{}, {}]", fmt_q(&self.lo), fmt_q(&self.hi))
        }
    }
}

/// Serializes a rational as its `p/q` string.
pub fn ser_q<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

impl Serialize for Bounds {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Bounds", 4)?;
        st.serialize_field("lo", &fmt_q(&self.lo))?;
        st.serialize_field("hi", &fmt_q(&self.hi))?;
        st.serialize_field("lo_f64", &to_f64(&self.lo))?;
        st.serialize_field("hi_f64", &to_f64(&self.hi))?;
        st.end()
    }
}
