//! Concrete measure-preserving systems with exact action on sets and points.
//!
//! Irrational rotation angles are stood in for by rational convergents
//! (`fibonacci(k)` for the golden rotation, `sqrt2_convergent(k)` for √2 − 1).
//! A rotation by `p/q` behaves like the irrational one for times below `q` and
//! is exactly periodic with period `q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, qi, to_f64, Q};
use crate::sets::interval::frac;
use crate::sets::{Ambient, Family, MeasSet};

#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    Rotation { angle: Q },
    Torus { angles: Vec<Q> },
    Bernoulli,
    Baker,
}

#[derive(Clone, Debug, PartialEq)]
pub struct System {
    spec: SystemSpec,
}

/// `F_k / F_{k+1}` with `F_1 = F_2 = 1`.
pub fn fibonacci(k: u32) -> Q {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..k {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    BigRational::new(a, b)
}

/// k-th convergent of `√2 − 1 = [0; 2, 2, 2, ...]`: 1/2, 2/5, 5/12, ...
pub fn sqrt2_convergent(k: u32) -> Q {
    let (mut p, mut q) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    for _ in 0..k {
        let np = &p * 2 + &p1;
        let nq = &q * 2 + &q1;
        p1 = std::mem::replace(&mut p, np);
        q1 = std::mem::replace(&mut q, nq);
    }
    BigRational::new(p, q)
}

pub fn make_system(spec: SystemSpec) -> Result<System> {
    let check = |a: &Q| -> Result<()> {
        if *a < Q::zero() || *a >= Q::one() {
            return Err(Error::domain(format!(
                "rotation angle {} outside [0, 1)",
                fmt_q(a)
            )));
        }
        Ok(())
    };
    match &spec {
        SystemSpec::Rotation { angle } => check(angle)?,
        SystemSpec::Torus { angles } => {
            if angles.is_empty() {
                return Err(Error::domain("torus translation needs at least one angle"));
            }
            angles.iter().try_for_each(check)?;
        }
        SystemSpec::Bernoulli | SystemSpec::Baker => {}
    }
    Ok(System { spec })
}

impl System {
    pub fn rotation(angle: Q) -> Result<Self> {
        make_system(SystemSpec::Rotation { angle })
    }

    pub fn bernoulli() -> Self {
        System {
            spec: SystemSpec::Bernoulli,
        }
    }

    pub fn baker() -> Self {
        System {
            spec: SystemSpec::Baker,
        }
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        match &self.spec {
            SystemSpec::Rotation { .. } => Family::Interval(Ambient::Unit),
            SystemSpec::Torus { angles } => Family::Torus(angles.len()),
            SystemSpec::Bernoulli => Family::Cylinder,
            SystemSpec::Baker => Family::Rectangle,
        }
    }

    /// Exact `T^n S`; negative `n` gives preimages.
    pub fn image(&self, s: &MeasSet, n: i64) -> Result<MeasSet> {
        if s.family() != self.family() {
            return Err(Error::domain(format!(
                "set of family {} given to a system acting on {}",
                s.family(),
                self.family()
            )));
        }
        Ok(match (&self.spec, s) {
            (SystemSpec::Rotation { angle }, MeasSet::Interval(a)) => {
                MeasSet::Interval(a.rotate(&(angle * qi(n))))
            }
            (SystemSpec::Torus { angles }, MeasSet::Torus(a)) => {
                let shift: Vec<Q> = angles.iter().map(|t| t * qi(n)).collect();
                MeasSet::Torus(a.rotate(&shift))
            }
            (SystemSpec::Bernoulli, MeasSet::Cylinder(c)) => MeasSet::Cylinder(c.shift(n)),
            (SystemSpec::Baker, MeasSet::Rectangle(r)) => MeasSet::Rectangle(r.shift(n)),
            _ => unreachable!("family checked above"),
        })
    }

    /// Period of a rational rotation (denominator of the angle, lcm over torus angles).
    pub fn period(&self) -> Option<u64> {
        use num_integer::Integer;
        use num_traits::ToPrimitive;
        match &self.spec {
            SystemSpec::Rotation { angle } => angle.denom().to_u64(),
            SystemSpec::Torus { angles } => angles
                .iter()
                .try_fold(BigInt::one(), |acc, a| Some(acc.lcm(a.denom())))
                .and_then(|l| l.to_u64()),
            _ => None,
        }
    }

    /// `T^n x`.
    pub fn orbit_point(&self, x: &PointState, n: i64) -> Result<PointState> {
        Ok(match (&self.spec, x) {
            (SystemSpec::Rotation { angle }, PointState::Rotation(p)) => {
                PointState::Rotation(frac(&(p + angle * qi(n))))
            }
            (SystemSpec::Torus { angles }, PointState::Torus(p)) if p.len() == angles.len() => {
                PointState::Torus(
                    p.iter()
                        .zip(angles)
                        .map(|(pi, a)| frac(&(pi + a * qi(n))))
                        .collect(),
                )
            }
            (SystemSpec::Bernoulli | SystemSpec::Baker, PointState::Sequence(s)) => {
                PointState::Sequence(s.advanced(n))
            }
            _ => return Err(Error::domain("point does not belong to this system")),
        })
    }

    /// A reproducible starting point derived from `seed`.
    pub fn seeded_point(&self, seed: u64) -> PointState {
        match &self.spec {
            SystemSpec::Rotation { angle } => {
                PointState::Rotation(grid_point(seed, angle.denom()))
            }
            SystemSpec::Torus { angles } => PointState::Torus(
                angles
                    .iter()
                    .enumerate()
                    .map(|(i, a)| grid_point(seed.wrapping_add(i as u64 * 0x9E37), a.denom()))
                    .collect(),
            ),
            SystemSpec::Bernoulli | SystemSpec::Baker => {
                PointState::Sequence(SeqPoint::new(seed))
            }
        }
    }
}

/// Seeded point on the grid `k / (4096 q)`, off the rotation's own orbit lattice.
fn grid_point(seed: u64, q: &BigInt) -> Q {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = q * 4096u32;
    let k = BigInt::from(rng.next_u64()) % &scale;
    BigRational::new(k, scale)
}

#[derive(Clone, Debug)]
pub enum PointState {
    Rotation(Q),
    Torus(Vec<Q>),
    /// Bernoulli and baker points: a seeded two-sided bit sequence.
    Sequence(SeqPoint),
}

impl PointState {
    pub fn contains(&self, s: &MeasSet) -> Result<bool> {
        Ok(match (self, s) {
            (PointState::Rotation(x), MeasSet::Interval(a)) => a.contains(x),
            (PointState::Torus(x), MeasSet::Torus(a)) => a.contains(x),
            (PointState::Sequence(p), MeasSet::Cylinder(c)) => c.contains_with(|z| p.bit(z)),
            (PointState::Sequence(p), MeasSet::Rectangle(r)) => {
                r.code().contains_with(|z| p.bit(z))
            }
            _ => return Err(Error::domain("point and set from different systems")),
        })
    }
}

/// Lazily sampled coordinates `x_z`, `z ∈ Z`, keyed by a seed. Bits come in
/// blocks of 64 from a ChaCha stream per block and are memoized.
#[derive(Debug)]
pub struct BitSource {
    seed: u64,
    cache: Mutex<HashMap<i64, u64>>,
}

impl BitSource {
    pub fn new(seed: u64) -> Self {
        BitSource {
            seed,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn block(&self, b: i64) -> u64 {
        if let Some(w) = self.cache.lock().expect("bit cache poisoned").get(&b) {
            return *w;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // zigzag so negative blocks get their own streams
        rng.set_stream(((b << 1) ^ (b >> 63)) as u64);
        let w = rng.next_u64();
        self.cache.lock().expect("bit cache poisoned").insert(b, w);
        w
    }

    pub fn bit(&self, z: i64) -> bool {
        let b = z.div_euclid(64);
        let off = z.rem_euclid(64);
        (self.block(b) >> off) & 1 == 1
    }
}

/// A point of the shift: `T^cursor` applied to the base sequence.
#[derive(Clone, Debug)]
pub struct SeqPoint {
    source: Arc<BitSource>,
    cursor: i64,
}

impl SeqPoint {
    pub fn new(seed: u64) -> Self {
        SeqPoint {
            source: Arc::new(BitSource::new(seed)),
            cursor: 0,
        }
    }

    pub fn cursor(&self) -> i64 {
        self.cursor
    }

    pub fn source(&self) -> &BitSource {
        &self.source
    }

    /// `(T^cursor x)_z = x_{z - cursor}`.
    pub fn bit(&self, z: i64) -> bool {
        self.source.bit(z - self.cursor)
    }

    pub fn advanced(&self, n: i64) -> Self {
        SeqPoint {
            source: Arc::clone(&self.source),
            cursor: self.cursor + n,
        }
    }

    /// Baker coordinates `(Σ x_i 2^-i, Σ x_{1-i} 2^-i)` to double precision.
    pub fn square_coords(&self) -> (f64, f64) {
        let mut x = 0.0;
        let mut y = 0.0;
        let mut w = 0.5;
        for i in 1..=53 {
            if self.bit(i) {
                x += w;
            }
            if self.bit(1 - i) {
                y += w;
            }
            w *= 0.5;
        }
        (x, y)
    }
}

/// Rotation point as a double, for display.
pub fn rotation_coord(x: &Q) -> f64 {
    to_f64(x)
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.spec {
            SystemSpec::Rotation { angle } => write!(f, "rotation {}", fmt_q(angle)),
            SystemSpec::Torus { angles } => {
                let a: Vec<String> = angles.iter().map(fmt_q).collect();
                write!(f, "torus ({})", a.join(", "))
            }
            SystemSpec::Bernoulli => write!(f, "bernoulli"),
            SystemSpec::Baker => write!(f, "baker"),
        }
    }
}
