//! Entropy along arithmetic progressions:
//! `h_j(T, ξ) = (1/L) H(⋁_{p=1}^{L} T^{pj} ξ)` and its profile over `j`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::koopman::canonical_family;
use crate::rank_one::{LevelSet, RankOne};
use crate::rational::{q_u128, to_f64};
use crate::sets::{Family, MeasSet, Partition, JOIN_CELL_CAP};

/// Largest stage-`J` tower the rank-one join walks through.
pub const LEVEL_WALK_CAP: u128 = 1 << 21;

/// A partition of the space of a model. For a rank-one construction the
/// cells are level sets of one stage; everything outside them (the rest of
/// the tower and all later spacers) forms one extra cell.
#[derive(Clone, Debug)]
pub enum ModelPartition {
    Exact(Partition),
    Levels(Vec<LevelSet>),
}

impl ModelPartition {
    /// Number of cells, counting the implicit rank-one remainder.
    pub fn cell_count(&self) -> usize {
        match self {
            ModelPartition::Exact(p) => p.len(),
            ModelPartition::Levels(c) => c.len() + 1,
        }
    }
}

/// `L(j)`: the length of the progression `P_j = {j, 2j, …, L(j)j}`.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProgressionFamily {
    Constant { l: u64 },
    /// `L(j) = a·j`.
    Linear { a: u64 },
    Table { values: Vec<u64> },
}

impl ProgressionFamily {
    pub fn length(&self, j: usize) -> Result<u64> {
        let l = match self {
            ProgressionFamily::Constant { l } => *l,
            ProgressionFamily::Linear { a } => a * j as u64,
            ProgressionFamily::Table { values } => *values
                .get(j - 1)
                .ok_or_else(|| Error::domain(format!("L table has no entry for j = {j}")))?,
        };
        if l == 0 {
            return Err(Error::domain("L(j) must be at least 1"));
        }
        Ok(l)
    }

    pub fn describe(&self) -> String {
        match self {
            ProgressionFamily::Constant { l } => format!("L(j) = {l}"),
            ProgressionFamily::Linear { a } => format!("L(j) = {a}j"),
            ProgressionFamily::Table { values } => format!("L(j) from table {values:?}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProgressionEntropy {
    pub j: usize,
    pub l: u64,
    /// Bounds on `h_j`; equal for exact systems up to rounding.
    pub lo: f64,
    pub hi: f64,
    /// Cells of the (resolved part of the) join.
    pub cells: usize,
    /// Normalized mass whose joint cell was not resolved.
    pub unresolved: f64,
}

/// `(1/L) H(⋁_{p=1}^{L} T^{pj} ξ)`.
pub fn progression_join_entropy(model: &Model, xi: &ModelPartition, j: usize, l: u64) -> Result<ProgressionEntropy> {
    if j == 0 || l == 0 {
        return Err(Error::domain("j and L must be at least 1"));
    }
    match (model, xi) {
        (Model::System(sys), ModelPartition::Exact(p)) => {
            if p.family() != sys.family() {
                return Err(Error::domain("partition does not belong to this system"));
            }
            let shifted = |k: i64| -> Result<Partition> {
                let cells = p
                    .cells()
                    .iter()
                    .map(|c| sys.image(c, k))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Partition::from_parts_unchecked(cells, p.labels().to_vec()))
            };
            let mut join = shifted(j as i64)?;
            for step in 2..=l {
                join = join
                    .join_capped(&shifted(step as i64 * j as i64)?, JOIN_CELL_CAP)
                    .map_err(|e| match e {
                        Error::Resource { message, best } => Error::Resource {
                            message: format!("{message}; try a smaller L"),
                            best,
                        },
                        other => other,
                    })?;
            }
            let h = join.entropy() / l as f64;
            Ok(ProgressionEntropy {
                j,
                l,
                lo: h,
                hi: h,
                cells: join.len(),
                unresolved: 0.0,
            })
        }
        (Model::RankOne(eng), ModelPartition::Levels(cells)) => rank_one_join(eng, cells, j, l),
        _ => Err(Error::domain("partition does not belong to this system")),
    }
}

fn rank_one_join(eng: &RankOne, cells: &[LevelSet], j: usize, l: u64) -> Result<ProgressionEntropy> {
    let m_inf = eng.total_measure()?;
    let stage = cells
        .first()
        .ok_or_else(|| Error::domain("partition needs at least one cell"))?
        .stage;
    if cells.iter().any(|c| c.stage != stage) {
        return Err(Error::domain("all cells must be level sets of one stage"));
    }
    let mut deep = stage;
    while deep < eng.max_stage() && eng.height(deep + 1)? <= LEVEL_WALK_CAP {
        deep += 1;
    }
    let h = eng.height(deep)?;
    if h > LEVEL_WALK_CAP {
        return Err(Error::resource("partition stage is already too fine"));
    }
    // label 0 is the remainder cell
    let mut label = vec![0u32; h as usize];
    for (k, c) in cells.iter().enumerate() {
        eng.validate(c)?;
        for &y in eng.refine(c, deep)?.levels() {
            if label[y as usize] != 0 {
                return Err(Error::domain("partition cells overlap"));
            }
            label[y as usize] = k as u32 + 1;
        }
    }
    let span = l as u128 * j as u128;
    let mut counts: BTreeMap<Vec<u32>, u128> = BTreeMap::new();
    if span < h {
        for y in span..h {
            let key: Vec<u32> = (1..=l as u128)
                .map(|p| label[(y - p * j as u128) as usize])
                .collect();
            *counts.entry(key).or_default() += 1;
        }
    }
    if counts.len() > JOIN_CELL_CAP {
        return Err(Error::resource("join exceeds the cell cap; try a smaller L"));
    }
    // normalize by the upper bound on m_∞: resolved masses are then lower bounds
    // and everything else counts as unresolved
    let w = eng.width(deep)? / &m_inf.hi;
    let masses: Vec<f64> = counts.values().map(|&c| to_f64(&(&w * q_u128(c)))).collect();
    let resolved: f64 = masses.iter().sum();
    let delta = (1.0 - resolved).max(0.0);
    let h_prime: f64 = masses.iter().filter(|&&m| m > 0.0).map(|m| -m * m.ln()).sum();
    let k = (cells.len() + 1) as f64;
    let lf = l as f64;
    let lower = h_prime + xlogx_complement(delta);
    let upper = h_prime - xlogx(delta) + delta * lf * k.ln();
    Ok(ProgressionEntropy {
        j,
        l,
        lo: (lower / lf).max(0.0),
        hi: upper / lf,
        cells: counts.len(),
        unresolved: delta,
    })
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `(1 − δ) ln(1 − δ)`.
fn xlogx_complement(delta: f64) -> f64 {
    xlogx(1.0 - delta)
}

#[derive(Clone, Debug, Serialize)]
pub struct PEntropyProfile {
    pub family: String,
    pub rows: Vec<ProgressionEntropy>,
    /// `max_j` of the lower and upper bounds over the computed range `1..=j_max`:
    /// the finite-horizon stand-in for the limsup.
    pub limsup_lo: f64,
    pub limsup_hi: f64,
    pub j_max: usize,
    /// `H(ξ)` (bounds for rank-one).
    pub partition_entropy: (f64, f64),
}

pub fn pentropy_profile(model: &Model, xi: &ModelPartition, family: &ProgressionFamily, j_max: usize) -> Result<PEntropyProfile> {
    if j_max == 0 {
        return Err(Error::domain("j_max must be at least 1"));
    }
    let rows: Vec<ProgressionEntropy> = (1..=j_max)
        .into_par_iter()
        .map(|j| progression_join_entropy(model, xi, j, family.length(j)?))
        .collect::<Result<_>>()?;
    let h0 = progression_join_entropy(model, xi, 1, 1)?;
    Ok(PEntropyProfile {
        family: family.describe(),
        limsup_lo: rows.iter().map(|r| r.lo).fold(f64::NEG_INFINITY, f64::max),
        limsup_hi: rows.iter().map(|r| r.hi).fold(f64::NEG_INFINITY, f64::max),
        j_max,
        partition_entropy: (h0.lo, h0.hi),
        rows,
    })
}

/// The partitions into the `2ⁿ` canonical sets of level `n`, for `n = 1..=max_level`.
pub fn dyadic_partitions(family: Family, max_level: usize) -> Result<Vec<Partition>> {
    let dim = match family {
        Family::Torus(d) => d,
        _ => 1,
    };
    let per_level = |n: usize| 1usize << (n * dim);
    let all: Vec<MeasSet> = canonical_family(family, (1..=max_level).map(per_level).sum())?;
    let mut out = Vec::new();
    let mut start = 0;
    for n in 1..=max_level {
        out.push(Partition::from_cells(all[start..start + per_level(n)].to_vec())?);
        start += per_level(n);
    }
    Ok(out)
}
