//! Cut-and-spacer programs `(r_j, s_j(i))`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankOneSpec {
    /// `r_j = j + 1`, `s_j(i) = i`. Starts at `r_1 = 2` because every cut needs `r_j ≥ 2`.
    Staircase,
    /// `r_j = 2j`; `s_j(i) = 0` for `i ≤ j`, `1` for `j < i ≤ 2j`.
    Katok,
    /// `r_j = 2`, `s_j(i) = j·h_j + 1`: every spacer run exceeds `L(j)·h_j` with `L(j) = j`.
    /// The total measure is infinite.
    InfiniteL,
    /// Explicit table; stage `j` uses `cuts[j-1]` and `spacers[j-1]`.
    Custom {
        cuts: Vec<u64>,
        spacers: Vec<Vec<u64>>,
    },
}

impl RankOneSpec {
    pub fn custom(cuts: Vec<u64>, spacers: Vec<Vec<u64>>) -> Result<Self> {
        if cuts.is_empty() {
            return Err(Error::domain("custom table needs at least one stage"));
        }
        if cuts.len() != spacers.len() {
            return Err(Error::domain("cuts and spacers tables differ in length"));
        }
        for (j, (r, s)) in cuts.iter().zip(&spacers).enumerate() {
            if *r < 2 {
                return Err(Error::domain(format!("stage {}: r_j must be ≥ 2", j + 1)));
            }
            if s.len() as u64 != *r {
                return Err(Error::domain(format!(
                    "stage {}: expected {} spacer entries, got {}",
                    j + 1,
                    r,
                    s.len()
                )));
            }
        }
        Ok(RankOneSpec::Custom { cuts, spacers })
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "staircase" => Ok(RankOneSpec::Staircase),
            "katok" => Ok(RankOneSpec::Katok),
            "infinite_L" | "infinite_l" | "infinite-l" => Ok(RankOneSpec::InfiniteL),
            other => Err(Error::domain(format!("unknown rank-one preset {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RankOneSpec::Staircase => "staircase",
            RankOneSpec::Katok => "katok",
            RankOneSpec::InfiniteL => "infinite_L",
            RankOneSpec::Custom { .. } => "custom",
        }
    }

    /// `r_j`, or `None` past the end of a custom table.
    pub fn cut(&self, j: usize) -> Option<u64> {
        assert!(j >= 1);
        match self {
            RankOneSpec::Staircase => Some(j as u64 + 1),
            RankOneSpec::Katok => Some(2 * j as u64),
            RankOneSpec::InfiniteL => Some(2),
            RankOneSpec::Custom { cuts, .. } => cuts.get(j - 1).copied(),
        }
    }

    /// `(s_j(1), ..., s_j(r_j))`; `h_j` is needed by `InfiniteL`.
    pub fn spacers(&self, j: usize, h_j: u128) -> Option<Vec<u128>> {
        let r = self.cut(j)? as usize;
        Some(match self {
            RankOneSpec::Staircase => (1..=r as u128).collect(),
            RankOneSpec::Katok => (1..=r).map(|i| u128::from(i > j)).collect(),
            RankOneSpec::InfiniteL => {
                let s = (j as u128).checked_mul(h_j)?.checked_add(1)?;
                vec![s; r]
            }
            RankOneSpec::Custom { spacers, .. } => {
                spacers[j - 1].iter().map(|&s| s as u128).collect()
            }
        })
    }

    /// `L(j)` for which the spacers dominate `L(j)·h_j`, when the preset has one.
    pub fn progression_length(&self, j: usize) -> Option<u64> {
        match self {
            RankOneSpec::InfiniteL => Some(j as u64),
            _ => None,
        }
    }
}

impl fmt::Display for RankOneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_tables_match_formulas() {
        assert_eq!(RankOneSpec::Katok.spacers(3, 14).unwrap(), vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(RankOneSpec::Staircase.spacers(2, 5).unwrap(), vec![1, 2, 3]);
        assert_eq!(RankOneSpec::InfiniteL.spacers(2, 6).unwrap(), vec![13, 13]);
    }

    #[test]
    fn custom_validation() {
        assert!(RankOneSpec::custom(vec![1], vec![vec![0]]).is_err());
        assert!(RankOneSpec::custom(vec![2], vec![vec![0]]).is_err());
        let s = RankOneSpec::custom(vec![2, 3], vec![vec![0, 1], vec![0, 0, 2]]).unwrap();
        assert_eq!(s.cut(2), Some(3));
        assert_eq!(s.cut(3), None);
    }
}
