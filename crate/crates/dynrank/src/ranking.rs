//! Rankings over a fixed universe of items.
//!
//! A [`Ranking`] lists the ranked items of a universe `{0, .., n-1}` in
//! best-first order. When fewer items than the universe size are listed the
//! ranking is *partial*: the remaining items are unranked and implicitly
//! placed below every ranked item. Items are dense `usize` indices; string
//! labels are attached at the I/O boundary, not here.

use crate::error::{Error, Result};

/// A complete or partial ranking: the best-first ordering of the ranked items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    universe: usize,
    ordering: Vec<usize>,
}

impl Ranking {
    /// Build a ranking over a universe of `universe` items from a best-first
    /// ordering of distinct item indices in `0..universe`.
    ///
    /// At least one item must be ranked; duplicates and out-of-range indices
    /// are rejected.
    pub fn new(universe: usize, ordering: Vec<usize>) -> Result<Self> {
        if universe == 0 {
            return Err(Error::InvalidRanking("universe must be non-empty".into()));
        }
        if ordering.is_empty() {
            return Err(Error::InvalidRanking(
                "ordering must rank at least one item".into(),
            ));
        }
        if ordering.len() > universe {
            return Err(Error::InvalidRanking(format!(
                "ordering ranks {} items but the universe holds only {}",
                ordering.len(),
                universe
            )));
        }
        let mut seen = vec![false; universe];
        for &item in &ordering {
            if item >= universe {
                return Err(Error::InvalidRanking(format!(
                    "item index {item} out of range for universe of {universe}"
                )));
            }
            if seen[item] {
                return Err(Error::InvalidRanking(format!(
                    "item index {item} appears more than once"
                )));
            }
            seen[item] = true;
        }
        Ok(Self { universe, ordering })
    }

    /// A complete ranking listing all items of the universe in index order.
    /// Mostly useful in tests.
    pub fn identity(universe: usize) -> Result<Self> {
        Self::new(universe, (0..universe).collect())
    }

    /// Number of items in the universe.
    pub fn universe_size(&self) -> usize {
        self.universe
    }

    /// Number of ranked items.
    pub fn ranked_count(&self) -> usize {
        self.ordering.len()
    }

    /// True when every item of the universe is ranked.
    pub fn is_complete(&self) -> bool {
        self.ordering.len() == self.universe
    }

    /// Best-first ordering of the ranked items.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    /// 1-based rank of `item`, or `None` when it is unranked.
    pub fn rank_of(&self, item: usize) -> Option<usize> {
        self.ordering.iter().position(|&i| i == item).map(|p| p + 1)
    }

    /// Items of the universe that are not ranked, in index order.
    pub fn unranked(&self) -> Vec<usize> {
        let mut ranked = vec![false; self.universe];
        for &i in &self.ordering {
            ranked[i] = true;
        }
        (0..self.universe).filter(|&i| !ranked[i]).collect()
    }
}
