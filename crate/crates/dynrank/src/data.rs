//! Panel data: one ranking per period plus per-item covariate values.

use crate::error::{Error, Result};
use crate::ranking::Ranking;

/// A panel of rankings observed over consecutive periods, with optional
/// time-varying covariates for every item.
///
/// Covariates are stored flat in `(period, item, covariate)` order. A missing
/// covariate cell is an ingestion error, never an imputation; the I/O layer
/// enforces that before this type is constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    n_items: usize,
    n_covariates: usize,
    rankings: Vec<Ranking>,
    covariates: Vec<f64>,
    item_labels: Vec<String>,
    period_labels: Vec<String>,
    covariate_names: Vec<String>,
}

impl PanelDataset {
    pub fn new(
        rankings: Vec<Ranking>,
        covariates: Vec<f64>,
        covariate_names: Vec<String>,
        item_labels: Vec<String>,
        period_labels: Vec<String>,
    ) -> Result<Self> {
        if rankings.is_empty() {
            return Err(Error::DataGeneral("panel holds no periods".into()));
        }
        let n_items = item_labels.len();
        let n_periods = rankings.len();
        let n_covariates = covariate_names.len();
        for (t, r) in rankings.iter().enumerate() {
            if r.universe_size() != n_items {
                return Err(Error::DataGeneral(format!(
                    "ranking for period {} has universe {} but the panel holds {} items",
                    t + 1,
                    r.universe_size(),
                    n_items
                )));
            }
        }
        if covariates.len() != n_periods * n_items * n_covariates {
            return Err(Error::DimensionMismatch {
                what: "covariate array",
                expected: n_periods * n_items * n_covariates,
                actual: covariates.len(),
            });
        }
        if covariates.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("covariate array"));
        }
        if period_labels.len() != n_periods {
            return Err(Error::DimensionMismatch {
                what: "period labels",
                expected: n_periods,
                actual: period_labels.len(),
            });
        }
        let mut sorted = item_labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n_items {
            return Err(Error::DataGeneral("duplicate item labels".into()));
        }
        Ok(Self {
            n_items,
            n_covariates,
            rankings,
            covariates,
            item_labels,
            period_labels,
            covariate_names,
        })
    }

    /// Panel without covariates, with generated item and period labels.
    pub fn from_rankings(rankings: Vec<Ranking>) -> Result<Self> {
        let n_items = rankings.first().map_or(0, |r| r.universe_size());
        let n_periods = rankings.len();
        let item_labels = default_item_labels(n_items);
        let period_labels = (1..=n_periods).map(|t| t.to_string()).collect();
        Self::new(rankings, Vec::new(), Vec::new(), item_labels, period_labels)
    }

    /// Replace the generated item labels.
    pub fn with_item_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_items {
            return Err(Error::DimensionMismatch {
                what: "item labels",
                expected: self.n_items,
                actual: labels.len(),
            });
        }
        self.item_labels = labels;
        Ok(self)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_periods(&self) -> usize {
        self.rankings.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn ranking(&self, t: usize) -> &Ranking {
        &self.rankings[t]
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    /// Value of covariate `j` for item `i` at period `t`.
    pub fn covariate(&self, t: usize, i: usize, j: usize) -> f64 {
        self.covariates[(t * self.n_items + i) * self.n_covariates + j]
    }

    /// All covariate values of period `t`, in `(item, covariate)` order.
    /// Empty when the panel has no covariates.
    pub fn covariate_row(&self, t: usize) -> &[f64] {
        let width = self.n_items * self.n_covariates;
        &self.covariates[t * width..(t + 1) * width]
    }

    pub fn item_labels(&self) -> &[String] {
        &self.item_labels
    }

    pub fn period_labels(&self) -> &[String] {
        &self.period_labels
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Index of the item carrying `label`.
    pub fn item_index(&self, label: &str) -> Option<usize> {
        self.item_labels.iter().position(|l| l == label)
    }

    /// A copy of the panel with items relabelled by `perm`: new item `k` is
    /// old item `perm[k]`. Rankings and covariates move consistently.
    pub fn permute_items(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_items {
            return Err(Error::DimensionMismatch {
                what: "permutation",
                expected: self.n_items,
                actual: perm.len(),
            });
        }
        let mut inverse = vec![usize::MAX; self.n_items];
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            if old_idx >= self.n_items || inverse[old_idx] != usize::MAX {
                return Err(Error::DataGeneral("invalid item permutation".into()));
            }
            inverse[old_idx] = new_idx;
        }
        let rankings = self
            .rankings
            .iter()
            .map(|r| {
                let ordering = r.ordering().iter().map(|&i| inverse[i]).collect();
                Ranking::new(self.n_items, ordering)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut covariates = vec![0.0; self.covariates.len()];
        for t in 0..self.n_periods() {
            for new_idx in 0..self.n_items {
                for j in 0..self.n_covariates {
                    covariates[(t * self.n_items + new_idx) * self.n_covariates + j] =
                        self.covariate(t, perm[new_idx], j);
                }
            }
        }
        let item_labels = perm.iter().map(|&i| self.item_labels[i].clone()).collect();
        Self::new(
            rankings,
            covariates,
            self.covariate_names.clone(),
            item_labels,
            self.period_labels.clone(),
        )
    }
}

/// Zero-padded generated labels: `item01`, `item02`, ...
pub(crate) fn default_item_labels(n_items: usize) -> Vec<String> {
    let width = n_items.to_string().len().max(2);
    (1..=n_items)
        .map(|i| format!("item{i:0width$}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_panel() -> PanelDataset {
        let rankings = vec![
            Ranking::new(3, vec![0, 1, 2]).unwrap(),
            Ranking::new(3, vec![2, 0]).unwrap(),
        ];
        let covariates = vec![1.0, 0.0, 0.5, 0.25, -1.0, 2.0];
        PanelDataset::new(
            rankings,
            covariates,
            vec!["x".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec!["1".into(), "2".into()],
        )
        .unwrap()
    }

    #[test]
    fn indexing_and_lookup() {
        let p = small_panel();
        assert_eq!(p.n_items(), 3);
        assert_eq!(p.n_periods(), 2);
        assert_eq!(p.covariate(1, 2, 0), 2.0);
        assert_eq!(p.covariate_row(0), &[1.0, 0.0, 0.5]);
        assert_eq!(p.item_index("c"), Some(2));
        assert_eq!(p.item_index("z"), None);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let rankings = vec![Ranking::new(2, vec![0, 1]).unwrap()];
        assert!(PanelDataset::new(
            rankings.clone(),
            vec![0.0; 3],
            vec!["x".into()],
            vec!["a".into(), "b".into()],
            vec!["1".into()],
        )
        .is_err());
        assert!(PanelDataset::new(
            rankings,
            vec![],
            vec![],
            vec!["a".into(), "a".into()],
            vec!["1".into()],
        )
        .is_err());
        assert!(PanelDataset::new(vec![], vec![], vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn permutation_moves_everything_together() {
        let p = small_panel();
        let q = p.permute_items(&[2, 0, 1]).unwrap();
        assert_eq!(q.item_labels(), &["c", "a", "b"]);
        // Old item 2 is new item 0: period-2 ordering (c, a) stays first.
        assert_eq!(q.ranking(1).ordering(), &[0, 1]);
        assert_eq!(q.covariate(1, 0, 0), 2.0);
        assert!(p.permute_items(&[0, 0, 1]).is_err());
    }

    #[test]
    fn generated_labels_are_padded() {
        assert_eq!(default_item_labels(3), vec!["item01", "item02", "item03"]);
        assert_eq!(default_item_labels(120).len(), 120);
        assert_eq!(default_item_labels(120)[0], "item001");
    }
}
