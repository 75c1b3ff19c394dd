//! One-step-ahead prediction and ranking-event probabilities.
//!
//! Prediction applies one more recursion step at `T + 1` using the fitted
//! parameters, the filtered state and user-supplied covariates for the next
//! period. Event probabilities condition on a known participant set: only
//! the participants enter the stage denominators. Small events are
//! enumerated exactly; events whose ordered-prefix count exceeds the
//! enumeration guard fall back to Monte Carlo sampling with a reported
//! standard error.

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::filter::{FilterOutput, ModelSpec, ParameterVector, Recursion};
use crate::plackett_luce::sample;

/// A ranking event over a participant set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingEvent {
    participants: Vec<usize>,
    kind: EventKind,
}

/// The event types supported by [`event_probability`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// The best `sequence.len()` participants come out exactly in the given
    /// order.
    ExactOrdering(Vec<usize>),
    /// `item` finishes among the best `k` participants.
    TopK { item: usize, k: usize },
    /// `item` finishes exactly at 1-based rank `rank`.
    AtRank { item: usize, rank: usize },
}

impl RankingEvent {
    pub fn exact_ordering(participants: Vec<usize>, sequence: Vec<usize>) -> Result<Self> {
        let event = Self {
            participants,
            kind: EventKind::ExactOrdering(sequence),
        };
        event.validate()?;
        Ok(event)
    }

    pub fn top_k(participants: Vec<usize>, item: usize, k: usize) -> Result<Self> {
        let event = Self {
            participants,
            kind: EventKind::TopK { item, k },
        };
        event.validate()?;
        Ok(event)
    }

    pub fn at_rank(participants: Vec<usize>, item: usize, rank: usize) -> Result<Self> {
        let event = Self {
            participants,
            kind: EventKind::AtRank { item, rank },
        };
        event.validate()?;
        Ok(event)
    }

    pub fn participants(&self) -> &[usize] {
        &self.participants
    }

    pub fn kind(&self) -> &EventKind {
        &self.kind
    }

    fn validate(&self) -> Result<()> {
        if self.participants.is_empty() {
            return Err(Error::InvalidParameter(
                "an event needs at least one participant".into(),
            ));
        }
        let mut sorted = self.participants.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.participants.len() {
            return Err(Error::InvalidParameter(
                "duplicate items in the participant set".into(),
            ));
        }
        let member = |item: usize| self.participants.contains(&item);
        match &self.kind {
            EventKind::ExactOrdering(seq) => {
                if seq.is_empty() {
                    return Err(Error::InvalidParameter(
                        "the event ordering is empty".into(),
                    ));
                }
                let mut s = seq.clone();
                s.sort_unstable();
                s.dedup();
                if s.len() != seq.len() {
                    return Err(Error::InvalidParameter(
                        "duplicate items in the event ordering".into(),
                    ));
                }
                if !seq.iter().all(|&i| member(i)) {
                    return Err(Error::InvalidParameter(
                        "the event ordering references non-participants".into(),
                    ));
                }
            }
            EventKind::TopK { item, k } => {
                if !member(*item) {
                    return Err(Error::InvalidParameter(
                        "the event item is not a participant".into(),
                    ));
                }
                if *k == 0 || *k > self.participants.len() {
                    return Err(Error::InvalidParameter(format!(
                        "top-{k} is out of range for {} participants",
                        self.participants.len()
                    )));
                }
            }
            EventKind::AtRank { item, rank } => {
                if !member(*item) {
                    return Err(Error::InvalidParameter(
                        "the event item is not a participant".into(),
                    ));
                }
                if *rank == 0 || *rank > self.participants.len() {
                    return Err(Error::InvalidParameter(format!(
                        "rank {rank} is out of range for {} participants",
                        self.participants.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Guards and sample sizes for [`event_probability`].
#[derive(Debug, Clone)]
pub struct EventConfig {
    /// Enumerate exactly while the number of ordered prefixes stays at or
    /// below this bound.
    pub enumeration_limit: u64,
    /// Monte Carlo draws for events beyond the enumeration guard.
    pub mc_draws: u64,
}

impl Default for EventConfig {
    fn default() -> Self {
        Self {
            enumeration_limit: 1_000_000,
            mc_draws: 1_000_000,
        }
    }
}

/// An event probability, exact or Monte Carlo.
#[derive(Debug, Clone)]
pub struct EventEstimate {
    pub probability: f64,
    /// `None` for exact enumeration; the binomial standard error for Monte
    /// Carlo estimates.
    pub std_error: Option<f64>,
    pub exact: bool,
}

/// Worths for period `T + 1`: one recursion step past the filtered sample.
///
/// `next_covariates` holds the covariate values of the next period in
/// `(item, covariate)` order; pass an empty slice for a model without
/// covariates.
pub fn predict_worth(fit: &FitResult, next_covariates: &[f64]) -> Result<Vec<f64>> {
    predict_worth_with(&fit.params, &fit.spec, &fit.filter, next_covariates)
}

/// [`predict_worth`] from explicit parameters, spec and filter state.
pub fn predict_worth_with(
    params: &ParameterVector,
    spec: &ModelSpec,
    filter: &FilterOutput,
    next_covariates: &[f64],
) -> Result<Vec<f64>> {
    let n = spec.n_items();
    let m = spec.n_covariates();
    if next_covariates.len() != n * m {
        return Err(Error::DimensionMismatch {
            what: "next-period covariates",
            expected: n * m,
            actual: next_covariates.len(),
        });
    }
    if next_covariates.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("next-period covariates"));
    }
    if filter.n_items() != n {
        return Err(Error::DimensionMismatch {
            what: "filter output",
            expected: n,
            actual: filter.n_items(),
        });
    }
    let recursion = Recursion::new(params, spec, None)?;
    let mut out = vec![0.0; n];
    recursion.step(
        filter.n_periods(),
        next_covariates,
        filter.worth_path(),
        filter.score_path(),
        &mut out,
    );
    Ok(out)
}

/// Participants sorted best-first by worth; ties break toward the lower
/// item index, deterministically.
pub fn predicted_ranking(worths: &[f64], participants: &[usize]) -> Result<Vec<usize>> {
    if participants.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot rank an empty participant set".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for &p in participants {
        if p >= worths.len() {
            return Err(Error::InvalidParameter(format!(
                "participant {p} is outside the universe of {}",
                worths.len()
            )));
        }
        if !seen.insert(p) {
            return Err(Error::InvalidParameter(format!(
                "participant {p} appears twice"
            )));
        }
    }
    let mut order = participants.to_vec();
    order.sort_by(|&a, &b| {
        worths[b]
            .partial_cmp(&worths[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// First-place probability of every participant: the softmax of their
/// worths. Sums to one up to rounding.
pub fn winner_probabilities(worths: &[f64], participants: &[usize]) -> Result<Vec<f64>> {
    let weights = participant_weights(worths, participants)?;
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

fn participant_weights(worths: &[f64], participants: &[usize]) -> Result<Vec<f64>> {
    if participants.is_empty() {
        return Err(Error::InvalidParameter("empty participant set".into()));
    }
    let mut max = f64::NEG_INFINITY;
    for &p in participants {
        if p >= worths.len() {
            return Err(Error::InvalidParameter(format!(
                "participant {p} is outside the universe of {}",
                worths.len()
            )));
        }
        if !worths[p].is_finite() {
            return Err(Error::NonFinite("worth vector"));
        }
        max = max.max(worths[p]);
    }
    Ok(participants.iter().map(|&p| (worths[p] - max).exp()).collect())
}

/// Number of ordered prefixes of length `depth` drawn from `pool` items.
fn prefix_count(pool: usize, depth: usize) -> u64 {
    let mut count: u64 = 1;
    for j in 0..depth {
        count = count.saturating_mul((pool - j) as u64);
    }
    count
}

/// Probability of a ranking event at the given worths.
///
/// Exact orderings are always a single product. Top-k and at-rank events
/// enumerate ordered prefixes while their count stays within
/// `config.enumeration_limit`, otherwise they are estimated from
/// `config.mc_draws` sequential samples restricted to the participants.
pub fn event_probability<R: Rng + ?Sized>(
    worths: &[f64],
    event: &RankingEvent,
    config: &EventConfig,
    rng: &mut R,
) -> Result<EventEstimate> {
    event.validate()?;
    let participants = &event.participants;
    let weights = participant_weights(worths, participants)?;
    let local = |item: usize| participants.iter().position(|&p| p == item).unwrap();

    match event.kind() {
        EventKind::ExactOrdering(seq) => {
            let mut remaining: f64 = weights.iter().sum();
            let mut prob = 1.0;
            for &item in seq {
                let w = weights[local(item)];
                prob *= w / remaining;
                remaining -= w;
            }
            Ok(EventEstimate {
                probability: prob,
                std_error: None,
                exact: true,
            })
        }
        EventKind::TopK { item, k } => {
            if prefix_count(participants.len(), *k) <= config.enumeration_limit {
                let total: f64 = weights.iter().sum();
                let mut chosen = vec![false; weights.len()];
                let p = top_k_recurse(&weights, &mut chosen, local(*item), *k, total, 1.0);
                Ok(EventEstimate {
                    probability: p,
                    std_error: None,
                    exact: true,
                })
            } else {
                monte_carlo(&weights_to_logs(&weights), *k, rng, config.mc_draws, |top| {
                    top.contains(&local(*item))
                })
            }
        }
        EventKind::AtRank { item, rank } => {
            if prefix_count(participants.len().saturating_sub(1), rank - 1)
                <= config.enumeration_limit
            {
                let total: f64 = weights.iter().sum();
                let mut chosen = vec![false; weights.len()];
                let p = at_rank_recurse(&weights, &mut chosen, local(*item), *rank, total, 1.0);
                Ok(EventEstimate {
                    probability: p,
                    std_error: None,
                    exact: true,
                })
            } else {
                monte_carlo(&weights_to_logs(&weights), *rank, rng, config.mc_draws, |top| {
                    top.last() == Some(&local(*item))
                })
            }
        }
    }
}

fn weights_to_logs(weights: &[f64]) -> Vec<f64> {
    weights.iter().map(|w| w.ln()).collect()
}

/// Sum of prefix probabilities over prefixes that select `target` within
/// `depth_left` more stages. Once the target is selected, the prefix
/// probability already equals the probability of all its completions.
fn top_k_recurse(
    weights: &[f64],
    chosen: &mut [bool],
    target: usize,
    depth_left: usize,
    remaining: f64,
    prefix_prob: f64,
) -> f64 {
    if depth_left == 0 {
        return 0.0;
    }
    // Selecting the target now contributes the whole branch.
    let mut total = prefix_prob * weights[target] / remaining;
    if depth_left > 1 {
        for i in 0..weights.len() {
            if i == target || chosen[i] {
                continue;
            }
            chosen[i] = true;
            total += top_k_recurse(
                weights,
                chosen,
                target,
                depth_left - 1,
                remaining - weights[i],
                prefix_prob * weights[i] / remaining,
            );
            chosen[i] = false;
        }
    }
    total
}

/// Sum of prefix probabilities whose `rank`-th selection is `target`.
fn at_rank_recurse(
    weights: &[f64],
    chosen: &mut [bool],
    target: usize,
    rank: usize,
    remaining: f64,
    prefix_prob: f64,
) -> f64 {
    if rank == 1 {
        return prefix_prob * weights[target] / remaining;
    }
    let mut total = 0.0;
    for i in 0..weights.len() {
        if i == target || chosen[i] {
            continue;
        }
        chosen[i] = true;
        total += at_rank_recurse(
            weights,
            chosen,
            target,
            rank - 1,
            remaining - weights[i],
            prefix_prob * weights[i] / remaining,
        );
        chosen[i] = false;
    }
    total
}

fn monte_carlo<R: Rng + ?Sized>(
    local_worths: &[f64],
    depth: usize,
    rng: &mut R,
    draws: u64,
    hit: impl Fn(&[usize]) -> bool,
) -> Result<EventEstimate> {
    let mut hits = 0u64;
    for _ in 0..draws {
        let ranking = sample(local_worths, depth, rng)?;
        if hit(ranking.ordering()) {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    Ok(EventEstimate {
        probability: p,
        std_error: Some((p * (1.0 - p) / draws as f64).sqrt()),
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PanelDataset;
    use crate::estimate::fit;
    use crate::filter::{filter_path, AbsentMode, Variant};
    use crate::optim::OptimizerConfig;
    use crate::ranking::Ranking;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(4242)
    }

    #[test]
    fn pairwise_event_probability() {
        let worths = [3.0f64.ln(), 0.0];
        let event = RankingEvent::exact_ordering(vec![0, 1], vec![0]).unwrap();
        let e = event_probability(&worths, &event, &EventConfig::default(), &mut rng()).unwrap();
        assert!(e.exact);
        assert_abs_diff_eq!(e.probability, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn equal_worths_top_three_of_four() {
        let worths = [0.0; 4];
        for item in 0..4 {
            let event = RankingEvent::top_k(vec![0, 1, 2, 3], item, 3).unwrap();
            let e =
                event_probability(&worths, &event, &EventConfig::default(), &mut rng()).unwrap();
            assert!(e.exact);
            assert_abs_diff_eq!(e.probability, 0.75, epsilon = 1e-13);
        }
    }

    #[test]
    fn top_k_is_monotone_and_saturates() {
        let worths = [0.7, -0.3, 0.1, -0.9, 0.4];
        let participants = vec![0, 1, 2, 3, 4];
        let mut previous = 0.0;
        for k in 1..=5 {
            let event = RankingEvent::top_k(participants.clone(), 1, k).unwrap();
            let e =
                event_probability(&worths, &event, &EventConfig::default(), &mut rng()).unwrap();
            assert!(e.probability >= previous - 1e-12);
            previous = e.probability;
        }
        assert_abs_diff_eq!(previous, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn at_rank_probabilities_sum_to_one_per_item() {
        let worths = [0.9, -0.2, 0.3, -0.6];
        let participants = vec![0, 1, 2, 3];
        for item in participants.clone() {
            let mut total = 0.0;
            for rank in 1..=4 {
                let event = RankingEvent::at_rank(participants.clone(), item, rank).unwrap();
                let e = event_probability(&worths, &event, &EventConfig::default(), &mut rng())
                    .unwrap();
                total += e.probability;
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn winner_probabilities_sum_to_one() {
        let worths = [1.3, -0.4, 0.2, 2.1, -1.0, 0.0];
        let participants = vec![0, 2, 3, 5];
        let probs = winner_probabilities(&worths, &participants).unwrap();
        let total: f64 = probs.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        // The best participant also tops the predicted ranking.
        let ranking = predicted_ranking(&worths, &participants).unwrap();
        let best = participants[probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0];
        assert_eq!(ranking[0], best);
    }

    #[test]
    fn events_are_shift_invariant() {
        let worths = [0.4, -0.1, 0.8, 0.0];
        let shifted: Vec<f64> = worths.iter().map(|w| w + 123.0).collect();
        let event = RankingEvent::top_k(vec![0, 1, 2, 3], 2, 2).unwrap();
        let a = event_probability(&worths, &event, &EventConfig::default(), &mut rng()).unwrap();
        let b = event_probability(&shifted, &event, &EventConfig::default(), &mut rng()).unwrap();
        assert_abs_diff_eq!(a.probability, b.probability, epsilon = 1e-12);
    }

    #[test]
    fn enumeration_agrees_with_monte_carlo() {
        let worths = [0.5, -0.2, 1.1, 0.0, -1.4, 0.3, -0.7, 0.9];
        let participants: Vec<usize> = (0..8).collect();
        let event = RankingEvent::top_k(participants, 4, 3).unwrap();
        let exact =
            event_probability(&worths, &event, &EventConfig::default(), &mut rng()).unwrap();
        assert!(exact.exact);
        let tight = EventConfig {
            enumeration_limit: 10,
            mc_draws: 200_000,
        };
        let mc = event_probability(&worths, &event, &tight, &mut rng()).unwrap();
        assert!(!mc.exact);
        let se = mc.std_error.unwrap();
        assert!(
            (mc.probability - exact.probability).abs() <= 3.0 * se,
            "mc {} vs exact {} (se {se})",
            mc.probability,
            exact.probability
        );
    }

    #[test]
    fn ranking_sorts_by_worth_with_index_ties() {
        let worths = [1.0, 3.0, 2.0];
        let order = predicted_ranking(&worths, &[0, 1, 2]).unwrap();
        assert_eq!(order, vec![1, 2, 0]);
        let tied = [0.5, 0.5, 0.5];
        assert_eq!(predicted_ranking(&tied, &[2, 0, 1]).unwrap(), vec![0, 1, 2]);
        let strengths = [3.974, 3.970, 3.431, 3.415, 3.400, 2.086];
        assert_eq!(
            predicted_ranking(&strengths, &[0, 1, 2, 3, 4, 5]).unwrap(),
            vec![0, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn event_validation_errors() {
        assert!(RankingEvent::top_k(vec![], 0, 1).is_err());
        assert!(RankingEvent::top_k(vec![0, 1], 2, 1).is_err());
        assert!(RankingEvent::top_k(vec![0, 1], 0, 3).is_err());
        assert!(RankingEvent::at_rank(vec![0, 1], 0, 0).is_err());
        assert!(RankingEvent::exact_ordering(vec![0, 1], vec![0, 0]).is_err());
        assert!(RankingEvent::exact_ordering(vec![0, 1], vec![2]).is_err());
        assert!(predicted_ranking(&[0.0], &[]).is_err());
    }

    #[test]
    fn static_prediction_returns_intercepts() {
        let mut r = rng();
        let worths = [0.6, -0.1, -0.5];
        let rankings: Vec<Ranking> = (0..150)
            .map(|_| crate::plackett_luce::sample(&worths, 3, &mut r).unwrap())
            .collect();
        let data = PanelDataset::from_rankings(rankings).unwrap();
        let spec = ModelSpec::static_model(3, 0).unwrap();
        let config = OptimizerConfig {
            restarts: 1,
            ..OptimizerConfig::default()
        };
        let fitted = fit(&data, &spec, &config).unwrap();
        let predicted = predict_worth(&fitted, &[]).unwrap();
        for (p, w) in predicted.iter().zip(&fitted.params.omega) {
            assert_abs_diff_eq!(*p, *w, epsilon = 1e-12);
        }
    }

    #[test]
    fn mean_reverting_fixed_point_is_preserved() {
        // With a zero score loading and the filter initialized at the
        // unconditional worth, every filtered row stays there, and so does
        // the one-step-ahead prediction.
        let n = 3;
        let spec = ModelSpec::new(Variant::MeanReverting, n, 0, 1, 1)
            .unwrap()
            .with_absent_mode(AbsentMode::PartialLikelihood);
        let params =
            ParameterVector::new(vec![0.3, -0.1, -0.2], vec![], vec![0.0], vec![0.5]).unwrap();
        let data = PanelDataset::from_rankings(vec![
            Ranking::new(n, vec![0, 1, 2]).unwrap(),
            Ranking::new(n, vec![2, 1, 0]).unwrap(),
        ])
        .unwrap();
        let filter = filter_path(&params, &spec, &data).unwrap();
        let fixed = crate::filter::unconditional_worth(&params, &spec).unwrap();
        let predicted = predict_worth_with(&params, &spec, &filter, &[]).unwrap();
        for (p, f) in predicted.iter().zip(&fixed) {
            assert_abs_diff_eq!(*p, *f, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_step_ahead_matches_manual_recursion() {
        let n = 4;
        let spec = ModelSpec::mean_reverting(n, 1).unwrap();
        let params = ParameterVector::new(
            vec![0.5, 0.1, -0.2, -0.4],
            vec![0.9],
            vec![0.4],
            vec![0.6],
        )
        .unwrap();
        let mut r = rng();
        let sim = crate::simulate::simulate_panel(
            &params,
            &spec,
            12,
            &crate::simulate::SimulateOptions::default(),
            &mut r,
        )
        .unwrap();
        let filter = filter_path(&params, &spec, &sim.data).unwrap();
        let next_cov = [0.2, -0.1, 0.0, 1.0];
        let predicted = predict_worth_with(&params, &spec, &filter, &next_cov).unwrap();
        let last = filter.n_periods() - 1;
        for i in 0..n {
            let expected = params.omega[i]
                + 0.9 * next_cov[i]
                + 0.4 * filter.score_row(last)[i]
                + 0.6 * filter.worth_row(last)[i];
            assert_abs_diff_eq!(predicted[i], expected, epsilon = 1e-12);
        }
        // Dimension mismatch is rejected.
        assert!(predict_worth_with(&params, &spec, &filter, &[0.0; 3]).is_err());
    }
}
