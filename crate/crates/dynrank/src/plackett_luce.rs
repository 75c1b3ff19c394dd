//! The Plackett-Luce distribution on complete and partial rankings.
//!
//! A ranking is built by successively selecting the best remaining item,
//! each time with probability proportional to `exp(worth)` among the items
//! not yet selected. For a partial ranking only the top `m` selections are
//! observed; every unranked item stays in the selection pool at every
//! observed stage, so the stage denominators carry the suffix of ranked
//! items plus the whole unranked pool.
//!
//! All stage denominators are evaluated with streaming log-sum-exp (the
//! running maximum is updated as the pool grows during a single backward
//! pass), so worth spreads of several hundred on the log scale neither
//! overflow nor collapse to zero. Evaluation of the log-probability and the
//! score of one ranking costs `O(n + m)` for a universe of `n` items with
//! `m` of them ranked.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ranking::Ranking;

/// Largest universe for which `fisher_information` will enumerate all
/// permutations. 8! = 40,320 rankings is still cheap; beyond that the
/// factorial growth makes enumeration pointless.
pub const FISHER_ENUMERATION_LIMIT: usize = 8;

/// Log-probability and score of one ranking, computed in a single pass.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Natural log of the probability mass of the ranking.
    pub log_pmf: f64,
    /// Gradient of the log-probability with respect to each item's worth.
    /// Entries sum to zero up to accumulation error.
    pub score: Vec<f64>,
}

/// Reusable buffers for repeated evaluations over the same universe size.
#[derive(Debug, Default)]
pub(crate) struct EvalScratch {
    ranked: Vec<bool>,
    log_denom: Vec<f64>,
    log_prefix: Vec<f64>,
}

/// Streaming log-sum-exp accumulator: running maximum plus the sum of
/// exponentials rescaled to it.
#[inline]
fn lse_push(max: &mut f64, sum: &mut f64, x: f64) {
    if x <= *max {
        *sum += (x - *max).exp();
    } else {
        *sum = *sum * (*max - x).exp() + 1.0;
        *max = x;
    }
}

fn check_inputs(ranking: &Ranking, worths: &[f64]) -> Result<()> {
    if worths.len() != ranking.universe_size() {
        return Err(Error::DimensionMismatch {
            what: "worth vector",
            expected: ranking.universe_size(),
            actual: worths.len(),
        });
    }
    if worths.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("worth vector"));
    }
    Ok(())
}

/// Core evaluation: fills `score_out` and returns the log-pmf.
///
/// One backward pass builds the per-stage log-denominators (suffix of ranked
/// worths plus the unranked pool, with a per-stage running maximum); one
/// forward pass accumulates the prefix log-sums of inverse denominators from
/// which every score entry follows in O(1).
pub(crate) fn evaluate_into(
    ranking: &Ranking,
    worths: &[f64],
    scratch: &mut EvalScratch,
    score_out: &mut [f64],
) -> Result<f64> {
    check_inputs(ranking, worths)?;
    let n = worths.len();
    debug_assert_eq!(score_out.len(), n);
    let ordering = ranking.ordering();
    let m = ordering.len();

    scratch.ranked.clear();
    scratch.ranked.resize(n, false);
    scratch.log_denom.clear();
    scratch.log_denom.resize(m, 0.0);
    scratch.log_prefix.clear();
    scratch.log_prefix.resize(m, 0.0);

    for &i in ordering {
        scratch.ranked[i] = true;
    }

    // Backward pass: start the pool from the unranked items, then add ranked
    // items from worst to best. After pushing ordering[j] the accumulator
    // holds exactly the stage-j pool.
    let mut pool_max = f64::NEG_INFINITY;
    let mut pool_sum = 0.0;
    for (i, &w) in worths.iter().enumerate() {
        if !scratch.ranked[i] {
            lse_push(&mut pool_max, &mut pool_sum, w);
        }
    }
    for j in (0..m).rev() {
        lse_push(&mut pool_max, &mut pool_sum, worths[ordering[j]]);
        scratch.log_denom[j] = pool_max + pool_sum.ln();
    }

    let mut log_pmf = 0.0;
    for (j, &i) in ordering.iter().enumerate() {
        log_pmf += worths[i] - scratch.log_denom[j];
    }

    // Forward pass: log of the running sum of inverse stage denominators.
    let mut pre_max = f64::NEG_INFINITY;
    let mut pre_sum = 0.0;
    for j in 0..m {
        lse_push(&mut pre_max, &mut pre_sum, -scratch.log_denom[j]);
        scratch.log_prefix[j] = pre_max + pre_sum.ln();
    }

    // Ranked item at stage j: 1 - sum_{k<=j} exp(worth - log_denom[k]).
    // Every summand is <= 1 because the item sits in each of those pools,
    // so the exponent worths[i] + log_prefix[j] never overflows.
    let tail = scratch.log_prefix[m - 1];
    for (i, (&w, s)) in worths.iter().zip(score_out.iter_mut()).enumerate() {
        if !scratch.ranked[i] {
            *s = -(w + tail).exp();
        }
    }
    for (j, &i) in ordering.iter().enumerate() {
        score_out[i] = 1.0 - (worths[i] + scratch.log_prefix[j]).exp();
    }

    Ok(log_pmf)
}

/// Log-probability mass of a complete or partial ranking.
pub fn log_pmf(ranking: &Ranking, worths: &[f64]) -> Result<f64> {
    check_inputs(ranking, worths)?;
    let ordering = ranking.ordering();
    let m = ordering.len();
    let n = worths.len();

    let mut ranked = vec![false; n];
    for &i in ordering {
        ranked[i] = true;
    }
    let mut pool_max = f64::NEG_INFINITY;
    let mut pool_sum = 0.0;
    for (i, &w) in worths.iter().enumerate() {
        if !ranked[i] {
            lse_push(&mut pool_max, &mut pool_sum, w);
        }
    }
    let mut log_denoms = vec![0.0; m];
    for j in (0..m).rev() {
        lse_push(&mut pool_max, &mut pool_sum, worths[ordering[j]]);
        log_denoms[j] = pool_max + pool_sum.ln();
    }
    Ok(ordering
        .iter()
        .zip(&log_denoms)
        .map(|(&i, &d)| worths[i] - d)
        .sum())
}

/// Score of a ranking: the gradient of [`log_pmf`] in the worths.
///
/// A ranked item receives one minus its cumulative selection probabilities
/// up to its own stage; an unranked item receives minus the sum of its
/// selection probabilities over all observed stages. Entries sum to zero.
pub fn score(ranking: &Ranking, worths: &[f64]) -> Result<Vec<f64>> {
    Ok(evaluate(ranking, worths)?.score)
}

/// Log-pmf and score in one pass; cheaper than calling both separately.
pub fn evaluate(ranking: &Ranking, worths: &[f64]) -> Result<Evaluation> {
    let mut scratch = EvalScratch::default();
    let mut score = vec![0.0; worths.len()];
    let log_pmf = evaluate_into(ranking, worths, &mut scratch, &mut score)?;
    Ok(Evaluation { log_pmf, score })
}

/// Draw a ranking of the `top` best items by sequential selection: at each
/// stage an unchosen item is selected with probability proportional to
/// `exp(worth)` among the unchosen. `top == worths.len()` draws a complete
/// ranking.
pub fn sample<R: Rng + ?Sized>(worths: &[f64], top: usize, rng: &mut R) -> Result<Ranking> {
    let n = worths.len();
    if worths.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("worth vector"));
    }
    if top == 0 || top > n {
        return Err(Error::InvalidRanking(format!(
            "cannot rank the top {top} of {n} items"
        )));
    }

    let shift = worths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weight: Vec<f64> = worths.iter().map(|&w| (w - shift).exp()).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut ordering = Vec::with_capacity(top);

    for _ in 0..top {
        let mut total: f64 = alive.iter().map(|&i| weight[i]).sum();
        if total <= 0.0 {
            // All remaining weights underflowed relative to the original
            // shift; re-anchor to the maximum of the remaining pool.
            let shift = alive
                .iter()
                .map(|&i| worths[i])
                .fold(f64::NEG_INFINITY, f64::max);
            for &i in &alive {
                weight[i] = (worths[i] - shift).exp();
            }
            total = alive.iter().map(|&i| weight[i]).sum();
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = alive.len() - 1;
        for (pos, &i) in alive.iter().enumerate() {
            acc += weight[i];
            if u < acc {
                chosen = pos;
                break;
            }
        }
        ordering.push(alive[chosen]);
        alive.swap_remove(chosen);
    }
    Ranking::new(n, ordering)
}

/// Visit every permutation of `0..n` (Heap's algorithm).
pub(crate) fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut visit: F) {
    let mut items: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(&items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Fisher information of the distribution at `worths`: the expectation of
/// the outer product of the score over all complete rankings, computed by
/// exhaustive enumeration.
///
/// This is a test oracle; it is never used to scale the score inside the
/// filter recursion. Enumeration is guarded at
/// [`FISHER_ENUMERATION_LIMIT`] items.
pub fn fisher_information(worths: &[f64]) -> Result<DMatrix<f64>> {
    let n = worths.len();
    if n == 0 {
        return Err(Error::InvalidRanking("universe must be non-empty".into()));
    }
    if n > FISHER_ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n,
            limit: FISHER_ENUMERATION_LIMIT,
        });
    }
    if worths.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("worth vector"));
    }

    let mut info = DMatrix::zeros(n, n);
    let mut scratch = EvalScratch::default();
    let mut score = vec![0.0; n];
    let mut enum_err: Result<()> = Ok(());
    for_each_permutation(n, |perm| {
        if enum_err.is_err() {
            return;
        }
        let ranking = match Ranking::new(n, perm.to_vec()) {
            Ok(r) => r,
            Err(e) => {
                enum_err = Err(e);
                return;
            }
        };
        match evaluate_into(&ranking, worths, &mut scratch, &mut score) {
            Ok(log_p) => {
                let p = log_p.exp();
                for r in 0..n {
                    for c in 0..n {
                        info[(r, c)] += p * score[r] * score[c];
                    }
                }
            }
            Err(e) => enum_err = Err(e),
        }
    });
    enum_err?;
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Independent oracle: the direct product form of the pmf, evaluated
    /// naively (no log-sum-exp) for moderate worths.
    fn naive_log_pmf(ranking: &Ranking, worths: &[f64]) -> f64 {
        let ordering = ranking.ordering();
        let unranked = ranking.unranked();
        let mut log_p = 0.0;
        for j in 0..ordering.len() {
            let mut denom: f64 = unranked.iter().map(|&l| worths[l].exp()).sum();
            for &k in &ordering[j..] {
                denom += worths[k].exp();
            }
            log_p += worths[ordering[j]] - denom.ln();
        }
        log_p
    }

    fn all_orderings(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for_each_permutation(n, |p| out.push(p.to_vec()));
        out
    }

    #[test]
    fn uniform_worths_give_uniform_pmf() {
        let r = Ranking::new(3, vec![0, 1, 2]).unwrap();
        let lp = log_pmf(&r, &[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(lp, (1.0f64 / 6.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(lp, -1.791759, epsilon = 1e-6);
    }

    #[test]
    fn two_items_reduce_to_pairwise_comparison() {
        let r = Ranking::new(2, vec![0, 1]).unwrap();
        let lp = log_pmf(&r, &[3.0f64.ln(), 0.0]).unwrap();
        assert_abs_diff_eq!(lp, 0.75f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn partial_single_stage_is_first_place_probability() {
        let r = Ranking::new(3, vec![1]).unwrap();
        let lp = log_pmf(&r, &[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(lp, (1.0f64 / 3.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn matches_direct_product_oracle() {
        let worths = [0.5, -0.2, 1.1, 0.0, -1.4];
        for ordering in all_orderings(5) {
            let r = Ranking::new(5, ordering).unwrap();
            let lp = log_pmf(&r, &worths).unwrap();
            assert_abs_diff_eq!(lp, naive_log_pmf(&r, &worths), epsilon = 1e-12);
        }
        // Partial prefixes as well.
        for ordering in [vec![2, 0], vec![4], vec![1, 3, 0]] {
            let r = Ranking::new(5, ordering).unwrap();
            let lp = log_pmf(&r, &worths).unwrap();
            assert_abs_diff_eq!(lp, naive_log_pmf(&r, &worths), epsilon = 1e-12);
        }
    }

    #[test]
    fn score_trivial_cases() {
        let r = Ranking::new(2, vec![0, 1]).unwrap();
        let s = score(&r, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], -0.5, epsilon = 1e-12);

        let r = Ranking::new(3, vec![0, 1, 2]).unwrap();
        let s = score(&r, &[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[2], -5.0 / 6.0, epsilon = 1e-12);

        // One observed stage: the winner gets 1 - 1/3, everyone else -1/3.
        let r = Ranking::new(3, vec![0]).unwrap();
        let s = score(&r, &[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[2], -1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn score_matches_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for case in 0..20 {
            let n = 6;
            let worths: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let m = 1 + case % n;
            let ranking = sample(&worths, m, &mut rng).unwrap();
            let s = score(&ranking, &worths).unwrap();
            let h = 1e-6;
            for i in 0..n {
                let mut up = worths.clone();
                up[i] += h;
                let mut dn = worths.clone();
                dn[i] -= h;
                let fd = (log_pmf(&ranking, &up).unwrap() - log_pmf(&ranking, &dn).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - s[i]).abs() < 1e-6,
                    "component {i}: fd {fd} vs score {}",
                    s[i]
                );
            }
        }
    }

    #[test]
    fn large_worth_spread_stays_finite() {
        let r = Ranking::new(3, vec![0, 1, 2]).unwrap();
        let worths = [700.0, -700.0, 0.0];
        let e = evaluate(&r, &worths).unwrap();
        assert!(e.log_pmf.is_finite());
        assert!(e.score.iter().all(|s| s.is_finite()));
        // Item 0 dominates: its score is ~0, the bottom item's is ~-1 + selection noise.
        assert_abs_diff_eq!(e.score[0], 0.0, epsilon = 1e-10);
        let zero_sum: f64 = e.score.iter().sum();
        assert!(zero_sum.abs() < 1e-12 * 3.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let r = Ranking::new(3, vec![0, 1, 2]).unwrap();
        assert!(matches!(
            log_pmf(&r, &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            log_pmf(&r, &[0.0, f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(sample(&[0.0, 0.0], 0, &mut ChaCha12Rng::seed_from_u64(1)).is_err());
        assert!(sample(&[0.0, 0.0], 3, &mut ChaCha12Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn single_item_sample_is_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let r = sample(&[1.2345], 1, &mut rng).unwrap();
        assert_eq!(r.ordering(), &[0]);
    }

    #[test]
    fn uniform_sampling_hits_all_permutations_evenly() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let worths = [0.0, 0.0, 0.0];
        let mut counts = std::collections::HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            let r = sample(&worths, 3, &mut rng).unwrap();
            *counts.entry(r.ordering().to_vec()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.01, "freq {freq}");
        }
    }

    #[test]
    fn sampling_matches_pmf_enumeration() {
        let worths = [1.0, 0.0, -1.0, 0.0];
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let draws = 200_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let r = sample(&worths, 4, &mut rng).unwrap();
            *counts.entry(r.ordering().to_vec()).or_insert(0usize) += 1;
        }
        for ordering in all_orderings(4) {
            let r = Ranking::new(4, ordering.clone()).unwrap();
            let p = log_pmf(&r, &worths).unwrap().exp();
            let observed = *counts.get(&ordering).unwrap_or(&0) as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!(
                (observed - p).abs() <= 3.0 * se,
                "ordering {ordering:?}: observed {observed}, expected {p}, se {se}"
            );
        }

        // Top-2 draws follow the partial-ranking pmf as well.
        let mut partial_counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let r = sample(&worths, 2, &mut rng).unwrap();
            *partial_counts.entry(r.ordering().to_vec()).or_insert(0usize) += 1;
        }
        for a in 0..4usize {
            for b in 0..4usize {
                if a == b {
                    continue;
                }
                let r = Ranking::new(4, vec![a, b]).unwrap();
                let p = log_pmf(&r, &worths).unwrap().exp();
                let observed =
                    *partial_counts.get(&vec![a, b]).unwrap_or(&0) as f64 / draws as f64;
                let se = (p * (1.0 - p) / draws as f64).sqrt();
                assert!(
                    (observed - p).abs() <= 3.0 * se,
                    "top-2 ({a},{b}): observed {observed}, expected {p}"
                );
            }
        }
    }

    #[test]
    fn fisher_two_items_closed_form() {
        let info = fisher_information(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(info[(0, 0)], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(info[(0, 1)], -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(info[(1, 0)], -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(info[(1, 1)], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn fisher_row_sums_vanish() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for n in 2..=5usize {
            let worths: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let info = fisher_information(&worths).unwrap();
            for r in 0..n {
                let row_sum: f64 = (0..n).map(|c| info[(r, c)]).sum();
                assert!(row_sum.abs() < 1e-12, "row {r} sums to {row_sum}");
            }
        }
    }

    #[test]
    fn fisher_rejects_large_universe() {
        let worths = vec![0.0; 9];
        assert!(matches!(
            fisher_information(&worths),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn fisher_equals_negative_expected_hessian() {
        // Second identity for the information matrix: the expectation of
        // the finite-difference Hessian of the log-pmf, negated, matches
        // the enumeration of the score outer product.
        let worths = [0.6, -0.3, 0.2];
        let n = worths.len();
        let info = fisher_information(&worths).unwrap();
        let h = 1e-4;
        let mut neg_hess = vec![0.0; n * n];
        for ordering in all_orderings(n) {
            let r = Ranking::new(n, ordering).unwrap();
            let weight = log_pmf(&r, &worths).unwrap().exp();
            for i in 0..n {
                for j in 0..n {
                    let mut w = worths.to_vec();
                    let f = |w: &[f64]| log_pmf(&r, w).unwrap();
                    let hij = if i == j {
                        let f0 = f(&w);
                        w[i] += h;
                        let up = f(&w);
                        w[i] = worths[i] - h;
                        let down = f(&w);
                        (up - 2.0 * f0 + down) / (h * h)
                    } else {
                        let mut total = 0.0;
                        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                            w[i] = worths[i] + si * h;
                            w[j] = worths[j] + sj * h;
                            total += si * sj * f(&w);
                        }
                        total / (4.0 * h * h)
                    };
                    neg_hess[i * n + j] -= weight * hij;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (info[(i, j)] - neg_hess[i * n + j]).abs() < 1e-6,
                    "entry ({i},{j}): {} vs {}",
                    info[(i, j)],
                    neg_hess[i * n + j]
                );
            }
        }
    }

    #[test]
    fn score_has_zero_mean_under_the_model() {
        let worths = [0.4, -0.1, 0.7, -1.0];
        let n = worths.len();
        let mut mean = vec![0.0; n];
        for ordering in all_orderings(n) {
            let r = Ranking::new(n, ordering).unwrap();
            let e = evaluate(&r, &worths).unwrap();
            let p = e.log_pmf.exp();
            for i in 0..n {
                mean[i] += p * e.score[i];
            }
        }
        for (i, m) in mean.iter().enumerate() {
            assert!(m.abs() < 1e-10, "component {i} has mean {m}");
        }
    }

    proptest! {
        #[test]
        fn pmf_is_shift_invariant(
            worths in prop::collection::vec(-5.0f64..5.0, 2..7),
            shift in -50.0f64..50.0,
            seed in any::<u64>(),
        ) {
            let n = worths.len();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let top = rng.random_range(1..=n);
            let ranking = sample(&worths, top, &mut rng).unwrap();
            let base = log_pmf(&ranking, &worths).unwrap();
            let shifted: Vec<f64> = worths.iter().map(|w| w + shift).collect();
            let moved = log_pmf(&ranking, &shifted).unwrap();
            prop_assert!((base - moved).abs() < 1e-10);
        }

        #[test]
        fn score_sums_to_zero(
            worths in prop::collection::vec(-5.0f64..5.0, 2..7),
            seed in any::<u64>(),
        ) {
            let n = worths.len();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let top = rng.random_range(1..=n);
            let ranking = sample(&worths, top, &mut rng).unwrap();
            let s = score(&ranking, &worths).unwrap();
            let total: f64 = s.iter().sum();
            prop_assert!(total.abs() <= 1e-12 * n as f64);
        }

        #[test]
        fn pmf_normalizes_over_complete_rankings(
            worths in prop::collection::vec(-3.0f64..3.0, 2..6),
        ) {
            let n = worths.len();
            let mut total = 0.0;
            for_each_permutation(n, |perm| {
                let r = Ranking::new(n, perm.to_vec()).unwrap();
                total += log_pmf(&r, &worths).unwrap().exp();
            });
            prop_assert!((total - 1.0).abs() < 1e-10);
        }

        #[test]
        fn partial_pmf_marginalizes_completions(
            worths in prop::collection::vec(-3.0f64..3.0, 3..6),
            seed in any::<u64>(),
        ) {
            let n = worths.len();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let top = rng.random_range(1..n);
            let partial = sample(&worths, top, &mut rng).unwrap();
            let direct = log_pmf(&partial, &worths).unwrap().exp();

            // Sum the pmf over every complete ranking extending the partial one.
            let prefix = partial.ordering().to_vec();
            let rest = partial.unranked();
            let mut total = 0.0;
            for_each_permutation(rest.len(), |perm| {
                let mut ordering = prefix.clone();
                ordering.extend(perm.iter().map(|&k| rest[k]));
                let r = Ranking::new(n, ordering).unwrap();
                total += log_pmf(&r, &worths).unwrap().exp();
            });
            prop_assert!((direct - total).abs() < 1e-10);
        }
    }
}
