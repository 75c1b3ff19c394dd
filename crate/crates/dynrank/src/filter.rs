//! Score-driven filtering of the worth parameters.
//!
//! Each item's worth follows the observation-driven recursion
//!
//! ```text
//! f[i,t] = omega[i] + sum_j beta[j] x[i,t,j]
//!          + sum_k alpha[k] score[i, t-k] + sum_l phi[l] f[i, t-l]
//! ```
//!
//! where the score is the gradient of the ranking log-likelihood at the
//! filtered worths, used with unit scaling. Pre-sample scores are zero
//! (their expectation); pre-sample worths default to the unconditional
//! value for the static and mean-reverting variants and to `omega` for the
//! random-walk variant, where the unconditional value is undefined.

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::plackett_luce::{evaluate_into, EvalScratch};
use crate::ranking::Ranking;

/// Filtering aborts once any worth magnitude passes this bound; the
/// optimizer maps the error to a penalty so that line searches stay finite.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Restrictions on the recursion orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// No dynamics: `P = Q = 0`; the worths are fixed effects plus
    /// covariate terms.
    Static,
    /// Score and autoregressive terms with `|phi| < 1` expected; the only
    /// variant with a finite unconditional worth for `phi != 0`.
    MeanReverting,
    /// Autoregressive coefficient pinned at one; `phi` is not estimated.
    RandomWalk,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Static => "static",
            Variant::MeanReverting => "mean-reverting",
            Variant::RandomWalk => "random-walk",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Variant::Static),
            "mean-reverting" => Ok(Variant::MeanReverting),
            "random-walk" => Ok(Variant::RandomWalk),
            other => Err(Error::Usage(format!(
                "unknown variant '{other}' (expected static, mean-reverting or random-walk)"
            ))),
        }
    }
}

/// How items missing from a period's ranking are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsentMode {
    /// Missing items stay in every stage denominator and receive the
    /// partial-ranking score: they are implicitly ranked below the observed
    /// items.
    PartialLikelihood,
    /// Missing items are dropped from the period's likelihood entirely and
    /// their score is forced to zero before entering future recursions.
    ZeroScore,
}

impl AbsentMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AbsentMode::PartialLikelihood => "partial-likelihood",
            AbsentMode::ZeroScore => "zero-score",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "partial-likelihood" => Ok(AbsentMode::PartialLikelihood),
            "zero-score" => Ok(AbsentMode::ZeroScore),
            other => Err(Error::Usage(format!(
                "unknown absent mode '{other}' (expected partial-likelihood or zero-score)"
            ))),
        }
    }
}

/// Model shape: universe size, covariate count, recursion orders and the
/// variant restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    n_items: usize,
    n_covariates: usize,
    score_order: usize,
    ar_order: usize,
    variant: Variant,
    absent_mode: AbsentMode,
}

impl ModelSpec {
    pub fn new(
        variant: Variant,
        n_items: usize,
        n_covariates: usize,
        score_order: usize,
        ar_order: usize,
    ) -> Result<Self> {
        if n_items < 2 {
            return Err(Error::InvalidSpec(
                "a ranking model needs at least two items".into(),
            ));
        }
        match variant {
            Variant::Static => {
                if score_order != 0 || ar_order != 0 {
                    return Err(Error::InvalidSpec(
                        "the static variant requires score and autoregressive orders of zero"
                            .into(),
                    ));
                }
            }
            Variant::MeanReverting => {
                if score_order == 0 || ar_order == 0 {
                    return Err(Error::InvalidSpec(
                        "the mean-reverting variant requires score and autoregressive orders of at least one".into(),
                    ));
                }
            }
            Variant::RandomWalk => {
                if score_order == 0 || ar_order != 1 {
                    return Err(Error::InvalidSpec(
                        "the random-walk variant requires a score order of at least one and an autoregressive order of exactly one".into(),
                    ));
                }
            }
        }
        Ok(Self {
            n_items,
            n_covariates,
            score_order,
            ar_order,
            variant,
            absent_mode: AbsentMode::PartialLikelihood,
        })
    }

    /// Static variant: `P = Q = 0`.
    pub fn static_model(n_items: usize, n_covariates: usize) -> Result<Self> {
        Self::new(Variant::Static, n_items, n_covariates, 0, 0)
    }

    /// Mean-reverting variant with first-order dynamics: `P = Q = 1`.
    pub fn mean_reverting(n_items: usize, n_covariates: usize) -> Result<Self> {
        Self::new(Variant::MeanReverting, n_items, n_covariates, 1, 1)
    }

    /// Random-walk variant: `P = 1`, `Q = 1` with `phi` fixed at one.
    pub fn random_walk(n_items: usize, n_covariates: usize) -> Result<Self> {
        Self::new(Variant::RandomWalk, n_items, n_covariates, 1, 1)
    }

    pub fn with_absent_mode(mut self, mode: AbsentMode) -> Self {
        self.absent_mode = mode;
        self
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn score_order(&self) -> usize {
        self.score_order
    }

    pub fn ar_order(&self) -> usize {
        self.ar_order
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn absent_mode(&self) -> AbsentMode {
        self.absent_mode
    }

    /// Number of free parameters: `N + M + P + Q - 1`, with the random-walk
    /// variant excluding the pinned autoregressive coefficient.
    pub fn free_param_len(&self) -> usize {
        let q_free = match self.variant {
            Variant::RandomWalk => 0,
            _ => self.ar_order,
        };
        self.n_items - 1 + self.n_covariates + self.score_order + q_free
    }

    fn check_data(&self, data: &PanelDataset) -> Result<()> {
        if data.n_items() != self.n_items {
            return Err(Error::DimensionMismatch {
                what: "panel item count",
                expected: self.n_items,
                actual: data.n_items(),
            });
        }
        if data.n_covariates() != self.n_covariates {
            return Err(Error::DimensionMismatch {
                what: "panel covariate count",
                expected: self.n_covariates,
                actual: data.n_covariates(),
            });
        }
        Ok(())
    }
}

/// Full parameter set: per-item intercepts summing to zero, regression
/// coefficients, score loadings and autoregressive coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub omega: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ParameterVector {
    /// Validates finiteness and the zero-sum identification of `omega`.
    pub fn new(omega: Vec<f64>, beta: Vec<f64>, alpha: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let all = omega.iter().chain(&beta).chain(&alpha).chain(&phi);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        let sum: f64 = omega.iter().sum();
        let scale: f64 = omega.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
        if sum.abs() > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "omega must sum to zero (got {sum:e})"
            )));
        }
        Ok(Self {
            omega,
            beta,
            alpha,
            phi,
        })
    }

    /// Rebuild from a free-parameter slice ordered as
    /// `(omega_1..omega_{N-1}, beta, alpha, phi)`; the last intercept is the
    /// negated sum of the others and the random-walk variant carries
    /// `phi = 1` implicitly.
    pub fn from_free(spec: &ModelSpec, free: &[f64]) -> Result<Self> {
        let expected = spec.free_param_len();
        if free.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "free parameter vector",
                expected,
                actual: free.len(),
            });
        }
        let n = spec.n_items();
        let mut omega = Vec::with_capacity(n);
        omega.extend_from_slice(&free[..n - 1]);
        omega.push(-free[..n - 1].iter().sum::<f64>());
        let mut at = n - 1;
        let beta = free[at..at + spec.n_covariates()].to_vec();
        at += spec.n_covariates();
        let alpha = free[at..at + spec.score_order()].to_vec();
        at += spec.score_order();
        let phi = match spec.variant() {
            Variant::RandomWalk => vec![1.0],
            _ => free[at..at + spec.ar_order()].to_vec(),
        };
        if omega.iter().any(|x| !x.is_finite())
            || beta.iter().any(|x| !x.is_finite())
            || alpha.iter().any(|x| !x.is_finite())
            || phi.iter().any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("free parameter vector"));
        }
        Ok(Self {
            omega,
            beta,
            alpha,
            phi,
        })
    }

    /// Inverse of [`ParameterVector::from_free`].
    pub fn to_free(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut free = Vec::with_capacity(spec.free_param_len());
        free.extend_from_slice(&self.omega[..self.omega.len() - 1]);
        free.extend_from_slice(&self.beta);
        free.extend_from_slice(&self.alpha);
        if spec.variant() != Variant::RandomWalk {
            free.extend_from_slice(&self.phi);
        }
        free
    }

    pub fn check_dims(&self, spec: &ModelSpec) -> Result<()> {
        let checks = [
            ("omega", self.omega.len(), spec.n_items()),
            ("beta", self.beta.len(), spec.n_covariates()),
            ("alpha", self.alpha.len(), spec.score_order()),
            ("phi", self.phi.len(), spec.ar_order()),
        ];
        for (what, actual, expected) in checks {
            if actual != expected {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }
}

/// Output of one filtering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    n_items: usize,
    worth_path: Vec<f64>,
    score_path: Vec<f64>,
    per_period_loglik: Vec<f64>,
    total_loglik: f64,
}

impl FilterOutput {
    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_periods(&self) -> usize {
        self.per_period_loglik.len()
    }

    /// Worths used for period `t`'s likelihood.
    pub fn worth_row(&self, t: usize) -> &[f64] {
        &self.worth_path[t * self.n_items..(t + 1) * self.n_items]
    }

    /// Score of period `t` as it enters later recursions (zeroed for absent
    /// items under [`AbsentMode::ZeroScore`]).
    pub fn score_row(&self, t: usize) -> &[f64] {
        &self.score_path[t * self.n_items..(t + 1) * self.n_items]
    }

    pub fn worth_path(&self) -> &[f64] {
        &self.worth_path
    }

    pub fn score_path(&self) -> &[f64] {
        &self.score_path
    }

    pub fn per_period_loglik(&self) -> &[f64] {
        &self.per_period_loglik
    }

    pub fn total_loglik(&self) -> f64 {
        self.total_loglik
    }
}

/// Fixed point of the mean-reverting recursion with zero score and no
/// covariates: `omega / (1 - sum(phi))`. For the static variant this is
/// `omega` itself. Fails with [`Error::UnitRoot`] when the denominator is
/// numerically zero, as for the random-walk variant.
pub fn unconditional_worth(params: &ParameterVector, spec: &ModelSpec) -> Result<Vec<f64>> {
    params.check_dims(spec)?;
    let denom = 1.0 - params.phi.iter().sum::<f64>();
    if denom.abs() <= 1e-8 {
        return Err(Error::UnitRoot { denom });
    }
    Ok(params.omega.iter().map(|&w| w / denom).collect())
}

/// The recursion state shared by filtering, simulation and one-step-ahead
/// prediction: parameters plus the pre-sample worth level.
pub(crate) struct Recursion<'a> {
    params: &'a ParameterVector,
    spec: &'a ModelSpec,
    init_worth: Vec<f64>,
}

impl<'a> Recursion<'a> {
    pub(crate) fn new(
        params: &'a ParameterVector,
        spec: &'a ModelSpec,
        init_override: Option<&[f64]>,
    ) -> Result<Self> {
        params.check_dims(spec)?;
        let init_worth = match init_override {
            Some(f0) => {
                if f0.len() != spec.n_items() {
                    return Err(Error::DimensionMismatch {
                        what: "initial worth override",
                        expected: spec.n_items(),
                        actual: f0.len(),
                    });
                }
                if f0.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("initial worth override"));
                }
                f0.to_vec()
            }
            None => match spec.variant() {
                // The unconditional value does not exist at the unit root;
                // omega keeps the zero-sum property and coincides with the
                // mean-reverting rule as phi -> 1 with zero drift.
                Variant::RandomWalk => params.omega.clone(),
                _ => unconditional_worth(params, spec)?,
            },
        };
        Ok(Self {
            params,
            spec,
            init_worth,
        })
    }

    /// Compute the worth row of period `t` (0-based) into `out`.
    ///
    /// `worth_hist` and `score_hist` hold rows `0..t`; lags reaching before
    /// the sample fall back to the pre-sample values (zero scores, the
    /// initial worth level).
    pub(crate) fn step(
        &self,
        t: usize,
        covariates_t: &[f64],
        worth_hist: &[f64],
        score_hist: &[f64],
        out: &mut [f64],
    ) {
        let n = self.spec.n_items();
        let m = self.spec.n_covariates();
        debug_assert_eq!(out.len(), n);
        debug_assert!(covariates_t.len() == n * m);

        for (i, o) in out.iter_mut().enumerate() {
            let mut v = self.params.omega[i];
            for (j, &b) in self.params.beta.iter().enumerate() {
                v += b * covariates_t[i * m + j];
            }
            for (k, &a) in self.params.alpha.iter().enumerate() {
                // Pre-sample scores are zero, so those lags drop out.
                if t > k {
                    let lag = t - k - 1;
                    v += a * score_hist[lag * n + i];
                }
            }
            for (l, &p) in self.params.phi.iter().enumerate() {
                let val = if t > l {
                    let lag = t - l - 1;
                    worth_hist[lag * n + i]
                } else {
                    self.init_worth[i]
                };
                v += p * val;
            }
            *o = v;
        }
    }
}

pub(crate) fn check_divergence(row: &[f64], period: usize) -> Result<()> {
    if row.iter().any(|f| !f.is_finite() || f.abs() > DIVERGENCE_BOUND) {
        return Err(Error::Diverged {
            period: period + 1,
            bound: DIVERGENCE_BOUND,
        });
    }
    Ok(())
}

/// Evaluate one period's likelihood and score under the given absence mode,
/// writing the recursion-ready score into `score_out`.
pub(crate) fn evaluate_period(
    ranking: &Ranking,
    worths: &[f64],
    mode: AbsentMode,
    scratch: &mut EvalScratch,
    score_out: &mut [f64],
) -> Result<f64> {
    match mode {
        AbsentMode::PartialLikelihood => evaluate_into(ranking, worths, scratch, score_out),
        AbsentMode::ZeroScore => {
            if ranking.is_complete() {
                return evaluate_into(ranking, worths, scratch, score_out);
            }
            // Restrict the universe to the ranked items: they form a
            // complete ranking among themselves and everyone else is
            // excluded from the denominators.
            let ranked = ranking.ordering();
            let compact_worths: Vec<f64> = ranked.iter().map(|&i| worths[i]).collect();
            let compact_ranking = Ranking::new(ranked.len(), (0..ranked.len()).collect())?;
            let mut compact_score = vec![0.0; ranked.len()];
            let ll = evaluate_into(
                &compact_ranking,
                &compact_worths,
                scratch,
                &mut compact_score,
            )?;
            score_out.fill(0.0);
            for (pos, &i) in ranked.iter().enumerate() {
                score_out[i] = compact_score[pos];
            }
            Ok(ll)
        }
    }
}

/// Run the filter over the panel: deterministic in its inputs.
pub fn filter_path(
    params: &ParameterVector,
    spec: &ModelSpec,
    data: &PanelDataset,
) -> Result<FilterOutput> {
    filter_path_with_init(params, spec, data, None)
}

/// [`filter_path`] with a user-supplied pre-sample worth level replacing the
/// variant's default initialization.
pub fn filter_path_with_init(
    params: &ParameterVector,
    spec: &ModelSpec,
    data: &PanelDataset,
    init_override: Option<&[f64]>,
) -> Result<FilterOutput> {
    spec.check_data(data)?;
    let recursion = Recursion::new(params, spec, init_override)?;
    let n = spec.n_items();
    let t_len = data.n_periods();

    let mut worth_path = vec![0.0; t_len * n];
    let mut score_path = vec![0.0; t_len * n];
    let mut per_period_loglik = vec![0.0; t_len];
    let mut total_loglik = 0.0;
    let mut scratch = EvalScratch::default();

    for t in 0..t_len {
        let (worth_hist, worth_now) = worth_path.split_at_mut(t * n);
        let (score_hist, score_now) = score_path.split_at_mut(t * n);
        let row = &mut worth_now[..n];
        recursion.step(t, data.covariate_row(t), worth_hist, score_hist, row);
        check_divergence(row, t)?;
        let ll = evaluate_period(
            data.ranking(t),
            row,
            spec.absent_mode(),
            &mut scratch,
            &mut score_now[..n],
        )?;
        per_period_loglik[t] = ll;
        total_loglik += ll;
    }

    Ok(FilterOutput {
        n_items: n,
        worth_path,
        score_path,
        per_period_loglik,
        total_loglik,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plackett_luce::log_pmf;
    use approx::assert_abs_diff_eq;

    fn params_mr(n: usize, alpha: f64, phi: f64) -> ParameterVector {
        let omega: Vec<f64> = (0..n)
            .map(|i| 4.0 * i as f64 / (n as f64 - 1.0) - 2.0)
            .collect();
        let sum: f64 = omega.iter().sum();
        let omega: Vec<f64> = omega.iter().map(|w| w - sum / n as f64).collect();
        ParameterVector::new(omega, vec![], vec![alpha], vec![phi]).unwrap()
    }

    fn panel(n: usize, orderings: Vec<Vec<usize>>) -> PanelDataset {
        let rankings = orderings
            .into_iter()
            .map(|o| Ranking::new(n, o).unwrap())
            .collect();
        PanelDataset::from_rankings(rankings).unwrap()
    }

    #[test]
    fn unconditional_worth_direct() {
        let spec = ModelSpec::mean_reverting(2, 0).unwrap();
        let params = ParameterVector::new(vec![0.2, -0.2], vec![], vec![0.4], vec![0.6]).unwrap();
        let ubar = unconditional_worth(&params, &spec).unwrap();
        assert_abs_diff_eq!(ubar[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ubar[1], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn unconditional_worth_spans_twice_omega_at_half_phi() {
        // Intercepts on a symmetric grid from -2 to 2 with phi = 0.5 give
        // unconditional worths from -4 to 4.
        let n = 10;
        let spec = ModelSpec::mean_reverting(n, 0).unwrap();
        let params = params_mr(n, 0.4, 0.5);
        let ubar = unconditional_worth(&params, &spec).unwrap();
        assert_abs_diff_eq!(ubar[0], -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ubar[n - 1], 4.0, epsilon = 1e-12);
        let total: f64 = ubar.iter().sum();
        assert!(total.abs() < 1e-10);
    }

    #[test]
    fn unconditional_worth_unit_root_errors() {
        let spec = ModelSpec::random_walk(2, 0).unwrap();
        let params = ParameterVector::new(vec![0.1, -0.1], vec![], vec![0.3], vec![1.0]).unwrap();
        assert!(matches!(
            unconditional_worth(&params, &spec),
            Err(Error::UnitRoot { .. })
        ));
    }

    #[test]
    fn static_filter_collapses_to_fixed_worths() {
        let n = 3;
        let spec = ModelSpec::static_model(n, 0).unwrap();
        let params =
            ParameterVector::new(vec![0.5, 0.0, -0.5], vec![], vec![], vec![]).unwrap();
        let data = panel(n, vec![vec![0, 1, 2], vec![2, 1, 0], vec![1, 0]]);
        let out = filter_path(&params, &spec, &data).unwrap();
        let mut expected = 0.0;
        for t in 0..3 {
            assert_eq!(out.worth_row(t), params.omega.as_slice());
            expected += log_pmf(data.ranking(t), &params.omega).unwrap();
        }
        assert_abs_diff_eq!(out.total_loglik(), expected, epsilon = 1e-12);
        let per_sum: f64 = out.per_period_loglik().iter().sum();
        assert_abs_diff_eq!(out.total_loglik(), per_sum, epsilon = 1e-12);
    }

    #[test]
    fn single_recursion_step_arithmetic() {
        // omega = 0, alpha = 0.4, phi = 0.5, previous worth 1 and previous
        // score 0.5 give 0.4 * 0.5 + 0.5 * 1 = 0.7.
        let spec = ModelSpec::mean_reverting(2, 0).unwrap();
        let params = ParameterVector::new(vec![0.0, 0.0], vec![], vec![0.4], vec![0.5]).unwrap();
        let recursion = Recursion::new(&params, &spec, None).unwrap();
        let worth_hist = [1.0, 1.0];
        let score_hist = [0.5, 0.5];
        let mut out = [0.0, 0.0];
        recursion.step(1, &[], &worth_hist, &score_hist, &mut out);
        assert_abs_diff_eq!(out[0], 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(out[1], 0.7, epsilon = 1e-14);
    }

    #[test]
    fn mean_reverting_worths_converge_geometrically_without_score() {
        // With alpha = 0 the recursion is deterministic: the gap to the
        // unconditional worth shrinks by phi each period.
        let n = 4;
        let spec = ModelSpec::mean_reverting(n, 0).unwrap();
        let omega = vec![0.6, 0.2, -0.3, -0.5];
        let params = ParameterVector::new(omega, vec![], vec![0.0], vec![0.7]).unwrap();
        let data = panel(n, (0..12).map(|_| vec![0, 1, 2, 3]).collect());
        let f0 = vec![2.0, -1.0, 1.0, -2.0];
        let out = filter_path_with_init(&params, &spec, &data, Some(&f0)).unwrap();
        let ubar = unconditional_worth(&params, &spec).unwrap();
        let gap0: f64 = f0
            .iter()
            .zip(&ubar)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        for t in 0..12 {
            let gap: f64 = out
                .worth_row(t)
                .iter()
                .zip(&ubar)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let bound = 0.7f64.powi(t as i32 + 1) * gap0;
            assert!(
                gap <= bound + 1e-12,
                "period {t}: gap {gap} exceeds {bound}"
            );
        }
    }

    #[test]
    fn filter_is_deterministic() {
        let n = 5;
        let spec = ModelSpec::mean_reverting(n, 0).unwrap();
        let params = params_mr(n, 0.4, 0.5);
        let data = panel(
            n,
            vec![vec![0, 1, 2, 3, 4], vec![4, 3, 2, 1, 0], vec![2, 0, 4, 1, 3]],
        );
        let a = filter_path(&params, &spec, &data).unwrap();
        let b = filter_path(&params, &spec, &data).unwrap();
        assert_eq!(a.worth_path(), b.worth_path());
        assert_eq!(a.score_path(), b.score_path());
        assert_eq!(a.total_loglik(), b.total_loglik());
    }

    #[test]
    fn covariate_shift_moves_worth_by_beta_delta() {
        let n = 3;
        let spec = ModelSpec::static_model(n, 1).unwrap();
        let params =
            ParameterVector::new(vec![0.1, 0.0, -0.1], vec![0.8], vec![], vec![]).unwrap();
        let rankings = vec![
            Ranking::new(n, vec![0, 1, 2]).unwrap(),
            Ranking::new(n, vec![1, 2, 0]).unwrap(),
        ];
        let base_cov = vec![0.0, 0.5, -0.2, 1.0, 0.0, 0.3];
        let mut shifted_cov = base_cov.clone();
        let delta = 0.37;
        shifted_cov[n + 2] += delta; // item 2 at period 1
        let labels: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let periods: Vec<String> = vec!["1".into(), "2".into()];
        let base = PanelDataset::new(
            rankings.clone(),
            base_cov,
            vec!["x".into()],
            labels.clone(),
            periods.clone(),
        )
        .unwrap();
        let shifted =
            PanelDataset::new(rankings, shifted_cov, vec!["x".into()], labels, periods).unwrap();
        let f_base = filter_path(&params, &spec, &base).unwrap();
        let f_shifted = filter_path(&params, &spec, &shifted).unwrap();
        assert_abs_diff_eq!(
            f_shifted.worth_row(1)[2] - f_base.worth_row(1)[2],
            0.8 * delta,
            epsilon = 1e-12
        );
        assert_eq!(f_shifted.worth_row(0), f_base.worth_row(0));
    }

    #[test]
    fn zero_score_absent_items_follow_deterministic_recursion() {
        let n = 4;
        let spec = ModelSpec::mean_reverting(n, 0)
            .unwrap()
            .with_absent_mode(AbsentMode::ZeroScore);
        let params = params_mr(n, 0.4, 0.6);
        // Item 3 never appears after period 0.
        let data = panel(
            n,
            vec![vec![0, 1, 2, 3], vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]],
        );
        let out = filter_path(&params, &spec, &data).unwrap();
        // From period 2 on, item 3's worth obeys omega + phi * previous
        // worth exactly (its score was zeroed in periods 1..).
        for t in 2..4 {
            let expected = params.omega[3] + 0.6 * out.worth_row(t - 1)[3];
            assert_abs_diff_eq!(out.worth_row(t)[3], expected, epsilon = 1e-12);
        }
        // Scores of absent items enter as zero.
        assert_eq!(out.score_row(1)[3], 0.0);
        for t in 0..4 {
            let s: f64 = out.score_row(t).iter().sum();
            assert!(s.abs() < 1e-10 * n as f64);
        }
    }

    #[test]
    fn relabeling_items_preserves_likelihood() {
        let n = 5;
        let spec = ModelSpec::mean_reverting(n, 0).unwrap();
        let params = params_mr(n, 0.3, 0.5);
        let data = panel(
            n,
            vec![vec![0, 1, 2, 3, 4], vec![3, 1, 4], vec![2, 0, 1, 4, 3]],
        );
        let perm = [3, 0, 4, 1, 2];
        let permuted_data = data.permute_items(&perm).unwrap();
        let permuted_omega: Vec<f64> = perm.iter().map(|&i| params.omega[i]).collect();
        let permuted_params = ParameterVector::new(
            permuted_omega,
            vec![],
            params.alpha.clone(),
            params.phi.clone(),
        )
        .unwrap();
        let a = filter_path(&params, &spec, &data).unwrap();
        let b = filter_path(&permuted_params, &spec, &permuted_data).unwrap();
        assert_abs_diff_eq!(a.total_loglik(), b.total_loglik(), epsilon = 1e-10);
    }

    #[test]
    fn divergence_is_signalled_distinctly() {
        let n = 2;
        let spec = ModelSpec::new(Variant::MeanReverting, n, 0, 1, 1).unwrap();
        // phi far beyond one explodes the recursion within a few periods
        // from any nonzero start.
        let params =
            ParameterVector::new(vec![2.0, -2.0], vec![], vec![0.1], vec![40.0]).unwrap();
        let data = panel(n, (0..20).map(|t| vec![t % 2, (t + 1) % 2]).collect());
        match filter_path(&params, &spec, &data) {
            Err(Error::Diverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation_rules() {
        assert!(ModelSpec::new(Variant::Static, 3, 0, 1, 0).is_err());
        assert!(ModelSpec::new(Variant::MeanReverting, 3, 0, 0, 1).is_err());
        assert!(ModelSpec::new(Variant::RandomWalk, 3, 0, 1, 2).is_err());
        assert!(ModelSpec::new(Variant::Static, 1, 0, 0, 0).is_err());
        assert_eq!(
            ModelSpec::mean_reverting(24, 1).unwrap().free_param_len(),
            26
        );
        assert_eq!(ModelSpec::static_model(24, 1).unwrap().free_param_len(), 24);
        assert_eq!(ModelSpec::random_walk(24, 1).unwrap().free_param_len(), 25);
    }

    #[test]
    fn free_parameter_round_trip() {
        let spec = ModelSpec::mean_reverting(4, 2).unwrap();
        let params = ParameterVector::new(
            vec![0.3, -0.1, 0.2, -0.4],
            vec![1.0, -0.5],
            vec![0.4],
            vec![0.5],
        )
        .unwrap();
        let free = params.to_free(&spec);
        assert_eq!(free.len(), spec.free_param_len());
        let back = ParameterVector::from_free(&spec, &free).unwrap();
        assert_abs_diff_eq!(back.omega[3], params.omega[3], epsilon = 1e-14);
        assert_eq!(back.beta, params.beta);

        let rw_spec = ModelSpec::random_walk(3, 0).unwrap();
        let rw_free = vec![0.5, -0.2, 0.3];
        let rw = ParameterVector::from_free(&rw_spec, &rw_free).unwrap();
        assert_eq!(rw.phi, vec![1.0]);
    }

    #[test]
    fn parameter_vector_rejects_nonzero_omega_sum() {
        assert!(ParameterVector::new(vec![0.5, 0.0], vec![], vec![], vec![]).is_err());
        assert!(ParameterVector::new(vec![f64::NAN, 0.0], vec![], vec![], vec![]).is_err());
    }
}
