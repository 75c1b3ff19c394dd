//! Data generation from the model and the Monte Carlo replication study.
//!
//! [`simulate_panel`] runs the worth recursion forward, sampling one
//! ranking per period, and returns both the panel and the latent paths so
//! that filtering with the true parameters can be checked to reproduce them
//! exactly. [`replication_study`] wraps simulate/fit/inference pipelines
//! over a grid of item counts and horizons, reporting mean absolute errors
//! and confidence-interval coverage per parameter group.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::estimate::{confidence_interval, fit, standard_errors};
use crate::filter::{check_divergence, evaluate_period, ModelSpec, ParameterVector, Recursion};
use crate::optim::OptimizerConfig;
use crate::plackett_luce::{sample, EvalScratch};

/// Options for [`simulate_panel`].
#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    /// Rank only the best `top` items each period; `None` keeps rankings
    /// complete.
    pub top: Option<usize>,
    /// Covariate values in `(period, item, covariate)` order. Drawn i.i.d.
    /// standard normal when absent.
    pub covariates: Option<Vec<f64>>,
    /// Pre-sample worth level replacing the variant's default.
    pub initial_worth: Option<Vec<f64>>,
}

/// A simulated panel plus the latent paths that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPanel {
    pub data: PanelDataset,
    /// Worths used for each period's draw, `(period, item)` flat.
    pub latent_worths: Vec<f64>,
    /// Scores as they entered the recursion, `(period, item)` flat.
    pub latent_scores: Vec<f64>,
}

/// Simulate `n_periods` rankings from the model.
pub fn simulate_panel<R: Rng + ?Sized>(
    params: &ParameterVector,
    spec: &ModelSpec,
    n_periods: usize,
    options: &SimulateOptions,
    rng: &mut R,
) -> Result<SimulatedPanel> {
    if n_periods == 0 {
        return Err(Error::InvalidSpec("cannot simulate zero periods".into()));
    }
    let n = spec.n_items();
    let m = spec.n_covariates();
    let top = options.top.unwrap_or(n);
    if top == 0 || top > n {
        return Err(Error::InvalidSpec(format!(
            "cannot rank the top {top} of {n} items"
        )));
    }

    let covariates = match &options.covariates {
        Some(x) => {
            if x.len() != n_periods * n * m {
                return Err(Error::DimensionMismatch {
                    what: "simulated covariates",
                    expected: n_periods * n * m,
                    actual: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("simulated covariates"));
            }
            x.clone()
        }
        None => (0..n_periods * n * m)
            .map(|_| rng.sample(StandardNormal))
            .collect(),
    };

    let recursion = Recursion::new(params, spec, options.initial_worth.as_deref())?;
    let mut worths = vec![0.0; n_periods * n];
    let mut scores = vec![0.0; n_periods * n];
    let mut rankings = Vec::with_capacity(n_periods);
    let mut scratch = EvalScratch::default();

    for t in 0..n_periods {
        let (worth_hist, worth_now) = worths.split_at_mut(t * n);
        let (score_hist, score_now) = scores.split_at_mut(t * n);
        let row = &mut worth_now[..n];
        recursion.step(
            t,
            &covariates[t * n * m..(t + 1) * n * m],
            worth_hist,
            score_hist,
            row,
        );
        check_divergence(row, t)?;
        let ranking = sample(row, top, rng)?;
        evaluate_period(
            &ranking,
            row,
            spec.absent_mode(),
            &mut scratch,
            &mut score_now[..n],
        )?;
        rankings.push(ranking);
    }

    let item_labels = crate::data::default_item_labels(n);
    let period_labels = (1..=n_periods).map(|t| t.to_string()).collect();
    let covariate_names = (1..=m).map(|j| format!("x{j}")).collect();
    let data = PanelDataset::new(
        rankings,
        covariates,
        covariate_names,
        item_labels,
        period_labels,
    )?;
    Ok(SimulatedPanel {
        data,
        latent_worths: worths,
        latent_scores: scores,
    })
}

/// Grid and true-parameter rule for the replication study.
///
/// The intercepts follow the symmetric grid `4 (i - 1) / (N - 1) - 2`, so
/// they range from -2 to 2 and sum to zero for any item count; covariates
/// are i.i.d. standard normal. The defaults (single covariate with unit
/// coefficient, score loading 0.4, autoregression 0.5) put the
/// unconditional worths between -4 and 4.
#[derive(Debug, Clone)]
pub struct SimulationDesign {
    pub item_counts: Vec<usize>,
    pub horizons: Vec<usize>,
    pub replications: usize,
    pub n_covariates: usize,
    pub beta: f64,
    pub alpha: f64,
    pub phi: f64,
    pub confidence_level: f64,
    pub seed: u64,
    /// Skip fitting and score the true parameters against themselves:
    /// errors collapse to zero and coverage is undefined.
    pub oracle_mode: bool,
}

impl Default for SimulationDesign {
    fn default() -> Self {
        Self {
            item_counts: vec![20],
            horizons: vec![20],
            replications: 500,
            n_covariates: 1,
            beta: 1.0,
            alpha: 0.4,
            phi: 0.5,
            confidence_level: 0.95,
            seed: 0,
            oracle_mode: false,
        }
    }
}

/// The symmetric intercept grid `4 (i - 1) / (N - 1) - 2`: spans -2 to 2
/// and sums to zero for any item count.
pub fn omega_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidSpec(
            "the intercept grid needs at least two items".into(),
        ));
    }
    Ok((0..n)
        .map(|i| 4.0 * i as f64 / (n as f64 - 1.0) - 2.0)
        .collect())
}

impl SimulationDesign {
    /// True parameters for a universe of `n` items under the design rule.
    pub fn true_params(&self, n: usize) -> Result<ParameterVector> {
        ParameterVector::new(
            omega_grid(n)?,
            vec![self.beta; self.n_covariates],
            vec![self.alpha],
            vec![self.phi],
        )
    }

    /// The estimated model: first-order mean-reverting dynamics.
    pub fn spec(&self, n: usize) -> Result<ModelSpec> {
        ModelSpec::mean_reverting(n, self.n_covariates)
    }
}

/// Parameter groups reported by the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterGroup {
    Omega,
    Beta,
    Alpha,
    Phi,
}

impl ParameterGroup {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParameterGroup::Omega => "omega",
            ParameterGroup::Beta => "beta",
            ParameterGroup::Alpha => "alpha",
            ParameterGroup::Phi => "phi",
        }
    }

    const ALL: [ParameterGroup; 4] = [
        ParameterGroup::Omega,
        ParameterGroup::Beta,
        ParameterGroup::Alpha,
        ParameterGroup::Phi,
    ];
}

/// One `(N, T, group)` cell of the study report.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyCell {
    pub n_items: usize,
    pub horizon: usize,
    pub group: ParameterGroup,
    /// Mean absolute estimation error; intercept errors are averaged across
    /// all items before averaging across replications.
    pub mae: f64,
    /// Fraction of confidence intervals containing the truth; `None` in
    /// oracle mode.
    pub coverage: Option<f64>,
    pub n_success: usize,
    pub n_fail: usize,
}

/// Study results over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub cells: Vec<StudyCell>,
}

impl StudyReport {
    pub fn cell(&self, n: usize, t: usize, group: ParameterGroup) -> Option<&StudyCell> {
        self.cells
            .iter()
            .find(|c| c.n_items == n && c.horizon == t && c.group == group)
    }

    /// CSV with columns `N,T,param_group,mae,coverage,n_success,n_fail`;
    /// coverage is `NA` when undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,T,param_group,mae,coverage,n_success,n_fail\n");
        for c in &self.cells {
            let coverage = match c.coverage {
                Some(v) => format!("{v:.6}"),
                None => "NA".to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{:.6},{},{},{}\n",
                c.n_items,
                c.horizon,
                c.group.as_str(),
                c.mae,
                coverage,
                c.n_success,
                c.n_fail
            ));
        }
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one replication, independent of scheduling order.
pub(crate) fn derive_seed(base: u64, cell: u64, replication: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ cell) ^ replication)
}

/// Absolute errors and interval hits of one successful replication,
/// per group: omega entries are already averaged across items.
struct Replication {
    abs_err: [f64; 4],
    hits: [f64; 4],
}

fn run_replication(
    design: &SimulationDesign,
    config: &OptimizerConfig,
    n: usize,
    horizon: usize,
    seed: u64,
) -> Result<Option<Replication>> {
    let true_params = design.true_params(n)?;
    let spec = design.spec(n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sim = simulate_panel(
        &true_params,
        &spec,
        horizon,
        &SimulateOptions::default(),
        &mut rng,
    )?;

    if design.oracle_mode {
        return Ok(Some(Replication {
            abs_err: [0.0; 4],
            hits: [f64::NAN; 4],
        }));
    }

    let rep_config = OptimizerConfig {
        seed,
        ..config.clone()
    };
    let Ok(mut fitted) = fit(&sim.data, &spec, &rep_config) else {
        return Ok(None);
    };
    if !fitted.converged {
        return Ok(None);
    }
    if standard_errors(&mut fitted, &sim.data, &rep_config).is_err() {
        return Ok(None);
    }
    let Ok(intervals) = confidence_interval(&fitted, design.confidence_level) else {
        return Ok(None);
    };
    if intervals.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite()) {
        return Ok(None);
    }

    // Free layout: omega_1..omega_{n-1}, beta, alpha, phi; the derived last
    // intercept sits at the end of the interval list.
    let truth = true_params.to_free(&spec);
    let estimate = &fitted.free_params;
    let m = spec.n_covariates();
    let mut abs_err = [0.0; 4];
    let mut hits = [0.0; 4];

    let mut omega_err = 0.0;
    let mut omega_hits = 0.0;
    for i in 0..n - 1 {
        omega_err += (estimate[i] - truth[i]).abs();
        let (lo, hi) = intervals[i];
        omega_hits += f64::from(lo <= truth[i] && truth[i] <= hi);
    }
    let omega_last_true = *true_params.omega.last().unwrap();
    omega_err += (fitted.omega_last() - omega_last_true).abs();
    let (lo, hi) = intervals[intervals.len() - 1];
    omega_hits += f64::from(lo <= omega_last_true && omega_last_true <= hi);
    abs_err[0] = omega_err / n as f64;
    hits[0] = omega_hits / n as f64;

    let group_spans = [(n - 1, m), (n - 1 + m, 1), (n - 1 + m + 1, 1)];
    for (g, (at, len)) in group_spans.into_iter().enumerate() {
        let mut err = 0.0;
        let mut hit = 0.0;
        for k in at..at + len {
            err += (estimate[k] - truth[k]).abs();
            let (lo, hi) = intervals[k];
            hit += f64::from(lo <= truth[k] && truth[k] <= hi);
        }
        abs_err[g + 1] = err / len as f64;
        hits[g + 1] = hit / len as f64;
    }

    Ok(Some(Replication { abs_err, hits }))
}

/// Run the full study: for each `(N, T)` cell, `replications` independent
/// simulate/fit/inference pipelines. Replications run in parallel; each
/// derives its own seed from `(seed, cell, replication)`, so the report is
/// reproducible regardless of scheduling. Non-convergent replications are
/// excluded from the averages and counted in `n_fail`.
pub fn replication_study(
    design: &SimulationDesign,
    config: &OptimizerConfig,
) -> Result<StudyReport> {
    if design.replications == 0 {
        return Err(Error::InvalidSpec(
            "the study needs at least one replication".into(),
        ));
    }
    if design.item_counts.is_empty() || design.horizons.is_empty() {
        return Err(Error::InvalidSpec("the study grid is empty".into()));
    }
    if design.n_covariates == 0 && design.beta != 0.0 {
        return Err(Error::InvalidSpec(
            "a nonzero beta needs at least one covariate".into(),
        ));
    }

    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for &n in &design.item_counts {
        for &horizon in &design.horizons {
            let outcomes: Vec<Option<Replication>> = (0..design.replications)
                .into_par_iter()
                .map(|r| {
                    let seed = derive_seed(design.seed, cell_index, r as u64);
                    run_replication(design, config, n, horizon, seed).unwrap_or(None)
                })
                .collect();

            let successes: Vec<&Replication> = outcomes.iter().flatten().collect();
            let n_success = successes.len();
            let n_fail = design.replications - n_success;
            for (g, group) in ParameterGroup::ALL.into_iter().enumerate() {
                if group == ParameterGroup::Beta && design.n_covariates == 0 {
                    continue;
                }
                let mae = if n_success == 0 {
                    f64::NAN
                } else {
                    successes.iter().map(|r| r.abs_err[g]).sum::<f64>() / n_success as f64
                };
                let coverage = if design.oracle_mode || n_success == 0 {
                    None
                } else {
                    Some(successes.iter().map(|r| r.hits[g]).sum::<f64>() / n_success as f64)
                };
                cells.push(StudyCell {
                    n_items: n,
                    horizon,
                    group,
                    mae,
                    coverage,
                    n_success,
                    n_fail,
                });
            }
            cell_index += 1;
        }
    }
    Ok(StudyReport { cells })
}
