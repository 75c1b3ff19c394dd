//! Maximum-likelihood estimation and inference.
//!
//! The free parameter vector is `(omega_1..omega_{N-1}, beta, alpha, phi)`;
//! the last intercept is identified through the zero-sum constraint and the
//! random-walk variant drops `phi` from the free set. The summed ranking
//! log-likelihood is maximized by BFGS with central finite-difference
//! gradients; parameter regions where the filter diverges enter the line
//! search as a large penalty. Standard errors come from the empirical
//! Hessian at the optimum, inverted by Cholesky when it is definite and by
//! a spectral pseudo-inverse (with a warning) when it is not.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::filter::{filter_path, AbsentMode, ModelSpec, ParameterVector, Variant};
use crate::optim::{self, OptimizerConfig, PENALTY};
use crate::stats::normal_quantile;

/// Parameter norm beyond which a failed connectivity check is treated as an
/// unbounded likelihood rather than a finite optimum.
pub const UNBOUNDED_PARAM_NORM: f64 = 50.0;

/// Akaike information criterion: `2k - 2 loglik` for `k` free parameters.
pub fn aic(loglik: f64, n_free_params: usize) -> f64 {
    2.0 * n_free_params as f64 - 2.0 * loglik
}

/// Outcome of the ranked-above connectivity check.
///
/// The directed graph has an edge `u -> v` whenever `u` is ranked above `v`
/// in some period; under the partial-likelihood treatment every ranked item
/// of a period is additionally above all of that period's absent items. A
/// finite maximizer requires this graph to be strongly connected: in every
/// two-set partition, some item of the second set must beat some item of
/// the first set at least once.
#[derive(Debug, Clone)]
pub struct ConnectivityDiagnostic {
    pub connected: bool,
    /// On failure, the items of a source strongly-connected component: no
    /// item outside it ever beats an item inside, so their worths drift to
    /// infinity together.
    pub witness: Option<Vec<usize>>,
}

/// Strong connectivity of the ranked-above digraph (Kosaraju).
pub fn connectivity_check(data: &PanelDataset, mode: AbsentMode) -> ConnectivityDiagnostic {
    let n = data.n_items();
    let mut above = vec![false; n * n];
    for t in 0..data.n_periods() {
        let ranking = data.ranking(t);
        let ordering = ranking.ordering();
        for (pos, &u) in ordering.iter().enumerate() {
            for &v in &ordering[pos + 1..] {
                above[u * n + v] = true;
            }
        }
        if mode == AbsentMode::PartialLikelihood && !ranking.is_complete() {
            for &u in ordering {
                for v in ranking.unranked() {
                    above[u * n + v] = true;
                }
            }
        }
    }

    let order = dfs_finish_order(n, |u, v| above[u * n + v]);
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for &start in order.iter().rev() {
        if component[start] != usize::MAX {
            continue;
        }
        // DFS on the transposed graph assigns one strongly-connected
        // component per pass.
        let mut stack = vec![start];
        component[start] = n_components;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if component[v] == usize::MAX && above[v * n + u] {
                    component[v] = n_components;
                    stack.push(v);
                }
            }
        }
        n_components += 1;
    }

    if n_components <= 1 {
        return ConnectivityDiagnostic {
            connected: true,
            witness: None,
        };
    }

    // Components found in this order form a reverse topological order of the
    // condensation, so component 0 has no incoming edges: a source.
    let witness: Vec<usize> = (0..n).filter(|&i| component[i] == 0).collect();
    ConnectivityDiagnostic {
        connected: false,
        witness: Some(witness),
    }
}

fn dfs_finish_order(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut visited = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((u, next)) = stack.last_mut() {
            let u = *u;
            let mut pushed = false;
            for v in *next..n {
                *next = v + 1;
                if !visited[v] && edge(u, v) {
                    visited[v] = true;
                    stack.push((v, 0));
                    pushed = true;
                    break;
                }
            }
            if !pushed && stack.last().map(|&(w, _)| w) == Some(u) {
                let used_all = stack.last().map(|&(_, nx)| nx >= n).unwrap_or(true);
                if used_all {
                    finish.push(u);
                    stack.pop();
                }
            }
        }
    }
    finish
}

/// Hessian-based inference block attached to a [`FitResult`] by
/// [`standard_errors`].
#[derive(Debug, Clone)]
pub struct Inference {
    /// One standard error per free parameter.
    pub std_errors: Vec<f64>,
    /// Delta-method standard error of the derived last intercept.
    pub omega_last_se: f64,
    /// Covariance of the free parameters: inverse of the negative empirical
    /// Hessian.
    pub cov_matrix: DMatrix<f64>,
    /// False when the negative Hessian failed the Cholesky test and the
    /// covariance is a spectral pseudo-inverse.
    pub hessian_negative_definite: bool,
}

/// A fitted model.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub params: ParameterVector,
    /// `(omega_1..omega_{N-1}, beta, alpha, phi)`; `phi` absent for the
    /// random-walk variant.
    pub free_params: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub filter: crate::filter::FilterOutput,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub connectivity: ConnectivityDiagnostic,
    pub warnings: Vec<String>,
    pub inference: Option<Inference>,
}

impl FitResult {
    /// The derived intercept of the last item.
    pub fn omega_last(&self) -> f64 {
        *self.params.omega.last().expect("at least two items")
    }
}

fn objective<'a>(
    spec: &'a ModelSpec,
    data: &'a PanelDataset,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |free: &[f64]| match ParameterVector::from_free(spec, free) {
        Ok(params) => match filter_path(&params, spec, data) {
            Ok(out) => -out.total_loglik(),
            Err(_) => PENALTY,
        },
        Err(_) => PENALTY,
    }
}

/// Starting values: intercepts from a cheap static pre-fit (itself started
/// at zero), zero regression coefficients, 0.1 score loadings and
/// autoregressive coefficients summing to 0.5. The random-walk variant
/// starts its intercepts at zero instead, since there they act as drifts.
fn starting_point(data: &PanelDataset, spec: &ModelSpec, config: &OptimizerConfig) -> Vec<f64> {
    let n = spec.n_items();
    let mut start = vec![0.0; spec.free_param_len()];
    if spec.variant() != Variant::Static && spec.variant() != Variant::RandomWalk {
        if let Ok(static_spec) = ModelSpec::static_model(n, spec.n_covariates()) {
            let static_spec = static_spec.with_absent_mode(spec.absent_mode());
            let f = objective(&static_spec, data);
            let pre = optim::minimize(&f, &vec![0.0; static_spec.free_param_len()], config);
            if pre.value < PENALTY / 2.0 {
                start[..n - 1].copy_from_slice(&pre.x[..n - 1]);
            }
        }
    }
    let mut at = n - 1 + spec.n_covariates();
    for _ in 0..spec.score_order() {
        start[at] = 0.1;
        at += 1;
    }
    if spec.variant() == Variant::MeanReverting {
        for _ in 0..spec.ar_order() {
            start[at] = 0.5 / spec.ar_order() as f64;
            at += 1;
        }
    }
    start
}

/// Maximize the summed log-likelihood of `spec` over `data`.
///
/// Runs `config.restarts` starts (the base starting point plus jittered
/// copies) and keeps the best. A failed connectivity check is attached as a
/// warning and the fit is still attempted; it becomes an error only when
/// the optimizer also walks the parameters beyond
/// [`UNBOUNDED_PARAM_NORM`], the signature of an unbounded likelihood.
pub fn fit(data: &PanelDataset, spec: &ModelSpec, config: &OptimizerConfig) -> Result<FitResult> {
    if spec.n_items() != data.n_items() || spec.n_covariates() != data.n_covariates() {
        return Err(Error::InvalidSpec(format!(
            "model is for {} items / {} covariates but the panel holds {} / {}",
            spec.n_items(),
            spec.n_covariates(),
            data.n_items(),
            data.n_covariates()
        )));
    }

    let connectivity = connectivity_check(data, spec.absent_mode());
    let mut warnings = Vec::new();
    if !connectivity.connected {
        warnings.push(format!(
            "connectivity check failed: items {:?} are never beaten from outside; the likelihood may be unbounded",
            connectivity.witness.as_deref().unwrap_or(&[])
        ));
    }

    let f = objective(spec, data);
    let base = starting_point(data, spec, config);
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let starts = config.restarts.max(1);

    let mut best: Option<optim::MinimizeResult> = None;
    for s in 0..starts {
        let x0: Vec<f64> = if s == 0 {
            base.clone()
        } else {
            base.iter()
                .map(|v| v + rng.random_range(-0.2..0.2))
                .collect()
        };
        let run = optim::minimize(&f, &x0, config);
        if run.value >= PENALTY / 2.0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => run.value < b.value,
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| {
        Error::Optimization("every optimization start diverged".into())
    })?;

    let norm = best.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !connectivity.connected && norm > UNBOUNDED_PARAM_NORM {
        return Err(Error::Optimization(format!(
            "likelihood appears unbounded: connectivity fails and the parameter norm reached {norm:.1} (threshold {UNBOUNDED_PARAM_NORM})"
        )));
    }

    let params = ParameterVector::from_free(spec, &best.x)?;
    let filter = filter_path(&params, spec, data)?;
    let loglik = filter.total_loglik();
    Ok(FitResult {
        spec: spec.clone(),
        params,
        free_params: best.x,
        loglik,
        aic: aic(loglik, spec.free_param_len()),
        filter,
        converged: best.converged,
        iterations: best.iterations,
        grad_norm: best.grad_norm,
        connectivity,
        warnings,
        inference: None,
    })
}

/// Attach Hessian-based standard errors and the parameter covariance to a
/// converged fit.
pub fn standard_errors(
    fit: &mut FitResult,
    data: &PanelDataset,
    config: &OptimizerConfig,
) -> Result<()> {
    if !fit.converged {
        return Err(Error::Optimization(
            "standard errors require a converged fit".into(),
        ));
    }
    let spec = fit.spec.clone();
    let f = objective(&spec, data);
    // The objective is the negative log-likelihood, so its Hessian is
    // already the negative of the log-likelihood Hessian.
    let mut neg_hessian = optim::fd_hessian(&f, &fit.free_params, config.hessian_step);
    let k = neg_hessian.nrows();
    let symmetrized = (&neg_hessian + neg_hessian.transpose()) * 0.5;
    neg_hessian = symmetrized;

    let (cov, definite) = match neg_hessian.clone().cholesky() {
        Some(chol) => (chol.inverse(), true),
        None => (spectral_pseudo_inverse(&neg_hessian), false),
    };
    if !definite {
        fit.warnings.push(
            "the negative Hessian is not positive definite; standard errors use a pseudo-inverse"
                .into(),
        );
    }

    let std_errors: Vec<f64> = (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let n_omega = spec.n_items() - 1;
    let mut omega_var = 0.0;
    for i in 0..n_omega {
        for j in 0..n_omega {
            omega_var += cov[(i, j)];
        }
    }
    fit.inference = Some(Inference {
        std_errors,
        omega_last_se: omega_var.max(0.0).sqrt(),
        cov_matrix: cov,
        hessian_negative_definite: definite,
    });
    Ok(())
}

/// Spectral pseudo-inverse: eigenvalues below the tolerance are dropped.
fn spectral_pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let eigen = m.clone().symmetric_eigen();
    let max_abs = eigen.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let tol = 1e-12 * max_abs.max(1.0);
    let mut out = DMatrix::zeros(n, n);
    for (idx, &lambda) in eigen.eigenvalues.iter().enumerate() {
        if lambda.abs() > tol {
            let v = eigen.eigenvectors.column(idx);
            out += (v * v.transpose()) / lambda;
        }
    }
    out
}

/// Wald interval `estimate +- z_{(1+level)/2} * se`.
pub fn wald_interval(estimate: f64, se: f64, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let z = normal_quantile((1.0 + level) / 2.0);
    Ok((estimate - z * se, estimate + z * se))
}

/// Confidence intervals for every free parameter, followed by one interval
/// for the derived last intercept.
pub fn confidence_interval(fit: &FitResult, level: f64) -> Result<Vec<(f64, f64)>> {
    let inference = fit.inference.as_ref().ok_or_else(|| {
        Error::Optimization("confidence intervals require standard errors".into())
    })?;
    let mut out = Vec::with_capacity(fit.free_params.len() + 1);
    for (est, se) in fit.free_params.iter().zip(&inference.std_errors) {
        out.push(wald_interval(*est, *se, level)?);
    }
    out.push(wald_interval(
        fit.omega_last(),
        inference.omega_last_se,
        level,
    )?);
    Ok(out)
}
