//! Unconstrained quasi-Newton minimization with finite-difference
//! derivatives.
//!
//! A dense BFGS iteration with Armijo backtracking. Gradients are central
//! finite differences; curvature pairs that fail the positivity test are
//! skipped instead of damping the update. Objective values of
//! [`PENALTY`] and above mark diverged parameter regions: the line search
//! backs away from them and the caller can recognize runs that never left
//! the penalty region.

use nalgebra::{DMatrix, DVector};

/// Objective value used for parameter regions where the filter diverges.
pub(crate) const PENALTY: f64 = 1e10;

/// Tuning knobs for maximum-likelihood estimation.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Iteration cap per start.
    pub max_iterations: usize,
    /// Infinity-norm gradient threshold for convergence.
    pub gradient_tolerance: f64,
    /// Relative objective-improvement threshold for convergence.
    pub relative_tolerance: f64,
    /// Number of starts; the first uses the base starting values, the rest
    /// jitter them uniformly by +-0.2.
    pub restarts: usize,
    /// Relative step for first differences, scaled by `max(1, |theta_k|)`.
    pub fd_step: f64,
    /// Relative step for second differences; larger than `fd_step` because
    /// second differences lose more precision.
    pub hessian_step: f64,
    /// Seed for the restart jitter.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            gradient_tolerance: 1e-5,
            relative_tolerance: 1e-9,
            restarts: 3,
            fd_step: 1e-6,
            hessian_step: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central finite-difference gradient with per-coordinate relative steps.
pub(crate) fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        let h = rel_step * x[k].abs().max(1.0);
        probe[k] = x[k] + h;
        let up = f(&probe);
        probe[k] = x[k] - h;
        let down = f(&probe);
        probe[k] = x[k];
        g[k] = (up - down) / (2.0 * h);
    }
    g
}

/// Symmetric central second-difference Hessian.
pub(crate) fn fd_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let steps: Vec<f64> = x.iter().map(|&v| rel_step * v.abs().max(1.0)).collect();
    let mut h = DMatrix::zeros(n, n);
    let mut probe = x.to_vec();

    for k in 0..n {
        probe[k] = x[k] + steps[k];
        let up = f(&probe);
        probe[k] = x[k] - steps[k];
        let down = f(&probe);
        probe[k] = x[k];
        h[(k, k)] = (up - 2.0 * f0 + down) / (steps[k] * steps[k]);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut value = 0.0;
            for (sk, sl) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                probe[k] = x[k] + sk * steps[k];
                probe[l] = x[l] + sl * steps[l];
                value += sk * sl * f(&probe);
            }
            probe[k] = x[k];
            probe[l] = x[l];
            let mixed = value / (4.0 * steps[k] * steps[l]);
            h[(k, l)] = mixed;
            h[(l, k)] = mixed;
        }
    }
    h
}

/// BFGS from a single starting point.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> MinimizeResult {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    if n == 0 {
        return MinimizeResult {
            x: vec![],
            value: fx,
            grad_norm: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut g = DVector::from_vec(fd_gradient(f, x.as_slice(), cfg.fd_step));
    // Inverse Hessian approximation.
    let mut b = DMatrix::<f64>::identity(n, n);
    let mut first_update = true;

    let mut converged = false;
    let mut iterations = 0;
    const C1: f64 = 1e-4;

    for iter in 1..=cfg.max_iterations {
        iterations = iter;
        let grad_norm = g.amax();
        if grad_norm <= cfg.gradient_tolerance {
            converged = true;
            break;
        }

        let mut d = -(&b * &g);
        let mut slope = g.dot(&d);
        if !slope.is_finite() || slope >= 0.0 {
            // Stale curvature; fall back to steepest descent.
            b = DMatrix::identity(n, n);
            first_update = true;
            d = -g.clone();
            slope = g.dot(&d);
            if slope >= 0.0 {
                converged = grad_norm <= cfg.gradient_tolerance;
                break;
            }
        }

        // Armijo backtracking from the quasi-Newton unit step.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + alpha * &d;
            let ft = f(trial.as_slice());
            if ft.is_finite() && ft <= fx + C1 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No acceptable step along d.
            converged = grad_norm <= cfg.gradient_tolerance;
            break;
        };

        let g_new = DVector::from_vec(fd_gradient(f, x_new.as_slice(), cfg.fd_step));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-10 * s.norm() * y.norm() {
            if first_update {
                let yy = y.dot(&y);
                if yy > 0.0 {
                    b = DMatrix::identity(n, n) * (sy / yy);
                }
                first_update = false;
            }
            // B <- (I - rho s y') B (I - rho y s') + rho s s'
            let rho = 1.0 / sy;
            let by = &b * &y;
            let yby = y.dot(&by);
            let ss = &s * s.transpose();
            let bys = &by * s.transpose();
            b = &b - (&bys + bys.transpose()) * rho + &ss * (rho * rho * yby + rho);
        }

        let improvement = fx - f_new;
        let scale = fx.abs().max(f_new.abs()).max(1e-10);
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement >= 0.0 && improvement <= cfg.relative_tolerance * scale {
            converged = true;
            break;
        }
    }

    MinimizeResult {
        grad_norm: g.amax(),
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
        converged,
    }
}
