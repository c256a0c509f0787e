//! Derivative-free nonmonotone backtracking.
//!
//! Starting from the full step, the search tries the restored direction
//! `s₊ = s̃_k` and its reversal `s₋`, first against the strict-decrease test
//! and then against the growth-tolerant test, shrinking geometrically by σ
//! until one of the four acceptance branches fires.

use nalgebra::DVector;
use thiserror::Error;

use crate::config::SolverConfig;
use crate::problem::ResidualFn;
use crate::set::FeasibleSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BacktrackError {
    /// No step length at or above `lambda_min` satisfied any acceptance
    /// branch (or both candidate directions vanished). Carries the residual
    /// evaluations consumed before giving up.
    #[error("no progress: backtracking exhausted without an acceptable step")]
    NoProgress { trial_evals: usize },
}

/// Which acceptance branch fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Strict decrease along `s₊`.
    Desc1Plus,
    /// Strict decrease along `s₋`.
    Desc1Minus,
    /// Growth-tolerant acceptance along `s₊`.
    Desc2Plus,
    /// Growth-tolerant acceptance along `s₋`.
    Desc2Minus,
}

impl Branch {
    pub fn is_desc1(self) -> bool {
        matches!(self, Branch::Desc1Plus | Branch::Desc1Minus)
    }

    pub fn token(self) -> &'static str {
        match self {
            Branch::Desc1Plus => "desc1+",
            Branch::Desc1Minus => "desc1-",
            Branch::Desc2Plus => "desc2+",
            Branch::Desc2Minus => "desc2-",
        }
    }
}

/// An accepted backtracking step.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktrackOutcome {
    /// Accepted step length, an exact power of σ.
    pub lambda: f64,
    /// Accepted step `p_k = λ·s₊` or `λ·s₋`.
    pub p: DVector<f64>,
    pub branch: Branch,
    /// Residual evaluations consumed by the trials.
    pub trial_evals: usize,
    pub x_new: DVector<f64>,
    pub fx_new: DVector<f64>,
    /// `‖F(x_new)‖`.
    pub norm_new: f64,
}

/// Strict-decrease test: `‖F(trial)‖ ≤ (1 − α(1 + λ))·‖F(x_k)‖`.
pub fn check_desc1(norm_trial: f64, norm_k: f64, alpha: f64, lambda: f64) -> bool {
    norm_trial <= (1.0 - alpha * (1.0 + lambda)) * norm_k
}

/// Growth-tolerant test: `‖F(trial)‖ ≤ (1 + η_k − α λ)·‖F(x_k)‖`.
pub fn check_desc2(norm_trial: f64, norm_k: f64, alpha: f64, lambda: f64, eta_k: f64) -> bool {
    norm_trial <= (1.0 + eta_k - alpha * lambda) * norm_k
}

struct Trial {
    x: DVector<f64>,
    fx: DVector<f64>,
    norm: f64,
}

/// Runs the backtracking process.
///
/// `s` is the raw quasi-Newton step and `s_tilde` the restored (feasible)
/// direction; `x + s_tilde` must be feasible. Directions are `s₊ = s̃` and
/// `s₋ = −s̃` (or `−s` when `s̃ = 0`). At each step length the branches are
/// tried in order: `s₊` against the strict test, `s₋` (feasibility first)
/// against the strict test, `s₊` against the growth-tolerant test, `s₋`
/// against the growth-tolerant test. Each trial point is evaluated at most
/// once per step length: the `s₊` evaluation serves both its branches.
/// `x + λ·s₊` is feasible by convexity, so only `s₋` trials are gated on
/// membership.
pub fn backtrack(
    x: &DVector<f64>,
    s: &DVector<f64>,
    s_tilde: &DVector<f64>,
    fx_norm: f64,
    eta_k: f64,
    cfg: &SolverConfig,
    set: &dyn FeasibleSet,
    f: &ResidualFn,
) -> Result<BacktrackOutcome, BacktrackError> {
    let plus_active = s_tilde.norm() != 0.0;
    let s_minus = if plus_active { -s_tilde } else { -s };
    if !plus_active && s.norm() == 0.0 {
        // Both candidate directions vanish; only possible with inexact
        // solves where the step residual swallowed the whole right-hand side.
        return Err(BacktrackError::NoProgress { trial_evals: 0 });
    }

    let mut trial_evals = 0usize;
    let mut eval_at = |point: DVector<f64>| -> Trial {
        let mut fx = DVector::zeros(point.len());
        f(&point, &mut fx);
        trial_evals += 1;
        let norm = fx.norm();
        Trial { x: point, fx, norm }
    };

    let accept = |trial: Trial, lambda: f64, p: DVector<f64>, branch: Branch, evals: usize| {
        Ok(BacktrackOutcome {
            lambda,
            p,
            branch,
            trial_evals: evals,
            x_new: trial.x,
            fx_new: trial.fx,
            norm_new: trial.norm,
        })
    };

    let mut shrinks = 0i32;
    loop {
        // Exact powers of sigma, no accumulated drift.
        let lambda = cfg.sigma.powi(shrinks);
        if lambda < cfg.lambda_min {
            return Err(BacktrackError::NoProgress { trial_evals });
        }

        let plus = if plus_active {
            Some(eval_at(x + lambda * s_tilde))
        } else {
            None
        };
        if let Some(trial) = &plus {
            if check_desc1(trial.norm, fx_norm, cfg.alpha, lambda) {
                let evals = trial_evals;
                return accept(plus.unwrap(), lambda, lambda * s_tilde, Branch::Desc1Plus, evals);
            }
        }

        let x_minus = x + lambda * &s_minus;
        let minus = if set.contains(&x_minus) {
            Some(eval_at(x_minus))
        } else {
            None
        };
        if let Some(trial) = &minus {
            if check_desc1(trial.norm, fx_norm, cfg.alpha, lambda) {
                let evals = trial_evals;
                return accept(minus.unwrap(), lambda, lambda * &s_minus, Branch::Desc1Minus, evals);
            }
        }

        if let Some(trial) = &plus {
            if check_desc2(trial.norm, fx_norm, cfg.alpha, lambda, eta_k) {
                let evals = trial_evals;
                return accept(plus.unwrap(), lambda, lambda * s_tilde, Branch::Desc2Plus, evals);
            }
        }

        if let Some(trial) = &minus {
            if check_desc2(trial.norm, fx_norm, cfg.alpha, lambda, eta_k) {
                let evals = trial_evals;
                return accept(minus.unwrap(), lambda, lambda * &s_minus, Branch::Desc2Minus, evals);
            }
        }

        shrinks += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::BoxSet;
    use nalgebra::dvector;

    fn scalar_f(f: impl Fn(f64) -> f64 + Send + Sync) -> impl Fn(&DVector<f64>, &mut DVector<f64>) + Send + Sync {
        move |x, out| out[0] = f(x[0])
    }

    #[test]
    fn desc1_examples() {
        assert!(check_desc1(0.0, 0.5, 1e-4, 1.0));
        assert!(!check_desc1(0.5, 0.5, 1e-4, 1.0));
        // RHS = (1 − 2e-4)·0.5 = 0.4999.
        assert!(check_desc1(0.49989, 0.5, 1e-4, 1.0));
    }

    #[test]
    fn desc2_examples() {
        assert!(check_desc2(0.5, 0.5, 1e-4, 1.0, 100.0));
        assert!(!check_desc2(0.5, 0.5, 0.5, 1.0, 0.1));
        // RHS = (1 + 0.1 − 0.5)·0.5 = 0.30.
        assert!(check_desc2(0.25, 0.5, 0.5, 1.0, 0.1));
        // RHS ≈ 0.49995 < 0.5001.
        assert!(!check_desc2(0.5001, 0.5, 1e-4, 1.0, 1e-16));
    }

    #[test]
    fn accepts_full_step_on_strict_decrease() {
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|x| x);
        let cfg = SolverConfig::default();
        let out = backtrack(
            &dvector![0.5],
            &dvector![-0.5],
            &dvector![-0.5],
            0.5,
            100.0,
            &cfg,
            &set,
            &f,
        )
        .unwrap();
        assert_eq!(out.branch, Branch::Desc1Plus);
        assert_eq!(out.lambda, 1.0);
        assert_eq!(out.norm_new, 0.0);
        assert_eq!(out.trial_evals, 1);
    }

    #[test]
    fn wrong_sign_step_recovers_through_reversal() {
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|x| x);
        let cfg = SolverConfig::default();
        let out = backtrack(
            &dvector![0.5],
            &dvector![0.5],
            &dvector![0.5],
            0.5,
            100.0,
            &cfg,
            &set,
            &f,
        )
        .unwrap();
        assert_eq!(out.branch, Branch::Desc1Minus);
        assert_eq!(out.lambda, 1.0);
        assert_eq!(out.x_new, dvector![0.0]);
        assert_eq!(out.trial_evals, 2);
    }

    #[test]
    fn large_eta_admits_growth_through_desc2() {
        // No root: the residual worsens in both directions, so the strict
        // test fails at λ = 1, but η_k = 100 makes the growth test trivial.
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|x| 1.0 + x * x);
        let cfg = SolverConfig::default();
        let out = backtrack(
            &dvector![0.0],
            &dvector![0.5],
            &dvector![0.5],
            1.0,
            100.0,
            &cfg,
            &set,
            &f,
        )
        .unwrap();
        assert_eq!(out.branch, Branch::Desc2Plus);
        assert_eq!(out.lambda, 1.0);
    }

    #[test]
    fn exhaustion_reports_no_progress() {
        // Constant residual: nothing can satisfy either test once η_k ≈ 0.
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|_| 1.0);
        let cfg = SolverConfig::default();
        let err = backtrack(
            &dvector![0.0],
            &dvector![0.5],
            &dvector![0.5],
            1.0,
            1e-300,
            &cfg,
            &set,
            &f,
        )
        .unwrap_err();
        assert!(matches!(err, BacktrackError::NoProgress { trial_evals } if trial_evals > 0));
    }

    #[test]
    fn vanishing_directions_report_no_progress() {
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|x| x + 1.0);
        let cfg = SolverConfig::default();
        let err = backtrack(
            &dvector![0.0],
            &dvector![0.0],
            &dvector![0.0],
            1.0,
            100.0,
            &cfg,
            &set,
            &f,
        )
        .unwrap_err();
        assert_eq!(err, BacktrackError::NoProgress { trial_evals: 0 });
    }

    #[test]
    fn zero_restored_direction_falls_back_to_negative_raw_step() {
        // s̃ = 0 with s ≠ 0: only the −s direction is tried.
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|x| x);
        let cfg = SolverConfig::default();
        let out = backtrack(
            &dvector![0.5],
            &dvector![0.5],
            &dvector![0.0],
            0.5,
            100.0,
            &cfg,
            &set,
            &f,
        )
        .unwrap();
        assert_eq!(out.branch, Branch::Desc1Minus);
        assert_eq!(out.x_new, dvector![0.0]);
        assert_eq!(out.trial_evals, 1);
    }

    #[test]
    fn accepted_lambda_is_exact_power_of_sigma() {
        // The unit step overshoots the root at 0, so two shrinks are needed.
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let f = scalar_f(|x| x);
        let cfg = SolverConfig::default();
        let out = backtrack(
            &dvector![0.2],
            &dvector![-1.0],
            &dvector![-1.0],
            0.2,
            1e-300,
            &cfg,
            &set,
            &f,
        )
        .unwrap();
        assert_eq!(out.branch, Branch::Desc1Plus);
        assert_eq!(out.lambda, 0.25);
        let m = (out.lambda.ln() / cfg.sigma.ln()).round() as i32;
        assert_eq!(out.lambda, cfg.sigma.powi(m));
    }
}
