//! The outer solve loop: Jacobian model maintenance, quasi-Newton step,
//! feasibility restoration, nonmonotone backtracking, and telemetry.
//!
//! [`solve`] is the one-call entry point; [`Driver`] exposes single stepping
//! for harnesses that inspect per-iteration state.

use std::time::Instant;

use nalgebra::DVector;
use thiserror::Error;

use crate::condg::{condg, CondGStatus};
use crate::config::{ConfigError, JacobianStrategy, SolverConfig};
use crate::jacobian::{inf_norm, JacobianError, JacobianModel};
use crate::linesearch::{backtrack, BacktrackError, Branch};
use crate::problem::Problem;
use crate::report::{SolveReport, SolveStatus, TraceRecord};

/// Diagonal shift applied, relative to `‖M‖∞`, when a rebuilt Jacobian is
/// still singular.
const SINGULAR_SHIFT_RTOL: f64 = 1e-8;

/// Consecutive iterations with a bit-identical `‖F‖∞` that count as
/// stagnation.
const STAGNATION_LIMIT: usize = 50;

/// Errors that prevent a solve from starting. Failures *during* the loop are
/// reported through [`SolveStatus`] instead.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("starting point is not feasible")]
    InfeasibleStart,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("residual evaluation produced a non-finite value")]
    NonFiniteResidual,
    #[error("the analytic strategy requires a problem with an analytic Jacobian")]
    MissingJacobian,
}

/// Live state of a solve, exposed for single-step harnesses.
#[derive(Debug, Clone)]
pub struct IterateState {
    /// Outer iteration counter.
    pub k: usize,
    /// Current iterate, always feasible.
    pub x: DVector<f64>,
    /// Cached `F(x)`.
    pub fx: DVector<f64>,
    /// `‖F(x)‖`.
    pub norm2: f64,
    /// `‖F(x)‖∞`.
    pub norm_inf: f64,
    /// Last accepted step length.
    pub lambda_last: Option<f64>,
    /// Branch that accepted the last step.
    pub branch_last: Option<Branch>,
    /// Residual evaluations charged to the merit/linesearch.
    pub fe_count: usize,
    /// Residual evaluations spent on finite-difference Jacobian columns.
    pub jac_fe_count: usize,
    /// Total gap evaluations across restoration calls.
    pub condg_iters_total: usize,
}

/// Outcome of a single [`Driver::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepEvent {
    /// One outer iteration completed and the iterate advanced.
    Accepted { branch: Branch, lambda: f64 },
    /// The solve reached a terminal status (possibly before stepping).
    Finished(SolveStatus),
}

/// Runtime checks of the convergence-theory inequalities. Violations are
/// collected, never panicked on, so benchmark harnesses can assert on them.
struct InvariantMonitor {
    alpha: f64,
    f0_norm: f64,
    /// Closed-form Σ η_k.
    eta_sum: f64,
    /// e^η·‖F(x₀)‖ (may overflow to +∞, in which case the envelope checks
    /// are vacuous — they are still asserted literally).
    envelope: f64,
    /// (1/α + η·e^η/α)·‖F(x₀)‖.
    lambda_sum_bound: f64,
    lambda_norm_sum: f64,
    desc1_count: i32,
    violations: Vec<String>,
}

impl InvariantMonitor {
    fn new(alpha: f64, f0_norm: f64, eta_sum: f64) -> Self {
        let envelope = eta_sum.exp() * f0_norm;
        let lambda_sum_bound = (1.0 / alpha + eta_sum * eta_sum.exp() / alpha) * f0_norm;
        Self {
            alpha,
            f0_norm,
            eta_sum,
            envelope,
            lambda_sum_bound,
            lambda_norm_sum: 0.0,
            desc1_count: 0,
            violations: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn check_step(
        &mut self,
        k: usize,
        feasible: bool,
        norm_old: f64,
        norm_new: f64,
        eta_k: f64,
        lambda: f64,
        branch: Branch,
        p_norm: f64,
        s_tilde_norm: f64,
    ) {
        if !feasible {
            self.violations.push(format!("iterate left the feasible set at k = {k}"));
        }
        if !(norm_new <= (1.0 + eta_k) * norm_old) {
            self.violations.push(format!(
                "nonmonotone bound failed at k = {k}: {norm_new} > (1+{eta_k})·{norm_old}"
            ));
        }
        self.lambda_norm_sum += lambda * norm_old;
        if !(self.lambda_norm_sum <= self.lambda_sum_bound) {
            self.violations.push(format!(
                "Σ λ‖F‖ = {} exceeded its bound {} at k = {k}",
                self.lambda_norm_sum, self.lambda_sum_bound
            ));
        }
        if !(norm_new <= self.envelope) {
            self.violations.push(format!(
                "residual envelope failed at k = {k}: {norm_new} > e^{}·{}",
                self.eta_sum, self.f0_norm
            ));
        }
        if branch.is_desc1() {
            self.desc1_count += 1;
            let decay = (1.0 - self.alpha).powi(self.desc1_count) * self.envelope;
            if !(norm_new <= decay) {
                self.violations.push(format!(
                    "strict-decrease decay failed at k = {k}: {norm_new} > {decay}"
                ));
            }
        }
        // ‖p_k‖ = λ_k·‖s̃_k‖ by construction whenever the step direction is
        // ±s̃_k; allow a few ulps for the two norm evaluations.
        if s_tilde_norm != 0.0 {
            let expected = lambda * s_tilde_norm;
            if !((p_norm - expected).abs() <= 4.0 * f64::EPSILON * expected) {
                self.violations.push(format!(
                    "step length identity failed at k = {k}: ‖p‖ = {p_norm}, λ‖s̃‖ = {expected}"
                ));
            }
        }
    }
}

/// Bit-exact stagnation detector on `‖F‖∞`.
struct StagnationGuard {
    prev: Option<u64>,
    run: usize,
}

impl StagnationGuard {
    fn new() -> Self {
        Self { prev: None, run: 0 }
    }

    /// Returns true once the observed value has repeated bit-for-bit for
    /// [`STAGNATION_LIMIT`] consecutive observations.
    fn observe(&mut self, value: f64) -> bool {
        let bits = value.to_bits();
        if self.prev == Some(bits) {
            self.run += 1;
        } else {
            self.prev = Some(bits);
            self.run = 0;
        }
        self.run >= STAGNATION_LIMIT
    }
}

/// Single-stepping solve driver.
pub struct Driver {
    problem: Problem,
    cfg: SolverConfig,
    state: IterateState,
    model: JacobianModel,
    /// Accepted-step pair (Δx, ΔF) awaiting the next secant update.
    pending_pair: Option<(DVector<f64>, DVector<f64>)>,
    monitor: InvariantMonitor,
    stagnation: StagnationGuard,
    trace: Vec<TraceRecord>,
    started: Instant,
    done: Option<SolveStatus>,
}

impl Driver {
    /// Validates configuration and preconditions, evaluates `F(x₀)` (one
    /// charged evaluation), and binds the growth schedule to `‖F(x₀)‖²`.
    pub fn new(problem: &Problem, x0: DVector<f64>, cfg: &SolverConfig) -> Result<Self, SolveError> {
        cfg.validate()?;
        let n = problem.dim();
        if x0.len() != n {
            return Err(SolveError::DimensionMismatch { expected: n, got: x0.len() });
        }
        if !problem.set().contains(&x0) {
            return Err(SolveError::InfeasibleStart);
        }
        if cfg.jacobian_strategy == JacobianStrategy::Analytic && !problem.has_jacobian() {
            return Err(SolveError::MissingJacobian);
        }
        let fx = problem.eval(&x0);
        if fx.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFiniteResidual);
        }
        let norm2 = fx.norm();
        let norm_inf = fx.amax();

        let mut cfg = cfg.clone();
        cfg.eta_schedule = cfg.eta_schedule.bind_f0(norm2 * norm2);

        let monitor = InvariantMonitor::new(cfg.alpha, norm2, cfg.eta_schedule.sum());
        let model = JacobianModel::new(n, cfg.jacobian_strategy, problem.pattern().cloned());

        Ok(Self {
            problem: problem.clone(),
            cfg,
            model,
            state: IterateState {
                k: 0,
                x: x0,
                fx,
                norm2,
                norm_inf,
                lambda_last: None,
                branch_last: None,
                fe_count: 1,
                jac_fe_count: 0,
                condg_iters_total: 0,
            },
            pending_pair: None,
            monitor,
            stagnation: StagnationGuard::new(),
            trace: Vec::new(),
            started: Instant::now(),
            done: None,
        })
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    /// Terminal status, once reached.
    pub fn status(&self) -> Option<SolveStatus> {
        self.done
    }

    /// Configuration in effect (with the growth schedule bound to `x₀`).
    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn finish(&mut self, status: SolveStatus) -> StepEvent {
        self.done = Some(status);
        StepEvent::Finished(status)
    }

    /// Prepares `M_k` for this iteration: refresh per the strategy schedule,
    /// otherwise apply the pending secant pair, then factorize with the
    /// singularity fallback (rebuild by finite differences, then shift the
    /// diagonal). Returns the terminal event on unrecoverable failure.
    fn prepare_model(&mut self) -> Result<(), StepEvent> {
        let k = self.state.k;
        let refresh = match self.cfg.jacobian_strategy {
            JacobianStrategy::FiniteDifference | JacobianStrategy::Analytic => true,
            JacobianStrategy::BroydenSchubert | JacobianStrategy::BoglePerkins => {
                crate::jacobian::should_refresh(k, self.cfg.refresh_period)
            }
        };

        let mut fd_fresh = false;
        if refresh {
            self.pending_pair = None;
            match self.cfg.jacobian_strategy {
                JacobianStrategy::Analytic => {
                    let jac = self
                        .problem
                        .eval_jacobian(&self.state.x)
                        .expect("validated at construction");
                    self.model.refresh_matrix(jac, k);
                }
                _ => {
                    if self.refresh_fd().is_err() {
                        // A non-finite perturbed evaluation leaves us without
                        // a usable model.
                        return Err(self.finish(SolveStatus::LinearSolveFailure));
                    }
                    fd_fresh = true;
                }
            }
        } else if let Some((dx, df)) = self.pending_pair.take() {
            self.model.secant_update(&dx, &df);
        }

        if self.model.factorize().is_ok() {
            return Ok(());
        }
        if !fd_fresh {
            if self.refresh_fd().is_err() {
                return Err(self.finish(SolveStatus::LinearSolveFailure));
            }
            if self.model.factorize().is_ok() {
                return Ok(());
            }
        }
        let shift = SINGULAR_SHIFT_RTOL * inf_norm(self.model.matrix());
        self.model.add_diagonal(shift);
        if self.model.factorize().is_ok() {
            return Ok(());
        }
        Err(self.finish(SolveStatus::LinearSolveFailure))
    }

    fn refresh_fd(&mut self) -> Result<(), JacobianError> {
        self.model.refresh_fd(
            self.problem.residual_fn(),
            &self.state.x,
            &self.state.fx,
            self.state.k,
        )?;
        self.state.jac_fe_count += self.problem.dim();
        Ok(())
    }

    /// Performs exactly one outer iteration (or reports the terminal status).
    pub fn step(&mut self) -> StepEvent {
        if let Some(status) = self.done {
            return StepEvent::Finished(status);
        }
        if self.state.norm_inf <= self.cfg.tol_inf {
            return self.finish(SolveStatus::Converged);
        }
        if self.state.k >= self.cfg.max_iter {
            return self.finish(SolveStatus::MaxIterations);
        }
        if self.stagnation.observe(self.state.norm_inf) {
            return self.finish(SolveStatus::NoProgress);
        }

        if let Err(event) = self.prepare_model() {
            return event;
        }

        let step = match self.model.solve_step(&self.state.fx, self.cfg.forcing) {
            Ok(step) => step,
            Err(_) => return self.finish(SolveStatus::LinearSolveFailure),
        };

        let k = self.state.k;
        let y = &self.state.x + &step.s;
        let (s_tilde, condg_iterations, condg_capped) = if self.problem.set().contains(&y) {
            (step.s.clone(), 0, false)
        } else {
            let eps = self.cfg.theta_at(k) * step.s.norm_squared();
            let restored = condg(
                self.problem.set(),
                &y,
                &self.state.x,
                eps,
                self.cfg.condg_max_iter,
            )
            .expect("current iterate is feasible");
            let capped = restored.status == CondGStatus::IterationCapped;
            (restored.z - &self.state.x, restored.iterations, capped)
        };
        self.state.condg_iters_total += condg_iterations;

        let linearized_ratio = if self.cfg.record_linearized_ratio && self.problem.has_jacobian() {
            let jac = self.problem.eval_jacobian(&self.state.x).expect("checked");
            let num = (&jac * &s_tilde + &self.state.fx).norm();
            Some(num / self.state.norm2)
        } else {
            None
        };

        let eta_k = self.cfg.eta_schedule.eta(k);
        let outcome = match backtrack(
            &self.state.x,
            &step.s,
            &s_tilde,
            self.state.norm2,
            eta_k,
            &self.cfg,
            self.problem.set(),
            self.problem.residual_fn(),
        ) {
            Ok(outcome) => outcome,
            Err(BacktrackError::NoProgress { trial_evals }) => {
                self.state.fe_count += trial_evals;
                return self.finish(SolveStatus::NoProgress);
            }
        };
        self.state.fe_count += outcome.trial_evals;

        self.monitor.check_step(
            k,
            self.problem.set().contains(&outcome.x_new),
            self.state.norm2,
            outcome.norm_new,
            eta_k,
            outcome.lambda,
            outcome.branch,
            outcome.p.norm(),
            s_tilde.norm(),
        );

        let norm_inf_new = outcome.fx_new.amax();
        self.trace.push(TraceRecord {
            k,
            norm2: outcome.norm_new,
            norm_inf: norm_inf_new,
            lambda: outcome.lambda,
            branch: outcome.branch,
            condg_iterations,
            condg_capped,
            linearized_ratio,
        });

        if matches!(
            self.cfg.jacobian_strategy,
            JacobianStrategy::BroydenSchubert | JacobianStrategy::BoglePerkins
        ) {
            self.pending_pair = Some((
                &outcome.x_new - &self.state.x,
                &outcome.fx_new - &self.state.fx,
            ));
        }

        self.state.x = outcome.x_new;
        self.state.fx = outcome.fx_new;
        self.state.norm2 = outcome.norm_new;
        self.state.norm_inf = norm_inf_new;
        self.state.lambda_last = Some(outcome.lambda);
        self.state.branch_last = Some(outcome.branch);
        self.state.k += 1;

        StepEvent::Accepted {
            branch: outcome.branch,
            lambda: outcome.lambda,
        }
    }

    /// Runs to termination and produces the report.
    pub fn run(mut self) -> SolveReport {
        loop {
            if let StepEvent::Finished(_) = self.step() {
                return self.into_report();
            }
        }
    }

    fn into_report(self) -> SolveReport {
        let status = self.done.expect("driver not finished");
        SolveReport {
            status,
            iterations: self.state.k,
            fe_count: self.state.fe_count,
            jac_fe_count: self.state.jac_fe_count,
            condg_iterations: self.state.condg_iters_total,
            time_seconds: self.started.elapsed().as_secs_f64(),
            final_norm_inf: self.state.norm_inf,
            final_norm2: self.state.norm2,
            trace: self.trace,
            violations: self.monitor.violations,
        }
    }
}

/// Solves `F(x) = 0` over the problem's feasible set from the feasible
/// starting point `x0`.
pub fn solve(problem: &Problem, x0: &DVector<f64>, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    Ok(Driver::new(problem, x0.clone(), cfg)?.run())
}

/// Observational diagnostic `‖F'(x)·s̃ + F(x)‖ / ‖F(x)‖` for problems with an
/// analytic Jacobian. A value well below one indicates the restored step is
/// still a good inexact-Newton direction.
pub fn linearized_residual_ratio(
    problem: &Problem,
    x: &DVector<f64>,
    s_tilde: &DVector<f64>,
) -> Result<f64, SolveError> {
    let jac = problem.eval_jacobian(x).ok_or(SolveError::MissingJacobian)?;
    let fx = problem.eval(x);
    Ok((jac * s_tilde + &fx).norm() / fx.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::BoxSet;
    use nalgebra::dvector;

    fn affine_problem(c: DVector<f64>, lo: f64, hi: f64) -> Problem {
        let n = c.len();
        let c_f = c.clone();
        let set = BoxSet::uniform(n, lo, hi).unwrap();
        Problem::new(n, set, move |x, out| {
            for i in 0..x.len() {
                out[i] = x[i] - c_f[i];
            }
        })
        .with_jacobian(|_, out| {
            for i in 0..out.nrows() {
                out[(i, i)] = 1.0;
            }
        })
    }

    #[test]
    fn converged_start_takes_zero_iterations() {
        let problem = affine_problem(dvector![0.25, -0.5], -1.0, 1.0);
        let report = solve(&problem, &dvector![0.25, -0.5], &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.iterations, 0);
        assert_eq!(report.fe_count, 1);
        assert!(report.trace.is_empty());
    }

    #[test]
    fn affine_system_with_exact_jacobian_converges_in_one_full_step() {
        let problem = affine_problem(dvector![0.3, -0.7, 0.1], -2.0, 2.0);
        let cfg = SolverConfig {
            jacobian_strategy: JacobianStrategy::Analytic,
            ..SolverConfig::default()
        };
        let report = solve(&problem, &dvector![1.5, 1.5, -1.5], &cfg).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.trace[0].lambda, 1.0);
        assert!(report.final_norm_inf <= 1e-12);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let problem = affine_problem(dvector![0.0], -1.0, 1.0);
        let err = Driver::new(&problem, dvector![2.0], &SolverConfig::default()).err().unwrap();
        assert_eq!(err, SolveError::InfeasibleStart);
    }

    #[test]
    fn analytic_strategy_requires_jacobian() {
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let problem = Problem::new(1, set, |x, out| out[0] = x[0]);
        let cfg = SolverConfig {
            jacobian_strategy: JacobianStrategy::Analytic,
            ..SolverConfig::default()
        };
        let err = Driver::new(&problem, dvector![0.5], &cfg).err().unwrap();
        assert_eq!(err, SolveError::MissingJacobian);
    }

    #[test]
    fn constant_residual_fails_the_linear_solve() {
        // F is constant, so every Jacobian model is the zero matrix and the
        // diagonal shift (relative to ‖M‖∞ = 0) cannot rescue it.
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        let problem = Problem::new(2, set, |_, out| {
            out[0] = 1.0;
            out[1] = 1.0;
        });
        let report = solve(&problem, &dvector![0.5, 0.5], &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::LinearSolveFailure);
    }

    #[test]
    fn rootless_problem_reports_no_progress_once_eta_vanishes() {
        // F(x) = x² + 1 has no root; with an η schedule that dies after the
        // first iteration, backtracking eventually cannot accept any step.
        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        let problem = Problem::new(1, set, |x, out| out[0] = x[0] * x[0] + 1.0);
        let mut cfg = SolverConfig::default();
        cfg.eta_schedule.a = 1e-12;
        cfg.eta_schedule.b = 0.0;
        let report = solve(&problem, &dvector![0.5], &cfg).unwrap();
        assert_eq!(report.status, SolveStatus::NoProgress);
        assert!(report.iterations < 50);
    }

    #[test]
    fn stagnation_guard_trips_after_fifty_repeats() {
        let mut guard = StagnationGuard::new();
        for _ in 0..50 {
            assert!(!guard.observe(1.25));
        }
        assert!(guard.observe(1.25));

        let mut guard = StagnationGuard::new();
        for i in 0..200 {
            assert!(!guard.observe(if i % 2 == 0 { 1.0 } else { 2.0 }));
        }
    }

    #[test]
    fn linearized_ratio_diagnostics() {
        let problem = affine_problem(dvector![0.0, 0.0], -2.0, 2.0);
        let x = dvector![1.0, 1.0];
        // Exact Newton step: ratio at roundoff level.
        let ratio = linearized_residual_ratio(&problem, &x, &dvector![-1.0, -1.0]).unwrap();
        assert!(ratio <= 1e-10);
        // Zero step: ratio is one by definition.
        let ratio = linearized_residual_ratio(&problem, &x, &dvector![0.0, 0.0]).unwrap();
        assert_eq!(ratio, 1.0);
    }
}
