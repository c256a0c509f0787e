//! Solve outcome reporting: terminal status, per-iteration trace, counters.

use crate::linesearch::Branch;

/// Terminal status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// `‖F(x)‖∞` reached the termination tolerance.
    Converged,
    /// The outer-iteration cap was exceeded first.
    MaxIterations,
    /// Backtracking exhausted its step lengths, or the residual norm
    /// stagnated bit-for-bit.
    NoProgress,
    /// The Jacobian model stayed singular through every fallback.
    LinearSolveFailure,
}

impl SolveStatus {
    pub fn token(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::NoProgress => "NoProgress",
            SolveStatus::LinearSolveFailure => "LinearSolveFailure",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "Converged" => Some(SolveStatus::Converged),
            "MaxIterations" => Some(SolveStatus::MaxIterations),
            "NoProgress" => Some(SolveStatus::NoProgress),
            "LinearSolveFailure" => Some(SolveStatus::LinearSolveFailure),
            _ => None,
        }
    }
}

/// One accepted outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iteration index k of the step that produced `x_{k+1}`.
    pub k: usize,
    /// `‖F(x_{k+1})‖` after the accepted step.
    pub norm2: f64,
    /// `‖F(x_{k+1})‖∞` after the accepted step.
    pub norm_inf: f64,
    /// Accepted step length λ_k.
    pub lambda: f64,
    pub branch: Branch,
    /// Gap evaluations spent by the restoration call at this iteration
    /// (zero when the quasi-Newton point was already feasible).
    pub condg_iterations: usize,
    /// Whether the restoration hit its iteration cap.
    pub condg_capped: bool,
    /// `‖F'(x_k) s̃_k + F(x_k)‖/‖F(x_k)‖`, recorded when requested and an
    /// analytic Jacobian is available.
    pub linearized_ratio: Option<f64>,
}

/// Full outcome of a solve. The trace has exactly one record per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Number of completed outer iterations.
    pub iterations: usize,
    /// Residual evaluations charged to the merit/linesearch: the initial
    /// evaluation plus every backtracking trial.
    pub fe_count: usize,
    /// Residual evaluations spent on finite-difference Jacobian columns,
    /// reported separately.
    pub jac_fe_count: usize,
    /// Total gap evaluations across all restoration calls.
    pub condg_iterations: usize,
    /// Wall-clock time of the solve loop, in seconds.
    pub time_seconds: f64,
    /// `‖F‖∞` at the final iterate.
    pub final_norm_inf: f64,
    /// `‖F‖` at the final iterate.
    pub final_norm2: f64,
    pub trace: Vec<TraceRecord>,
    /// Violations of the runtime-checked convergence-theory invariants.
    /// Always empty for a correct implementation.
    pub violations: Vec<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}
