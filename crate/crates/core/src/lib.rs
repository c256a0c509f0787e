//! Solver for constrained nonlinear systems `F(x) = 0, x ∈ C` over convex
//! compact sets (boxes in the shipped configuration).
//!
//! The method is a globally convergent inexact quasi-Newton iteration: each
//! outer step solves `M_k s_k = −F(x_k) + r_k` for an invertible Jacobian
//! approximation `M_k`, restores feasibility with a conditional-gradient
//! (Frank-Wolfe) inexact projection when the trial point leaves the set, and
//! accepts a step length through a derivative-free nonmonotone backtracking
//! rule whose growth allowance `η_k` is summable. Jacobian approximations can
//! be forward finite differences rebuilt every iteration, Broyden-Schubert or
//! Bogle-Perkins sparsity-preserving secant updates with periodic refresh, or
//! a user-supplied analytic Jacobian.
//!
//! ```
//! use nalgebra::dvector;
//! use qncg::{solve, BoxSet, Problem, SolverConfig};
//!
//! // Solve x² = (4, 9) inside the box [1, 5]².
//! let set = BoxSet::uniform(2, 1.0, 5.0).unwrap();
//! let problem = Problem::new(2, set, |x, out| {
//!     out[0] = x[0] * x[0] - 4.0;
//!     out[1] = x[1] * x[1] - 9.0;
//! });
//! let report = solve(&problem, &dvector![1.5, 4.0], &SolverConfig::default()).unwrap();
//! assert!(report.converged());
//! assert!(report.final_norm_inf <= 1e-6);
//! ```

pub mod condg;
pub mod config;
pub mod jacobian;
pub mod linesearch;
pub mod problem;
pub mod problems;
pub mod report;
pub mod set;
pub mod solver;

pub use condg::{condg, CondGError, CondGResult, CondGStatus};
pub use config::{ConfigError, EtaSchedule, JacobianStrategy, SolverConfig};
pub use jacobian::{
    bogle_perkins_update, fd_jacobian, schubert_update, should_refresh, JacobianError,
    JacobianModel, StepResult,
};
pub use linesearch::{backtrack, check_desc1, check_desc2, BacktrackError, BacktrackOutcome, Branch};
pub use problem::{Problem, ResidualFn, SparsityPattern};
pub use report::{SolveReport, SolveStatus, TraceRecord};
pub use set::{BoxSet, FeasibleSet, SetError};
pub use solver::{linearized_residual_ratio, solve, Driver, IterateState, SolveError, StepEvent};

use nalgebra::DVector;

/// Merit value `½‖F(x)‖²`, used diagnostically; the line search itself is
/// derivative-free and works on `‖F‖` directly.
pub fn merit(fx: &DVector<f64>) -> f64 {
    0.5 * fx.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn merit_examples() {
        assert_eq!(merit(&dvector![0.0, 0.0, 0.0]), 0.0);
        assert_eq!(merit(&dvector![3.0, 4.0]), 12.5);
        assert_eq!(merit(&dvector![1.0]), 0.5);
    }

    #[test]
    fn merit_agrees_with_half_norm_squared() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.random_range(1..20);
            let v = DVector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
            let a = merit(&v);
            let b = 0.5 * v.norm() * v.norm();
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.max(b));
        }
    }
}
