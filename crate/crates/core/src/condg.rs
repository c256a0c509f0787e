//! Conditional-gradient (Frank-Wolfe) computation of an inexact Euclidean
//! projection onto the feasible set.
//!
//! `condg(set, y, x, ε, cap)` approximately minimizes `½‖z − y‖²` over the
//! set, starting from the feasible point `x` and stopping as soon as the
//! Frank-Wolfe gap satisfies `g* ≥ −ε`. When it stops that way, the output is
//! within `√(2ε)` of the exact projection of `y`.

use nalgebra::DVector;
use thiserror::Error;

use crate::set::FeasibleSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CondGError {
    #[error("starting point is not feasible")]
    InfeasibleStart,
    #[error("dimension mismatch: set has dimension {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Why the procedure stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondGStatus {
    /// The gap criterion `g* ≥ −ε` was met; the output is an ε-accurate
    /// projection.
    GapSatisfied,
    /// The iteration cap was reached first; the output is the last (and best)
    /// iterate.
    IterationCapped,
}

/// Output of [`condg`].
#[derive(Debug, Clone, PartialEq)]
pub struct CondGResult {
    /// Output point, always feasible.
    pub z: DVector<f64>,
    /// Number of gap evaluations performed.
    pub iterations: usize,
    pub status: CondGStatus,
    /// Last Frank-Wolfe gap value observed.
    pub final_gap: f64,
}

/// Runs the conditional-gradient procedure.
///
/// Starting from `z₁ = x`, each step queries the linear oracle for the vertex
/// `u_t` and gap `g*_t = min_u ⟨z_t − y, u − z_t⟩`; if `g*_t ≥ −eps` the
/// current iterate is returned, otherwise the exact line-search step
///
/// ```text
/// α_t = min{1, −g*_t / ‖u_t − z_t‖²},    z_{t+1} = z_t + α_t (u_t − z_t)
/// ```
///
/// is taken. Every iterate is a convex combination of feasible points, so the
/// output is feasible even when the cap is reached. The objective `‖z_t − y‖`
/// never increases. Note `g*_t < −eps ≤ 0` implies `u_t ≠ z_t`, so the step
/// ratio never divides by zero.
pub fn condg(
    set: &dyn FeasibleSet,
    y: &DVector<f64>,
    x: &DVector<f64>,
    eps: f64,
    max_iter: usize,
) -> Result<CondGResult, CondGError> {
    let n = set.dim();
    if x.len() != n {
        return Err(CondGError::DimensionMismatch { expected: n, got: x.len() });
    }
    if y.len() != n {
        return Err(CondGError::DimensionMismatch { expected: n, got: y.len() });
    }
    if !set.contains(x) {
        return Err(CondGError::InfeasibleStart);
    }
    assert!(eps >= 0.0, "eps must be nonnegative");
    assert!(max_iter >= 1, "max_iter must be at least 1");

    let mut z = x.clone();
    let mut gap = 0.0;
    for t in 1..=max_iter {
        let (u, g) = set.gap_and_vertex(&z, y);
        gap = g;
        if g >= -eps {
            return Ok(CondGResult {
                z,
                iterations: t,
                status: CondGStatus::GapSatisfied,
                final_gap: gap,
            });
        }
        let d = u - &z;
        let alpha = (-g / d.norm_squared()).min(1.0);
        z.axpy(alpha, &d, 1.0);
    }
    Ok(CondGResult {
        z,
        iterations: max_iter,
        status: CondGStatus::IterationCapped,
        final_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::BoxSet;
    use nalgebra::dvector;

    #[test]
    fn projects_outside_point_onto_box_edge() {
        // One full step lands on (1,0); the next gap evaluation certifies it.
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        let res = condg(&set, &dvector![2.0, 0.0], &dvector![0.0, 0.0], 0.0, 300).unwrap();
        assert_eq!(res.status, CondGStatus::GapSatisfied);
        assert_eq!(res.z, dvector![1.0, 0.0]);
        assert_eq!(res.iterations, 2);
        assert_eq!(res.z, set.project_exact(&dvector![2.0, 0.0]).unwrap());
    }

    #[test]
    fn feasible_target_from_itself_is_immediate() {
        let set = BoxSet::uniform(3, -1.0, 2.0).unwrap();
        let y = dvector![0.5, -0.5, 1.5];
        let res = condg(&set, &y, &y, 1e-8, 300).unwrap();
        assert_eq!(res.status, CondGStatus::GapSatisfied);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.z, y);
    }

    #[test]
    fn fixed_point_with_zero_tolerance() {
        let set = BoxSet::uniform(4, -2.0, 2.0).unwrap();
        let x = dvector![1.0, -2.0, 0.25, 2.0];
        let res = condg(&set, &x, &x, 0.0, 300).unwrap();
        assert_eq!(res.status, CondGStatus::GapSatisfied);
        assert_eq!(res.z, x);
        assert_eq!(res.final_gap, 0.0);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        let err = condg(&set, &dvector![0.5, 0.5], &dvector![2.0, 0.0], 0.0, 300).unwrap_err();
        assert_eq!(err, CondGError::InfeasibleStart);
    }

    #[test]
    fn cap_returns_feasible_iterate() {
        // y off the box with a mixed violation keeps the gap negative for a
        // while; a cap of 1 must still return a feasible point.
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        let res = condg(&set, &dvector![2.0, 0.5], &dvector![0.1, 0.9], 0.0, 1).unwrap();
        assert_eq!(res.status, CondGStatus::IterationCapped);
        assert!(set.contains(&res.z));
        assert!(res.final_gap < 0.0);
    }
}
