//! The problem data model: a residual map `F` on an open superset of the
//! feasible set, an optional analytic Jacobian, and an optional sparsity
//! pattern.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::set::FeasibleSet;

/// Residual evaluator: writes `F(x)` into the output vector.
///
/// Must be pure (no hidden mutable state) so that distinct solves can run
/// concurrently, and must return finite values at every point of the feasible
/// set.
pub type ResidualFn = dyn Fn(&DVector<f64>, &mut DVector<f64>) + Send + Sync;

/// Analytic Jacobian evaluator: writes `F'(x)` into a pre-zeroed `n×n` matrix.
pub type JacobianFn = dyn Fn(&DVector<f64>, &mut DMatrix<f64>) + Send + Sync;

/// Structural nonzero set of the Jacobian, stored as sorted column indices
/// per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Builds a pattern from `(row, col)` index pairs. Duplicates are merged.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows = vec![Vec::new(); n];
        for (i, j) in pairs {
            assert!(i < n && j < n, "pattern index ({i},{j}) out of range for n = {n}");
            rows[i].push(j);
        }
        for cols in &mut rows {
            cols.sort_unstable();
            cols.dedup();
        }
        Self { n, rows }
    }

    /// Tridiagonal pattern.
    pub fn tridiagonal(n: usize) -> Self {
        Self::from_pairs(
            n,
            (0..n).flat_map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 2).min(n);
                (lo..hi).map(move |j| (i, j))
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Sorted column indices that may be nonzero in row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    /// Zeroes every matrix entry outside the pattern.
    pub fn mask(&self, m: &mut DMatrix<f64>) {
        assert_eq!(m.nrows(), self.n);
        assert_eq!(m.ncols(), self.n);
        for i in 0..self.n {
            let cols = &self.rows[i];
            let mut next = 0;
            for j in 0..self.n {
                if next < cols.len() && cols[next] == j {
                    next += 1;
                } else {
                    m[(i, j)] = 0.0;
                }
            }
        }
    }
}

/// A constrained nonlinear system `F(x) = 0, x ∈ C`.
///
/// Cheap to clone: the evaluators and the feasible set are shared.
#[derive(Clone)]
pub struct Problem {
    n: usize,
    f: Arc<ResidualFn>,
    jac: Option<Arc<JacobianFn>>,
    pattern: Option<SparsityPattern>,
    set: Arc<dyn FeasibleSet>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.n)
            .field("has_jacobian", &self.jac.is_some())
            .field("has_pattern", &self.pattern.is_some())
            .finish()
    }
}

impl Problem {
    pub fn new(
        n: usize,
        set: impl FeasibleSet + 'static,
        f: impl Fn(&DVector<f64>, &mut DVector<f64>) + Send + Sync + 'static,
    ) -> Self {
        assert!(n > 0, "dimension must be positive");
        assert_eq!(set.dim(), n, "feasible set dimension mismatch");
        Self {
            n,
            f: Arc::new(f),
            jac: None,
            pattern: None,
            set: Arc::new(set),
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&DVector<f64>, &mut DMatrix<f64>) + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_pattern(mut self, pattern: SparsityPattern) -> Self {
        assert_eq!(pattern.dim(), self.n, "pattern dimension mismatch");
        self.pattern = Some(pattern);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn set(&self) -> &dyn FeasibleSet {
        self.set.as_ref()
    }

    pub fn residual_fn(&self) -> &ResidualFn {
        self.f.as_ref()
    }

    pub fn pattern(&self) -> Option<&SparsityPattern> {
        self.pattern.as_ref()
    }

    pub fn has_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// Evaluates `F(x)` into `out`.
    pub fn eval_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        (self.f)(x, out);
    }

    /// Evaluates `F(x)` into a fresh vector.
    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        self.eval_into(x, &mut out);
        out
    }

    /// Evaluates the analytic Jacobian, if one was supplied.
    pub fn eval_jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jac.as_ref().map(|jac| {
            let mut out = DMatrix::zeros(self.n, self.n);
            jac(x, &mut out);
            out
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::BoxSet;
    use nalgebra::dvector;

    #[test]
    fn pattern_masks_outside_entries() {
        let p = SparsityPattern::tridiagonal(4);
        let mut m = DMatrix::from_element(4, 4, 1.0);
        p.mask(&mut m);
        for i in 0..4usize {
            for j in 0..4usize {
                let expected = if i.abs_diff(j) <= 1 { 1.0 } else { 0.0 };
                assert_eq!(m[(i, j)], expected, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn pattern_membership() {
        let p = SparsityPattern::from_pairs(3, [(0, 0), (1, 2), (1, 0)]);
        assert!(p.contains(1, 0));
        assert!(p.contains(1, 2));
        assert!(!p.contains(1, 1));
        assert_eq!(p.row(1), &[0, 2]);
    }

    #[test]
    fn problem_eval_roundtrip() {
        let set = BoxSet::uniform(2, -1.0, 1.0).unwrap();
        let problem = Problem::new(2, set, |x, out| {
            out[0] = x[0] * x[0];
            out[1] = x[1];
        });
        assert_eq!(problem.eval(&dvector![2.0, 3.0]), dvector![4.0, 3.0]);
        assert!(!problem.has_jacobian());
    }
}
