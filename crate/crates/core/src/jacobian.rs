//! Construction and maintenance of the invertible approximation `M_k` of the
//! Jacobian: finite differences, the Broyden-Schubert and Bogle-Perkins
//! sparsity-preserving secant updates, the periodic refresh rule, and the
//! linear solve producing the quasi-Newton step and its residual.

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::config::JacobianStrategy;
use crate::problem::{ResidualFn, SparsityPattern};

/// Relative pivot threshold: a factorization counts as singular when some
/// pivot falls below `1e-14·‖M‖∞`.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

/// Rows whose pattern-masked step has squared norm at or below this are left
/// unchanged by the secant updates.
pub const ROW_SKIP_TOL: f64 = 1e-30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JacobianError {
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("residual evaluation produced a non-finite value")]
    NonFiniteEvaluation,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Quasi-Newton step `s` with the linear-solve residual `r = M·s + F(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub s: DVector<f64>,
    pub r: DVector<f64>,
    /// `‖r‖ / ‖F(x)‖` (zero when the residual norm is zero).
    pub r_norm_ratio: f64,
}

/// `‖M‖∞`, the maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Forward finite-difference Jacobian.
///
/// Column j is `(F(x + h_j e_j) − F(x))/h_j` with `h_j = √ε·max(1, |x_j|)`.
/// Perturbed points may leave the feasible set; `F` is defined on an open
/// superset. Costs n residual evaluations, charged by the caller to the
/// separate Jacobian counter. When a pattern is supplied, entries outside it
/// are zeroed after the computation.
pub fn fd_jacobian(
    f: &ResidualFn,
    x: &DVector<f64>,
    fx: &DVector<f64>,
    pattern: Option<&SparsityPattern>,
) -> Result<DMatrix<f64>, JacobianError> {
    let n = x.len();
    if fx.len() != n {
        return Err(JacobianError::DimensionMismatch { expected: n, got: fx.len() });
    }
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.clone();
    let mut col = DVector::zeros(n);
    for j in 0..n {
        let h = sqrt_eps * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        f(&xp, &mut col);
        xp[j] = x[j];
        for i in 0..n {
            let v = (col[i] - fx[i]) / h;
            if !v.is_finite() {
                return Err(JacobianError::NonFiniteEvaluation);
            }
            jac[(i, j)] = v;
        }
    }
    if let Some(p) = pattern {
        p.mask(&mut jac);
    }
    Ok(jac)
}

/// Broyden-Schubert sparsity-preserving secant update.
///
/// For each row i with structural nonzero columns `S_i`, let `d` be `dx`
/// masked to `S_i`. If `‖d‖²` exceeds the skip guard, the row is updated as
///
/// ```text
/// row_i ← row_i + ((dF_i − ⟨row_i, dx⟩)/‖d‖²)·dᵀ
/// ```
///
/// leaving entries outside `S_i` untouched; degenerate rows are unchanged.
/// Every updated row then satisfies the secant equation `⟨row_i, dx⟩ = dF_i`.
/// With a dense pattern this is Broyden's rank-one update.
pub fn schubert_update(
    m: &mut DMatrix<f64>,
    pattern: Option<&SparsityPattern>,
    dx: &DVector<f64>,
    df: &DVector<f64>,
) {
    let n = m.nrows();
    assert_eq!(m.ncols(), n);
    assert_eq!(dx.len(), n, "dimension mismatch in dx");
    assert_eq!(df.len(), n, "dimension mismatch in dF");
    for i in 0..n {
        let cols = pattern.map(|p| p.row(i));
        let d_sq: f64 = match cols {
            Some(cols) => cols.iter().map(|&j| dx[j] * dx[j]).sum(),
            None => dx.norm_squared(),
        };
        if d_sq <= ROW_SKIP_TOL {
            continue;
        }
        let row_dot: f64 = (0..n).map(|j| m[(i, j)] * dx[j]).sum();
        let coef = (df[i] - row_dot) / d_sq;
        match cols {
            Some(cols) => {
                for &j in cols {
                    m[(i, j)] += coef * dx[j];
                }
            }
            None => {
                for j in 0..n {
                    m[(i, j)] += coef * dx[j];
                }
            }
        }
    }
}

/// Bogle-Perkins sparsity-preserving update.
///
/// Implements the projected Broyden correction: the dense rank-one correction
/// `(dF − M·dx)·dxᵀ/‖dx‖²` restricted, row by row, to the structural nonzero
/// set, i.e.
///
/// ```text
/// row_i ← row_i + ((dF_i − ⟨row_i, dx⟩)/‖dx‖²)·(dx masked to S_i)ᵀ
/// ```
///
/// Unlike [`schubert_update`] the denominator is the full `‖dx‖²`, so the
/// secant equation holds exactly only on dense patterns (where the update
/// coincides with Broyden's). Rows whose pattern-masked step is negligible
/// are left unchanged.
pub fn bogle_perkins_update(
    m: &mut DMatrix<f64>,
    pattern: Option<&SparsityPattern>,
    dx: &DVector<f64>,
    df: &DVector<f64>,
) {
    let n = m.nrows();
    assert_eq!(m.ncols(), n);
    assert_eq!(dx.len(), n, "dimension mismatch in dx");
    assert_eq!(df.len(), n, "dimension mismatch in dF");
    let denom = dx.norm_squared();
    if denom <= ROW_SKIP_TOL {
        return;
    }
    for i in 0..n {
        let cols = pattern.map(|p| p.row(i));
        let masked_sq: f64 = match cols {
            Some(cols) => cols.iter().map(|&j| dx[j] * dx[j]).sum(),
            None => denom,
        };
        if masked_sq <= ROW_SKIP_TOL {
            continue;
        }
        let row_dot: f64 = (0..n).map(|j| m[(i, j)] * dx[j]).sum();
        let coef = (df[i] - row_dot) / denom;
        match cols {
            Some(cols) => {
                for &j in cols {
                    m[(i, j)] += coef * dx[j];
                }
            }
            None => {
                for j in 0..n {
                    m[(i, j)] += coef * dx[j];
                }
            }
        }
    }
}

/// Periodic refresh rule for the quasi-Newton strategies: refresh at `k = 0`
/// and whenever `(k−1) mod period = 0`. Note the literal rule refreshes at
/// both k = 0 and k = 1, then every `period` iterations.
pub fn should_refresh(k: usize, period: usize) -> bool {
    assert!(period >= 1);
    k == 0 || (k - 1) % period == 0
}

/// The current approximation `M_k`, its cached factorization, and the update
/// strategy. Owned by a single solve.
#[derive(Debug)]
pub struct JacobianModel {
    strategy: JacobianStrategy,
    m: DMatrix<f64>,
    lu: Option<LU<f64, Dyn, Dyn>>,
    pattern: Option<SparsityPattern>,
    last_refresh_k: Option<usize>,
}

impl JacobianModel {
    pub fn new(n: usize, strategy: JacobianStrategy, pattern: Option<SparsityPattern>) -> Self {
        if let Some(p) = &pattern {
            assert_eq!(p.dim(), n, "pattern dimension mismatch");
        }
        Self {
            strategy,
            m: DMatrix::zeros(n, n),
            lu: None,
            pattern,
            last_refresh_k: None,
        }
    }

    /// Model pre-loaded with an explicit matrix (tests, expert use).
    pub fn from_matrix(m: DMatrix<f64>, strategy: JacobianStrategy) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self {
            strategy,
            m,
            lu: None,
            pattern: None,
            last_refresh_k: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn strategy(&self) -> JacobianStrategy {
        self.strategy
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn pattern(&self) -> Option<&SparsityPattern> {
        self.pattern.as_ref()
    }

    pub fn last_refresh_k(&self) -> Option<usize> {
        self.last_refresh_k
    }

    /// Replaces `M` by the forward-difference Jacobian at `x`.
    pub fn refresh_fd(
        &mut self,
        f: &ResidualFn,
        x: &DVector<f64>,
        fx: &DVector<f64>,
        k: usize,
    ) -> Result<(), JacobianError> {
        self.m = fd_jacobian(f, x, fx, self.pattern.as_ref())?;
        self.lu = None;
        self.last_refresh_k = Some(k);
        Ok(())
    }

    /// Replaces `M` by an externally computed matrix (analytic Jacobians).
    pub fn refresh_matrix(&mut self, m: DMatrix<f64>, k: usize) {
        assert_eq!(m.nrows(), self.m.nrows());
        assert_eq!(m.ncols(), self.m.ncols());
        self.m = m;
        self.lu = None;
        self.last_refresh_k = Some(k);
    }

    /// Applies the strategy's secant update with the accepted step pair
    /// `(Δx, ΔF)`. Only meaningful for the quasi-Newton strategies.
    pub fn secant_update(&mut self, dx: &DVector<f64>, df: &DVector<f64>) {
        match self.strategy {
            JacobianStrategy::BroydenSchubert => {
                schubert_update(&mut self.m, self.pattern.as_ref(), dx, df)
            }
            JacobianStrategy::BoglePerkins => {
                bogle_perkins_update(&mut self.m, self.pattern.as_ref(), dx, df)
            }
            other => panic!("secant_update is not defined for {other:?}"),
        }
        self.lu = None;
    }

    /// Adds `shift` to the diagonal (singularity fallback).
    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.m.nrows() {
            self.m[(i, i)] += shift;
        }
        self.lu = None;
    }

    /// Factorizes `M` with partial pivoting, failing when any pivot falls
    /// below `1e-14·‖M‖∞` (or is non-finite).
    pub fn factorize(&mut self) -> Result<(), JacobianError> {
        if self.lu.is_some() {
            return Ok(());
        }
        let threshold = SINGULAR_PIVOT_RTOL * inf_norm(&self.m);
        let lu = LU::new(self.m.clone());
        let u = lu.u();
        for i in 0..u.nrows().min(u.ncols()) {
            let pivot = u[(i, i)].abs();
            if !(pivot > threshold) {
                return Err(JacobianError::SingularMatrix);
            }
        }
        self.lu = Some(lu);
        Ok(())
    }

    /// Solves `M·s = −F(x) + r`.
    ///
    /// Without a forcing term the solve is direct (LU) and `r` is the
    /// roundoff-level recomputed residual. With `forcing = c₂`, a conjugate
    /// gradient iteration on the normal equations runs until
    /// `‖M·s + F(x)‖ ≤ c₂·‖F(x)‖`, falling back to the direct solve if it
    /// stalls.
    pub fn solve_step(
        &mut self,
        fx: &DVector<f64>,
        forcing: Option<f64>,
    ) -> Result<StepResult, JacobianError> {
        let n = self.m.nrows();
        if fx.len() != n {
            return Err(JacobianError::DimensionMismatch { expected: n, got: fx.len() });
        }
        self.factorize()?;
        if let Some(c2) = forcing {
            if let Some(s) = cgnr(&self.m, fx, c2) {
                return Ok(self.finish_step(s, fx));
            }
        }
        let lu = self.lu.as_ref().expect("factorized above");
        let s = lu.solve(&(-fx)).ok_or(JacobianError::SingularMatrix)?;
        Ok(self.finish_step(s, fx))
    }

    fn finish_step(&self, s: DVector<f64>, fx: &DVector<f64>) -> StepResult {
        let r = &self.m * &s + fx;
        let fx_norm = fx.norm();
        let r_norm = r.norm();
        let r_norm_ratio = if r_norm == 0.0 { 0.0 } else { r_norm / fx_norm };
        StepResult { s, r, r_norm_ratio }
    }
}

/// Conjugate gradient on the normal equations `MᵀM s = −Mᵀ F(x)`, stopped
/// once the true residual satisfies `‖M·s + F(x)‖ ≤ c₂·‖F(x)‖`. Returns
/// `None` when the tolerance is not reached within the iteration budget.
fn cgnr(m: &DMatrix<f64>, fx: &DVector<f64>, c2: f64) -> Option<DVector<f64>> {
    let n = fx.len();
    let target = c2 * fx.norm();
    let mut s = DVector::zeros(n);
    if fx.norm() <= target {
        return Some(s);
    }
    let b = -fx;
    let mut r = b.clone();
    let mut g = m.tr_mul(&r);
    let mut g_sq = g.norm_squared();
    let mut p = g.clone();
    let budget = (4 * n).max(100);
    for _ in 0..budget {
        let q = m * &p;
        let q_sq = q.norm_squared();
        if !(q_sq > 0.0) || !q_sq.is_finite() {
            return None;
        }
        let step = g_sq / q_sq;
        s.axpy(step, &p, 1.0);
        r.axpy(-step, &q, 1.0);
        // True residual, immune to recurrence drift.
        let true_res = m * &s + fx;
        if true_res.norm() <= target {
            return Some(s);
        }
        g = m.tr_mul(&r);
        let g_sq_new = g.norm_squared();
        let beta = g_sq_new / g_sq;
        p = &g + beta * &p;
        g_sq = g_sq_new;
    }
    None
}
