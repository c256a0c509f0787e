//! Solver configuration and the summable forcing sequence `η_k`.

use thiserror::Error;

/// Invalid configuration diagnostics.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

/// How the approximation `M_k` of the Jacobian is built and maintained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianStrategy {
    /// Forward finite differences, rebuilt at every iteration.
    FiniteDifference,
    /// Broyden-Schubert sparsity-preserving secant update with periodic
    /// finite-difference refresh.
    BroydenSchubert,
    /// Bogle-Perkins sparsity-preserving update with periodic
    /// finite-difference refresh. See [`crate::jacobian::bogle_perkins_update`]
    /// for the exact formula implemented.
    BoglePerkins,
    /// User-supplied analytic Jacobian, evaluated at every iteration.
    Analytic,
}

impl JacobianStrategy {
    /// Short token used in benchmark output.
    pub fn token(self) -> &'static str {
        match self {
            JacobianStrategy::FiniteDifference => "fd",
            JacobianStrategy::BroydenSchubert => "bsu",
            JacobianStrategy::BoglePerkins => "bpu",
            JacobianStrategy::Analytic => "analytic",
        }
    }
}

/// The positive summable sequence `η_k = aᵏ (b + ‖F(x₀)‖²)` that bounds the
/// residual growth allowed by the nonmonotone acceptance test.
///
/// `f0_sq` is bound by the driver when a solve starts; a schedule constructed
/// from configuration carries `f0_sq = 0` until then.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSchedule {
    /// Geometric base, in (0, 1).
    pub a: f64,
    /// Constant offset added to `‖F(x₀)‖²`.
    pub b: f64,
    /// `‖F(x₀)‖²`, recorded at solve start.
    pub f0_sq: f64,
}

impl Default for EtaSchedule {
    fn default() -> Self {
        Self {
            a: 0.99,
            b: 100.0,
            f0_sq: 0.0,
        }
    }
}

impl EtaSchedule {
    pub fn new(a: f64, b: f64) -> Result<Self, ConfigError> {
        let schedule = Self { a, b, f0_sq: 0.0 };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(ConfigError(format!("eta base a = {} not in (0,1)", self.a)));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(ConfigError(format!("eta offset b = {} negative", self.b)));
        }
        if !(self.f0_sq >= 0.0) {
            return Err(ConfigError(format!("f0_sq = {} negative", self.f0_sq)));
        }
        Ok(())
    }

    /// Same schedule with `‖F(x₀)‖²` bound.
    pub fn bind_f0(&self, f0_sq: f64) -> Self {
        Self { f0_sq, ..*self }
    }

    /// `η_k = aᵏ (b + f0_sq)`; strictly positive and strictly decreasing in k
    /// whenever `b + f0_sq > 0`.
    pub fn eta(&self, k: usize) -> f64 {
        self.a.powi(k as i32) * (self.b + self.f0_sq)
    }

    /// Closed-form series sum `Σ_{k≥0} η_k = (b + f0_sq)/(1 − a)`.
    pub fn sum(&self) -> f64 {
        (self.b + self.f0_sq) / (1.0 - self.a)
    }
}

/// Parameters of the globalized inexact quasi-Newton conditional-gradient
/// solver. Defaults follow the standard benchmark setup: `α = 10⁻⁴`,
/// `σ = 0.5`, `θ = 10⁻⁵`, `η_k = 0.99ᵏ(100 + ‖F(x₀)‖²)`, termination at
/// `‖F‖∞ ≤ 10⁻⁶`, outer and inner iteration caps of 300.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Sufficient-decrease constant, in (0, 1).
    pub alpha: f64,
    /// Backtracking shrink factor, in (0, 1).
    pub sigma: f64,
    /// Conditional-gradient tolerance multiplier: the inexact projection of
    /// `y_k` is computed to accuracy `θ·‖s_k‖²`.
    pub theta: f64,
    /// Growth-allowance schedule for the nonmonotone acceptance test.
    pub eta_schedule: EtaSchedule,
    /// Termination tolerance on `‖F(x)‖∞`.
    pub tol_inf: f64,
    /// Outer-iteration cap.
    pub max_iter: usize,
    /// Per-call iteration cap for the conditional-gradient procedure.
    pub condg_max_iter: usize,
    /// Smallest admissible backtracking step before declaring failure.
    pub lambda_min: f64,
    /// Jacobian approximation strategy.
    pub jacobian_strategy: JacobianStrategy,
    /// Period m of the finite-difference refresh for the quasi-Newton
    /// strategies: refresh at k = 0 and whenever (k−1) mod m = 0.
    pub refresh_period: usize,
    /// Forcing term c₂ for inexact linear solves: when present, the step
    /// solve stops once `‖M s + F(x)‖ ≤ c₂·‖F(x)‖`. Absent means direct
    /// solves with roundoff-level residuals.
    pub forcing: Option<f64>,
    /// Record `‖F'(x_k) s̃_k + F(x_k)‖ / ‖F(x_k)‖` in the trace when the
    /// problem has an analytic Jacobian. Purely observational.
    pub record_linearized_ratio: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-4,
            sigma: 0.5,
            theta: 1e-5,
            eta_schedule: EtaSchedule::default(),
            tol_inf: 1e-6,
            max_iter: 300,
            condg_max_iter: 300,
            lambda_min: 1e-12,
            jacobian_strategy: JacobianStrategy::FiniteDifference,
            refresh_period: 5,
            forcing: None,
            record_linearized_ratio: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError(format!("alpha = {} not in (0,1)", self.alpha)));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(ConfigError(format!("sigma = {} not in (0,1)", self.sigma)));
        }
        if !(self.theta >= 0.0) {
            return Err(ConfigError(format!("theta = {} negative", self.theta)));
        }
        if !(self.tol_inf > 0.0) {
            return Err(ConfigError(format!("tol_inf = {} not positive", self.tol_inf)));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < 1.0) {
            return Err(ConfigError(format!(
                "lambda_min = {} not in (0,1)",
                self.lambda_min
            )));
        }
        if self.refresh_period < 1 {
            return Err(ConfigError("refresh_period must be at least 1".into()));
        }
        if self.condg_max_iter < 1 {
            return Err(ConfigError("condg_max_iter must be at least 1".into()));
        }
        if let Some(c2) = self.forcing {
            if !(c2 >= 0.0) {
                return Err(ConfigError(format!("forcing c2 = {c2} negative")));
            }
        }
        self.eta_schedule.validate()
    }

    /// The conditional-gradient tolerance multiplier for outer iteration `k`.
    ///
    /// Constant in this implementation; the acceptance theory only needs a
    /// nonnegative bounded sequence, so a per-k schedule can hook in here.
    pub fn theta_at(&self, _k: usize) -> f64 {
        self.theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_zero_is_offset() {
        let s = EtaSchedule::new(0.99, 100.0).unwrap();
        assert_eq!(s.eta(0), 100.0);
        assert_eq!(s.eta(1), 99.0);
    }

    #[test]
    fn eta_is_positive_and_decreasing() {
        let s = EtaSchedule::new(0.99, 100.0).unwrap().bind_f0(17.5);
        let mut prev = f64::INFINITY;
        for k in 0..2000 {
            let e = s.eta(k);
            assert!(e > 0.0);
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn eta_partial_sums_bounded_by_closed_form() {
        // Geometric series: Σ ηk = (b + f0²)/(1−a) = 100·(100 + f0²) here.
        let f0_sq = 3.25;
        let s = EtaSchedule::new(0.99, 100.0).unwrap().bind_f0(f0_sq);
        let bound = s.sum() + 1e-9 * (s.b + f0_sq);
        let mut running = 0.0;
        for k in 0..1_000_000usize {
            running += s.eta(k);
            assert!(running <= bound, "partial sum exceeded bound at k = {k}");
        }
        let closed_form = 100.0 * (100.0 + f0_sq);
        assert!((s.sum() - closed_form).abs() <= 1e-9 * closed_form);
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let mut cfg = SolverConfig::default();
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = SolverConfig::default();
        cfg.sigma = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = SolverConfig::default();
        cfg.eta_schedule.a = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = SolverConfig::default();
        cfg.refresh_period = 0;
        assert!(cfg.validate().is_err());

        assert!(SolverConfig::default().validate().is_ok());
    }
}
