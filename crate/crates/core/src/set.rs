//! Convex compact feasible sets: membership, the linear-optimization oracle,
//! and (for boxes) exact Euclidean projection.

use nalgebra::DVector;
use thiserror::Error;

/// Errors raised by feasible-set operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetError {
    #[error("dimension mismatch: set has dimension {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("set does not support exact projection")]
    NoExactProjection,
    #[error("box bounds are invalid: {0}")]
    InvalidBounds(String),
}

/// A nonempty convex compact constraint set.
///
/// The solver and the conditional-gradient procedure only rely on
/// [`contains`](FeasibleSet::contains) and
/// [`gap_and_vertex`](FeasibleSet::gap_and_vertex), so any set with a linear
/// optimization oracle can be plugged in. Exact projection is an optional
/// capability used as a test oracle.
pub trait FeasibleSet: Send + Sync {
    /// Ambient dimension n.
    fn dim(&self) -> usize;

    /// Exact membership test (no tolerance).
    fn contains(&self, x: &DVector<f64>) -> bool;

    /// Returns a minimizer of `⟨c, u⟩` over the set.
    fn lo_argmin(&self, c: &DVector<f64>) -> DVector<f64>;

    /// Frank-Wolfe gap at `z` for the projection objective `½‖·−y‖²`:
    /// returns the oracle vertex `u` minimizing `⟨z−y, u⟩` and the gap value
    /// `g* = ⟨z−y, u−z⟩`. For feasible `z` the gap is never positive, since
    /// `u = z` is admissible.
    fn gap_and_vertex(&self, z: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
        let c = z - y;
        let u = self.lo_argmin(&c);
        let g = c.dot(&(&u - z));
        (u, g)
    }

    /// Whether [`project_exact`](FeasibleSet::project_exact) is available.
    fn has_exact_projection(&self) -> bool {
        false
    }

    /// Exact Euclidean projection onto the set, where supported.
    fn project_exact(&self, _y: &DVector<f64>) -> Result<DVector<f64>, SetError> {
        Err(SetError::NoExactProjection)
    }

    /// Downcast helper for code that needs box bounds (starting points).
    fn as_box(&self) -> Option<&BoxSet> {
        None
    }
}

/// A finite box `{x : l ≤ x ≤ u}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    l: DVector<f64>,
    u: DVector<f64>,
}

impl BoxSet {
    /// Creates a box from lower and upper bound vectors.
    ///
    /// Bounds must be finite (compactness) and satisfy `l ≤ u` componentwise
    /// (nonemptiness).
    pub fn new(l: DVector<f64>, u: DVector<f64>) -> Result<Self, SetError> {
        if l.len() != u.len() {
            return Err(SetError::DimensionMismatch {
                expected: l.len(),
                got: u.len(),
            });
        }
        for i in 0..l.len() {
            if !l[i].is_finite() || !u[i].is_finite() {
                return Err(SetError::InvalidBounds(format!(
                    "non-finite bound at component {i}"
                )));
            }
            if l[i] > u[i] {
                return Err(SetError::InvalidBounds(format!(
                    "l[{i}] = {} exceeds u[{i}] = {}",
                    l[i], u[i]
                )));
            }
        }
        Ok(Self { l, u })
    }

    /// Box with the same `[lo, hi]` interval in every coordinate.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self, SetError> {
        Self::new(
            DVector::from_element(n, lo),
            DVector::from_element(n, hi),
        )
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.l
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.u
    }

    /// Geometric center of the box.
    pub fn midpoint(&self) -> DVector<f64> {
        DVector::from_fn(self.l.len(), |i, _| 0.5 * (self.l[i] + self.u[i]))
    }

    fn check_dim(&self, x: &DVector<f64>) {
        assert_eq!(
            x.len(),
            self.l.len(),
            "dimension mismatch: set has dimension {}, vector has {}",
            self.l.len(),
            x.len()
        );
    }
}

impl FeasibleSet for BoxSet {
    fn dim(&self) -> usize {
        self.l.len()
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        self.check_dim(x);
        (0..x.len()).all(|i| self.l[i] <= x[i] && x[i] <= self.u[i])
    }

    /// Closed-form vertex selection: `u_i = l_i` if `c_i ≥ 0`, else `u_i`.
    /// Ties at `c_i = 0` resolve to the lower bound.
    fn lo_argmin(&self, c: &DVector<f64>) -> DVector<f64> {
        self.check_dim(c);
        DVector::from_fn(c.len(), |i, _| if c[i] >= 0.0 { self.l[i] } else { self.u[i] })
    }

    fn has_exact_projection(&self) -> bool {
        true
    }

    /// Componentwise clamp, the Euclidean projection onto a box.
    fn project_exact(&self, y: &DVector<f64>) -> Result<DVector<f64>, SetError> {
        if y.len() != self.l.len() {
            return Err(SetError::DimensionMismatch {
                expected: self.l.len(),
                got: y.len(),
            });
        }
        Ok(DVector::from_fn(y.len(), |i, _| {
            y[i].max(self.l[i]).min(self.u[i])
        }))
    }

    fn as_box(&self) -> Option<&BoxSet> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn contains_includes_boundary() {
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        assert!(set.contains(&dvector![0.0, 1.0]));
    }

    #[test]
    fn contains_rejects_strict_violation() {
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        assert!(!set.contains(&dvector![1.0000001, 0.5]));
    }

    #[test]
    fn contains_interior_point() {
        let set = BoxSet::uniform(5, -2.0, 2.0).unwrap();
        assert!(set.contains(&DVector::zeros(5)));
    }

    #[test]
    fn lo_argmin_sign_cases() {
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        assert_eq!(set.lo_argmin(&dvector![-2.0, 0.0]), dvector![1.0, 0.0]);

        let set = BoxSet::new(dvector![-1.0, 0.0], dvector![2.0, 5.0]).unwrap();
        assert_eq!(set.lo_argmin(&dvector![3.0, -1.0]), dvector![-1.0, 5.0]);
    }

    #[test]
    fn lo_argmin_tie_goes_to_lower_bound() {
        let set = BoxSet::uniform(4, 0.0, 1.0).unwrap();
        assert_eq!(set.lo_argmin(&DVector::zeros(4)), DVector::zeros(4));
    }

    #[test]
    fn gap_and_vertex_examples() {
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();

        let (u, g) = set.gap_and_vertex(&dvector![0.0, 0.0], &dvector![2.0, 0.0]);
        assert_eq!(u, dvector![1.0, 0.0]);
        assert_eq!(g, -2.0);

        // z = y inside the set: zero linear functional, zero gap.
        let z = dvector![0.5, 0.5];
        let (_, g) = set.gap_and_vertex(&z, &z);
        assert_eq!(g, 0.0);

        let (u, g) = set.gap_and_vertex(&dvector![1.0, 0.0], &dvector![2.0, 0.0]);
        assert_eq!(u, dvector![1.0, 0.0]);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn project_clamps() {
        let set = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        assert_eq!(
            set.project_exact(&dvector![2.0, 0.0]).unwrap(),
            dvector![1.0, 0.0]
        );

        let inside = dvector![0.25, 0.75];
        assert_eq!(set.project_exact(&inside).unwrap(), inside);

        let set = BoxSet::uniform(1, -1.0, 1.0).unwrap();
        assert_eq!(set.project_exact(&dvector![-5.0]).unwrap(), dvector![-1.0]);
    }

    #[test]
    fn rejects_degenerate_bounds() {
        assert!(BoxSet::new(dvector![1.0], dvector![0.0]).is_err());
        assert!(BoxSet::new(dvector![0.0], dvector![f64::INFINITY]).is_err());
    }
}
