//! Adaptive Simpson quadrature on intervals and boxes.
//!
//! Each interval is first cut into a few equal panels so that an integrand
//! which happens to look polynomial at the five initial nodes is still
//! resolved. Every panel then refines recursively until the Richardson error
//! estimate `|S_2 - S_1| / 15` drops under its share of the tolerance, or the
//! depth limit is hit. Panels that exhaust the depth keep their estimates;
//! when their combined error exceeds the tolerance the result is an error
//! carrying the estimate, never a silent success.

use std::cell::{Cell, RefCell};

use thiserror::Error;

/// Absolute tolerance used by the mixture CDF.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Maximum bisection depth per panel.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("adaptive Simpson did not converge: estimate {estimate}, achieved error {achieved:e} > tolerance {tolerance:e}")]
pub struct QuadratureError {
    /// Best available value of the integral.
    pub estimate: f64,
    /// Accumulated error estimate of the panels that did not converge.
    pub achieved: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simpson {
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Default for Simpson {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Default)]
struct Tally {
    unresolved: Cell<f64>,
}

impl Tally {
    fn flag(&self, error: f64) {
        self.unresolved.set(self.unresolved.get() + error);
    }

    fn finish(&self, estimate: f64, tolerance: f64) -> Result<f64, QuadratureError> {
        if self.unresolved.get() > tolerance {
            Err(QuadratureError { estimate, achieved: self.unresolved.get(), tolerance })
        } else {
            Ok(estimate)
        }
    }
}

impl Simpson {
    pub fn new(tolerance: f64, max_depth: u32) -> Self {
        Self { tolerance, max_depth }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64, QuadratureError> {
        let tally = Tally::default();
        let value = self.integrate_tallied(&f, a, b, self.tolerance, &tally);
        tally.finish(value, self.tolerance)
    }

    /// Integrates `f` over the box `[lower, upper]` by nesting one
    /// dimensional rules, innermost over the last coordinate.
    pub fn integrate_box<F: Fn(&[f64]) -> f64>(
        &self,
        f: F,
        lower: &[f64],
        upper: &[f64],
    ) -> Result<f64, QuadratureError> {
        assert_eq!(lower.len(), upper.len(), "box bounds must have equal length");
        assert!(!lower.is_empty(), "box must have at least one dimension");
        let tally = Tally::default();
        let point = RefCell::new(lower.to_vec());
        let value = self.nested(&f, lower, upper, &point, 0, self.tolerance, &tally);
        tally.finish(value, self.tolerance)
    }

    /// Integrates over axes `axis..` with the earlier coordinates of `point`
    /// held fixed.
    #[allow(clippy::too_many_arguments)]
    fn nested<F: Fn(&[f64]) -> f64>(
        &self,
        f: &F,
        lower: &[f64],
        upper: &[f64],
        point: &RefCell<Vec<f64>>,
        axis: usize,
        tolerance: f64,
        tally: &Tally,
    ) -> f64 {
        if axis + 1 == lower.len() {
            let g = |x: f64| {
                point.borrow_mut()[axis] = x;
                f(&point.borrow())
            };
            return self.integrate_tallied(&g, lower[axis], upper[axis], tolerance, tally);
        }
        // half the budget for this axis; inner errors integrate over the extent
        let inner_tol = 0.5 * tolerance / (upper[axis] - lower[axis]);
        let g = |x: f64| {
            point.borrow_mut()[axis] = x;
            self.nested(f, lower, upper, point, axis + 1, inner_tol, tally)
        };
        self.integrate_tallied(&g, lower[axis], upper[axis], 0.5 * tolerance, tally)
    }

    fn integrate_tallied<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, tolerance: f64, tally: &Tally) -> f64 {
        if a == b {
            return 0.0;
        }
        let h = (b - a) / INITIAL_PANELS as f64;
        let panel_tol = tolerance / INITIAL_PANELS as f64;
        let mut total = 0.0;
        let mut left = a;
        let mut f_left = f(a);
        for i in 0..INITIAL_PANELS {
            let right = if i + 1 == INITIAL_PANELS { b } else { a + h * (i + 1) as f64 };
            let mid = 0.5 * (left + right);
            let f_mid = f(mid);
            let f_right = f(right);
            let whole = (right - left) / 6.0 * (f_left + 4.0 * f_mid + f_right);
            total += self.refine(f, left, right, f_left, f_mid, f_right, whole, panel_tol, self.max_depth, tally);
            left = right;
            f_left = f_right;
        }
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tolerance: f64,
        depth: u32,
        tally: &Tally,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tolerance {
            return left + right + delta / 15.0;
        }
        if depth == 0 || m <= a || m >= b {
            tally.flag(delta.abs() / 15.0);
            return left + right + delta / 15.0;
        }
        self.refine(f, a, m, fa, flm, fm, left, 0.5 * tolerance, depth - 1, tally)
            + self.refine(f, m, b, fm, frm, fb, right, 0.5 * tolerance, depth - 1, tally)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        let q = Simpson::default();
        assert!((q.integrate(|x| x * x, 0.0, 3.0).unwrap() - 9.0).abs() < 1e-12);
        let e = q.integrate(f64::exp, 0.0, 1.0).unwrap();
        assert!((e - (std::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn handles_sharp_but_bounded_integrands() {
        let q = Simpson::default();
        // integral of sqrt on [0,1] is 2/3; derivative blows up at the origin
        let v = q.integrate(f64::sqrt, 0.0, 1.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn reports_non_convergence_with_achieved_error() {
        let q = Simpson::new(1e-12, 3);
        let err = q.integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0).unwrap_err();
        assert!(err.achieved > 0.0);
        assert!(err.estimate.is_finite());
    }

    #[test]
    fn box_integral_of_separable_function() {
        let q = Simpson::default();
        let v = q.integrate_box(|t| t[0] * t[1].exp(), &[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert!((v - 2.0 * (std::f64::consts::E - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(Simpson::default().integrate(|x| x, 1.0, 1.0).unwrap(), 0.0);
    }
}
