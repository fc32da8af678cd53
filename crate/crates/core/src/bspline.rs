//! Univariate B-spline bases and splines on `[0, 1]`.
//!
//! Basis values come from the numerically stable triangular recurrence on
//! the knot span containing the query point; evaluation is right-continuous
//! at interior knots and left-closed at `x = 1`.
//!
//! Differentiation and integration act on *coefficients*:
//!
//! * `s ∈ S_p(Ξ)` has `s′ ∈ S_{p−1}(Ξ′)` with
//!   `c′_i = p (c_{i+1} − c_i) / (ξ_{i+p+1} − ξ_{i+1})`,
//! * the antiderivative normalised by `F(0) = 0` inverts that bidiagonal
//!   relation one degree up.
//!
//! Both are exact in exact arithmetic — this is what makes the discrete
//! differential operators of the spline complexes exact as well.

use thiserror::Error;

use crate::analysis::{AnalysisError, GaussRule};
use crate::knots::{KnotError, KnotVector};

/// Errors from spline construction and integral evaluation.
#[derive(Debug, Error)]
pub enum BsplineError {
    #[error("coefficient count {got} does not match the space dimension {expect}")]
    CoefficientMismatch { got: usize, expect: usize },
    #[error("integration partition must be strictly increasing from 0 to 1")]
    BadPartition,
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Values of the `p + 1` basis functions that may be nonzero at `x`.
///
/// Returns `(first, values)` where `values[j]` is `N_{first + j, p}(x)`.
pub fn eval_basis(xi: &KnotVector, x: f64) -> (usize, Vec<f64>) {
    let p = xi.degree();
    let knots = xi.knots();
    let span = xi.find_span(x);
    let mut values = vec![0.0; p + 1];
    values[0] = 1.0;
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = values[r] / (right[r + 1] + left[j - r]);
            values[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        values[j] = saved;
    }
    (span - p, values)
}

/// Values and first derivatives of the active basis functions at `x`.
///
/// Returns `(first, values, derivs)` indexed like [`eval_basis`].
pub fn eval_basis_and_deriv(xi: &KnotVector, x: f64) -> (usize, Vec<f64>, Vec<f64>) {
    let p = xi.degree();
    let (first, values) = eval_basis(xi, x);
    if p == 0 {
        return (first, values, vec![0.0]);
    }
    let knots = xi.knots();
    let span = first + p;
    // Active degree-(p−1) functions on the same span: N_{span−p+1+r, p−1}.
    let mut lower = vec![0.0; p];
    lower[0] = 1.0;
    let mut left = vec![0.0; p];
    let mut right = vec![0.0; p];
    for j in 1..p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = lower[r] / (right[r + 1] + left[j - r]);
            lower[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        lower[j] = saved;
    }
    let mut derivs = vec![0.0; p + 1];
    for j in 0..=p {
        let i = first + j;
        let mut d = 0.0;
        if j >= 1 {
            let denom = knots[i + p] - knots[i];
            if denom > 0.0 {
                d += lower[j - 1] / denom;
            }
        }
        if j <= p - 1 {
            let denom = knots[i + p + 1] - knots[i + 1];
            if denom > 0.0 {
                d -= lower[j] / denom;
            }
        }
        derivs[j] = p as f64 * d;
    }
    (first, values, derivs)
}

/// A univariate spline: a knot vector plus one coefficient per basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline1D {
    xi: KnotVector,
    coeffs: Vec<f64>,
}

impl Spline1D {
    pub fn new(xi: KnotVector, coeffs: Vec<f64>) -> Result<Self, BsplineError> {
        if coeffs.len() != xi.dim() {
            return Err(BsplineError::CoefficientMismatch {
                got: coeffs.len(),
                expect: xi.dim(),
            });
        }
        Ok(Spline1D { xi, coeffs })
    }

    #[inline]
    pub fn knot_vector(&self) -> &KnotVector {
        &self.xi
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Spline value at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let (first, values) = eval_basis(&self.xi, x);
        values
            .iter()
            .enumerate()
            .map(|(j, &v)| v * self.coeffs[first + j])
            .sum()
    }

    /// Derivative value at `x`, evaluated through the basis derivatives.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let (first, _, derivs) = eval_basis_and_deriv(&self.xi, x);
        derivs
            .iter()
            .enumerate()
            .map(|(j, &d)| d * self.coeffs[first + j])
            .sum()
    }

    /// The exact derivative as a spline of degree `p − 1` over the truncated
    /// knot vector.
    pub fn derivative(&self) -> Result<Spline1D, BsplineError> {
        let p = self.xi.degree();
        let trunc = self.xi.truncate()?;
        let knots = self.xi.knots();
        let coeffs = (0..self.coeffs.len() - 1)
            .map(|i| {
                p as f64 * (self.coeffs[i + 1] - self.coeffs[i])
                    / (knots[i + p + 1] - knots[i + 1])
            })
            .collect();
        Ok(Spline1D { xi: trunc, coeffs })
    }

    /// The exact antiderivative `F` with `F′ = self` and `F(0) = 0`, a spline
    /// of degree `p + 1` over the knot vector extended by one clamp per end.
    pub fn antiderivative(&self) -> Spline1D {
        let p = self.xi.degree();
        let q = p + 1;
        let mut parent = Vec::with_capacity(self.xi.knots().len() + 2);
        parent.push(0.0);
        parent.extend_from_slice(self.xi.knots());
        parent.push(1.0);
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        let mut acc = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            // parent[j + q + 1] − parent[j + 1] with j = i, shifted by the
            // prepended knot: both indices move up by one.
            acc += c * (parent[i + q + 1] - parent[i + 1]) / q as f64;
            coeffs.push(acc);
        }
        Spline1D {
            xi: KnotVector::new_unchecked(q, parent),
            coeffs,
        }
    }
}

/// Prefix integrals of an arbitrary integrand over a fixed partition of
/// `[0, 1]`: `∫₀ˣ f` is a table lookup for the complete elements left of `x`
/// plus one Gauss pass over the trailing partial element.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    breaks: Vec<f64>,
    prefix: Vec<f64>,
    gauss: GaussRule,
}

impl CumulativeIntegral {
    /// Tabulates prefix integrals of `f` over `breaks`, which must ascend
    /// strictly from `0` to `1`; `points` is the Gauss order per element.
    pub fn new(
        breaks: &[f64],
        points: usize,
        f: &mut impl FnMut(f64) -> f64,
    ) -> Result<Self, BsplineError> {
        if breaks.len() < 2
            || breaks[0] != 0.0
            || *breaks.last().expect("nonempty") != 1.0
            || breaks.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(BsplineError::BadPartition);
        }
        let gauss = GaussRule::new(points)?;
        let mut prefix = Vec::with_capacity(breaks.len());
        prefix.push(0.0);
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            acc += gauss.integrate(w[0], w[1], &mut *f);
            prefix.push(acc);
        }
        Ok(CumulativeIntegral {
            breaks: breaks.to_vec(),
            prefix,
            gauss,
        })
    }

    /// Approximates `∫₀ˣ f` for the same integrand the table was built from.
    pub fn eval(&self, x: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x));
        // Last breakpoint <= x.
        let j = match self
            .breaks
            .binary_search_by(|b| b.partial_cmp(&x).expect("finite breakpoints"))
        {
            Ok(j) => return self.prefix[j],
            Err(j) => j - 1,
        };
        self.prefix[j] + self.gauss.integrate(self.breaks[j], x, f)
    }

    /// The total integral `∫₀¹ f`.
    pub fn total(&self) -> f64 {
        *self.prefix.last().expect("nonempty prefix table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn kv(degree: usize, knots: &[f64]) -> KnotVector {
        KnotVector::new(degree, knots.to_vec()).expect("valid test vector")
    }

    #[test]
    fn hat_functions_take_exact_values() {
        let xi = kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]);
        let (first, values) = eval_basis(&xi, 0.25);
        assert_eq!(first, 0);
        assert_eq!(values, vec![0.5, 0.5]);
        let (first, values) = eval_basis(&xi, 0.5);
        assert_eq!(first, 1);
        assert_eq!(values, vec![1.0, 0.0]);
        let (first, values) = eval_basis(&xi, 1.0);
        assert_eq!(first, 1);
        assert_eq!(values, vec![0.0, 1.0]);
    }

    #[test]
    fn single_element_quadratics_are_bernstein() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        for &x in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            let (first, values) = eval_basis(&xi, x);
            assert_eq!(first, 0);
            assert_abs_diff_eq!(values[0], (1.0 - x) * (1.0 - x), epsilon = 1e-15);
            assert_abs_diff_eq!(values[1], 2.0 * x * (1.0 - x), epsilon = 1e-15);
            assert_abs_diff_eq!(values[2], x * x, epsilon = 1e-15);
        }
    }

    #[test]
    fn basis_is_a_nonnegative_partition_of_unity() {
        let vectors = [
            kv(0, &[0.0, 0.25, 0.5, 1.0]),
            kv(1, &[0.0, 0.0, 0.125, 0.25, 1.0, 1.0]),
            kv(2, &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.75, 1.0, 1.0, 1.0]),
            KnotVector::open_uniform(3, 7),
        ];
        for xi in &vectors {
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let (first, values) = eval_basis(xi, x);
                assert!(first + values.len() <= xi.dim());
                let sum: f64 = values.iter().sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
                assert!(values.iter().all(|&v| v >= -1e-15));
            }
        }
    }

    #[test]
    fn right_continuous_at_repeated_interior_knot() {
        // Double knot at 0.5 for degree 2: C⁰ there; values at 0.5 must be
        // those of the right limit.
        let xi = kv(2, &[0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]);
        let (first, values) = eval_basis(&xi, 0.5);
        assert_eq!(first + values.iter().position(|&v| v != 0.0).unwrap(), 2);
        let s = Spline1D::new(xi, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.eval(0.5), 1.0, epsilon = 1e-15);
        let just_left = s.eval(0.5 - 1e-12);
        assert_abs_diff_eq!(just_left, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn greville_coefficients_reproduce_the_identity() {
        for xi in [
            kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]),
            kv(2, &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.75, 1.0, 1.0, 1.0]),
            KnotVector::open_uniform(3, 5),
        ] {
            let s = Spline1D::new(xi.clone(), xi.greville()).unwrap();
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                assert_abs_diff_eq!(s.eval(x), x, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn derivative_of_x_squared_is_two_x() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let s = Spline1D::new(xi, vec![0.0, 0.0, 1.0]).unwrap();
        let d = s.derivative().unwrap();
        assert_eq!(d.knot_vector().degree(), 1);
        assert_eq!(d.knot_vector().knots(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(d.coeffs(), &[0.0, 2.0]);
        for &x in &[0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(d.eval(x), 2.0 * x, epsilon = 1e-15);
        }
    }

    #[test]
    fn eval_deriv_matches_derivative_spline() {
        let xi = KnotVector::open_uniform(3, 4);
        let coeffs: Vec<f64> = (0..xi.dim()).map(|i| ((i * i) % 5) as f64 * 0.3 - 0.4).collect();
        let s = Spline1D::new(xi, coeffs).unwrap();
        let d = s.derivative().unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert_abs_diff_eq!(s.eval_deriv(x), d.eval(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn basis_derivatives_sum_to_zero_and_match_differences() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.75, 1.0, 1.0, 1.0]);
        for &x in &[0.1, 0.3, 0.6, 0.8] {
            let (_, _, derivs) = eval_basis_and_deriv(&xi, x);
            let sum: f64 = derivs.iter().sum();
            assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-12);
        }
        // Finite differences as an independent cross-check.
        let eps = 1e-6;
        for &x in &[0.1, 0.4, 0.9] {
            let (first, _, derivs) = eval_basis_and_deriv(&xi, x);
            let (f_lo, lo) = eval_basis(&xi, x - eps);
            let (f_hi, hi) = eval_basis(&xi, x + eps);
            assert_eq!(f_lo, first);
            assert_eq!(f_hi, first);
            for j in 0..derivs.len() {
                let fd = (hi[j] - lo[j]) / (2.0 * eps);
                assert_abs_diff_eq!(derivs[j], fd, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn antiderivative_inverts_derivative_and_vanishes_at_zero() {
        let xi = kv(1, &[0.0, 0.0, 1.0, 1.0]);
        let s = Spline1D::new(xi, vec![0.0, 2.0]).unwrap();
        let f = s.antiderivative();
        assert_eq!(f.knot_vector().degree(), 2);
        assert_eq!(f.coeffs(), &[0.0, 0.0, 1.0]);
        assert_eq!(f.eval(0.0), 0.0);
        assert_abs_diff_eq!(f.eval(0.7), 0.49, epsilon = 1e-15);

        let xi = KnotVector::open_uniform(2, 3);
        let g = Spline1D::new(xi.clone(), vec![1.0, -0.5, 2.0, 0.25, 1.5]).unwrap();
        let back = g.antiderivative().derivative().unwrap();
        assert_eq!(back.knot_vector(), &xi);
        for (a, b) in back.coeffs().iter().zip(g.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn cumulative_integral_of_sine() {
        let breaks = [0.0, 0.25, 0.5, 0.75, 1.0];
        let pi = std::f64::consts::PI;
        let mut f = |t: f64| (pi * t).sin();
        let table = CumulativeIntegral::new(&breaks, 8, &mut f).unwrap();
        assert_abs_diff_eq!(table.eval(1.0, &mut f), 2.0 / pi, epsilon = 1e-12);
        assert_abs_diff_eq!(table.total(), 2.0 / pi, epsilon = 1e-12);
        assert_eq!(table.eval(0.0, &mut f), 0.0);
        for &x in &[0.1, 0.25, 0.3, 0.77] {
            let exact = (1.0 - (pi * x).cos()) / pi;
            assert_abs_diff_eq!(table.eval(x, &mut f), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_integral_matches_spline_antiderivative() {
        let xi = KnotVector::open_uniform(2, 4);
        let s = Spline1D::new(xi.clone(), vec![0.3, -1.0, 0.7, 2.0, -0.2, 0.9]).unwrap();
        let exact = s.antiderivative();
        let mut f = |t: f64| s.eval(t);
        let table = CumulativeIntegral::new(&xi.breakpoints(), 6, &mut f).unwrap();
        let mut f2 = |t: f64| s.eval(t);
        for i in 0..=25 {
            let x = i as f64 / 25.0;
            assert_abs_diff_eq!(table.eval(x, &mut f2), exact.eval(x), epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_bad_partitions_and_coefficients() {
        let mut f = |_: f64| 1.0;
        assert!(matches!(
            CumulativeIntegral::new(&[0.0, 0.5, 0.5, 1.0], 4, &mut f),
            Err(BsplineError::BadPartition)
        ));
        assert!(matches!(
            CumulativeIntegral::new(&[0.1, 1.0], 4, &mut f),
            Err(BsplineError::BadPartition)
        ));
        let xi = kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert!(matches!(
            Spline1D::new(xi, vec![1.0, 2.0]),
            Err(BsplineError::CoefficientMismatch { got: 2, expect: 3 })
        ));
    }
}
