//! Shared helpers for the integration tests: an exact rational-arithmetic
//! Cox–de Boor recursion used as an independent basis oracle, and builders
//! for random discrete fields.
#![allow(dead_code)]

use num::{BigRational, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use derham::complex::{CoefficientField, SplineComplex};

/// Exact rational `j / n`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// The p-open uniform knot sequence with breakpoints `j/elements`, as exact
/// rationals: `p + 1` copies of 0 and 1 at the ends.
pub fn rational_open_uniform(degree: usize, elements: usize) -> Vec<BigRational> {
    let mut knots = Vec::with_capacity(elements + 1 + 2 * degree);
    for _ in 0..degree {
        knots.push(BigRational::zero());
    }
    for j in 0..=elements {
        knots.push(rational(j as i64, elements as i64));
    }
    for _ in 0..degree {
        knots.push(BigRational::one());
    }
    knots
}

/// Textbook Cox–de Boor recursion over exact rationals: the value of
/// `N_{i,p}` at `x`. Intervals are half-open, so `x` must not sit on a
/// knot for the convention to be unambiguous.
pub fn rational_basis(degree: usize, knots: &[BigRational], i: usize, x: &BigRational) -> BigRational {
    if degree == 0 {
        return if &knots[i] <= x && x < &knots[i + 1] {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    let mut value = BigRational::zero();
    let left_den = &knots[i + degree] - &knots[i];
    if !left_den.is_zero() {
        value += (x - &knots[i]) / left_den * rational_basis(degree - 1, knots, i, x);
    }
    let right_den = &knots[i + degree + 1] - &knots[i + 1];
    if !right_den.is_zero() {
        value += (&knots[i + degree + 1] - x) / right_den
            * rational_basis(degree - 1, knots, i + 1, x);
    }
    value
}

/// A random dyadic point `(2k + 1)/2048` in `(0, 1)`. For any element count
/// below 2048 this can never hit a breakpoint `j/elements`, keeping the
/// half-open convention of the oracle and the float evaluator aligned.
pub fn random_dyadic_point(rng: &mut ChaCha8Rng) -> (BigRational, f64) {
    let k: i64 = rng.random_range(0..1024);
    (rational(2 * k + 1, 2048), (2 * k + 1) as f64 / 2048.0)
}

/// A random field of the given role whose coefficients are dyadic rationals
/// `k / 2²⁰`, so coefficient-level derivative operators act exactly.
pub fn random_dyadic_field(
    cx: &SplineComplex,
    role: usize,
    rng: &mut ChaCha8Rng,
) -> CoefficientField {
    let space = cx.role(role).expect("role in range").clone();
    let data = (0..space.num_components())
        .map(|c| {
            (0..space.component_dim(c).expect("component in range"))
                .map(|_| rng.random_range(-(1 << 20)..(1 << 20)) as f64 / (1 << 20) as f64)
                .collect()
        })
        .collect();
    CoefficientField::new(space, data).expect("shapes match")
}
