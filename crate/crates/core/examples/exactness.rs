//! Minimal tour: build a surface complex, differentiate a discrete field
//! twice, and watch the composite cancel identically.

use derham::complex::{curl_2d, div_2d, CoefficientField, SplineComplex};
use derham::knots::KnotVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Degree-(2,2) tensor spaces on a dyadic 4×4 mesh of the unit square.
    let knots = vec![
        KnotVector::open_uniform(2, 4),
        KnotVector::open_uniform(2, 4),
    ];
    let cx = SplineComplex::new(&[2, 2], knots)?;

    // A scalar field in the role-0 space, given by its coefficients.
    // Dyadic values keep every derivative weight exact in binary floating
    // point, so the cancellation below is bit-exact, not merely small.
    let space = cx.role(0)?.clone();
    let coeffs: Vec<f64> = (0..space.total_dim())
        .map(|i| (i % 7) as f64 / 8.0 - 0.375)
        .collect();
    let f = CoefficientField::new(space, vec![coeffs])?;

    // The composite surface operators cancel: div (curl f) ≡ 0.
    let residual = div_2d(&curl_2d(&f)?)?.max_abs();
    println!("max |div curl f| = {residual:e}");
    assert_eq!(residual, 0.0);
    Ok(())
}
