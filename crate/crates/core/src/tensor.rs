//! Dense tensor helpers for coefficient arrays in lexicographic order with
//! the last axis fastest.

use nalgebra::DMatrix;

use crate::knots::KnotVector;

pub(crate) fn shape_len(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Mode-`axis` product: contracts `w` (`m × shape[axis]`) against the tensor
/// along `axis`, returning the new data and shape.
pub(crate) fn mode_multiply(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    w: &DMatrix<f64>,
) -> (Vec<f64>, Vec<usize>) {
    let n = shape[axis];
    assert_eq!(w.ncols(), n, "matrix width must match axis length");
    assert_eq!(data.len(), shape_len(shape), "data length must match shape");
    let m = w.nrows();
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out_shape = shape.to_vec();
    out_shape[axis] = m;
    let mut out = vec![0.0; outer * m * inner];
    for o in 0..outer {
        let in_base = o * n * inner;
        let out_base = o * m * inner;
        for r in 0..m {
            let dst = out_base + r * inner;
            for c in 0..n {
                let wrc = w[(r, c)];
                if wrc == 0.0 {
                    continue;
                }
                let src = in_base + c * inner;
                for i in 0..inner {
                    out[dst + i] += wrc * data[src + i];
                }
            }
        }
    }
    (out, out_shape)
}

/// The univariate coefficient-level derivative applied along one axis:
/// `c′_i = p (c_{i+1} − c_i) / (ξ_{i+p+1} − ξ_{i+1})` with respect to the
/// *parent* knot vector of that axis. Exact (two flops per output entry).
pub(crate) fn derivative_along_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    parent: &KnotVector,
) -> (Vec<f64>, Vec<usize>) {
    let n = shape[axis];
    assert_eq!(n, parent.dim(), "axis length must match parent dimension");
    assert!(parent.degree() >= 1, "parent degree must be at least 1");
    let p = parent.degree();
    let knots = parent.knots();
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out_shape = shape.to_vec();
    out_shape[axis] = n - 1;
    let mut out = vec![0.0; outer * (n - 1) * inner];
    for o in 0..outer {
        let in_base = o * n * inner;
        let out_base = o * (n - 1) * inner;
        for i in 0..n - 1 {
            let factor = p as f64 / (knots[i + p + 1] - knots[i + 1]);
            let src = in_base + i * inner;
            let dst = out_base + i * inner;
            for j in 0..inner {
                out[dst + j] = factor * (data[src + inner + j] - data[src + j]);
            }
        }
    }
    (out, out_shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::Spline1D;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mode_multiply_matches_matrix_products() {
        // A 2×3 tensor contracted along each axis against small matrices.
        let data = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // rows (2), cols (3) fastest
        let shape = [2, 3];

        let w = DMatrix::from_row_slice(1, 2, &[10.0, 1.0]);
        let (out, out_shape) = mode_multiply(&data, &shape, 0, &w);
        assert_eq!(out_shape, vec![1, 3]);
        assert_eq!(out, vec![14.0, 25.0, 36.0]);

        let w = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 0.0, 0.0, 2.0]);
        let (out, out_shape) = mode_multiply(&data, &shape, 1, &w);
        assert_eq!(out_shape, vec![2, 2]);
        assert_eq!(out, vec![6.0, 6.0, 15.0, 12.0]);
    }

    #[test]
    fn axis_derivative_matches_univariate_derivative() {
        let xi = KnotVector::open_uniform(2, 3);
        let coeffs = vec![0.5, -1.0, 2.0, 0.25, 1.5];
        let s = Spline1D::new(xi.clone(), coeffs.clone()).unwrap();
        let d = s.derivative().unwrap();

        // Axis 0 of a (k, 2) tensor holding the coefficients twice.
        let mut data = Vec::new();
        for &c in &coeffs {
            data.push(c);
            data.push(2.0 * c);
        }
        let (out, out_shape) = derivative_along_axis(&data, &[coeffs.len(), 2], 0, &xi);
        assert_eq!(out_shape, vec![coeffs.len() - 1, 2]);
        for (i, &dc) in d.coeffs().iter().enumerate() {
            assert_abs_diff_eq!(out[2 * i], dc, epsilon = 1e-15);
            assert_abs_diff_eq!(out[2 * i + 1], 2.0 * dc, epsilon = 1e-15);
        }
    }
}
