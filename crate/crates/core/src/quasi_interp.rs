//! Univariate quasi-interpolation: dual functionals and the projectors
//! `Π`, `Π̃`, and `Π̃^∂`.
//!
//! The dual functional `λ_{i,p}(f)` is the `i`-th coefficient of the local
//! L²-orthogonal projection of `f` onto the span of the B-splines active on
//! `[ξ_i, ξ_{i+p+1}]` — a small Gram solve per index, reading `f` only on
//! that interval. Duality `λ_{i,p}(b_j) = δ_{ij}` and hence spline
//! reproduction hold by construction.
//!
//! Three projectors are built on top of the duals:
//!
//! * `Π f = Σ_i λ_{i,p}(f) b_i` — plain local projection,
//! * `Π̃` — as `Π`, but the first/last coefficients are `f(0)` and `f(1)`,
//!   so the result interpolates the endpoints exactly (this is what makes
//!   patchwise interpolants glue conformingly),
//! * `Π̃^∂ f = ∂ (Π̃ ∫₀^η f)` — the derivative-compatible projector onto
//!   `S_{p−1}(Ξ′)`; together with `Π̃` it commutes with differentiation.
//!
//! Each projector also exists in *matrix form* ([`QuasiInterpolant`]): a
//! fixed set of sample points plus a dense weight matrix mapping sampled
//! values to coefficients. The matrix form is what the tensor-product
//! interpolants contract along each axis; partial-element integrals inside
//! `Π̃^∂` are expressed over the same per-element Gauss nodes through exact
//! Legendre antiderivatives, so no extra sample points are needed.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::analysis::{legendre_values, AnalysisError, GaussRule};
use crate::bspline::{eval_basis, BsplineError, CumulativeIntegral, Spline1D};
use crate::knots::{KnotError, KnotVector};

/// Errors from dual-functional assembly and projector application.
#[derive(Debug, Error)]
pub enum QuasiInterpError {
    #[error("functional index {index} out of range for space of dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("local Gram matrix for functional {index} is not positive definite")]
    GramNotSpd { index: usize },
    #[error("derivative-compatible projector requires degree >= 1")]
    DegreeZero,
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error(transparent)]
    Bspline(#[from] BsplineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Gauss points per element for functional moments and cumulative integrals.
///
/// `p + 2` already makes every spline-against-spline integral exact; the
/// floor of 16 keeps quadrature errors on transcendental inputs far below
/// the commuting-diagram tolerances even on two-element meshes.
pub(crate) fn functional_quadrature_points(degree: usize) -> usize {
    (degree + 2).max(16)
}

/// The dual functionals `λ_{i,p}` (and endpoint variants `λ̃_{i,p}`) of a
/// univariate spline space.
///
/// Assembled once per knot vector: every functional is a weight vector over
/// a shared grid of per-element Gauss nodes, plus the two endpoints for the
/// `λ̃` variant. Evaluation is pure.
#[derive(Debug, Clone)]
pub struct DualFunctionalSet {
    xi: KnotVector,
    quadrature_points: usize,
    /// Per-element Gauss nodes (ascending within each element), then 0 and 1.
    samples: Vec<f64>,
    /// Sparse weight rows: `λ_i(f) = Σ (w, s) w · f(samples[s])`.
    rows: Vec<Vec<(usize, f64)>>,
    zero_index: usize,
    one_index: usize,
}

impl DualFunctionalSet {
    /// Assembles the dual functionals for the space over `xi`.
    pub fn new(xi: &KnotVector) -> Result<Self, QuasiInterpError> {
        let p = xi.degree();
        let quadrature_points = functional_quadrature_points(p);
        let gauss = GaussRule::new(quadrature_points)?;
        let elements = xi.elements();
        let n = gauss.len();

        let mut samples = Vec::with_capacity(elements.len() * n + 2);
        for e in &elements {
            for &t in gauss.nodes() {
                samples.push(e.lo + e.length() * t);
            }
        }
        let zero_index = samples.len();
        samples.push(0.0);
        let one_index = samples.len();
        samples.push(1.0);

        let k = xi.dim();
        let knots = xi.knots();
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let (wlo, whi) = (knots[i], knots[i + p + 1]);
            // Window elements: complete by construction, since the window
            // endpoints are knots.
            let window: Vec<usize> = (0..elements.len())
                .filter(|&e| elements[e].lo >= wlo && elements[e].hi <= whi)
                .collect();
            // Active basis functions on the window interior form a
            // contiguous index range.
            let lo = (i.saturating_sub(p)..=i)
                .find(|&j| knots[j + p + 1] > wlo)
                .expect("center function is active on its own window");
            let hi = (i..=(i + p).min(k - 1))
                .rev()
                .find(|&j| knots[j] < whi)
                .expect("center function is active on its own window");
            let m = hi - lo + 1;

            let mut gram = DMatrix::<f64>::zeros(m, m);
            for &e in &window {
                let el = &elements[e];
                for (&t, &w) in gauss.nodes().iter().zip(gauss.weights()) {
                    let x = el.lo + el.length() * t;
                    let wx = w * el.length();
                    let (first, vals) = eval_basis(xi, x);
                    for (a, &va) in vals.iter().enumerate() {
                        let ja = first + a;
                        debug_assert!((lo..=hi).contains(&ja));
                        for (b, &vb) in vals.iter().enumerate() {
                            gram[(ja - lo, first + b - lo)] += wx * va * vb;
                        }
                    }
                }
            }
            let chol = gram
                .clone()
                .cholesky()
                .ok_or(QuasiInterpError::GramNotSpd { index: i })?;
            let mut rhs = DVector::<f64>::zeros(m);
            rhs[i - lo] = 1.0;
            let y = chol.solve(&rhs);

            let mut row = Vec::with_capacity(window.len() * n);
            for &e in &window {
                let el = &elements[e];
                for (g, (&t, &w)) in gauss.nodes().iter().zip(gauss.weights()).enumerate() {
                    let x = el.lo + el.length() * t;
                    let wx = w * el.length();
                    let (first, vals) = eval_basis(xi, x);
                    let weight: f64 = vals
                        .iter()
                        .enumerate()
                        .map(|(a, &va)| y[first + a - lo] * va)
                        .sum::<f64>()
                        * wx;
                    row.push((e * n + g, weight));
                }
            }
            rows.push(row);
        }

        Ok(DualFunctionalSet {
            xi: xi.clone(),
            quadrature_points,
            samples,
            rows,
            zero_index,
            one_index,
        })
    }

    /// The spline space the functionals are dual to.
    #[inline]
    pub fn space(&self) -> &KnotVector {
        &self.xi
    }

    /// Number of functionals (= space dimension).
    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Gauss points per element used for the moment integrals.
    #[inline]
    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    /// The interval `[ξ_i, ξ_{i+p+1}]` functional `i` reads its argument on.
    pub fn support(&self, i: usize) -> Result<(f64, f64), QuasiInterpError> {
        self.check_index(i)?;
        let p = self.xi.degree();
        Ok((self.xi.knots()[i], self.xi.knots()[i + p + 1]))
    }

    /// The sample points functional `i` actually reads (all inside
    /// [`support`](Self::support)).
    pub fn sample_points(&self, i: usize) -> Result<Vec<f64>, QuasiInterpError> {
        self.check_index(i)?;
        Ok(self.rows[i].iter().map(|&(s, _)| self.samples[s]).collect())
    }

    /// `λ_{i,p}(f)`.
    pub fn apply(
        &self,
        i: usize,
        f: &mut impl FnMut(f64) -> f64,
    ) -> Result<f64, QuasiInterpError> {
        self.check_index(i)?;
        Ok(self.rows[i]
            .iter()
            .map(|&(s, w)| w * f(self.samples[s]))
            .sum())
    }

    /// `λ̃_{i,p}(f)`: endpoint evaluation for the first and last index,
    /// `λ_{i,p}(f)` otherwise.
    pub fn apply_endpoint(
        &self,
        i: usize,
        f: &mut impl FnMut(f64) -> f64,
    ) -> Result<f64, QuasiInterpError> {
        self.check_index(i)?;
        if i == 0 {
            Ok(f(0.0))
        } else if i == self.len() - 1 {
            Ok(f(1.0))
        } else {
            self.apply(i, f)
        }
    }

    /// `max_i Σ_j |w_{ij}|`: a computable bound for `sup ‖λ_i‖_{L∞ → ℝ}` and
    /// hence (by partition of unity) for the sup-norm of the projector.
    pub fn stability_constant(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w.abs()).sum())
            .fold(1.0, f64::max) // the λ̃ endpoint rows have norm 1
    }

    fn check_index(&self, i: usize) -> Result<(), QuasiInterpError> {
        if i >= self.len() {
            return Err(QuasiInterpError::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }
}

/// `λ_{i,p}(f)`.
pub fn lambda(
    duals: &DualFunctionalSet,
    i: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64, QuasiInterpError> {
    duals.apply(i, &mut f)
}

/// `Π f = Σ_i λ_{i,p}(f) b_i`: reproduces every spline of the space.
pub fn pi(duals: &DualFunctionalSet, mut f: impl FnMut(f64) -> f64) -> Spline1D {
    let coeffs: Vec<f64> = (0..duals.len())
        .map(|i| duals.apply(i, &mut f).expect("index in range"))
        .collect();
    Spline1D::new(duals.space().clone(), coeffs).expect("coefficient count matches space")
}

/// `Π̃ f`: as [`pi`], with endpoint coefficients `f(0)` and `f(1)`.
pub fn pi_tilde(duals: &DualFunctionalSet, mut f: impl FnMut(f64) -> f64) -> Spline1D {
    let coeffs: Vec<f64> = (0..duals.len())
        .map(|i| duals.apply_endpoint(i, &mut f).expect("index in range"))
        .collect();
    Spline1D::new(duals.space().clone(), coeffs).expect("coefficient count matches space")
}

/// `Π̃^∂ f = ∂ (Π̃ ∫₀^η f)`: the derivative-compatible projector onto the
/// truncated space `S_{p−1}(Ξ′)`. `duals` must belong to the parent degree-`p`
/// space.
pub fn pi_tilde_partial(
    duals: &DualFunctionalSet,
    mut f: impl FnMut(f64) -> f64,
) -> Result<Spline1D, QuasiInterpError> {
    if duals.space().degree() == 0 {
        return Err(QuasiInterpError::DegreeZero);
    }
    let breaks = duals.space().breakpoints();
    let table = CumulativeIntegral::new(&breaks, duals.quadrature_points(), &mut f)?;
    let mut big_f = |x: f64| table.eval(x, &mut f);
    let coeffs: Vec<f64> = (0..duals.len())
        .map(|i| duals.apply_endpoint(i, &mut big_f).expect("index in range"))
        .collect();
    let integral =
        Spline1D::new(duals.space().clone(), coeffs).expect("coefficient count matches space");
    Ok(integral.derivative()?)
}

/// A projector in matrix form: coefficients are a dense weight matrix
/// applied to the argument sampled at fixed points.
///
/// This is the representation the tensor-product interpolants use: sampling
/// grids are outer products of the per-axis sample sets and the weight
/// matrices contract one axis at a time.
#[derive(Debug, Clone)]
pub struct QuasiInterpolant {
    target: KnotVector,
    samples: Vec<f64>,
    weights: DMatrix<f64>,
}

impl QuasiInterpolant {
    /// Matrix form of [`pi`].
    pub fn plain(xi: &KnotVector) -> Result<Self, QuasiInterpError> {
        let duals = DualFunctionalSet::new(xi)?;
        Ok(Self::from_duals(&duals, false))
    }

    /// Matrix form of [`pi_tilde`].
    pub fn endpoint(xi: &KnotVector) -> Result<Self, QuasiInterpError> {
        let duals = DualFunctionalSet::new(xi)?;
        Ok(Self::from_duals(&duals, true))
    }

    /// Matrix form of [`pi_tilde_partial`], mapping onto `S_{p−1}(Ξ′)`.
    pub fn derivative_compatible(xi: &KnotVector) -> Result<Self, QuasiInterpError> {
        let duals = DualFunctionalSet::new(xi)?;
        Self::derivative_from_duals(&duals, true)
    }

    /// Matrix form of the plain variant `Π^∂ = ∂ ∘ Π ∘ ∫` (no endpoint rows).
    pub fn derivative_plain(xi: &KnotVector) -> Result<Self, QuasiInterpError> {
        let duals = DualFunctionalSet::new(xi)?;
        Self::derivative_from_duals(&duals, false)
    }

    fn from_duals(duals: &DualFunctionalSet, endpoint: bool) -> Self {
        let k = duals.len();
        let mut weights = DMatrix::<f64>::zeros(k, duals.samples.len());
        for i in 0..k {
            if endpoint && i == 0 {
                weights[(i, duals.zero_index)] = 1.0;
            } else if endpoint && i == k - 1 {
                weights[(i, duals.one_index)] = 1.0;
            } else {
                for &(s, w) in &duals.rows[i] {
                    weights[(i, s)] = w;
                }
            }
        }
        QuasiInterpolant {
            target: duals.space().clone(),
            samples: duals.samples.clone(),
            weights,
        }
    }

    fn derivative_from_duals(
        duals: &DualFunctionalSet,
        endpoint: bool,
    ) -> Result<Self, QuasiInterpError> {
        let xi = duals.space();
        let p = xi.degree();
        if p == 0 {
            return Err(QuasiInterpError::DegreeZero);
        }
        let w_tilde = Self::from_duals(duals, endpoint).weights;
        let gauss = GaussRule::new(duals.quadrature_points())?;
        let n = gauss.len();
        let elements = xi.elements();
        let cols = elements.len() * n;

        // B maps values of f at the element-node grid to values of
        // F(t) = ∫₀ᵗ f at every dual sample point: full elements left of t
        // get their Gauss weights, the trailing partial element gets exact
        // interpolatory weights over the same nodes.
        let mut b = DMatrix::<f64>::zeros(duals.samples.len(), cols);
        for (r, &t) in duals.samples.iter().enumerate() {
            let j = match elements.iter().rposition(|e| e.lo <= t) {
                Some(j) => j,
                None => continue, // t = 0: empty integral
            };
            for (jj, e) in elements.iter().enumerate().take(j) {
                for (g, &w) in gauss.weights().iter().enumerate() {
                    b[(r, jj * n + g)] = w * e.length();
                }
            }
            let el = &elements[j];
            let pw = partial_weights(&gauss, el.lo, el.hi, t.min(el.hi));
            for (g, &w) in pw.iter().enumerate() {
                b[(r, j * n + g)] = w;
            }
        }

        // Coefficient-level derivative onto the truncated space.
        let trunc = xi.truncate()?;
        let k = xi.dim();
        let knots = xi.knots();
        let mut d = DMatrix::<f64>::zeros(k - 1, k);
        for i in 0..k - 1 {
            let factor = p as f64 / (knots[i + p + 1] - knots[i + 1]);
            d[(i, i)] = -factor;
            d[(i, i + 1)] = factor;
        }

        let weights = d * (w_tilde * b);
        let samples = duals.samples[..cols].to_vec();
        Ok(QuasiInterpolant {
            target: trunc,
            samples,
            weights,
        })
    }

    /// The space the output coefficients live in.
    #[inline]
    pub fn target(&self) -> &KnotVector {
        &self.target
    }

    /// The points the argument is sampled at.
    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// The weight matrix (`target.dim() × samples.len()`).
    #[inline]
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Applies the projector to a callable.
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> Spline1D {
        let values: Vec<f64> = self.samples.iter().map(|&x| f(x)).collect();
        Spline1D::new(self.target.clone(), self.apply_to_values(&values))
            .expect("coefficient count matches target")
    }

    /// Applies the weight matrix to pre-sampled values.
    pub fn apply_to_values(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.samples.len(), "sample count mismatch");
        let v = DVector::from_column_slice(values);
        (&self.weights * v).data.into()
    }

    /// `max_i Σ_j |w_{ij}|`: sup-norm bound of the projector.
    pub fn stability_constant(&self) -> f64 {
        (0..self.weights.nrows())
            .map(|i| self.weights.row(i).iter().map(|w| w.abs()).sum())
            .fold(0.0, f64::max)
    }
}

/// Interpolatory weights over the element's Gauss nodes for `∫_lo^t`,
/// exact for polynomials up to the rule's interpolation degree: the unique
/// degree-`(n−1)` interpolant is integrated through closed-form Legendre
/// antiderivatives.
fn partial_weights(gauss: &GaussRule, lo: f64, hi: f64, t: f64) -> Vec<f64> {
    let n = gauss.len();
    let h = hi - lo;
    let s = (2.0 * (t - lo) / h - 1.0).clamp(-1.0, 1.0);
    let ps = legendre_values(n, s);
    // ∫_{−1}^{s} P_m du, scaled below by h/2.
    let mut bracket = vec![0.0; n];
    bracket[0] = s + 1.0;
    for m in 1..n {
        bracket[m] = ps[m + 1] - ps[m - 1];
    }
    gauss
        .nodes()
        .iter()
        .zip(gauss.weights())
        .map(|(&t01, &w)| {
            let u = 2.0 * t01 - 1.0;
            let pu = legendre_values(n - 1, u);
            let sum: f64 = (0..n).map(|m| pu[m] * bracket[m]).sum();
            w * h * 0.5 * sum
        })
        .collect()
}
