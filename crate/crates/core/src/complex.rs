//! The graded spline complexes on `[0,1]²` and `[0,1]³`, their exact
//! discrete differential operators, and the tensorised interpolants.
//!
//! Given degrees `p` and knot vectors `Ξ` per axis, the roles are
//!
//! ```text
//! 2D: S⁰ = S_{p₁,p₂}(Ξ₁,Ξ₂)
//!     S¹ = S_{p₁,p₂−1}(Ξ₁,Ξ₂′) × S_{p₁−1,p₂}(Ξ₁′,Ξ₂)   (div-conforming)
//!     S² = S_{p₁−1,p₂−1}(Ξ₁′,Ξ₂′)
//!
//! 3D: S⁰ = S_{p₁,p₂,p₃}
//!     S¹ : component i truncated in axis i                (curl-conforming)
//!     S² : component i truncated in the axes other than i (div-conforming)
//!     S³ = all axes truncated
//! ```
//!
//! where `Ξ′` is the degree-lowering truncation. The differential operators
//! `curl`/`div` (2D) and `grad`/`curl`/`div` (3D) act purely on coefficients
//! through the univariate derivative relation per axis, so the compositions
//! `div∘curl` and `curl∘grad` cancel *identically* — with exactly
//! representable inputs (dyadic coefficients over dyadic knots) the result
//! is zero to the last bit.
//!
//! The interpolants tensorise the univariate projectors: a plain or
//! endpoint-interpolating operator on full axes and the derivative-compatible
//! one on truncated axes, giving `Π̃⁰ = Π̃⊗Π̃`,
//! `Π̃¹ = (Π̃⊗Π̃^∂) × (Π̃^∂⊗Π̃)`, `Π̃² = Π̃^∂⊗Π̃^∂` in 2D and the analogous
//! role pattern in 3D; interpolation commutes with the differential
//! operators up to quadrature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspline::{eval_basis, eval_basis_and_deriv};
use crate::knots::{KnotError, KnotVector};
use crate::quasi_interp::{QuasiInterpError, QuasiInterpolant};
use crate::tensor;

/// Errors from complex construction, operator application, and field access.
#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("parametric dimension must be 2 or 3, got {dim}")]
    UnsupportedDimension { dim: usize },
    #[error("axis {axis}: the complex requires degree >= 1 (truncation lowers it by one)")]
    DegreeZero { axis: usize },
    #[error("got {degrees} degrees but {knots} knot vectors")]
    AxisCountMismatch { degrees: usize, knots: usize },
    #[error("axis {axis}: declared degree {degree} does not match the knot vector degree {knot_degree}")]
    DegreeMismatch {
        axis: usize,
        degree: usize,
        knot_degree: usize,
    },
    #[error("role {role} out of range for a {dim}D complex (roles 0..={dim})")]
    RoleOutOfRange { role: usize, dim: usize },
    #[error("expected a role-{expected} field of a {dim}D complex, got role {got} in {got_dim}D")]
    RoleMismatch {
        expected: usize,
        dim: usize,
        got: usize,
        got_dim: usize,
    },
    #[error("component {component}: got {got} coefficients, expected {expect}")]
    CoefficientMismatch {
        component: usize,
        got: usize,
        expect: usize,
    },
    #[error("component {component} out of range ({count} components)")]
    ComponentOutOfRange { component: usize, count: usize },
    #[error("fields live in different spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error(transparent)]
    QuasiInterp(#[from] QuasiInterpError),
}

/// Which axes are truncated for each vector component of a given role.
fn truncation_pattern(dim: usize, role: usize) -> Vec<Vec<bool>> {
    match (dim, role) {
        (2, 0) => vec![vec![false, false]],
        (2, 1) => vec![vec![false, true], vec![true, false]],
        (2, 2) => vec![vec![true, true]],
        (3, 0) => vec![vec![false, false, false]],
        (3, 1) => vec![
            vec![true, false, false],
            vec![false, true, false],
            vec![false, false, true],
        ],
        (3, 2) => vec![
            vec![false, true, true],
            vec![true, false, true],
            vec![true, true, false],
        ],
        (3, 3) => vec![vec![true, true, true]],
        _ => unreachable!("validated dimension/role"),
    }
}

/// One role of a spline complex: the tensor factor spaces of each vector
/// component, derived from the parent (non-truncated) knot vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComplexSpace", into = "RawComplexSpace")]
pub struct ComplexSpace {
    parents: Vec<KnotVector>,
    role: usize,
    components: Vec<Vec<KnotVector>>,
}

#[derive(Serialize, Deserialize)]
struct RawComplexSpace {
    role: usize,
    knots: Vec<KnotVector>,
}

impl TryFrom<RawComplexSpace> for ComplexSpace {
    type Error = ComplexError;
    fn try_from(raw: RawComplexSpace) -> Result<Self, ComplexError> {
        ComplexSpace::build(&raw.knots, raw.role)
    }
}

impl From<ComplexSpace> for RawComplexSpace {
    fn from(space: ComplexSpace) -> Self {
        RawComplexSpace {
            role: space.role,
            knots: space.parents,
        }
    }
}

impl ComplexSpace {
    fn build(parents: &[KnotVector], role: usize) -> Result<Self, ComplexError> {
        let dim = parents.len();
        if dim != 2 && dim != 3 {
            return Err(ComplexError::UnsupportedDimension { dim });
        }
        for (axis, xi) in parents.iter().enumerate() {
            if xi.degree() == 0 {
                return Err(ComplexError::DegreeZero { axis });
            }
        }
        if role > dim {
            return Err(ComplexError::RoleOutOfRange { role, dim });
        }
        let components = truncation_pattern(dim, role)
            .into_iter()
            .map(|mask| {
                mask.iter()
                    .zip(parents)
                    .map(|(&t, xi)| if t { xi.truncate() } else { Ok(xi.clone()) })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ComplexSpace {
            parents: parents.to_vec(),
            role,
            components,
        })
    }

    /// Parametric dimension `d ∈ {2, 3}`.
    #[inline]
    pub fn parametric_dim(&self) -> usize {
        self.parents.len()
    }

    /// Role `k ∈ 0..=d` within the complex.
    #[inline]
    pub fn role(&self) -> usize {
        self.role
    }

    /// The parent (non-truncated) knot vectors of the complex.
    #[inline]
    pub fn parent_knots(&self) -> &[KnotVector] {
        &self.parents
    }

    /// Number of vector components (1, 2, or 3).
    #[inline]
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// The univariate factor spaces of one component.
    pub fn factors(&self, component: usize) -> Result<&[KnotVector], ComplexError> {
        self.components
            .get(component)
            .map(|f| f.as_slice())
            .ok_or(ComplexError::ComponentOutOfRange {
                component,
                count: self.components.len(),
            })
    }

    /// Coefficient-tensor shape of one component.
    pub fn component_shape(&self, component: usize) -> Result<Vec<usize>, ComplexError> {
        Ok(self.factors(component)?.iter().map(|f| f.dim()).collect())
    }

    /// Coefficient count of one component.
    pub fn component_dim(&self, component: usize) -> Result<usize, ComplexError> {
        Ok(self.component_shape(component)?.iter().product())
    }

    /// Total coefficient count across components.
    pub fn total_dim(&self) -> usize {
        (0..self.num_components())
            .map(|c| self.component_dim(c).expect("component index in range"))
            .sum()
    }

    /// Which axes of `component` carry truncated factors.
    pub fn truncated_axes(&self, component: usize) -> Result<Vec<bool>, ComplexError> {
        if component >= self.num_components() {
            return Err(ComplexError::ComponentOutOfRange {
                component,
                count: self.num_components(),
            });
        }
        Ok(truncation_pattern(self.parametric_dim(), self.role)
            .swap_remove(component))
    }
}

/// The full graded family of spaces over one set of parent knot vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineComplex {
    parents: Vec<KnotVector>,
    spaces: Vec<ComplexSpace>,
}

/// Builds the graded family of spaces (roles `0..=d`) for the given degrees
/// and knot vectors. The degrees are redundant with the knot vectors and are
/// cross-checked.
pub fn build_complex(
    degrees: &[usize],
    knots: &[KnotVector],
) -> Result<Vec<ComplexSpace>, ComplexError> {
    let dim = degrees.len();
    if dim != 2 && dim != 3 {
        return Err(ComplexError::UnsupportedDimension { dim });
    }
    if knots.len() != dim {
        return Err(ComplexError::AxisCountMismatch {
            degrees: dim,
            knots: knots.len(),
        });
    }
    for (axis, (&p, xi)) in degrees.iter().zip(knots).enumerate() {
        if p == 0 {
            return Err(ComplexError::DegreeZero { axis });
        }
        if xi.degree() != p {
            return Err(ComplexError::DegreeMismatch {
                axis,
                degree: p,
                knot_degree: xi.degree(),
            });
        }
    }
    (0..=dim).map(|role| ComplexSpace::build(knots, role)).collect()
}

impl SplineComplex {
    /// Builds the complex; see [`build_complex`].
    pub fn new(degrees: &[usize], knots: Vec<KnotVector>) -> Result<Self, ComplexError> {
        let spaces = build_complex(degrees, &knots)?;
        Ok(SplineComplex {
            parents: knots,
            spaces,
        })
    }

    #[inline]
    pub fn parametric_dim(&self) -> usize {
        self.parents.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.parents.iter().map(|xi| xi.degree()).collect()
    }

    /// The parent knot vectors.
    #[inline]
    pub fn knot_vectors(&self) -> &[KnotVector] {
        &self.parents
    }

    /// All roles, `0..=d`.
    #[inline]
    pub fn roles(&self) -> &[ComplexSpace] {
        &self.spaces
    }

    /// The space of one role.
    pub fn role(&self, role: usize) -> Result<&ComplexSpace, ComplexError> {
        self.spaces.get(role).ok_or(ComplexError::RoleOutOfRange {
            role,
            dim: self.parametric_dim(),
        })
    }

    /// Total coefficient count of one role.
    pub fn role_dim(&self, role: usize) -> Result<usize, ComplexError> {
        Ok(self.role(role)?.total_dim())
    }

    /// Largest element length over all axes.
    pub fn mesh_size(&self) -> f64 {
        self.parents
            .iter()
            .map(|xi| xi.mesh_size())
            .fold(0.0, f64::max)
    }

    /// The complex over the dyadically refined knot vectors.
    pub fn refine_dyadic(&self) -> SplineComplex {
        let knots: Vec<KnotVector> = self.parents.iter().map(|xi| xi.refine_dyadic()).collect();
        let degrees = self.degrees();
        SplineComplex::new(&degrees, knots).expect("refinement preserves validity")
    }
}

/// A discrete field: one coefficient array per vector component of a role,
/// lexicographic with the last parametric axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficientField", into = "RawCoefficientField")]
pub struct CoefficientField {
    space: ComplexSpace,
    data: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawCoefficientField {
    space: ComplexSpace,
    data: Vec<Vec<f64>>,
}

impl TryFrom<RawCoefficientField> for CoefficientField {
    type Error = ComplexError;
    fn try_from(raw: RawCoefficientField) -> Result<Self, ComplexError> {
        CoefficientField::new(raw.space, raw.data)
    }
}

impl From<CoefficientField> for RawCoefficientField {
    fn from(f: CoefficientField) -> Self {
        RawCoefficientField {
            space: f.space,
            data: f.data,
        }
    }
}

impl CoefficientField {
    /// Wraps coefficient arrays after validating their lengths.
    pub fn new(space: ComplexSpace, data: Vec<Vec<f64>>) -> Result<Self, ComplexError> {
        if data.len() != space.num_components() {
            return Err(ComplexError::ComponentOutOfRange {
                component: data.len(),
                count: space.num_components(),
            });
        }
        for (c, arr) in data.iter().enumerate() {
            let expect = space.component_dim(c)?;
            if arr.len() != expect {
                return Err(ComplexError::CoefficientMismatch {
                    component: c,
                    got: arr.len(),
                    expect,
                });
            }
        }
        Ok(CoefficientField { space, data })
    }

    /// The zero field of a space.
    pub fn zeros(space: &ComplexSpace) -> Self {
        let data = (0..space.num_components())
            .map(|c| vec![0.0; space.component_dim(c).expect("component in range")])
            .collect();
        CoefficientField {
            space: space.clone(),
            data,
        }
    }

    #[inline]
    pub fn space(&self) -> &ComplexSpace {
        &self.space
    }

    /// Coefficients of one component; panics on an out-of-range index.
    pub fn component(&self, component: usize) -> &[f64] {
        &self.data[component]
    }

    /// Value of one component at a parametric point (extra coordinates of
    /// `x` beyond the parametric dimension are ignored).
    pub fn eval_component(&self, component: usize, x: &[f64; 3]) -> f64 {
        let factors = &self.space.components[component];
        let data = &self.data[component];
        let bases: Vec<(usize, Vec<f64>)> =
            factors.iter().enumerate().map(|(a, xi)| eval_basis(xi, x[a])).collect();
        match factors.len() {
            2 => {
                let n1 = factors[1].dim();
                let (f0, v0) = &bases[0];
                let (f1, v1) = &bases[1];
                let mut sum = 0.0;
                for (i, &a) in v0.iter().enumerate() {
                    let row = (f0 + i) * n1 + f1;
                    for (j, &b) in v1.iter().enumerate() {
                        sum += a * b * data[row + j];
                    }
                }
                sum
            }
            3 => {
                let n1 = factors[1].dim();
                let n2 = factors[2].dim();
                let (f0, v0) = &bases[0];
                let (f1, v1) = &bases[1];
                let (f2, v2) = &bases[2];
                let mut sum = 0.0;
                for (i, &a) in v0.iter().enumerate() {
                    for (j, &b) in v1.iter().enumerate() {
                        let row = ((f0 + i) * n1 + f1 + j) * n2 + f2;
                        let ab = a * b;
                        for (k, &c) in v2.iter().enumerate() {
                            sum += ab * c * data[row + k];
                        }
                    }
                }
                sum
            }
            _ => unreachable!("validated dimension"),
        }
    }

    /// Value and parametric gradient of one component at a point; gradient
    /// entries beyond the parametric dimension are zero.
    pub fn eval_component_grad(&self, component: usize, x: &[f64; 3]) -> (f64, [f64; 3]) {
        let factors = &self.space.components[component];
        let data = &self.data[component];
        let bases: Vec<(usize, Vec<f64>, Vec<f64>)> = factors
            .iter()
            .enumerate()
            .map(|(a, xi)| eval_basis_and_deriv(xi, x[a]))
            .collect();
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        match factors.len() {
            2 => {
                let n1 = factors[1].dim();
                let (f0, v0, d0) = &bases[0];
                let (f1, v1, d1) = &bases[1];
                for i in 0..v0.len() {
                    let row = (f0 + i) * n1 + f1;
                    for j in 0..v1.len() {
                        let c = data[row + j];
                        value += v0[i] * v1[j] * c;
                        grad[0] += d0[i] * v1[j] * c;
                        grad[1] += v0[i] * d1[j] * c;
                    }
                }
            }
            3 => {
                let n1 = factors[1].dim();
                let n2 = factors[2].dim();
                let (f0, v0, d0) = &bases[0];
                let (f1, v1, d1) = &bases[1];
                let (f2, v2, d2) = &bases[2];
                for i in 0..v0.len() {
                    for j in 0..v1.len() {
                        let row = ((f0 + i) * n1 + f1 + j) * n2 + f2;
                        for k in 0..v2.len() {
                            let c = data[row + k];
                            value += v0[i] * v1[j] * v2[k] * c;
                            grad[0] += d0[i] * v1[j] * v2[k] * c;
                            grad[1] += v0[i] * d1[j] * v2[k] * c;
                            grad[2] += v0[i] * v1[j] * d2[k] * c;
                        }
                    }
                }
            }
            _ => unreachable!("validated dimension"),
        }
        (value, grad)
    }

    /// Values of all components at a point.
    pub fn eval(&self, x: &[f64; 3]) -> Vec<f64> {
        (0..self.space.num_components())
            .map(|c| self.eval_component(c, x))
            .collect()
    }

    /// Largest absolute coefficient difference against a field in the same
    /// space.
    pub fn max_abs_diff(&self, other: &CoefficientField) -> Result<f64, ComplexError> {
        if self.space != other.space {
            return Err(ComplexError::SpaceMismatch);
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|a| a.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }

    fn expect_role(&self, dim: usize, role: usize) -> Result<(), ComplexError> {
        if self.space.parametric_dim() != dim || self.space.role != role {
            return Err(ComplexError::RoleMismatch {
                expected: role,
                dim,
                got: self.space.role,
                got_dim: self.space.parametric_dim(),
            });
        }
        Ok(())
    }
}

/// 2D vector curl `f ↦ (∂_y f, −∂_x f)` at coefficient level; exact.
pub fn curl_2d(f: &CoefficientField) -> Result<CoefficientField, ComplexError> {
    f.expect_role(2, 0)?;
    let parents = &f.space.parents;
    let shape = f.space.component_shape(0)?;
    let (dy, _) = tensor::derivative_along_axis(&f.data[0], &shape, 1, &parents[1]);
    let (dx, _) = tensor::derivative_along_axis(&f.data[0], &shape, 0, &parents[0]);
    let neg_dx: Vec<f64> = dx.iter().map(|&v| -v).collect();
    let space = ComplexSpace::build(parents, 1)?;
    CoefficientField::new(space, vec![dy, neg_dx])
}

/// 2D divergence `(f₁, f₂) ↦ ∂_x f₁ + ∂_y f₂` at coefficient level; exact.
pub fn div_2d(f: &CoefficientField) -> Result<CoefficientField, ComplexError> {
    f.expect_role(2, 1)?;
    let parents = &f.space.parents;
    let shape0 = f.space.component_shape(0)?;
    let shape1 = f.space.component_shape(1)?;
    let (dx, _) = tensor::derivative_along_axis(&f.data[0], &shape0, 0, &parents[0]);
    let (dy, _) = tensor::derivative_along_axis(&f.data[1], &shape1, 1, &parents[1]);
    let sum: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| a + b).collect();
    let space = ComplexSpace::build(parents, 2)?;
    CoefficientField::new(space, vec![sum])
}

/// 3D gradient at coefficient level; exact.
pub fn grad_3d(f: &CoefficientField) -> Result<CoefficientField, ComplexError> {
    f.expect_role(3, 0)?;
    let parents = &f.space.parents;
    let shape = f.space.component_shape(0)?;
    let data: Vec<Vec<f64>> = (0..3)
        .map(|a| tensor::derivative_along_axis(&f.data[0], &shape, a, &parents[a]).0)
        .collect();
    let space = ComplexSpace::build(parents, 1)?;
    CoefficientField::new(space, data)
}

/// 3D curl at coefficient level; exact.
pub fn curl_3d(f: &CoefficientField) -> Result<CoefficientField, ComplexError> {
    f.expect_role(3, 1)?;
    let parents = &f.space.parents;
    let mut data = Vec::with_capacity(3);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        // (curl A)_i = ∂_j A_k − ∂_k A_j
        let shape_k = f.space.component_shape(k)?;
        let shape_j = f.space.component_shape(j)?;
        let (djak, _) = tensor::derivative_along_axis(&f.data[k], &shape_k, j, &parents[j]);
        let (dkaj, _) = tensor::derivative_along_axis(&f.data[j], &shape_j, k, &parents[k]);
        data.push(djak.iter().zip(&dkaj).map(|(a, b)| a - b).collect());
    }
    let space = ComplexSpace::build(parents, 2)?;
    CoefficientField::new(space, data)
}

/// 3D divergence at coefficient level; exact.
pub fn div_3d(f: &CoefficientField) -> Result<CoefficientField, ComplexError> {
    f.expect_role(3, 2)?;
    let parents = &f.space.parents;
    let mut sum: Option<Vec<f64>> = None;
    for a in 0..3 {
        let shape = f.space.component_shape(a)?;
        let (d, _) = tensor::derivative_along_axis(&f.data[a], &shape, a, &parents[a]);
        sum = Some(match sum {
            None => d,
            Some(acc) => acc.iter().zip(&d).map(|(x, y)| x + y).collect(),
        });
    }
    let space = ComplexSpace::build(parents, 3)?;
    CoefficientField::new(space, vec![sum.expect("three components")])
}

/// Which univariate projector family the tensor interpolant is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Plain local projection `Π` (and `Π^∂ = ∂ ∘ Π ∘ ∫` on truncated axes).
    Plain,
    /// Endpoint-interpolating `Π̃` (and `Π̃^∂`); this is the variant whose
    /// patchwise interpolants glue conformingly.
    Endpoint,
}

/// Tensorised quasi-interpolation onto one role of the complex.
///
/// Each vector component applies, axis by axis, the univariate projector on
/// full axes and the derivative-compatible one on truncated axes. `f` is
/// called as `f(component, point)` with `point` padded to three entries.
pub fn interpolate(
    cx: &SplineComplex,
    role: usize,
    kind: OperatorKind,
    mut f: impl FnMut(usize, &[f64; 3]) -> f64,
) -> Result<CoefficientField, ComplexError> {
    let d = cx.parametric_dim();
    let space = cx.role(role)?.clone();
    let pattern = truncation_pattern(d, role);
    let mut data = Vec::with_capacity(pattern.len());
    for (c, mask) in pattern.iter().enumerate() {
        let ops: Vec<QuasiInterpolant> = (0..d)
            .map(|a| {
                let xi = &cx.parents[a];
                match (mask[a], kind) {
                    (false, OperatorKind::Endpoint) => QuasiInterpolant::endpoint(xi),
                    (false, OperatorKind::Plain) => QuasiInterpolant::plain(xi),
                    (true, OperatorKind::Endpoint) => QuasiInterpolant::derivative_compatible(xi),
                    (true, OperatorKind::Plain) => QuasiInterpolant::derivative_plain(xi),
                }
            })
            .collect::<Result<_, _>>()?;
        let shape: Vec<usize> = ops.iter().map(|o| o.samples().len()).collect();
        let mut values = Vec::with_capacity(tensor::shape_len(&shape));
        match d {
            2 => {
                for &x0 in ops[0].samples() {
                    for &x1 in ops[1].samples() {
                        values.push(f(c, &[x0, x1, 0.0]));
                    }
                }
            }
            3 => {
                for &x0 in ops[0].samples() {
                    for &x1 in ops[1].samples() {
                        for &x2 in ops[2].samples() {
                            values.push(f(c, &[x0, x1, x2]));
                        }
                    }
                }
            }
            _ => unreachable!("validated dimension"),
        }
        let mut cur = values;
        let mut cur_shape = shape;
        for (a, op) in ops.iter().enumerate() {
            let (nd, ns) = tensor::mode_multiply(&cur, &cur_shape, a, op.weights());
            cur = nd;
            cur_shape = ns;
        }
        data.push(cur);
    }
    CoefficientField::new(space, data)
}

/// The 90°-rotated, curl-conforming view of a 2D role-1 field:
/// `(w₁, w₂) = (−v₂, v₁)` over `(Ξ₁′, Ξ₂)` and `(Ξ₁, Ξ₂′)`.
#[derive(Debug, Clone)]
pub struct CurlConforming2D {
    /// Factor spaces of the two components.
    pub factors: [Vec<KnotVector>; 2],
    /// Coefficients, lexicographic, last axis fastest.
    pub data: [Vec<f64>; 2],
}

/// Rotates a divergence-conforming role-1 field into its curl-conforming
/// proxy. The scalar rotation `∂_x w₂ − ∂_y w₁` of the result equals the
/// divergence of the input identically.
pub fn rotate_to_curl_conforming(f: &CoefficientField) -> Result<CurlConforming2D, ComplexError> {
    f.expect_role(2, 1)?;
    let factors1 = f.space.factors(1)?.to_vec();
    let factors0 = f.space.factors(0)?.to_vec();
    let w1: Vec<f64> = f.data[1].iter().map(|&v| -v).collect();
    let w2 = f.data[0].clone();
    Ok(CurlConforming2D {
        factors: [factors1, factors0],
        data: [w1, w2],
    })
}
