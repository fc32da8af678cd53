//! Patch parametrisations `F: [0,1]^d → ℝ³`, their Jacobians and measures,
//! the conforming pull-backs/push-forwards, and a catalog of test
//! geometries.
//!
//! A surface patch (`d = 2`) carries the surface measure
//! `κ = ‖∂₁F × ∂₂F‖` and the transforms
//!
//! ```text
//! ι₀(F)(f)  = f∘F                    (ι₀)⁻¹(f̂) = f̂ ∘ F⁻¹
//! ι₁(F)(f)  = κ·(dF)⁺ (f∘F)          (ι₁)⁻¹(f̂) = κ⁻¹·dF f̂ ∘ F⁻¹
//! ι₂(F)(f)  = κ·(f∘F)                (ι₂)⁻¹(f̂) = κ⁻¹·f̂ ∘ F⁻¹
//! ```
//!
//! where `(dF)⁺ = G⁻¹(dF)ᵀ` is the tangential (Moore–Penrose) inverse built
//! from the first fundamental form `G = (dF)ᵀ dF`. A volume patch (`d = 3`)
//! uses the standard grad/curl/div-conforming (Piola) family
//!
//! ```text
//! ι₀ = f∘F,   ι₁ = (dF)ᵀ(f∘F),   ι₂ = det(dF)(dF)⁻¹(f∘F),   ι₃ = det(dF)(f∘F).
//! ```
//!
//! Everything is evaluated at parametric points, so `F⁻¹` is never needed:
//! a "function on the physical patch" is always handled as a reference-
//! domain callable composed with these pointwise kernels.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knots::{KnotError, KnotVector};

/// Jacobians with surface measure or determinant below this threshold are
/// reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Sampled parametrisations must agree to this tolerance along an interface.
pub const INTERFACE_TOL: f64 = 1e-12;

/// Errors from geometry construction, validation, and transforms.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("parametric dimension must be 2 or 3, got {dim}")]
    UnsupportedDimension { dim: usize },
    #[error("role {role} out of range for a {dim}D patch (roles 0..={dim})")]
    RoleOutOfRange { role: usize, dim: usize },
    #[error("expected a {expected}D patch, got {got}D")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate Jacobian at ({x}, {y}, {z}): measure {measure:.3e}")]
    DegenerateJacobian { x: f64, y: f64, z: f64, measure: f64 },
    #[error("non-positive Jacobian determinant at ({x}, {y}, {z}): det {det:.3e}")]
    NonPositiveJacobian { x: f64, y: f64, z: f64, det: f64 },
    #[error("NURBS weight {index} is not strictly positive: {weight}")]
    WeightNotPositive { index: usize, weight: f64 },
    #[error("got {got} control points / weights, expected {expect}")]
    ControlPointMismatch { got: usize, expect: usize },
    #[error("geometry knot vector on axis {axis} repeats an interior knot (the map must be smooth)")]
    InteriorRepetition { axis: usize },
    #[error("unknown catalog geometry `{name}`")]
    UnknownGeometry { name: String },
    #[error("patch {patch} out of range ({count} patches)")]
    PatchOutOfRange { patch: usize, count: usize },
    #[error("side {side:?} is not a side of a {dim}D parametric domain")]
    SideDimension { side: Side, dim: usize },
    #[error("side {side:?} of patch {patch} appears in more than one interface")]
    SideReused { patch: usize, side: Side },
    #[error("interface {index}: parametrisations disagree by {gap:.3e} (tolerance {tol:.1e})")]
    InterfaceMismatch { index: usize, gap: f64, tol: f64 },
    #[error("patches {a} and {b} overlap: interior images coincide at a sample point")]
    PatchOverlap { a: usize, b: usize },
    #[error("multipatch geometry must contain at least one patch")]
    Empty,
    #[error("patch {patch} has parametric dimension {got}, expected {expect}")]
    MixedDimensions { patch: usize, got: usize, expect: usize },
    #[error(transparent)]
    Knot(#[from] KnotError),
}

/// Number of vector components a role-`k` field carries in dimension `d`.
pub fn role_components(dim: usize, role: usize) -> Result<usize, GeometryError> {
    match (dim, role) {
        (2, 0) | (2, 2) | (3, 0) | (3, 3) => Ok(1),
        (2, 1) => Ok(2),
        (3, 1) | (3, 2) => Ok(3),
        (2, _) | (3, _) => Err(GeometryError::RoleOutOfRange { role, dim }),
        _ => Err(GeometryError::UnsupportedDimension { dim }),
    }
}

/// An affine map `x ↦ offset + Σ xⱼ·columnⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePatch {
    offset: [f64; 3],
    columns: Vec<[f64; 3]>,
}

impl AffinePatch {
    pub fn new(offset: [f64; 3], columns: Vec<[f64; 3]>) -> Result<Self, GeometryError> {
        let dim = columns.len();
        if dim != 2 && dim != 3 {
            return Err(GeometryError::UnsupportedDimension { dim });
        }
        Ok(AffinePatch { offset, columns })
    }
}

/// Built-in closed-form patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticPatch {
    /// Quarter cylinder shell `(x, y) ↦ (cos(πx/2), sin(πx/2), y)`;
    /// its surface measure is constantly `π/2`.
    CylinderShell,
    /// A smooth volumetric warp of the unit cube,
    /// `Fᵢ = xᵢ + 0.1·sin(πxⱼ)sin(πxₖ)` with `{i,j,k}` cyclic; strictly
    /// diagonally dominant Jacobian, so `det dF > 0` everywhere.
    DistortedCube,
}

const DISTORTION: f64 = 0.1;

/// A tensor-product NURBS map with control points in ℝ³ and strictly
/// positive weights; coefficients are lexicographic, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNurbsPatch", into = "RawNurbsPatch")]
pub struct NurbsPatch {
    knots: Vec<KnotVector>,
    control_points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawNurbsPatch {
    knots: Vec<KnotVector>,
    control_points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl TryFrom<RawNurbsPatch> for NurbsPatch {
    type Error = GeometryError;
    fn try_from(raw: RawNurbsPatch) -> Result<Self, GeometryError> {
        NurbsPatch::new(raw.knots, raw.control_points, raw.weights)
    }
}

impl From<NurbsPatch> for RawNurbsPatch {
    fn from(p: NurbsPatch) -> Self {
        RawNurbsPatch {
            knots: p.knots,
            control_points: p.control_points,
            weights: p.weights,
        }
    }
}

impl NurbsPatch {
    pub fn new(
        knots: Vec<KnotVector>,
        control_points: Vec<[f64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let dim = knots.len();
        if dim != 2 && dim != 3 {
            return Err(GeometryError::UnsupportedDimension { dim });
        }
        for (axis, xi) in knots.iter().enumerate() {
            for element in xi.elements().iter().skip(1) {
                if xi.multiplicity(element.lo) > 1 {
                    return Err(GeometryError::InteriorRepetition { axis });
                }
            }
        }
        let expect: usize = knots.iter().map(|k| k.dim()).product();
        if control_points.len() != expect {
            return Err(GeometryError::ControlPointMismatch {
                got: control_points.len(),
                expect,
            });
        }
        if weights.len() != expect {
            return Err(GeometryError::ControlPointMismatch {
                got: weights.len(),
                expect,
            });
        }
        if let Some((index, &weight)) = weights.iter().enumerate().find(|(_, &w)| w <= 0.0) {
            return Err(GeometryError::WeightNotPositive { index, weight });
        }
        Ok(NurbsPatch {
            knots,
            control_points,
            weights,
        })
    }

    pub fn knots(&self) -> &[KnotVector] {
        &self.knots
    }

    /// Homogeneous evaluation: weighted point sum `A`, weight sum `W`, and
    /// their parametric derivatives.
    fn eval_homogeneous(&self, x: &[f64; 3]) -> ([f64; 3], f64, [[f64; 3]; 3], [f64; 3]) {
        use crate::bspline::eval_basis_and_deriv;
        let dim = self.knots.len();
        let bases: Vec<(usize, Vec<f64>, Vec<f64>)> = self
            .knots
            .iter()
            .enumerate()
            .map(|(a, xi)| eval_basis_and_deriv(xi, x[a]))
            .collect();
        let mut a_sum = [0.0; 3];
        let mut w_sum = 0.0;
        let mut a_der = [[0.0; 3]; 3];
        let mut w_der = [0.0; 3];
        let shape: Vec<usize> = self.knots.iter().map(|k| k.dim()).collect();
        let mut add = |index: usize, factors: &[f64], derivs: &[f64]| {
            let w = self.weights[index];
            let c = self.control_points[index];
            let value: f64 = factors.iter().product();
            w_sum += w * value;
            for axis in 0..dim {
                let mut dv = derivs[axis];
                for (other, &f) in factors.iter().enumerate() {
                    if other != axis {
                        dv *= f;
                    }
                }
                w_der[axis] += w * dv;
                for r in 0..3 {
                    a_der[axis][r] += w * dv * c[r];
                }
            }
            for r in 0..3 {
                a_sum[r] += w * value * c[r];
            }
        };
        match dim {
            2 => {
                let (f0, v0, d0) = &bases[0];
                let (f1, v1, d1) = &bases[1];
                for i in 0..v0.len() {
                    for j in 0..v1.len() {
                        let index = (f0 + i) * shape[1] + f1 + j;
                        add(index, &[v0[i], v1[j]], &[d0[i], d1[j]]);
                    }
                }
            }
            3 => {
                let (f0, v0, d0) = &bases[0];
                let (f1, v1, d1) = &bases[1];
                let (f2, v2, d2) = &bases[2];
                for i in 0..v0.len() {
                    for j in 0..v1.len() {
                        for k in 0..v2.len() {
                            let index = ((f0 + i) * shape[1] + f1 + j) * shape[2] + f2 + k;
                            add(index, &[v0[i], v1[j], v2[k]], &[d0[i], d1[j], d2[k]]);
                        }
                    }
                }
            }
            _ => unreachable!("validated dimension"),
        }
        (a_sum, w_sum, a_der, w_der)
    }
}

/// A patch parametrisation `F: [0,1]^d → ℝ³` with an exact Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatchMap {
    Affine(AffinePatch),
    Analytic(AnalyticPatch),
    Nurbs(NurbsPatch),
}

impl PatchMap {
    /// The flat unit square `(x, y) ↦ (x, y, 0)`.
    pub fn flat_square() -> PatchMap {
        PatchMap::Affine(
            AffinePatch::new([0.0; 3], vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).expect("valid"),
        )
    }

    /// The identity map of the unit cube.
    pub fn unit_cube() -> PatchMap {
        PatchMap::Affine(
            AffinePatch::new(
                [0.0; 3],
                vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            )
            .expect("valid"),
        )
    }

    pub fn parametric_dim(&self) -> usize {
        match self {
            PatchMap::Affine(p) => p.columns.len(),
            PatchMap::Analytic(AnalyticPatch::CylinderShell) => 2,
            PatchMap::Analytic(AnalyticPatch::DistortedCube) => 3,
            PatchMap::Nurbs(p) => p.knots.len(),
        }
    }

    /// `F(x)`; coordinates of `x` beyond the parametric dimension are
    /// ignored.
    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        match self {
            PatchMap::Affine(p) => {
                let mut out = p.offset;
                for (j, col) in p.columns.iter().enumerate() {
                    for r in 0..3 {
                        out[r] += x[j] * col[r];
                    }
                }
                out
            }
            PatchMap::Analytic(AnalyticPatch::CylinderShell) => {
                let t = std::f64::consts::FRAC_PI_2 * x[0];
                [t.cos(), t.sin(), x[1]]
            }
            PatchMap::Analytic(AnalyticPatch::DistortedCube) => {
                let pi = std::f64::consts::PI;
                let (sx, sy, sz) = ((pi * x[0]).sin(), (pi * x[1]).sin(), (pi * x[2]).sin());
                [
                    x[0] + DISTORTION * sy * sz,
                    x[1] + DISTORTION * sz * sx,
                    x[2] + DISTORTION * sx * sy,
                ]
            }
            PatchMap::Nurbs(p) => {
                let (a, w, _, _) = p.eval_homogeneous(x);
                [a[0] / w, a[1] / w, a[2] / w]
            }
        }
    }

    /// Jacobian columns `∂F/∂xⱼ`; columns beyond the parametric dimension
    /// are zero.
    pub fn jacobian(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        match self {
            PatchMap::Affine(p) => {
                let mut cols = [[0.0; 3]; 3];
                for (j, col) in p.columns.iter().enumerate() {
                    cols[j] = *col;
                }
                cols
            }
            PatchMap::Analytic(AnalyticPatch::CylinderShell) => {
                let half_pi = std::f64::consts::FRAC_PI_2;
                let t = half_pi * x[0];
                [
                    [-half_pi * t.sin(), half_pi * t.cos(), 0.0],
                    [0.0, 0.0, 1.0],
                    [0.0; 3],
                ]
            }
            PatchMap::Analytic(AnalyticPatch::DistortedCube) => {
                let pi = std::f64::consts::PI;
                let (sx, sy, sz) = ((pi * x[0]).sin(), (pi * x[1]).sin(), (pi * x[2]).sin());
                let (cx, cy, cz) = ((pi * x[0]).cos(), (pi * x[1]).cos(), (pi * x[2]).cos());
                let a = DISTORTION * pi;
                [
                    [1.0, a * sz * cx, a * cx * sy],
                    [a * cy * sz, 1.0, a * sx * cy],
                    [a * sy * cz, a * cz * sx, 1.0],
                ]
            }
            PatchMap::Nurbs(p) => {
                let (a, w, a_der, w_der) = p.eval_homogeneous(x);
                let f = [a[0] / w, a[1] / w, a[2] / w];
                let mut cols = [[0.0; 3]; 3];
                for (axis, col) in cols.iter_mut().enumerate().take(p.knots.len()) {
                    for r in 0..3 {
                        col[r] = (a_der[axis][r] - f[r] * w_der[axis]) / w;
                    }
                }
                cols
            }
        }
    }

    /// Checks non-degeneracy on a 5^d tensor grid plus, for NURBS maps,
    /// the breakpoints of the geometry knots.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let dim = self.parametric_dim();
        let mut axes: Vec<Vec<f64>> = (0..dim)
            .map(|_| vec![0.0, 0.25, 0.5, 0.75, 1.0])
            .collect();
        if let PatchMap::Nurbs(p) = self {
            for (axis, xi) in p.knots.iter().enumerate() {
                axes[axis].extend(xi.breakpoints());
                axes[axis].sort_by(f64::total_cmp);
                axes[axis].dedup();
            }
        }
        let check = |x: &[f64; 3]| -> Result<(), GeometryError> {
            if dim == 2 {
                surface_measure(self, x)?;
            } else {
                jacobian_determinant(self, x)?;
            }
            Ok(())
        };
        match dim {
            2 => {
                for &u in &axes[0] {
                    for &v in &axes[1] {
                        check(&[u, v, 0.0])?;
                    }
                }
            }
            3 => {
                for &u in &axes[0] {
                    for &v in &axes[1] {
                        for &w in &axes[2] {
                            check(&[u, v, w])?;
                        }
                    }
                }
            }
            _ => return Err(GeometryError::UnsupportedDimension { dim }),
        }
        Ok(())
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Surface measure `κ(x) = ‖∂₁F × ∂₂F‖` of a surface patch.
pub fn surface_measure(map: &PatchMap, x: &[f64; 3]) -> Result<f64, GeometryError> {
    if map.parametric_dim() != 2 {
        return Err(GeometryError::DimensionMismatch {
            expected: 2,
            got: map.parametric_dim(),
        });
    }
    let cols = map.jacobian(x);
    let n = cross(&cols[0], &cols[1]);
    let kappa = dot(&n, &n).sqrt();
    if kappa <= DEGENERACY_TOL {
        return Err(GeometryError::DegenerateJacobian {
            x: x[0],
            y: x[1],
            z: x[2],
            measure: kappa,
        });
    }
    Ok(kappa)
}

/// `det dF` of a volume patch; must be strictly positive.
pub fn jacobian_determinant(map: &PatchMap, x: &[f64; 3]) -> Result<f64, GeometryError> {
    if map.parametric_dim() != 3 {
        return Err(GeometryError::DimensionMismatch {
            expected: 3,
            got: map.parametric_dim(),
        });
    }
    let cols = map.jacobian(x);
    let det = dot(&cols[0], &cross(&cols[1], &cols[2]));
    if det <= DEGENERACY_TOL {
        return Err(GeometryError::NonPositiveJacobian {
            x: x[0],
            y: x[1],
            z: x[2],
            det,
        });
    }
    Ok(det)
}

/// Applies the surface pull-back `ι_k(F)` at one parametric point: `physical`
/// holds the field value at `F(x)` (3 ambient components for `k = 1`, the
/// scalar in slot 0 otherwise) and the result holds the reference components
/// (2 for `k = 1`, slot 0 otherwise).
pub fn pullback_surface(
    map: &PatchMap,
    role: usize,
    x: &[f64; 3],
    physical: &[f64; 3],
) -> Result<[f64; 3], GeometryError> {
    if map.parametric_dim() != 2 {
        return Err(GeometryError::DimensionMismatch {
            expected: 2,
            got: map.parametric_dim(),
        });
    }
    match role {
        0 => Ok([physical[0], 0.0, 0.0]),
        1 => {
            let cols = map.jacobian(x);
            let (g00, g01, g11) = (
                dot(&cols[0], &cols[0]),
                dot(&cols[0], &cols[1]),
                dot(&cols[1], &cols[1]),
            );
            let det_g = g00 * g11 - g01 * g01;
            let kappa = det_g.max(0.0).sqrt();
            if kappa <= DEGENERACY_TOL {
                return Err(GeometryError::DegenerateJacobian {
                    x: x[0],
                    y: x[1],
                    z: x[2],
                    measure: kappa,
                });
            }
            let b0 = dot(&cols[0], physical);
            let b1 = dot(&cols[1], physical);
            // κ·G⁻¹(dF)ᵀ f, with κ/det G = 1/κ.
            Ok([(g11 * b0 - g01 * b1) / kappa, (g00 * b1 - g01 * b0) / kappa, 0.0])
        }
        2 => Ok([surface_measure(map, x)? * physical[0], 0.0, 0.0]),
        _ => Err(GeometryError::RoleOutOfRange { role, dim: 2 }),
    }
}

/// Applies the surface push-forward `(ι_k(F))⁻¹` at one parametric point:
/// `reference` holds the reference components and the result the physical
/// field value at `F(x)` (a tangent vector in ℝ³ for `k = 1`).
pub fn pushforward_surface(
    map: &PatchMap,
    role: usize,
    x: &[f64; 3],
    reference: &[f64; 3],
) -> Result<[f64; 3], GeometryError> {
    if map.parametric_dim() != 2 {
        return Err(GeometryError::DimensionMismatch {
            expected: 2,
            got: map.parametric_dim(),
        });
    }
    match role {
        0 => Ok([reference[0], 0.0, 0.0]),
        1 => {
            let kappa = surface_measure(map, x)?;
            let cols = map.jacobian(x);
            let mut out = [0.0; 3];
            for r in 0..3 {
                out[r] = (reference[0] * cols[0][r] + reference[1] * cols[1][r]) / kappa;
            }
            Ok(out)
        }
        2 => Ok([reference[0] / surface_measure(map, x)?, 0.0, 0.0]),
        _ => Err(GeometryError::RoleOutOfRange { role, dim: 2 }),
    }
}

fn volume_jacobian(map: &PatchMap, x: &[f64; 3]) -> Result<(Matrix3<f64>, f64), GeometryError> {
    let cols = map.jacobian(x);
    let m = Matrix3::from_columns(&[
        Vector3::from_column_slice(&cols[0]),
        Vector3::from_column_slice(&cols[1]),
        Vector3::from_column_slice(&cols[2]),
    ]);
    let det = m.determinant();
    if det <= DEGENERACY_TOL {
        return Err(GeometryError::NonPositiveJacobian {
            x: x[0],
            y: x[1],
            z: x[2],
            det,
        });
    }
    Ok((m, det))
}

/// Applies the volume pull-back `ι_k(F)` at one parametric point.
pub fn pullback_volume(
    map: &PatchMap,
    role: usize,
    x: &[f64; 3],
    physical: &[f64; 3],
) -> Result<[f64; 3], GeometryError> {
    if map.parametric_dim() != 3 {
        return Err(GeometryError::DimensionMismatch {
            expected: 3,
            got: map.parametric_dim(),
        });
    }
    match role {
        0 => Ok([physical[0], 0.0, 0.0]),
        1 => {
            let (m, _) = volume_jacobian(map, x)?;
            let v = m.transpose() * Vector3::from_column_slice(physical);
            Ok([v[0], v[1], v[2]])
        }
        2 => {
            let (m, det) = volume_jacobian(map, x)?;
            let inv = m.try_inverse().ok_or(GeometryError::NonPositiveJacobian {
                x: x[0],
                y: x[1],
                z: x[2],
                det,
            })?;
            let v = det * (inv * Vector3::from_column_slice(physical));
            Ok([v[0], v[1], v[2]])
        }
        3 => {
            let (_, det) = volume_jacobian(map, x)?;
            Ok([det * physical[0], 0.0, 0.0])
        }
        _ => Err(GeometryError::RoleOutOfRange { role, dim: 3 }),
    }
}

/// Applies the volume push-forward `(ι_k(F))⁻¹` at one parametric point.
pub fn pushforward_volume(
    map: &PatchMap,
    role: usize,
    x: &[f64; 3],
    reference: &[f64; 3],
) -> Result<[f64; 3], GeometryError> {
    if map.parametric_dim() != 3 {
        return Err(GeometryError::DimensionMismatch {
            expected: 3,
            got: map.parametric_dim(),
        });
    }
    match role {
        0 => Ok([reference[0], 0.0, 0.0]),
        1 => {
            let (m, det) = volume_jacobian(map, x)?;
            let inv_t = m
                .try_inverse()
                .ok_or(GeometryError::NonPositiveJacobian {
                    x: x[0],
                    y: x[1],
                    z: x[2],
                    det,
                })?
                .transpose();
            let v = inv_t * Vector3::from_column_slice(reference);
            Ok([v[0], v[1], v[2]])
        }
        2 => {
            let (m, det) = volume_jacobian(map, x)?;
            let v = (m * Vector3::from_column_slice(reference)) / det;
            Ok([v[0], v[1], v[2]])
        }
        3 => {
            let (_, det) = volume_jacobian(map, x)?;
            Ok([reference[0] / det, 0.0, 0.0])
        }
        _ => Err(GeometryError::RoleOutOfRange { role, dim: 3 }),
    }
}

/// A face/edge of the parametric cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Side {
    /// All sides of a `d`-cube.
    pub fn all(dim: usize) -> &'static [Side] {
        match dim {
            2 => &[Side::XMin, Side::XMax, Side::YMin, Side::YMax],
            _ => &[
                Side::XMin,
                Side::XMax,
                Side::YMin,
                Side::YMax,
                Side::ZMin,
                Side::ZMax,
            ],
        }
    }

    /// The axis the side pins.
    pub fn axis(self) -> usize {
        match self {
            Side::XMin | Side::XMax => 0,
            Side::YMin | Side::YMax => 1,
            Side::ZMin | Side::ZMax => 2,
        }
    }

    /// Whether the pinned coordinate is 1 (max) rather than 0 (min).
    pub fn is_max(self) -> bool {
        matches!(self, Side::XMax | Side::YMax | Side::ZMax)
    }

    /// The free (tangential) axes, ascending.
    pub fn tangential_axes(self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|&a| a != self.axis()).collect()
    }

    /// Embeds side coordinates into the parametric cube: `uv[0]` (and for
    /// `d = 3` also `uv[1]`) fill the tangential axes in ascending order.
    pub fn embed(self, dim: usize, uv: &[f64; 2]) -> [f64; 3] {
        let mut x = [0.0; 3];
        x[self.axis()] = if self.is_max() { 1.0 } else { 0.0 };
        for (slot, axis) in self.tangential_axes(dim).into_iter().enumerate() {
            x[axis] = uv[slot];
        }
        x
    }
}

/// Relative orientation of the two sides of an interface. In 2D `Reversed`
/// means the edge parameters run oppositely; 3D face gluing supports only
/// the identity alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Same,
    Reversed,
}

/// One conforming interface between full sides of two patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceDescriptor {
    pub patch_a: usize,
    pub side_a: Side,
    pub patch_b: usize,
    pub side_b: Side,
    pub orientation: Orientation,
}

impl InterfaceDescriptor {
    /// Maps side coordinates of side `a` to the matching coordinates of
    /// side `b`.
    pub fn map_to_b(&self, uv: &[f64; 2]) -> [f64; 2] {
        match self.orientation {
            Orientation::Same => *uv,
            Orientation::Reversed => [1.0 - uv[0], uv[1]],
        }
    }
}

/// A collection of patches glued along conforming interfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMultipatch", into = "RawMultipatch")]
pub struct MultipatchGeometry {
    patches: Vec<PatchMap>,
    interfaces: Vec<InterfaceDescriptor>,
}

#[derive(Serialize, Deserialize)]
struct RawMultipatch {
    patches: Vec<PatchMap>,
    interfaces: Vec<InterfaceDescriptor>,
}

impl TryFrom<RawMultipatch> for MultipatchGeometry {
    type Error = GeometryError;
    fn try_from(raw: RawMultipatch) -> Result<Self, GeometryError> {
        MultipatchGeometry::new(raw.patches, raw.interfaces)
    }
}

impl From<MultipatchGeometry> for RawMultipatch {
    fn from(g: MultipatchGeometry) -> Self {
        RawMultipatch {
            patches: g.patches,
            interfaces: g.interfaces,
        }
    }
}

fn side_sample_points(dim: usize) -> Vec<[f64; 2]> {
    let line = [0.0, 0.25, 0.5, 0.75, 1.0];
    match dim {
        2 => line.iter().map(|&t| [t, 0.0]).collect(),
        _ => {
            let mut pts = Vec::with_capacity(25);
            for &u in &line {
                for &v in &line {
                    pts.push([u, v]);
                }
            }
            pts
        }
    }
}

fn interface_gap(
    patches: &[PatchMap],
    iface: &InterfaceDescriptor,
    dim: usize,
) -> f64 {
    let mut gap: f64 = 0.0;
    for uv in side_sample_points(dim) {
        let xa = iface.side_a.embed(dim, &uv);
        let xb = iface.side_b.embed(dim, &iface.map_to_b(&uv));
        let pa = patches[iface.patch_a].eval(&xa);
        let pb = patches[iface.patch_b].eval(&xb);
        let d2 = (0..3).map(|r| (pa[r] - pb[r]) * (pa[r] - pb[r])).sum::<f64>();
        gap = gap.max(d2.sqrt());
    }
    gap
}

impl MultipatchGeometry {
    /// Validates the patches, the interface topology, sampled coincidence
    /// of the parametrisations along every interface, and spot-checks that
    /// interior images do not overlap.
    pub fn new(
        patches: Vec<PatchMap>,
        interfaces: Vec<InterfaceDescriptor>,
    ) -> Result<Self, GeometryError> {
        if patches.is_empty() {
            return Err(GeometryError::Empty);
        }
        let dim = patches[0].parametric_dim();
        for (index, patch) in patches.iter().enumerate() {
            if patch.parametric_dim() != dim {
                return Err(GeometryError::MixedDimensions {
                    patch: index,
                    got: patch.parametric_dim(),
                    expect: dim,
                });
            }
            patch.validate()?;
        }
        let mut used: Vec<(usize, Side)> = Vec::new();
        for (index, iface) in interfaces.iter().enumerate() {
            for (patch, side) in [(iface.patch_a, iface.side_a), (iface.patch_b, iface.side_b)] {
                if patch >= patches.len() {
                    return Err(GeometryError::PatchOutOfRange {
                        patch,
                        count: patches.len(),
                    });
                }
                if side.axis() >= dim {
                    return Err(GeometryError::SideDimension { side, dim });
                }
                if used.contains(&(patch, side)) {
                    return Err(GeometryError::SideReused { patch, side });
                }
                used.push((patch, side));
            }
            if dim == 3 && iface.orientation == Orientation::Reversed {
                return Err(GeometryError::SideDimension {
                    side: iface.side_a,
                    dim,
                });
            }
            let gap = interface_gap(&patches, iface, dim);
            if gap > INTERFACE_TOL {
                return Err(GeometryError::InterfaceMismatch {
                    index,
                    gap,
                    tol: INTERFACE_TOL,
                });
            }
        }
        // Spot-check disjoint interiors: interior sample images of distinct
        // patches must not coincide.
        let interior = [0.21, 0.5, 0.79];
        for a in 0..patches.len() {
            for b in (a + 1)..patches.len() {
                let mut coincide = false;
                'outer: for &u in &interior {
                    for &v in &interior {
                        let x = [u, v, 0.5];
                        let pa = patches[a].eval(&x);
                        let pb = patches[b].eval(&x);
                        let d2: f64 = (0..3).map(|r| (pa[r] - pb[r]).powi(2)).sum();
                        if d2.sqrt() < 1e-9 {
                            coincide = true;
                            break 'outer;
                        }
                    }
                }
                if coincide {
                    return Err(GeometryError::PatchOverlap { a, b });
                }
            }
        }
        Ok(MultipatchGeometry {
            patches,
            interfaces,
        })
    }

    /// A geometry with a single patch and no interfaces.
    pub fn single(patch: PatchMap) -> Result<Self, GeometryError> {
        MultipatchGeometry::new(vec![patch], Vec::new())
    }

    /// Builds the geometry with interfaces auto-detected from sampled side
    /// coincidence.
    pub fn from_patches(patches: Vec<PatchMap>) -> Result<Self, GeometryError> {
        let interfaces = detect_interfaces(&patches)?;
        MultipatchGeometry::new(patches, interfaces)
    }

    #[inline]
    pub fn parametric_dim(&self) -> usize {
        self.patches[0].parametric_dim()
    }

    #[inline]
    pub fn patches(&self) -> &[PatchMap] {
        &self.patches
    }

    #[inline]
    pub fn interfaces(&self) -> &[InterfaceDescriptor] {
        &self.interfaces
    }

    #[inline]
    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }
}

/// Finds all full-side interfaces between the given patches by sampled
/// coincidence of the side parametrisations; 2D detects both orientations,
/// 3D only the identity-aligned one.
pub fn detect_interfaces(
    patches: &[PatchMap],
) -> Result<Vec<InterfaceDescriptor>, GeometryError> {
    if patches.is_empty() {
        return Err(GeometryError::Empty);
    }
    let dim = patches[0].parametric_dim();
    let side_gap = |pa: usize, sa: Side, pb: usize, sb: Side, orientation: Orientation| -> f64 {
        let probe = InterfaceDescriptor {
            patch_a: pa,
            side_a: sa,
            patch_b: pb,
            side_b: sb,
            orientation,
        };
        interface_gap(patches, &probe, dim)
    };
    let mut found: Vec<InterfaceDescriptor> = Vec::new();
    let mut used: Vec<(usize, Side)> = Vec::new();
    for a in 0..patches.len() {
        for b in (a + 1)..patches.len() {
            for &sa in Side::all(dim) {
                for &sb in Side::all(dim) {
                    let orientation = if side_gap(a, sa, b, sb, Orientation::Same) <= INTERFACE_TOL
                    {
                        Some(Orientation::Same)
                    } else if dim == 2
                        && side_gap(a, sa, b, sb, Orientation::Reversed) <= INTERFACE_TOL
                    {
                        Some(Orientation::Reversed)
                    } else {
                        None
                    };
                    if let Some(orientation) = orientation {
                        for (patch, side) in [(a, sa), (b, sb)] {
                            if used.contains(&(patch, side)) {
                                return Err(GeometryError::SideReused { patch, side });
                            }
                            used.push((patch, side));
                        }
                        found.push(InterfaceDescriptor {
                            patch_a: a,
                            side_a: sa,
                            patch_b: b,
                            side_b: sb,
                            orientation,
                        });
                    }
                }
            }
        }
    }
    Ok(found)
}

/// Names accepted by [`geometry_catalog`].
pub fn catalog_names() -> [&'static str; 8] {
    [
        "flat-square",
        "cylinder-shell",
        "quarter-annulus-nurbs",
        "cube-surface",
        "two-squares",
        "unit-cube",
        "distorted-cube",
        "two-cubes",
    ]
}

fn quarter_annulus() -> Result<PatchMap, GeometryError> {
    // Exact quarter annulus: quadratic rational arc × linear radial blend,
    // radii 1 and 2, in the z = 0 plane.
    let angular = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0])?;
    let radial = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0])?;
    let arc = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let arc_weights = [1.0, std::f64::consts::FRAC_1_SQRT_2, 1.0];
    let radii = [1.0, 2.0];
    let mut control_points = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    for (q, &w) in arc.iter().zip(&arc_weights) {
        for &r in &radii {
            control_points.push([r * q[0], r * q[1], 0.0]);
            weights.push(w);
        }
    }
    Ok(PatchMap::Nurbs(NurbsPatch::new(
        vec![angular, radial],
        control_points,
        weights,
    )?))
}

fn cube_surface() -> Result<MultipatchGeometry, GeometryError> {
    let face = |offset: [f64; 3], c0: [f64; 3], c1: [f64; 3]| -> PatchMap {
        PatchMap::Affine(AffinePatch::new(offset, vec![c0, c1]).expect("valid face"))
    };
    let e = |r: usize| -> [f64; 3] {
        let mut v = [0.0; 3];
        v[r] = 1.0;
        v
    };
    let patches = vec![
        face([0.0; 3], e(0), e(1)),          // z = 0: (x, y, 0)
        face([0.0, 0.0, 1.0], e(0), e(1)),   // z = 1: (x, y, 1)
        face([0.0; 3], e(0), e(2)),          // y = 0: (x, 0, y)
        face([0.0, 1.0, 0.0], e(0), e(2)),   // y = 1: (x, 1, y)
        face([0.0; 3], e(1), e(2)),          // x = 0: (0, x, y)
        face([1.0, 0.0, 0.0], e(1), e(2)),   // x = 1: (1, x, y)
    ];
    MultipatchGeometry::from_patches(patches)
}

/// Returns a validated catalog geometry by name; single-patch entries come
/// back as one-patch geometries.
pub fn geometry_catalog(name: &str) -> Result<MultipatchGeometry, GeometryError> {
    match name {
        "flat-square" => MultipatchGeometry::single(PatchMap::flat_square()),
        "cylinder-shell" => {
            MultipatchGeometry::single(PatchMap::Analytic(AnalyticPatch::CylinderShell))
        }
        "quarter-annulus-nurbs" => MultipatchGeometry::single(quarter_annulus()?),
        "cube-surface" => cube_surface(),
        "two-squares" => {
            let left = PatchMap::flat_square();
            let right = PatchMap::Affine(AffinePatch::new(
                [1.0, 0.0, 0.0],
                vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            )?);
            MultipatchGeometry::from_patches(vec![left, right])
        }
        "unit-cube" => MultipatchGeometry::single(PatchMap::unit_cube()),
        "distorted-cube" => {
            MultipatchGeometry::single(PatchMap::Analytic(AnalyticPatch::DistortedCube))
        }
        "two-cubes" => {
            let left = PatchMap::unit_cube();
            let right = PatchMap::Affine(AffinePatch::new(
                [1.0, 0.0, 0.0],
                vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            )?);
            MultipatchGeometry::from_patches(vec![left, right])
        }
        _ => Err(GeometryError::UnknownGeometry {
            name: name.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_2d() -> Vec<[f64; 3]> {
        let line = [0.0, 0.3, 0.5, 0.71, 1.0];
        let mut pts = Vec::new();
        for &u in &line {
            for &v in &line {
                pts.push([u, v, 0.0]);
            }
        }
        pts
    }

    #[test]
    fn surface_measures_of_reference_patches() {
        let flat = PatchMap::flat_square();
        let scaled = PatchMap::Affine(
            AffinePatch::new([0.0; 3], vec![[2.0, 0.0, 0.0], [0.0, 3.0, 0.0]]).unwrap(),
        );
        let shell = PatchMap::Analytic(AnalyticPatch::CylinderShell);
        for x in grid_2d() {
            assert_abs_diff_eq!(surface_measure(&flat, &x).unwrap(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(surface_measure(&scaled, &x).unwrap(), 6.0, epsilon = 1e-14);
            assert_abs_diff_eq!(
                surface_measure(&shell, &x).unwrap(),
                std::f64::consts::FRAC_PI_2,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn degenerate_patch_is_rejected() {
        // Collinear columns: the image is a segment, κ = 0.
        let pinched = PatchMap::Affine(
            AffinePatch::new([0.0; 3], vec![[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap(),
        );
        assert!(matches!(
            pinched.validate(),
            Err(GeometryError::DegenerateJacobian { .. })
        ));
    }

    #[test]
    fn quarter_annulus_is_exact() {
        let map = quarter_annulus().unwrap();
        map.validate().unwrap();
        // Corners.
        for (x, expect) in [
            ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([0.0, 1.0, 0.0], [2.0, 0.0, 0.0]),
            ([1.0, 1.0, 0.0], [0.0, 2.0, 0.0]),
        ] {
            let p = map.eval(&x);
            for r in 0..3 {
                assert_abs_diff_eq!(p[r], expect[r], epsilon = 1e-14);
            }
        }
        // Every image point sits at radius 1 + s, in the plane z = 0.
        for x in grid_2d() {
            let p = map.eval(&x);
            let radius = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert_abs_diff_eq!(radius, 1.0 + x[1], epsilon = 1e-13);
            assert_eq!(p[2], 0.0);
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let maps = [
            quarter_annulus().unwrap(),
            PatchMap::Analytic(AnalyticPatch::CylinderShell),
            PatchMap::Analytic(AnalyticPatch::DistortedCube),
        ];
        let eps = 1e-6;
        for map in &maps {
            let dim = map.parametric_dim();
            let pts: Vec<[f64; 3]> = if dim == 2 {
                vec![[0.3, 0.4, 0.0], [0.62, 0.17, 0.0], [0.5, 0.9, 0.0]]
            } else {
                vec![[0.3, 0.4, 0.55], [0.62, 0.17, 0.81]]
            };
            for x in pts {
                let jac = map.jacobian(&x);
                for axis in 0..dim {
                    let mut hi = x;
                    let mut lo = x;
                    hi[axis] += eps;
                    lo[axis] -= eps;
                    let (phi, plo) = (map.eval(&hi), map.eval(&lo));
                    for r in 0..3 {
                        let fd = (phi[r] - plo[r]) / (2.0 * eps);
                        assert_abs_diff_eq!(jac[axis][r], fd, epsilon = 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn distorted_cube_has_positive_determinant() {
        let map = PatchMap::Analytic(AnalyticPatch::DistortedCube);
        map.validate().unwrap();
        for &u in &[0.0, 0.31, 0.5, 0.77, 1.0] {
            for &v in &[0.0, 0.5, 1.0] {
                for &w in &[0.13, 0.5, 0.93] {
                    assert!(jacobian_determinant(&map, &[u, v, w]).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn surface_round_trips_are_identities() {
        let maps = [
            PatchMap::flat_square(),
            PatchMap::Analytic(AnalyticPatch::CylinderShell),
            quarter_annulus().unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for map in &maps {
            for _ in 0..25 {
                let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), 0.0];
                // Scalar roles: pull(push(v̂)) = v̂ and push(pull(v)) = v.
                for role in [0usize, 2] {
                    let v = [rng.random_range(-1.0..1.0), 0.0, 0.0];
                    let pushed = pushforward_surface(map, role, &x, &v).unwrap();
                    let back = pullback_surface(map, role, &x, &pushed).unwrap();
                    assert_abs_diff_eq!(back[0], v[0], epsilon = 1e-12);
                }
                // Vector role from the reference side...
                let vhat = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0];
                let pushed = pushforward_surface(map, 1, &x, &vhat).unwrap();
                let back = pullback_surface(map, 1, &x, &pushed).unwrap();
                for r in 0..2 {
                    assert_abs_diff_eq!(back[r], vhat[r], epsilon = 1e-12);
                }
                // ...and from the physical side for tangent fields.
                let forward = pushforward_surface(map, 1, &x, &back).unwrap();
                for r in 0..3 {
                    assert_abs_diff_eq!(forward[r], pushed[r], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn volume_round_trips_are_identities() {
        let maps = [
            PatchMap::unit_cube(),
            PatchMap::Analytic(AnalyticPatch::DistortedCube),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for map in &maps {
            for _ in 0..25 {
                let x = [
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..1.0),
                ];
                for role in 0..=3usize {
                    let n = role_components(3, role).unwrap();
                    let mut v = [0.0; 3];
                    for slot in v.iter_mut().take(n) {
                        *slot = rng.random_range(-1.0..1.0);
                    }
                    let pushed = pushforward_volume(map, role, &x, &v).unwrap();
                    let back = pullback_volume(map, role, &x, &pushed).unwrap();
                    for r in 0..n {
                        assert_abs_diff_eq!(back[r], v[r], epsilon = 1e-12);
                    }
                    let pulled = pullback_volume(map, role, &x, &v).unwrap();
                    let fwd = pushforward_volume(map, role, &x, &pulled).unwrap();
                    for r in 0..n {
                        assert_abs_diff_eq!(fwd[r], v[r], epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_and_affine_volume_transforms() {
        let identity = PatchMap::unit_cube();
        let x = [0.3, 0.8, 0.44];
        for role in 0..=3usize {
            let v = [0.7, -0.2, 0.5];
            let pulled = pullback_volume(&identity, role, &x, &v).unwrap();
            for r in 0..role_components(3, role).unwrap() {
                assert_abs_diff_eq!(pulled[r], v[r], epsilon = 1e-15);
            }
        }
        let scaled = PatchMap::Affine(
            AffinePatch::new(
                [0.0; 3],
                vec![[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 4.0]],
            )
            .unwrap(),
        );
        let pulled = pullback_volume(&scaled, 3, &x, &[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(pulled[0], 24.0, epsilon = 1e-13);
    }

    /// On the unit-radius cylinder shell the surface divergence has the
    /// closed form div_Γ u = ∂_θ u_θ + ∂_z u_z with θ = πx/2, z = y, and the
    /// push-forward must satisfy div_Γ(push(f̂)) = κ⁻¹·div f̂.
    #[test]
    fn piola_identity_on_the_cylinder_shell() {
        let map = PatchMap::Analytic(AnalyticPatch::CylinderShell);
        let pi = std::f64::consts::PI;
        let kappa = pi / 2.0;
        let f0 = |x: f64, y: f64| (pi * x).sin() * (pi * y).cos() + 0.3;
        let f1 = |x: f64, y: f64| (pi * x).cos() * (pi * y).sin() - 0.2;
        let div_ref =
            |x: f64, y: f64| pi * (pi * x).cos() * (pi * y).cos() + pi * (pi * x).cos() * (pi * y).cos();
        // Physical cylinder components of the pushed-forward field.
        let u_theta_z = |x: f64, y: f64| -> (f64, f64) {
            let u = pushforward_surface(&map, 1, &[x, y, 0.0], &[f0(x, y), f1(x, y), 0.0]).unwrap();
            let t = pi / 2.0 * x;
            let e_theta = [-t.sin(), t.cos(), 0.0];
            (dot(&u, &e_theta), u[2])
        };
        // Fourth-order central differences in the surface coordinates.
        let eps = 1e-3;
        let d4 = |g: &dyn Fn(f64) -> f64, t: f64| -> f64 {
            (-g(t + 2.0 * eps) + 8.0 * g(t + eps) - 8.0 * g(t - eps) + g(t - 2.0 * eps))
                / (12.0 * eps)
        };
        for &(x, y) in &[(0.4, 0.5), (0.25, 0.3), (0.6, 0.71)] {
            let d_theta = d4(&|s| u_theta_z(s, y).0, x) * (2.0 / pi);
            let d_z = d4(&|s| u_theta_z(x, s).1, y);
            let physical_div = d_theta + d_z;
            let reference_div = div_ref(x, y) / kappa;
            assert_abs_diff_eq!(physical_div, reference_div, epsilon = 1e-10);
        }
    }

    /// On the distorted cube, the divergence of the div-conforming
    /// push-forward obeys div u ∘ F = det(dF)⁻¹·div f̂, and the curl of the
    /// curl-conforming push-forward obeys curl w ∘ F = ι₂⁻¹(curl Â).
    #[test]
    fn piola_identities_in_the_volume() {
        let map = PatchMap::Analytic(AnalyticPatch::DistortedCube);
        let pi = std::f64::consts::PI;
        let fhat = |x: &[f64; 3]| -> [f64; 3] {
            [
                (pi * x[0]).sin() * x[1],
                x[2] * (pi * x[1]).cos(),
                x[0] + (pi * x[2]).sin(),
            ]
        };
        let div_fhat = |x: &[f64; 3]| -> f64 {
            pi * (pi * x[0]).cos() * x[1] - pi * x[2] * (pi * x[1]).sin() + pi * (pi * x[2]).cos()
        };
        let eps = 1e-3;
        // Ambient Jacobian of a pushed-forward field via the chain rule:
        // ∂u/∂p = (∂(u∘F)/∂x)·(dF)⁻¹, with ∂(u∘F)/∂x by 4th-order FD.
        let ambient_jacobian = |role: usize,
                                reference: &dyn Fn(&[f64; 3]) -> [f64; 3],
                                x: &[f64; 3]|
         -> Matrix3<f64> {
            let push = |x: &[f64; 3]| {
                let v = reference(x);
                pushforward_volume(&map, role, x, &v).unwrap()
            };
            let mut param = Matrix3::zeros();
            for axis in 0..3 {
                let shift = |s: f64| {
                    let mut p = *x;
                    p[axis] += s;
                    push(&p)
                };
                let (p2, p1, m1, m2) = (
                    shift(2.0 * eps),
                    shift(eps),
                    shift(-eps),
                    shift(-2.0 * eps),
                );
                for r in 0..3 {
                    param[(r, axis)] =
                        (-p2[r] + 8.0 * p1[r] - 8.0 * m1[r] + m2[r]) / (12.0 * eps);
                }
            }
            let (m, _) = volume_jacobian(&map, x).unwrap();
            param * m.try_inverse().unwrap()
        };
        for &x in &[[0.4, 0.5, 0.3], [0.27, 0.66, 0.52]] {
            let det = jacobian_determinant(&map, &x).unwrap();
            // Divergence of the ι₂ push-forward.
            let ju = ambient_jacobian(2, &fhat, &x);
            let physical_div = ju[(0, 0)] + ju[(1, 1)] + ju[(2, 2)];
            assert_abs_diff_eq!(physical_div, div_fhat(&x) / det, epsilon = 1e-10);

            // Curl of the ι₁ push-forward: Â = (x₂², x₀x₂, sin(πx₁)).
            let ahat = |x: &[f64; 3]| -> [f64; 3] { [x[1] * x[1], x[0] * x[2], (pi * x[1]).sin()] };
            let curl_ahat = |x: &[f64; 3]| -> [f64; 3] {
                [pi * (pi * x[1]).cos() - x[0], 0.0, x[2] - 2.0 * x[1]]
            };
            let jw = ambient_jacobian(1, &ahat, &x);
            let physical_curl = [
                jw[(2, 1)] - jw[(1, 2)],
                jw[(0, 2)] - jw[(2, 0)],
                jw[(1, 0)] - jw[(0, 1)],
            ];
            let expected = pushforward_volume(&map, 2, &x, &curl_ahat(&x)).unwrap();
            for r in 0..3 {
                assert_abs_diff_eq!(physical_curl[r], expected[r], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn catalog_entries_validate() {
        for name in catalog_names() {
            let geom = geometry_catalog(name).unwrap();
            assert!(geom.num_patches() >= 1, "{name}");
        }
        assert!(matches!(
            geometry_catalog("moebius-strip"),
            Err(GeometryError::UnknownGeometry { .. })
        ));
    }

    #[test]
    fn cube_surface_is_watertight() {
        let geom = geometry_catalog("cube-surface").unwrap();
        assert_eq!(geom.num_patches(), 6);
        assert_eq!(geom.interfaces().len(), 12);
        // Every one of the 24 sides participates in exactly one interface.
        let mut sides: Vec<(usize, Side)> = Vec::new();
        for iface in geom.interfaces() {
            sides.push((iface.patch_a, iface.side_a));
            sides.push((iface.patch_b, iface.side_b));
        }
        sides.sort_by_key(|&(p, s)| (p, s.axis(), s.is_max()));
        sides.dedup();
        assert_eq!(sides.len(), 24);
    }

    #[test]
    fn two_squares_and_two_cubes_share_one_interface() {
        for (name, dim) in [("two-squares", 2), ("two-cubes", 3)] {
            let geom = geometry_catalog(name).unwrap();
            assert_eq!(geom.parametric_dim(), dim);
            assert_eq!(geom.num_patches(), 2);
            assert_eq!(geom.interfaces().len(), 1, "{name}");
            let iface = geom.interfaces()[0];
            assert_eq!(iface.orientation, Orientation::Same);
            assert_eq!(iface.side_a.axis(), 0);
        }
    }

    #[test]
    fn detection_finds_reversed_edges() {
        let left = PatchMap::flat_square();
        // Right patch runs y backwards: F(x, y) = (1 + x, 1 − y, 0).
        let right = PatchMap::Affine(
            AffinePatch::new([1.0, 1.0, 0.0], vec![[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]).unwrap(),
        );
        let interfaces = detect_interfaces(&[left, right]).unwrap();
        assert_eq!(interfaces.len(), 1);
        assert_eq!(interfaces[0].orientation, Orientation::Reversed);
    }

    #[test]
    fn conflicting_interfaces_are_rejected() {
        let geom = geometry_catalog("two-squares").unwrap();
        let mut interfaces = geom.interfaces().to_vec();
        interfaces.push(interfaces[0]);
        assert!(matches!(
            MultipatchGeometry::new(geom.patches().to_vec(), interfaces),
            Err(GeometryError::SideReused { .. })
        ));

        // A claimed interface whose parametrisations do not coincide.
        let bogus = InterfaceDescriptor {
            patch_a: 0,
            side_a: Side::XMin,
            patch_b: 1,
            side_b: Side::XMax,
            orientation: Orientation::Same,
        };
        assert!(matches!(
            MultipatchGeometry::new(geom.patches().to_vec(), vec![bogus]),
            Err(GeometryError::InterfaceMismatch { .. })
        ));
    }

    #[test]
    fn overlapping_patches_are_rejected() {
        let duplicated = vec![PatchMap::flat_square(), PatchMap::flat_square()];
        assert!(matches!(
            MultipatchGeometry::new(duplicated, Vec::new()),
            Err(GeometryError::PatchOverlap { .. })
        ));
    }

    #[test]
    fn geometry_serde_round_trip() {
        let geom = geometry_catalog("two-squares").unwrap();
        let json = serde_json::to_string(&geom).unwrap();
        let back: MultipatchGeometry = serde_json::from_str(&json).unwrap();
        assert_eq!(back, geom);

        let nurbs = geometry_catalog("quarter-annulus-nurbs").unwrap();
        let json = serde_json::to_string(&nurbs).unwrap();
        let back: MultipatchGeometry = serde_json::from_str(&json).unwrap();
        assert_eq!(back, nurbs);
    }

    #[test]
    fn invalid_nurbs_descriptions_are_rejected() {
        let angular = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let radial = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let pts = vec![[0.0; 3]; 6];
        let mut weights = vec![1.0; 6];
        weights[3] = -0.5;
        assert!(matches!(
            NurbsPatch::new(vec![angular.clone(), radial.clone()], pts.clone(), weights),
            Err(GeometryError::WeightNotPositive { index: 3, .. })
        ));
        assert!(matches!(
            NurbsPatch::new(vec![angular.clone(), radial.clone()], pts[..4].to_vec(), vec![1.0; 4]),
            Err(GeometryError::ControlPointMismatch { .. })
        ));
        let repeated = KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            NurbsPatch::new(vec![repeated, radial], vec![[0.0; 3]; 10], vec![1.0; 10]),
            Err(GeometryError::InteriorRepetition { axis: 0 })
        ));
    }
}
