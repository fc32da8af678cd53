//! Globally conforming spline spaces on multipatch geometries: interface
//! conformity checks, signed DOF identification, global interpolants, and
//! interface-jump diagnostics.
//!
//! Across a conforming interface the coupled degrees of freedom are the
//! boundary layers of the per-patch coefficient tensors:
//!
//! * role 0 — the scalar trace layer, identified with sign `+1`, making the
//!   global field continuous;
//! * role 1 (surface) and role 2 (volume) — the normal-component layer,
//!   identified with sign `−s_a·s_b` where `s = +1` on a max side and `−1`
//!   on a min side, making the normal trace (flux) continuous;
//! * role 1 (volume) — the two tangential-component layers, identified with
//!   sign `+1`, making the tangential trace continuous;
//! * the top role — no coupling (fully discontinuous).
//!
//! Identification is transitive (a union–find with sign propagation), so
//! corner DOFs shared by three or more patches collapse to one global DOF.
//! The global interpolant runs the endpoint-interpolating projector on each
//! patch independently and *asserts* that identified DOFs received equal
//! values — the tensor-product locality of the univariate operators makes
//! matching traces produce matching coefficients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    curl_2d, curl_3d, div_2d, div_3d, grad_3d, interpolate, CoefficientField, ComplexError,
    OperatorKind, SplineComplex,
};
use crate::geometry::{
    pushforward_surface, pushforward_volume, GeometryError, InterfaceDescriptor,
    MultipatchGeometry, Orientation, Side,
};
use crate::knots::KnotVector;

/// Two discretisations may differ by at most this much per knot to count as
/// matching along an interface.
pub const KNOT_MATCH_TOL: f64 = 1e-12;

/// Identified DOFs computed from the two sides of an interface must agree
/// to this tolerance.
pub const AGREEMENT_TOL: f64 = 1e-11;

/// Errors from global-space construction and evaluation.
#[derive(Debug, Error)]
pub enum MultipatchError {
    #[error("got {got} patch discretisations, expected {expect}")]
    ComplexCountMismatch { got: usize, expect: usize },
    #[error("patch {patch}: discretisation is {got}D but the geometry is {expect}D")]
    PatchDimensionMismatch {
        patch: usize,
        got: usize,
        expect: usize,
    },
    #[error("role {role} out of range for a {dim}D geometry (roles 0..={dim})")]
    RoleOutOfRange { role: usize, dim: usize },
    #[error("discretisations are non-conforming on {failed} of {total} interface(s)")]
    NonConforming { failed: usize, total: usize },
    #[error("interface {index} out of range ({count} interfaces)")]
    InterfaceOutOfRange { index: usize, count: usize },
    #[error("interface DOF identification produced an inconsistent sign (global DOF {global})")]
    InconsistentOrientation { global: usize },
    #[error(
        "identified DOF {global} received disagreeing values from two patches (difference {difference:.3e}); the input data is not conforming"
    )]
    InterfaceDisagreement { global: usize, difference: f64 },
    #[error("global coefficient array has length {got}, expected {expect}")]
    CoefficientMismatch { got: usize, expect: usize },
    #[error("interface jump is not applicable to role {role} in {dim}D")]
    JumpNotApplicable { role: usize, dim: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

fn knots_match(a: &KnotVector, b: &KnotVector) -> bool {
    a.degree() == b.degree()
        && a.knots().len() == b.knots().len()
        && a.knots()
            .iter()
            .zip(b.knots())
            .all(|(x, y)| (x - y).abs() <= KNOT_MATCH_TOL)
}

/// Conformity findings for one interface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceConformity {
    pub interface: InterfaceDescriptor,
    /// Sampled geometric agreement of the two parametrisations.
    pub parametrisation_match: bool,
    /// Tangential degrees agree.
    pub degree_match: bool,
    /// Tangential knot vectors agree (up to reversal for reversed edges).
    pub knot_match: bool,
}

impl InterfaceConformity {
    pub fn pass(&self) -> bool {
        self.parametrisation_match && self.degree_match && self.knot_match
    }
}

/// Per-interface conformity report; informational, never an exception.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformityReport {
    pub interfaces: Vec<InterfaceConformity>,
}

impl ConformityReport {
    pub fn all_pass(&self) -> bool {
        self.interfaces.iter().all(InterfaceConformity::pass)
    }

    pub fn failed_count(&self) -> usize {
        self.interfaces.iter().filter(|c| !c.pass()).count()
    }
}

fn check_patch_family(
    geom: &MultipatchGeometry,
    complexes: &[SplineComplex],
) -> Result<(), MultipatchError> {
    if complexes.len() != geom.num_patches() {
        return Err(MultipatchError::ComplexCountMismatch {
            got: complexes.len(),
            expect: geom.num_patches(),
        });
    }
    let dim = geom.parametric_dim();
    for (patch, cx) in complexes.iter().enumerate() {
        if cx.parametric_dim() != dim {
            return Err(MultipatchError::PatchDimensionMismatch {
                patch,
                got: cx.parametric_dim(),
                expect: dim,
            });
        }
    }
    Ok(())
}

/// Checks, per interface, that the parametrisations coincide and that the
/// tangential degrees and knot vectors of the two patch discretisations
/// match (knots compared in reversed order across reversed edges).
pub fn validate_conformity(
    geom: &MultipatchGeometry,
    complexes: &[SplineComplex],
) -> Result<ConformityReport, MultipatchError> {
    check_patch_family(geom, complexes)?;
    let dim = geom.parametric_dim();
    let mut interfaces = Vec::with_capacity(geom.interfaces().len());
    for iface in geom.interfaces() {
        let ta = iface.side_a.tangential_axes(dim);
        let tb = iface.side_b.tangential_axes(dim);
        let cxa = &complexes[iface.patch_a];
        let cxb = &complexes[iface.patch_b];
        let mut degree_match = true;
        let mut knot_match = true;
        for (pos, (&axis_a, &axis_b)) in ta.iter().zip(&tb).enumerate() {
            let ka = &cxa.knot_vectors()[axis_a];
            let kb = &cxb.knot_vectors()[axis_b];
            degree_match &= ka.degree() == kb.degree();
            let flipped = dim == 2 && pos == 0 && iface.orientation == Orientation::Reversed;
            let matches = if flipped {
                knots_match(&ka.reversed(), kb)
            } else {
                knots_match(ka, kb)
            };
            knot_match &= matches;
        }
        interfaces.push(InterfaceConformity {
            interface: *iface,
            parametrisation_match: true, // enforced by MultipatchGeometry::new
            degree_match,
            knot_match,
        });
    }
    Ok(ConformityReport { interfaces })
}

/// Union–find with a ±1 sign on every edge to the parent.
struct SignedUnionFind {
    parent: Vec<usize>,
    sign: Vec<f64>,
}

impl SignedUnionFind {
    fn new(len: usize) -> Self {
        SignedUnionFind {
            parent: (0..len).collect(),
            sign: vec![1.0; len],
        }
    }

    /// Root of `i` and the sign such that `value(i) = sign · value(root)`.
    fn find(&mut self, i: usize) -> (usize, f64) {
        if self.parent[i] == i {
            return (i, 1.0);
        }
        let (root, parent_sign) = self.find(self.parent[i]);
        self.parent[i] = root;
        self.sign[i] *= parent_sign;
        (root, self.sign[i])
    }

    /// Records `value(a) = sigma · value(b)`.
    fn union(&mut self, a: usize, b: usize, sigma: f64) -> Result<(), ()> {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            // value(a) = sa·value(ra), value(b) = sb·value(ra):
            // consistency requires sa = sigma·sb.
            return if sa == sigma * sb { Ok(()) } else { Err(()) };
        }
        // value(ra) = value(a)/sa = sigma·sb/sa · value(rb).
        self.parent[ra] = rb;
        self.sign[ra] = sigma * sb / sa;
        Ok(())
    }
}

/// One coupled DOF pair across an interface: local flat indices within the
/// two (patch, component) arrays, plus the identification sign.
struct Coupling {
    patch_a: usize,
    component_a: usize,
    flat_a: usize,
    patch_b: usize,
    component_b: usize,
    flat_b: usize,
    sigma: f64,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for axis in (0..shape.len().saturating_sub(1)).rev() {
        s[axis] = s[axis + 1] * shape[axis + 1];
    }
    s
}

/// Enumerates the coupled boundary-layer DOF pairs of one interface.
fn interface_couplings(
    dim: usize,
    role: usize,
    iface: &InterfaceDescriptor,
    complexes: &[SplineComplex],
) -> Result<Vec<Coupling>, MultipatchError> {
    let alpha_a = iface.side_a.axis();
    let alpha_b = iface.side_b.axis();
    let s_a = if iface.side_a.is_max() { 1.0 } else { -1.0 };
    let s_b = if iface.side_b.is_max() { 1.0 } else { -1.0 };
    let space_a = complexes[iface.patch_a].role(role)?;
    let space_b = complexes[iface.patch_b].role(role)?;

    // (component on a, component on b, identification sign).
    let component_pairs: Vec<(usize, usize, f64)> = match (dim, role) {
        (2, 0) | (3, 0) => vec![(0, 0, 1.0)],
        (2, 1) => vec![(alpha_a, alpha_b, -s_a * s_b)],
        (3, 1) => {
            let ta = iface.side_a.tangential_axes(dim);
            let tb = iface.side_b.tangential_axes(dim);
            ta.iter().zip(&tb).map(|(&ca, &cb)| (ca, cb, 1.0)).collect()
        }
        (3, 2) => vec![(alpha_a, alpha_b, -s_a * s_b)],
        (2, 2) | (3, 3) => Vec::new(),
        _ => return Err(MultipatchError::RoleOutOfRange { role, dim }),
    };

    let mut couplings = Vec::new();
    for (component_a, component_b, sigma) in component_pairs {
        let shape_a = space_a.component_shape(component_a)?;
        let shape_b = space_b.component_shape(component_b)?;
        let stride_a = strides(&shape_a);
        let stride_b = strides(&shape_b);
        let layer_a = if iface.side_a.is_max() { shape_a[alpha_a] - 1 } else { 0 };
        let layer_b = if iface.side_b.is_max() { shape_b[alpha_b] - 1 } else { 0 };
        let ta = iface.side_a.tangential_axes(dim);
        let tb = iface.side_b.tangential_axes(dim);
        // Conformity guarantees matching tangential dims; re-check to fail
        // loudly rather than mis-index.
        for (&axis_a, &axis_b) in ta.iter().zip(&tb) {
            if shape_a[axis_a] != shape_b[axis_b] {
                return Err(MultipatchError::NonConforming {
                    failed: 1,
                    total: 1,
                });
            }
        }
        match dim {
            2 => {
                let n = shape_a[ta[0]];
                for i in 0..n {
                    let i_b = match iface.orientation {
                        Orientation::Same => i,
                        Orientation::Reversed => n - 1 - i,
                    };
                    couplings.push(Coupling {
                        patch_a: iface.patch_a,
                        component_a,
                        flat_a: layer_a * stride_a[alpha_a] + i * stride_a[ta[0]],
                        patch_b: iface.patch_b,
                        component_b,
                        flat_b: layer_b * stride_b[alpha_b] + i_b * stride_b[tb[0]],
                        sigma,
                    });
                }
            }
            3 => {
                let (n0, n1) = (shape_a[ta[0]], shape_a[ta[1]]);
                for i in 0..n0 {
                    for j in 0..n1 {
                        couplings.push(Coupling {
                            patch_a: iface.patch_a,
                            component_a,
                            flat_a: layer_a * stride_a[alpha_a]
                                + i * stride_a[ta[0]]
                                + j * stride_a[ta[1]],
                            patch_b: iface.patch_b,
                            component_b,
                            flat_b: layer_b * stride_b[alpha_b]
                                + i * stride_b[tb[0]]
                                + j * stride_b[tb[1]],
                            sigma,
                        });
                    }
                }
            }
            _ => unreachable!("validated dimension"),
        }
    }
    Ok(couplings)
}

/// A globally conforming space of one role over a multipatch geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawGlobalSpace", into = "RawGlobalSpace")]
pub struct GlobalSpace {
    geometry: MultipatchGeometry,
    role: usize,
    complexes: Vec<SplineComplex>,
    /// Flat offset of each (patch, component) block in the local numbering.
    offsets: Vec<Vec<usize>>,
    local_dim: usize,
    /// Local DOF → (global DOF, sign): `local = sign · global`.
    map: Vec<(usize, f64)>,
    global_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGlobalSpace {
    geometry: MultipatchGeometry,
    role: usize,
    degrees: Vec<Vec<usize>>,
    knots: Vec<Vec<KnotVector>>,
}

impl TryFrom<RawGlobalSpace> for GlobalSpace {
    type Error = MultipatchError;
    fn try_from(raw: RawGlobalSpace) -> Result<Self, MultipatchError> {
        let complexes = raw
            .degrees
            .iter()
            .zip(raw.knots)
            .map(|(degrees, knots)| SplineComplex::new(degrees, knots))
            .collect::<Result<Vec<_>, _>>()?;
        build_global_space_per_patch(&raw.geometry, raw.role, complexes)
    }
}

impl From<GlobalSpace> for RawGlobalSpace {
    fn from(space: GlobalSpace) -> Self {
        RawGlobalSpace {
            geometry: space.geometry,
            role: space.role,
            degrees: space.complexes.iter().map(|cx| cx.degrees()).collect(),
            knots: space
                .complexes
                .iter()
                .map(|cx| cx.knot_vectors().to_vec())
                .collect(),
        }
    }
}

/// Builds the conforming global space with one shared discretisation
/// replicated on every patch.
pub fn build_global_space(
    geom: &MultipatchGeometry,
    role: usize,
    degrees: &[usize],
    knots: &[KnotVector],
) -> Result<GlobalSpace, MultipatchError> {
    let cx = SplineComplex::new(degrees, knots.to_vec())?;
    build_global_space_per_patch(geom, role, vec![cx; geom.num_patches()])
}

/// Builds the conforming global space from per-patch discretisations; the
/// interface conformity report must pass.
pub fn build_global_space_per_patch(
    geom: &MultipatchGeometry,
    role: usize,
    complexes: Vec<SplineComplex>,
) -> Result<GlobalSpace, MultipatchError> {
    let dim = geom.parametric_dim();
    if role > dim {
        return Err(MultipatchError::RoleOutOfRange { role, dim });
    }
    let report = validate_conformity(geom, &complexes)?;
    if !report.all_pass() {
        return Err(MultipatchError::NonConforming {
            failed: report.failed_count(),
            total: report.interfaces.len(),
        });
    }

    let mut offsets = Vec::with_capacity(complexes.len());
    let mut local_dim = 0usize;
    for cx in &complexes {
        let space = cx.role(role)?;
        let mut per_component = Vec::with_capacity(space.num_components());
        for c in 0..space.num_components() {
            per_component.push(local_dim);
            local_dim += space.component_dim(c)?;
        }
        offsets.push(per_component);
    }

    let mut uf = SignedUnionFind::new(local_dim);
    for iface in geom.interfaces() {
        for coupling in interface_couplings(dim, role, iface, &complexes)? {
            let a = offsets[coupling.patch_a][coupling.component_a] + coupling.flat_a;
            let b = offsets[coupling.patch_b][coupling.component_b] + coupling.flat_b;
            uf.union(a, b, coupling.sigma)
                .map_err(|_| MultipatchError::InconsistentOrientation { global: a })?;
        }
    }

    let mut root_to_global = vec![usize::MAX; local_dim];
    let mut map = Vec::with_capacity(local_dim);
    let mut global_dim = 0usize;
    for local in 0..local_dim {
        let (root, sign) = uf.find(local);
        if root_to_global[root] == usize::MAX {
            root_to_global[root] = global_dim;
            global_dim += 1;
        }
        map.push((root_to_global[root], sign));
    }

    Ok(GlobalSpace {
        geometry: geom.clone(),
        role,
        complexes,
        offsets,
        local_dim,
        map,
        global_dim,
    })
}

impl GlobalSpace {
    #[inline]
    pub fn role(&self) -> usize {
        self.role
    }

    #[inline]
    pub fn geometry(&self) -> &MultipatchGeometry {
        &self.geometry
    }

    #[inline]
    pub fn complexes(&self) -> &[SplineComplex] {
        &self.complexes
    }

    /// Total number of independent global DOFs.
    #[inline]
    pub fn global_dim(&self) -> usize {
        self.global_dim
    }

    /// Total number of local (patchwise) DOFs before identification.
    #[inline]
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// The (global index, sign) of one local DOF: `local = sign · global`.
    pub fn local_to_global(
        &self,
        patch: usize,
        component: usize,
        flat: usize,
    ) -> Result<(usize, f64), MultipatchError> {
        let space = self.complexes[patch].role(self.role)?;
        let dim = space.component_dim(component)?;
        if flat >= dim {
            return Err(MultipatchError::CoefficientMismatch {
                got: flat,
                expect: dim,
            });
        }
        Ok(self.map[self.offsets[patch][component] + flat])
    }

    /// Scatters a global coefficient vector to one patch.
    pub fn scatter(
        &self,
        coefficients: &[f64],
        patch: usize,
    ) -> Result<CoefficientField, MultipatchError> {
        if coefficients.len() != self.global_dim {
            return Err(MultipatchError::CoefficientMismatch {
                got: coefficients.len(),
                expect: self.global_dim,
            });
        }
        let space = self.complexes[patch].role(self.role)?;
        let mut data = Vec::with_capacity(space.num_components());
        for c in 0..space.num_components() {
            let offset = self.offsets[patch][c];
            let len = space.component_dim(c)?;
            data.push(
                (0..len)
                    .map(|flat| {
                        let (global, sign) = self.map[offset + flat];
                        sign * coefficients[global]
                    })
                    .collect(),
            );
        }
        Ok(CoefficientField::new(space.clone(), data)?)
    }
}

/// A field in a global space: one coefficient per global DOF.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawGlobalField", into = "RawGlobalField")]
pub struct GlobalField {
    space: GlobalSpace,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGlobalField {
    space: GlobalSpace,
    coefficients: Vec<f64>,
}

impl TryFrom<RawGlobalField> for GlobalField {
    type Error = MultipatchError;
    fn try_from(raw: RawGlobalField) -> Result<Self, MultipatchError> {
        GlobalField::new(raw.space, raw.coefficients)
    }
}

impl From<GlobalField> for RawGlobalField {
    fn from(f: GlobalField) -> Self {
        RawGlobalField {
            space: f.space,
            coefficients: f.coefficients,
        }
    }
}

impl GlobalField {
    pub fn new(space: GlobalSpace, coefficients: Vec<f64>) -> Result<Self, MultipatchError> {
        if coefficients.len() != space.global_dim() {
            return Err(MultipatchError::CoefficientMismatch {
                got: coefficients.len(),
                expect: space.global_dim(),
            });
        }
        Ok(GlobalField {
            space,
            coefficients,
        })
    }

    #[inline]
    pub fn space(&self) -> &GlobalSpace {
        &self.space
    }

    #[inline]
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    /// The patchwise restriction as a single-patch field.
    pub fn restrict(&self, patch: usize) -> Result<CoefficientField, MultipatchError> {
        self.space.scatter(&self.coefficients, patch)
    }
}

/// Interpolates a patchwise reference-coordinate function onto the global
/// space: `f(patch, component, x)`. The per-patch interpolants are computed
/// independently; identified DOFs must agree to [`AGREEMENT_TOL`], otherwise
/// the input data was not conforming.
pub fn global_interpolant(
    space: &GlobalSpace,
    mut f: impl FnMut(usize, usize, &[f64; 3]) -> f64,
) -> Result<GlobalField, MultipatchError> {
    let mut coefficients = vec![f64::NAN; space.global_dim()];
    for (patch, cx) in space.complexes.iter().enumerate() {
        let local = interpolate(cx, space.role, OperatorKind::Endpoint, |c, x| f(patch, c, x))?;
        let role_space = cx.role(space.role)?;
        for c in 0..role_space.num_components() {
            let offset = space.offsets[patch][c];
            for (flat, &value) in local.component(c).iter().enumerate() {
                let (global, sign) = space.map[offset + flat];
                let candidate = sign * value;
                let current = coefficients[global];
                if current.is_nan() {
                    coefficients[global] = candidate;
                } else {
                    let difference = (current - candidate).abs();
                    if difference > AGREEMENT_TOL {
                        return Err(MultipatchError::InterfaceDisagreement {
                            global,
                            difference,
                        });
                    }
                }
            }
        }
    }
    GlobalField::new(space.clone(), coefficients)
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Physical outward conormal of a surface patch at an edge point: in the
/// tangent plane, orthogonal to the edge, pointing out of the patch.
fn surface_conormal(
    map: &crate::geometry::PatchMap,
    side: Side,
    x: &[f64; 3],
) -> [f64; 3] {
    let jac = map.jacobian(x);
    let t_axis = side.tangential_axes(2)[0];
    let tangent = unit(jac[t_axis]);
    let s = if side.is_max() { 1.0 } else { -1.0 };
    let outward = [
        s * jac[side.axis()][0],
        s * jac[side.axis()][1],
        s * jac[side.axis()][2],
    ];
    let along = dot3(&outward, &tangent);
    unit([
        outward[0] - along * tangent[0],
        outward[1] - along * tangent[1],
        outward[2] - along * tangent[2],
    ])
}

/// Physical outward unit normal of a volume patch face.
fn volume_face_normal(
    map: &crate::geometry::PatchMap,
    side: Side,
    x: &[f64; 3],
) -> [f64; 3] {
    // n ∝ ±(dF)⁻ᵀ e_α: the gradient of the pinned coordinate function.
    let jac = map.jacobian(x);
    let m = nalgebra::Matrix3::from_columns(&[
        nalgebra::Vector3::from_column_slice(&jac[0]),
        nalgebra::Vector3::from_column_slice(&jac[1]),
        nalgebra::Vector3::from_column_slice(&jac[2]),
    ]);
    let inv_t = m.try_inverse().expect("validated geometry").transpose();
    let mut e = nalgebra::Vector3::zeros();
    e[side.axis()] = if side.is_max() { 1.0 } else { -1.0 };
    let n = inv_t * e;
    unit([n[0], n[1], n[2]])
}

/// Maximum physical jump of a global field across one interface, sampled at
/// `n_samples` points (per direction in 3D): role 0 compares values, role 1
/// on surfaces (role 2 in volumes) compares outward normal traces, volume
/// role 1 compares tangential traces. The top role is fully discontinuous
/// and reports `None`.
pub fn interface_jump(
    field: &GlobalField,
    interface: usize,
    n_samples: usize,
) -> Result<Option<f64>, MultipatchError> {
    let space = field.space();
    let geom = space.geometry();
    let dim = geom.parametric_dim();
    let role = space.role();
    let iface = *geom
        .interfaces()
        .get(interface)
        .ok_or(MultipatchError::InterfaceOutOfRange {
            index: interface,
            count: geom.interfaces().len(),
        })?;
    if role == dim {
        return Ok(None);
    }
    let field_a = field.restrict(iface.patch_a)?;
    let field_b = field.restrict(iface.patch_b)?;
    let map_a = &geom.patches()[iface.patch_a];
    let map_b = &geom.patches()[iface.patch_b];
    let n = n_samples.max(2);
    let line: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let uv_samples: Vec<[f64; 2]> = if dim == 2 {
        line.iter().map(|&t| [t, 0.0]).collect()
    } else {
        let mut pts = Vec::with_capacity(n * n);
        for &u in &line {
            for &v in &line {
                pts.push([u, v]);
            }
        }
        pts
    };
    let mut jump: f64 = 0.0;
    for uv in uv_samples {
        let xa = iface.side_a.embed(dim, &uv);
        let xb = iface.side_b.embed(dim, &iface.map_to_b(&uv));
        match (dim, role) {
            (_, 0) => {
                let va = field_a.eval_component(0, &xa);
                let vb = field_b.eval_component(0, &xb);
                jump = jump.max((va - vb).abs());
            }
            (2, 1) => {
                let ua = {
                    let v = [field_a.eval_component(0, &xa), field_a.eval_component(1, &xa), 0.0];
                    pushforward_surface(map_a, 1, &xa, &v)?
                };
                let ub = {
                    let v = [field_b.eval_component(0, &xb), field_b.eval_component(1, &xb), 0.0];
                    pushforward_surface(map_b, 1, &xb, &v)?
                };
                let nu_a = surface_conormal(map_a, iface.side_a, &xa);
                let nu_b = surface_conormal(map_b, iface.side_b, &xb);
                jump = jump.max((dot3(&ua, &nu_a) + dot3(&ub, &nu_b)).abs());
            }
            (3, 1) => {
                let wa = {
                    let v = [
                        field_a.eval_component(0, &xa),
                        field_a.eval_component(1, &xa),
                        field_a.eval_component(2, &xa),
                    ];
                    pushforward_volume(map_a, 1, &xa, &v)?
                };
                let wb = {
                    let v = [
                        field_b.eval_component(0, &xb),
                        field_b.eval_component(1, &xb),
                        field_b.eval_component(2, &xb),
                    ];
                    pushforward_volume(map_b, 1, &xb, &v)?
                };
                let na = volume_face_normal(map_a, iface.side_a, &xa);
                let mut gap = 0.0;
                for r in 0..3 {
                    let ta = wa[r] - dot3(&wa, &na) * na[r];
                    let tb = wb[r] - dot3(&wb, &na) * na[r];
                    gap += (ta - tb) * (ta - tb);
                }
                jump = jump.max(gap.sqrt());
            }
            (3, 2) => {
                let ua = {
                    let v = [
                        field_a.eval_component(0, &xa),
                        field_a.eval_component(1, &xa),
                        field_a.eval_component(2, &xa),
                    ];
                    pushforward_volume(map_a, 2, &xa, &v)?
                };
                let ub = {
                    let v = [
                        field_b.eval_component(0, &xb),
                        field_b.eval_component(1, &xb),
                        field_b.eval_component(2, &xb),
                    ];
                    pushforward_volume(map_b, 2, &xb, &v)?
                };
                let na = volume_face_normal(map_a, iface.side_a, &xa);
                let nb = volume_face_normal(map_b, iface.side_b, &xb);
                jump = jump.max((dot3(&ua, &na) + dot3(&ub, &nb)).abs());
            }
            _ => return Err(MultipatchError::JumpNotApplicable { role, dim }),
        }
    }
    Ok(Some(jump))
}

/// Per-role-pair commuting residuals, patchwise, at coefficient level.
///
/// `pair_fields(pair, role, patch, component, x)` must supply, for every
/// pair index `k`, a smooth reference role-`k` field (queried with
/// `role = k`) and its exact derivative (queried with `role = k + 1`).
/// The result holds, for each pair, `max_j ‖D(Π̃ f) − Π̃(D f)‖_∞`.
pub fn global_commuting_residual(
    geom: &MultipatchGeometry,
    degrees: &[usize],
    knots: &[KnotVector],
    mut pair_fields: impl FnMut(usize, usize, usize, usize, &[f64; 3]) -> f64,
) -> Result<Vec<f64>, MultipatchError> {
    let dim = geom.parametric_dim();
    let cx = SplineComplex::new(degrees, knots.to_vec())?;
    let mut residuals = vec![0.0f64; dim];
    for patch in 0..geom.num_patches() {
        for pair in 0..dim {
            let projected = interpolate(&cx, pair, OperatorKind::Endpoint, |c, x| {
                pair_fields(pair, pair, patch, c, x)
            })?;
            let left = match (dim, pair) {
                (2, 0) => curl_2d(&projected)?,
                (2, 1) => div_2d(&projected)?,
                (3, 0) => grad_3d(&projected)?,
                (3, 1) => curl_3d(&projected)?,
                (3, 2) => div_3d(&projected)?,
                _ => unreachable!("pair < dim"),
            };
            let right = interpolate(&cx, pair + 1, OperatorKind::Endpoint, |c, x| {
                pair_fields(pair, pair + 1, patch, c, x)
            })?;
            residuals[pair] = residuals[pair].max(left.max_abs_diff(&right)?);
        }
    }
    Ok(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geometry_catalog, AffinePatch, PatchMap};
    use approx::assert_abs_diff_eq;

    fn uniform_knots(p: usize, elements: usize, dim: usize) -> Vec<KnotVector> {
        vec![KnotVector::open_uniform(p, elements); dim]
    }

    #[test]
    fn two_squares_global_dimensions() {
        let geom = geometry_catalog("two-squares").unwrap();
        let knots = uniform_knots(1, 2, 2);

        // Role 0: 9 + 9 − 3 shared edge DOFs.
        let s0 = build_global_space(&geom, 0, &[1, 1], &knots).unwrap();
        assert_eq!(s0.global_dim(), 15);
        assert_eq!(s0.local_dim(), 18);

        // Role 1: 12 + 12 − 2 shared normal DOFs (truncated tangential dim).
        let s1 = build_global_space(&geom, 1, &[1, 1], &knots).unwrap();
        assert_eq!(s1.global_dim(), 22);

        // Role 2: fully discontinuous.
        let s2 = build_global_space(&geom, 2, &[1, 1], &knots).unwrap();
        assert_eq!(s2.global_dim(), 8);
    }

    #[test]
    fn two_cubes_global_dimensions() {
        let geom = geometry_catalog("two-cubes").unwrap();
        let knots = uniform_knots(1, 1, 3);
        let s0 = build_global_space(&geom, 0, &[1, 1, 1], &knots).unwrap();
        assert_eq!(s0.global_dim(), 12); // 8 + 8 − 4
        let s3 = build_global_space(&geom, 3, &[1, 1, 1], &knots).unwrap();
        assert_eq!(s3.global_dim(), 2);
    }

    #[test]
    fn cube_surface_corner_dofs_identify_transitively() {
        let geom = geometry_catalog("cube-surface").unwrap();
        // p = 1, single element: every DOF is a cube vertex; 6·4 = 24 local
        // DOFs must collapse to the 8 vertices.
        let s0 = build_global_space(&geom, 0, &[1, 1], &uniform_knots(1, 1, 2)).unwrap();
        assert_eq!(s0.local_dim(), 24);
        assert_eq!(s0.global_dim(), 8);
    }

    #[test]
    fn conformity_report_flags_refined_patch() {
        let geom = geometry_catalog("two-squares").unwrap();
        let coarse = SplineComplex::new(&[2, 2], uniform_knots(2, 2, 2)).unwrap();
        let fine = coarse.refine_dyadic();

        let ok = validate_conformity(&geom, &[coarse.clone(), coarse.clone()]).unwrap();
        assert!(ok.all_pass());

        let bad = validate_conformity(&geom, &[coarse.clone(), fine.clone()]).unwrap();
        assert!(!bad.all_pass());
        assert_eq!(bad.failed_count(), 1);
        assert!(bad.interfaces[0].degree_match);
        assert!(!bad.interfaces[0].knot_match);

        assert!(matches!(
            build_global_space_per_patch(&geom, 0, vec![coarse, fine]),
            Err(MultipatchError::NonConforming { failed: 1, total: 1 })
        ));
    }

    #[test]
    fn cube_surface_conformity_passes_everywhere() {
        let geom = geometry_catalog("cube-surface").unwrap();
        let cx = SplineComplex::new(&[2, 2], uniform_knots(2, 2, 2)).unwrap();
        let report = validate_conformity(&geom, &vec![cx; 6]).unwrap();
        assert_eq!(report.interfaces.len(), 12);
        assert!(report.all_pass());
    }

    #[test]
    fn global_interpolant_of_constant_is_constant() {
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 0, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        let field = global_interpolant(&space, |_, _, _| 3.5).unwrap();
        for &c in field.coefficients() {
            assert_abs_diff_eq!(c, 3.5, epsilon = 1e-12);
        }
        let jump = interface_jump(&field, 0, 33).unwrap().unwrap();
        assert!(jump <= 1e-12, "jump {jump}");
    }

    #[test]
    fn cube_surface_interpolant_is_continuous() {
        let geom = geometry_catalog("cube-surface").unwrap();
        let space = build_global_space(&geom, 0, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        // Restriction of a global trilinear polynomial in ambient space.
        let v = |p: [f64; 3]| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2] + p[0] * p[1] * p[2];
        let field = global_interpolant(&space, |patch, _, x| {
            v(geom.patches()[patch].eval(x))
        })
        .unwrap();
        for index in 0..geom.interfaces().len() {
            let jump = interface_jump(&field, index, 50).unwrap().unwrap();
            assert!(jump < 1e-11, "interface {index}: jump {jump}");
        }
    }

    #[test]
    fn inconsistent_patchwise_data_is_rejected() {
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 0, &[1, 1], &uniform_knots(1, 2, 2)).unwrap();
        let err = global_interpolant(&space, |patch, _, x| {
            if patch == 0 {
                x[0] + x[1]
            } else {
                50.0 + x[0]
            }
        });
        assert!(matches!(
            err,
            Err(MultipatchError::InterfaceDisagreement { .. })
        ));
    }

    #[test]
    fn normal_trace_is_continuous_for_role1_interpolants() {
        // Two flat squares; physical field with continuous normal component
        // across the vertical interface at x = 1.
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 1, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        let pi = std::f64::consts::PI;
        // Physical vector field (smooth on the union [0,2]×[0,1]).
        let u = |p: [f64; 3]| -> [f64; 2] {
            [
                (0.5 * pi * p[0]).sin() * (pi * p[1]).cos(),
                p[0] * p[1] * (1.0 - p[1]),
            ]
        };
        // Flat patches: the reference components equal the physical ones
        // composed with F (κ = 1, dF = [e₁ e₂]).
        let field = global_interpolant(&space, |patch, component, x| {
            let p = geom.patches()[patch].eval(x);
            u(p)[component]
        })
        .unwrap();
        let jump = interface_jump(&field, 0, 40).unwrap().unwrap();
        assert!(jump < 1e-11, "normal-trace jump {jump}");
    }

    #[test]
    fn mirrored_patches_get_a_negative_identification_sign() {
        // Patch 1 runs its x-axis backwards: F(x, y) = (2 − x, y, 0); the
        // shared edge is xmax–xmax, so the flux sign must flip.
        let left = PatchMap::flat_square();
        let right = PatchMap::Affine(
            AffinePatch::new([2.0, 0.0, 0.0], vec![[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap(),
        );
        let geom = MultipatchGeometry::from_patches(vec![left, right]).unwrap();
        assert_eq!(geom.interfaces().len(), 1);
        let iface = geom.interfaces()[0];
        assert_eq!(iface.side_a, Side::XMax);
        assert_eq!(iface.side_b, Side::XMax);

        let space = build_global_space(&geom, 1, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        // Find a coupled pair and check its sign is −1.
        let cx = &space.complexes()[0];
        let shape = cx.role(1).unwrap().component_shape(0).unwrap();
        let mut saw_negative = false;
        for i in 0..shape[1] {
            let flat = (shape[0] - 1) * shape[1] + i;
            let (global, sign) = space.local_to_global(0, 0, flat).unwrap();
            // The same global DOF must appear in patch 1 with opposite sign.
            for j in 0..shape[1] {
                let flat_b = (shape[0] - 1) * shape[1] + j;
                let (global_b, sign_b) = space.local_to_global(1, 0, flat_b).unwrap();
                if global_b == global {
                    assert_eq!(sign * sign_b, -1.0);
                    saw_negative = true;
                }
            }
        }
        assert!(saw_negative);

        // A physically smooth field still glues: u = (sin(πp₀/2)·…, …).
        let pi = std::f64::consts::PI;
        let u = |p: [f64; 3]| -> [f64; 2] {
            [(0.25 * pi * p[0]).sin() * (pi * p[1]).cos() + 0.2, p[1] * (1.0 - p[1])]
        };
        let field = global_interpolant(&space, |patch, component, x| {
            let map = &geom.patches()[patch];
            let phys = u(map.eval(x));
            let full = [phys[0], phys[1], 0.0];
            let pulled = crate::geometry::pullback_surface(map, 1, x, &full).unwrap();
            pulled[component]
        })
        .unwrap();
        let jump = interface_jump(&field, 0, 40).unwrap().unwrap();
        assert!(jump < 1e-11, "mirrored normal-trace jump {jump}");
    }

    #[test]
    fn perturbing_a_shared_dof_creates_a_jump() {
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 0, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        let field = global_interpolant(&space, |_, _, _| 1.0).unwrap();
        let clean = interface_jump(&field, 0, 40).unwrap().unwrap();
        assert!(clean < 1e-12);
        // Perturb a DOF on the shared edge in patch 0 only — bypassing the
        // identification — and compare the traces directly.
        let cx = &space.complexes()[0];
        let shape = cx.role(0).unwrap().component_shape(0).unwrap();
        let mid_edge_flat = (shape[0] - 1) * shape[1] + shape[1] / 2;
        let a = field.restrict(0).unwrap();
        let b = field.restrict(1).unwrap();
        let mut data: Vec<Vec<f64>> = vec![a.component(0).to_vec()];
        data[0][mid_edge_flat] += 1.0;
        let broken = CoefficientField::new(a.space().clone(), data).unwrap();
        let mut jump: f64 = 0.0;
        for i in 0..=40 {
            let t = i as f64 / 40.0;
            let va = broken.eval_component(0, &[1.0, t, 0.0]);
            let vb = b.eval_component(0, &[0.0, t, 0.0]);
            jump = jump.max((va - vb).abs());
        }
        assert!(jump > 0.3, "perturbation must be visible: {jump}");
    }

    #[test]
    fn top_role_jump_is_not_applicable() {
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 2, &[1, 1], &uniform_knots(1, 2, 2)).unwrap();
        let field = global_interpolant(&space, |_, _, _| 1.0).unwrap();
        assert!(interface_jump(&field, 0, 10).unwrap().is_none());
        assert!(matches!(
            interface_jump(&field, 5, 10),
            Err(MultipatchError::InterfaceOutOfRange { .. })
        ));
    }

    #[test]
    fn commuting_residuals_on_two_squares() {
        let geom = geometry_catalog("two-squares").unwrap();
        let pi = std::f64::consts::PI;
        let knots = uniform_knots(2, 3, 2);
        // Pair 0: scalar and its vector curl; pair 1: a vector field and
        // its divergence — all given patchwise in reference coordinates.
        let residuals = global_commuting_residual(&geom, &[2, 2], &knots, |pair, role, patch, c, x| {
            let shift = patch as f64; // physical x-offset of the patch
            let (px, py) = (x[0] + shift, x[1]);
            match (pair, role) {
                (0, 0) => (0.5 * pi * px).sin() * (pi * py).cos(),
                (0, 1) => match c {
                    0 => -pi * (0.5 * pi * px).sin() * (pi * py).sin(),
                    _ => -0.5 * pi * (0.5 * pi * px).cos() * (pi * py).cos(),
                },
                (1, 1) => match c {
                    0 => (0.5 * pi * px).cos() * py,
                    _ => px * (pi * py).sin(),
                },
                (1, 2) => -0.5 * pi * (0.5 * pi * px).sin() * py + pi * px * (pi * py).cos(),
                _ => unreachable!(),
            }
        })
        .unwrap();
        assert_eq!(residuals.len(), 2);
        for (pair, &r) in residuals.iter().enumerate() {
            assert!(r < 1e-10, "pair {pair}: residual {r}");
        }
    }

    #[test]
    fn commuting_residuals_on_the_unit_cube() {
        let geom = geometry_catalog("unit-cube").unwrap();
        let pi = std::f64::consts::PI;
        let knots = uniform_knots(2, 2, 3);
        let residuals =
            global_commuting_residual(&geom, &[2, 2, 2], &knots, |pair, role, _, c, x| {
                match (pair, role) {
                    // f⁰ and grad f⁰.
                    (0, 0) => (pi * x[0]).sin() * x[1] * (pi * x[2]).cos(),
                    (0, 1) => match c {
                        0 => pi * (pi * x[0]).cos() * x[1] * (pi * x[2]).cos(),
                        1 => (pi * x[0]).sin() * (pi * x[2]).cos(),
                        _ => -pi * (pi * x[0]).sin() * x[1] * (pi * x[2]).sin(),
                    },
                    // A and curl A, with A = (0, x₀·sin(πx₁), x₀x₁x₂).
                    (1, 1) => match c {
                        0 => 0.0,
                        1 => x[0] * (pi * x[1]).sin(),
                        _ => x[0] * x[1] * x[2],
                    },
                    (1, 2) => match c {
                        0 => x[0] * x[2],
                        1 => -x[1] * x[2],
                        _ => (pi * x[1]).sin(),
                    },
                    // B and div B.
                    (2, 2) => match c {
                        0 => (pi * x[0]).cos() * x[1],
                        1 => x[1] * x[2],
                        _ => (pi * x[2]).sin() * x[0],
                    },
                    (2, 3) => {
                        -pi * (pi * x[0]).sin() * x[1] + x[2] + pi * x[0] * (pi * x[2]).cos()
                    }
                    _ => unreachable!(),
                }
            })
            .unwrap();
        assert_eq!(residuals.len(), 3);
        for (pair, &r) in residuals.iter().enumerate() {
            assert!(r < 1e-10, "pair {pair}: residual {r}");
        }
    }

    #[test]
    fn global_interpolant_is_patchwise_local() {
        // The restriction of the global interpolant to one patch is the
        // single-patch interpolant of the restricted function.
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 0, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        let f = |patch: usize, x: &[f64; 3]| {
            let p = geom.patches()[patch].eval(x);
            (0.5 * std::f64::consts::PI * p[0]).sin() * (1.0 + p[1] * p[1])
        };
        let field = global_interpolant(&space, |patch, _, x| f(patch, x)).unwrap();
        for patch in 0..2 {
            let restricted = field.restrict(patch).unwrap();
            let direct = interpolate(
                &space.complexes()[patch],
                0,
                OperatorKind::Endpoint,
                |_, x| f(patch, x),
            )
            .unwrap();
            let gap = restricted.max_abs_diff(&direct).unwrap();
            assert!(gap <= AGREEMENT_TOL, "patch {patch}: gap {gap}");
        }
    }

    #[test]
    fn discrete_derivatives_stay_in_the_global_complex() {
        // curl_Γ of a glued role-0 field satisfies the role-1 identification
        // exactly at coefficient level: with dyadic coefficients on dyadic
        // knots the derivative arithmetic is exact, so the identification
        // gap and div∘curl are both bit-zero.
        use rand::{Rng, SeedableRng};
        let geom = geometry_catalog("two-squares").unwrap();
        let knots = uniform_knots(2, 2, 2);
        let s0 = build_global_space(&geom, 0, &[2, 2], &knots).unwrap();
        let s1 = build_global_space(&geom, 1, &[2, 2], &knots).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let coefficients: Vec<f64> = (0..s0.global_dim())
            .map(|_| rng.random_range(-(1 << 20)..(1 << 20)) as f64 / (1 << 20) as f64)
            .collect();
        let field = GlobalField::new(s0.clone(), coefficients).unwrap();
        let curls: Vec<CoefficientField> = (0..2)
            .map(|patch| curl_2d(&field.restrict(patch).unwrap()).unwrap())
            .collect();
        // Patchwise closure: the results live in the role-1 spaces.
        for (patch, curl) in curls.iter().enumerate() {
            assert_eq!(curl.space(), s1.complexes()[patch].role(1).unwrap());
            assert_eq!(
                div_2d(curl).unwrap().max_abs(),
                0.0,
                "patch {patch}: div∘curl must vanish"
            );
        }
        // Global closure: identified role-1 DOFs carry identical values.
        let mut global = vec![f64::NAN; s1.global_dim()];
        for (patch, curl) in curls.iter().enumerate() {
            for c in 0..2 {
                for (flat, &v) in curl.component(c).iter().enumerate() {
                    let (g, sign) = s1.local_to_global(patch, c, flat).unwrap();
                    let candidate = sign * v;
                    if global[g].is_nan() {
                        global[g] = candidate;
                    } else {
                        assert_eq!(global[g], candidate, "global DOF {g}");
                    }
                }
            }
        }
    }

    #[test]
    fn discrete_input_has_rounding_level_commuting_residual() {
        use rand::{Rng, SeedableRng};
        let geom = geometry_catalog("two-squares").unwrap();
        let degrees = [2usize, 2];
        let knots = uniform_knots(2, 2, 2);
        let cx = SplineComplex::new(&degrees, knots.clone()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut dyadic_field = |role: usize| {
            let space = cx.role(role).unwrap().clone();
            let data = (0..space.num_components())
                .map(|c| {
                    (0..space.component_dim(c).unwrap())
                        .map(|_| rng.random_range(-(1 << 20)..(1 << 20)) as f64 / (1 << 20) as f64)
                        .collect()
                })
                .collect();
            CoefficientField::new(space, data).unwrap()
        };
        let f0 = dyadic_field(0);
        let f0_curl = curl_2d(&f0).unwrap();
        let g1 = dyadic_field(1);
        let g1_div = div_2d(&g1).unwrap();
        let residuals =
            global_commuting_residual(&geom, &degrees, &knots, |pair, role, _, c, x| {
                match (pair, role) {
                    (0, 0) => f0.eval_component(0, x),
                    (0, 1) => f0_curl.eval_component(c, x),
                    (1, 1) => g1.eval_component(c, x),
                    (1, 2) => g1_div.eval_component(0, x),
                    _ => unreachable!(),
                }
            })
            .unwrap();
        for (pair, &r) in residuals.iter().enumerate() {
            assert!(r < 1e-12, "pair {pair}: residual {r} above rounding level");
        }
    }

    #[test]
    fn scatter_gather_round_trip() {
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 1, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        let coefficients: Vec<f64> = (0..space.global_dim())
            .map(|i| (i as f64 * 0.37).sin())
            .collect();
        let field = GlobalField::new(space.clone(), coefficients.clone()).unwrap();
        // Every local DOF must reproduce sign·global.
        for patch in 0..2 {
            let local = field.restrict(patch).unwrap();
            let role_space = space.complexes()[patch].role(1).unwrap();
            for c in 0..role_space.num_components() {
                for (flat, &v) in local.component(c).iter().enumerate() {
                    let (g, sign) = space.local_to_global(patch, c, flat).unwrap();
                    assert_eq!(v, sign * coefficients[g]);
                }
            }
        }
    }

    #[test]
    fn global_field_serde_round_trip() {
        let geom = geometry_catalog("two-squares").unwrap();
        let space = build_global_space(&geom, 0, &[2, 2], &uniform_knots(2, 2, 2)).unwrap();
        let field = global_interpolant(&space, |patch, _, x| {
            (x[0] + patch as f64) * 0.25 + x[1]
        })
        .unwrap();
        let json = serde_json::to_string(&field).unwrap();
        let back: GlobalField = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coefficients(), field.coefficients());
        assert_eq!(back.space().global_dim(), field.space().global_dim());
    }
}
