//! Quadrature, physical-domain error norms, and L² projection.
//!
//! Everything here integrates element-by-element with Gauss–Legendre rules.
//! Nodes and weights are generated on demand by Newton iteration on the
//! Legendre polynomials — stable and accurate to machine precision for the
//! supported orders (`n ≤ 32`, i.e. polynomial exactness up to degree 63).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    curl_2d, curl_3d, div_2d, div_3d, grad_3d, CoefficientField, ComplexSpace,
};
use crate::geometry::{
    jacobian_determinant, pushforward_surface, pushforward_volume, surface_measure, GeometryError,
    PatchMap,
};
use crate::knots::KnotVector;
use crate::multipatch::{GlobalField, GlobalSpace};

/// Largest supported number of Gauss points per element.
pub const MAX_GAUSS_POINTS: usize = 32;

/// Errors from quadrature construction and norm evaluation.
#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("quadrature point count must lie in 1..={MAX_GAUSS_POINTS}, got {0}")]
    InvalidQuadratureOrder(usize),
    #[error("Gram matrix is not symmetric positive definite (dimension {dim})")]
    GramNotSpd { dim: usize },
    #[error("norm '{norm}' is not defined for role {role} in dimension {dim}")]
    NormUndefined {
        norm: &'static str,
        role: usize,
        dim: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A Gauss–Legendre rule on the reference interval `[0, 1]`.
///
/// `n` points integrate polynomials of degree `2n − 1` exactly. Nodes are
/// ascending and symmetric about `0.5`; weights are positive and sum to one.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Values `P_0(x) … P_n(x)` of the Legendre polynomials on `[−1, 1]`.
pub(crate) fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(x);
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
        out.push(next);
    }
    out
}

/// Value and first derivative of the Legendre polynomial `P_n` at `x ∈ (−1, 1)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    let deriv = n as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, deriv)
}

impl GaussRule {
    /// Builds the `n`-point rule, `1 ≤ n ≤ 32`.
    pub fn new(n: usize) -> Result<Self, AnalysisError> {
        if n == 0 || n > MAX_GAUSS_POINTS {
            return Err(AnalysisError::InvalidQuadratureOrder(n));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = (n + 1) / 2;
        for i in 0..half {
            let odd_middle = n % 2 == 1 && i == half - 1;
            // Root of P_n on [-1, 1]; the i-th guess descends from +1.
            let mut x = if odd_middle {
                0.0
            } else {
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos()
            };
            if !odd_middle {
                for _ in 0..64 {
                    let (p, d) = legendre(n, x);
                    let dx = p / d;
                    x -= dx;
                    if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                        break;
                    }
                }
            }
            let d = legendre(n, x).1;
            let w = 1.0 / ((1.0 - x * x) * d * d); // half of the [-1, 1] weight
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(GaussRule { nodes, weights })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes on `[0, 1]`, ascending.
    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights on `[0, 1]`, matching [`nodes`](Self::nodes); they sum to one.
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * len * f(a + len * t))
            .sum()
    }

    /// Integrates `f` element-by-element over the nonempty spans of `xi`.
    pub fn integrate_elements(&self, xi: &KnotVector, mut f: impl FnMut(f64) -> f64) -> f64 {
        xi.elements()
            .iter()
            .map(|e| self.integrate(e.lo, e.hi, &mut f))
            .sum()
    }
}

/// Norm tags for error evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorNorm {
    L2,
    #[serde(rename = "H1semi")]
    H1Semi,
    H1,
    Hdiv,
    Hcurl,
}

impl ErrorNorm {
    pub fn name(self) -> &'static str {
        match self {
            ErrorNorm::L2 => "L2",
            ErrorNorm::H1Semi => "H1semi",
            ErrorNorm::H1 => "H1",
            ErrorNorm::Hdiv => "Hdiv",
            ErrorNorm::Hcurl => "Hcurl",
        }
    }

    /// Whether the norm is defined for a role-`role` field in dimension `dim`.
    pub fn applies(self, dim: usize, role: usize) -> bool {
        match self {
            ErrorNorm::L2 => role <= dim,
            ErrorNorm::H1Semi | ErrorNorm::H1 => role == 0,
            ErrorNorm::Hdiv => (dim, role) == (2, 1) || (dim, role) == (3, 2),
            ErrorNorm::Hcurl => (dim, role) == (3, 1),
        }
    }
}

impl std::fmt::Display for ErrorNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which piece of the exact solution an error norm asks for: the field's
/// reference components, or the reference components of its exact
/// derivative (gradient for role 0, divergence/curl for the graph norms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactPart {
    Value,
    Derivative,
}

/// A bundle of per-norm error values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub entries: Vec<(ErrorNorm, f64)>,
}

impl ErrorReport {
    pub fn get(&self, norm: ErrorNorm) -> Option<f64> {
        self.entries.iter().find(|(n, _)| *n == norm).map(|&(_, v)| v)
    }

    /// Comma-separated norm names, for CSV headers.
    pub fn csv_header(&self) -> String {
        self.entries
            .iter()
            .map(|(n, _)| n.name())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Comma-separated error values, matching [`csv_header`](Self::csv_header).
    pub fn csv_row(&self) -> String {
        self.entries
            .iter()
            .map(|&(_, v)| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// The coefficient-level derivative of a discrete field (exact, never a
/// finite difference): curl/div on surfaces, grad/curl/div in volumes.
fn derivative_field(field: &CoefficientField) -> CoefficientField {
    let dim = field.space().parametric_dim();
    let role = field.space().role();
    let result = match (dim, role) {
        (2, 0) => curl_2d(field),
        (2, 1) => div_2d(field),
        (3, 0) => grad_3d(field),
        (3, 1) => curl_3d(field),
        (3, 2) => div_3d(field),
        _ => unreachable!("norm applicability rules out top roles"),
    };
    result.expect("derivative operators accept every non-top role")
}

fn quadrature_for(space: &ComplexSpace) -> Result<GaussRule, AnalysisError> {
    let p_max = space
        .parent_knots()
        .iter()
        .map(KnotVector::degree)
        .max()
        .expect("spaces have at least two axes");
    GaussRule::new((p_max + 2).min(MAX_GAUSS_POINTS))
}

/// `∫ ‖push(field − exact)‖² dμ` over the patch, with the physical measure
/// (κ on surfaces, |det dF| in volumes) and the role-appropriate
/// push-forward of the reference-coordinate difference.
fn integrate_physical(
    field: &CoefficientField,
    map: &PatchMap,
    mut exact: impl FnMut(usize, &[f64; 3]) -> f64,
) -> Result<f64, AnalysisError> {
    let space = field.space();
    let dim = space.parametric_dim();
    let role = space.role();
    let parents = space.parent_knots();
    let rule = quadrature_for(space)?;
    let mut acc = 0.0;
    let mut accumulate = |x: &[f64; 3], w: f64| -> Result<(), AnalysisError> {
        let mut delta = [0.0; 3];
        for c in 0..space.num_components() {
            delta[c] = field.eval_component(c, x) - exact(c, x);
        }
        let (pushed, measure) = if dim == 2 {
            (
                pushforward_surface(map, role, x, &delta)?,
                surface_measure(map, x)?,
            )
        } else {
            (
                pushforward_volume(map, role, x, &delta)?,
                jacobian_determinant(map, x)?.abs(),
            )
        };
        let norm2 = pushed[0] * pushed[0] + pushed[1] * pushed[1] + pushed[2] * pushed[2];
        acc += w * measure * norm2;
        Ok(())
    };
    match dim {
        2 => {
            for e0 in parents[0].elements() {
                for e1 in parents[1].elements() {
                    let vol = (e0.hi - e0.lo) * (e1.hi - e1.lo);
                    for (i0, &t0) in rule.nodes().iter().enumerate() {
                        for (i1, &t1) in rule.nodes().iter().enumerate() {
                            let x = [e0.lo + (e0.hi - e0.lo) * t0, e1.lo + (e1.hi - e1.lo) * t1, 0.0];
                            accumulate(&x, rule.weights()[i0] * rule.weights()[i1] * vol)?;
                        }
                    }
                }
            }
        }
        3 => {
            for e0 in parents[0].elements() {
                for e1 in parents[1].elements() {
                    for e2 in parents[2].elements() {
                        let vol = (e0.hi - e0.lo) * (e1.hi - e1.lo) * (e2.hi - e2.lo);
                        for (i0, &t0) in rule.nodes().iter().enumerate() {
                            for (i1, &t1) in rule.nodes().iter().enumerate() {
                                for (i2, &t2) in rule.nodes().iter().enumerate() {
                                    let x = [
                                        e0.lo + (e0.hi - e0.lo) * t0,
                                        e1.lo + (e1.hi - e1.lo) * t1,
                                        e2.lo + (e2.hi - e2.lo) * t2,
                                    ];
                                    let w =
                                        rule.weights()[i0] * rule.weights()[i1] * rule.weights()[i2];
                                    accumulate(&x, w * vol)?;
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!("validated dimension"),
    }
    Ok(acc)
}

fn error_norm_squared<F: FnMut(ExactPart, usize, &[f64; 3]) -> f64>(
    field: &CoefficientField,
    map: &PatchMap,
    norm: ErrorNorm,
    exact: &mut F,
) -> Result<f64, AnalysisError> {
    let dim = field.space().parametric_dim();
    let role = field.space().role();
    if !norm.applies(dim, role) {
        return Err(AnalysisError::NormUndefined {
            norm: norm.name(),
            role,
            dim,
        });
    }
    match norm {
        ErrorNorm::L2 => integrate_physical(field, map, |c, x| exact(ExactPart::Value, c, x)),
        ErrorNorm::H1Semi => {
            let d = derivative_field(field);
            integrate_physical(&d, map, |c, x| exact(ExactPart::Derivative, c, x))
        }
        ErrorNorm::H1 => Ok(error_norm_squared(field, map, ErrorNorm::L2, exact)?
            + error_norm_squared(field, map, ErrorNorm::H1Semi, exact)?),
        ErrorNorm::Hdiv | ErrorNorm::Hcurl => {
            let value_part = integrate_physical(field, map, |c, x| exact(ExactPart::Value, c, x))?;
            let d = derivative_field(field);
            let derivative_part =
                integrate_physical(&d, map, |c, x| exact(ExactPart::Derivative, c, x))?;
            Ok(value_part + derivative_part)
        }
    }
}

/// Physical-domain error norm of a discrete field against an exact solution
/// given in reference coordinates: `exact(part, component, x)` must return
/// the reference components of the solution (`Value`) and, for the H¹ and
/// graph norms, of its exact derivative (`Derivative`). Discrete derivatives
/// are taken at coefficient level; quadrature uses max degree + 2 points.
pub fn error_norm(
    field: &CoefficientField,
    map: &PatchMap,
    norm: ErrorNorm,
    mut exact: impl FnMut(ExactPart, usize, &[f64; 3]) -> f64,
) -> Result<f64, AnalysisError> {
    error_norm_squared(field, map, norm, &mut exact).map(f64::sqrt)
}

/// Patchwise norm on a multipatch geometry: `√(Σ_patches ‖·‖²_patch)`, with
/// `exact(patch, part, component, x)` in each patch's reference coordinates.
pub fn error_norm_global(
    field: &GlobalField,
    norm: ErrorNorm,
    mut exact: impl FnMut(usize, ExactPart, usize, &[f64; 3]) -> f64,
) -> Result<f64, AnalysisError> {
    let geom = field.space().geometry();
    let mut total = 0.0;
    for patch in 0..geom.num_patches() {
        let restricted = field
            .restrict(patch)
            .expect("patch indices below num_patches are always valid");
        let map = &geom.patches()[patch];
        total += error_norm_squared(&restricted, map, norm, &mut |part, c, x| {
            exact(patch, part, c, x)
        })?;
    }
    Ok(total.sqrt())
}

/// Evaluates several norms of the same field into one report.
pub fn error_report(
    field: &CoefficientField,
    map: &PatchMap,
    norms: &[ErrorNorm],
    mut exact: impl FnMut(ExactPart, usize, &[f64; 3]) -> f64,
) -> Result<ErrorReport, AnalysisError> {
    let entries = norms
        .iter()
        .map(|&norm| error_norm_squared(field, map, norm, &mut exact).map(|e| (norm, e.sqrt())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ErrorReport { entries })
}

/// The κ- (or |det dF|-) weighted *reference* L² error: component-wise
/// differences integrated with the physical measure but without the
/// push-forward. Equivalent to the physical norm up to metric constants.
pub fn reference_l2_error(
    field: &CoefficientField,
    map: &PatchMap,
    mut exact: impl FnMut(usize, &[f64; 3]) -> f64,
) -> Result<f64, AnalysisError> {
    let space = field.space();
    let dim = space.parametric_dim();
    let parents = space.parent_knots();
    let rule = quadrature_for(space)?;
    let mut acc = 0.0;
    match dim {
        2 => {
            for e0 in parents[0].elements() {
                for e1 in parents[1].elements() {
                    let vol = (e0.hi - e0.lo) * (e1.hi - e1.lo);
                    for (i0, &t0) in rule.nodes().iter().enumerate() {
                        for (i1, &t1) in rule.nodes().iter().enumerate() {
                            let x = [e0.lo + (e0.hi - e0.lo) * t0, e1.lo + (e1.hi - e1.lo) * t1, 0.0];
                            let w = rule.weights()[i0] * rule.weights()[i1] * vol;
                            let mut norm2 = 0.0;
                            for c in 0..space.num_components() {
                                let d = field.eval_component(c, &x) - exact(c, &x);
                                norm2 += d * d;
                            }
                            acc += w * surface_measure(map, &x)? * norm2;
                        }
                    }
                }
            }
        }
        3 => {
            for e0 in parents[0].elements() {
                for e1 in parents[1].elements() {
                    for e2 in parents[2].elements() {
                        let vol = (e0.hi - e0.lo) * (e1.hi - e1.lo) * (e2.hi - e2.lo);
                        for (i0, &t0) in rule.nodes().iter().enumerate() {
                            for (i1, &t1) in rule.nodes().iter().enumerate() {
                                for (i2, &t2) in rule.nodes().iter().enumerate() {
                                    let x = [
                                        e0.lo + (e0.hi - e0.lo) * t0,
                                        e1.lo + (e1.hi - e1.lo) * t1,
                                        e2.lo + (e2.hi - e2.lo) * t2,
                                    ];
                                    let w =
                                        rule.weights()[i0] * rule.weights()[i1] * rule.weights()[i2];
                                    let mut norm2 = 0.0;
                                    for c in 0..space.num_components() {
                                        let d = field.eval_component(c, &x) - exact(c, &x);
                                        norm2 += d * d;
                                    }
                                    acc += w * vol * jacobian_determinant(map, &x)?.abs() * norm2;
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!("validated dimension"),
    }
    Ok(acc.sqrt())
}

/// An L²-orthogonal projection together with its measured orthogonality
/// defect `max_i |⟨f − Pf, b_i⟩|` (the solved system's residual).
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub field: CoefficientField,
    pub orthogonality_residual: f64,
}

/// Like [`ProjectionResult`], for a global multipatch space.
#[derive(Debug, Clone)]
pub struct GlobalProjectionResult {
    pub field: GlobalField,
    pub orthogonality_residual: f64,
}

/// Runs the element loop of the physical L² inner product on one patch,
/// emitting Gram and right-hand-side contributions indexed by the patch's
/// flat `(component, tensor index)` numbering.
fn assemble_l2_system(
    space: &ComplexSpace,
    map: &PatchMap,
    mut f: impl FnMut(usize, &[f64; 3]) -> f64,
    mut emit_matrix: impl FnMut(usize, usize, f64),
    mut emit_rhs: impl FnMut(usize, f64),
) -> Result<(), AnalysisError> {
    use crate::bspline::eval_basis;
    let dim = space.parametric_dim();
    let role = space.role();
    let ncomp = space.num_components();
    let mut offsets = Vec::with_capacity(ncomp);
    let mut total = 0usize;
    for c in 0..ncomp {
        offsets.push(total);
        total += space
            .component_dim(c)
            .expect("components below num_components are always valid");
    }
    let rule = quadrature_for(space)?;
    let parents = space.parent_knots();

    let mut point = |x: &[f64; 3], w: f64| -> Result<(), AnalysisError> {
        let measure = if dim == 2 {
            surface_measure(map, x)?
        } else {
            jacobian_determinant(map, x)?.abs()
        };
        // Metric M_{cc'} = ⟨push(e_c), push(e_{c'})⟩ at this point.
        let mut metric = [[0.0f64; 3]; 3];
        let mut columns = [[0.0f64; 3]; 3];
        for c in 0..ncomp {
            let mut e = [0.0; 3];
            e[c] = 1.0;
            columns[c] = if dim == 2 {
                pushforward_surface(map, role, x, &e)?
            } else {
                pushforward_volume(map, role, x, &e)?
            };
        }
        for c in 0..ncomp {
            for cc in 0..ncomp {
                metric[c][cc] = columns[c][0] * columns[cc][0]
                    + columns[c][1] * columns[cc][1]
                    + columns[c][2] * columns[cc][2];
            }
        }
        // Active basis functions per component: (flat local index, value).
        let mut active: Vec<Vec<(usize, f64)>> = Vec::with_capacity(ncomp);
        for c in 0..ncomp {
            let factors = space
                .factors(c)
                .expect("components below num_components are always valid");
            let per_axis: Vec<(usize, Vec<f64>)> = factors
                .iter()
                .enumerate()
                .map(|(a, xi)| eval_basis(xi, x[a]))
                .collect();
            let shape: Vec<usize> = factors.iter().map(KnotVector::dim).collect();
            let mut list = Vec::new();
            match dim {
                2 => {
                    for (i, &vi) in per_axis[0].1.iter().enumerate() {
                        for (j, &vj) in per_axis[1].1.iter().enumerate() {
                            let flat = (per_axis[0].0 + i) * shape[1] + per_axis[1].0 + j;
                            list.push((offsets[c] + flat, vi * vj));
                        }
                    }
                }
                3 => {
                    for (i, &vi) in per_axis[0].1.iter().enumerate() {
                        for (j, &vj) in per_axis[1].1.iter().enumerate() {
                            for (k, &vk) in per_axis[2].1.iter().enumerate() {
                                let flat = ((per_axis[0].0 + i) * shape[1] + per_axis[1].0 + j)
                                    * shape[2]
                                    + per_axis[2].0
                                    + k;
                                list.push((offsets[c] + flat, vi * vj * vk));
                            }
                        }
                    }
                }
                _ => unreachable!("validated dimension"),
            }
            active.push(list);
        }
        let f_values: Vec<f64> = (0..ncomp).map(|c| f(c, x)).collect();
        let q = w * measure;
        for c in 0..ncomp {
            for &(ia, va) in &active[c] {
                let mut rhs = 0.0;
                for cc in 0..ncomp {
                    rhs += metric[c][cc] * f_values[cc];
                    for &(ib, vb) in &active[cc] {
                        emit_matrix(ia, ib, q * metric[c][cc] * va * vb);
                    }
                }
                emit_rhs(ia, q * va * rhs);
            }
        }
        Ok(())
    };

    match dim {
        2 => {
            for e0 in parents[0].elements() {
                for e1 in parents[1].elements() {
                    let vol = (e0.hi - e0.lo) * (e1.hi - e1.lo);
                    for (i0, &t0) in rule.nodes().iter().enumerate() {
                        for (i1, &t1) in rule.nodes().iter().enumerate() {
                            let x = [e0.lo + (e0.hi - e0.lo) * t0, e1.lo + (e1.hi - e1.lo) * t1, 0.0];
                            point(&x, rule.weights()[i0] * rule.weights()[i1] * vol)?;
                        }
                    }
                }
            }
        }
        3 => {
            for e0 in parents[0].elements() {
                for e1 in parents[1].elements() {
                    for e2 in parents[2].elements() {
                        let vol = (e0.hi - e0.lo) * (e1.hi - e1.lo) * (e2.hi - e2.lo);
                        for (i0, &t0) in rule.nodes().iter().enumerate() {
                            for (i1, &t1) in rule.nodes().iter().enumerate() {
                                for (i2, &t2) in rule.nodes().iter().enumerate() {
                                    let x = [
                                        e0.lo + (e0.hi - e0.lo) * t0,
                                        e1.lo + (e1.hi - e1.lo) * t1,
                                        e2.lo + (e2.hi - e2.lo) * t2,
                                    ];
                                    let w =
                                        rule.weights()[i0] * rule.weights()[i1] * rule.weights()[i2];
                                    point(&x, w * vol)?;
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!("validated dimension"),
    }
    Ok(())
}

/// The physical L² Gram matrix of a component space on one patch
/// (symmetric positive definite for non-degenerate geometry).
pub fn l2_gram(space: &ComplexSpace, map: &PatchMap) -> Result<DMatrix<f64>, AnalysisError> {
    let n = space.total_dim();
    let mut gram = DMatrix::zeros(n, n);
    assemble_l2_system(
        space,
        map,
        |_, _| 0.0,
        |i, j, v| gram[(i, j)] += v,
        |_, _| {},
    )?;
    Ok(gram)
}

/// L²-orthogonal projection of a reference-coordinate function onto a
/// single-patch space, with the physical measure. Dense Cholesky solve.
pub fn l2_project(
    space: &ComplexSpace,
    map: &PatchMap,
    f: impl FnMut(usize, &[f64; 3]) -> f64,
) -> Result<ProjectionResult, AnalysisError> {
    let n = space.total_dim();
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    assemble_l2_system(
        space,
        map,
        f,
        |i, j, v| gram[(i, j)] += v,
        |i, v| rhs[i] += v,
    )?;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(AnalysisError::GramNotSpd { dim: n })?;
    let solution = chol.solve(&rhs);
    let orthogonality_residual = (&rhs - &gram * &solution).amax();
    let mut data = Vec::with_capacity(space.num_components());
    let mut cursor = 0usize;
    for c in 0..space.num_components() {
        let len = space
            .component_dim(c)
            .expect("components below num_components are always valid");
        data.push(solution.as_slice()[cursor..cursor + len].to_vec());
        cursor += len;
    }
    Ok(ProjectionResult {
        field: CoefficientField::new(space.clone(), data)
            .expect("solution vector is partitioned to the component shapes"),
        orthogonality_residual,
    })
}

/// L²-orthogonal projection onto a conforming global multipatch space:
/// the Gram matrix is assembled patchwise through the signed
/// local-to-global map, so the projection respects the interface coupling.
pub fn l2_project_global(
    space: &GlobalSpace,
    mut f: impl FnMut(usize, usize, &[f64; 3]) -> f64,
) -> Result<GlobalProjectionResult, AnalysisError> {
    let n = space.global_dim();
    let geom = space.geometry();
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for patch in 0..geom.num_patches() {
        let role_space = space.complexes()[patch]
            .role(space.role())
            .expect("a global space only exists for roles its complexes carry");
        // Local flat numbering → (global index, sign).
        let mut lookup = Vec::with_capacity(role_space.total_dim());
        for c in 0..role_space.num_components() {
            let len = role_space
                .component_dim(c)
                .expect("components below num_components are always valid");
            for flat in 0..len {
                lookup.push(
                    space
                        .local_to_global(patch, c, flat)
                        .expect("in-range patch/component/flat indices map to a global index"),
                );
            }
        }
        assemble_l2_system(
            role_space,
            &geom.patches()[patch],
            |c, x| f(patch, c, x),
            |i, j, v| {
                let (gi, si) = lookup[i];
                let (gj, sj) = lookup[j];
                gram[(gi, gj)] += si * sj * v;
            },
            |i, v| {
                let (gi, si) = lookup[i];
                rhs[gi] += si * v;
            },
        )?;
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(AnalysisError::GramNotSpd { dim: n })?;
    let solution = chol.solve(&rhs);
    let orthogonality_residual = (&rhs - &gram * &solution).amax();
    Ok(GlobalProjectionResult {
        field: GlobalField::new(space.clone(), solution.as_slice().to_vec())
            .expect("solution vector has the global dimension"),
        orthogonality_residual,
    })
}
