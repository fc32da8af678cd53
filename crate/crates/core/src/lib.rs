//! Conforming multipatch B-spline discretisations of the de Rham complex.
//!
//! This crate builds the graded tensor-product spline spaces
//!
//! ```text
//! 2D (surface):  S⁰ ──curl──► S¹ ──div──► S²
//! 3D (volume):   S⁰ ──grad──► S¹ ──curl──► S² ──div──► S³
//! ```
//!
//! together with the quasi-interpolation operators that make the diagrams
//! commute: the local-projection operator `Π`, its endpoint-interpolating
//! variant `Π̃`, and the derivative-compatible `Π̃^∂ = ∂ ∘ Π̃ ∘ ∫`. The
//! differential operators act exactly at coefficient level, so `div ∘ curl`
//! and `curl ∘ grad` vanish identically and commuting-diagram residuals are
//! limited only by quadrature.
//!
//! On top of the single-patch machinery sit multipatch geometries (affine,
//! analytic, and NURBS patches mapping into ℝ³), conforming global spaces
//! with interface DOF identification, physical-domain error norms, and a
//! convergence-study driver that estimates observed orders against the
//! expected `h^s` rates.
//!
//! # Example
//!
//! ```
//! use derham::knots::KnotVector;
//! use derham::complex::{SplineComplex, OperatorKind, interpolate, curl_2d};
//!
//! let xi = KnotVector::open_uniform(2, 4);
//! let cx = SplineComplex::new(&[2, 2], vec![xi.clone(), xi]).unwrap();
//!
//! // Interpolate a scalar onto S⁰ and push it through the discrete curl.
//! let f = |_c: usize, x: &[f64; 3]| (x[0] * x[1]).sin();
//! let f0 = interpolate(&cx, 0, OperatorKind::Endpoint, f).unwrap();
//! let f1 = curl_2d(&f0).unwrap();
//! assert_eq!(f1.component(0).len(), cx.role_dim(1).unwrap() / 2);
//! ```

pub mod analysis;
pub mod bspline;
pub mod complex;
pub mod convergence;
pub mod geometry;
pub mod knots;
pub mod multipatch;
pub mod quasi_interp;
mod tensor;

pub use analysis::{ErrorNorm, ErrorReport, GaussRule};
pub use bspline::Spline1D;
pub use complex::{CoefficientField, OperatorKind, SplineComplex};
pub use convergence::{run_study, StudyConfig, StudySummary};
pub use geometry::{MultipatchGeometry, PatchMap};
pub use knots::{Element, KnotVector};
pub use multipatch::{GlobalField, GlobalSpace};
pub use quasi_interp::QuasiInterpolant;
