//! Open knot vectors on the unit interval and their combinatorial queries.
//!
//! A degree-`p` spline space on `[0, 1]` is described by a *p-open* knot
//! vector `Ξ = (ξ₀, …, ξ_{k+p})`: non-decreasing, first and last `p + 1`
//! knots clamped to `0` and `1`, interior multiplicities bounded so the
//! basis stays at least continuous. The space dimension is
//! `k = #knots − p − 1`.
//!
//! Knot values constructed by this library (uniform vectors, dyadic
//! refinements) are exact binary fractions, so repeated refinement and
//! cross-patch knot comparison remain exact in floating point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for knot equality across patch interfaces.
pub const KNOT_MATCH_TOL: f64 = 1e-14;

/// Default constant for local quasi-uniformity checks in study drivers.
/// A violation downgrades to a warning there: quasi-uniformity is an
/// analysis hypothesis, not an evaluation precondition.
pub const DEFAULT_THETA: f64 = 4.0;

/// Errors from knot-vector construction and queries.
#[derive(Debug, Error)]
pub enum KnotError {
    #[error("degree {degree} needs at least {need} knots, got {got}")]
    TooFewKnots {
        degree: usize,
        need: usize,
        got: usize,
    },
    #[error("knots must be non-decreasing (knot[{index}] = {value} drops below its predecessor {previous})")]
    NotSorted {
        index: usize,
        value: f64,
        previous: f64,
    },
    #[error("knot[{index}] = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("knot vector is not {degree}-open: the first and last {} knots must equal 0 and 1", degree + 1)]
    NotOpen { degree: usize },
    #[error("interior knot {value} has multiplicity {multiplicity}, allowed at most {max}")]
    MultiplicityTooHigh {
        value: f64,
        multiplicity: usize,
        max: usize,
    },
    #[error("knot value {value} is not finite")]
    NotFinite { value: f64 },
    #[error("operation requires degree >= 1, got degree 0")]
    DegreeZero,
    #[error("element index {index} is not a nonempty element of this knot vector")]
    NoSuchElement { index: usize },
    #[error("quasi-uniformity constant must satisfy theta >= 1, got {theta}")]
    InvalidTheta { theta: f64 },
}

/// A nonempty element (knot span) `[ξ_i, ξ_{i+1}]` with `ξ_i < ξ_{i+1}`.
///
/// `index` is the position `i` of the left knot inside the full knot array,
/// so repeated knots leave gaps in the element indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Element {
    /// Element length `h_i = ξ_{i+1} − ξ_i`.
    #[inline]
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A `p`-open knot vector on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnotVector", into = "RawKnotVector")]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

/// Serialization mirror of [`KnotVector`]; deserialization re-validates.
#[derive(Serialize, Deserialize)]
struct RawKnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<RawKnotVector> for KnotVector {
    type Error = KnotError;

    fn try_from(raw: RawKnotVector) -> Result<Self, KnotError> {
        KnotVector::new(raw.degree, raw.knots)
    }
}

impl From<KnotVector> for RawKnotVector {
    fn from(xi: KnotVector) -> Self {
        RawKnotVector {
            degree: xi.degree,
            knots: xi.knots,
        }
    }
}

impl KnotVector {
    /// Validates and wraps a `p`-open knot vector.
    ///
    /// Requirements: at least `2(p+1)` knots, non-decreasing values in
    /// `[0, 1]`, first and last `p+1` knots exactly `0` and `1`, and interior
    /// multiplicity at most `max(p, 1)` (so degree-0 vectors, which arise as
    /// truncations, may still carry simple interior knots).
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, KnotError> {
        let need = 2 * (degree + 1);
        if knots.len() < need {
            return Err(KnotError::TooFewKnots {
                degree,
                need,
                got: knots.len(),
            });
        }
        for (i, &x) in knots.iter().enumerate() {
            if !x.is_finite() {
                return Err(KnotError::NotFinite { value: x });
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(KnotError::OutOfRange { index: i, value: x });
            }
            if i > 0 && x < knots[i - 1] {
                return Err(KnotError::NotSorted {
                    index: i,
                    value: x,
                    previous: knots[i - 1],
                });
            }
        }
        // Exactly p + 1 clamped knots at each end: enough for openness, and
        // no more, so that every derivative denominator ξ_{i+p+1} − ξ_{i+1}
        // stays positive.
        let zeros = knots.iter().filter(|&&x| x == 0.0).count();
        let ones = knots.iter().filter(|&&x| x == 1.0).count();
        if zeros != degree + 1 || ones != degree + 1 {
            return Err(KnotError::NotOpen { degree });
        }
        // Interior multiplicity: scan runs of equal values strictly inside (0, 1).
        let max_mult = degree.max(1);
        let mut run_start = 0;
        for i in 1..=knots.len() {
            if i == knots.len() || knots[i] != knots[run_start] {
                let value = knots[run_start];
                let mult = i - run_start;
                if value > 0.0 && value < 1.0 && mult > max_mult {
                    return Err(KnotError::MultiplicityTooHigh {
                        value,
                        multiplicity: mult,
                        max: max_mult,
                    });
                }
                run_start = i;
            }
        }
        Ok(KnotVector { degree, knots })
    }

    /// Internal constructor for vectors whose validity is inherited from an
    /// already-validated parent (e.g. truncation, which may legitimately
    /// exceed the interior-multiplicity bound of its own degree).
    pub(crate) fn new_unchecked(degree: usize, knots: Vec<f64>) -> Self {
        debug_assert!(knots.len() >= 2 * (degree + 1));
        KnotVector { degree, knots }
    }

    /// Uniform `p`-open vector with `elements >= 1` equal elements.
    ///
    /// Interior knots are `i / elements`, exact binary fractions whenever
    /// `elements` is a power of two.
    pub fn open_uniform(degree: usize, elements: usize) -> Self {
        assert!(elements >= 1, "need at least one element");
        let mut knots = Vec::with_capacity(elements + 1 + 2 * degree);
        knots.extend(std::iter::repeat(0.0).take(degree));
        for i in 0..=elements {
            knots.push(i as f64 / elements as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(degree));
        KnotVector {
            degree,
            knots,
        }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Dimension `k` of the spline space spanned over this vector.
    #[inline]
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// The nonempty elements (knot spans) in ascending order.
    pub fn elements(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for i in 0..self.knots.len() - 1 {
            if self.knots[i + 1] > self.knots[i] {
                out.push(Element {
                    index: i,
                    lo: self.knots[i],
                    hi: self.knots[i + 1],
                });
            }
        }
        out
    }

    pub fn element_count(&self) -> usize {
        self.knots
            .windows(2)
            .filter(|w| w[1] > w[0])
            .count()
    }

    /// Mesh size `h`: the largest element length.
    pub fn mesh_size(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Companion to [`mesh_size`](Self::mesh_size): the largest
    /// support-extension length `h̃` over all elements.
    pub fn max_support_extension(&self) -> f64 {
        self.elements()
            .iter()
            .map(|e| {
                let (lo, hi) = self
                    .support_extension(e)
                    .expect("element from enumeration is valid");
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Support extension `Q̃` of an element `Q = [ξ_i, ξ_{i+1}]`: the union of
    /// the supports of all basis functions that do not vanish on `Q`, which is
    /// the interval `[ξ_{i−p}, ξ_{i+p+1}]`.
    pub fn support_extension(&self, element: &Element) -> Result<(f64, f64), KnotError> {
        let i = element.index;
        let valid = i + 1 < self.knots.len() && self.knots[i + 1] > self.knots[i];
        if !valid {
            return Err(KnotError::NoSuchElement { index: i });
        }
        // A nonempty span of a p-open vector always satisfies p <= i <= k-1,
        // so both indices below are in range.
        debug_assert!(i >= self.degree && i + self.degree + 1 < self.knots.len());
        Ok((
            self.knots[i - self.degree],
            self.knots[i + self.degree + 1],
        ))
    }

    /// Local quasi-uniformity: every pair of neighbouring nonempty elements
    /// satisfies `θ⁻¹ ≤ h_{i} / h_{j} ≤ θ`. Comparison carries a `1e-12`
    /// relative slack so boundary-ratio cases are not lost to rounding.
    pub fn is_locally_quasi_uniform(&self, theta: f64) -> Result<bool, KnotError> {
        if !(theta >= 1.0) {
            return Err(KnotError::InvalidTheta { theta });
        }
        let elements = self.elements();
        let bound = theta * (1.0 + 1e-12);
        Ok(elements.windows(2).all(|pair| {
            let ratio = pair[1].length() / pair[0].length();
            ratio <= bound && 1.0 / ratio <= bound
        }))
    }

    /// The truncation `Ξ′`: this vector without its first and last knot,
    /// which is `(p−1)`-open for degree `p − 1`. The spline space over `Ξ′`
    /// has exactly one dimension fewer.
    pub fn truncate(&self) -> Result<KnotVector, KnotError> {
        if self.degree == 0 {
            return Err(KnotError::DegreeZero);
        }
        let inner = self.knots[1..self.knots.len() - 1].to_vec();
        Ok(KnotVector::new_unchecked(self.degree - 1, inner))
    }

    /// Global dyadic refinement: inserts the midpoint of every nonempty
    /// element once. Preserves openness, interior multiplicities, and the
    /// local quasi-uniformity constant; halves the mesh size of uniform
    /// vectors exactly.
    pub fn refine_dyadic(&self) -> KnotVector {
        let mut knots = Vec::with_capacity(self.knots.len() + self.element_count());
        for i in 0..self.knots.len() - 1 {
            knots.push(self.knots[i]);
            if self.knots[i + 1] > self.knots[i] {
                knots.push(0.5 * (self.knots[i] + self.knots[i + 1]));
            }
        }
        knots.push(*self.knots.last().expect("validated vector is nonempty"));
        KnotVector {
            degree: self.degree,
            knots,
        }
    }

    /// Index `i` of the nonempty span with `ξ_i ≤ x < ξ_{i+1}` (right-continuous);
    /// `x = 1` lands in the last nonempty span.
    pub fn find_span(&self, x: f64) -> usize {
        debug_assert!((0.0..=1.0).contains(&x));
        let k = self.dim();
        if x >= 1.0 {
            // Last nonempty span: walk left over the trailing clamp.
            let mut i = k - 1;
            while self.knots[i + 1] <= self.knots[i] {
                i -= 1;
            }
            return i;
        }
        // Binary search over spans [degree, k-1].
        let (mut lo, mut hi) = (self.degree, k - 1);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.knots[mid] <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Multiplicity of `value` among the knots (exact comparison).
    pub fn multiplicity(&self, value: f64) -> usize {
        self.knots.iter().filter(|&&x| x == value).count()
    }

    /// The distinct knot values `0 = b₀ < b₁ < … < b_m = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.knots[0]];
        for &x in &self.knots[1..] {
            if x > *out.last().expect("nonempty") {
                out.push(x);
            }
        }
        out
    }

    /// Greville abscissae `γ_i = (ξ_{i+1} + … + ξ_{i+p}) / p`, one per basis
    /// function; element midpoints for degree 0.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return self
                .knots
                .windows(2)
                .map(|w| 0.5 * (w[0] + w[1]))
                .collect();
        }
        (0..self.dim())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// The mirror image `ξ ↦ 1 − ξ` with order reversed; used when matching
    /// interface knots of opposite orientation.
    pub fn reversed(&self) -> KnotVector {
        let knots = self.knots.iter().rev().map(|&x| 1.0 - x).collect();
        KnotVector {
            degree: self.degree,
            knots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(degree: usize, knots: &[f64]) -> KnotVector {
        KnotVector::new(degree, knots.to_vec()).expect("valid test vector")
    }

    #[test]
    fn rejects_malformed_vectors() {
        assert!(matches!(
            KnotVector::new(1, vec![0.0, 0.0, 1.0]),
            Err(KnotError::TooFewKnots { .. })
        ));
        assert!(matches!(
            KnotVector::new(1, vec![0.0, 0.0, 0.6, 0.4, 1.0, 1.0]),
            Err(KnotError::NotSorted { .. })
        ));
        assert!(matches!(
            KnotVector::new(1, vec![0.0, 0.5, 1.0, 1.0]),
            Err(KnotError::NotOpen { .. })
        ));
        assert!(matches!(
            KnotVector::new(1, vec![0.0, 0.0, 0.5, 0.5, 1.0, 1.0]),
            Err(KnotError::MultiplicityTooHigh { .. })
        ));
        assert!(matches!(
            KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.5, 1.0, 1.0, 1.0]),
            Err(KnotError::OutOfRange { .. })
        ));
    }

    #[test]
    fn accepts_interior_multiplicity_up_to_degree() {
        // Double interior knot at degree 2 gives a C⁰ kink; still valid.
        let xi = kv(2, &[0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(xi.dim(), 5);
        assert_eq!(xi.element_count(), 2);
    }

    #[test]
    fn mesh_size_examples() {
        assert_eq!(kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]).mesh_size(), 0.5);
        assert_eq!(kv(2, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).mesh_size(), 1.0);
        assert_eq!(kv(1, &[0.0, 0.0, 0.25, 1.0, 1.0]).mesh_size(), 0.75);
    }

    #[test]
    fn quasi_uniformity_threshold() {
        let xi = kv(1, &[0.0, 0.0, 0.25, 1.0, 1.0]);
        assert!(!xi.is_locally_quasi_uniform(2.0).unwrap());
        assert!(xi.is_locally_quasi_uniform(3.0).unwrap());
        let uniform = KnotVector::open_uniform(2, 8);
        assert!(uniform.is_locally_quasi_uniform(1.0).unwrap());
        assert!(matches!(
            xi.is_locally_quasi_uniform(0.5),
            Err(KnotError::InvalidTheta { .. })
        ));
    }

    #[test]
    fn truncation_drops_one_dimension() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let trunc = xi.truncate().unwrap();
        assert_eq!(trunc.degree(), 1);
        assert_eq!(trunc.knots(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(trunc.dim(), xi.dim() - 1);

        let xi = kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert_eq!(xi.truncate().unwrap().knots(), &[0.0, 0.5, 1.0]);

        let xi = kv(3, &[0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            xi.truncate().unwrap().knots(),
            &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]
        );
        assert_eq!(xi.truncate().unwrap().dim(), xi.dim() - 1);

        let constant = kv(0, &[0.0, 1.0]);
        assert!(matches!(constant.truncate(), Err(KnotError::DegreeZero)));
    }

    #[test]
    fn support_extension_examples() {
        // Degree 0: the support extension is the element itself.
        let xi = kv(0, &[0.0, 0.5, 1.0]);
        let elems = xi.elements();
        assert_eq!(xi.support_extension(&elems[0]).unwrap(), (0.0, 0.5));

        // Degree 1 with one interior knot: both elements extend to [0, 1].
        let xi = kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]);
        let elems = xi.elements();
        assert_eq!(xi.support_extension(&elems[0]).unwrap(), (0.0, 1.0));
        assert_eq!(xi.max_support_extension(), 1.0);

        // Single element: extension is the whole interval.
        let xi = kv(2, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let elems = xi.elements();
        assert_eq!(xi.support_extension(&elems[0]).unwrap(), (0.0, 1.0));

        // Bogus element index errors.
        let bogus = Element {
            index: 97,
            lo: 0.0,
            hi: 1.0,
        };
        assert!(matches!(
            xi.support_extension(&bogus),
            Err(KnotError::NoSuchElement { .. })
        ));
    }

    #[test]
    fn support_extension_spans_at_most_2p_plus_1_elements() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 0.2, 0.4, 0.4, 0.7, 1.0, 1.0, 1.0]);
        for e in xi.elements() {
            let (lo, hi) = xi.support_extension(&e).unwrap();
            assert!(lo <= e.lo && e.hi <= hi);
            let covered = xi
                .elements()
                .iter()
                .filter(|q| q.lo >= lo && q.hi <= hi)
                .count();
            assert!(covered <= 2 * xi.degree() + 1);
        }
    }

    #[test]
    fn dyadic_refinement_examples() {
        let xi = kv(1, &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(xi.refine_dyadic().knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);

        let xi = kv(1, &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert_eq!(
            xi.refine_dyadic().knots(),
            &[0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0]
        );

        let uniform = KnotVector::open_uniform(2, 4);
        let fine = uniform.refine_dyadic();
        assert_eq!(fine.mesh_size(), 0.5 * uniform.mesh_size());
        assert!(fine.dim() > uniform.dim());
    }

    #[test]
    fn find_span_is_right_continuous() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.75, 1.0, 1.0, 1.0]);
        assert_eq!(xi.find_span(0.0), 2);
        assert_eq!(xi.find_span(0.25), 3);
        // At the doubled knot 0.5 the span jumps past the empty span.
        assert_eq!(xi.find_span(0.5), 5);
        assert_eq!(xi.find_span(1.0), 6);
        for &x in &[0.1, 0.3, 0.6, 0.9] {
            let i = xi.find_span(x);
            assert!(xi.knots()[i] <= x && x < xi.knots()[i + 1]);
        }
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let xi = kv(2, &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        let json = serde_json::to_string(&xi).unwrap();
        let back: KnotVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, xi);

        let bad = r#"{"degree": 1, "knots": [0.0, 0.5, 1.0, 1.0]}"#;
        assert!(serde_json::from_str::<KnotVector>(bad).is_err());
    }

    #[test]
    fn reversed_mirrors_knots() {
        let xi = kv(1, &[0.0, 0.0, 0.25, 1.0, 1.0]);
        assert_eq!(xi.reversed().knots(), &[0.0, 0.0, 0.75, 1.0, 1.0]);
        let sym = KnotVector::open_uniform(2, 4);
        assert_eq!(sym.reversed(), sym);
    }
}
