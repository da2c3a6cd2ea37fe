//! Arithmetic in the motion group of a trivially fibered Seifert block.
//!
//! Isotopy classes of fiber-preserving motions form a central extension
//!
//! ```text
//! 0 → R → Mot → PSL(2, R) → 1
//! ```
//!
//! realized here as pairs `(proj, central)`: a projective class acting on the
//! circle of directions, together with a central coordinate recording winding
//! in the universal cover. The group law twists the central coordinates by an
//! integer cocycle computed from lifted circle maps,
//!
//! ```text
//! (A, t) · (B, u) = (A·B, t + u + c(A, B)),
//! ```
//!
//! so the extension is *not* a direct product: squaring the half-turn
//! `k(1/2)` already lands on the central element `(id, 1)`.
//!
//! Central coordinates are exact rationals. Products of elements built by the
//! symbolic constructors ([`MotionElement::central`], [`MotionElement::rotation`])
//! keep the central part exact because the cocycle is then evaluated over the
//! rationals rather than through floating-point lifts; this is what makes
//! central roots and projective order tests decidable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;
use thiserror::Error;

/// Numeric comparison thresholds used throughout the motion-group layer.
///
/// All are absolute. `det` bounds determinant drift after normalization,
/// `trace` is the half-width of the parabolic band around `|tr| = 2` (and of
/// the identity neighborhood), `comm` bounds commutator distance from the
/// identity class, `rot` is the tolerance for matching a numeric rotation
/// number against a rational, and `angle` guards branch selection when
/// lifting circle maps.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub det: f64,
    pub trace: f64,
    pub comm: f64,
    pub rot: f64,
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            det: 1e-12,
            trace: 1e-9,
            comm: 1e-9,
            rot: 1e-9,
            angle: 1e-12,
        }
    }
}

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix determinant {0} is not positive; the class does not preserve orientation")]
    NonPositiveDeterminant(f64),
    #[error(
        "central root requires a central element (projective part must be the identity class)"
    )]
    NotCentral,
    #[error("central root index must be a positive integer, got {0}")]
    BadRootIndex(i64),
}

/// A class in `PSL(2, R)`, stored as a determinant-one matrix with a
/// canonical sign: the first nonzero entry in row-major order is positive.
/// `a·d − b·c` with an FMA correction term (Kahan's algorithm), accurate to
/// a few ulp of the true value even under full cancellation. Long hyperbolic
/// words have entries of size `λᵏ` while their determinant is exactly one;
/// the naive difference of `~λ²ᵏ` products loses the value entirely.
fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let w = b * c;
    let err = (-b).mul_add(c, w);
    let main = a.mul_add(d, -w);
    main + err
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjClass {
    m: [[f64; 2]; 2],
}

impl ProjClass {
    pub fn identity() -> Self {
        ProjClass {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Rotation of the direction circle by `r`: a full turn of directions
    /// corresponds to `r = 1` (the matrix angle is `π·r`).
    pub fn rotation(r: f64) -> Self {
        let th = PI * r;
        let (s, c) = th.sin_cos();
        Self::normalized([[c, -s], [s, c]])
    }

    /// Diagonal hyperbolic with expansion `lambda > 1` along direction `0`.
    pub fn diagonal(lambda: f64) -> Self {
        Self::normalized([[lambda, 0.0], [0.0, 1.0 / lambda]])
    }

    /// Builds a class from any matrix with positive determinant, rescaling to
    /// determinant one and applying the canonical sign.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self, MotionError> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(MotionError::NonFinite);
        }
        let det = det2(m[0][0], m[0][1], m[1][0], m[1][1]);
        // Negated comparison on purpose: a NaN determinant must land in the
        // error branch, and `det <= 0.0` would let it through.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(det > 0.0) {
            return Err(MotionError::NonPositiveDeterminant(det));
        }
        let s = det.sqrt();
        Ok(Self::normalized([
            [m[0][0] / s, m[0][1] / s],
            [m[1][0] / s, m[1][1] / s],
        ]))
    }

    /// Rescales to determinant one and fixes the sign; assumes entries finite
    /// and determinant near one (used on products of normalized classes).
    fn normalized(m: [[f64; 2]; 2]) -> Self {
        let det = det2(m[0][0], m[0][1], m[1][0], m[1][1]);
        let s = det.sqrt();
        let mut out = [[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]];
        let first = out
            .iter()
            .flatten()
            .copied()
            .find(|x| *x != 0.0)
            .unwrap_or(1.0);
        if first < 0.0 {
            for row in &mut out {
                for x in row {
                    *x = -*x;
                }
            }
        }
        // Flush -0.0 to +0.0 so equal classes serialize identically.
        for row in &mut out {
            for x in row {
                *x += 0.0;
            }
        }
        ProjClass { m: out }
    }

    /// Reconstructs a class from stored entries without renormalizing, for
    /// bit-exact deserialization of previously normalized data.
    pub(crate) fn from_entries_unchecked(m: [[f64; 2]; 2]) -> Self {
        ProjClass { m }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        det2(self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1])
    }

    pub fn mul(&self, other: &ProjClass) -> ProjClass {
        let a = &self.m;
        let b = &other.m;
        Self::normalized([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn inv(&self) -> ProjClass {
        let m = &self.m;
        Self::normalized([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    /// Largest entry in absolute value. Determinant one forces this to be at
    /// least `1/√2`, so it is always safe to divide by.
    pub fn sup_norm(&self) -> f64 {
        let mut n: f64 = 0.0;
        for row in &self.m {
            for x in row {
                n = n.max(x.abs());
            }
        }
        n
    }

    /// Distance between classes: both representatives are rescaled to unit
    /// sup-norm, and the smaller max-entry difference over the two sign
    /// choices is returned. The rescaling matters: rounded entries of norm
    /// `N` only pin the determinant down to `1 ± O(N²ε)`, so the stored
    /// determinant-one representative of a long hyperbolic word carries an
    /// unavoidable scalar ambiguity of order `N²ε` that would otherwise be
    /// reported as a spurious entrywise defect of order `N³ε`. Dividing the
    /// scale out makes equal classes compare equal to machine precision at
    /// every norm, and near the identity (norm `≈ 1`) the value agrees with
    /// the plain entrywise distance.
    pub fn dist(&self, other: &ProjClass) -> f64 {
        let na = self.sup_norm();
        let nb = other.sup_norm();
        let mut plus: f64 = 0.0;
        let mut minus: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let a = self.m[i][j] / na;
                let b = other.m[i][j] / nb;
                plus = plus.max((a - b).abs());
                minus = minus.max((a + b).abs());
            }
        }
        plus.min(minus)
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        self.dist(&ProjClass::identity()) <= eps
    }

    /// True when the stored matrix is bitwise the identity; such classes act
    /// as exact translations on lifts, so the cocycle with them vanishes.
    fn is_exact_identity(&self) -> bool {
        self.m == [[1.0, 0.0], [0.0, 1.0]]
    }

    /// Action on the circle of directions, coordinatized by `x = θ/π mod 1`
    /// (directions, not points of `RP¹`-double-cover: a projective class acts
    /// on directions through its determinant-one representatives, and the
    /// two representatives agree on `x mod 1`). Returns a value in `[0, 1)`.
    pub fn act(&self, x: f64) -> f64 {
        let th = PI * x;
        let (s, c) = th.sin_cos();
        let vx = self.m[0][0] * c + self.m[0][1] * s;
        let vy = self.m[1][0] * c + self.m[1][1] * s;
        let mut y = vy.atan2(vx) / PI;
        if y < 0.0 {
            y += 1.0;
        }
        if y >= 1.0 {
            y -= 1.0;
        }
        y + 0.0
    }

    /// The normalized lift `F` of the circle action, with `F(0) ∈ [0, 1)`,
    /// evaluated at `x ∈ [0, 1)`. `F` is increasing and commutes with integer
    /// translation, so `F(x) ∈ [F(0), F(0) + 1)`; the branch is chosen by
    /// comparing against `F(0)` with an `eps_angle` guard that rounds ties
    /// toward the representative already in `[0, 1)`.
    fn lift_unit(&self, x: f64, eps_angle: f64) -> f64 {
        let y0 = self.act(0.0);
        let raw = self.act(x);
        if raw >= y0 - eps_angle {
            raw
        } else {
            raw + 1.0
        }
    }
}

/// The integer cocycle `c(A, B) = F_A(F_B(0)) − F_{AB}(0)` measuring how the
/// normalized lifts of `A`, `B`, and `AB` fail to compose on the nose.
///
/// With the normalization `F(0) ∈ [0, 1)` the value is always `0` or `1`.
/// Classes whose stored matrix is exactly the identity short-circuit to `0`,
/// which keeps products with symbolically central elements exact.
pub fn cocycle(a: &ProjClass, b: &ProjClass, tol: &Tolerances) -> i64 {
    if a.is_exact_identity() || b.is_exact_identity() {
        return 0;
    }
    let xb = b.act(0.0);
    let fab = a.lift_unit(xb, tol.angle);
    let ab = a.mul(b);
    // A product that collapses to the identity class sits exactly on the
    // branch cut of the lift normalization: its true basepoint value is 0,
    // but rounding noise can push `act(0)` to just below 1 and shift the
    // carry by one. Pin the basepoint there so `g·g⁻¹` and `g⁻¹·g` both
    // land on central part exactly zero.
    let xab = if ab.is_identity(tol.trace) {
        0.0
    } else {
        ab.act(0.0)
    };
    let c = fab - xab;
    let rounded = c.round();
    debug_assert!(
        (c - rounded).abs() < 0.25,
        "cocycle far from an integer: {c}"
    );
    rounded as i64
}

/// Exactness marker for elements built symbolically, enabling exact order
/// tests and exact central arithmetic along the rotation subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactTag {
    /// Projective part is exactly the identity class.
    Central,
    /// Projective part is exactly the rotation by the stored rational,
    /// reduced and in `(0, 1)`.
    Rotation(BigRational),
}

impl ExactTag {
    fn rotation_amount(&self) -> BigRational {
        match self {
            ExactTag::Central => BigRational::zero(),
            ExactTag::Rotation(r) => r.clone(),
        }
    }
}

/// Conjugacy-type of a motion, read off the projective part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementClass {
    Central,
    Elliptic,
    Hyperbolic,
    Parabolic,
}

/// Outcome of a projective order computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectiveOrder {
    Finite(u64),
    Infinite,
    /// Elliptic with no rational rotation number of small denominator within
    /// tolerance; the order cannot be decided numerically.
    UnknownNumeric,
}

/// An element of the motion group: a projective class together with an exact
/// central coordinate, plus an optional exactness tag.
#[derive(Clone, Debug)]
pub struct MotionElement {
    proj: ProjClass,
    central: BigRational,
    tag: Option<ExactTag>,
}

impl MotionElement {
    pub fn identity() -> Self {
        Self::central(BigRational::zero())
    }

    /// The central element `(id, t)`.
    pub fn central(t: BigRational) -> Self {
        MotionElement {
            proj: ProjClass::identity(),
            central: t,
            tag: Some(ExactTag::Central),
        }
    }

    /// The lifted rotation `k̃(r)` shifted by the central amount `s`: its
    /// projective part is the rotation by `r mod 1` and its central
    /// coordinate is `⌊r⌋ + s`. In particular `rotation(1, 0)` *is* the
    /// central element `(id, 1)`, realizing the quotient relation of the
    /// extension.
    pub fn rotation(r: BigRational, s: BigRational) -> Self {
        let wind = r.floor();
        let frac = &r - &wind;
        let central = wind + s;
        if frac.is_zero() {
            Self::central(central)
        } else {
            MotionElement {
                proj: ProjClass::rotation(frac.to_f64().expect("rational fits in f64")),
                central,
                tag: Some(ExactTag::Rotation(frac)),
            }
        }
    }

    /// Wraps a numeric projective class with a central coordinate. Elements
    /// built this way carry no exactness tag unless the class is bitwise the
    /// identity.
    pub fn from_parts(proj: ProjClass, central: BigRational) -> Self {
        let tag = if proj.is_exact_identity() {
            Some(ExactTag::Central)
        } else {
            None
        };
        MotionElement { proj, central, tag }
    }

    pub(crate) fn from_raw_parts(
        proj: ProjClass,
        central: BigRational,
        tag: Option<ExactTag>,
    ) -> Self {
        MotionElement { proj, central, tag }
    }

    pub fn proj(&self) -> &ProjClass {
        &self.proj
    }

    pub fn central_part(&self) -> &BigRational {
        &self.central
    }

    pub fn exact_tag(&self) -> Option<&ExactTag> {
        self.tag.as_ref()
    }

    /// Group law `(A, t)(B, u) = (AB, t + u + c(A, B))`.
    ///
    /// When both factors carry exactness tags the rotation amounts add over
    /// the rationals and the cocycle is the exact carry `⌊r_a + r_b⌋`, so the
    /// product is again tagged; the rotation subgroup and the center stay
    /// exactly closed under multiplication.
    pub fn mul(&self, other: &MotionElement, tol: &Tolerances) -> MotionElement {
        if let (Some(ta), Some(tb)) = (&self.tag, &other.tag) {
            let sum = ta.rotation_amount() + tb.rotation_amount();
            let wind = sum.floor();
            let frac = &sum - &wind;
            let central = &self.central + &other.central + wind.to_integer();
            return if frac.is_zero() {
                MotionElement {
                    proj: ProjClass::identity(),
                    central,
                    tag: Some(ExactTag::Central),
                }
            } else {
                MotionElement {
                    proj: ProjClass::rotation(frac.to_f64().expect("rational fits in f64")),
                    central,
                    tag: Some(ExactTag::Rotation(frac)),
                }
            };
        }
        let c = cocycle(&self.proj, &other.proj, tol);
        let central = &self.central + &other.central + BigInt::from(c);
        let proj = self.proj.mul(&other.proj);
        let tag = match (&self.tag, &other.tag) {
            (Some(ExactTag::Central), _) => other.tag.clone(),
            (_, Some(ExactTag::Central)) => self.tag.clone(),
            _ => None,
        };
        MotionElement { proj, central, tag }
    }

    /// Inverse under the twisted law: `(A, t)⁻¹ = (A⁻¹, −t − c(A, A⁻¹))`.
    pub fn inv(&self, tol: &Tolerances) -> MotionElement {
        match &self.tag {
            Some(ExactTag::Central) => MotionElement {
                proj: ProjClass::identity(),
                central: -&self.central,
                tag: Some(ExactTag::Central),
            },
            Some(ExactTag::Rotation(r)) => {
                // c(k(r), k(1−r)) = ⌊r + (1−r)⌋ = 1 for r ∈ (0, 1).
                let rinv = BigRational::one() - r;
                MotionElement {
                    proj: ProjClass::rotation(rinv.to_f64().expect("rational fits in f64")),
                    central: -&self.central - BigInt::from(1),
                    tag: Some(ExactTag::Rotation(rinv)),
                }
            }
            None => {
                let pinv = self.proj.inv();
                let c = cocycle(&self.proj, &pinv, tol);
                MotionElement {
                    proj: pinv,
                    central: -&self.central - BigInt::from(c),
                    tag: None,
                }
            }
        }
    }

    /// Integer power by repeated multiplication (exponents here are small
    /// gluing-matrix entries).
    pub fn pow(&self, n: i64, tol: &Tolerances) -> MotionElement {
        if n == 0 {
            return MotionElement::identity();
        }
        let base = if n < 0 { self.inv(tol) } else { self.clone() };
        let mut acc = base.clone();
        for _ in 1..n.unsigned_abs() {
            acc = acc.mul(&base, tol);
        }
        acc
    }

    /// Distance combining the projective-class distance with the central
    /// difference (evaluated approximately for reporting).
    pub fn dist(&self, other: &MotionElement) -> f64 {
        let dc = (&self.central - &other.central)
            .to_f64()
            .unwrap_or(f64::INFINITY)
            .abs();
        self.proj.dist(&other.proj).max(dc)
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        self.central.is_zero() && self.proj.is_identity(eps)
    }

    /// Classifies by the projective part: identity class → `Central`, then by
    /// the absolute trace of the determinant-one representative with the
    /// parabolic band `|tr| ∈ [2 − ε, 2 + ε]`.
    pub fn classify(&self, tol: &Tolerances) -> ElementClass {
        match &self.tag {
            Some(ExactTag::Central) => return ElementClass::Central,
            Some(ExactTag::Rotation(_)) => return ElementClass::Elliptic,
            None => {}
        }
        if self.proj.is_identity(tol.trace) {
            return ElementClass::Central;
        }
        let t = self.proj.trace().abs();
        if t < 2.0 - tol.trace {
            ElementClass::Elliptic
        } else if t > 2.0 + tol.trace {
            ElementClass::Hyperbolic
        } else {
            ElementClass::Parabolic
        }
    }

    /// Order of the projective part in `PSL(2, R)`.
    ///
    /// Tagged elements are decided exactly (the order of a rotation by the
    /// reduced fraction `p/q` is `q`). Hyperbolic and parabolic classes have
    /// infinite order. For numeric elliptics the rotation number
    /// `r₀ = arccos(|tr|/2)/π` is matched against reduced fractions with
    /// denominator at most `denominator_bound`; if none lies within the
    /// rotation tolerance the answer is `UnknownNumeric`.
    pub fn projective_order(&self, denominator_bound: u64, tol: &Tolerances) -> ProjectiveOrder {
        match &self.tag {
            Some(ExactTag::Central) => return ProjectiveOrder::Finite(1),
            Some(ExactTag::Rotation(r)) => {
                return match r.denom().to_u64() {
                    Some(q) => ProjectiveOrder::Finite(q),
                    None => ProjectiveOrder::UnknownNumeric,
                };
            }
            None => {}
        }
        match self.classify(tol) {
            ElementClass::Central => ProjectiveOrder::Finite(1),
            ElementClass::Hyperbolic | ElementClass::Parabolic => ProjectiveOrder::Infinite,
            ElementClass::Elliptic => {
                let half_trace = (self.proj.trace().abs() / 2.0).clamp(0.0, 1.0);
                let r0 = half_trace.acos() / PI;
                for q in 1..=denominator_bound {
                    for p in 1..=q / 2 + 1 {
                        if num_integer::gcd(p, q) != 1 {
                            continue;
                        }
                        if (r0 - p as f64 / q as f64).abs() <= tol.rot {
                            return ProjectiveOrder::Finite(q);
                        }
                    }
                }
                ProjectiveOrder::UnknownNumeric
            }
        }
    }
}

/// Whether two motions commute. Commutation in the extension is equivalent to
/// commutation of the projective parts (central coordinates always commute
/// and the cocycle discrepancy of commuting classes cancels), so this
/// compares `AB` against `BA` directly. Comparing the two products instead
/// of reducing the full commutator word keeps the computation at the norm of
/// `AB`; the word `ABA⁻¹B⁻¹` squares that norm before cancelling it away
/// again, and the cancellation costs accuracy that long hyperbolic words
/// cannot spare.
pub fn commutes(a: &MotionElement, b: &MotionElement, tol: &Tolerances) -> bool {
    let ab = a.proj.mul(&b.proj);
    let ba = b.proj.mul(&a.proj);
    ab.dist(&ba) <= tol.comm
}

/// The `m`-th root of a central element inside the center: `(id, t) ↦ (id, t/m)`.
/// Exact, and the unique central solution of `x^m = f`.
pub fn central_root(
    f: &MotionElement,
    m: i64,
    tol: &Tolerances,
) -> Result<MotionElement, MotionError> {
    if m <= 0 {
        return Err(MotionError::BadRootIndex(m));
    }
    let central_exactly = matches!(f.tag, Some(ExactTag::Central));
    if !central_exactly && !f.proj.is_identity(tol.trace) {
        return Err(MotionError::NotCentral);
    }
    Ok(MotionElement::central(
        &f.central / BigRational::from_integer(BigInt::from(m)),
    ))
}
