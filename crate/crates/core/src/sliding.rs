//! Filippov sliding dynamics on Σ.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Poly3, Var};
use crate::foldfold::NormalParameters;
use crate::linalg::Mat2;
use crate::scalar::{Scalar, Truth};
use crate::sigma::{classify_point, FoldFoldSubtype, SigmaKind, SigmaPoint, TangencyType};
use crate::system::{Aabb, PiecewiseSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlidingError {
    #[error("sliding field undefined at ({x}, {y}): Yf - Xf = 0")]
    DenominatorZero { x: f64, y: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

/// Planar polynomial field in `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarField<T> {
    pub px: Poly3<T>,
    pub py: Poly3<T>,
}

impl<T: Scalar> PlanarField<T> {
    pub fn eval(&self, p: SigmaPoint<T>) -> [T; 2] {
        [self.px.eval_sigma(p[0], p[1]), self.py.eval_sigma(p[0], p[1])]
    }

    pub fn jacobian(&self, p: SigmaPoint<T>) -> Mat2<T> {
        let d = |q: &Poly3<T>, v| q.partial(v).eval_sigma(p[0], p[1]);
        Mat2::new(
            d(&self.px, Var::X),
            d(&self.px, Var::Y),
            d(&self.py, Var::X),
            d(&self.py, Var::Y),
        )
    }

    /// Directional derivative `∇h · self` as a polynomial.
    pub fn derivative_of(&self, h: &Poly3<T>) -> Poly3<T> {
        &(&h.partial(Var::X) * &self.px) + &(&h.partial(Var::Y) * &self.py)
    }

    /// Linear part at the origin.
    pub fn linear_part(&self) -> Mat2<T> {
        self.jacobian([T::zero(), T::zero()])
    }
}

/// `F_Z = numerator / denominator` on Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingField<T> {
    pub numerator: PlanarField<T>,
    /// `Yf - Xf` on Σ.
    pub denominator: Poly3<T>,
}

impl<T: Scalar> SlidingField<T> {
    pub fn eval(&self, p: SigmaPoint<T>) -> Result<[T; 2], SlidingError> {
        let den = self.denominator.eval_sigma(p[0], p[1]);
        if den == T::zero() || !den.is_finite() {
            return Err(SlidingError::DenominatorZero {
                x: p[0].as_f64(),
                y: p[1].as_f64(),
            });
        }
        let n = self.numerator.eval(p);
        Ok([n[0] / den, n[1] / den])
    }
}

/// `Yf·X - Xf·Y` restricted to Σ, all three components.
pub fn normalized_numerator_3d<T: Scalar>(sys: &PiecewiseSystem<T>) -> [Poly3<T>; 3] {
    let l = sys.lie();
    let (x, y) = (sys.x_field(), sys.y_field());
    let comp = |a: &Poly3<T>, b: &Poly3<T>| (&(&l.yf * a) - &(&l.xf * b)).restrict_to_sigma();
    [comp(&x.cx, &y.cx), comp(&x.cy, &y.cy), comp(&x.cz, &y.cz)]
}

pub fn normalized_sliding_field<T: Scalar>(sys: &PiecewiseSystem<T>) -> PlanarField<T> {
    let [px, py, _] = normalized_numerator_3d(sys);
    PlanarField { px, py }
}

pub fn sliding_field<T: Scalar>(sys: &PiecewiseSystem<T>) -> SlidingField<T> {
    let l = sys.lie();
    SlidingField {
        numerator: normalized_sliding_field(sys),
        denominator: (&l.yf - &l.xf).restrict_to_sigma(),
    }
}

/// Linear part of `F_Z^N` at a fold-fold point in normal coordinates.
pub fn foldfold_sliding_linearization<T: Scalar>(params: &NormalParameters<T>) -> Mat2<T> {
    let d = params.delta_t();
    Mat2::new(params.alpha, -d * params.gamma, T::one(), -d * params.beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Claim {
    Claim1,
    Claim2,
    Claim3,
    Claim4,
    Claim5,
    Claim6,
    Claim7,
    Claim8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlidingRegionTag {
    RE1,
    RE2,
    RH1,
    RH2,
    RP1,
    RP2,
    RP3,
    RP4,
    BifurcationBoundary,
}

impl SlidingRegionTag {
    pub const ALL: [SlidingRegionTag; 9] = [
        SlidingRegionTag::RE1,
        SlidingRegionTag::RE2,
        SlidingRegionTag::RH1,
        SlidingRegionTag::RH2,
        SlidingRegionTag::RP1,
        SlidingRegionTag::RP2,
        SlidingRegionTag::RP3,
        SlidingRegionTag::RP4,
        SlidingRegionTag::BifurcationBoundary,
    ];

    pub fn claim(self) -> Claim {
        match self {
            SlidingRegionTag::RE1 => Claim::Claim1,
            SlidingRegionTag::RE2 => Claim::Claim2,
            SlidingRegionTag::RH1 | SlidingRegionTag::RH2 => Claim::Claim3,
            SlidingRegionTag::RP1 => Claim::Claim4,
            SlidingRegionTag::RP2 => Claim::Claim5,
            SlidingRegionTag::RP3 => Claim::Claim6,
            SlidingRegionTag::RP4 => Claim::Claim7,
            SlidingRegionTag::BifurcationBoundary => Claim::Claim8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SlidingRegionTag::RE1 => "RE1",
            SlidingRegionTag::RE2 => "RE2",
            SlidingRegionTag::RH1 => "RH1",
            SlidingRegionTag::RH2 => "RH2",
            SlidingRegionTag::RP1 => "RP1",
            SlidingRegionTag::RP2 => "RP2",
            SlidingRegionTag::RP3 => "RP3",
            SlidingRegionTag::RP4 => "RP4",
            SlidingRegionTag::BifurcationBoundary => "boundary",
        }
    }
}

/// Relative band applied to every defining inequality.
pub const REGION_BAND: f64 = 1e-9;

/// Inequality evaluator with bands scaled to the degree of each side.
pub(crate) struct Bands<T> {
    pub linear: T,
    pub quadratic: T,
}

impl<T: Scalar> Bands<T> {
    pub fn for_params(params: &NormalParameters<T>) -> Self {
        let s = params.scale();
        let b = T::lit(REGION_BAND);
        Self {
            linear: b * s,
            quadratic: b * s * s,
        }
    }
}

/// `(α, β, γ)` in the chart where `δ = -1`; visible-invisible points are mirrored
/// onto invisible-visible ones through `z ↦ -z`, which preserves the sliding spectrum.
pub(crate) fn parabolic_chart<T: Scalar>(params: &NormalParameters<T>) -> (T, T, T) {
    match params.subtype {
        FoldFoldSubtype::VisibleInvisible => (-params.beta, params.alpha, -params.gamma),
        _ => (params.alpha, params.beta, params.gamma),
    }
}

pub fn sliding_region_class<T: Scalar>(params: &NormalParameters<T>) -> SlidingRegionTag {
    let bands = Bands::for_params(params);
    let (l, q) = (bands.linear, bands.quadratic);
    let zero = T::zero();
    let pick = |t: Truth, inside: SlidingRegionTag, outside: SlidingRegionTag| match t {
        Truth::True => inside,
        Truth::False => outside,
        Truth::Band => SlidingRegionTag::BifurcationBoundary,
    };
    let (a, b, g) = (params.alpha, params.beta, params.gamma);
    match params.subtype {
        FoldFoldSubtype::Invisible => {
            let t = Truth::greater(a * b, g, q)
                .and(Truth::less(a, zero, l))
                .and(Truth::less(b, zero, l));
            pick(t, SlidingRegionTag::RE1, SlidingRegionTag::RE2)
        }
        FoldFoldSubtype::VisibleVisible => {
            let t = Truth::less(a * b, g, q)
                .and(Truth::greater(a, zero, l))
                .and(Truth::less(b, zero, l));
            pick(t, SlidingRegionTag::RH1, SlidingRegionTag::RH2)
        }
        FoldFoldSubtype::InvisibleVisible | FoldFoldSubtype::VisibleInvisible => {
            let (a, b, g) = parabolic_chart(params);
            let root = T::two() * (-g).sqrt();
            let below = Truth::less(a * b, g, q);
            let above = Truth::greater(a * b, g, q);
            let candidates = [
                (below.and(Truth::greater(b - a, -root, l)), SlidingRegionTag::RP1),
                (below.and(Truth::greater(a, zero, l)), SlidingRegionTag::RP2),
                (
                    above
                        .and(Truth::greater(a + b, zero, l))
                        .and(Truth::less(b - a, -root, l)),
                    SlidingRegionTag::RP3,
                ),
                (
                    above
                        .and(Truth::less(a + b, zero, l))
                        .and(Truth::less(b - a, -root, l)),
                    SlidingRegionTag::RP4,
                ),
            ];
            candidates
                .iter()
                .find(|(t, _)| *t == Truth::True)
                .map(|(_, tag)| *tag)
                .unwrap_or(SlidingRegionTag::BifurcationBoundary)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PseudoEquilibriumKind {
    Saddle,
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    NonHyperbolic,
}

impl PseudoEquilibriumKind {
    pub fn is_hyperbolic(self) -> bool {
        self != PseudoEquilibriumKind::NonHyperbolic
    }

    /// Linear type of a planar Jacobian; `band` decides hyperbolicity.
    pub fn of_matrix<T: Scalar>(j: &Mat2<T>, band: T) -> Self {
        let det = j.det();
        let tr = j.trace();
        let disc = j.discriminant();
        let s = j.max_abs().max(T::min_positive_value());
        if det.abs() <= band * s * s {
            return PseudoEquilibriumKind::NonHyperbolic;
        }
        if det < T::zero() {
            return PseudoEquilibriumKind::Saddle;
        }
        if tr.abs() <= band * s {
            return PseudoEquilibriumKind::NonHyperbolic;
        }
        match (disc >= T::zero(), tr < T::zero()) {
            (true, true) => PseudoEquilibriumKind::StableNode,
            (true, false) => PseudoEquilibriumKind::UnstableNode,
            (false, true) => PseudoEquilibriumKind::StableFocus,
            (false, false) => PseudoEquilibriumKind::UnstableFocus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PseudoEquilibrium<T> {
    pub point: SigmaPoint<T>,
    pub kind: PseudoEquilibriumKind,
    /// `StableSliding` or `UnstableSliding`.
    pub region: SigmaKind,
    /// Jacobian of `F_Z` (not of `F_Z^N`) at the point.
    pub jacobian: Mat2<T>,
}

/// Seed grid per axis for [`pseudo_equilibria`].
pub const PSEUDO_GRID: usize = 21;

/// Zeros of `F_Z^N` in the sliding region of `b`, excluding `S_Z`.
pub fn pseudo_equilibria<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    b: &Aabb<T>,
    tol: T,
) -> Vec<PseudoEquilibrium<T>> {
    let fnorm = normalized_sliding_field(sys);
    let den = (&sys.lie().yf - &sys.lie().xf).restrict_to_sigma();
    let n = PSEUDO_GRID;
    let mut found: Vec<PseudoEquilibrium<T>> = Vec::new();
    let wx = b.max[0] - b.min[0];
    let wy = b.max[1] - b.min[1];
    let scale = T::one() + sys.coefficient_scale();
    let merge = T::lit(1e-7) * (T::one() + wx.max(wy));
    for i in 0..n {
        for j in 0..n {
            let fi = T::lit(i as f64 / (n - 1) as f64);
            let fj = T::lit(j as f64 / (n - 1) as f64);
            let mut p = [b.min[0] + wx * fi, b.min[1] + wy * fj];
            let mut converged = false;
            for _ in 0..60 {
                let v = fnorm.eval(p);
                let jac = fnorm.jacobian(p);
                let Some(inv) = jac.inverse() else { break };
                let step = inv.apply(v);
                p = [p[0] - step[0], p[1] - step[1]];
                if !(p[0].is_finite() && p[1].is_finite()) {
                    break;
                }
                let r = fnorm.eval(p);
                if r[0].abs().max(r[1].abs()) <= T::lit(1e-12) * scale
                    && step[0].abs().max(step[1].abs()) <= T::lit(1e-10) * (T::one() + wx.max(wy))
                {
                    converged = true;
                    break;
                }
            }
            if !converged {
                log::debug!("pseudo-equilibrium seed ({i}, {j}) dropped: Newton did not converge");
                continue;
            }
            let in_box = p[0] >= b.min[0] && p[0] <= b.max[0] && p[1] >= b.min[1] && p[1] <= b.max[1];
            if !in_box || found.iter().any(|q| (q.point[0] - p[0]).abs().max((q.point[1] - p[1]).abs()) < merge) {
                continue;
            }
            let region = classify_point(sys, p, tol).kind;
            if !matches!(region, SigmaKind::StableSliding | SigmaKind::UnstableSliding) {
                continue;
            }
            let d = den.eval_sigma(p[0], p[1]);
            let jn = fnorm.jacobian(p);
            let jacobian = Mat2::new(jn.m[0][0] / d, jn.m[0][1] / d, jn.m[1][0] / d, jn.m[1][1] / d);
            found.push(PseudoEquilibrium {
                point: p,
                kind: PseudoEquilibriumKind::of_matrix(&jacobian, T::lit(1e-9)),
                region,
                jacobian,
            });
        }
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContactOrder {
    Transverse,
    Quadratic,
    Degenerate,
}

/// Contact order of `F_Z^N` with the tangency line through a fold- or cusp-regular point.
pub fn boundary_contact<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> Result<ContactOrder, SlidingError> {
    let kind = classify_point(sys, p, tol).kind;
    let h = match kind {
        SigmaKind::Tangency(TangencyType::FoldRegular | TangencyType::CuspRegular) => &sys.lie().xf,
        SigmaKind::Tangency(TangencyType::RegularFold | TangencyType::RegularCusp) => &sys.lie().yf,
        other => {
            return Err(SlidingError::NotApplicable(format!(
                "boundary contact needs a fold- or cusp-regular point, found {other:?}"
            )))
        }
    };
    let f = normalized_sliding_field(sys);
    let l1 = f.derivative_of(&h.restrict_to_sigma());
    if l1.eval_sigma(p[0], p[1]).abs() > tol {
        return Ok(ContactOrder::Transverse);
    }
    let l2 = f.derivative_of(&l1);
    Ok(if l2.eval_sigma(p[0], p[1]).abs() > tol {
        ContactOrder::Quadratic
    } else {
        ContactOrder::Degenerate
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::VectorField3;
    use crate::system::build_normal_form;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sys(x: VectorField3<f64>, y: VectorField3<f64>) -> PiecewiseSystem<f64> {
        PiecewiseSystem::new("t", x, y, Aabb::default()).unwrap()
    }

    fn constant_pair() -> PiecewiseSystem<f64> {
        sys(
            VectorField3::constant(1.0, 0.0, -1.0),
            VectorField3::constant(0.0, 1.0, 1.0),
        )
    }

    fn params(a: f64, b: f64, g: f64, d: i8) -> NormalParameters<f64> {
        NormalParameters::new(a, b, g, d).unwrap()
    }

    #[test]
    fn sliding_field_examples() {
        let f = sliding_field(&constant_pair());
        assert_eq!(f.eval([0.3, -0.2]).unwrap(), [0.5, 0.5]);

        let z = build_normal_form(-1.0, -1.0, 1.0, -1, None).unwrap();
        let f = sliding_field(&z);
        assert_eq!(f.eval([1.0, 1.0]).unwrap(), [0.0, 0.0]);
        // Xf = -y, Yf = x: Xf = Yf on x = -y.
        assert!(matches!(
            f.eval([0.5, -0.5]),
            Err(SlidingError::DenominatorZero { .. })
        ));
    }

    #[test]
    fn normalized_field_examples() {
        let n = normalized_sliding_field(&constant_pair());
        assert_eq!(n.eval([0.1, 0.9]), [1.0, 1.0]);

        let z = build_normal_form(-1.0, -1.0, 1.0, -1, None).unwrap();
        assert_eq!(normalized_sliding_field(&z).linear_part(), Mat2::new(-1.0, 1.0, 1.0, -1.0));

        let z = build_normal_form(1.0, -1.0, -1.0, 1, None).unwrap();
        assert_eq!(normalized_sliding_field(&z).linear_part(), Mat2::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn linearization_matches_normal_form_for_every_subtype() {
        let hot = VectorField3::new(
            &Poly3::x() * &Poly3::y(),
            Poly3::y().scale(0.3),
            &Poly3::x() * &Poly3::x(),
        );
        for (a, b, g, d) in [(-1.0, -1.0, 1.0, -1), (1.0, -1.0, -1.0, 1), (0.4, 1.3, -2.0, -1), (-0.2, 0.7, 3.0, 1)] {
            let z = build_normal_form(a, b, g, d, Some(&hot)).unwrap();
            let lin = normalized_sliding_field(&z).linear_part();
            let p = params(a, b, g, d);
            assert_eq!(lin, foldfold_sliding_linearization(&p));
        }
    }

    #[test]
    fn linearization_examples() {
        let m = foldfold_sliding_linearization(&params(-1.0, -1.0, 1.0, -1));
        assert_eq!(m, Mat2::new(-1.0, 1.0, 1.0, -1.0));
        let ev = m.eigenvalues();
        assert!(ev[0].re.abs() < 1e-15 && (ev[1].re + 2.0).abs() < 1e-15);

        let m = foldfold_sliding_linearization(&params(-2.0, -1.0, 1.0, -1));
        assert_eq!((m.det(), m.trace()), (1.0, -3.0));
        assert!(m.eigenvalues().iter().all(|e| e.im == 0.0 && e.re < 0.0));

        let m = foldfold_sliding_linearization(&params(1.0, -1.0, -0.5, 1));
        assert_eq!(m, Mat2::new(1.0, 0.5, 1.0, 1.0));
        assert_eq!((m.trace(), m.det()), (2.0, 0.5));
    }

    #[test]
    fn region_examples() {
        let tag = sliding_region_class(&params(-1.0, -1.0, 0.5, -1));
        assert_eq!((tag, tag.claim()), (SlidingRegionTag::RE1, Claim::Claim1));
        let tag = sliding_region_class(&params(1.0, 1.0, 1.0, -1));
        assert_eq!((tag, tag.claim()), (SlidingRegionTag::RE2, Claim::Claim2));
        let tag = sliding_region_class(&params(-1.0, 1.5, -1.0, -1));
        assert_eq!((tag, tag.claim()), (SlidingRegionTag::RP1, Claim::Claim4));
        assert_eq!(sliding_region_class(&params(1.0, -2.0, -1.0, 1)), SlidingRegionTag::RH1);
        assert_eq!(sliding_region_class(&params(1.0, 1.0, -1.0, 1)), SlidingRegionTag::RH2);
        assert_eq!(sliding_region_class(&params(2.0, -1.0, -1.0, -1)), SlidingRegionTag::RP2);
        assert_eq!(sliding_region_class(&params(-1.0, 3.0, -1.0, -1)), SlidingRegionTag::RP1);
        assert_eq!(sliding_region_class(&params(3.0, 0.1, -1.0, -1)), SlidingRegionTag::RP3);
        assert_eq!(sliding_region_class(&params(1.0, -3.0, -1.0, -1)).claim(), Claim::Claim5);
        assert_eq!(sliding_region_class(&params(-0.1, -3.0, -0.01, -1)), SlidingRegionTag::RP4);
        // On αβ = γ and in the focus wedge.
        assert_eq!(
            sliding_region_class(&params(-1.0, -1.0, 1.0, -1)),
            SlidingRegionTag::BifurcationBoundary
        );
        assert_eq!(
            sliding_region_class(&params(0.0, 0.0, -1.0, -1)),
            SlidingRegionTag::BifurcationBoundary
        );
    }

    #[test]
    fn visible_invisible_mirrors_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let p = params(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.1..3.0), 1);
            let (a, b, g) = parabolic_chart(&p);
            let mirrored = params(a, b, g, -1);
            let m1 = foldfold_sliding_linearization(&p);
            let m2 = foldfold_sliding_linearization(&mirrored);
            assert!((m1.trace() - m2.trace()).abs() < 1e-12);
            assert!((m1.det() - m2.det()).abs() < 1e-12);
            assert_eq!(sliding_region_class(&p), sliding_region_class(&mirrored));
        }
    }

    #[test]
    fn pseudo_equilibrium_examples() {
        let z = build_normal_form(-1.0, -1.0, 1.0, -1, None).unwrap();
        assert!(pseudo_equilibria(&z, z.domain_box(), 1e-9).is_empty());

        let node = sys(
            VectorField3::new(&Poly3::x() - &Poly3::constant(0.5), Poly3::zero(), Poly3::constant(-1.0)),
            VectorField3::new(Poly3::zero(), &Poly3::y() - &Poly3::constant(0.5), Poly3::constant(1.0)),
        );
        let eq = pseudo_equilibria(&node, node.domain_box(), 1e-9);
        assert_eq!(eq.len(), 1);
        assert!((eq[0].point[0] - 0.5).abs() < 1e-12 && (eq[0].point[1] - 0.5).abs() < 1e-12);
        assert_eq!(eq[0].kind, PseudoEquilibriumKind::UnstableNode);
        assert_eq!(eq[0].region, SigmaKind::StableSliding);

        assert!(pseudo_equilibria(&constant_pair(), &Aabb::default(), 1e-9).is_empty());
    }

    #[test]
    fn contact_examples() {
        let fr = sys(
            VectorField3::new(Poly3::zero(), Poly3::constant(1.0), -Poly3::y()),
            VectorField3::constant(0.0, 0.0, 1.0),
        );
        assert_eq!(boundary_contact(&fr, [0.0, 0.0], 1e-9), Ok(ContactOrder::Transverse));

        let cusp = sys(
            VectorField3::new(
                Poly3::constant(1.0),
                Poly3::zero(),
                &Poly3::y() + &(&Poly3::x() * &Poly3::x()),
            ),
            VectorField3::constant(0.0, 0.0, 1.0),
        );
        assert_eq!(boundary_contact(&cusp, [0.0, 0.0], 1e-9), Ok(ContactOrder::Quadratic));

        assert!(boundary_contact(&constant_pair(), [0.0, 0.0], 1e-9).is_err());
    }

    #[test]
    fn numerator_is_tangent_to_sigma() {
        let hot = VectorField3::new(
            &Poly3::x() * &Poly3::z(),
            &Poly3::y() * &Poly3::y(),
            &(&Poly3::x() * &Poly3::y()) + &(&Poly3::z() * &Poly3::z()),
        );
        let z = build_normal_form(0.7, -0.3, 2.0, -1, Some(&hot)).unwrap();
        let [_, _, nz] = normalized_numerator_3d(&z);
        assert!(nz.is_zero());
    }

    #[test]
    fn reparametrization_sign() {
        let hot = VectorField3::new(&Poly3::x() * &Poly3::y(), Poly3::zero(), &Poly3::y() * &Poly3::y());
        let z = build_normal_form(0.7, -0.3, 2.0, -1, Some(&hot)).unwrap();
        let fz = sliding_field(&z);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counted = 0;
        while counted < 1000 {
            let p: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let c = classify_point(&z, p, 1e-9);
            let positive = match c.kind {
                SigmaKind::StableSliding => true,
                SigmaKind::UnstableSliding => false,
                _ => continue,
            };
            counted += 1;
            let den = c.yf - c.xf;
            assert_eq!(den > 0.0, positive);
            let v = fz.eval(p).unwrap();
            let n = fz.numerator.eval(p);
            assert!((n[0] - den * v[0]).abs() < 1e-12 && (n[1] - den * v[1]).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn region_invariant_under_rescaling(
            a in -5.0f64..5.0, b in -5.0f64..5.0, g in 0.01f64..5.0,
            negative in any::<bool>(), d in prop::sample::select(vec![-1i8, 1]),
            e in 0.05f64..20.0,
        ) {
            let g = if negative { -g } else { g };
            let p = params(a, b, g, d);
            prop_assert_eq!(sliding_region_class(&p), sliding_region_class(&p.rescaled(e)));
        }
    }
}
