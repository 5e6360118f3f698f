use serde::{Deserialize, Serialize};

use crate::scalar::{Scalar, Sign, Truth};
use crate::sigma::{classify_point, FoldFoldSubtype, SigmaKind, SigmaPoint, TangencyType};
use crate::sliding::{
    normalized_sliding_field, parabolic_chart, sliding_region_class, Bands, PseudoEquilibriumKind,
    SlidingRegionTag,
};
use crate::system::PiecewiseSystem;

use super::{
    moduli_from_tau, moduli_info, normal_parameters, return_map_analysis, FixedPointClass, FoldFoldError,
    ModuliInfo, NormalParameters,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransversalityKind {
    /// `φ_X(S_Y)` tangent to `S_Y` (`α = 0`).
    FoldImage,
    /// `2α(α+β) - γ = 0`.
    T,
    /// `α + β = 0` with `α > 0`.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UnstableReason {
    NonHyperbolicReturnMap,
    InvariantManifoldInSliding,
    SlidingBifurcation,
    TransversalityFailure(TransversalityKind),
    ModuliFoliation { tau: f64 },
}

impl UnstableReason {
    pub fn code(&self) -> String {
        match self {
            UnstableReason::NonHyperbolicReturnMap => "non-hyperbolic-return-map".into(),
            UnstableReason::InvariantManifoldInSliding => "invariant-manifold-in-sliding".into(),
            UnstableReason::SlidingBifurcation => "sliding-bifurcation".into(),
            UnstableReason::TransversalityFailure(k) => format!(
                "transversality-failure-{}",
                match k {
                    TransversalityKind::FoldImage => "fold-image",
                    TransversalityKind::T => "t",
                    TransversalityKind::D => "d",
                }
            ),
            UnstableReason::ModuliFoliation { .. } => "moduli-foliation".into(),
        }
    }
}

/// The condition that sits on its boundary and its signed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryWitness {
    pub condition: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable(UnstableReason),
    BoundaryDegenerate(BoundaryWitness),
}

impl Verdict {
    pub fn code(&self) -> String {
        match self {
            Verdict::Stable => "stable".into(),
            Verdict::Unstable(r) => format!("unstable:{}", r.code()),
            Verdict::BoundaryDegenerate(_) => "boundary-degenerate".into(),
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Verdict::Stable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCondition {
    pub name: String,
    pub sign: Sign,
}

/// Every sign condition the verdict was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub kind: SigmaKind,
    pub region: Option<SlidingRegionTag>,
    pub signs: Vec<SignCondition>,
}

impl ClassDescriptor {
    fn new(kind: SigmaKind) -> Self {
        Self {
            kind,
            region: None,
            signs: Vec::new(),
        }
    }

    fn sign(mut self, name: &str, sign: Sign) -> Self {
        self.signs.push(SignCondition {
            name: name.into(),
            sign,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    /// Reasons beyond the primary one.
    pub additional: Vec<UnstableReason>,
    pub class_descriptor: ClassDescriptor,
    pub moduli: Option<ModuliInfo<f64>>,
}

impl StabilityVerdict {
    fn plain(verdict: Verdict, class_descriptor: ClassDescriptor) -> Self {
        Self {
            verdict,
            additional: Vec::new(),
            class_descriptor,
            moduli: None,
        }
    }

    /// Verdict code plus descriptor: the comparison key for invariance checks.
    pub fn key(&self) -> (String, Vec<String>, ClassDescriptor) {
        (
            self.verdict.code(),
            self.additional.iter().map(|r| r.code()).collect(),
            self.class_descriptor.clone(),
        )
    }
}

fn sign_of(v: bool, neg: bool) -> Sign {
    match (v, neg) {
        (true, _) => Sign::Positive,
        (_, true) => Sign::Negative,
        _ => Sign::Zero,
    }
}

/// Three-valued sign of `v` with `|v| <= band` mapped to zero.
fn banded<T: Scalar>(v: T, band: T) -> Sign {
    sign_of(v > band, v < -band)
}

/// Verdict at a fold-fold point decided from its normal parameters alone.
pub fn verdict_for_parameters<T: Scalar>(params: &NormalParameters<T>) -> StabilityVerdict {
    let bands = Bands::for_params(params);
    let (l, q) = (bands.linear, bands.quadratic);
    let kind = SigmaKind::Tangency(TangencyType::FoldFold(params.subtype));
    let (a, b, g) = (params.alpha, params.beta, params.gamma);
    match params.subtype {
        FoldFoldSubtype::Invisible => {
            let analysis = return_map_analysis(params).expect("subtype checked");
            let desc = ClassDescriptor::new(kind)
                .sign("alpha", banded(a, l))
                .sign("beta", banded(b, l))
                .sign("alpha*beta", banded(a * b, q))
                .sign("alpha*beta-gamma", banded(a * b - g, q));
            let desc = ClassDescriptor {
                region: Some(sliding_region_class(params)),
                ..desc
            };
            let both_negative = Truth::less(a, T::zero(), l).and(Truth::less(b, T::zero(), l));
            match analysis.fixed_point_class {
                FixedPointClass::Saddle => match both_negative {
                    Truth::True => StabilityVerdict::plain(Verdict::Stable, desc),
                    Truth::False => StabilityVerdict::plain(
                        Verdict::Unstable(UnstableReason::InvariantManifoldInSliding),
                        desc,
                    ),
                    Truth::Band => StabilityVerdict::plain(
                        Verdict::BoundaryDegenerate(BoundaryWitness {
                            condition: "eigenvector on a tangency line".into(),
                            value: a.min(b).as_f64(),
                        }),
                        desc,
                    ),
                },
                FixedPointClass::NonHyperbolicUnit if both_negative != Truth::False => {
                    StabilityVerdict::plain(
                        Verdict::BoundaryDegenerate(BoundaryWitness {
                            condition: "alpha*beta = gamma".into(),
                            value: (a * b - g).as_f64(),
                        }),
                        desc,
                    )
                }
                FixedPointClass::NonHyperbolicComplex { tau } => StabilityVerdict {
                    verdict: Verdict::Unstable(UnstableReason::NonHyperbolicReturnMap),
                    additional: vec![UnstableReason::ModuliFoliation { tau: tau.as_f64() }],
                    class_descriptor: desc,
                    moduli: moduli_info(&analysis).map(|m| moduli_from_tau(m.tau.as_f64())),
                },
                _ => StabilityVerdict::plain(
                    Verdict::Unstable(UnstableReason::NonHyperbolicReturnMap),
                    desc,
                ),
            }
        }
        FoldFoldSubtype::VisibleVisible => {
            let tag = sliding_region_class(params);
            let desc = ClassDescriptor {
                region: Some(tag),
                ..ClassDescriptor::new(kind)
                    .sign("alpha", banded(a, l))
                    .sign("beta", banded(b, l))
                    .sign("alpha*beta-gamma", banded(a * b - g, q))
            };
            let verdict = match tag {
                SlidingRegionTag::RH1 | SlidingRegionTag::RH2 => Verdict::Stable,
                _ => Verdict::BoundaryDegenerate(BoundaryWitness {
                    condition: "boundary of RH1".into(),
                    value: (a * b - g).as_f64(),
                }),
            };
            StabilityVerdict::plain(verdict, desc)
        }
        FoldFoldSubtype::InvisibleVisible | FoldFoldSubtype::VisibleInvisible => {
            let tag = sliding_region_class(params);
            let (a, b, g) = parabolic_chart(params);
            let t_coeff = T::two() * a * (a + b) - g;
            let s_alpha = banded(a, l);
            let s_sum = banded(a + b, l);
            let s_t = banded(t_coeff, q);
            let desc = ClassDescriptor {
                region: Some(tag),
                ..ClassDescriptor::new(kind)
                    .sign("alpha", s_alpha)
                    .sign("alpha+beta", s_sum)
                    .sign("2*alpha*(alpha+beta)-gamma", s_t)
            };
            if tag == SlidingRegionTag::BifurcationBoundary {
                return StabilityVerdict::plain(
                    Verdict::Unstable(UnstableReason::SlidingBifurcation),
                    desc,
                );
            }
            let mut failures = Vec::new();
            if s_alpha == Sign::Zero {
                failures.push(UnstableReason::TransversalityFailure(TransversalityKind::FoldImage));
            }
            if s_t == Sign::Zero {
                failures.push(UnstableReason::TransversalityFailure(TransversalityKind::T));
            }
            if s_alpha == Sign::Positive && s_sum == Sign::Zero {
                failures.push(UnstableReason::TransversalityFailure(TransversalityKind::D));
            }
            if failures.is_empty() {
                StabilityVerdict::plain(Verdict::Stable, desc)
            } else {
                let first = failures.remove(0);
                StabilityVerdict {
                    verdict: Verdict::Unstable(first),
                    additional: failures,
                    class_descriptor: desc,
                    moduli: None,
                }
            }
        }
    }
}

/// Local structural stability verdict at a Σ-point.
pub fn stability_verdict<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> Result<StabilityVerdict, FoldFoldError> {
    let c = classify_point(sys, p, tol);
    let desc = ClassDescriptor::new(c.kind);
    Ok(match c.kind {
        SigmaKind::Crossing => StabilityVerdict::plain(Verdict::Stable, desc),
        SigmaKind::StableSliding | SigmaKind::UnstableSliding => {
            let f = normalized_sliding_field(sys);
            let v = f.eval(p);
            if v[0].abs().max(v[1].abs()) > tol {
                StabilityVerdict::plain(Verdict::Stable, desc)
            } else {
                let den = c.yf - c.xf;
                let jn = f.jacobian(p);
                let j = crate::linalg::Mat2::new(
                    jn.m[0][0] / den,
                    jn.m[0][1] / den,
                    jn.m[1][0] / den,
                    jn.m[1][1] / den,
                );
                let kind = PseudoEquilibriumKind::of_matrix(&j, T::lit(1e-9));
                let desc = desc
                    .sign("det", banded(j.det(), T::zero()))
                    .sign("trace", banded(j.trace(), T::zero()));
                if kind.is_hyperbolic() {
                    StabilityVerdict::plain(Verdict::Stable, desc)
                } else {
                    StabilityVerdict::plain(
                        Verdict::Unstable(UnstableReason::SlidingBifurcation),
                        desc,
                    )
                }
            }
        }
        SigmaKind::Tangency(
            TangencyType::FoldRegular
            | TangencyType::RegularFold
            | TangencyType::CuspRegular
            | TangencyType::RegularCusp,
        ) => StabilityVerdict::plain(Verdict::Stable, desc),
        SigmaKind::Tangency(TangencyType::FoldFold(_)) => {
            verdict_for_parameters(&normal_parameters(sys, p, tol)?)
        }
        SigmaKind::Tangency(TangencyType::Degenerate) => StabilityVerdict::plain(
            Verdict::BoundaryDegenerate(BoundaryWitness {
                condition: "degenerate tangency".into(),
                value: c.xf.abs().max(c.yf.abs()).as_f64(),
            }),
            desc,
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConnectionStatus {
    /// `φ_X` carries part of `Σ^us` into `Σ^ss`.
    Exists,
    Absent,
    /// `α = 0`: `φ_X(S_Y)` is tangent to `S_Y`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConnectionRegion<T> {
    pub status: ConnectionStatus,
    /// Direction of the line `φ_X(S_Y)` in the invisible-visible chart.
    pub direction: [T; 2],
}

/// Whether the invisible fold connects the two sliding regions at a parabolic point.
pub fn connection_region<T: Scalar>(
    params: &NormalParameters<T>,
) -> Result<ConnectionRegion<T>, FoldFoldError> {
    if !params.subtype.is_parabolic() {
        return Err(FoldFoldError::WrongSubtype {
            expected: "parabolic",
            found: params.subtype.name(),
        });
    }
    let (a, _, _) = parabolic_chart(params);
    let band = Bands::for_params(params).linear;
    let status = match banded(a, band) {
        Sign::Positive => ConnectionStatus::Exists,
        Sign::Negative => ConnectionStatus::Absent,
        Sign::Zero => ConnectionStatus::Degenerate,
    };
    Ok(ConnectionRegion {
        status,
        direction: [-T::two() * a, -T::one()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ParabolicCoefficients<T> {
    /// `-2(α+β)(αβ-γ)`.
    pub d_coeff: T,
    /// `2α(α+β) - γ`.
    pub t_coeff: T,
    /// Either coefficient inside its band.
    pub failure: bool,
}

pub fn parabolic_transversality<T: Scalar>(
    params: &NormalParameters<T>,
) -> Result<ParabolicCoefficients<T>, FoldFoldError> {
    if !params.subtype.is_parabolic() {
        return Err(FoldFoldError::WrongSubtype {
            expected: "parabolic",
            found: params.subtype.name(),
        });
    }
    let (a, b, g) = parabolic_chart(params);
    let bands = Bands::for_params(params);
    let d_coeff = -T::two() * (a + b) * (a * b - g);
    let t_coeff = T::two() * a * (a + b) - g;
    let s = params.scale();
    let failure = d_coeff.abs() <= bands.quadratic * s || t_coeff.abs() <= bands.quadratic;
    Ok(ParabolicCoefficients {
        d_coeff,
        t_coeff,
        failure,
    })
}
