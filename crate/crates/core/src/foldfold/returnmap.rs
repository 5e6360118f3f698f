use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;
use crate::scalar::Scalar;
use crate::sigma::FoldFoldSubtype;

use super::{FoldFoldError, NormalParameters};

/// Linear parts `(A_X, A_Y)` of the fold involutions.
pub fn analytic_involutions<T: Scalar>(params: &NormalParameters<T>) -> (Mat2<T>, Mat2<T>) {
    let two = T::two();
    let ax = Mat2::new(T::one(), -two * params.alpha, T::zero(), -T::one());
    let ay = Mat2::new(-T::one(), T::zero(), -two * params.beta / params.gamma, T::one());
    (ax, ay)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum FixedPointClass<T> {
    Saddle,
    /// Eigenvalues `e^{±iτ}`.
    NonHyperbolicComplex { tau: T },
    /// Trace `2`: double eigenvalue `1`, on `αβ = γ`.
    NonHyperbolicUnit,
    /// Trace `-2`: double eigenvalue `-1`, on `αβ = 0`.
    ParabolicBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EigenLocation {
    InCrossing,
    InSliding,
    OnTangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PosinvCase {
    /// `α > 0, β > 0`: both eigenvectors in `Σ^s`.
    A,
    /// `α > 0, β < 0`: `v_μ ∈ Σ^c`, `v_λ ∈ Σ^s`.
    B,
    /// `α < 0, β > 0`: `v_μ ∈ Σ^s`, `v_λ ∈ Σ^c`.
    C,
    /// `α < 0, β < 0`: both in `Σ^c`.
    D,
}

impl PosinvCase {
    /// Placements `(v_μ, v_λ)` stated for the case.
    pub fn expected(self) -> (EigenLocation, EigenLocation) {
        use EigenLocation::*;
        match self {
            PosinvCase::A => (InSliding, InSliding),
            PosinvCase::B => (InCrossing, InSliding),
            PosinvCase::C => (InSliding, InCrossing),
            PosinvCase::D => (InCrossing, InCrossing),
        }
    }

    pub fn from_signs<T: Scalar>(alpha: T, beta: T) -> Option<Self> {
        let z = T::zero();
        match (alpha > z, alpha < z, beta > z, beta < z) {
            (true, _, true, _) => Some(PosinvCase::A),
            (true, _, _, true) => Some(PosinvCase::B),
            (_, true, true, _) => Some(PosinvCase::C),
            (_, true, _, true) => Some(PosinvCase::D),
            _ => None,
        }
    }
}

/// Saddle eigen-data; `μ` contracts and `λ` expands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SaddleData<T> {
    pub mu: T,
    pub lambda: T,
    pub v_mu: [T; 2],
    pub v_lambda: [T; 2],
    pub location_mu: EigenLocation,
    pub location_lambda: EigenLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReturnMapAnalysis<T> {
    pub matrix: Mat2<T>,
    pub eigenvalues: [Complex<T>; 2],
    pub trace: T,
    pub det: T,
    pub fixed_point_class: FixedPointClass<T>,
    pub saddle: Option<SaddleData<T>>,
}

/// Relative band on the degree-four saddle discriminant `αβ(αβ - γ)`.
pub const SADDLE_BAND: f64 = 1e-9;

/// Eigenvector of `[[m11, m12], [m21, -1]]` for `ℓ`, from the first row.
fn eigenvector<T: Scalar>(m: &Mat2<T>, ell: T) -> [T; 2] {
    let v = [m.m[0][1], ell - m.m[0][0]];
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Location of a line through the origin in the chart where `Σ^c = {xy < 0}`.
pub fn locate_direction<T: Scalar>(v: [T; 2]) -> EigenLocation {
    let p = v[0] * v[1];
    let band = T::lit(1e-9) * (v[0] * v[0] + v[1] * v[1]);
    if p < -band {
        EigenLocation::InCrossing
    } else if p > band {
        EigenLocation::InSliding
    } else {
        EigenLocation::OnTangency
    }
}

/// Linear part of `φ = φ_X ∘ φ_Y` at a T-singularity and its fixed-point type.
pub fn return_map_analysis<T: Scalar>(
    params: &NormalParameters<T>,
) -> Result<ReturnMapAnalysis<T>, FoldFoldError> {
    if params.subtype != FoldFoldSubtype::Invisible {
        return Err(FoldFoldError::WrongSubtype {
            expected: "invisible",
            found: params.subtype.name(),
        });
    }
    let (a, b, g) = (params.alpha, params.beta, params.gamma);
    let two = T::two();
    let four = two * two;
    let ratio = a * b / g;
    let matrix = Mat2::new(-T::one() + four * ratio, -two * a, two * b / g, -T::one());
    let trace = four * ratio - two;
    let det = T::one();

    let s = params.scale();
    let s2 = s * s;
    let q = a * b * (a * b - g);
    let band = T::lit(SADDLE_BAND) * s2 * s2;
    let half = trace / two;
    let (fixed_point_class, eigenvalues, saddle) = if q > band {
        let root = (half * half - T::one()).sqrt();
        let lambda = half + half.signum() * root;
        let mu = T::one() / lambda;
        let v_mu = eigenvector(&matrix, mu);
        let v_lambda = eigenvector(&matrix, lambda);
        (
            FixedPointClass::Saddle,
            [Complex::new(lambda, T::zero()), Complex::new(mu, T::zero())],
            Some(SaddleData {
                mu,
                lambda,
                v_mu,
                v_lambda,
                location_mu: locate_direction(v_mu),
                location_lambda: locate_direction(v_lambda),
            }),
        )
    } else if q < -band {
        let im = (T::one() - half * half).max(T::zero()).sqrt();
        let tau = im.atan2(half);
        (
            FixedPointClass::NonHyperbolicComplex { tau },
            [Complex::new(half, im), Complex::new(half, -im)],
            None,
        )
    } else {
        let class = if (a * b - g).abs() <= (a * b).abs() {
            FixedPointClass::NonHyperbolicUnit
        } else {
            FixedPointClass::ParabolicBoundary
        };
        (class, matrix.eigenvalues(), None)
    };
    Ok(ReturnMapAnalysis {
        matrix,
        eigenvalues,
        trace,
        det,
        fixed_point_class,
        saddle,
    })
}

/// de Melo–Palis invariant `log|μ| / log|λ|` of a saddle return map.
pub fn demelo_palis<T: Scalar>(analysis: &ReturnMapAnalysis<T>) -> Result<T, FoldFoldError> {
    match analysis.saddle {
        Some(s) => Ok(demelo_palis_from(s.mu, s.lambda)),
        None => Err(FoldFoldError::NotSaddle),
    }
}

/// `log|μ| / log|λ|` for a pair of real eigenvalues.
pub fn demelo_palis_from<T: Scalar>(mu: T, lambda: T) -> T {
    let (small, large) = if mu.abs() < lambda.abs() {
        (mu, lambda)
    } else {
        (lambda, mu)
    };
    small.abs().ln() / large.abs().ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModuliInfo<T> {
    pub tau: T,
    pub tau_over_pi: T,
    /// Continued-fraction convergents `p/q` of `τ/π`.
    pub convergents: Vec<(u64, u64)>,
    pub leaf_id: T,
}

/// Largest convergent denominator reported.
pub const MAX_CONVERGENT_DENOMINATOR: u64 = 1_000_000;

pub fn moduli_info<T: Scalar>(analysis: &ReturnMapAnalysis<T>) -> Option<ModuliInfo<T>> {
    match analysis.fixed_point_class {
        FixedPointClass::NonHyperbolicComplex { tau } => Some(moduli_from_tau(tau)),
        _ => None,
    }
}

pub fn moduli_from_tau<T: Scalar>(tau: T) -> ModuliInfo<T> {
    let ratio = tau / T::PI();
    ModuliInfo {
        tau,
        tau_over_pi: ratio,
        convergents: convergents(ratio.as_f64(), MAX_CONVERGENT_DENOMINATOR),
        leaf_id: tau,
    }
}

/// Convergents of `x ∈ (0, 1)`, skipping the leading `0/1`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut h_prev, mut h) = (1u64, x.floor() as u64);
    let (mut k_prev, mut k) = (0u64, 1u64);
    let mut frac = x - x.floor();
    if h > 0 {
        out.push((h, k));
    }
    while frac > 1e-12 {
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as u64;
        let (h_next, k_next) = (a * h + h_prev, a * k + k_prev);
        if k_next > max_den {
            break;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        out.push((h, k));
        if (h as f64 / k as f64 - x).abs() < 1e-15 {
            break;
        }
    }
    out
}
