use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::sigma::{fold_transversality, FoldFoldSubtype, SigmaPoint};
use crate::system::PiecewiseSystem;

use super::FoldFoldError;

/// Normal parameters `(α, β, γ, δ)` of a fold-fold point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormalParameters<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: i8,
    pub subtype: FoldFoldSubtype,
}

impl<T: Scalar> NormalParameters<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: i8) -> Result<Self, FoldFoldError> {
        if delta != 1 && delta != -1 {
            return Err(FoldFoldError::InvalidParameters(format!(
                "delta must be ±1, got {delta}"
            )));
        }
        if gamma == T::zero() || !gamma.is_finite() || !alpha.is_finite() || !beta.is_finite() {
            return Err(FoldFoldError::InvalidParameters(
                "parameters must be finite with gamma ≠ 0".into(),
            ));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
            subtype: FoldFoldSubtype::from_signs(delta > 0, gamma > T::zero()),
        })
    }

    /// Elliptic parameters (`δ = -1`, `γ > 0`).
    pub fn elliptic(alpha: T, beta: T, gamma: T) -> Self {
        assert!(gamma > T::zero(), "elliptic forms need gamma > 0");
        Self::new(alpha, beta, gamma, -1).expect("valid elliptic parameters")
    }

    pub fn delta_t(&self) -> T {
        if self.delta > 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `(eα, eβ, e²γ)`, the residual freedom of the normal form.
    pub fn rescaled(&self, e: T) -> Self {
        Self {
            alpha: self.alpha * e,
            beta: self.beta * e,
            gamma: self.gamma * e * e,
            ..*self
        }
    }

    /// Representative with `|γ| = 1`.
    pub fn normalized(&self) -> Self {
        self.rescaled(T::one() / self.gamma.abs().sqrt())
    }

    /// Homogeneity scale `max(|α|, |β|, √|γ|)` used for relative bands.
    pub fn scale(&self) -> T {
        self.alpha
            .abs()
            .max(self.beta.abs())
            .max(self.gamma.abs().sqrt())
    }

    pub fn cast<U: Scalar>(&self) -> NormalParameters<U> {
        NormalParameters {
            alpha: U::lit(self.alpha.as_f64()),
            beta: U::lit(self.beta.as_f64()),
            gamma: U::lit(self.gamma.as_f64()),
            delta: self.delta,
            subtype: self.subtype,
        }
    }
}

/// Reads the normal parameters from Lie derivatives at a fold-fold point.
pub fn normal_parameters<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> Result<NormalParameters<T>, FoldFoldError> {
    let l = sys.lie();
    let at = |q: &crate::algebra::Poly3<T>| q.eval_sigma(p[0], p[1]);
    let (xf, yf) = (at(&l.xf), at(&l.yf));
    if xf.abs() > tol || yf.abs() > tol {
        return Err(FoldFoldError::NotFoldFold {
            xf: xf.as_f64(),
            yf: yf.as_f64(),
        });
    }
    let (x2f, y2f) = (at(&l.x2f), at(&l.y2f));
    if x2f.abs() <= tol || y2f.abs() <= tol {
        return Err(FoldFoldError::Degenerate {
            x2f: x2f.as_f64(),
            y2f: y2f.as_f64(),
        });
    }
    let t = fold_transversality(sys, p, tol);
    if !t.transversal {
        return Err(FoldFoldError::NotTransversal { det: t.det.as_f64() });
    }
    let delta: i8 = if x2f > T::zero() { 1 } else { -1 };
    let gamma = if y2f > T::zero() { T::one() } else { -T::one() };
    let norm = (x2f.abs() * y2f.abs()).sqrt();
    let alpha = at(&l.xyf) / norm;
    let beta = T::lit(delta as f64) * at(&l.yxf) / norm;
    NormalParameters::new(alpha, beta, gamma, delta)
}
