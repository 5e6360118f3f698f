use serde::{Deserialize, Serialize};

use crate::integrator::{fold_map_numeric, jacobian_numeric, IntegratorConfig, IntegratorError};
use crate::linalg::{cross2, Mat2};
use crate::scalar::Scalar;
use crate::sigma::{classify_point, default_tol, SigmaKind, SigmaPoint};
use crate::sliding::normalized_sliding_field;
use crate::system::{PiecewiseSystem, Side};

use super::diabolo::saddle_directions;
use super::{normal_parameters, return_map_analysis, EigenLocation, FoldFoldError};

const FIT_RADII: usize = 8;

/// Leading coefficient estimate of `det(F_i, F_j)` along one manifold branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebPair {
    pub i: usize,
    pub j: usize,
    /// `+1` or `-1`: which branch of the manifold was sampled.
    pub branch: i8,
    /// Manifold sampled: `"stable"` or `"unstable"`.
    pub manifold: String,
    pub coefficient: f64,
    pub transversal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WebReport {
    NotApplicable(String),
    Scan { n: usize, pairs: Vec<WebPair>, radius: f64 },
}

/// `ψ = φ_Y ∘ φ_X`, the inverse of the return map.
fn inverse_return<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    q: SigmaPoint<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<SigmaPoint<T>, IntegratorError> {
    let a = fold_map_numeric(sys, Side::X, q, cfg)?;
    fold_map_numeric(sys, Side::Y, a, cfg)
}

fn iterate<T: Scalar>(
    map: impl Fn(SigmaPoint<T>) -> Result<SigmaPoint<T>, IntegratorError>,
    mut q: SigmaPoint<T>,
    times: usize,
) -> Result<SigmaPoint<T>, IntegratorError> {
    for _ in 0..times {
        q = map(q)?;
    }
    Ok(q)
}

/// Push-forward `(φ^{2i})_* F_0` evaluated at `q`.
fn pushed_field<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    f0: &crate::sliding::PlanarField<T>,
    i: usize,
    q: SigmaPoint<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<[T; 2], IntegratorError> {
    if i == 0 {
        return Ok(f0.eval(q));
    }
    let src = iterate(|x| inverse_return(sys, x, cfg), q, 2 * i)?;
    let h = (src[0].hypot(src[1]) * T::lit(1e-3)).max(T::lit(1e-9));
    let forward = |x| {
        iterate(
            |y| {
                let a = fold_map_numeric(sys, Side::Y, y, cfg)?;
                fold_map_numeric(sys, Side::X, a, cfg)
            },
            x,
            2 * i,
        )
    };
    let j: Mat2<T> = jacobian_numeric(forward, src, h)?;
    Ok(j.apply(f0.eval(src)))
}

/// Least-squares `A` in `det ≈ A t² + B t³`.
fn fit_leading<T: Scalar>(ts: &[T], ds: &[T]) -> T {
    let (mut s44, mut s45, mut s55, mut r4, mut r5) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (&t, &d) in ts.iter().zip(ds) {
        let (a, b) = (t * t, t * t * t);
        s44 = s44 + a * a;
        s45 = s45 + a * b;
        s55 = s55 + b * b;
        r4 = r4 + a * d;
        r5 = r5 + b * d;
    }
    let det = s44 * s55 - s45 * s45;
    (r4 * s55 - r5 * s45) / det
}

/// Pairwise transversality of the pushed foliations `F_i = (φ^{2i})_* F_0`, `i ≤ n`.
pub fn web_scan<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    n: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<WebReport, FoldFoldError> {
    let tol = default_tol(sys);
    let params = normal_parameters(sys, p, tol)?;
    let analysis = match return_map_analysis(&params) {
        Ok(a) => a,
        Err(e) => return Ok(WebReport::NotApplicable(e.to_string())),
    };
    let Some(saddle) = analysis.saddle else {
        return Ok(WebReport::NotApplicable("fixed point is not a saddle".into()));
    };
    if saddle.location_mu != EigenLocation::InSliding
        && saddle.location_lambda != EigenLocation::InSliding
    {
        return Ok(WebReport::NotApplicable(
            "no invariant manifold lies in the sliding region".into(),
        ));
    }
    let bx = sys.domain_box();
    let half = ((bx.max[0] - bx.min[0]).min(bx.max[1] - bx.min[1])) / T::two();
    if n == 0 {
        return Ok(WebReport::Scan { n, pairs: Vec::new(), radius: 0.0 });
    }
    let j = jacobian_numeric(
        |q| {
            let a = fold_map_numeric(sys, Side::Y, q, cfg)?;
            fold_map_numeric(sys, Side::X, a, cfg)
        },
        p,
        T::lit(1e-5) * half,
    )?;
    let (v_s, v_u) = saddle_directions(&j).ok_or(FoldFoldError::NotSaddle)?;
    let expansion = {
        let [l0, l1] = j.eigenvalues();
        l0.re.abs().max(l1.re.abs())
    };
    let f0 = normalized_sliding_field(sys);
    let scale = T::one() + sys.coefficient_scale();

    let mut radius = T::lit(1e-2) * half;
    for attempt in 0..2 {
        let mut pairs = Vec::new();
        let mut stable_fit = true;
        for (name, v) in [("stable", v_s), ("unstable", v_u)] {
            // Pulling back along the stable manifold expands; keep the preimages in the box.
            let radius = if name == "stable" {
                radius.min(T::lit(0.1) * half / expansion.powi(2 * n as i32))
            } else {
                radius
            };
            let probe = [p[0] + radius * v[0], p[1] + radius * v[1]];
            let kind = classify_point(sys, probe, tol).kind;
            if !matches!(kind, SigmaKind::StableSliding | SigmaKind::UnstableSliding) {
                continue;
            }
            for branch in [1i8, -1] {
                let sgn = T::lit(f64::from(branch));
                let ts: Vec<T> = (0..FIT_RADII)
                    .map(|k| radius * T::lit(1.0 - 0.1 * k as f64))
                    .collect();
                let mut fields = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    let col: Result<Vec<[T; 2]>, IntegratorError> = ts
                        .iter()
                        .map(|&t| {
                            let q = [p[0] + sgn * t * v[0], p[1] + sgn * t * v[1]];
                            pushed_field(sys, &f0, i, q, cfg)
                        })
                        .collect();
                    fields.push(col?);
                }
                for i in 0..=n {
                    for jj in (i + 1)..=n {
                        let ds: Vec<T> = (0..FIT_RADII)
                            .map(|k| cross2(fields[i][k], fields[jj][k]))
                            .collect();
                        let a = fit_leading(&ts, &ds);
                        let a_lo = fit_leading(&ts[FIT_RADII / 2..], &ds[FIT_RADII / 2..]);
                        let a_hi = fit_leading(&ts[..FIT_RADII / 2], &ds[..FIT_RADII / 2]);
                        let spread = (a_lo - a_hi).abs();
                        let floor = T::lit(1e-8) * scale * scale * scale * scale;
                        if spread > T::lit(1e-2) * a.abs().max(floor) {
                            stable_fit = false;
                        }
                        pairs.push(WebPair {
                            i,
                            j: jj,
                            branch,
                            manifold: name.to_string(),
                            coefficient: a.as_f64(),
                            transversal: a.abs() > floor,
                        });
                    }
                }
            }
        }
        if stable_fit {
            return Ok(WebReport::Scan { n, pairs, radius: radius.as_f64() });
        }
        if attempt == 0 {
            radius = radius * T::lit(10.0);
        }
    }
    Err(FoldFoldError::FitUnstable)
}
