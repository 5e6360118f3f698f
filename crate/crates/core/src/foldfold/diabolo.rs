use serde::{Deserialize, Serialize};

use crate::integrator::{fold_map_numeric, jacobian_numeric, return_map_numeric, IntegratorConfig};
use crate::linalg::{cross2, Mat2};
use crate::scalar::Scalar;
use crate::sigma::{classify_point, default_tol, SigmaKind, SigmaPoint};
use crate::system::{PiecewiseSystem, Side};

use super::{
    normal_parameters, return_map_analysis, verdict_for_parameters, EigenLocation, FoldFoldError,
    Verdict,
};

/// Largest accepted `dist / r²` for the reversibility exchange.
pub const EXCHANGE_C_MAX: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiaboloConfig {
    pub seeds: usize,
    pub max_iterations: usize,
    /// Seed disc radius as a fraction of the Σ-slice half-width.
    pub seed_radius: f64,
    pub jacobian_step: f64,
}

impl Default for DiaboloConfig {
    fn default() -> Self {
        Self {
            seeds: 1000,
            max_iterations: 500,
            seed_radius: 0.5,
            jacobian_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DiaboloStatus {
    Pass,
    Fail,
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiaboloReport {
    pub status: DiaboloStatus,
    pub eigenvectors_in_crossing: bool,
    /// Slopes `v_y / v_x` of the analytic eigen-directions, contracting first.
    pub slopes: Option<[f64; 2]>,
    /// Largest `dist(φ_X(W^u), W^s) / r²` over the samples.
    pub exchange_constant: f64,
    pub seeds: usize,
    pub escaped: usize,
    pub capped: usize,
    pub violations: usize,
}

impl DiaboloReport {
    fn not_applicable(reason: String, in_crossing: bool, slopes: Option<[f64; 2]>) -> Self {
        Self {
            status: DiaboloStatus::NotApplicable(reason),
            eigenvectors_in_crossing: in_crossing,
            slopes,
            exchange_constant: 0.0,
            seeds: 0,
            escaped: 0,
            capped: 0,
            violations: 0,
        }
    }
}

/// Saddle directions `(v_s, v_u)` of a numeric Jacobian.
pub(crate) fn saddle_directions<T: Scalar>(j: &Mat2<T>) -> Option<([T; 2], [T; 2])> {
    let [l0, l1] = j.eigenvalues();
    if l0.im != T::zero() || l1.im != T::zero() {
        return None;
    }
    let (mut u, mut s) = (l0.re, l1.re);
    if u.abs() < s.abs() {
        std::mem::swap(&mut u, &mut s);
    }
    if !(u.abs() > T::one() && s.abs() < T::one()) {
        return None;
    }
    let unit = |v: [T; 2]| {
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    Some((unit(j.eigenvector(s)), unit(j.eigenvector(u))))
}

/// Deterministic spiral of points in a disc of radius `r` around `p`.
pub(crate) fn spiral_point<T: Scalar>(p: SigmaPoint<T>, r: T, k: usize, n: usize) -> SigmaPoint<T> {
    let golden = T::lit(0.618_033_988_749_895);
    let frac = (T::lit(k as f64) * golden).fract();
    let angle = T::two() * T::lit(std::f64::consts::PI) * frac;
    let rad = r * ((T::lit(k as f64) + T::lit(0.5)) / T::lit(n as f64)).sqrt();
    [p[0] + rad * angle.cos(), p[1] + rad * angle.sin()]
}

/// Checks the invariant diabolo of a stable T-singularity numerically.
pub fn diabolo_check<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    icfg: &IntegratorConfig<T>,
    dcfg: &DiaboloConfig,
) -> Result<DiaboloReport, FoldFoldError> {
    let tol = default_tol(sys);
    let params = normal_parameters(sys, p, tol)?;
    let analysis = match return_map_analysis(&params) {
        Ok(a) => a,
        Err(e) => return Ok(DiaboloReport::not_applicable(e.to_string(), false, None)),
    };
    let (in_crossing, slopes) = match &analysis.saddle {
        Some(s) => (
            s.location_mu == EigenLocation::InCrossing
                && s.location_lambda == EigenLocation::InCrossing,
            Some([
                (s.v_mu[1] / s.v_mu[0]).as_f64(),
                (s.v_lambda[1] / s.v_lambda[0]).as_f64(),
            ]),
        ),
        None => (false, None),
    };
    if !in_crossing {
        return Ok(DiaboloReport::not_applicable(
            "eigen-directions are not both in the crossing region".into(),
            false,
            slopes,
        ));
    }
    let verdict = verdict_for_parameters(&params);
    if verdict.verdict != Verdict::Stable {
        return Ok(DiaboloReport::not_applicable(
            format!("verdict is {}", verdict.verdict.code()),
            in_crossing,
            slopes,
        ));
    }

    let bx = sys.domain_box();
    let half = ((bx.max[0] - bx.min[0]).min(bx.max[1] - bx.min[1])) / T::two();
    let h = T::lit(dcfg.jacobian_step) * half;
    let j = jacobian_numeric(|q| return_map_numeric(sys, q, icfg), p, h)?;
    let (v_s, v_u) = saddle_directions(&j).ok_or(FoldFoldError::NotSaddle)?;

    let mut exchange = T::zero();
    for k in 0..4 {
        let r = T::lit(1e-3 * f64::from(1u32 << k)) * half;
        for sgn in [T::one(), -T::one()] {
            let q = [p[0] + sgn * r * v_u[0], p[1] + sgn * r * v_u[1]];
            let img = fold_map_numeric(sys, Side::X, q, icfg)?;
            let d = cross2([img[0] - p[0], img[1] - p[1]], v_s).abs();
            exchange = exchange.max(d / (r * r));
        }
    }

    let r_seed = T::lit(dcfg.seed_radius) * half;
    let (mut seeds, mut escaped, mut capped, mut violations) = (0, 0, 0, 0);
    let mut k = 0;
    while seeds < dcfg.seeds && k < 20 * dcfg.seeds.max(1) {
        let q0 = spiral_point(p, r_seed, k, 4 * dcfg.seeds.max(1));
        k += 1;
        if classify_point(sys, q0, tol).kind != SigmaKind::UnstableSliding {
            continue;
        }
        seeds += 1;
        let mut q = q0;
        let mut done = false;
        for _ in 0..dcfg.max_iterations {
            q = match return_map_numeric(sys, q, icfg) {
                Ok(q) => q,
                Err(_) => {
                    escaped += 1;
                    done = true;
                    break;
                }
            };
            if !bx.contains([q[0], q[1], T::zero()]) {
                escaped += 1;
                done = true;
                break;
            }
            if classify_point(sys, q, tol).kind == SigmaKind::StableSliding {
                violations += 1;
                done = true;
                break;
            }
        }
        if !done {
            capped += 1;
        }
    }

    let exchange_constant = exchange.as_f64();
    let pass = violations == 0 && exchange_constant <= EXCHANGE_C_MAX;
    Ok(DiaboloReport {
        status: if pass { DiaboloStatus::Pass } else { DiaboloStatus::Fail },
        eigenvectors_in_crossing: true,
        slopes,
        exchange_constant,
        seeds,
        escaped,
        capped,
        violations,
    })
}
