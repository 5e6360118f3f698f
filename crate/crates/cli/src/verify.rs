use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use twofold::foldfold::{
    diabolo_check, normal_parameters, verdict_for_parameters, DiaboloConfig, DiaboloStatus,
    NormalParameters,
};
use twofold::integrator::{fold_map_numeric, jacobian_numeric, return_map_numeric, IntegratorConfig};
use twofold::sigma::FoldFoldSubtype;
use twofold::sliding::{normalized_sliding_field, sliding_region_class, SlidingRegionTag};
use twofold::system::{build_normal_form, Aabb, Side};
use twofold::System;

use crate::args::Suite;
use crate::{emit, read_system, tolerance, CliError, GlobalOpts};

/// Samples per fold-map involution check.
pub const INVOLUTION_SAMPLES: usize = 200;
pub const INVOLUTION_TOL: f64 = 1e-9;
pub const JACOBIAN_TOL: f64 = 1e-4;
pub const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub property: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub detail: String,
}

fn result(property: &'static str, pass: bool, residual: f64, detail: String) -> PropertyResult {
    PropertyResult {
        property,
        status: if pass { Status::Pass } else { Status::Fail },
        residual: Some(residual),
        detail,
    }
}

fn skip(property: &'static str, detail: impl Into<String>) -> PropertyResult {
    PropertyResult { property, status: Status::Skip, residual: None, detail: detail.into() }
}

struct Context<'a> {
    sys: &'a System,
    p: [f64; 2],
    params: NormalParameters<f64>,
    cfg: IntegratorConfig<f64>,
    seed: u64,
    half: f64,
}

fn round_trip(cx: &Context<'_>) -> PropertyResult {
    const NAME: &str = "normal-parameter-round-trip";
    let Some(d) = cx.sys.declared() else {
        return skip(NAME, "no declared normal parameters");
    };
    let Ok(declared) = NormalParameters::new(d.alpha, d.beta, d.gamma, d.delta) else {
        return result(NAME, false, f64::INFINITY, "declared parameters are invalid".into());
    };
    let declared = declared.normalized();
    let got = cx.params;
    if got.subtype != declared.subtype {
        return result(
            NAME,
            false,
            f64::INFINITY,
            format!("subtype {} but declared {}", got.subtype.name(), declared.subtype.name()),
        );
    }
    let r = (got.alpha - declared.alpha)
        .abs()
        .max((got.beta - declared.beta).abs())
        .max((got.gamma - declared.gamma).abs());
    result(NAME, r <= ROUND_TRIP_TOL, r, format!("max parameter difference {r:.2e}"))
}

fn involution(cx: &Context<'_>, side: Side) -> PropertyResult {
    let name = match side {
        Side::X => "fold-map-involution-x",
        Side::Y => "fold-map-involution-y",
    };
    let invisible = match side {
        Side::X => cx.params.delta < 0,
        Side::Y => cx.params.gamma > 0.0,
    };
    if !invisible {
        return skip(name, "fold is visible");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cx.seed ^ side as u64);
    let radius = 0.1 * cx.half;
    let qs: Vec<[f64; 2]> = (0..INVOLUTION_SAMPLES)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            [cx.p[0] + r * th.cos(), cx.p[1] + r * th.sin()]
        })
        .collect();
    let errs: Vec<Option<f64>> = qs
        .par_iter()
        .map(|&q| {
            let a = fold_map_numeric(cx.sys, side, q, &cx.cfg).ok()?;
            let b = fold_map_numeric(cx.sys, side, a, &cx.cfg).ok()?;
            Some((b[0] - q[0]).hypot(b[1] - q[1]))
        })
        .collect();
    let returned: Vec<f64> = errs.into_iter().flatten().collect();
    if returned.is_empty() {
        return result(name, false, f64::INFINITY, "no sample returned".into());
    }
    let worst = returned.iter().copied().fold(0.0, f64::max);
    let tol = INVOLUTION_TOL * cx.half.max(1.0);
    result(
        name,
        worst <= tol,
        worst,
        format!("{} of {} samples returned, max |φ(φ(q)) - q| {worst:.2e}", returned.len(), qs.len()),
    )
}

fn return_jacobian(cx: &Context<'_>) -> PropertyResult {
    const NAME: &str = "return-map-jacobian";
    if cx.params.subtype != FoldFoldSubtype::Invisible {
        return skip(NAME, "both folds must be invisible");
    }
    let h = 1e-4 * cx.half;
    let j = match jacobian_numeric(|q| return_map_numeric(cx.sys, q, &cx.cfg), cx.p, h) {
        Ok(j) => j,
        Err(e) => return result(NAME, false, f64::INFINITY, format!("stencil failed: {e}")),
    };
    let p = cx.params;
    let trace = 4.0 * p.alpha * p.beta / p.gamma - 2.0;
    let r = ((j.trace() - trace).abs() / trace.abs().max(1.0)).max((j.det() - 1.0).abs());
    result(
        NAME,
        r <= JACOBIAN_TOL,
        r,
        format!("numeric trace {:.8} (analytic {trace:.8}), det {:.8}", j.trace(), j.det()),
    )
}

fn sliding_spectrum(cx: &Context<'_>) -> PropertyResult {
    const NAME: &str = "sliding-spectrum";
    use SlidingRegionTag::*;
    let tag = sliding_region_class(&cx.params);
    // Positive time rescalings of X and Y leave these signs unchanged.
    let j = normalized_sliding_field(cx.sys).jacobian(cx.p);
    let (det, tr, disc) = (j.det(), j.trace(), j.discriminant());
    let ok = match tag {
        RE1 | RP4 => det > 0.0 && tr < 0.0 && disc > 0.0,
        RH1 | RP3 => det > 0.0 && tr > 0.0 && disc > 0.0,
        RP1 | RP2 => det < 0.0,
        _ => return skip(NAME, format!("no spectrum stated for {}", tag.name())),
    };
    result(
        NAME,
        ok,
        det.abs().min(tr.abs()),
        format!("{}: det {det:.4}, trace {tr:.4}, discriminant {disc:.4}", tag.name()),
    )
}

fn normalization(cx: &Context<'_>) -> PropertyResult {
    const NAME: &str = "normalization-invariance";
    let key = verdict_for_parameters(&cx.params).key();
    let tag = sliding_region_class(&cx.params);
    let changed = [0.1, 0.5, 2.0, 10.0]
        .iter()
        .filter(|&&e| {
            let q = cx.params.rescaled(e);
            verdict_for_parameters(&q).key() != key || sliding_region_class(&q) != tag
        })
        .count();
    result(NAME, changed == 0, changed as f64, format!("{changed} of 4 rescalings changed"))
}

fn diabolo(cx: &Context<'_>) -> PropertyResult {
    const NAME: &str = "diabolo";
    let dcfg = DiaboloConfig { seeds: 200, ..DiaboloConfig::default() };
    match diabolo_check(cx.sys, cx.p, &cx.cfg, &dcfg) {
        Ok(r) => match r.status {
            DiaboloStatus::NotApplicable(why) => skip(NAME, why),
            s => result(
                NAME,
                s == DiaboloStatus::Pass,
                r.exchange_constant,
                format!(
                    "{} seeds, {} violations, exchange constant {:.3e}",
                    r.seeds, r.violations, r.exchange_constant
                ),
            ),
        },
        Err(e) => skip(NAME, e.to_string()),
    }
}

pub fn verify(sys: &System, p: [f64; 2], suites: &[Suite], tol: f64, seed: u64) -> Result<Vec<PropertyResult>, CliError> {
    let want = |s: Suite| !suites.contains(&Suite::None) && (suites.contains(&Suite::All) || suites.contains(&s));
    if ![Suite::Involutions, Suite::Regions, Suite::Diabolo].iter().any(|&s| want(s)) {
        return Ok(Vec::new());
    }
    let params = normal_parameters(sys, p, tol)
        .map_err(|e| CliError::Precondition(format!("({}, {}) is not a usable fold-fold point: {e}", p[0], p[1])))?;
    let b: &Aabb<f64> = sys.domain_box();
    let half = (b.max[0] - b.min[0]).min(b.max[1] - b.min[1]) / 2.0;
    let cx = Context { sys, p, params, cfg: IntegratorConfig::for_system(sys), seed, half };
    let mut out = Vec::new();
    if want(Suite::Involutions) {
        out.push(round_trip(&cx));
        out.push(involution(&cx, Side::X));
        out.push(involution(&cx, Side::Y));
        out.push(return_jacobian(&cx));
    }
    if want(Suite::Regions) {
        out.push(sliding_spectrum(&cx));
        out.push(normalization(&cx));
    }
    if want(Suite::Diabolo) {
        out.push(diabolo(&cx));
    }
    Ok(out)
}

pub fn run(
    path: Option<&Path>,
    params: Option<[f64; 4]>,
    p: [f64; 2],
    suites: &[Suite],
    g: &GlobalOpts,
) -> Result<(), CliError> {
    let sys = match path {
        Some(path) => read_system(path, g)?,
        None => {
            let [a, b, c, d] = params.unwrap_or([-1.0, -1.0, 0.5, -1.0]);
            if d != 1.0 && d != -1.0 {
                return Err(CliError::Precondition("delta must be 1 or -1".into()));
            }
            let sys = build_normal_form(a, b, c, d as i8, None)?;
            match g.domain {
                Some(bx) => sys.with_box(Aabb::from_slice(bx.0))?,
                None => sys,
            }
        }
    };
    let results = verify(&sys, p, suites, tolerance(&sys, g), g.seed)?;
    for r in &results {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "skip",
        };
        eprintln!("{status:<4} {:<30} {}", r.property, r.detail);
    }
    let mut json = serde_json::to_vec_pretty(&results)?;
    json.push(b'\n');
    emit(g, &json)?;
    let failed: Vec<&str> = results.iter().filter(|r| r.status == Status::Fail).map(|r| r.property).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
