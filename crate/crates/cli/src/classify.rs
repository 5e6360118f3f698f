use std::path::Path;

use serde::Serialize;

use twofold::foldfold::{
    moduli_info, normal_parameters, return_map_analysis, stability_verdict, ModuliInfo,
    NormalParameters, ReturnMapAnalysis, StabilityVerdict,
};
use twofold::sigma::{classify_point, SigmaClassification, SigmaKind, TangencyType};
use twofold::sliding::sliding_region_class;
use twofold::System;

use crate::{emit, read_system, tolerance, CliError, GlobalOpts};

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub system: String,
    pub point: [f64; 3],
    pub tolerance: f64,
    pub sigma: SigmaClassification<f64>,
    pub tangency: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_parameters: Option<NormalParameters<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sliding_region: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_map: Option<ReturnMapAnalysis<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<StabilityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moduli: Option<ModuliInfo<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn tangency_name(kind: SigmaKind) -> &'static str {
    match kind {
        SigmaKind::Crossing | SigmaKind::StableSliding | SigmaKind::UnstableSliding => {
            "regular-regular"
        }
        SigmaKind::Tangency(t) => match t {
            TangencyType::FoldRegular => "fold-regular",
            TangencyType::RegularFold => "regular-fold",
            TangencyType::CuspRegular => "cusp-regular",
            TangencyType::RegularCusp => "regular-cusp",
            TangencyType::FoldFold(_) => "fold-fold",
            TangencyType::Degenerate => "degenerate",
        },
    }
}

pub fn classify(sys: &System, point: [f64; 3], tol: f64) -> Result<ClassifyReport, CliError> {
    if point[2].abs() > tol {
        return Err(CliError::Precondition(format!(
            "point ({}, {}, {}) is not on Σ = {{z = 0}}",
            point[0], point[1], point[2]
        )));
    }
    if !sys.domain_box().contains([point[0], point[1], 0.0]) {
        return Err(CliError::Precondition("point lies outside the analysis box".into()));
    }
    let p = [point[0], point[1]];
    let sigma = classify_point(sys, p, tol);
    let mut report = ClassifyReport {
        system: sys.name.clone(),
        point,
        tolerance: tol,
        sigma,
        tangency: tangency_name(sigma.kind),
        normal_parameters: None,
        sliding_region: None,
        claim: None,
        return_map: None,
        verdict: None,
        moduli: None,
        note: None,
    };
    if let SigmaKind::Tangency(TangencyType::FoldFold(_)) = sigma.kind {
        match normal_parameters(sys, p, tol) {
            Ok(params) => {
                let tag = sliding_region_class(&params);
                report.sliding_region = Some(tag.name());
                report.claim = Some(format!("{:?}", tag.claim()));
                if let Ok(a) = return_map_analysis(&params) {
                    report.moduli = moduli_info(&a);
                    report.return_map = Some(a);
                }
                report.normal_parameters = Some(params);
            }
            Err(e) => report.note = Some(e.to_string()),
        }
    }
    match stability_verdict(sys, p, tol) {
        Ok(v) => report.verdict = Some(v),
        Err(e) => report.note = Some(e.to_string()),
    }
    Ok(report)
}

pub fn summary(r: &ClassifyReport) -> String {
    let mut s = format!("{} at ({}, {}): {}", r.system, r.point[0], r.point[1], r.tangency);
    if let Some(p) = &r.normal_parameters {
        s += &format!(
            ", {} alpha={:.6} beta={:.6} gamma={:.6} delta={}",
            p.subtype.name(),
            p.alpha,
            p.beta,
            p.gamma,
            p.delta
        );
    }
    if let Some(tag) = r.sliding_region {
        s += &format!(", region {tag}");
    }
    if let Some(a) = &r.return_map {
        s += &format!(", trace {:.6}", a.trace);
    }
    if let Some(v) = &r.verdict {
        s += &format!(", verdict {}", v.verdict.code());
    }
    s
}

pub fn run(path: &Path, point: [f64; 3], g: &GlobalOpts) -> Result<(), CliError> {
    let sys = read_system(path, g)?;
    let report = classify(&sys, point, tolerance(&sys, g))?;
    eprintln!("{}", summary(&report));
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    emit(g, &json)
}
