use rayon::prelude::*;
use serde::Serialize;

use twofold::foldfold::{
    return_map_analysis, verdict_for_parameters, FixedPointClass, NormalParameters, PosinvCase,
};
use twofold::sliding::sliding_region_class;

use crate::args::GridRange;
use crate::{emit, CliError, GlobalOpts};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: i8,
    pub subtype: &'static str,
    pub region: &'static str,
    pub claim: u8,
    pub posinv_case: Option<&'static str>,
    pub fixed_point_class: Option<&'static str>,
    pub verdict: String,
    pub tau: Option<f64>,
}

pub fn cell(alpha: f64, beta: f64, gamma: f64, delta: i8) -> Result<SweepRow, CliError> {
    let p = NormalParameters::new(alpha, beta, gamma, delta)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let tag = sliding_region_class(&p);
    let mut row = SweepRow {
        alpha,
        beta,
        gamma,
        delta,
        subtype: p.subtype.name(),
        region: tag.name(),
        claim: tag.claim() as u8 + 1,
        posinv_case: None,
        fixed_point_class: None,
        verdict: verdict_for_parameters(&p).verdict.code(),
        tau: None,
    };
    if let Ok(a) = return_map_analysis(&p) {
        row.fixed_point_class = Some(match a.fixed_point_class {
            FixedPointClass::Saddle => "saddle",
            FixedPointClass::NonHyperbolicComplex { tau } => {
                row.tau = Some(tau);
                "complex"
            }
            FixedPointClass::NonHyperbolicUnit => "unit",
            FixedPointClass::ParabolicBoundary => "parabolic-boundary",
        });
        if a.saddle.is_some() {
            row.posinv_case = PosinvCase::from_signs(alpha, beta).map(|c| match c {
                PosinvCase::A => "a",
                PosinvCase::B => "b",
                PosinvCase::C => "c",
                PosinvCase::D => "d",
            });
        }
    }
    Ok(row)
}

/// Grid rows in row-major `(alpha, beta)` order.
pub fn sweep(gamma: f64, delta: i8, alpha: GridRange, beta: GridRange) -> Result<Vec<SweepRow>, CliError> {
    if alpha.count < 2 || beta.count < 2 {
        return Err(CliError::Precondition("grid resolution must be at least 2 per axis".into()));
    }
    let (av, bv) = (alpha.values(), beta.values());
    let cells: Vec<(f64, f64)> = av.iter().flat_map(|&a| bv.iter().map(move |&b| (a, b))).collect();
    cells.par_iter().map(|&(a, b)| cell(a, b, gamma, delta)).collect()
}

pub fn to_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

pub fn run(gamma: f64, delta: i8, alpha: GridRange, beta: GridRange, g: &GlobalOpts) -> Result<(), CliError> {
    let rows = sweep(gamma, delta, alpha, beta)?;
    eprintln!("{} cells", rows.len());
    emit(g, &to_csv(&rows)?)
}
