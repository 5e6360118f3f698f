//! Fold-fold singularities: normal parameters, the involutive return map and
//! the local stability verdicts built on them.

mod diabolo;
mod params;
mod returnmap;
mod verdict;
mod web;

use thiserror::Error;

use crate::integrator::IntegratorError;

pub use diabolo::{diabolo_check, DiaboloConfig, DiaboloReport, DiaboloStatus, EXCHANGE_C_MAX};
pub use params::{normal_parameters, NormalParameters};
pub use returnmap::{
    analytic_involutions, convergents, demelo_palis, demelo_palis_from, locate_direction,
    moduli_from_tau, moduli_info, return_map_analysis, EigenLocation, FixedPointClass,
    ModuliInfo, PosinvCase, ReturnMapAnalysis, SaddleData, MAX_CONVERGENT_DENOMINATOR,
    SADDLE_BAND,
};
pub use verdict::{
    connection_region, parabolic_transversality, stability_verdict, verdict_for_parameters,
    BoundaryWitness, ClassDescriptor, ConnectionRegion, ConnectionStatus, ParabolicCoefficients,
    SignCondition, StabilityVerdict, TransversalityKind, UnstableReason, Verdict,
};
pub use web::{web_scan, WebPair, WebReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoldFoldError {
    #[error("invalid normal parameters: {0}")]
    InvalidParameters(String),
    #[error("not a fold-fold point: Xf = {xf}, Yf = {yf}")]
    NotFoldFold { xf: f64, yf: f64 },
    #[error("degenerate fold: X²f = {x2f}, Y²f = {y2f}")]
    Degenerate { x2f: f64, y2f: f64 },
    #[error("tangency lines are not transversal (det = {det})")]
    NotTransversal { det: f64 },
    #[error("operation needs a {expected} fold-fold, found {found}")]
    WrongSubtype {
        expected: &'static str,
        found: &'static str,
    },
    #[error("fixed point is not a saddle")]
    NotSaddle,
    #[error("leading-coefficient fit did not stabilize")]
    FitUnstable,
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}
