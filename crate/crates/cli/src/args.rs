use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "twofold", version, about = "Classify tangential singularities of 3D Filippov systems")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Zero tolerance for Lie-derivative signs (default scales with the coefficients).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Analysis box: `r` for `[-r,r]³` or `xmin,xmax,ymin,ymax,zmin,zmax`.
    #[arg(long = "box", global = true)]
    pub domain: Option<BoxArg>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and verification batches.
    #[arg(long, global = true, env = "TOOL_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the Σ-classification, normal parameters and verdict at a point.
    Classify {
        system: PathBuf,
        #[arg(long, default_value = "0,0,0")]
        point: Triple,
    },
    /// Tabulate regions and verdicts over an (α, β) grid.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1)]
        delta: i8,
        #[arg(long, allow_hyphen_values = true, default_value = "-3:3:200")]
        alpha: GridRange,
        #[arg(long, allow_hyphen_values = true, default_value = "-3:3:200")]
        beta: GridRange,
    },
    /// Integrate a Filippov trajectory and write its samples as CSV.
    Simulate {
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        p0: Triple,
        #[arg(long = "T", default_value_t = 10.0)]
        horizon: f64,
    },
    /// Check analytic predictions against numerics.
    Verify {
        /// System file; the normal form given by `--params` is used otherwise.
        system: Option<PathBuf>,
        /// `alpha,beta,gamma,delta` of a normal form.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "system")]
        params: Option<Quad>,
        /// Fold-fold point on Σ.
        #[arg(long, default_value = "0,0")]
        point: Pair,
        /// Property groups; `none` selects nothing.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        suite: Vec<Suite>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Involutions,
    Regions,
    Diabolo,
    None,
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
        if !o.is_finite() {
            return Err(format!("not finite: {p:?}"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub [f64; 2]);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        floats::<2>(s).map(Pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple(pub [f64; 3]);

impl FromStr for Triple {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        floats::<3>(s).map(Triple)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad(pub [f64; 4]);

impl FromStr for Quad {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        floats::<4>(s).map(Quad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxArg(pub [f64; 6]);

impl FromStr for BoxArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok([r]) = floats::<1>(s) {
            return Ok(BoxArg([-r, r, -r, r, -r, r]));
        }
        floats::<6>(s).map(BoxArg)
    }
}

/// `start:end:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.count.max(2) - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

impl FromStr for GridRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected start:end:count, got {s:?}"));
        };
        let start: f64 = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
        let end: f64 = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
        let count: usize = n.trim().parse().map_err(|_| format!("bad count {n:?}"))?;
        if !start.is_finite() || !end.is_finite() {
            return Err("range endpoints must be finite".into());
        }
        Ok(GridRange { start, end, count })
    }
}
