//! Command-line front end: classify, sweep, simulate and verify.

pub mod args;
pub mod classify;
pub mod error;
pub mod simulate;
pub mod sweep;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::Path;

use twofold::sigma::default_tol;
use twofold::system::{load_system, Aabb};
use twofold::System;

pub use args::{Cli, Command, GlobalOpts};
pub use error::CliError;

/// Reads a system file and applies the `--box` override.
pub fn read_system(path: &Path, global: &GlobalOpts) -> Result<System, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let sys: System = load_system(&text)?;
    match global.domain {
        Some(b) => Ok(sys.with_box(Aabb::from_slice(b.0))?),
        None => Ok(sys),
    }
}

pub fn tolerance(sys: &System, global: &GlobalOpts) -> f64 {
    global.tol.unwrap_or_else(|| default_tol(sys))
}

/// Writes to `--out` or stdout.
pub fn emit(global: &GlobalOpts, bytes: &[u8]) -> Result<(), CliError> {
    match &global.out {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let g = &cli.global;
    match cli.command {
        Command::Classify { system, point } => classify::run(&system, point.0, g),
        Command::Sweep { gamma, delta, alpha, beta } => sweep::run(gamma, delta, alpha, beta, g),
        Command::Simulate { system, p0, horizon } => simulate::run(&system, p0.0, horizon, g),
        Command::Verify { system, params, point, suite } => {
            verify::run(system.as_deref(), params.map(|p| p.0), point.0, &suite, g)
        }
    }
}
