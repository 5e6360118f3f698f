use std::path::Path;

use serde::Serialize;

use twofold::integrator::{filippov_trajectory, IntegratorConfig, Mode, SegmentEnd, Trajectory};

use crate::{emit, read_system, CliError, GlobalOpts};

#[derive(Debug, Serialize)]
struct SampleRow {
    segment: usize,
    mode: &'static str,
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    end: &'static str,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::FlowPlus => "flow-plus",
        Mode::FlowMinus => "flow-minus",
        Mode::Sliding => "sliding",
    }
}

pub fn end_name(e: SegmentEnd) -> &'static str {
    match e {
        SegmentEnd::HitSigma => "hit-sigma",
        SegmentEnd::LeftBox => "left-box",
        SegmentEnd::TimeOut => "time-out",
        SegmentEnd::ReachedTangency => "reached-tangency",
        SegmentEnd::ModeSwitch => "mode-switch",
        SegmentEnd::UnstableSliding => "unstable-sliding",
    }
}

pub fn to_csv(traj: &Trajectory<f64>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (k, seg) in traj.segments.iter().enumerate() {
        for &(t, p) in &seg.samples {
            w.serialize(SampleRow {
                segment: k,
                mode: mode_name(seg.mode),
                t,
                x: p[0],
                y: p[1],
                z: p[2],
                end: end_name(seg.end),
            })?;
        }
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

pub fn run(path: &Path, p0: [f64; 3], horizon: f64, g: &GlobalOpts) -> Result<(), CliError> {
    let sys = read_system(path, g)?;
    if !sys.domain_box().contains(p0) {
        return Err(CliError::Precondition("p0 lies outside the analysis box".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::Precondition("horizon must be positive".into()));
    }
    let cfg = IntegratorConfig::for_system(&sys);
    let traj = filippov_trajectory(&sys, p0, horizon, &cfg)
        .map_err(|e| CliError::Precondition(format!("integration stopped: {e}")))?;
    let modes: Vec<&str> = traj.segments.iter().map(|s| mode_name(s.mode)).collect();
    eprintln!(
        "{} segments [{}], ended with {}",
        traj.segments.len(),
        modes.join(" "),
        traj.end().map(end_name).unwrap_or("nothing")
    );
    emit(g, &to_csv(&traj)?)
}
