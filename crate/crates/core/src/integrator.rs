//! Event-located integration of the smooth fields, numeric fold and return maps,
//! and Filippov trajectories with mode switching.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Point3, VectorField3};
use crate::linalg::Mat2;
use crate::scalar::Scalar;
use crate::sigma::{classify_point, default_tol, SigmaKind, SigmaPoint};
use crate::sliding::normalized_numerator_3d;
use crate::system::{Aabb, PiecewiseSystem, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("orbit does not return to Σ from this side")]
    NoReturn,
    #[error("orbit left the analysis box at ({0:?})")]
    LeftBox([f64; 3]),
    #[error("no return within the time budget")]
    TimeOut,
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("sliding denominator vanished at ({0}, {1})")]
    DenominatorBlowup(f64, f64),
}

impl IntegratorError {
    pub fn code(&self) -> &'static str {
        match self {
            IntegratorError::NoReturn => "no-return",
            IntegratorError::LeftBox(_) => "left-box",
            IntegratorError::TimeOut => "time-out",
            IntegratorError::StepUnderflow(_) => "step-underflow",
            IntegratorError::DenominatorBlowup(..) => "denominator-blowup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Accepted `|z|` residual at a located event.
    pub event_tol: T,
    pub max_time: T,
    pub max_steps: usize,
    /// Analysis window; orbits are abandoned outside `escape_factor` times it.
    pub domain: Aabb<T>,
    pub escape_factor: T,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            rel_tol: T::lit(1e-11).max(eps * T::lit(64.0)),
            abs_tol: T::lit(1e-13).max(eps * T::lit(16.0)),
            event_tol: T::lit(1e-12).max(eps * T::lit(16.0)),
            max_time: T::lit(100.0),
            max_steps: 200_000,
            domain: Aabb::default(),
            escape_factor: T::lit(1.5),
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn for_system(sys: &PiecewiseSystem<T>) -> Self {
        Self {
            domain: *sys.domain_box(),
            ..Self::default()
        }
    }

    fn escape_box(&self) -> Aabb<T> {
        self.domain.expanded(self.escape_factor)
    }
}

/// Which side of Σ an orbit lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfSpace {
    /// `z > 0`.
    Plus,
    /// `z < 0`.
    Minus,
}

impl HalfSpace {
    fn sign<T: Scalar>(self) -> T {
        match self {
            HalfSpace::Plus => T::one(),
            HalfSpace::Minus => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaHit<T> {
    pub point: SigmaPoint<T>,
    pub time: T,
    /// `|z|` before projection onto Σ.
    pub residual: T,
}

// Dormand–Prince 5(4) tableau; the last row doubles as the fifth-order weights.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Rhs<'a, T> = dyn Fn(&Point3<T>) -> Option<Point3<T>> + 'a;

/// One Dormand–Prince step: fifth-order solution and embedded error estimate.
fn dp_step<T: Scalar>(f: &Rhs<'_, T>, y: &Point3<T>, h: T) -> Option<(Point3<T>, Point3<T>)> {
    let mut k = [[T::zero(); 3]; 7];
    k[0] = f(y)?;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = T::lit(A[s][j]);
            if a != T::zero() {
                for i in 0..3 {
                    ys[i] = ys[i] + h * a * kj[i];
                }
            }
        }
        k[s] = f(&ys)?;
    }
    let mut y5 = *y;
    let mut err = [T::zero(); 3];
    for (s, ks) in k.iter().enumerate() {
        let b = if s == 6 { T::zero() } else { T::lit(A[6][s]) };
        let e = T::lit(E[s]);
        for i in 0..3 {
            y5[i] = y5[i] + h * b * ks[i];
            err[i] = err[i] + h * e * ks[i];
        }
    }
    Some((y5, err))
}

enum Outcome<T> {
    Event { t: T, y: Point3<T> },
    TimeLimit,
    LeftBox { y: Point3<T> },
}

struct Run<T> {
    outcome: Outcome<T>,
    samples: Vec<(T, Point3<T>)>,
}

/// Integrates `f` from `y0` until `g` drops to zero, `t_max` elapses or the box is left.
///
/// `g(y0)` may be zero: the first step is shrunk until `g` becomes positive.
fn integrate_until<T: Scalar>(
    f: &Rhs<'_, T>,
    g: &dyn Fn(&Point3<T>) -> T,
    y0: Point3<T>,
    t_max: T,
    cfg: &IntegratorConfig<T>,
    record: bool,
) -> Result<Run<T>, IntegratorError> {
    let bounds = cfg.escape_box();
    let scale = bounds.scale();
    let h_max = scale * T::lit(0.1);
    let mut h = (scale * T::lit(1e-3)).min(t_max);
    let mut t = T::zero();
    let mut y = y0;
    let mut g_prev = g(&y0);
    let mut first = g_prev <= T::zero();
    let mut err_prev = T::one();
    let mut samples = Vec::new();
    if record {
        samples.push((t, y));
    }
    let blowup = |y: &Point3<T>| IntegratorError::DenominatorBlowup(y[0].as_f64(), y[1].as_f64());
    for _ in 0..cfg.max_steps {
        if t >= t_max {
            return Ok(Run {
                outcome: Outcome::TimeLimit,
                samples,
            });
        }
        h = h.min(t_max - t);
        if h <= T::epsilon() * (T::one() + t.abs()) * T::lit(4.0) && t < t_max {
            if first {
                return Err(IntegratorError::NoReturn);
            }
            return Err(IntegratorError::StepUnderflow(t.as_f64()));
        }
        let (y_new, e) = dp_step(f, &y, h).ok_or_else(|| blowup(&y))?;
        let mut err = T::zero();
        for i in 0..3 {
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((e[i] / sc).abs());
        }
        if !err.is_finite() {
            h = h * T::lit(0.25);
            continue;
        }
        if err > T::one() {
            let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            h = h * fac;
            continue;
        }
        let g_new = g(&y_new);
        if first {
            if g_new <= T::zero() {
                // Overshot a very short excursion; retry with a smaller first step.
                h = h * T::lit(0.25);
                continue;
            }
            first = false;
        } else if g_new <= T::zero() {
            let (s, y_hit) = locate_event(f, g, &y, g_prev, h, g_new)?;
            let t_hit = t + s;
            if record {
                samples.push((t_hit, y_hit));
            }
            return Ok(Run {
                outcome: Outcome::Event { t: t_hit, y: y_hit },
                samples,
            });
        }
        t = t + h;
        y = y_new;
        g_prev = g_new;
        if record {
            samples.push((t, y));
        }
        if !bounds.contains(y) {
            return Ok(Run {
                outcome: Outcome::LeftBox { y },
                samples,
            });
        }
        // PI step-size control.
        let err_c = err.max(T::lit(1e-10));
        let fac = T::lit(0.9) * err_c.powf(T::lit(-0.7 / 5.0)) * err_prev.powf(T::lit(0.4 / 5.0));
        h = (h * fac.min(T::lit(5.0)).max(T::lit(0.2))).min(h_max);
        err_prev = err_c;
    }
    Err(IntegratorError::TimeOut)
}

/// Brent root of `s ↦ g(step(y, s))` on `(0, h]`, to machine precision in `s`.
fn locate_event<T: Scalar>(
    f: &Rhs<'_, T>,
    g: &dyn Fn(&Point3<T>) -> T,
    y: &Point3<T>,
    g0: T,
    h: T,
    gh: T,
) -> Result<(T, Point3<T>), IntegratorError> {
    let eval = |s: T| -> Result<(T, Point3<T>), IntegratorError> {
        if s == T::zero() {
            return Ok((g0, *y));
        }
        let (ys, _) = dp_step(f, y, s)
            .ok_or_else(|| IntegratorError::DenominatorBlowup(y[0].as_f64(), y[1].as_f64()))?;
        Ok((g(&ys), ys))
    };
    let (mut a, mut fa) = (T::zero(), g0);
    let (mut b, mut fb) = (h, gh);
    let mut y_b = dp_step(f, y, h).map(|r| r.0).unwrap_or(*y);
    if fb == T::zero() {
        return Ok((b, y_b));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = T::lit(2.0) * T::epsilon() * b.abs() + T::min_positive_value();
        let m = (c - b) / T::two();
        if m.abs() <= tol || fb == T::zero() {
            break;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = T::two() * m * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (T::two() * m * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if T::two() * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        let (fb_new, yb_new) = eval(b)?;
        fb = fb_new;
        y_b = yb_new;
    }
    // Report the iterate on the far side so the event is never missed.
    if fb > T::zero() && fc <= T::zero() {
        let (_, yc) = eval(c)?;
        return Ok((c, yc));
    }
    Ok((b, y_b))
}

fn field_rhs<T: Scalar>(field: &VectorField3<T>, time_sign: T) -> impl Fn(&Point3<T>) -> Option<Point3<T>> + '_ {
    move |y| {
        let v = field.eval(*y);
        Some([v[0] * time_sign, v[1] * time_sign, v[2] * time_sign])
    }
}

fn integrate_field_to_sigma<T: Scalar>(
    field: &VectorField3<T>,
    q0: SigmaPoint<T>,
    half: HalfSpace,
    time_sign: T,
    cfg: &IntegratorConfig<T>,
) -> Result<SigmaHit<T>, IntegratorError> {
    let y0 = [q0[0], q0[1], T::zero()];
    let s = half.sign::<T>();
    let vz = field.eval(y0)[2] * time_sign * s;
    if vz <= T::zero() {
        return Err(IntegratorError::NoReturn);
    }
    let rhs = field_rhs(field, time_sign);
    let g = move |y: &Point3<T>| y[2] * s;
    let run = integrate_until(&rhs, &g, y0, cfg.max_time, cfg, false)?;
    match run.outcome {
        Outcome::Event { t, y } => Ok(SigmaHit {
            point: [y[0], y[1]],
            time: t,
            residual: y[2].abs(),
        }),
        Outcome::TimeLimit => Err(IntegratorError::TimeOut),
        Outcome::LeftBox { y } => Err(IntegratorError::LeftBox(y.map(|v| v.as_f64()))),
    }
}

/// First return to Σ of `field` started at `q0` into the given half-space.
pub fn integrate_to_sigma<T: Scalar>(
    field: &VectorField3<T>,
    q0: SigmaPoint<T>,
    half: HalfSpace,
    cfg: &IntegratorConfig<T>,
) -> Result<SigmaHit<T>, IntegratorError> {
    integrate_field_to_sigma(field, q0, half, T::one(), cfg)
}

/// Numeric fold involution `φ_X` or `φ_Y` at a Σ-point.
pub fn fold_map_numeric<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    side: Side,
    q: SigmaPoint<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<SigmaPoint<T>, IntegratorError> {
    let field = sys.field(side);
    let half = match side {
        Side::X => HalfSpace::Plus,
        Side::Y => HalfSpace::Minus,
    };
    let vz = field.eval([q[0], q[1], T::zero()])[2] * half.sign::<T>();
    let on_fold = cfg.event_tol * (T::one() + sys.coefficient_scale());
    if vz.abs() <= on_fold {
        return Ok(q);
    }
    // Points whose orbit leaves Σ backwards are mapped along the reversed field.
    let time_sign = if vz > T::zero() { T::one() } else { -T::one() };
    integrate_field_to_sigma(field, q, half, time_sign, cfg).map(|h| h.point)
}

/// `φ = φ_X ∘ φ_Y`.
pub fn return_map_numeric<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    q: SigmaPoint<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<SigmaPoint<T>, IntegratorError> {
    let q1 = fold_map_numeric(sys, Side::Y, q, cfg)?;
    fold_map_numeric(sys, Side::X, q1, cfg)
}

/// Central-difference Jacobian of a planar map.
pub fn jacobian_numeric<T: Scalar, E>(
    map: impl Fn(SigmaPoint<T>) -> Result<SigmaPoint<T>, E>,
    q: SigmaPoint<T>,
    h: T,
) -> Result<Mat2<T>, E> {
    let two_h = T::two() * h;
    let xp = map([q[0] + h, q[1]])?;
    let xm = map([q[0] - h, q[1]])?;
    let yp = map([q[0], q[1] + h])?;
    let ym = map([q[0], q[1] - h])?;
    Ok(Mat2::new(
        (xp[0] - xm[0]) / two_h,
        (yp[0] - ym[0]) / two_h,
        (xp[1] - xm[1]) / two_h,
        (yp[1] - ym[1]) / two_h,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    FlowPlus,
    FlowMinus,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentEnd {
    HitSigma,
    LeftBox,
    TimeOut,
    ReachedTangency,
    ModeSwitch,
    /// Reached `Σ^us`, where forward evolution is not defined.
    UnstableSliding,
}

impl SegmentEnd {
    /// Whether the trajectory stops after this segment.
    pub fn is_final(self) -> bool {
        !matches!(self, SegmentEnd::HitSigma | SegmentEnd::ModeSwitch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Segment<T> {
    pub mode: Mode,
    /// `(t, point)` in absolute time.
    pub samples: Vec<(T, Point3<T>)>,
    pub end: SegmentEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Trajectory<T> {
    pub segments: Vec<Segment<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn end(&self) -> Option<SegmentEnd> {
        self.segments.last().map(|s| s.end)
    }

    pub fn final_point(&self) -> Option<(T, Point3<T>)> {
        self.segments.last().and_then(|s| s.samples.last().copied())
    }

    pub fn sliding_segments(&self) -> impl Iterator<Item = &Segment<T>> {
        self.segments.iter().filter(|s| s.mode == Mode::Sliding)
    }
}

/// Segment cap guarding against chattering between modes.
pub const MAX_SEGMENTS: usize = 10_000;

/// `F_Z` as a 3D vector at a Σ-point, z-component included.
pub fn sliding_velocity_3d<T: Scalar>(
    numerator: &[crate::algebra::Poly3<T>; 3],
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
) -> Option<Point3<T>> {
    let l = sys.lie();
    let den = l.yf.eval_sigma(p[0], p[1]) - l.xf.eval_sigma(p[0], p[1]);
    if den == T::zero() {
        return None;
    }
    Some(numerator.each_ref().map(|c| c.eval_sigma(p[0], p[1]) / den))
}

/// Mode chosen at a Σ-point, or the reason the trajectory stops there.
fn mode_at_sigma<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> Result<Mode, SegmentEnd> {
    let c = classify_point(sys, p, tol);
    match c.kind {
        SigmaKind::Crossing if c.xf > T::zero() => Ok(Mode::FlowPlus),
        SigmaKind::Crossing => Ok(Mode::FlowMinus),
        SigmaKind::StableSliding => Ok(Mode::Sliding),
        SigmaKind::UnstableSliding => Err(SegmentEnd::UnstableSliding),
        SigmaKind::Tangency(_) => Err(SegmentEnd::ReachedTangency),
    }
}

/// Filippov solution from `p0` over `[0, horizon]`.
pub fn filippov_trajectory<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p0: Point3<T>,
    horizon: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>, IntegratorError> {
    let tol = default_tol(sys);
    let numerator = normalized_numerator_3d(sys);
    let mut segments = Vec::new();
    let mut t = T::zero();
    let mut y = p0;
    let mut mode = if y[2] > cfg.event_tol {
        Mode::FlowPlus
    } else if y[2] < -cfg.event_tol {
        Mode::FlowMinus
    } else {
        y[2] = T::zero();
        match mode_at_sigma(sys, [y[0], y[1]], tol) {
            Ok(m) => m,
            Err(end) => {
                segments.push(Segment {
                    mode: Mode::Sliding,
                    samples: vec![(t, y)],
                    end,
                });
                return Ok(Trajectory { segments });
            }
        }
    };
    for _ in 0..MAX_SEGMENTS {
        let remaining = horizon - t;
        let (run, field_side) = match mode {
            Mode::FlowPlus | Mode::FlowMinus => {
                let (side, s) = if mode == Mode::FlowPlus {
                    (Side::X, T::one())
                } else {
                    (Side::Y, -T::one())
                };
                let rhs = field_rhs(sys.field(side), T::one());
                let g = move |y: &Point3<T>| y[2] * s;
                (integrate_until(&rhs, &g, y, remaining, cfg, true)?, Some(side))
            }
            Mode::Sliding => {
                let l = sys.lie();
                let guard = T::lit(1e-12) * (T::one() + sys.coefficient_scale());
                let rhs = |y: &Point3<T>| {
                    let v = sliding_velocity_3d(&numerator, sys, [y[0], y[1]])?;
                    let den = l.yf.eval_sigma(y[0], y[1]) - l.xf.eval_sigma(y[0], y[1]);
                    (den > guard).then_some([v[0], v[1], T::zero()])
                };
                let g = |y: &Point3<T>| {
                    (-l.xf.eval_sigma(y[0], y[1])).min(l.yf.eval_sigma(y[0], y[1]))
                };
                (integrate_until(&rhs, &g, y, remaining, cfg, true)?, None)
            }
        };
        let mut samples: Vec<(T, Point3<T>)> =
            run.samples.into_iter().map(|(s, p)| (t + s, p)).collect();
        match run.outcome {
            Outcome::TimeLimit => {
                segments.push(Segment { mode, samples, end: SegmentEnd::TimeOut });
                break;
            }
            Outcome::LeftBox { .. } => {
                segments.push(Segment { mode, samples, end: SegmentEnd::LeftBox });
                break;
            }
            Outcome::Event { t: s, y: hit } => {
                t = t + s;
                let p = [hit[0], hit[1]];
                y = [hit[0], hit[1], T::zero()];
                if let Some(last) = samples.last_mut() {
                    *last = (t, y);
                }
                if field_side.is_some() {
                    match mode_at_sigma(sys, p, tol) {
                        Ok(next) => {
                            segments.push(Segment { mode, samples, end: SegmentEnd::HitSigma });
                            mode = next;
                        }
                        Err(end) => {
                            segments.push(Segment { mode, samples, end: SegmentEnd::HitSigma });
                            segments.push(Segment {
                                mode: Mode::Sliding,
                                samples: vec![(t, y)],
                                end,
                            });
                            break;
                        }
                    }
                } else {
                    // Leaving Σ^ss through S_X lifts along a visible X-fold into z > 0;
                    // through S_Y along a visible Y-fold into z < 0.
                    let l = sys.lie();
                    let xf = l.xf.eval_sigma(p[0], p[1]);
                    let yf = l.yf.eval_sigma(p[0], p[1]);
                    let next = if xf.abs() <= yf.abs() {
                        (l.x2f.eval_sigma(p[0], p[1]) > tol).then_some(Mode::FlowPlus)
                    } else {
                        (l.y2f.eval_sigma(p[0], p[1]) < -tol).then_some(Mode::FlowMinus)
                    };
                    match next {
                        Some(next) => {
                            segments.push(Segment { mode, samples, end: SegmentEnd::ModeSwitch });
                            mode = next;
                        }
                        _ => {
                            segments.push(Segment {
                                mode,
                                samples,
                                end: SegmentEnd::ReachedTangency,
                            });
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(Trajectory { segments })
}

/// Orbit of `F_Z` inside `Σ^us` in reverse time, or inside `Σ^ss` forward.
pub fn integrate_sliding<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    horizon: T,
    reverse: bool,
    cfg: &IntegratorConfig<T>,
) -> Result<Segment<T>, IntegratorError> {
    let l = sys.lie();
    let numerator = normalized_numerator_3d(sys);
    let ts = if reverse { -T::one() } else { T::one() };
    let side = if reverse { -T::one() } else { T::one() };
    let guard = T::lit(1e-12) * (T::one() + sys.coefficient_scale());
    let rhs = |y: &Point3<T>| {
        let den = l.yf.eval_sigma(y[0], y[1]) - l.xf.eval_sigma(y[0], y[1]);
        if den.abs() <= guard {
            return None;
        }
        let v = sliding_velocity_3d(&numerator, sys, [y[0], y[1]])?;
        Some([v[0] * ts, v[1] * ts, T::zero()])
    };
    // Inside Σ^ss: -Xf > 0 and Yf > 0; inside Σ^us both flip.
    let g = |y: &Point3<T>| {
        (-l.xf.eval_sigma(y[0], y[1]) * side).min(l.yf.eval_sigma(y[0], y[1]) * side)
    };
    let y0 = [p[0], p[1], T::zero()];
    let run = integrate_until(&rhs, &g, y0, horizon, cfg, true)?;
    let end = match run.outcome {
        Outcome::Event { .. } => SegmentEnd::ReachedTangency,
        Outcome::TimeLimit => SegmentEnd::TimeOut,
        Outcome::LeftBox { .. } => SegmentEnd::LeftBox,
    };
    Ok(Segment {
        mode: Mode::Sliding,
        samples: run.samples,
        end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Poly3;
    use crate::system::build_normal_form;

    fn cfg() -> IntegratorConfig<f64> {
        IntegratorConfig::default()
    }

    fn quadratic_x() -> VectorField3<f64> {
        VectorField3::new(Poly3::constant(-1.0), Poly3::constant(1.0), -Poly3::y())
    }

    #[test]
    fn closed_form_return() {
        let hit = integrate_to_sigma(&quadratic_x(), [0.0, -0.1], HalfSpace::Plus, &cfg()).unwrap();
        assert!((hit.time - 0.2).abs() < 1e-8);
        assert!((hit.point[0] + 0.2).abs() < 1e-8 && (hit.point[1] - 0.1).abs() < 1e-8);
    }

    #[test]
    fn wrong_side_is_no_return() {
        let err = integrate_to_sigma(&quadratic_x(), [0.0, 0.1], HalfSpace::Plus, &cfg()).unwrap_err();
        assert_eq!(err, IntegratorError::NoReturn);
    }

    #[test]
    fn monotone_field_never_returns() {
        let up = VectorField3::constant(0.0, 0.0, 1.0);
        let err = integrate_to_sigma(&up, [0.2, 0.3], HalfSpace::Plus, &cfg()).unwrap_err();
        assert!(matches!(err, IntegratorError::LeftBox(_) | IntegratorError::TimeOut));
    }

    #[test]
    fn fold_map_matches_involution() {
        let sys = build_normal_form(-1.0, -1.0, 1.0, -1, None).unwrap();
        let q = fold_map_numeric(&sys, Side::X, [0.0, -0.1], &cfg()).unwrap();
        assert!((q[0] + 0.2).abs() < 1e-7 && (q[1] - 0.1).abs() < 1e-7);
        let back = fold_map_numeric(&sys, Side::X, q, &cfg()).unwrap();
        assert!((back[0]).abs() < 2e-7 && (back[1] + 0.1).abs() < 2e-7);
        assert_eq!(fold_map_numeric(&sys, Side::X, [0.3, 0.0], &cfg()).unwrap(), [0.3, 0.0]);
    }

    #[test]
    fn return_map_linear_part() {
        let sys = build_normal_form(-1.0, -1.0, 1.0, -1, None).unwrap();
        let q = [0.01, -0.01];
        let out = return_map_numeric(&sys, q, &cfg()).unwrap();
        let m = Mat2::new(3.0, 2.0, -2.0, -1.0);
        let lin = m.apply(q);
        assert!((out[0] - lin[0]).abs() < 1e-5 + 1e-4 && (out[1] - lin[1]).abs() < 1e-5 + 1e-4);
        assert_eq!(return_map_numeric(&sys, [0.0, 0.0], &cfg()).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn return_map_jacobian() {
        let sys = build_normal_form(-1.0, -1.0, 0.5, -1, None).unwrap();
        let c = cfg();
        let j = jacobian_numeric(|q| return_map_numeric(&sys, q, &c), [0.0, 0.0], 1e-4).unwrap();
        assert!(j.max_abs_diff(&Mat2::new(7.0, 2.0, -4.0, -1.0)) < 1e-4, "{j:?}");
        let jx = jacobian_numeric(|q| fold_map_numeric(&sys, Side::X, q, &c), [0.0, 0.0], 1e-4).unwrap();
        assert!(jx.max_abs_diff(&Mat2::new(1.0, 2.0, 0.0, -1.0)) < 1e-6, "{jx:?}");
        let id = jacobian_numeric(Ok::<_, ()>, [0.3, -0.2], 1e-3).unwrap();
        assert!(id.max_abs_diff(&Mat2::identity()) < 1e-12);
    }

    #[test]
    fn unstable_direction_growth() {
        let sys = build_normal_form(-2.0, -1.0, 1.0, -1, None).unwrap();
        let lambda = 3.0 + 2.0 * 2f64.sqrt();
        let m = Mat2::new(7.0, 4.0, -2.0, -1.0);
        let v = m.eigenvector(lambda);
        let r0 = 1e-5;
        let mut q = [v[0] * r0, v[1] * r0];
        let mut r = r0;
        for _ in 0..4 {
            q = return_map_numeric(&sys, q, &cfg()).unwrap();
            let rn = q[0].hypot(q[1]);
            assert!((rn / r / lambda - 1.0).abs() < 1e-2, "{}", rn / r);
            r = rn;
        }
    }

    #[test]
    fn constant_fields_slide() {
        let sys = PiecewiseSystem::<f64>::new(
            "c",
            VectorField3::constant(1.0, 0.0, -1.0),
            VectorField3::constant(0.0, 1.0, 1.0),
            Aabb::cube(2.0),
        )
        .unwrap();
        let traj = filippov_trajectory(&sys, [0.0, 0.0, 0.5], 1.0, &IntegratorConfig::for_system(&sys)).unwrap();
        assert_eq!(traj.segments[0].mode, Mode::FlowPlus);
        assert_eq!(traj.segments[0].end, SegmentEnd::HitSigma);
        let (t_hit, p_hit) = *traj.segments[0].samples.last().unwrap();
        assert!((t_hit - 0.5).abs() < 1e-12 && (p_hit[0] - 0.5).abs() < 1e-12);
        let slide = &traj.segments[1];
        assert_eq!(slide.mode, Mode::Sliding);
        assert_eq!(slide.end, SegmentEnd::TimeOut);
        let (t, p) = *slide.samples.last().unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        assert!((p[0] - 0.75).abs() < 1e-10 && (p[1] - 0.25).abs() < 1e-10 && p[2] == 0.0);
    }

    #[test]
    fn crossing_alternation_matches_return_map() {
        let sys = build_normal_form(-2.0, -1.0, 1.0, -1, None).unwrap();
        // A point of Σ^c below S_Y in the fourth quadrant: Xf = -y > 0, Yf = x > 0.
        let q = [0.02, -0.01];
        let traj = filippov_trajectory(&sys, [q[0], q[1], 0.0], 50.0, &cfg()).unwrap();
        let hits: Vec<Point3<f64>> = traj
            .segments
            .iter()
            .filter(|s| s.end == SegmentEnd::HitSigma)
            .map(|s| s.samples.last().unwrap().1)
            .collect();
        assert!(hits.len() >= 4);
        // Flights alternate X then Y, so every second hit is an iterate of φ_Y∘φ_X.
        let mut expect = q;
        for pair in hits.chunks(2).take(3) {
            if pair.len() < 2 {
                break;
            }
            let a = fold_map_numeric(&sys, Side::X, expect, &cfg()).unwrap();
            expect = fold_map_numeric(&sys, Side::Y, a, &cfg()).unwrap();
            assert!((pair[1][0] - expect[0]).abs() < 1e-8 && (pair[1][1] - expect[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn deep_flight_times_out_or_leaves() {
        let sys = PiecewiseSystem::new(
            "up",
            VectorField3::constant(0.0, 0.0, 1.0),
            VectorField3::constant(0.0, 0.0, 1.0),
            Aabb::default(),
        )
        .unwrap();
        let traj = filippov_trajectory(&sys, [0.0, 0.0, 0.5], 10.0, &cfg()).unwrap();
        assert!(matches!(traj.end(), Some(SegmentEnd::LeftBox | SegmentEnd::TimeOut)));
    }
}
