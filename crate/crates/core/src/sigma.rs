//! Pointwise classification of Σ: crossing and sliding regions, tangency sets and
//! the elementary tangential singularities.

use serde::{Deserialize, Serialize};

use crate::algebra::{Poly3, Var};
use crate::scalar::Scalar;
use crate::system::{Aabb, PiecewiseSystem, Side};

/// A point of Σ given by its `(x, y)` coordinates.
pub type SigmaPoint<T> = [T; 2];

/// Threshold for the cusp linear-independence determinant.
pub const CUSP_DET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FoldFoldSubtype {
    /// `X²f > 0`, `Y²f < 0`: hyperbolic.
    VisibleVisible,
    /// `X²f < 0`, `Y²f < 0`: parabolic.
    InvisibleVisible,
    /// `X²f > 0`, `Y²f > 0`: parabolic.
    VisibleInvisible,
    /// `X²f < 0`, `Y²f > 0`: elliptic, the T-singularity.
    Invisible,
}

impl FoldFoldSubtype {
    /// Subtype from `(sgn X²f, sgn Y²f)`.
    pub fn from_signs(x2f_positive: bool, y2f_positive: bool) -> Self {
        match (x2f_positive, y2f_positive) {
            (true, false) => FoldFoldSubtype::VisibleVisible,
            (false, false) => FoldFoldSubtype::InvisibleVisible,
            (true, true) => FoldFoldSubtype::VisibleInvisible,
            (false, true) => FoldFoldSubtype::Invisible,
        }
    }

    pub fn is_parabolic(self) -> bool {
        matches!(
            self,
            FoldFoldSubtype::InvisibleVisible | FoldFoldSubtype::VisibleInvisible
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FoldFoldSubtype::VisibleVisible => "visible-visible",
            FoldFoldSubtype::InvisibleVisible => "invisible-visible",
            FoldFoldSubtype::VisibleInvisible => "visible-invisible",
            FoldFoldSubtype::Invisible => "invisible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TangencyType {
    FoldRegular,
    RegularFold,
    CuspRegular,
    RegularCusp,
    FoldFold(FoldFoldSubtype),
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SigmaKind {
    Crossing,
    StableSliding,
    UnstableSliding,
    Tangency(TangencyType),
}

impl SigmaKind {
    pub fn is_regular(self) -> bool {
        !matches!(self, SigmaKind::Tangency(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SigmaClassification<T> {
    pub kind: SigmaKind,
    pub xf: T,
    pub yf: T,
}

/// `1e-9 · (1 + coefficient scale)`.
pub fn default_tol<T: Scalar>(sys: &PiecewiseSystem<T>) -> T {
    T::lit(1e-9) * (T::one() + sys.coefficient_scale())
}

/// Sign-table verdict at a Σ-point; `|Xf|, |Yf| <= tol` count as zero.
pub fn classify_point<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> SigmaClassification<T> {
    let l = sys.lie();
    let xf = l.xf.eval_sigma(p[0], p[1]);
    let yf = l.yf.eval_sigma(p[0], p[1]);
    let kind = if xf.abs() <= tol || yf.abs() <= tol {
        SigmaKind::Tangency(tangency_type(sys, p, tol).unwrap_or(TangencyType::Degenerate))
    } else if xf * yf > T::zero() {
        SigmaKind::Crossing
    } else if xf < T::zero() {
        SigmaKind::StableSliding
    } else {
        SigmaKind::UnstableSliding
    };
    SigmaClassification { kind, xf, yf }
}

/// Kind of tangency at `p`, or `None` when neither field is tangent there.
pub fn tangency_type<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> Option<TangencyType> {
    let l = sys.lie();
    let at = |q: &Poly3<T>| q.eval_sigma(p[0], p[1]);
    let x_tangent = at(&l.xf).abs() <= tol;
    let y_tangent = at(&l.yf).abs() <= tol;
    let x_fold = at(&l.x2f).abs() > tol;
    let y_fold = at(&l.y2f).abs() > tol;
    Some(match (x_tangent, y_tangent) {
        (false, false) => return None,
        (true, false) => {
            if x_fold {
                TangencyType::FoldRegular
            } else if is_cusp(sys, Side::X, p, tol) {
                TangencyType::CuspRegular
            } else {
                TangencyType::Degenerate
            }
        }
        (false, true) => {
            if y_fold {
                TangencyType::RegularFold
            } else if is_cusp(sys, Side::Y, p, tol) {
                TangencyType::RegularCusp
            } else {
                TangencyType::Degenerate
            }
        }
        (true, true) => {
            if x_fold && y_fold && fold_transversality(sys, p, tol).transversal {
                TangencyType::FoldFold(FoldFoldSubtype::from_signs(
                    at(&l.x2f) > T::zero(),
                    at(&l.y2f) > T::zero(),
                ))
            } else {
                TangencyType::Degenerate
            }
        }
    })
}

/// `det(df, dWf, dW²f)` at a Σ-point; with `df = dz` only the `(x, y)` minor survives.
pub fn cusp_determinant<T: Scalar>(sys: &PiecewiseSystem<T>, side: Side, p: SigmaPoint<T>) -> T {
    let l = sys.lie();
    let g1 = l.first(side);
    let g2 = l.second(side);
    let pt = [p[0], p[1], T::zero()];
    g1.partial(Var::X).eval(pt) * g2.partial(Var::Y).eval(pt)
        - g1.partial(Var::Y).eval(pt) * g2.partial(Var::X).eval(pt)
}

fn is_cusp<T: Scalar>(sys: &PiecewiseSystem<T>, side: Side, p: SigmaPoint<T>, tol: T) -> bool {
    let third = sys.lie().third(side).eval_sigma(p[0], p[1]);
    third.abs() > tol && cusp_determinant(sys, side, p).abs() > T::lit(CUSP_DET_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Transversality<T> {
    pub transversal: bool,
    /// `det(∇_Σ Xf, ∇_Σ Yf)`.
    pub det: T,
}

/// Whether `S_X` and `S_Y` cross transversally at `p`.
pub fn fold_transversality<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    p: SigmaPoint<T>,
    tol: T,
) -> Transversality<T> {
    let l = sys.lie();
    let pt = [p[0], p[1], T::zero()];
    let det = l.xf.partial(Var::X).eval(pt) * l.yf.partial(Var::Y).eval(pt)
        - l.xf.partial(Var::Y).eval(pt) * l.yf.partial(Var::X).eval(pt);
    Transversality {
        transversal: det.abs() > tol,
        det,
    }
}

/// Resolution knobs for [`tangency_curves`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveConfig<T> {
    /// Seed grid points per axis.
    pub grid: usize,
    /// Continuation step as a fraction of the Σ-slice diagonal.
    pub step_fraction: T,
    pub corrector_iterations: usize,
    pub max_steps: usize,
}

impl<T: Scalar> Default for CurveConfig<T> {
    fn default() -> Self {
        Self {
            grid: 64,
            step_fraction: T::lit(1e-2),
            corrector_iterations: 30,
            max_steps: 20_000,
        }
    }
}

/// Sampled zero set of a polynomial on Σ, as polylines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroSet<T> {
    pub curves: Vec<Vec<SigmaPoint<T>>>,
    /// Set when a branch stopped at a singular point or the corrector failed.
    pub partial: bool,
}

impl<T: Scalar> ZeroSet<T> {
    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &SigmaPoint<T>> {
        self.curves.iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TangencyCurves<T> {
    pub s_x: ZeroSet<T>,
    pub s_y: ZeroSet<T>,
}

/// Traces `S_X = {Xf = 0}` and `S_Y = {Yf = 0}` inside the Σ-slice of `b`.
pub fn tangency_curves<T: Scalar>(
    sys: &PiecewiseSystem<T>,
    b: &Aabb<T>,
    cfg: &CurveConfig<T>,
) -> TangencyCurves<T> {
    let l = sys.lie();
    TangencyCurves {
        s_x: trace_zero_set(&l.xf.restrict_to_sigma(), b, cfg),
        s_y: trace_zero_set(&l.yf.restrict_to_sigma(), b, cfg),
    }
}

struct Level<T> {
    g: Poly3<T>,
    gx: Poly3<T>,
    gy: Poly3<T>,
}

impl<T: Scalar> Level<T> {
    fn value(&self, p: SigmaPoint<T>) -> T {
        self.g.eval_sigma(p[0], p[1])
    }

    fn grad(&self, p: SigmaPoint<T>) -> [T; 2] {
        [self.gx.eval_sigma(p[0], p[1]), self.gy.eval_sigma(p[0], p[1])]
    }

    /// Newton projection onto the zero set along the gradient.
    fn correct(&self, mut p: SigmaPoint<T>, iterations: usize, scale: T) -> Option<SigmaPoint<T>> {
        let tiny = T::epsilon().sqrt() * scale.max(T::one());
        for _ in 0..iterations {
            let v = self.value(p);
            let g = self.grad(p);
            let n2 = g[0] * g[0] + g[1] * g[1];
            if n2.sqrt() <= tiny {
                return None;
            }
            let dx = v * g[0] / n2;
            let dy = v * g[1] / n2;
            p = [p[0] - dx, p[1] - dy];
            if (dx * dx + dy * dy).sqrt() <= T::epsilon() * T::lit(16.0) * (T::one() + p[0].abs() + p[1].abs()) {
                return Some(p);
            }
        }
        let g = self.grad(p);
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        (self.value(p).abs() <= T::epsilon().sqrt() * n * scale).then_some(p)
    }
}

fn dist<T: Scalar>(a: SigmaPoint<T>, b: SigmaPoint<T>) -> T {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn inside<T: Scalar>(p: SigmaPoint<T>, b: &Aabb<T>) -> bool {
    p[0] >= b.min[0] && p[0] <= b.max[0] && p[1] >= b.min[1] && p[1] <= b.max[1]
}

fn trace_zero_set<T: Scalar>(g: &Poly3<T>, b: &Aabb<T>, cfg: &CurveConfig<T>) -> ZeroSet<T> {
    let level = Level {
        gx: g.partial(Var::X),
        gy: g.partial(Var::Y),
        g: g.clone(),
    };
    let mut out = ZeroSet::default();
    if g.is_zero() {
        // Identically tangent: no curve structure to trace.
        out.partial = true;
        return out;
    }
    let wx = b.max[0] - b.min[0];
    let wy = b.max[1] - b.min[1];
    let diag = (wx * wx + wy * wy).sqrt();
    let h = diag * cfg.step_fraction;
    let n = cfg.grid.max(2);
    let node = |i: usize, j: usize| -> SigmaPoint<T> {
        let fi = T::lit(i as f64 / (n - 1) as f64);
        let fj = T::lit(j as f64 / (n - 1) as f64);
        [b.min[0] + wx * fi, b.min[1] + wy * fj]
    };

    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = node(i, j);
            let v = level.value(p);
            if v == T::zero() {
                seeds.push(p);
                continue;
            }
            for q in [
                (i + 1 < n).then(|| node(i + 1, j)),
                (j + 1 < n).then(|| node(i, j + 1)),
            ]
            .into_iter()
            .flatten()
            {
                let w = level.value(q);
                if v * w < T::zero() {
                    seeds.push(bisect_edge(&level, p, q, v));
                }
            }
        }
    }

    for seed in seeds {
        if out.points().any(|q| dist(*q, seed) < h * T::lit(1.5)) {
            continue;
        }
        let Some(start) = level.correct(seed, cfg.corrector_iterations, diag) else {
            out.partial = true;
            continue;
        };
        if !inside(start, b) || out.points().any(|q| dist(*q, start) < h * T::lit(1.5)) {
            continue;
        }
        let (forward, closed, p1) = trace_branch(&level, start, h, T::one(), b, cfg, diag);
        out.partial |= p1;
        let curve = if closed {
            let mut c = forward;
            c.push(start);
            c
        } else {
            let (backward, _, p2) = trace_branch(&level, start, h, -T::one(), b, cfg, diag);
            out.partial |= p2;
            let mut c: Vec<_> = backward.into_iter().rev().collect();
            c.extend(forward);
            c
        };
        out.curves.push(curve);
    }
    out
}

fn bisect_edge<T: Scalar>(level: &Level<T>, mut a: SigmaPoint<T>, mut b: SigmaPoint<T>, mut va: T) -> SigmaPoint<T> {
    for _ in 0..60 {
        let m = [(a[0] + b[0]) / T::two(), (a[1] + b[1]) / T::two()];
        let vm = level.value(m);
        if vm == T::zero() {
            return m;
        }
        if va * vm < T::zero() {
            b = m;
        } else {
            a = m;
            va = vm;
        }
    }
    [(a[0] + b[0]) / T::two(), (a[1] + b[1]) / T::two()]
}

/// Follows the zero set from `start`; returns points (start included), closed flag, partial flag.
fn trace_branch<T: Scalar>(
    level: &Level<T>,
    start: SigmaPoint<T>,
    h: T,
    orientation: T,
    b: &Aabb<T>,
    cfg: &CurveConfig<T>,
    diag: T,
) -> (Vec<SigmaPoint<T>>, bool, bool) {
    let mut pts = vec![start];
    let mut p = start;
    let mut prev_t: Option<[T; 2]> = None;
    for step in 0..cfg.max_steps {
        let g = level.grad(p);
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if n <= T::epsilon().sqrt() * diag.max(T::one()) {
            return (pts, false, true);
        }
        let mut t = [-g[1] / n * orientation, g[0] / n * orientation];
        if let Some(pt) = prev_t {
            if t[0] * pt[0] + t[1] * pt[1] < T::zero() {
                t = [-t[0], -t[1]];
            }
        }
        prev_t = Some(t);
        let predicted = [p[0] + h * t[0], p[1] + h * t[1]];
        let Some(next) = level.correct(predicted, cfg.corrector_iterations, diag) else {
            return (pts, false, true);
        };
        if !inside(next, b) {
            if let Some(edge) = clip_to_box(level, p, next, b, cfg, diag) {
                pts.push(edge);
            }
            return (pts, false, false);
        }
        if step > 2 && dist(next, start) < h {
            return (pts, true, false);
        }
        pts.push(next);
        p = next;
    }
    (pts, false, true)
}

/// Last point of the zero set on the segment towards the box boundary.
fn clip_to_box<T: Scalar>(
    level: &Level<T>,
    p: SigmaPoint<T>,
    q: SigmaPoint<T>,
    b: &Aabb<T>,
    cfg: &CurveConfig<T>,
    diag: T,
) -> Option<SigmaPoint<T>> {
    let mut s = T::one();
    for i in 0..2 {
        let d = q[i] - p[i];
        if d > T::zero() && q[i] > b.max[i] {
            s = s.min((b.max[i] - p[i]) / d);
        } else if d < T::zero() && q[i] < b.min[i] {
            s = s.min((b.min[i] - p[i]) / d);
        }
    }
    let guess = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
    // Slide along the violated edge so the point stays on the boundary.
    let on_x_edge = (guess[0] - b.min[0]).abs() <= T::epsilon() * diag || (guess[0] - b.max[0]).abs() <= T::epsilon() * diag;
    let mut r = guess;
    for _ in 0..cfg.corrector_iterations {
        let v = level.value(r);
        let g = level.grad(r);
        let k = if on_x_edge { 1 } else { 0 };
        if g[k] == T::zero() {
            break;
        }
        let d = v / g[k];
        r[k] = r[k] - d;
        if d.abs() <= T::epsilon() * T::lit(16.0) * (T::one() + r[k].abs()) {
            break;
        }
    }
    (inside(r, b) && dist(r, guess) <= diag * cfg.step_fraction).then_some(r)
}
