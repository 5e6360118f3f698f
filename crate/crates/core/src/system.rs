//! Piecewise-smooth systems `Z = (X, Y)` with switching surface `Σ = {z = 0}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    lie_derivative_with_cap, AlgebraError, Exponent, Point3, Poly3, VectorField3, Var,
    DEFAULT_MAX_DEGREE,
};
use crate::scalar::Scalar;

/// Which of the two smooth fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Field acting on `M⁺ = {z > 0}`.
    X,
    /// Field acting on `M⁻ = {z < 0}`.
    Y,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("malformed system document: {0}")]
    Malformed(String),
    #[error("non-finite coefficient in {field}.{component}")]
    NonFinite { field: String, component: String },
    #[error("field {field} exceeds the degree cap: {source}")]
    DegreeCap {
        field: String,
        #[source]
        source: AlgebraError,
    },
    #[error("analysis box has no Σ-slice of positive area")]
    EmptyBox,
    #[error("invalid normal form: {0}")]
    InvalidNormalForm(String),
}

impl SystemError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SystemError::Malformed(_) => "malformed",
            SystemError::NonFinite { .. } => "non-finite",
            SystemError::DegreeCap { .. } => "degree-cap",
            SystemError::EmptyBox => "empty-box",
            SystemError::InvalidNormalForm(_) => "invalid-normal-form",
        }
    }
}

/// Axis-aligned analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Aabb<T> {
    pub min: [T; 3],
    pub max: [T; 3],
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: [T; 3], max: [T; 3]) -> Self {
        Self { min, max }
    }

    /// `[xmin, xmax, ymin, ymax, zmin, zmax]`.
    pub fn from_slice(b: [T; 6]) -> Self {
        Self::new([b[0], b[2], b[4]], [b[1], b[3], b[5]])
    }

    pub fn to_slice(&self) -> [T; 6] {
        [
            self.min[0], self.max[0], self.min[1], self.max[1], self.min[2], self.max[2],
        ]
    }

    /// The cube `[-r, r]³`.
    pub fn cube(r: T) -> Self {
        Self::new([-r; 3], [r; 3])
    }

    pub fn contains(&self, p: Point3<T>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn has_sigma_slice(&self) -> bool {
        self.min[0] < self.max[0]
            && self.min[1] < self.max[1]
            && self.min[2] <= T::zero()
            && self.max[2] >= T::zero()
    }

    pub fn volume(&self) -> T {
        (0..3)
            .map(|i| (self.max[i] - self.min[i]).max(T::zero()))
            .fold(T::one(), |a, b| a * b)
    }

    pub fn center(&self) -> Point3<T> {
        [0, 1, 2].map(|i| (self.min[i] + self.max[i]) / T::two())
    }

    /// Length of the longest edge; used as the box-relative scale.
    pub fn scale(&self) -> T {
        (0..3)
            .map(|i| self.max[i] - self.min[i])
            .fold(T::zero(), T::max)
    }

    /// Same centre, every half-width multiplied by `factor`.
    pub fn expanded(&self, factor: T) -> Self {
        let c = self.center();
        let mut min = self.min;
        let mut max = self.max;
        for i in 0..3 {
            let h = (self.max[i] - self.min[i]) / T::two() * factor;
            min[i] = c[i] - h;
            max[i] = c[i] + h;
        }
        Self { min, max }
    }
}

impl<T: Scalar> Default for Aabb<T> {
    fn default() -> Self {
        Self::cube(T::one())
    }
}

/// Normal parameters a descriptor claims to realise; checked by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeclaredNormalForm {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: i8,
}

/// Lie derivatives of `f = z` along `X` and `Y` up to third order.
#[derive(Debug, Clone, PartialEq)]
pub struct LieDerivatives<T> {
    pub xf: Poly3<T>,
    pub x2f: Poly3<T>,
    pub x3f: Poly3<T>,
    pub yf: Poly3<T>,
    pub y2f: Poly3<T>,
    pub y3f: Poly3<T>,
    /// `X(Yf)`.
    pub xyf: Poly3<T>,
    /// `Y(Xf)`.
    pub yxf: Poly3<T>,
}

impl<T: Scalar> LieDerivatives<T> {
    fn compute(x: &VectorField3<T>, y: &VectorField3<T>) -> Result<Self, AlgebraError> {
        // Third-order chains of a degree-d field reach degree 3d - 2.
        let cap = DEFAULT_MAX_DEGREE.max(3 * x.degree().max(y.degree()));
        let f = Poly3::z();
        let xf = lie_derivative_with_cap(x, &f, cap)?;
        let x2f = lie_derivative_with_cap(x, &xf, cap)?;
        let x3f = lie_derivative_with_cap(x, &x2f, cap)?;
        let yf = lie_derivative_with_cap(y, &f, cap)?;
        let y2f = lie_derivative_with_cap(y, &yf, cap)?;
        let y3f = lie_derivative_with_cap(y, &y2f, cap)?;
        let xyf = lie_derivative_with_cap(x, &yf, cap)?;
        let yxf = lie_derivative_with_cap(y, &xf, cap)?;
        Ok(Self {
            xf,
            x2f,
            x3f,
            yf,
            y2f,
            y3f,
            xyf,
            yxf,
        })
    }

    pub fn first(&self, side: Side) -> &Poly3<T> {
        match side {
            Side::X => &self.xf,
            Side::Y => &self.yf,
        }
    }

    pub fn second(&self, side: Side) -> &Poly3<T> {
        match side {
            Side::X => &self.x2f,
            Side::Y => &self.y2f,
        }
    }

    pub fn third(&self, side: Side) -> &Poly3<T> {
        match side {
            Side::X => &self.x3f,
            Side::Y => &self.y3f,
        }
    }
}

/// `Z = (X, Y)` on a box, with `X` active on `z > 0` and `Y` on `z < 0`.
#[derive(Debug, Clone)]
pub struct PiecewiseSystem<T> {
    pub name: String,
    x_field: VectorField3<T>,
    y_field: VectorField3<T>,
    domain_box: Aabb<T>,
    declared: Option<DeclaredNormalForm>,
    lie: LieDerivatives<T>,
}

impl<T: Scalar> PiecewiseSystem<T> {
    pub fn new(
        name: impl Into<String>,
        x_field: VectorField3<T>,
        y_field: VectorField3<T>,
        domain_box: Aabb<T>,
    ) -> Result<Self, SystemError> {
        if !domain_box.has_sigma_slice() {
            return Err(SystemError::EmptyBox);
        }
        for (label, field) in [("X", &x_field), ("Y", &y_field)] {
            for (comp, p) in ["cx", "cy", "cz"].iter().zip(field.components()) {
                if !p.all_finite() {
                    return Err(SystemError::NonFinite {
                        field: label.into(),
                        component: (*comp).into(),
                    });
                }
                p.check_degree(DEFAULT_MAX_DEGREE)
                    .map_err(|source| SystemError::DegreeCap {
                        field: label.into(),
                        source,
                    })?;
            }
        }
        let lie = LieDerivatives::compute(&x_field, &y_field).map_err(|source| {
            SystemError::DegreeCap {
                field: "Lie derivatives".into(),
                source,
            }
        })?;
        Ok(Self {
            name: name.into(),
            x_field,
            y_field,
            domain_box,
            declared: None,
            lie,
        })
    }

    pub fn with_declared(mut self, declared: DeclaredNormalForm) -> Self {
        self.declared = Some(declared);
        self
    }

    pub fn x_field(&self) -> &VectorField3<T> {
        &self.x_field
    }

    pub fn y_field(&self) -> &VectorField3<T> {
        &self.y_field
    }

    pub fn field(&self, side: Side) -> &VectorField3<T> {
        match side {
            Side::X => &self.x_field,
            Side::Y => &self.y_field,
        }
    }

    pub fn domain_box(&self) -> &Aabb<T> {
        &self.domain_box
    }

    pub fn declared(&self) -> Option<DeclaredNormalForm> {
        self.declared
    }

    pub fn lie(&self) -> &LieDerivatives<T> {
        &self.lie
    }

    /// Largest coefficient magnitude over both fields.
    pub fn coefficient_scale(&self) -> T {
        self.x_field
            .max_abs_coefficient()
            .max(self.y_field.max_abs_coefficient())
    }

    /// Copy with a different analysis window.
    pub fn with_box(&self, domain_box: Aabb<T>) -> Result<Self, SystemError> {
        if !domain_box.has_sigma_slice() {
            return Err(SystemError::EmptyBox);
        }
        let mut out = self.clone();
        out.domain_box = domain_box;
        Ok(out)
    }

    /// `Z(p)`: `X` above Σ, `Y` below; on Σ the average `F = (X + Y)/2`.
    pub fn eval_discontinuous(&self, p: Point3<T>) -> Point3<T> {
        let a = self.x_field.eval(p);
        let b = self.y_field.eval(p);
        let s = if p[2] > T::zero() {
            T::one()
        } else if p[2] < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        [0, 1, 2].map(|i| (a[i] + b[i]) / T::two() + s * (a[i] - b[i]) / T::two())
    }
}

/// JSON coefficient: a number, or a string such as `"NaN"` that must be rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(f64),
    Text(String),
}

/// Per-component term lists of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub cx: Vec<(Exponent, Coefficient)>,
    pub cy: Vec<(Exponent, Coefficient)>,
    pub cz: Vec<(Exponent, Coefficient)>,
}

/// On-disk description of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub name: String,
    #[serde(rename = "box", default = "default_box")]
    pub domain_box: [f64; 6],
    #[serde(rename = "X")]
    pub x: FieldDescriptor,
    #[serde(rename = "Y")]
    pub y: FieldDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_parameters: Option<DeclaredNormalForm>,
}

fn default_box() -> [f64; 6] {
    [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0]
}

fn poly_from_terms<T: Scalar>(
    terms: &[(Exponent, Coefficient)],
    field: &str,
    component: &str,
) -> Result<Poly3<T>, SystemError> {
    let mut out = Vec::with_capacity(terms.len());
    for (e, c) in terms {
        let v = match c {
            Coefficient::Number(v) => *v,
            Coefficient::Text(s) => s.trim().parse::<f64>().map_err(|_| {
                SystemError::Malformed(format!("{field}.{component}: coefficient {s:?}"))
            })?,
        };
        let v_t = T::from_f64(v).filter(|t| t.is_finite());
        match v_t {
            Some(t) if v.is_finite() => out.push((*e, t)),
            _ => {
                return Err(SystemError::NonFinite {
                    field: field.into(),
                    component: component.into(),
                })
            }
        }
    }
    let p = Poly3::from_terms(out);
    p.check_degree(DEFAULT_MAX_DEGREE)
        .map_err(|source| SystemError::DegreeCap {
            field: field.into(),
            source,
        })?;
    Ok(p)
}

fn field_from_descriptor<T: Scalar>(
    d: &FieldDescriptor,
    label: &str,
) -> Result<VectorField3<T>, SystemError> {
    Ok(VectorField3::new(
        poly_from_terms(&d.cx, label, "cx")?,
        poly_from_terms(&d.cy, label, "cy")?,
        poly_from_terms(&d.cz, label, "cz")?,
    ))
}

fn descriptor_terms<T: Scalar>(p: &Poly3<T>) -> Vec<(Exponent, Coefficient)> {
    p.terms()
        .map(|(e, c)| (*e, Coefficient::Number(c.as_f64())))
        .collect()
}

fn field_descriptor<T: Scalar>(f: &VectorField3<T>) -> FieldDescriptor {
    FieldDescriptor {
        cx: descriptor_terms(&f.cx),
        cy: descriptor_terms(&f.cy),
        cz: descriptor_terms(&f.cz),
    }
}

impl SystemDescriptor {
    pub fn into_system<T: Scalar>(&self) -> Result<PiecewiseSystem<T>, SystemError> {
        let x = field_from_descriptor(&self.x, "X")?;
        let y = field_from_descriptor(&self.y, "Y")?;
        if self.domain_box.iter().any(|v| !v.is_finite()) {
            return Err(SystemError::NonFinite {
                field: "box".into(),
                component: "bounds".into(),
            });
        }
        let b = Aabb::from_slice(self.domain_box.map(T::lit));
        let sys = PiecewiseSystem::new(self.name.clone(), x, y, b)?;
        Ok(match self.normal_parameters {
            Some(d) => sys.with_declared(d),
            None => sys,
        })
    }

    pub fn from_system<T: Scalar>(sys: &PiecewiseSystem<T>) -> Self {
        Self {
            name: sys.name.clone(),
            domain_box: sys.domain_box.to_slice().map(|v| v.as_f64()),
            x: field_descriptor(&sys.x_field),
            y: field_descriptor(&sys.y_field),
            normal_parameters: sys.declared,
        }
    }
}

/// Parses a JSON system document.
pub fn load_system<T: Scalar>(text: &str) -> Result<PiecewiseSystem<T>, SystemError> {
    let d: SystemDescriptor =
        serde_json::from_str(text).map_err(|e| SystemError::Malformed(e.to_string()))?;
    d.into_system()
}

pub fn serialize_system<T: Scalar>(sys: &PiecewiseSystem<T>) -> String {
    serde_json::to_string_pretty(&SystemDescriptor::from_system(sys))
        .expect("descriptor serialises")
}

/// Builds `X = (α, 1, δy)`, `Y = (γ, β, x) + hot` with the fold-fold at the origin.
///
/// `hot` must be `O(|·|)` in its first two components and `O(|·|²)` in the third.
pub fn build_normal_form<T: Scalar>(
    alpha: T,
    beta: T,
    gamma: T,
    delta: i8,
    hot: Option<&VectorField3<T>>,
) -> Result<PiecewiseSystem<T>, SystemError> {
    if delta != 1 && delta != -1 {
        return Err(SystemError::InvalidNormalForm(format!(
            "delta must be ±1, got {delta}"
        )));
    }
    if gamma == T::zero() || !gamma.is_finite() {
        return Err(SystemError::InvalidNormalForm(
            "gamma must be a non-zero finite number".into(),
        ));
    }
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(SystemError::InvalidNormalForm(
            "alpha and beta must be finite".into(),
        ));
    }
    let d = T::from_i8(delta).expect("±1");
    let x_field = VectorField3::new(Poly3::constant(alpha), Poly3::constant(T::one()), Poly3::y().scale(d));
    let mut y_field = VectorField3::new(Poly3::constant(gamma), Poly3::constant(beta), Poly3::x());
    if let Some(h) = hot {
        let min_order = |p: &Poly3<T>| p.terms().map(|(e, _)| e[0] + e[1] + e[2]).min();
        if min_order(&h.cx).is_some_and(|o| o < 1) || min_order(&h.cy).is_some_and(|o| o < 1) {
            return Err(SystemError::InvalidNormalForm(
                "higher-order terms in the first two components must vanish at the origin".into(),
            ));
        }
        if min_order(&h.cz).is_some_and(|o| o < 2) {
            return Err(SystemError::InvalidNormalForm(
                "higher-order terms in the third component must be at least quadratic".into(),
            ));
        }
        y_field = VectorField3::new(
            &y_field.cx + &h.cx,
            &y_field.cy + &h.cy,
            &y_field.cz + &h.cz,
        );
    }
    let name = format!(
        "normal-form(alpha={alpha}, beta={beta}, gamma={gamma}, delta={delta})"
    );
    let sys = PiecewiseSystem::new(name, x_field, y_field, Aabb::default())?;
    Ok(sys.with_declared(DeclaredNormalForm {
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        gamma: gamma.as_f64(),
        delta,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValidationWarning {
    DegenerateBox { volume: f64 },
    FieldVanishesOnSigma { field: Side, point: [f64; 3] },
    HighDegree { field: Side, degree: u32 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Grid resolution for the vanishing scan on the Σ-slice.
pub const VANISHING_GRID: usize = 41;
/// Residual below which a polished zero counts as a vanishing point.
pub const VANISHING_TOL: f64 = 1e-10;

/// Sanity checks that do not reject the system.
pub fn validate<T: Scalar>(sys: &PiecewiseSystem<T>) -> ValidationReport {
    let mut warnings = Vec::new();
    let b = sys.domain_box();
    if b.volume() <= T::zero() {
        warnings.push(ValidationWarning::DegenerateBox {
            volume: b.volume().as_f64(),
        });
    }
    for side in [Side::X, Side::Y] {
        let field = sys.field(side);
        // Third-order Lie chains stay under the default cap only up to degree 3.
        if 3 * field.degree() > DEFAULT_MAX_DEGREE + 2 {
            warnings.push(ValidationWarning::HighDegree {
                field: side,
                degree: field.degree(),
            });
        }
        if let Some(p) = find_vanishing_point(field, b) {
            warnings.push(ValidationWarning::FieldVanishesOnSigma {
                field: side,
                point: [p[0].as_f64(), p[1].as_f64(), 0.0],
            });
        }
    }
    ValidationReport { warnings }
}

/// Gauss–Newton search for a zero of `field(x, y, 0)` inside the box slice.
fn find_vanishing_point<T: Scalar>(field: &VectorField3<T>, b: &Aabb<T>) -> Option<[T; 2]> {
    let n = VANISHING_GRID;
    let tol = T::lit(VANISHING_TOL);
    let comps: Vec<Poly3<T>> = field
        .components()
        .iter()
        .map(|c| c.restrict_to_sigma())
        .collect();
    let grads: Vec<(Poly3<T>, Poly3<T>)> = comps
        .iter()
        .map(|c| (c.partial(Var::X), c.partial(Var::Y)))
        .collect();
    let norm2 = |x: T, y: T| comps.iter().map(|c| c.eval_sigma(x, y).powi(2)).sum::<T>();

    let step = |i: usize, lo: T, hi: T| lo + (hi - lo) * T::lit(i as f64 / (n - 1) as f64);
    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = norm2(step(i, b.min[0], b.max[0]), step(j, b.min[1], b.max[1]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = values[i * n + j];
            // Seed only from local minima of the residual over the grid.
            let mut is_min = true;
            for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii >= 0 && jj >= 0 && (ii as usize) < n && (jj as usize) < n {
                    is_min &= v <= values[ii as usize * n + jj as usize];
                }
            }
            if !is_min {
                continue;
            }
            let mut x = step(i, b.min[0], b.max[0]);
            let mut y = step(j, b.min[1], b.max[1]);
            for _ in 0..50 {
                if norm2(x, y).sqrt() <= tol {
                    break;
                }
                // Normal equations of the 3×2 least-squares step.
                let (mut a11, mut a12, mut a22, mut g1, mut g2) =
                    (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
                for (c, (gx, gy)) in comps.iter().zip(&grads) {
                    let r = c.eval_sigma(x, y);
                    let jx = gx.eval_sigma(x, y);
                    let jy = gy.eval_sigma(x, y);
                    a11 = a11 + jx * jx;
                    a12 = a12 + jx * jy;
                    a22 = a22 + jy * jy;
                    g1 = g1 + jx * r;
                    g2 = g2 + jy * r;
                }
                let det = a11 * a22 - a12 * a12;
                if det.abs() <= T::epsilon() * (a11 * a22).abs().max(T::min_positive_value()) {
                    break;
                }
                x = x - (a22 * g1 - a12 * g2) / det;
                y = y - (a11 * g2 - a12 * g1) / det;
            }
            let inside = x >= b.min[0] && x <= b.max[0] && y >= b.min[1] && y <= b.max[1];
            if inside && norm2(x, y).sqrt() <= tol {
                return Some([x, y]);
            }
        }
    }
    None
}
