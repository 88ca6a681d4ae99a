//! Hamilton–Jacobi functions and the checks that certify them.
//!
//! A field `W(t, x¹, x², x³)` is represented by its values and (optionally) an
//! analytic gradient `∂_a W = (−H, p₁, p₂, p₃)`. Exactness of the one-form
//! `dW = p·dx − H dt` is tested two ways: locally by the antisymmetrized
//! Jacobian of the form, and globally by integrating it around random
//! axis-aligned rectangles.
//!
//! Points use tetrad coordinates `(t, x¹, x², x³)` throughout this module.

use crate::clifford::FourVector;
use crate::geometry::Point;
use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Tolerance on `(Δt)² − |Δx|²` below which a separation counts as null.
pub const TIMELIKE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HjError {
    #[error("point {0:?} is not timelike-separated from the base point")]
    NonTimelikeSeparation(Point),
    #[error("point {0:?} is on or outside the boundary of the field's domain")]
    DomainBoundary(Point),
    #[error("field has no rest mass set")]
    MissingRestMass,
    #[error("least-squares normal matrix is ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("invalid field description: {0}")]
    InvalidDescription(String),
}

/// Scalar action field.
pub trait HamiltonJacobiField: Send + Sync {
    fn value(&self, x: &Point) -> Result<f64, HjError>;

    /// `∂_a W` when a closed form exists.
    fn analytic_gradient(&self, _x: &Point) -> Option<Result<FourVector, HjError>> {
        None
    }

    fn rest_mass(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

/// Central-difference step for `W`.
pub fn fd_step(x: &Point) -> f64 {
    1e-6 * x.iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0)
}

/// `(∂W/∂t, ∂W/∂x¹, ∂W/∂x², ∂W/∂x³)`, analytic when available.
pub fn gradient(field: &dyn HamiltonJacobiField, x: &Point) -> Result<FourVector, HjError> {
    match field.analytic_gradient(x) {
        Some(g) => g,
        None => gradient_fd(field, x),
    }
}

pub fn gradient_with(field: &dyn HamiltonJacobiField, x: &Point, mode: GradientMode) -> Result<FourVector, HjError> {
    match mode {
        GradientMode::Analytic => gradient(field, x),
        GradientMode::FiniteDifference => gradient_fd(field, x),
    }
}

pub fn gradient_fd(field: &dyn HamiltonJacobiField, x: &Point) -> Result<FourVector, HjError> {
    let h = fd_step(x);
    let mut out = [0.0; 4];
    for a in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[a] += h;
        xm[a] -= h;
        let fp = field.value(&xp).map_err(|_| HjError::DomainBoundary(*x))?;
        let fm = field.value(&xm).map_err(|_| HjError::DomainBoundary(*x))?;
        out[a] = (fp - fm) / (2.0 * h);
    }
    Ok(FourVector(out))
}

/// Splits a gradient into `(H, [p₁, p₂, p₃])` with `H = −∂W/∂t`.
pub fn energy_momentum(grad: &FourVector) -> (f64, [f64; 3]) {
    (-grad.0[0], grad.spatial())
}

// ---------------------------------------------------------------------------
// Concrete fields

#[derive(Debug, Clone)]
pub struct ConstantField(pub f64);

impl HamiltonJacobiField for ConstantField {
    fn value(&self, _x: &Point) -> Result<f64, HjError> {
        Ok(self.0)
    }
    fn analytic_gradient(&self, _x: &Point) -> Option<Result<FourVector, HjError>> {
        Some(Ok(FourVector::ZERO))
    }
}

/// `W = m₀ s + k`, `s = √((t − t₀)² − |x − x₀|²)`: the action of free motion
/// along the geodesics through a base point.
#[derive(Debug, Clone)]
pub struct GeodesicField {
    pub m0: f64,
    pub base: Point,
    pub k: f64,
}

impl GeodesicField {
    /// Proper time from the base point and the displacement.
    pub fn interval(&self, x: &Point) -> Result<(f64, FourVector), HjError> {
        let d = FourVector(std::array::from_fn(|a| x[a] - self.base[a]));
        let s2 = d.norm2();
        if s2 <= TIMELIKE_TOL {
            return Err(HjError::NonTimelikeSeparation(*x));
        }
        Ok((s2.sqrt(), d))
    }

    /// Unit tangent `dxᵃ/ds` of the geodesic from the base point through `x`.
    pub fn tangent(&self, x: &Point) -> Result<FourVector, HjError> {
        let (s, d) = self.interval(x)?;
        Ok(d * (1.0 / s))
    }
}

/// Builds the geodesic action with additive constant `k = 0`.
pub fn construct_geodesic_w(m0: f64, base_point: Point) -> GeodesicField {
    GeodesicField { m0, base: base_point, k: 0.0 }
}

impl HamiltonJacobiField for GeodesicField {
    fn value(&self, x: &Point) -> Result<f64, HjError> {
        Ok(self.m0 * self.interval(x)?.0 + self.k)
    }
    fn analytic_gradient(&self, x: &Point) -> Option<Result<FourVector, HjError>> {
        // ∂_a W = m₀ u_a
        Some(self.tangent(x).map(|u| u.lower() * self.m0))
    }
    fn rest_mass(&self) -> Option<f64> {
        Some(self.m0)
    }
}

/// Free-fall projectile of rest mass `m₀` under a constant proper
/// acceleration `g` along `−x²`, launched from `(t₀, x₀, y₀, 0)` with
/// spatial proper velocity `(u_x, u_y, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Projectile {
    pub m0: f64,
    pub ux: f64,
    pub uy: f64,
    pub g: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
}

pub fn projectile_field(m0: f64, ux: f64, uy: f64, g: f64) -> Projectile {
    Projectile { m0, ux, uy, g, t0: 0.0, x0: 0.0, y0: 0.0 }
}

impl Projectile {
    /// `ṫ(s) = √(1 + u_x² + (u_y − g s)²)`
    pub fn tdot(&self, s: f64) -> f64 {
        let vy = self.uy - self.g * s;
        (1.0 + self.ux * self.ux + vy * vy).sqrt()
    }

    /// Coordinate time elapsed along the arc, in closed form.
    pub fn time(&self, s: f64) -> f64 {
        let a = 1.0 + self.ux * self.ux;
        if self.g == 0.0 {
            return self.t0 + self.tdot(0.0) * s;
        }
        // ∫√(a + w²) dw = ½(w√(a + w²) + a·asinh(w/√a)), w = u_y − g s
        let prim = |w: f64| 0.5 * (w * (a + w * w).sqrt() + a * (w / a.sqrt()).asinh());
        self.t0 - (prim(self.uy - self.g * s) - prim(self.uy)) / self.g
    }

    /// `(t(s), x(s), y(s), 0)` with `x = x₀ + u_x s`, `y = y₀ + u_y s − ½ g s²`.
    pub fn position(&self, s: f64) -> Point {
        [
            self.time(s),
            self.x0 + self.ux * s,
            self.y0 + self.uy * s - 0.5 * self.g * s * s,
            0.0,
        ]
    }

    /// Unit tangent `dxᵃ/ds`.
    pub fn tangent(&self, s: f64) -> FourVector {
        FourVector::new(self.tdot(s), self.ux, self.uy - self.g * s, 0.0)
    }

    /// Contravariant momentum `m₀ dxᵃ/ds`.
    pub fn momentum(&self, s: f64) -> FourVector {
        self.tangent(s) * self.m0
    }

    /// The action evaluated with the arclength frozen at `s`.
    pub fn field_at(&self, s: f64) -> ProjectileField {
        ProjectileField { params: self.clone(), s, w0: 0.0 }
    }
}

/// `W = m₀u_x·x + m₀(u_y − g s)·y − m₀ṫ(s)·t + w₀` at a fixed arclength `s`.
#[derive(Debug, Clone)]
pub struct ProjectileField {
    pub params: Projectile,
    pub s: f64,
    pub w0: f64,
}

impl ProjectileField {
    pub fn with_offset(mut self, w0: f64) -> Self {
        self.w0 = w0;
        self
    }

    fn coefficients(&self) -> FourVector {
        let p = &self.params;
        FourVector::new(-p.m0 * p.tdot(self.s), p.m0 * p.ux, p.m0 * (p.uy - p.g * self.s), 0.0)
    }
}

impl HamiltonJacobiField for ProjectileField {
    fn value(&self, x: &Point) -> Result<f64, HjError> {
        let c = self.coefficients();
        Ok((0..4).map(|a| c.0[a] * x[a]).sum::<f64>() + self.w0)
    }
    fn analytic_gradient(&self, _x: &Point) -> Option<Result<FourVector, HjError>> {
        Some(Ok(self.coefficients()))
    }
    fn rest_mass(&self) -> Option<f64> {
        Some(self.params.m0)
    }
}

/// `W = p·x − E t + w₀`.
#[derive(Debug, Clone)]
pub struct PlaneWaveField {
    pub momentum: [f64; 3],
    pub energy: f64,
    pub w0: f64,
}

impl PlaneWaveField {
    /// Massless wave with `E = |p|`.
    pub fn null(momentum: [f64; 3]) -> Self {
        let e = momentum.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { momentum, energy: e, w0: 0.0 }
    }
}

impl HamiltonJacobiField for PlaneWaveField {
    fn value(&self, x: &Point) -> Result<f64, HjError> {
        Ok((0..3).map(|i| self.momentum[i] * x[i + 1]).sum::<f64>() - self.energy * x[0] + self.w0)
    }
    fn analytic_gradient(&self, _x: &Point) -> Option<Result<FourVector, HjError>> {
        let p = self.momentum;
        Some(Ok(FourVector::new(-self.energy, p[0], p[1], p[2])))
    }
    fn rest_mass(&self) -> Option<f64> {
        let p2: f64 = self.momentum.iter().map(|c| c * c).sum();
        let m2 = self.energy * self.energy - p2;
        // rounding in E = |p| must not leak a √ε mass
        if m2.abs() <= 8.0 * f64::EPSILON * p2.max(1.0) {
            return Some(0.0);
        }
        Some(m2.max(0.0).sqrt())
    }
}

/// Polynomial action with optional rest mass.
#[derive(Debug, Clone)]
pub struct PolynomialField {
    pub poly: crate::poly::Polynomial,
    pub m0: Option<f64>,
}

impl HamiltonJacobiField for PolynomialField {
    fn value(&self, x: &Point) -> Result<f64, HjError> {
        Ok(self.poly.eval(x))
    }
    fn analytic_gradient(&self, x: &Point) -> Option<Result<FourVector, HjError>> {
        Some(Ok(FourVector(self.poly.gradient(x))))
    }
    fn rest_mass(&self) -> Option<f64> {
        self.m0
    }
}

/// `W + c_a xᵃ` for a constant covector `c`.
#[derive(Clone)]
pub struct LinearShift {
    pub inner: Arc<dyn HamiltonJacobiField>,
    pub c: FourVector,
}

impl HamiltonJacobiField for LinearShift {
    fn value(&self, x: &Point) -> Result<f64, HjError> {
        Ok(self.inner.value(x)? + (0..4).map(|a| self.c.0[a] * x[a]).sum::<f64>())
    }
    fn analytic_gradient(&self, x: &Point) -> Option<Result<FourVector, HjError>> {
        self.inner.analytic_gradient(x).map(|g| g.map(|g| g + self.c))
    }
    fn rest_mass(&self) -> Option<f64> {
        self.inner.rest_mass()
    }
}

/// `x ↦ W(x)` wrapper around a closure, finite-difference gradient only.
pub struct FnField<F: Fn(&Point) -> Result<f64, HjError> + Send + Sync> {
    pub f: F,
    pub m0: Option<f64>,
}

impl<F: Fn(&Point) -> Result<f64, HjError> + Send + Sync> HamiltonJacobiField for FnField<F> {
    fn value(&self, x: &Point) -> Result<f64, HjError> {
        (self.f)(x)
    }
    fn rest_mass(&self) -> Option<f64> {
        self.m0
    }
}

// ---------------------------------------------------------------------------
// Reparameterizations ψ(W)

/// A differentiable real map `ψ` applied to an action.
pub trait ScalarMap: Send + Sync {
    fn value(&self, w: f64) -> f64;
    fn derivative(&self, w: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap;

impl ScalarMap for IdentityMap {
    fn value(&self, w: f64) -> f64 {
        w
    }
    fn derivative(&self, _w: f64) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SquareMap;

impl ScalarMap for SquareMap {
    fn value(&self, w: f64) -> f64 {
        w * w
    }
    fn derivative(&self, w: f64) -> f64 {
        2.0 * w
    }
}

/// `ψ(W) = e^{kW}`
#[derive(Debug, Clone, Copy)]
pub struct ExpMap {
    pub k: f64,
}

impl ScalarMap for ExpMap {
    fn value(&self, w: f64) -> f64 {
        (self.k * w).exp()
    }
    fn derivative(&self, w: f64) -> f64 {
        self.k * (self.k * w).exp()
    }
}

/// `ψ(W) = a W + b tanh(c W) + d W³`; increasing whenever `a > 0` and `b, c, d ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct MonotoneMix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ScalarMap for MonotoneMix {
    fn value(&self, w: f64) -> f64 {
        self.a * w + self.b * (self.c * w).tanh() + self.d * w * w * w
    }
    fn derivative(&self, w: f64) -> f64 {
        let sech = 1.0 / (self.c * w).cosh();
        self.a + self.b * self.c * sech * sech + 3.0 * self.d * w * w
    }
}

/// Inverts a monotone `ψ` on `[lo, hi]`: Newton steps kept inside a
/// shrinking bracket, bisection when a step would leave it.
pub fn invert_monotone(psi: &dyn ScalarMap, target: f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (psi.value(a) - target, psi.value(b) - target);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let increasing = fb > fa;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = psi.value(x) - target;
        if fx == 0.0 {
            return Some(x);
        }
        if (fx < 0.0) == increasing {
            a = x;
        } else {
            b = x;
        }
        let d = psi.derivative(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || next == a || next == b {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// One-forms and exactness

/// A covector field `ω = ω_t dt + ω_i dxⁱ`.
pub trait OneForm: Send + Sync {
    fn covector(&self, x: &Point) -> Result<FourVector, HjError>;
}

/// `dW` of an action.
pub struct GradientForm<'a>(pub &'a dyn HamiltonJacobiField);

impl OneForm for GradientForm<'_> {
    fn covector(&self, x: &Point) -> Result<FourVector, HjError> {
        gradient(self.0, x)
    }
}

/// `ψ′(W) dW`, i.e. `p*_a = ψ′ p_a`, `H* = ψ′ H`.
pub struct ScaledForm<'a> {
    pub field: &'a dyn HamiltonJacobiField,
    pub psi: &'a dyn ScalarMap,
}

impl OneForm for ScaledForm<'_> {
    fn covector(&self, x: &Point) -> Result<FourVector, HjError> {
        let w = self.field.value(x)?;
        Ok(gradient(self.field, x)? * self.psi.derivative(w))
    }
}

/// The form `dW` recovered from `V = ψ(W)` alone: `W = ψ⁻¹(V)`, `dW = dV / ψ′(W)`.
pub struct RecoveredForm<'a> {
    pub field: &'a dyn HamiltonJacobiField,
    pub psi: &'a dyn ScalarMap,
    pub bracket: (f64, f64),
}

impl OneForm for RecoveredForm<'_> {
    fn covector(&self, x: &Point) -> Result<FourVector, HjError> {
        let w = self.field.value(x)?;
        let v = self.psi.value(w);
        let dv = gradient(self.field, x)? * self.psi.derivative(w);
        let recovered = invert_monotone(self.psi, v, self.bracket.0, self.bracket.1)
            .ok_or(HjError::DomainBoundary(*x))?;
        Ok(dv * (1.0 / self.psi.derivative(recovered)))
    }
}

/// The non-gradient form `−x² dx¹ + x¹ dx²` (a pure rotation, `H = 0`).
#[derive(Debug, Clone, Copy)]
pub struct CurlForm;

impl OneForm for CurlForm {
    fn covector(&self, x: &Point) -> Result<FourVector, HjError> {
        Ok(FourVector::new(0.0, -x[2], x[1], 0.0))
    }
}

/// Axis-aligned box `lo ≤ x ≤ hi`. Axes with `lo == hi` are held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub lo: Point,
    pub hi: Point,
}

impl Region {
    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    pub fn active_axes(&self) -> Vec<usize> {
        (0..4).filter(|&a| self.hi[a] > self.lo[a]).collect()
    }

    /// Uniform sample with a margin of `margin · width` kept from each face.
    pub fn sample<R: Rng>(&self, rng: &mut R, margin: f64) -> Point {
        std::array::from_fn(|a| {
            let w = self.hi[a] - self.lo[a];
            if w > 0.0 {
                self.lo[a] + w * (margin + (1.0 - 2.0 * margin) * rng.random::<f64>())
            } else {
                self.lo[a]
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactnessConfig {
    pub n_loops: usize,
    /// Trapezoid segments on each side of a loop.
    pub segments_per_side: usize,
    /// Points at which the antisymmetrized Jacobian is sampled.
    pub n_points: usize,
    pub seed: u64,
    pub closedness_tol: f64,
    /// Loop integrals must satisfy `|∮ω| ≤ loop_tol · perimeter`.
    pub loop_tol: f64,
    pub mass_shell_tol: f64,
}

impl Default for ExactnessConfig {
    fn default() -> Self {
        Self {
            n_loops: 20,
            segments_per_side: 2500,
            n_points: 20,
            seed: 7,
            closedness_tol: 1e-6,
            loop_tol: 1e-8,
            mass_shell_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSample {
    pub plane: [usize; 2],
    pub corner: Point,
    pub sides: [f64; 2],
    pub integral: f64,
}

impl LoopSample {
    pub fn area(&self) -> f64 {
        self.sides[0] * self.sides[1]
    }
    pub fn perimeter(&self) -> f64 {
        2.0 * (self.sides[0] + self.sides[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub closedness: f64,
    pub loop_rel: f64,
    pub mass_shell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HJReport {
    pub closedness_residual: f64,
    pub max_loop_integral: f64,
    /// `max |∮ω| / perimeter`
    pub max_loop_ratio: f64,
    pub mass_shell_residual: Option<f64>,
    /// `max(1, max |ω_a|)` over the sampled points; closedness and loop
    /// tolerances are multiplied by it.
    pub form_scale: f64,
    pub tolerances: Tolerances,
    pub loops: Vec<LoopSample>,
    pub verdict: Verdict,
}

impl HJReport {
    fn recompute_verdict(&mut self) {
        let ok = self.closedness_residual <= self.tolerances.closedness * self.form_scale
            && self.max_loop_ratio <= self.tolerances.loop_rel * self.form_scale
            && self.mass_shell_residual.is_none_or(|r| r <= self.tolerances.mass_shell);
        self.verdict = Verdict::from_bool(ok);
    }

    pub fn with_mass_shell(mut self, residual: f64) -> Self {
        self.mass_shell_residual = Some(residual);
        self.recompute_verdict();
        self
    }
}

/// Composite-trapezoid line integral of `ω` along the straight segment `a → b`.
pub fn line_integral(form: &dyn OneForm, a: &Point, b: &Point, segments: usize) -> Result<f64, HjError> {
    let d: [f64; 4] = std::array::from_fn(|i| b[i] - a[i]);
    let at = |tau: f64| -> Result<f64, HjError> {
        let x: Point = std::array::from_fn(|i| a[i] + tau * d[i]);
        let w = form.covector(&x)?;
        Ok((0..4).map(|i| w.0[i] * d[i]).sum())
    };
    let n = segments.max(1);
    let mut sum = 0.5 * (at(0.0)? + at(1.0)?);
    for k in 1..n {
        sum += at(k as f64 / n as f64)?;
    }
    Ok(sum / n as f64)
}

/// Counter-clockwise circulation around the rectangle with lower corner
/// `corner` and side lengths `sides` in the `(plane[0], plane[1])` plane.
pub fn loop_integral(
    form: &dyn OneForm,
    plane: [usize; 2],
    corner: &Point,
    sides: [f64; 2],
    segments_per_side: usize,
) -> Result<f64, HjError> {
    let [i, j] = plane;
    let mut p1 = *corner;
    p1[i] += sides[0];
    let mut p2 = p1;
    p2[j] += sides[1];
    let mut p3 = *corner;
    p3[j] += sides[1];
    let path = [*corner, p1, p2, p3, *corner];
    path.windows(2)
        .map(|w| line_integral(form, &w[0], &w[1], segments_per_side))
        .sum()
}

/// Max-abs antisymmetrized Jacobian `|∂_a ω_b − ∂_b ω_a|` over the active axes.
pub fn closedness_residual(form: &dyn OneForm, x: &Point, axes: &[usize]) -> Result<f64, HjError> {
    let mut jac = [[0.0; 4]; 4];
    for &a in axes {
        let h = 1e-5 * x[a].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[a] += h;
        xm[a] -= h;
        let (wp, wm) = (form.covector(&xp)?, form.covector(&xm)?);
        for b in 0..4 {
            jac[a][b] = (wp.0[b] - wm.0[b]) / (2.0 * h);
        }
    }
    let mut worst: f64 = 0.0;
    for (k, &a) in axes.iter().enumerate() {
        for &b in &axes[k + 1..] {
            worst = worst.max((jac[a][b] - jac[b][a]).abs());
        }
    }
    Ok(worst)
}

/// Tests that `form` is exact on `region`. Failures are reported, not raised;
/// evaluation errors (points outside the form's domain) count as failures.
pub fn is_exact(form: &dyn OneForm, region: &Region, cfg: &ExactnessConfig) -> HJReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let axes = region.active_axes();
    let tolerances = Tolerances {
        closedness: cfg.closedness_tol,
        loop_rel: cfg.loop_tol,
        mass_shell: cfg.mass_shell_tol,
    };

    let mut closed: f64 = 0.0;
    let mut form_scale: f64 = 1.0;
    for _ in 0..cfg.n_points {
        let x = region.sample(&mut rng, 0.05);
        closed = closed.max(closedness_residual(form, &x, &axes).unwrap_or(f64::INFINITY));
        if let Ok(w) = form.covector(&x) {
            form_scale = form_scale.max(w.max_abs());
        }
    }

    let mut loops = Vec::with_capacity(cfg.n_loops);
    if axes.len() >= 2 {
        for _ in 0..cfg.n_loops {
            let i = axes[rng.random_range(0..axes.len())];
            let mut j = axes[rng.random_range(0..axes.len() - 1)];
            if j >= i {
                j = axes[axes.iter().position(|&a| a == j).unwrap() + 1];
            }
            let plane = if i < j { [i, j] } else { [j, i] };
            let mut corner = region.sample(&mut rng, 0.0);
            let mut sides = [0.0; 2];
            for (k, &ax) in plane.iter().enumerate() {
                let w = region.hi[ax] - region.lo[ax];
                let a = region.lo[ax] + w * rng.random::<f64>();
                let b = region.lo[ax] + w * rng.random::<f64>();
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                // keep loops from degenerating to slivers
                let hi = hi.max((lo + 0.1 * w).min(region.hi[ax]));
                let lo = lo.min(hi - 0.1 * w);
                corner[ax] = lo;
                sides[k] = hi - lo;
            }
            let integral = loop_integral(form, plane, &corner, sides, cfg.segments_per_side)
                .unwrap_or(f64::INFINITY);
            loops.push(LoopSample { plane, corner, sides, integral });
        }
    }
    let max_loop_integral = loops.iter().fold(0.0f64, |m, l| m.max(l.integral.abs()));
    let max_loop_ratio = loops
        .iter()
        .fold(0.0f64, |m, l| m.max(l.integral.abs() / l.perimeter()));

    let mut report = HJReport {
        closedness_residual: closed,
        max_loop_integral,
        max_loop_ratio,
        mass_shell_residual: None,
        form_scale,
        tolerances,
        loops,
        verdict: Verdict::Fail,
    };
    report.recompute_verdict();
    report
}

/// `max |H² − |p|² − m₀²|` over the given points.
pub fn mass_shell_check(field: &dyn HamiltonJacobiField, points: &[Point]) -> Result<f64, HjError> {
    let m0 = field.rest_mass().ok_or(HjError::MissingRestMass)?;
    points.iter().try_fold(0.0f64, |worst, x| {
        let g = gradient(field, x)?;
        let (h, p) = energy_momentum(&g);
        let r = h * h - p.iter().map(|c| c * c).sum::<f64>() - m0 * m0;
        Ok(worst.max(r.abs()))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    /// Exactness of `ψ′(W) dW`.
    pub forward: HJReport,
    /// Exactness of the form recovered from `ψ(W)` through `ψ⁻¹`; absent when
    /// `ψ′` changes sign on the range of `W`.
    pub inverse: Option<HJReport>,
    pub non_monotone: bool,
    pub w_range: [f64; 2],
}

impl ScaleReport {
    pub fn passed(&self) -> bool {
        self.forward.verdict.passed() && self.inverse.as_ref().is_none_or(|r| r.verdict.passed())
    }
}

/// Checks that `ψ(W)` is exact whenever `W` is, and conversely via `ψ⁻¹`.
pub fn scale_check(
    field: &dyn HamiltonJacobiField,
    psi: &dyn ScalarMap,
    region: &Region,
    cfg: &ExactnessConfig,
) -> ScaleReport {
    let forward = is_exact(&ScaledForm { field, psi }, region, cfg);

    // range of W over the box: grid over active axes plus the corners
    let axes = region.active_axes();
    let per_axis = 9usize;
    let total = per_axis.pow(axes.len() as u32);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for idx in 0..total {
        let mut x = region.lo;
        let mut rem = idx;
        for &a in &axes {
            let k = rem % per_axis;
            rem /= per_axis;
            x[a] = region.lo[a] + (region.hi[a] - region.lo[a]) * k as f64 / (per_axis - 1) as f64;
        }
        if let Ok(w) = field.value(&x) {
            lo = lo.min(w);
            hi = hi.max(w);
        }
    }
    let span = (hi - lo).max(1e-12);
    let (blo, bhi) = (lo - 0.05 * span, hi + 0.05 * span);

    let samples = 2000;
    let signs: Vec<f64> = (0..=samples)
        .map(|k| psi.derivative(blo + (bhi - blo) * k as f64 / samples as f64))
        .collect();
    let non_monotone = !(signs.iter().all(|&d| d > 0.0) || signs.iter().all(|&d| d < 0.0));

    let inverse = if non_monotone {
        None
    } else {
        Some(is_exact(&RecoveredForm { field, psi, bracket: (blo, bhi) }, region, cfg))
    };
    ScaleReport { forward, inverse, non_monotone, w_range: [lo, hi] }
}

// ---------------------------------------------------------------------------
// Parallel / perpendicular split

/// Unit tangents `dxᵃ/ds` of a family of curves filling a region.
pub trait TangentField: Send + Sync {
    fn tangent(&self, x: &Point) -> Result<FourVector, HjError>;
}

impl TangentField for GeodesicField {
    fn tangent(&self, x: &Point) -> Result<FourVector, HjError> {
        GeodesicField::tangent(self, x)
    }
}

/// `W = W_∥ + c_a xᵃ` with `∇W_∥` parallel to the tangent field.
#[derive(Clone)]
pub struct PerpDecomposition {
    pub parallel: LinearShift,
    /// The constants `c_a` (spin).
    pub spin: FourVector,
    /// `max_i ‖Q_i(∇W − c)‖`, the part of `∇W − c` not along the tangents.
    pub residual: f64,
    pub condition: f64,
}

/// Least-squares fit of constant `c` so that `∇W − c ∥ ũ` at every sample.
pub fn decompose_parallel_perp(
    field: Arc<dyn HamiltonJacobiField>,
    curves: &dyn TangentField,
    samples: &[Point],
) -> Result<PerpDecomposition, HjError> {
    let mut normal = Matrix4::<f64>::zeros();
    let mut rhs = Vector4::<f64>::zeros();
    let mut rows = Vec::with_capacity(samples.len());
    for x in samples {
        let u = curves.tangent(x)?;
        let g = gradient(field.as_ref(), x)?;
        // Q d = d − (d·u) ũ on covectors
        let ul = Vector4::from(u.lower().0);
        let uv = Vector4::from(u.0);
        let q = Matrix4::identity() - ul * uv.transpose();
        let gv = Vector4::from(g.0);
        normal += q.transpose() * q;
        rhs += q.transpose() * q * gv;
        rows.push((q, gv));
    }
    let eig = SymmetricEigen::new(normal);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= 1e12) {
        return Err(HjError::IllConditioned(condition));
    }
    let c = normal
        .try_inverse()
        .ok_or(HjError::IllConditioned(condition))?
        * rhs;
    let spin = FourVector(std::array::from_fn(|a| c[a]));
    let residual = rows
        .iter()
        .fold(0.0f64, |m, (q, g)| m.max((q * (g - c)).norm()));
    Ok(PerpDecomposition {
        parallel: LinearShift { inner: field, c: -spin },
        spin,
        residual,
        condition,
    })
}

// ---------------------------------------------------------------------------
// JSON descriptions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Geodesic,
    Projectile,
    PlaneWave,
    CustomPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeodesicParams {
    m0: f64,
    #[serde(default)]
    base: Point,
    #[serde(default)]
    k: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectileParams {
    #[serde(flatten)]
    projectile: Projectile,
    #[serde(default)]
    s: f64,
    #[serde(default)]
    w0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneWaveParams {
    momentum: [f64; 3],
    energy: Option<f64>,
    #[serde(default)]
    w0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialParams {
    terms: crate::poly::Polynomial,
    m0: Option<f64>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<Arc<dyn HamiltonJacobiField>, HjError> {
        fn parse<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T, HjError> {
            serde_json::from_value(v.clone()).map_err(|e| HjError::InvalidDescription(e.to_string()))
        }
        Ok(match self.kind {
            FieldKind::Geodesic => {
                let p: GeodesicParams = parse(&self.parameters)?;
                Arc::new(GeodesicField { m0: p.m0, base: p.base, k: p.k })
            }
            FieldKind::Projectile => {
                let p: ProjectileParams = parse(&self.parameters)?;
                Arc::new(p.projectile.field_at(p.s).with_offset(p.w0))
            }
            FieldKind::PlaneWave => {
                let p: PlaneWaveParams = parse(&self.parameters)?;
                let mut f = PlaneWaveField::null(p.momentum);
                if let Some(e) = p.energy {
                    f.energy = e;
                }
                f.w0 = p.w0;
                Arc::new(f)
            }
            FieldKind::CustomPolynomial => {
                let p: PolynomialParams = parse(&self.parameters)?;
                Arc::new(PolynomialField { poly: p.terms, m0: p.m0 })
            }
        })
    }
}
