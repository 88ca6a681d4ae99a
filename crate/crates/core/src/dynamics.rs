//! Canonical equations of motion in tetrad form, their integration, and the
//! diagnostics read off a trajectory: four-force norm, the commutator of the
//! slashed momentum with its rate of change, and the Hessian condition on `W`.
//!
//! The canonical equations use the index placement
//! `dxᵃ/ds = η^{ab} ∂H/∂p^b`, `dpᵃ/ds = −η^{ab} ∂H/∂x^b + fᵃ`
//! with `f` an optional external four-force. For `H = ½ η_ab pᵃpᵇ / m₀` this is
//! the familiar `dx/ds = p/m₀`; for Hamiltonians written in spatial components
//! the spatial equations pick up the sign of `η^{kk} = −1`.

use crate::clifford::{commutator, frobenius, Causal, FourVector, GammaRep, C64, ETA, TOL_NULL};
use crate::geometry::{christoffel_at, CoordinateChart, GeometryError, MetricField, Point};
use crate::hamilton_jacobi::{gradient, HamiltonJacobiField};
use nalgebra::{Matrix3, Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("partial derivatives of H are not finite at s = {s}")]
    PartialEvaluationFailure { s: f64 },
    #[error("leapfrog requires a separable Hamiltonian; `{0}` is not")]
    NonSeparable(String),
    #[error("state became non-finite at s = {s}")]
    StepRejected { s: f64 },
    #[error("index {index} has no neighbours on both sides (trajectory length {len})")]
    BoundaryIndex { index: usize, len: usize },
    #[error("step must be positive and finite and s_end beyond the initial s (step {step}, span {span})")]
    InvalidStep { step: f64, span: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Free,
    Projectile,
    Quadratic,
    Custom,
}

/// `H(x, p)` in tetrad coordinates with `p` contravariant.
pub trait HamiltonianModel: Send + Sync {
    fn kind(&self) -> ModelKind;
    fn name(&self) -> String;
    fn value(&self, x: &FourVector, p: &FourVector) -> f64;

    fn grad_x(&self, _x: &FourVector, _p: &FourVector) -> Option<[f64; 4]> {
        None
    }

    fn grad_p(&self, _x: &FourVector, _p: &FourVector) -> Option<[f64; 4]> {
        None
    }

    /// Non-Hamiltonian four-force added to `dp/ds`.
    fn external_force(&self, _x: &FourVector, _p: &FourVector) -> FourVector {
        FourVector::ZERO
    }

    /// `H = T(p) + V(x)` with no external force.
    fn separable(&self) -> bool {
        false
    }
}

fn fd_partials(f: impl Fn(&FourVector) -> f64, at: &FourVector) -> [f64; 4] {
    std::array::from_fn(|a| {
        let h = 1e-6 * at.0[a].abs().max(1.0);
        let mut vp = *at;
        let mut vm = *at;
        vp.0[a] += h;
        vm.0[a] -= h;
        (f(&vp) - f(&vm)) / (2.0 * h)
    })
}

pub fn partials_x(model: &dyn HamiltonianModel, x: &FourVector, p: &FourVector) -> [f64; 4] {
    model
        .grad_x(x, p)
        .unwrap_or_else(|| fd_partials(|y| model.value(y, p), x))
}

pub fn partials_p(model: &dyn HamiltonianModel, x: &FourVector, p: &FourVector) -> [f64; 4] {
    model
        .grad_p(x, p)
        .unwrap_or_else(|| fd_partials(|q| model.value(x, q), p))
}

/// `H = √(m₀² + |p|²)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParticle {
    pub m0: f64,
}

impl HamiltonianModel for FreeParticle {
    fn kind(&self) -> ModelKind {
        ModelKind::Free
    }
    fn name(&self) -> String {
        "free".into()
    }
    fn value(&self, _x: &FourVector, p: &FourVector) -> f64 {
        let [a, b, c] = p.spatial();
        (self.m0 * self.m0 + a * a + b * b + c * c).sqrt()
    }
    fn grad_x(&self, _x: &FourVector, _p: &FourVector) -> Option<[f64; 4]> {
        Some([0.0; 4])
    }
    fn grad_p(&self, x: &FourVector, p: &FourVector) -> Option<[f64; 4]> {
        let h = self.value(x, p);
        Some([0.0, p.0[1] / h, p.0[2] / h, p.0[3] / h])
    }
    fn separable(&self) -> bool {
        true
    }
}

/// `H = η_ab pᵃpᵇ / (2m₀)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub m0: f64,
}

impl Default for Quadratic {
    fn default() -> Self {
        Self { m0: 1.0 }
    }
}

impl HamiltonianModel for Quadratic {
    fn kind(&self) -> ModelKind {
        ModelKind::Quadratic
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
    fn value(&self, _x: &FourVector, p: &FourVector) -> f64 {
        p.norm2() / (2.0 * self.m0)
    }
    fn grad_x(&self, _x: &FourVector, _p: &FourVector) -> Option<[f64; 4]> {
        Some([0.0; 4])
    }
    fn grad_p(&self, _x: &FourVector, p: &FourVector) -> Option<[f64; 4]> {
        Some((p.lower() * (1.0 / self.m0)).0)
    }
    fn separable(&self) -> bool {
        true
    }
}

/// Uniform proper acceleration `g` along `−x²`: the quadratic Hamiltonian
/// driven by the four-force `f = −m₀g (p²/p⁰, 0, 1, 0)`, which is orthogonal
/// to `p` so `H = m₀/2` is conserved and `x²(s) = y₀ + u_y s − ½ g s²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectileModel {
    pub m0: f64,
    pub g: f64,
}

impl HamiltonianModel for ProjectileModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Projectile
    }
    fn name(&self) -> String {
        "projectile".into()
    }
    fn value(&self, x: &FourVector, p: &FourVector) -> f64 {
        Quadratic { m0: self.m0 }.value(x, p)
    }
    fn grad_x(&self, _x: &FourVector, _p: &FourVector) -> Option<[f64; 4]> {
        Some([0.0; 4])
    }
    fn grad_p(&self, x: &FourVector, p: &FourVector) -> Option<[f64; 4]> {
        Quadratic { m0: self.m0 }.grad_p(x, p)
    }
    fn external_force(&self, _x: &FourVector, p: &FourVector) -> FourVector {
        FourVector::new(p.0[2] / p.0[0], 0.0, 1.0, 0.0) * (-self.m0 * self.g)
    }
}

type ScalarFn = Arc<dyn Fn(&FourVector, &FourVector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&FourVector, &FourVector) -> [f64; 4] + Send + Sync>;

/// Hamiltonian given by closures; missing partials fall back to finite differences.
#[derive(Clone)]
pub struct CustomModel {
    pub label: String,
    pub h: ScalarFn,
    pub grad_x: Option<GradFn>,
    pub grad_p: Option<GradFn>,
    pub separable: bool,
}

impl CustomModel {
    pub fn new(label: &str, h: impl Fn(&FourVector, &FourVector) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), h: Arc::new(h), grad_x: None, grad_p: None, separable: false }
    }

    /// `H = ½ (p¹)² + ½ ω² (x¹)²`
    pub fn harmonic(omega: f64) -> Self {
        let mut m = Self::new("harmonic", move |x, p| 0.5 * p.0[1] * p.0[1] + 0.5 * omega * omega * x.0[1] * x.0[1]);
        m.grad_x = Some(Arc::new(move |x, _| [0.0, omega * omega * x.0[1], 0.0, 0.0]));
        m.grad_p = Some(Arc::new(|_, p| [0.0, p.0[1], 0.0, 0.0]));
        m.separable = true;
        m
    }

    /// `H = √(m₀² + |p|²) + m₀ g x²`, gravity as a potential.
    pub fn potential_projectile(m0: f64, g: f64) -> Self {
        let free = FreeParticle { m0 };
        let mut m = Self::new("potential-projectile", move |x, p| free.value(x, p) + m0 * g * x.0[2]);
        m.grad_x = Some(Arc::new(move |_, _| [0.0, 0.0, m0 * g, 0.0]));
        m.grad_p = Some(Arc::new(move |x, p| free.grad_p(x, p).unwrap()));
        m.separable = true;
        m
    }
}

impl HamiltonianModel for CustomModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Custom
    }
    fn name(&self) -> String {
        self.label.clone()
    }
    fn value(&self, x: &FourVector, p: &FourVector) -> f64 {
        (self.h)(x, p)
    }
    fn grad_x(&self, x: &FourVector, p: &FourVector) -> Option<[f64; 4]> {
        self.grad_x.as_ref().map(|f| f(x, p))
    }
    fn grad_p(&self, x: &FourVector, p: &FourVector) -> Option<[f64; 4]> {
        self.grad_p.as_ref().map(|f| f(x, p))
    }
    fn separable(&self) -> bool {
        self.separable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub s: f64,
    pub x: FourVector,
    pub p: FourVector,
}

impl PhaseState {
    pub fn new(s: f64, x: FourVector, p: FourVector) -> Self {
        Self { s, x, p }
    }
    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.x.is_finite() && self.p.is_finite()
    }
}

fn raise_eta(v: [f64; 4]) -> FourVector {
    FourVector(std::array::from_fn(|a| ETA[a] * v[a]))
}

/// `(dx/ds, dp/ds)` from the canonical equations.
pub fn hamilton_rhs(model: &dyn HamiltonianModel, state: &PhaseState) -> Result<(FourVector, FourVector), DynamicsError> {
    let dx = raise_eta(partials_p(model, &state.x, &state.p));
    let dp = -raise_eta(partials_x(model, &state.x, &state.p)) + model.external_force(&state.x, &state.p);
    if !(dx.is_finite() && dp.is_finite()) {
        return Err(DynamicsError::PartialEvaluationFailure { s: state.s });
    }
    Ok((dx, dp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Leapfrog,
}

/// Samples with per-sample diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub model: String,
    pub samples: Vec<PhaseState>,
    pub h: Vec<f64>,
    pub pdot: Vec<FourVector>,
    pub dm_ds: Vec<f64>,
    pub comm_norm: Vec<f64>,
    /// `max |H(s) − H(s₀)|`
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn step_count(span: f64, step: f64) -> Result<usize, DynamicsError> {
    if !(step > 0.0 && step.is_finite() && span > 0.0 && span.is_finite()) {
        return Err(DynamicsError::InvalidStep { step, span });
    }
    Ok(((span / step) - 1e-9).ceil().max(1.0) as usize)
}

fn advance(a: &PhaseState, d: &(FourVector, FourVector), h: f64) -> PhaseState {
    PhaseState::new(a.s + h, a.x + d.0 * h, a.p + d.1 * h)
}

fn rk4_step(model: &dyn HamiltonianModel, st: &PhaseState, h: f64) -> Result<PhaseState, DynamicsError> {
    let k1 = hamilton_rhs(model, st)?;
    let k2 = hamilton_rhs(model, &advance(st, &k1, h / 2.0))?;
    let k3 = hamilton_rhs(model, &advance(st, &k2, h / 2.0))?;
    let k4 = hamilton_rhs(model, &advance(st, &k3, h))?;
    let dx = (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
    let dp = (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
    Ok(PhaseState::new(st.s + h, st.x + dx, st.p + dp))
}

fn leapfrog_step(model: &dyn HamiltonianModel, st: &PhaseState, h: f64) -> Result<PhaseState, DynamicsError> {
    let kick = |x: &FourVector, p: &FourVector| -raise_eta(partials_x(model, x, p));
    let drift = |x: &FourVector, p: &FourVector| raise_eta(partials_p(model, x, p));
    let p_half = st.p + kick(&st.x, &st.p) * (h / 2.0);
    let x1 = st.x + drift(&st.x, &p_half) * h;
    let p1 = p_half + kick(&x1, &p_half) * (h / 2.0);
    Ok(PhaseState::new(st.s + h, x1, p1))
}

/// Fixed-step integration from `initial.s` to `s_end`; the final step is
/// shortened to land on `s_end`.
pub fn integrate(
    model: &dyn HamiltonianModel,
    initial: PhaseState,
    s_end: f64,
    step: f64,
    method: Method,
) -> Result<Trajectory, DynamicsError> {
    if method == Method::Leapfrog && !model.separable() {
        return Err(DynamicsError::NonSeparable(model.name()));
    }
    let n = step_count(s_end - initial.s, step)?;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(initial);
    let mut st = initial;
    for k in 0..n {
        let h = if k + 1 == n { s_end - st.s } else { step };
        st = match method {
            Method::Rk4 => rk4_step(model, &st, h)?,
            Method::Leapfrog => leapfrog_step(model, &st, h)?,
        };
        if !st.is_finite() {
            return Err(DynamicsError::StepRejected { s: st.s });
        }
        samples.push(st);
    }
    let rep = GammaRep::default();
    let mut h = Vec::with_capacity(samples.len());
    let mut pdot = Vec::with_capacity(samples.len());
    let mut dm_ds = Vec::with_capacity(samples.len());
    let mut comm = Vec::with_capacity(samples.len());
    for s in &samples {
        let (_, dp) = hamilton_rhs(model, s)?;
        h.push(model.value(&s.x, &s.p));
        dm_ds.push(dp.norm2().abs().sqrt());
        comm.push(operator_commutator(&rep, &s.p, &dp, C64::new(1.0, 0.0), C64::new(1.0, 0.0)));
        pdot.push(dp);
    }
    let energy_drift = h.iter().fold(0.0f64, |m, v| m.max((v - h[0]).abs()));
    Ok(Trajectory { model: model.name(), samples, h, pdot, dm_ds, comm_norm: comm, energy_drift })
}

// ---------------------------------------------------------------------------
// Covariant form

type PotentialFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// `K = ½ g_{μν} p^μ p^ν / m₀ + V(x)` in a chart.
#[derive(Clone)]
pub struct CovariantModel {
    pub m0: f64,
    pub potential: Option<PotentialFn>,
}

impl CovariantModel {
    pub fn free(m0: f64) -> Self {
        Self { m0, potential: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariantTrajectory {
    pub chart: String,
    /// States in chart coordinates.
    pub samples: Vec<PhaseState>,
    pub cartesian: Vec<Point>,
    /// `½ g_{μν} p^μ p^ν` along the flow.
    pub k: Vec<f64>,
    pub k_drift: f64,
}

fn covariant_rhs(
    metric: &dyn MetricField,
    chart: &dyn CoordinateChart,
    model: &CovariantModel,
    st: &PhaseState,
) -> Result<(FourVector, FourVector), DynamicsError> {
    let y = st.x.0;
    if !chart.in_domain(&y) {
        return Err(GeometryError::ChartBoundary { chart: chart.name().into(), point: y }.into());
    }
    let gamma = christoffel_at(metric, &y)?;
    let u = st.p * (1.0 / model.m0);
    let mut dp = FourVector(gamma.contract(&u.0, &st.p.0)) * -1.0;
    if let Some(v) = &model.potential {
        let ginv = metric
            .g(&y)
            .try_inverse()
            .ok_or(GeometryError::SingularMetric { point: y, condition: f64::INFINITY })?;
        let dv = Vector4::from(fd_partials(|q| v(&q.0), &st.x));
        let raised = ginv * dv;
        dp = dp - FourVector(std::array::from_fn(|a| raised[a]));
    }
    Ok((u, dp))
}

/// `dx^μ/ds = p^μ/m₀`, `dp^μ/ds = −Γ^μ_{νλ} ẋ^ν p^λ − g^{μν} ∂_ν V`, by RK4.
pub fn covariant_integrate(
    metric: &dyn MetricField,
    chart: &dyn CoordinateChart,
    model: &CovariantModel,
    initial: PhaseState,
    s_end: f64,
    step: f64,
) -> Result<CovariantTrajectory, DynamicsError> {
    let n = step_count(s_end - initial.s, step)?;
    let mut samples = vec![initial];
    let mut st = initial;
    for k in 0..n {
        let h = if k + 1 == n { s_end - st.s } else { step };
        let k1 = covariant_rhs(metric, chart, model, &st)?;
        let k2 = covariant_rhs(metric, chart, model, &advance(&st, &k1, h / 2.0))?;
        let k3 = covariant_rhs(metric, chart, model, &advance(&st, &k2, h / 2.0))?;
        let k4 = covariant_rhs(metric, chart, model, &advance(&st, &k3, h))?;
        st = PhaseState::new(
            st.s + h,
            st.x + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
            st.p + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
        );
        if !st.is_finite() {
            return Err(DynamicsError::StepRejected { s: st.s });
        }
        if !chart.in_domain(&st.x.0) {
            return Err(GeometryError::ChartBoundary { chart: chart.name().into(), point: st.x.0 }.into());
        }
        samples.push(st);
    }
    let cartesian = samples.iter().map(|s| chart.to_cartesian(&s.x.0)).collect();
    let k: Vec<f64> = samples
        .iter()
        .map(|s| {
            let p = Vector4::from(s.p.0);
            0.5 * (p.transpose() * metric.g(&s.x.0) * p)[(0, 0)]
        })
        .collect();
    let k_drift = k.iter().fold(0.0f64, |m, v| m.max((v - k[0]).abs()));
    Ok(CovariantTrajectory { chart: chart.name().into(), samples, cartesian, k, k_drift })
}

/// Max Euclidean distance of `points` from the line `origin + λ·direction`.
pub fn straightness_residual(points: &[Point], origin: &Point, direction: &[f64; 4]) -> f64 {
    let dn = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    let d: [f64; 4] = std::array::from_fn(|a| direction[a] / dn);
    points.iter().fold(0.0f64, |m, x| {
        let r: [f64; 4] = std::array::from_fn(|a| x[a] - origin[a]);
        let along: f64 = (0..4).map(|a| r[a] * d[a]).sum();
        let perp: f64 = (0..4).map(|a| (r[a] - along * d[a]).powi(2)).sum::<f64>().sqrt();
        m.max(perp)
    })
}

// ---------------------------------------------------------------------------
// Diagnostics

/// `‖[ψ′(W) p̸, ψ′(H) ṗ̸]‖_F`
pub fn operator_commutator(rep: &GammaRep, p: &FourVector, pdot: &FourVector, psi_w_prime: C64, psi_h_prime: C64) -> f64 {
    (psi_w_prime * psi_h_prime).norm() * frobenius(&commutator(&rep.slash(p).matrix, &rep.slash(pdot).matrix))
}

/// The commutator divided by `4‖p‖‖ṗ‖` (Euclidean norms), i.e. the sine of
/// the Euclidean angle between `p` and `ṗ`. Zero when either vanishes.
pub fn normalized_commutator(rep: &GammaRep, p: &FourVector, pdot: &FourVector) -> f64 {
    let scale = 4.0 * p.euclid_norm() * pdot.euclid_norm();
    if scale == 0.0 {
        return 0.0;
    }
    operator_commutator(rep, p, pdot, C64::new(1.0, 0.0), C64::new(1.0, 0.0)) / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceDiagnostic {
    pub f: FourVector,
    /// `√|f·f|`
    pub dm_ds: f64,
    pub classification: Causal,
}

impl ForceDiagnostic {
    pub fn from_force(f: FourVector) -> Self {
        let n2 = f.norm2();
        let tol = TOL_NULL * f.euclid_norm().powi(2).max(1.0);
        let classification = Causal::of_norm2(n2, tol);
        let dm_ds = if classification == Causal::Null { 0.0 } else { n2.abs().sqrt() };
        Self { f, dm_ds, classification }
    }
}

/// Four-force from central differences of `p` at an interior sample.
pub fn force_diagnostic(traj: &Trajectory, index: usize) -> Result<ForceDiagnostic, DynamicsError> {
    let len = traj.samples.len();
    if index == 0 || index + 1 >= len {
        return Err(DynamicsError::BoundaryIndex { index, len });
    }
    let (a, b) = (&traj.samples[index - 1], &traj.samples[index + 1]);
    let f = (b.p - a.p) * (1.0 / (b.s - a.s));
    Ok(ForceDiagnostic::from_force(f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianCheck {
    pub det: f64,
    /// `max |∂_i∂_j W|`
    pub scale: f64,
    pub ok: bool,
}

/// Determinant of the spatial Hessian of `W`; `ok` when `|det| > 1e−10·scale³`.
pub fn hessian_det_check(hj: &dyn HamiltonJacobiField, x: &Point) -> HessianCheck {
    let mut hess = Matrix3::<f64>::zeros();
    let analytic = hj.analytic_gradient(x).is_some();
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = (i + 1, j + 1);
            hess[(i, j)] = if analytic {
                let h = 1e-5 * x[b].abs().max(1.0);
                let mut xp = *x;
                let mut xm = *x;
                xp[b] += h;
                xm[b] -= h;
                match (gradient(hj, &xp), gradient(hj, &xm)) {
                    (Ok(gp), Ok(gm)) => (gp.0[a] - gm.0[a]) / (2.0 * h),
                    _ => f64::NAN,
                }
            } else {
                second_difference(hj, x, a, b)
            };
        }
    }
    let hess = 0.5 * (hess + hess.transpose());
    let det = hess.determinant();
    let scale = hess.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    HessianCheck { det, scale, ok: det.is_finite() && det.abs() > 1e-10 * scale.powi(3) }
}

fn second_difference(hj: &dyn HamiltonJacobiField, x: &Point, a: usize, b: usize) -> f64 {
    let ha = 1e-4 * x[a].abs().max(1.0);
    let hb = 1e-4 * x[b].abs().max(1.0);
    let at = |da: f64, db: f64| {
        let mut y = *x;
        y[a] += da;
        y[b] += db;
        hj.value(&y).unwrap_or(f64::NAN)
    };
    if a == b {
        (at(ha, 0.0) - 2.0 * at(0.0, 0.0) + at(-ha, 0.0)) / (ha * ha)
    } else {
        (at(ha, hb) - at(ha, -hb) - at(-ha, hb) + at(-ha, -hb)) / (4.0 * ha * hb)
    }
}

/// Euclidean distance between two state sequences of equal length.
pub fn max_state_difference(a: &[PhaseState], b: &[PhaseState]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (u, v)| m.max((u.x - v.x).max_abs()).max((u.p - v.p).max_abs()))
}

/// `η^{ab}` as a matrix, for callers comparing conventions.
pub fn eta_inverse() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::from(ETA))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{IdentityChart, Minkowski, PolarChart, PolarMetric};
    use crate::hamilton_jacobi::{construct_geodesic_w, projectile_field, GeodesicField, PlaneWaveField, PolynomialField};
    use crate::poly::{Polynomial, Term};

    fn fv(a: f64, b: f64, c: f64, d: f64) -> FourVector {
        FourVector::new(a, b, c, d)
    }

    #[test]
    fn rhs_examples() {
        let st = PhaseState::new(0.0, fv(0.3, 1.0, -2.0, 0.5), fv(2f64.sqrt(), 1.0, 0.0, 0.0));
        let (_, dp) = hamilton_rhs(&FreeParticle { m0: 1.0 }, &st).unwrap();
        assert_eq!(dp, FourVector::ZERO);

        let m0 = 1.5;
        let g = 0.8;
        let (_, dp) = hamilton_rhs(&CustomModel::potential_projectile(m0, g), &st).unwrap();
        // −η^{22}·m₀g
        assert!((dp.0[2] - m0 * g).abs() < 1e-15);
        assert!((dp.lower().0[2] + m0 * g).abs() < 1e-15);

        let p = fv(1.2, 0.3, -0.4, 0.1);
        let st = PhaseState::new(0.0, fv(0.0, 0.0, 0.0, 0.0), p);
        let (dx, dp) = hamilton_rhs(&Quadratic::default(), &st).unwrap();
        assert!((dx - p).max_abs() < 1e-15);
        assert_eq!(dp, FourVector::ZERO);
    }

    #[test]
    fn fd_fallback_matches_analytic() {
        let q = Quadratic { m0: 2.0 };
        let mut c = CustomModel::new("quad-fd", move |x, p| q.value(x, p));
        c.separable = true;
        let st = PhaseState::new(0.0, fv(0.1, 0.2, 0.3, 0.4), fv(2.0, 0.5, -0.7, 0.2));
        let (a, b) = hamilton_rhs(&q, &st).unwrap();
        let (c1, d1) = hamilton_rhs(&c, &st).unwrap();
        assert!((a - c1).max_abs() < 1e-9 && (b - d1).max_abs() < 1e-9);
    }

    #[test]
    fn free_particle_exact() {
        let m = Quadratic { m0: 1.0 };
        let p = fv(2f64.sqrt(), 1.0, 0.0, 0.0);
        let t = integrate(&m, PhaseState::new(0.0, FourVector::ZERO, p), 3.0, 1e-2, Method::Rk4).unwrap();
        for st in &t.samples {
            assert!((st.p - p).max_abs() < 1e-12);
            assert!((st.x - p * st.s).max_abs() < 1e-12);
        }
        assert!(t.comm_norm.iter().all(|&c| c == 0.0));
        assert_eq!(t.samples.len(), 301);
        assert!((t.samples.last().unwrap().s - 3.0).abs() < 1e-12);
    }

    fn projectile_run(step: f64) -> (Trajectory, crate::hamilton_jacobi::Projectile) {
        let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
        let init = PhaseState::new(0.0, FourVector(proj.position(0.0)), proj.momentum(0.0));
        let t = integrate(&ProjectileModel { m0: 1.0, g: 1.0 }, init, 2.0, step, Method::Rk4).unwrap();
        (t, proj)
    }

    fn position_error(t: &Trajectory, proj: &crate::hamilton_jacobi::Projectile) -> f64 {
        t.samples
            .iter()
            .fold(0.0f64, |m, st| m.max((st.x - FourVector(proj.position(st.s))).max_abs()))
    }

    #[test]
    fn projectile_matches_closed_form() {
        let (t, proj) = projectile_run(1e-3);
        let dy = t.samples.iter().fold(0.0f64, |m, st| m.max((st.x.0[2] - proj.position(st.s)[2]).abs()));
        assert!(dy < 1e-9);
        assert!(position_error(&t, &proj) < 1e-9);
        assert!(t.energy_drift < 1e-8);
    }

    #[test]
    fn projectile_rk4_fourth_order() {
        let (a, proj) = projectile_run(0.1);
        let (b, _) = projectile_run(0.05);
        let ratio = position_error(&a, &proj) / position_error(&b, &proj);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn harmonic_energy() {
        let m = CustomModel::harmonic(1.0);
        let init = PhaseState::new(0.0, fv(0.0, 1.0, 0.0, 0.0), fv(0.0, 0.0, 0.0, 0.0));
        let t = integrate(&m, init, 10.0, 1e-3, Method::Rk4).unwrap();
        assert!(t.energy_drift < 1e-8);
        // circular orbit: x¹ = cos s
        let last = t.samples.last().unwrap();
        assert!((last.x.0[1] - 10f64.cos()).abs() < 1e-9);
        let lf = integrate(&m, init, 100.0, 1e-2, Method::Leapfrog).unwrap();
        assert!(lf.energy_drift < 1e-4);
    }

    #[test]
    fn leapfrog_needs_separable() {
        let init = PhaseState::new(0.0, FourVector::ZERO, fv(1.0, 0.0, 0.0, 0.0));
        let r = integrate(&ProjectileModel { m0: 1.0, g: 1.0 }, init, 1.0, 0.1, Method::Leapfrog);
        assert!(matches!(r, Err(DynamicsError::NonSeparable(_))));
        assert!(matches!(
            integrate(&Quadratic::default(), init, 1.0, -0.1, Method::Rk4),
            Err(DynamicsError::InvalidStep { .. })
        ));
    }

    #[test]
    fn blowup_is_rejected() {
        let mut m = CustomModel::new("blowup", |x, p| 0.5 * p.0[1] * p.0[1] - x.0[1].powi(4));
        m.grad_x = Some(Arc::new(|x, _| [0.0, -4.0 * x.0[1].powi(3), 0.0, 0.0]));
        let init = PhaseState::new(0.0, fv(0.0, 10.0, 0.0, 0.0), FourVector::ZERO);
        let r = integrate(&m, init, 100.0, 0.5, Method::Rk4);
        assert!(matches!(r, Err(DynamicsError::StepRejected { .. }) | Err(DynamicsError::PartialEvaluationFailure { .. })));
    }

    #[test]
    fn covariant_minkowski_matches_tetrad() {
        let p = fv(1.25, 0.5, -0.5, 0.5);
        let init = PhaseState::new(0.0, fv(0.0, 0.1, 0.2, 0.3), p);
        let a = integrate(&Quadratic { m0: 1.0 }, init, 1.0, 1e-2, Method::Rk4).unwrap();
        let b = covariant_integrate(&Minkowski, &IdentityChart, &CovariantModel::free(1.0), init, 1.0, 1e-2).unwrap();
        assert!(max_state_difference(&a.samples, &b.samples) < 1e-10);
    }

    #[test]
    fn covariant_polar_is_straight() {
        let v: f64 = 0.5;
        let gamma = 1.0 / (1.0 - v * v).sqrt();
        let y0 = [0.0, 1.0, 0.0, 0.0];
        let p0 = fv(gamma, 0.0, gamma * v, 0.0);
        let init = PhaseState::new(0.0, FourVector(y0), p0);
        let chart: &dyn CoordinateChart = &PolarChart;
        let t = covariant_integrate(&PolarMetric, chart, &CovariantModel::free(1.0), init, 1.0, 1e-3).unwrap();
        let dir = chart.vector_to_cartesian(&y0, &p0.0).unwrap();
        let dev = straightness_residual(&t.cartesian, &chart.to_cartesian(&y0), &dir);
        assert!(dev < 1e-6, "{dev}");
        assert!(t.k_drift < 1e-8);
    }

    #[test]
    fn covariant_chart_boundary() {
        // aimed through the axis r = 0
        let init = PhaseState::new(0.0, fv(0.0, 1.0, 0.0, 0.0), fv(2.0, -3f64.sqrt(), 0.0, 0.0));
        let r = covariant_integrate(&PolarMetric, &PolarChart, &CovariantModel::free(1.0), init, 3.0, 1e-2);
        assert!(matches!(r, Err(DynamicsError::Geometry(GeometryError::ChartBoundary { .. }))));
    }

    #[test]
    fn commutator_examples() {
        let rep = GammaRep::default();
        let one = C64::new(1.0, 0.0);
        let p = fv(2.0, 1.0, 0.5, 0.0);
        assert_eq!(operator_commutator(&rep, &p, &FourVector::ZERO, one, one), 0.0);
        assert!(operator_commutator(&rep, &p, &(p * 0.37), one, one) < 1e-12);
        let (t, _) = projectile_run(1e-2);
        let i = 100;
        assert!((t.samples[i].s - 1.0).abs() < 1e-9);
        assert!(t.comm_norm[i] > 0.1);
        // explicit 4‖p∧ṗ‖ for the projectile at s = 1
        let (p, q) = (t.samples[i].p, t.pdot[i]);
        let mut wedge = 0.0;
        for a in 0..4 {
            for b in a + 1..4 {
                wedge += (p.0[a] * q.0[b] - p.0[b] * q.0[a]).powi(2);
            }
        }
        assert!((t.comm_norm[i] - 4.0 * wedge.sqrt()).abs() < 1e-10);
        let scaled = operator_commutator(&rep, &p, &q, C64::new(0.0, 2.0), C64::new(3.0, 0.0));
        assert!((scaled - 6.0 * t.comm_norm[i]).abs() < 1e-10);
    }

    #[test]
    fn force_examples() {
        let m = Quadratic { m0: 1.0 };
        let t = integrate(&m, PhaseState::new(0.0, FourVector::ZERO, fv(1.0, 0.0, 0.0, 0.0)), 1.0, 0.1, Method::Rk4).unwrap();
        let d = force_diagnostic(&t, 3).unwrap();
        assert_eq!(d.dm_ds, 0.0);
        assert_eq!(d.classification, Causal::Null);
        assert!(matches!(force_diagnostic(&t, 0), Err(DynamicsError::BoundaryIndex { .. })));

        let (t, _) = projectile_run(1e-3);
        let d = force_diagnostic(&t, 1000).unwrap();
        let p = t.samples[1000].p;
        let expected = fv(-p.0[2] / p.0[0], 0.0, -1.0, 0.0);
        assert!((d.f - expected).max_abs() < 1e-6);
        assert_eq!(d.classification, Causal::Spacelike);

        let d = ForceDiagnostic::from_force(fv(0.7, 0.0, 0.0, 0.0));
        assert!((d.dm_ds - 0.7).abs() < 1e-15);
        assert_eq!(d.classification, Causal::Timelike);
    }

    #[test]
    fn hessian_examples() {
        // W = −m₀ s: ∂_i∂_j W = m₀(δ_ij/s + x_i x_j/s³)
        let w = GeodesicField { m0: -1.0, ..construct_geodesic_w(1.0, [0.0; 4]) };
        let x = [3.0, 0.5, -0.4, 0.9];
        let s = (9.0f64 - 0.25 - 0.16 - 0.81).sqrt();
        let xs = [0.5, -0.4, 0.9];
        let exact = Matrix3::from_fn(|i, j| (if i == j { 1.0 / s } else { 0.0 }) + xs[i] * xs[j] / s.powi(3));
        let r = hessian_det_check(&w, &x);
        assert!(r.ok);
        assert!((r.det - exact.determinant()).abs() < 1e-6 * exact.determinant().abs());

        let plane = PlaneWaveField { momentum: [0.3, 0.2, 0.1], energy: 1.0, w0: 0.0 };
        let r = hessian_det_check(&plane, &x);
        assert!(!r.ok);
        assert_eq!(r.det, 0.0);

        let half_sq = PolynomialField {
            poly: Polynomial {
                terms: (1..4)
                    .map(|a| {
                        let mut powers = [0; 4];
                        powers[a] = 2;
                        Term { coef: 0.5, powers }
                    })
                    .collect(),
            },
            m0: None,
        };
        let r = hessian_det_check(&half_sq, &x);
        assert!((r.det - 1.0).abs() < 1e-8 && r.ok);
        // value-only path
        let f = crate::hamilton_jacobi::FnField { f: |x: &Point| Ok(0.5 * (x[1] * x[1] + x[2] * x[2] + x[3] * x[3])), m0: None };
        let r = hessian_det_check(&f, &x);
        assert!((r.det - 1.0).abs() < 1e-5 && r.ok);
    }
}
