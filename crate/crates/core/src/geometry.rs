//! Metric fields, local tetrads, Christoffel symbols and covariant gamma matrices.
//!
//! Points are plain `[f64; 4]` arrays in whatever chart the metric is written
//! in. Tetrad matrices are stored as `e[(a, μ)] = e_a^μ`.

use crate::clifford::{anticommutator, max_abs, GammaRep, Mat4, C64, ETA};
use crate::poly::Polynomial;
use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

pub type Point = [f64; 4];

/// Largest tolerated condition number of `g(x)`.
pub const MAX_CONDITION: f64 = 1e12;
/// Tolerance for the tetrad orthonormality residual.
pub const TETRAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("metric at {point:?} does not have signature (+,-,-,-) (eigenvalues {eigenvalues:?})")]
    BadSignature { point: Point, eigenvalues: [f64; 4] },
    #[error("metric at {point:?} is singular (condition number {condition:e})")]
    SingularMetric { point: Point, condition: f64 },
    #[error("chart jacobian at {point:?} is singular")]
    SingularJacobian { point: Point },
    #[error("point {point:?} lies outside the domain of chart `{chart}`")]
    ChartBoundary { chart: String, point: Point },
    #[error("invalid geometry description: {0}")]
    InvalidDescription(String),
}

/// A symmetric rank-2 metric `g_{μν}(x)`.
pub trait MetricField: Send + Sync {
    fn name(&self) -> &str;

    fn g(&self, x: &Point) -> Matrix4<f64>;

    /// Analytic `∂g/∂x^λ` for `λ = 0..3`, if the metric knows them.
    fn partials(&self, _x: &Point) -> Option<[Matrix4<f64>; 4]> {
        None
    }
}

#[derive(Debug, Clone, Default)]
pub struct Minkowski;

impl MetricField for Minkowski {
    fn name(&self) -> &str {
        "minkowski"
    }
    fn g(&self, _x: &Point) -> Matrix4<f64> {
        eta_matrix()
    }
    fn partials(&self, _x: &Point) -> Option<[Matrix4<f64>; 4]> {
        Some([Matrix4::zeros(); 4])
    }
}

/// Constant diagonal metric.
#[derive(Debug, Clone)]
pub struct DiagonalMetric {
    pub diag: [f64; 4],
}

impl MetricField for DiagonalMetric {
    fn name(&self) -> &str {
        "diagonal"
    }
    fn g(&self, _x: &Point) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::from(self.diag))
    }
    fn partials(&self, _x: &Point) -> Option<[Matrix4<f64>; 4]> {
        Some([Matrix4::zeros(); 4])
    }
}

/// Flat spacetime in cylindrical coordinates `(t, r, θ, z)`:
/// `g = diag(1, −1, −r², −1)`.
#[derive(Debug, Clone, Default)]
pub struct PolarMetric;

impl MetricField for PolarMetric {
    fn name(&self) -> &str {
        "polar"
    }
    fn g(&self, x: &Point) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -x[1] * x[1], -1.0))
    }
    fn partials(&self, x: &Point) -> Option<[Matrix4<f64>; 4]> {
        let mut d = [Matrix4::zeros(); 4];
        d[1][(2, 2)] = -2.0 * x[1];
        Some(d)
    }
}

/// Each component a polynomial in the coordinates. Only `μ ≤ ν` entries are
/// read; the lower triangle mirrors them.
#[derive(Debug, Clone)]
pub struct PolynomialMetric {
    pub components: [[Polynomial; 4]; 4],
}

impl PolynomialMetric {
    fn entry(&self, mu: usize, nu: usize) -> &Polynomial {
        &self.components[mu.min(nu)][mu.max(nu)]
    }
}

impl MetricField for PolynomialMetric {
    fn name(&self) -> &str {
        "custom-polynomial"
    }
    fn g(&self, x: &Point) -> Matrix4<f64> {
        Matrix4::from_fn(|mu, nu| self.entry(mu, nu).eval(x))
    }
    fn partials(&self, x: &Point) -> Option<[Matrix4<f64>; 4]> {
        Some(std::array::from_fn(|l| {
            Matrix4::from_fn(|mu, nu| self.entry(mu, nu).derivative(l).eval(x))
        }))
    }
}

pub fn eta_matrix() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::from(ETA))
}

/// Orthonormal frame at a point: rows are the tetrad legs `e_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TetradFrame {
    pub e: Matrix4<f64>,
}

impl TetradFrame {
    /// Max-abs entry of `g_{μν} e_a^μ e_b^ν − η_ab`.
    pub fn residual(&self, g: &Matrix4<f64>) -> f64 {
        (self.e * g * self.e.transpose() - eta_matrix()).abs().max()
    }
}

/// Sorted eigenvalues of a symmetric matrix.
fn sym_eigenvalues(g: &Matrix4<f64>) -> [f64; 4] {
    let eig = SymmetricEigen::new(*g);
    let mut v: [f64; 4] = std::array::from_fn(|i| eig.eigenvalues[i]);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_signature(g: &Matrix4<f64>, x: &Point) -> Result<(), GeometryError> {
    let ev = sym_eigenvalues(g);
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let positive = ev.iter().filter(|&&v| v > tiny).count();
    let negative = ev.iter().filter(|&&v| v < -tiny).count();
    if positive == 1 && negative == 3 {
        Ok(())
    } else {
        Err(GeometryError::BadSignature { point: *x, eigenvalues: ev })
    }
}

fn check_condition(g: &Matrix4<f64>, x: &Point) -> Result<(), GeometryError> {
    let ev = sym_eigenvalues(g);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition = if min == 0.0 { f64::INFINITY } else { max / min };
    if condition > MAX_CONDITION || !condition.is_finite() {
        return Err(GeometryError::SingularMetric { point: *x, condition });
    }
    Ok(())
}

/// Signature-aware Gram–Schmidt on the coordinate basis, timelike leg first.
pub fn tetrad_at(metric: &dyn MetricField, x: &Point) -> Result<TetradFrame, GeometryError> {
    let g = metric.g(x);
    check_signature(&g, x)?;
    let inner = |u: &Vector4<f64>, v: &Vector4<f64>| (u.transpose() * g * v)[(0, 0)];

    let mut candidates: Vec<Vector4<f64>> = (0..4)
        .map(|i| {
            let mut v = Vector4::zeros();
            v[i] = 1.0;
            v
        })
        .collect();

    // Timelike leg: ∂₀ if it is timelike, otherwise the positive eigendirection of g.
    let e0 = if g[(0, 0)] > 0.0 {
        candidates[0]
    } else {
        let eig = SymmetricEigen::new(g);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("four eigenvalues");
        eig.eigenvectors.column(idx).into_owned()
    };
    let mut legs: Vec<Vector4<f64>> = vec![e0 / inner(&e0, &e0).sqrt()];
    if g[(0, 0)] <= 0.0 {
        // ∂₀ is reconsidered last among the spatial candidates
        let t = candidates.remove(0);
        candidates.push(t);
    } else {
        candidates.remove(0);
    }

    for cand in candidates {
        if legs.len() == 4 {
            break;
        }
        let mut v = cand;
        for (a, leg) in legs.iter().enumerate() {
            // project with the η_aa-signed inner product
            v -= leg * (ETA[a] * inner(leg, &cand));
        }
        let n2 = inner(&v, &v);
        if n2 < -1e-12 {
            legs.push(v / (-n2).sqrt());
        }
    }
    if legs.len() != 4 {
        return Err(GeometryError::BadSignature { point: *x, eigenvalues: sym_eigenvalues(&g) });
    }
    let e = Matrix4::from_fn(|a, mu| legs[a][mu]);
    Ok(TetradFrame { e })
}

/// How metric derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Analytic partials when the metric supplies them, else finite differences.
    Auto,
    FiniteDifference,
}

/// Central-difference step for metric derivatives along axis `λ`.
pub fn metric_fd_step(x: &Point, axis: usize) -> f64 {
    1e-5 * x[axis].abs().max(1.0)
}

pub fn metric_partials(metric: &dyn MetricField, x: &Point, mode: DerivativeMode) -> [Matrix4<f64>; 4] {
    if mode == DerivativeMode::Auto {
        if let Some(p) = metric.partials(x) {
            return p;
        }
    }
    std::array::from_fn(|l| {
        let h = metric_fd_step(x, l);
        let mut xp = *x;
        let mut xm = *x;
        xp[l] += h;
        xm[l] -= h;
        (metric.g(&xp) - metric.g(&xm)) / (2.0 * h)
    })
}

/// `Γ^μ_{νλ}` sampled at one point, stored as `gamma[μ][ν][λ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelField {
    pub gamma: [[[f64; 4]; 4]; 4],
}

impl ChristoffelField {
    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &ChristoffelField) -> f64 {
        let mut m: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                for l in 0..4 {
                    m = m.max((self.gamma[mu][nu][l] - other.gamma[mu][nu][l]).abs());
                }
            }
        }
        m
    }

    /// `Γ^μ_{νλ} uᵛ pˡ`
    pub fn contract(&self, u: &[f64; 4], p: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|mu| {
            let mut s = 0.0;
            for nu in 0..4 {
                for l in 0..4 {
                    s += self.gamma[mu][nu][l] * u[nu] * p[l];
                }
            }
            s
        })
    }
}

pub fn christoffel_at(metric: &dyn MetricField, x: &Point) -> Result<ChristoffelField, GeometryError> {
    christoffel_with(metric, x, DerivativeMode::Auto)
}

/// `Γ^μ_{νλ} = ½ g^{μσ}(∂_ν g_{σλ} + ∂_λ g_{σν} − ∂_σ g_{νλ})`.
pub fn christoffel_with(
    metric: &dyn MetricField,
    x: &Point,
    mode: DerivativeMode,
) -> Result<ChristoffelField, GeometryError> {
    let g = metric.g(x);
    check_condition(&g, x)?;
    let ginv = g
        .try_inverse()
        .ok_or(GeometryError::SingularMetric { point: *x, condition: f64::INFINITY })?;
    let dg = metric_partials(metric, x, mode);
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            for l in nu..4 {
                let mut s = 0.0;
                for sigma in 0..4 {
                    s += ginv[(mu, sigma)]
                        * (dg[nu][(sigma, l)] + dg[l][(sigma, nu)] - dg[sigma][(nu, l)]);
                }
                gamma[mu][nu][l] = 0.5 * s;
                gamma[mu][l][nu] = 0.5 * s;
            }
        }
    }
    Ok(ChristoffelField { gamma })
}

/// Max-abs `∇_λ g_{μν}` using finite-difference partials and the supplied connection.
pub fn metric_compatibility_residual(metric: &dyn MetricField, x: &Point, gamma: &ChristoffelField) -> f64 {
    let g = metric.g(x);
    let dg = metric_partials(metric, x, DerivativeMode::FiniteDifference);
    let mut worst: f64 = 0.0;
    for l in 0..4 {
        for mu in 0..4 {
            for nu in 0..4 {
                let mut r = dg[l][(mu, nu)];
                for s in 0..4 {
                    r -= gamma.gamma[s][l][mu] * g[(s, nu)] + gamma.gamma[s][l][nu] * g[(mu, s)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// A coordinate system related by closed-form maps to the Cartesian tetrad chart.
pub trait CoordinateChart: Send + Sync {
    fn name(&self) -> &str;
    /// Chart point → Cartesian tetrad coordinates.
    fn to_cartesian(&self, y: &Point) -> Point;
    fn from_cartesian(&self, x: &Point) -> Point;
    /// `J[(μ, a)] = ∂y^μ/∂x^a` evaluated at the chart point `y`.
    fn jacobian(&self, y: &Point) -> Matrix4<f64>;
    fn in_domain(&self, _y: &Point) -> bool {
        true
    }
}

impl dyn CoordinateChart + '_ {
    /// Pushes a contravariant vector at `y` to Cartesian components: `vᵃ = ∂xᵃ/∂y^μ v^μ`.
    pub fn vector_to_cartesian(&self, y: &Point, v: &[f64; 4]) -> Result<[f64; 4], GeometryError> {
        let jinv = self
            .jacobian(y)
            .try_inverse()
            .ok_or(GeometryError::SingularJacobian { point: *y })?;
        let out = jinv * Vector4::from(*v);
        Ok(std::array::from_fn(|a| out[a]))
    }

    /// Metric induced on the chart by pulling back `η`.
    pub fn induced_metric(&self, y: &Point) -> Result<Matrix4<f64>, GeometryError> {
        let jinv = self
            .jacobian(y)
            .try_inverse()
            .ok_or(GeometryError::SingularJacobian { point: *y })?;
        Ok(jinv.transpose() * eta_matrix() * jinv)
    }
}

#[derive(Debug, Clone, Default)]
pub struct IdentityChart;

impl CoordinateChart for IdentityChart {
    fn name(&self) -> &str {
        "identity"
    }
    fn to_cartesian(&self, y: &Point) -> Point {
        *y
    }
    fn from_cartesian(&self, x: &Point) -> Point {
        *x
    }
    fn jacobian(&self, _y: &Point) -> Matrix4<f64> {
        Matrix4::identity()
    }
}

/// Cylindrical chart `(t, r, θ, z)` with `x = r cos θ`, `y = r sin θ`.
#[derive(Debug, Clone, Default)]
pub struct PolarChart;

impl CoordinateChart for PolarChart {
    fn name(&self) -> &str {
        "polar"
    }
    fn to_cartesian(&self, y: &Point) -> Point {
        [y[0], y[1] * y[2].cos(), y[1] * y[2].sin(), y[3]]
    }
    fn from_cartesian(&self, x: &Point) -> Point {
        [x[0], x[1].hypot(x[2]), x[2].atan2(x[1]), x[3]]
    }
    fn jacobian(&self, y: &Point) -> Matrix4<f64> {
        let (r, th) = (y[1], y[2]);
        let (s, c) = th.sin_cos();
        let mut j = Matrix4::zeros();
        j[(0, 0)] = 1.0;
        j[(1, 1)] = c;
        j[(1, 2)] = s;
        j[(2, 1)] = -s / r;
        j[(2, 2)] = c / r;
        j[(3, 3)] = 1.0;
        j
    }
    fn in_domain(&self, y: &Point) -> bool {
        y[1] > 0.0 && y.iter().all(|v| v.is_finite())
    }
}

/// `y⁰ = factor · x⁰`, spatial coordinates unchanged.
#[derive(Debug, Clone)]
pub struct TimeScaleChart {
    pub factor: f64,
}

impl CoordinateChart for TimeScaleChart {
    fn name(&self) -> &str {
        "time-scale"
    }
    fn to_cartesian(&self, y: &Point) -> Point {
        [y[0] / self.factor, y[1], y[2], y[3]]
    }
    fn from_cartesian(&self, x: &Point) -> Point {
        [x[0] * self.factor, x[1], x[2], x[3]]
    }
    fn jacobian(&self, _y: &Point) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::new(self.factor, 1.0, 1.0, 1.0))
    }
}

/// `γ̃^μ = (∂y^μ/∂xᵃ) γᵃ` at the chart point `y`.
pub fn covariant_gamma(
    chart: &dyn CoordinateChart,
    rep: &GammaRep,
    y: &Point,
) -> Result<[Mat4; 4], GeometryError> {
    if !chart.in_domain(y) {
        return Err(GeometryError::ChartBoundary { chart: chart.name().to_string(), point: *y });
    }
    let j = chart.jacobian(y);
    if j.determinant().abs() < 1e-12 {
        return Err(GeometryError::SingularJacobian { point: *y });
    }
    Ok(std::array::from_fn(|mu| {
        let mut m = Mat4::zeros();
        for a in 0..4 {
            m += rep.gamma[a] * C64::new(j[(mu, a)], 0.0);
        }
        m
    }))
}

/// Max-abs entry of `{γ̃^μ, γ̃^ν} − 2 g^{μν} I` over all index pairs.
pub fn covariant_clifford_residual(gammas: &[Mat4; 4], g: &Matrix4<f64>) -> Result<f64, GeometryError> {
    let ginv = g.try_inverse().ok_or(GeometryError::SingularMetric {
        point: [f64::NAN; 4],
        condition: f64::INFINITY,
    })?;
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let r = anticommutator(&gammas[mu], &gammas[nu])
                - Mat4::identity() * C64::new(2.0 * ginv[(mu, nu)], 0.0);
            worst = worst.max(max_abs(&r));
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// JSON descriptions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Minkowski,
    Diagonal,
    Polar,
    CustomPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub name: String,
    pub kind: MetricKind,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalParams {
    diag: [f64; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialParams {
    components: [[Polynomial; 4]; 4],
}

fn params<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T, GeometryError> {
    let v = if v.is_null() { serde_json::json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| GeometryError::InvalidDescription(e.to_string()))
}

impl MetricSpec {
    pub fn build(&self) -> Result<Box<dyn MetricField>, GeometryError> {
        Ok(match self.kind {
            MetricKind::Minkowski => {
                params::<Empty>(&self.parameters)?;
                Box::new(Minkowski)
            }
            MetricKind::Polar => {
                params::<Empty>(&self.parameters)?;
                Box::new(PolarMetric)
            }
            MetricKind::Diagonal => {
                let p: DiagonalParams = params(&self.parameters)?;
                Box::new(DiagonalMetric { diag: p.diag })
            }
            MetricKind::CustomPolynomial => {
                let p: PolynomialParams = params(&self.parameters)?;
                for mu in 0..4 {
                    for nu in 0..mu {
                        if p.components[mu][nu] != p.components[nu][mu] {
                            return Err(GeometryError::InvalidDescription(format!(
                                "metric component ({mu},{nu}) differs from ({nu},{mu})"
                            )));
                        }
                    }
                }
                Box::new(PolynomialMetric { components: p.components })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Identity,
    Polar,
    TimeScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub name: String,
    pub kind: ChartKind,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeScaleParams {
    factor: f64,
}

impl ChartSpec {
    pub fn build(&self) -> Result<Box<dyn CoordinateChart>, GeometryError> {
        Ok(match self.kind {
            ChartKind::Identity => {
                params::<Empty>(&self.parameters)?;
                Box::new(IdentityChart)
            }
            ChartKind::Polar => {
                params::<Empty>(&self.parameters)?;
                Box::new(PolarChart)
            }
            ChartKind::TimeScale => {
                let p: TimeScaleParams = params(&self.parameters)?;
                if p.factor == 0.0 || !p.factor.is_finite() {
                    return Err(GeometryError::InvalidDescription("time-scale factor must be finite and nonzero".into()));
                }
                Box::new(TimeScaleChart { factor: p.factor })
            }
        })
    }
}
