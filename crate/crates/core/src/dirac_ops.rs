//! The slashed gradient `γᵃ∂_a ψ(W)` along curves and the spinor relations it
//! supports: the scalar/wedge split of `u̸ ∂̸ψ`, common eigenvectors of commuting
//! slashed vectors, the plane-wave Dirac residual, and the Lie-transport test
//! of a momentum field along a congruence.

use crate::clifford::{commutator, frobenius, Bispinor, CliffordError, FourVector, GammaRep, Mat4, C64};
use crate::geometry::Point;
use crate::hamilton_jacobi::{gradient, GeodesicField, HamiltonJacobiField, HjError, Projectile, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Max `‖[v̸, w̸]‖_F` for which two slashed vectors count as commuting.
pub const COMMUTE_TOL: f64 = 1e-8;
pub const LIE_TOL: f64 = 1e-6;
pub const DIRAC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiracError {
    #[error("point {0:?} is on or outside the boundary of the field's domain")]
    DomainBoundary(Point),
    #[error("slashed operators do not commute (‖[v̸, w̸]‖_F = {norm:e})")]
    NotCommuting { norm: f64 },
    #[error("momentum is off the mass shell (|p·p − m₀²| = {residual:e})")]
    OffShell { residual: f64 },
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Field(HjError),
}

impl From<HjError> for DiracError {
    fn from(e: HjError) -> Self {
        match e {
            HjError::NonTimelikeSeparation(x) | HjError::DomainBoundary(x) => DiracError::DomainBoundary(x),
            other => DiracError::Field(other),
        }
    }
}

/// `ψ` as a function of the action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveFunction {
    Identity,
    Constant(C64),
    /// `A e^{κW}`
    Exp { amplitude: C64, kappa: C64 },
}

impl WaveFunction {
    /// `e^{iW}`, the quantum phase with `ħ = 1`.
    pub fn phase() -> Self {
        WaveFunction::Exp { amplitude: C64::new(1.0, 0.0), kappa: C64::new(0.0, 1.0) }
    }

    pub fn value(&self, w: f64) -> C64 {
        match *self {
            WaveFunction::Identity => C64::new(w, 0.0),
            WaveFunction::Constant(c) => c,
            WaveFunction::Exp { amplitude, kappa } => amplitude * (kappa * w).exp(),
        }
    }

    pub fn derivative(&self, w: f64) -> C64 {
        match *self {
            WaveFunction::Identity => C64::new(1.0, 0.0),
            WaveFunction::Constant(_) => C64::new(0.0, 0.0),
            WaveFunction::Exp { amplitude, kappa } => kappa * amplitude * (kappa * w).exp(),
        }
    }

    pub fn kappa(&self) -> Option<C64> {
        match *self {
            WaveFunction::Exp { kappa, .. } => Some(kappa),
            _ => None,
        }
    }
}

/// `γᵃ ∂_a ψ(W) = ψ′(W) γᵃ ∂_a W`.
pub fn dirac_slash_gradient(
    rep: &GammaRep,
    psi: &WaveFunction,
    hj: &dyn HamiltonJacobiField,
    x: &Point,
) -> Result<Mat4, DiracError> {
    let w = hj.value(x)?;
    let g = gradient(hj, x)?;
    Ok(rep.slash_covector(&g) * psi.derivative(w))
}

// ---------------------------------------------------------------------------
// Curves

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    Affine,
    Arclength,
}

pub trait CurveSegment {
    fn position(&self, s: f64) -> Point;
    fn tangent(&self, s: f64) -> FourVector;
    fn parameterization(&self) -> Parameterization {
        Parameterization::Arclength
    }
}

/// `|u·u − 1|` at parameter `s`.
pub fn unit_tangent_residual(curve: &dyn CurveSegment, s: f64) -> f64 {
    (curve.tangent(s).norm2() - 1.0).abs()
}

/// `x(s) = origin + s·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraightLine {
    pub origin: Point,
    pub u: FourVector,
}

impl CurveSegment for StraightLine {
    fn position(&self, s: f64) -> Point {
        std::array::from_fn(|a| self.origin[a] + s * self.u.0[a])
    }
    fn tangent(&self, _s: f64) -> FourVector {
        self.u
    }
}

impl CurveSegment for Projectile {
    fn position(&self, s: f64) -> Point {
        Projectile::position(self, s)
    }
    fn tangent(&self, s: f64) -> FourVector {
        Projectile::tangent(self, s)
    }
}

/// Split of `u̸ ∂̸ψ` into `(u·∇ψ) I` and `½[u̸, ∂̸ψ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSplit {
    pub scalar: C64,
    pub wedge: Mat4,
    /// Central-difference `dψ/ds` along the curve.
    pub along_curve: C64,
    pub along_curve_residual: f64,
    /// Max-abs entry of `u̸ ∂̸ψ − (scalar·I + wedge)`.
    pub reconstruction_residual: f64,
}

pub fn split_along_curve(
    rep: &GammaRep,
    curve: &dyn CurveSegment,
    psi: &WaveFunction,
    hj: &dyn HamiltonJacobiField,
    s: f64,
) -> Result<CurveSplit, DiracError> {
    let x = curve.position(s);
    let u = rep.slash(&curve.tangent(s)).matrix;
    let d = dirac_slash_gradient(rep, psi, hj, &x)?;
    let prod = u * d;
    let scalar = prod.trace() / C64::new(4.0, 0.0);
    let wedge = commutator(&u, &d) * C64::new(0.5, 0.0);
    let recon = prod - (Mat4::identity() * scalar + wedge);
    let reconstruction_residual = recon.iter().fold(0.0f64, |m, z| m.max(z.norm()));

    let h = 1e-5 * s.abs().max(1.0);
    let at = |t: f64| -> Result<C64, DiracError> { Ok(psi.value(hj.value(&curve.position(t))?)) };
    let along_curve = (at(s + h)? - at(s - h)?) / C64::new(2.0 * h, 0.0);
    Ok(CurveSplit {
        scalar,
        wedge,
        along_curve,
        along_curve_residual: (along_curve - scalar).norm(),
        reconstruction_residual,
    })
}

// ---------------------------------------------------------------------------
// Spinors

/// A common eigenvector `ξ(p)` of two commuting slashed vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorState {
    pub xi: Bispinor,
    pub momentum: FourVector,
    /// Eigenvalues of `v̸` and `w̸` on `ξ`.
    pub eigen_v: C64,
    pub eigen_w: C64,
    pub residual_v: f64,
    pub residual_w: f64,
}

fn rayleigh(m: &Mat4, xi: &Bispinor) -> (C64, f64) {
    let mx = m * xi.0;
    let lambda = xi.0.dotc(&mx);
    (lambda, (mx - xi.0 * lambda).norm())
}

/// Spinor on the positive branch of `w̸` that is also an eigenvector of `v̸`.
pub fn simultaneous_eigenvector(rep: &GammaRep, v: &FourVector, w: &FourVector) -> Result<SpinorState, DiracError> {
    let sv = rep.slash(v).matrix;
    let sw = rep.slash(w).matrix;
    let norm = frobenius(&commutator(&sv, &sw));
    if norm > COMMUTE_TOL {
        return Err(DiracError::NotCommuting { norm });
    }
    // w = 0 commutes with everything; fall back to v's spectrum
    let base = if w.max_abs() > 0.0 { w } else { v };
    let sys = rep.slash_eigensystem(base)?;
    let xi = sys.blocks[0].vectors[0];
    let (eigen_v, residual_v) = rayleigh(&sv, &xi);
    let (eigen_w, residual_w) = rayleigh(&sw, &xi);
    Ok(SpinorState { xi, momentum: *w, eigen_v, eigen_w, residual_v, residual_w })
}

/// Residuals of the plane wave `Ψ = e^{κ(−p·x)} ξ` in the Dirac equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracResidual {
    /// `‖γᵃ∂_aΨ + i m₀ Ψ‖` at `x = 0`.
    pub residual: f64,
    /// `‖(α·p + m₀ α⁰ − p⁰) ξ‖`, the Hamiltonian form.
    pub alpha_residual: f64,
}

pub fn conventional_dirac_residual(
    rep: &GammaRep,
    kappa: C64,
    m0: f64,
    p: &FourVector,
    xi: &Bispinor,
) -> Result<DiracResidual, DiracError> {
    let shell = (p.norm2() - m0 * m0).abs();
    if shell > 1e-8 * (m0 * m0).max(1.0) {
        return Err(DiracError::OffShell { residual: shell });
    }
    let i = C64::new(0.0, 1.0);
    // ∂_a Ψ = −κ p_a Ψ
    let lhs = rep.slash(p).matrix * xi.0 * (-kappa) + xi.0 * (i * m0);
    let mut ham = rep.alpha[0] * C64::new(m0, 0.0) - Mat4::identity() * C64::new(p.0[0], 0.0);
    for k in 1..4 {
        ham += rep.alpha[k] * C64::new(p.0[k], 0.0);
    }
    Ok(DiracResidual { residual: lhs.norm(), alpha_residual: (ham * xi.0).norm() })
}

/// The shifted line element `dσ/ds = u + c♯/m₀` that commutes with `∂̸W` when
/// `∇W = m₀ũ + c`.
pub fn spin_shifted_tangent(u: &FourVector, spin: &FourVector, m0: f64) -> FourVector {
    *u + spin.raise() * (1.0 / m0)
}

// ---------------------------------------------------------------------------
// Congruences

/// A unit tangent field `u(x)` with a momentum field `p(x)` carried along it.
pub trait Congruence: Send + Sync {
    fn name(&self) -> String;
    fn u(&self, x: &Point) -> Result<FourVector, DiracError>;
    fn p(&self, x: &Point) -> Result<FourVector, DiracError>;
}

/// Radial geodesics from a base point with `p = m₀u`.
#[derive(Debug, Clone)]
pub struct GeodesicCongruence {
    pub field: GeodesicField,
}

impl Congruence for GeodesicCongruence {
    fn name(&self) -> String {
        "geodesic".into()
    }
    fn u(&self, x: &Point) -> Result<FourVector, DiracError> {
        Ok(self.field.tangent(x)?)
    }
    fn p(&self, x: &Point) -> Result<FourVector, DiracError> {
        Ok(self.u(x)? * self.field.m0)
    }
}

/// The geodesic congruence with `u` rotated in the `x¹x²` plane by the angle
/// `rate·x¹`, while `p` stays `m₀` times the unrotated tangent.
#[derive(Debug, Clone)]
pub struct ShearCongruence {
    pub field: GeodesicField,
    pub rate: f64,
}

impl Congruence for ShearCongruence {
    fn name(&self) -> String {
        "shear".into()
    }
    fn u(&self, x: &Point) -> Result<FourVector, DiracError> {
        let u = self.field.tangent(x)?;
        let (sn, cs) = (self.rate * x[1]).sin_cos();
        Ok(FourVector::new(u.0[0], cs * u.0[1] - sn * u.0[2], sn * u.0[1] + cs * u.0[2], u.0[3]))
    }
    fn p(&self, x: &Point) -> Result<FourVector, DiracError> {
        Ok(self.field.tangent(x)? * self.field.m0)
    }
}

/// Rest-frame flow `u = ∂_t` with `p = m₀u + drift`.
#[derive(Debug, Clone)]
pub struct DriftCongruence {
    pub m0: f64,
    pub drift: FourVector,
}

impl Congruence for DriftCongruence {
    fn name(&self) -> String {
        "drift".into()
    }
    fn u(&self, _x: &Point) -> Result<FourVector, DiracError> {
        Ok(FourVector::new(1.0, 0.0, 0.0, 0.0))
    }
    fn p(&self, x: &Point) -> Result<FourVector, DiracError> {
        Ok(self.u(x)? * self.m0 + self.drift)
    }
}

type VecFn = Box<dyn Fn(&Point) -> FourVector + Send + Sync>;

/// Congruence given by closures.
pub struct FnCongruence {
    pub label: String,
    pub u: VecFn,
    pub p: VecFn,
}

impl Congruence for FnCongruence {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn u(&self, x: &Point) -> Result<FourVector, DiracError> {
        Ok((self.u)(x))
    }
    fn p(&self, x: &Point) -> Result<FourVector, DiracError> {
        Ok((self.p)(x))
    }
}

/// `L_u p = u^b ∂_b p − p^b ∂_b u` by central differences.
pub fn lie_derivative(cong: &dyn Congruence, x: &Point) -> Result<FourVector, DiracError> {
    let u = cong.u(x)?;
    let p = cong.p(x)?;
    let mut out = FourVector::ZERO;
    for b in 0..4 {
        let h = 1e-5 * x[b].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[b] += h;
        xm[b] -= h;
        let dp = (cong.p(&xp)? - cong.p(&xm)?) * (1.0 / (2.0 * h));
        let du = (cong.u(&xp)? - cong.u(&xm)?) * (1.0 / (2.0 * h));
        out = out + dp * u.0[b] - du * p.0[b];
    }
    Ok(out)
}

/// RK4 integral curve of `u` starting at `start`, sampled at `steps + 1` points.
pub fn trace_curve(cong: &dyn Congruence, start: &Point, arclength: f64, steps: usize) -> Result<Vec<Point>, DiracError> {
    let h = arclength / steps as f64;
    let shift = |x: &Point, k: &FourVector, f: f64| -> Point { std::array::from_fn(|a| x[a] + f * k.0[a]) };
    let mut x = *start;
    let mut out = vec![x];
    for _ in 0..steps {
        let k1 = cong.u(&x)?;
        let k2 = cong.u(&shift(&x, &k1, h / 2.0))?;
        let k3 = cong.u(&shift(&x, &k2, h / 2.0))?;
        let k4 = cong.u(&shift(&x, &k3, h))?;
        x = std::array::from_fn(|a| x[a] + h / 6.0 * (k1.0[a] + 2.0 * k2.0[a] + 2.0 * k3.0[a] + k4.0[a]));
        out.push(x);
    }
    Ok(out)
}

/// Sample points along curves launched from the surface `t = t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceSampling {
    pub t0: f64,
    pub center: [f64; 3],
    pub half_width: f64,
    pub n_curves: usize,
    pub points_per_curve: usize,
    pub arclength: f64,
    pub seed: u64,
}

impl Default for CongruenceSampling {
    fn default() -> Self {
        Self {
            t0: 0.0,
            center: [0.0; 3],
            half_width: 0.5,
            n_curves: 8,
            points_per_curve: 5,
            arclength: 1.0,
            seed: 11,
        }
    }
}

impl CongruenceSampling {
    pub fn points(&self, cong: &dyn Congruence) -> Result<Vec<Point>, DiracError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pts = Vec::new();
        let per = self.points_per_curve.max(2) - 1;
        for _ in 0..self.n_curves {
            let start: Point = [
                self.t0,
                self.center[0] + self.half_width * rng.random_range(-1.0..1.0),
                self.center[1] + self.half_width * rng.random_range(-1.0..1.0),
                self.center[2] + self.half_width * rng.random_range(-1.0..1.0),
            ];
            let curve = trace_curve(cong, &start, self.arclength, per * 20)?;
            pts.extend(curve.iter().step_by(20).copied());
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    pub congruence: String,
    /// `max ‖L_u p‖` over the samples.
    pub lie_residual: f64,
    /// `max ‖[∂̸(W − c·x), u̸]‖_F`
    pub commutator_norm: f64,
    /// `max ‖(∂̸ψ_∥ − dψ/ds) ξ‖` over the positive eigenspace of `u̸`.
    pub eigen_residual: f64,
    /// `max ‖(∇W)_⊥ − c‖`, how far the perpendicular part is from constant.
    pub perp_spread: f64,
    /// The constants `c_a`, the mean perpendicular part.
    pub spin: FourVector,
    pub lie_verdict: Verdict,
    pub dirac_verdict: Verdict,
    /// Both sides agree.
    pub consistent: bool,
    pub samples: usize,
}

/// Checks both sides of the Lie-transport / Dirac-eigenrelation equivalence on
/// points sampled along the congruence.
pub fn transport_equivalence_check(
    rep: &GammaRep,
    cong: &dyn Congruence,
    hj: &dyn HamiltonJacobiField,
    psi: &WaveFunction,
    sampling: &CongruenceSampling,
) -> Result<TransportReport, DiracError> {
    let pts = sampling.points(cong)?;
    let mut lie: f64 = 0.0;
    let mut rows = Vec::with_capacity(pts.len());
    for x in &pts {
        lie = lie.max(lie_derivative(cong, x)?.euclid_norm());
        let u = cong.u(x)?;
        let g = gradient(hj, x)?;
        // (∇W)_⊥ = ∇W − (∇W·u) ũ
        let along: f64 = (0..4).map(|a| g.0[a] * u.0[a]).sum();
        let perp = g - u.lower() * along;
        rows.push((*x, u, g, perp));
    }
    let n = rows.len().max(1) as f64;
    let spin = rows.iter().fold(FourVector::ZERO, |acc, r| acc + r.3) * (1.0 / n);
    let mut spread: f64 = 0.0;
    let mut comm: f64 = 0.0;
    let mut eig: f64 = 0.0;
    for (x, u, g, perp) in &rows {
        spread = spread.max((*perp - spin).euclid_norm());
        let par = *g - spin;
        let su = rep.slash(u).matrix;
        let sp = rep.slash_covector(&par);
        comm = comm.max(frobenius(&commutator(&sp, &su)));
        let scale = psi.derivative(hj.value(x)?).norm();
        let lambda: f64 = (0..4).map(|a| par.0[a] * u.0[a]).sum();
        let shifted = sp - Mat4::identity() * C64::new(lambda, 0.0);
        for xi in &rep.slash_eigensystem(u)?.blocks[0].vectors {
            eig = eig.max(scale * (shifted * xi.0).norm());
        }
    }
    let lie_ok = lie <= LIE_TOL;
    let dirac_ok = comm <= DIRAC_TOL && eig <= DIRAC_TOL;
    Ok(TransportReport {
        congruence: cong.name(),
        lie_residual: lie,
        commutator_norm: comm,
        eigen_residual: eig,
        perp_spread: spread,
        spin,
        lie_verdict: Verdict::from_bool(lie_ok),
        dirac_verdict: Verdict::from_bool(dirac_ok),
        consistent: lie_ok == dirac_ok,
        samples: rows.len(),
    })
}
