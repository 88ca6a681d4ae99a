//! Named verification suites. Each check records the identity it exercises,
//! the measured residual and the tolerance it is held to.

use crate::clifford::{anticommutator, build_gamma_rep, commutator, max_abs, FourVector, GammaRep, Mat4, C64, ETA};
use crate::dirac_ops::{
    conventional_dirac_residual, split_along_curve, simultaneous_eigenvector, spin_shifted_tangent, transport_equivalence_check,
    CongruenceSampling, DiracError, GeodesicCongruence, ShearCongruence, WaveFunction,
};
use crate::dynamics::{
    covariant_integrate, integrate, max_state_difference, normalized_commutator, operator_commutator,
    straightness_residual, CovariantModel, CustomModel, Method, PhaseState, ProjectileModel, Quadratic,
};
use crate::geometry::{
    christoffel_with, covariant_clifford_residual, covariant_gamma, metric_compatibility_residual, tetrad_at,
    CoordinateChart, DerivativeMode, IdentityChart, MetricField, Minkowski, Point, PolarChart, PolarMetric,
    PolynomialMetric,
};
use crate::hamilton_jacobi::{
    construct_geodesic_w, decompose_parallel_perp, is_exact, loop_integral, mass_shell_check, projectile_field,
    scale_check, CurlForm, ExactnessConfig, GradientForm, HamiltonJacobiField, LinearShift, MonotoneMix, Region,
};
use crate::stat_mech::{
    binomial, eigen_solution_check, eigen_solution_check_trajectory, exp_arrival_estimator, moment_report,
    partition_enumerate, sample_mb, slice_normalize, synthetic_arrivals, EnsembleConfig, Grid3, Statistics,
};
use crate::poly::Polynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// `residual ≤ tolerance`
    Le,
    /// `residual ≥ tolerance`
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Clifford,
    Geometry,
    Hj,
    Dirac,
    Dynamics,
    Statmech,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Clifford, Suite::Geometry, Suite::Hj, Suite::Dirac, Suite::Dynamics, Suite::Statmech];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Clifford => "clifford",
            Suite::Geometry => "geometry",
            Suite::Hj => "hj",
            Suite::Dirac => "dirac",
            Suite::Dynamics => "dynamics",
            Suite::Statmech => "statmech",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Run parameters shared by all suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// RK4 step for the projectile closed-form checks.
    pub step: f64,
    /// Maxwell–Boltzmann sample size.
    pub samples: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 20240601, step: 1e-3, samples: 1_000_000, tolerances: BTreeMap::new() }
    }
}

struct Recorder<'a> {
    opts: &'a VerifyOptions,
    checks: Vec<Check>,
}

impl<'a> Recorder<'a> {
    fn new(opts: &'a VerifyOptions) -> Self {
        Self { opts, checks: Vec::new() }
    }

    fn push(&mut self, name: &str, anchor: &str, residual: f64, tolerance: f64, comparison: Comparison) {
        let tolerance = self.opts.tolerances.get(name).copied().unwrap_or(tolerance);
        let passed = residual.is_finite()
            && match comparison {
                Comparison::Le => residual <= tolerance,
                Comparison::Ge => residual >= tolerance,
            };
        self.checks.push(Check { name: name.into(), anchor: anchor.into(), residual, tolerance, comparison, passed });
    }

    fn le(&mut self, name: &str, anchor: &str, residual: f64, tolerance: f64) {
        self.push(name, anchor, residual, tolerance, Comparison::Le);
    }

    fn ge(&mut self, name: &str, anchor: &str, value: f64, threshold: f64) {
        self.push(name, anchor, value, threshold, Comparison::Ge);
    }

    fn finish(self, suite: Suite) -> SuiteReport {
        let passed = self.checks.iter().all(|c| c.passed);
        SuiteReport { suite, checks: self.checks, passed }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    match suite {
        Suite::Clifford => clifford_suite(opts),
        Suite::Geometry => geometry_suite(opts),
        Suite::Hj => hj_suite(opts),
        Suite::Dirac => dirac_suite(opts),
        Suite::Dynamics => dynamics_suite(opts),
        Suite::Statmech => statmech_suite(opts),
    }
}

/// Check names produced by a suite, for validating tolerance overrides.
pub fn check_names(reports: &[SuiteReport]) -> Vec<String> {
    reports.iter().flat_map(|r| r.checks.iter().map(|c| c.name.clone())).collect()
}

fn rng(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
    r.set_stream(salt);
    r
}

fn random_vector<R: Rng>(rng: &mut R, scale: f64) -> FourVector {
    FourVector(std::array::from_fn(|_| rng.random_range(-scale..scale)))
}

/// A random future-pointing vector with `v·v = m²`.
pub fn random_on_shell<R: Rng>(rng: &mut R, m: f64) -> FourVector {
    let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
    let e = (m * m + p.iter().map(|c| c * c).sum::<f64>()).sqrt();
    FourVector::new(e, p[0], p[1], p[2])
}

fn identity() -> Mat4 {
    Mat4::identity()
}

// ---------------------------------------------------------------------------

pub fn clifford_suite(opts: &VerifyOptions) -> SuiteReport {
    let rep = build_gamma_rep();
    let mut r = Recorder::new(opts);
    let mut rng = rng(opts, 1);

    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let eta = if a == b { ETA[a] } else { 0.0 };
            let d = anticommutator(&rep.gamma[a], &rep.gamma[b]) - identity() * C64::new(2.0 * eta, 0.0);
            worst = worst.max(max_abs(&d));
        }
    }
    r.le("anticommutators", "Clifford relation {γᵃ,γᵇ} = 2η^{ab} I", worst, 1e-12);

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v = random_vector(&mut rng, 3.0);
        let s = rep.slash(&v).matrix;
        let d = s * s - identity() * C64::new(v.norm2(), 0.0);
        worst = worst.max(max_abs(&d) / v.euclid_norm().powi(2).max(1.0));
    }
    r.le("slash_square", "slashed vector squares to (v·v) I", worst, 1e-12);

    let mut worst: f64 = 0.0;
    let mut shape_errors = 0.0;
    let mut n_timelike = 0;
    while n_timelike < 200 {
        let v = random_vector(&mut rng, 3.0);
        if v.norm2() <= 0.1 {
            continue;
        }
        n_timelike += 1;
        let root = v.norm2().sqrt();
        let sys = match rep.slash_eigensystem(&v) {
            Ok(s) => s,
            Err(_) => {
                shape_errors += 1.0;
                continue;
            }
        };
        let s = rep.slash(&v).matrix;
        for (block, want) in sys.blocks.iter().zip([root, -root]) {
            if block.vectors.len() != 2 {
                shape_errors += 1.0;
            }
            worst = worst.max((block.eigenvalue - C64::new(want, 0.0)).norm());
            for xi in &block.vectors {
                worst = worst.max((s * xi.0 - xi.0 * block.eigenvalue).norm());
            }
        }
    }
    r.le("timelike_spectrum", "eigenvalues ±√(v·v), each twice, for timelike v", worst, 1e-10);
    r.le("timelike_multiplicity", "each eigenspace of a timelike slash is two-dimensional", shape_errors, 0.0);

    let mut worst: f64 = 0.0;
    for j in 0..4 {
        worst = worst.max(max_abs(&(rep.alpha[j] - rep.alpha[j].adjoint())));
        for k in 0..4 {
            let want = if j == k { 2.0 } else { 0.0 };
            worst = worst.max(max_abs(&(anticommutator(&rep.alpha[j], &rep.alpha[k]) - identity() * C64::new(want, 0.0))));
        }
    }
    r.le("alpha_relations", "α matrices are Hermitian and mutually anticommuting", worst, 1e-12);

    let trace: f64 = ETA.iter().sum();
    r.le("signature_trace", "metric signature (+,−,−,−) has trace −2", (trace + 2.0).abs(), 0.0);
    r.finish(Suite::Clifford)
}

/// `η + ε·(linear perturbation)`, symmetric, with random coefficients.
pub fn perturbed_diagonal_metric<R: Rng>(rng: &mut R, eps: f64) -> PolynomialMetric {
    let components = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            let base = if mu == nu { ETA[mu] } else { 0.0 };
            let coeffs = std::array::from_fn(|_| eps * rng.random_range(-1.0..1.0));
            Polynomial::linear(coeffs, base + eps * rng.random_range(-1.0..1.0))
        })
    });
    PolynomialMetric { components }
}

pub fn geometry_suite(opts: &VerifyOptions) -> SuiteReport {
    let rep = build_gamma_rep();
    let mut r = Recorder::new(opts);
    let mut rng = rng(opts, 2);
    let (mut tetrad, mut chris, mut compat, mut cliff): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);

    let mut chart_pts = 0.0;
    let point = |metric: &dyn MetricField, y: &Point, tetrad: &mut f64, chris: &mut f64, compat: &mut f64| {
        let g = metric.g(y);
        *tetrad = tetrad.max(tetrad_at(metric, y).map(|t| t.residual(&g)).unwrap_or(f64::INFINITY));
        match (
            christoffel_with(metric, y, DerivativeMode::Auto),
            christoffel_with(metric, y, DerivativeMode::FiniteDifference),
        ) {
            (Ok(a), Ok(f)) => {
                *chris = chris.max(a.max_diff(&f));
                *compat = compat.max(metric_compatibility_residual(metric, y, &a));
            }
            _ => *chris = f64::INFINITY,
        }
    };
    for _ in 0..100 {
        let m = perturbed_diagonal_metric(&mut rng, 0.05);
        let y: Point = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        point(&m, &y, &mut tetrad, &mut chris, &mut compat);
    }
    let chart: &dyn CoordinateChart = &PolarChart;
    for _ in 0..100 {
        let y = [rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0), rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0)];
        point(&PolarMetric, &y, &mut tetrad, &mut chris, &mut compat);
        let g = PolarMetric.g(&y);
        cliff = cliff.max(
            covariant_gamma(chart, &rep, &y)
                .and_then(|gm| covariant_clifford_residual(&gm, &g))
                .unwrap_or(f64::INFINITY),
        );
        chart_pts += 1.0;
    }
    r.le("tetrad_orthonormal", "tetrad legs satisfy g(e_a, e_b) = η_ab", tetrad, 1e-10);
    r.le("christoffel_fd", "connection from analytic and finite-difference metric partials agree", chris, 1e-6);
    r.le("metric_compatible", "Levi-Civita connection is metric compatible", compat, 1e-6);
    r.le("covariant_clifford", "chart gammas satisfy {γ̃^μ,γ̃^ν} = 2g^{μν} I", cliff, 1e-10);
    r.ge("covariant_clifford_points", "chart points sampled for the curved Clifford relation", chart_pts, 100.0);

    let mink = christoffel_with(&Minkowski, &[0.3, 0.1, 0.2, 0.4], DerivativeMode::Auto)
        .map(|c| c.max_abs())
        .unwrap_or(f64::INFINITY);
    r.le("flat_connection", "Minkowski metric has vanishing connection", mink, 0.0);
    r.finish(Suite::Geometry)
}

fn projectile_region() -> Region {
    Region::new([0.0, -1.0, -1.0, 0.0], [2.0, 1.0, 1.0, 0.0])
}

pub fn hj_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut r = Recorder::new(opts);
    let mut rng = rng(opts, 3);
    let cfg = ExactnessConfig { seed: opts.seed, ..Default::default() };

    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let mut loop_ratio: f64 = 0.0;
    let mut closed: f64 = 0.0;
    let mut shell: f64 = 0.0;
    for k in 0..=4 {
        let s = 0.5 * k as f64;
        let f = proj.field_at(s);
        let rep = is_exact(&GradientForm(&f), &projectile_region(), &cfg);
        loop_ratio = loop_ratio.max(rep.max_loop_ratio);
        closed = closed.max(rep.closedness_residual);
        let pts: Vec<_> = (0..10).map(|i| proj.position(s + 0.1 * i as f64)).collect();
        shell = shell.max(mass_shell_check(&f, &pts).unwrap_or(f64::INFINITY));
    }
    r.le("projectile_loops", "projectile action: closed-loop integrals of dW vanish", loop_ratio, 1e-8);
    r.le("projectile_closed", "projectile action: dW has symmetric mixed partials", closed, 1e-6);
    r.le("projectile_mass_shell", "projectile action: H² = m₀² + p²", shell, 1e-8);

    let curl_region = Region::new([0.0, -1.0, -1.0, 0.0], [0.0, 1.0, 1.0, 0.0]);
    let curl = is_exact(&CurlForm, &curl_region, &ExactnessConfig { n_loops: 10, ..cfg });
    let green = curl
        .loops
        .iter()
        .fold(0.0f64, |m, l| m.max((l.integral - 2.0 * l.area()).abs() / (2.0 * l.area())));
    r.le("curl_green", "rotational form: loop integral equals 2·area (Green's theorem)", green, 0.01);
    r.ge("curl_not_closed", "rotational form: antisymmetric derivative is nonzero", curl.closedness_residual, 1.0);

    let geo = construct_geodesic_w(1.3, [0.0; 4]);
    let mut pts = Vec::new();
    while pts.len() < 200 {
        let x: [f64; 4] = [rng.random_range(0.0..4.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        if x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3] > 0.1 {
            pts.push(x);
        }
    }
    r.le(
        "geodesic_mass_shell",
        "geodesic action: η^{ab} ∂_aW ∂_bW = m₀²",
        mass_shell_check(&geo, &pts).unwrap_or(f64::INFINITY),
        1e-8,
    );

    // trapezoid convergence on an exact, nonlinear form
    let corner = [2.5, 0.1, -0.3, 0.0];
    let errs: Vec<f64> = [50usize, 100]
        .iter()
        .map(|&n| loop_integral(&GradientForm(&geo), [0, 1], &corner, [0.8, 0.6], n).map(f64::abs).unwrap_or(f64::NAN))
        .collect();
    let order = (errs[0] / errs[1]).log2();
    r.le("loop_convergence_order", "trapezoid loop error of an exact form is O(h²)", (order - 2.0).abs(), 0.1);

    let offset = proj.field_at(0.5).with_offset(20.0);
    let small = Region::new([0.0, -1.0, -1.0, 0.0], [1.0, 1.0, 1.0, 0.0]);
    let mut failures = 0.0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let psi = MonotoneMix {
            a: rng.random_range(0.1..2.0),
            b: rng.random_range(0.0..2.0),
            c: rng.random_range(0.01..0.3),
            d: rng.random_range(0.0..1e-3),
        };
        let rep = scale_check(&offset, &psi, &small, &cfg);
        if !rep.passed() || rep.non_monotone {
            failures += 1.0;
        }
        worst = worst.max(rep.forward.max_loop_ratio / rep.forward.form_scale);
    }
    r.le("scaling_preserves_exactness", "ψ(W) is exact for monotone ψ iff W is (failures out of 20)", failures, 0.0);
    r.le("scaling_loop_ratio", "scaled form: normalized closed-loop integrals", worst, 1e-8);

    let spin = FourVector::new(0.0, 0.5, 0.0, 0.0);
    let shifted: Arc<dyn HamiltonJacobiField> = Arc::new(LinearShift { inner: Arc::new(geo.clone()), c: spin });
    let (rec, idem) = match decompose_parallel_perp(shifted, &geo, &pts) {
        Ok(d) => {
            let again = decompose_parallel_perp(Arc::new(d.parallel.clone()), &geo, &pts)
                .map(|a| a.spin.max_abs())
                .unwrap_or(f64::INFINITY);
            ((d.spin - spin).max_abs(), again)
        }
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    r.le("perp_constant_recovered", "parallel/perpendicular split recovers injected constants", rec, 1e-10);
    r.le("perp_idempotent", "splitting the parallel part again yields zero constants", idem, 1e-10);
    r.finish(Suite::Hj)
}

pub fn dirac_suite(opts: &VerifyOptions) -> SuiteReport {
    let rep = build_gamma_rep();
    let mut r = Recorder::new(opts);
    let mut rng = rng(opts, 4);
    let i = C64::new(0.0, 1.0);

    let (mut plus, mut minus, mut alpha): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let m0 = rng.random_range(0.2..3.0);
        let p = random_on_shell(&mut rng, m0);
        let Ok(sys) = rep.slash_eigensystem(&p) else {
            plus = f64::INFINITY;
            continue;
        };
        for xi in &sys.blocks[0].vectors {
            match conventional_dirac_residual(&rep, i, m0, &p, xi) {
                Ok(d) => {
                    plus = plus.max(d.residual);
                    alpha = alpha.max((d.alpha_residual - d.residual).abs());
                }
                Err(_) => plus = f64::INFINITY,
            }
        }
        for xi in &sys.blocks[1].vectors {
            match conventional_dirac_residual(&rep, i, m0, &p, xi) {
                Ok(d) => {
                    minus = minus.max((d.residual - 2.0 * m0).abs());
                    alpha = alpha.max((d.alpha_residual - d.residual).abs());
                }
                Err(_) => minus = f64::INFINITY,
            }
        }
    }
    r.le("plane_wave_positive", "plane wave on the + branch solves γᵃ∂_aΨ = −i m Ψ", plus, 1e-10);
    r.le("plane_wave_negative", "plane wave on the − branch has residual 2m₀", minus, 1e-10);
    r.le("alpha_form", "Hamiltonian (α, β) form is equivalent to the covariant form", alpha, 1e-10);

    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let m = rng.random_range(0.2..3.0);
        let w = random_on_shell(&mut rng, m);
        let lambda = rng.random_range(0.1..4.0);
        match simultaneous_eigenvector(&rep, &(w * lambda), &w) {
            Ok(st) => worst = worst.max(st.residual_v).max(st.residual_w),
            Err(_) => worst = f64::INFINITY,
        }
    }
    r.le("common_eigenvector", "parallel slashed vectors share an eigenvector", worst, 1e-10);

    let mut missed = 0.0;
    let mut tried = 0;
    while tried < 100 {
        let v = random_vector(&mut rng, 2.0);
        let w = random_vector(&mut rng, 2.0);
        if v.norm2().abs() < 0.05 || w.norm2().abs() < 0.05 {
            continue;
        }
        tried += 1;
        if !matches!(simultaneous_eigenvector(&rep, &v, &w), Err(DiracError::NotCommuting { .. })) {
            missed += 1.0;
        }
    }
    r.le("non_parallel_rejected", "non-parallel slashed vectors do not commute (misses out of 100)", missed, 0.0);

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let m0 = rng.random_range(0.5..2.0);
        let geo = construct_geodesic_w(m0, [0.0; 4]);
        let spin = random_vector(&mut rng, 0.5);
        let field = LinearShift { inner: Arc::new(geo.clone()), c: spin };
        let x = [rng.random_range(2.0..4.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (Ok(g), Ok(u)) = (crate::hamilton_jacobi::gradient(&field, &x), geo.tangent(&x)) else {
            worst = f64::INFINITY;
            continue;
        };
        let dsigma = spin_shifted_tangent(&u, &spin, m0);
        let c = commutator(&rep.slash_covector(&g), &rep.slash(&dsigma).matrix);
        worst = worst.max(crate::clifford::frobenius(&c));
    }
    r.le("spin_shift_commutes", "gradient of W + c·x commutes with the spin-shifted line element", worst, 1e-10);

    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let (mut recon, mut along): (f64, f64) = (0.0, 0.0);
    for k in 1..=4 {
        let s = 0.5 * k as f64;
        let f = proj.field_at(s);
        for psi in [WaveFunction::Identity, WaveFunction::phase()] {
            match split_along_curve(&rep, &proj, &psi, &f, s) {
                Ok(d) => {
                    recon = recon.max(d.reconstruction_residual);
                    along = along.max(d.along_curve_residual);
                }
                Err(_) => recon = f64::INFINITY,
            }
        }
    }
    r.le("product_split", "u̸ ∂̸ψ = (u·∇ψ) I + ½[u̸, ∂̸ψ]", recon, 1e-12);
    r.le("scalar_is_derivative", "scalar part equals dψ/ds along the curve", along, 1e-6);

    let t1 = transport_families(&rep, opts, 10);
    r.le("lie_geodesic", "geodesic congruences: Lie derivative of p along u vanishes", t1.geodesic_lie, 1e-6);
    r.le("dirac_geodesic_failures", "geodesic congruences: eigen-relation holds (failures out of 10)", t1.geodesic_dirac_failures, 0.0);
    r.le("shear_detected", "sheared congruences: both sides fail (misses out of 10)", t1.shear_misses, 0.0);
    r.le("mixed_verdicts", "Lie transport and the Dirac eigen-relation agree (mixed verdicts)", t1.mixed, 0.0);
    r.finish(Suite::Dirac)
}

/// Aggregate of the Lie-transport equivalence over generated families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportSummary {
    pub geodesic_lie: f64,
    pub geodesic_dirac_failures: f64,
    pub shear_misses: f64,
    pub mixed: f64,
}

pub fn transport_families(rep: &GammaRep, opts: &VerifyOptions, families: usize) -> TransportSummary {
    let mut rng = rng(opts, 5);
    let mut out = TransportSummary { geodesic_lie: 0.0, geodesic_dirac_failures: 0.0, shear_misses: 0.0, mixed: 0.0 };
    for k in 0..families {
        let m0 = rng.random_range(0.5..2.0);
        let base = [rng.random_range(-4.0..-2.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let field = construct_geodesic_w(m0, base);
        let sampling = CongruenceSampling { seed: opts.seed.wrapping_add(k as u64), ..Default::default() };
        let psi = WaveFunction::Identity;
        match transport_equivalence_check(rep, &GeodesicCongruence { field: field.clone() }, &field, &psi, &sampling) {
            Ok(rep) => {
                out.geodesic_lie = out.geodesic_lie.max(rep.lie_residual);
                if !rep.dirac_verdict.passed() {
                    out.geodesic_dirac_failures += 1.0;
                }
                if !rep.consistent {
                    out.mixed += 1.0;
                }
            }
            Err(_) => {
                out.geodesic_lie = f64::INFINITY;
                out.geodesic_dirac_failures += 1.0;
            }
        }
        let rate = rng.random_range(0.05..0.3);
        match transport_equivalence_check(rep, &ShearCongruence { field: field.clone(), rate }, &field, &psi, &sampling) {
            Ok(rep) => {
                if rep.lie_verdict.passed() || rep.dirac_verdict.passed() {
                    out.shear_misses += 1.0;
                }
                if !rep.consistent {
                    out.mixed += 1.0;
                }
            }
            Err(_) => out.shear_misses += 1.0,
        }
    }
    out
}

/// Projectile RK4 run from `s = 0` to `2` with `(u_x, u_y, g) = (1, 2, 1)`.
pub fn projectile_errors(step: f64) -> Option<(f64, f64)> {
    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let init = PhaseState::new(0.0, FourVector(proj.position(0.0)), proj.momentum(0.0));
    let t = integrate(&ProjectileModel { m0: 1.0, g: 1.0 }, init, 2.0, step, Method::Rk4).ok()?;
    let mut dy: f64 = 0.0;
    let mut dx: f64 = 0.0;
    for st in &t.samples {
        let exact = proj.position(st.s);
        dy = dy.max((st.x.0[2] - exact[2]).abs());
        dx = dx.max((st.x - FourVector(exact)).max_abs());
    }
    Some((dy, dx))
}

pub fn dynamics_suite(opts: &VerifyOptions) -> SuiteReport {
    let rep = build_gamma_rep();
    let mut r = Recorder::new(opts);
    let inf = (f64::INFINITY, f64::INFINITY);

    let (dy, dx) = projectile_errors(opts.step).unwrap_or(inf);
    r.le("projectile_height", "RK4 height matches y₀ + u_y s − ½ g s²", dy, 1e-9);
    r.le("projectile_position", "RK4 position (t, x, y) matches the closed-form trajectory", dx, 1e-9);

    let coarse = projectile_errors(0.1).unwrap_or(inf).1;
    let fine = projectile_errors(0.05).unwrap_or(inf).1;
    let ratio = coarse / fine;
    r.ge("rk4_ratio_low", "halving the step cuts the RK4 error ~16× (lower bound)", ratio, 12.0);
    r.le("rk4_ratio_high", "halving the step cuts the RK4 error ~16× (upper bound)", ratio, 20.0);

    let h = integrate(
        &CustomModel::harmonic(1.0),
        PhaseState::new(0.0, FourVector::new(0.0, 1.0, 0.0, 0.0), FourVector::ZERO),
        10.0,
        1e-3,
        Method::Rk4,
    )
    .map(|t| t.energy_drift)
    .unwrap_or(f64::INFINITY);
    r.le("energy_drift", "H conserved along the flow when ∂H/∂t = 0 (10⁴ steps)", h, 1e-8);

    let v: f64 = 0.5;
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let y0 = [0.0, 1.0, 0.0, 0.0];
    let p0 = FourVector::new(gamma, 0.0, gamma * v, 0.0);
    let chart: &dyn CoordinateChart = &PolarChart;
    let (straight, kdrift) = match covariant_integrate(&PolarMetric, chart, &CovariantModel::free(1.0), PhaseState::new(0.0, FourVector(y0), p0), 1.0, 1e-3) {
        Ok(t) => {
            let dir = chart.vector_to_cartesian(&y0, &p0.0).unwrap_or([f64::NAN; 4]);
            (straightness_residual(&t.cartesian, &chart.to_cartesian(&y0), &dir), t.k_drift)
        }
        Err(_) => inf,
    };
    r.le("polar_geodesic_straight", "covariant geodesic in polar chart maps to a Cartesian line", straight, 1e-6);
    r.le("polar_k_conserved", "½ g_{μν} p^μ p^ν conserved along the covariant flow", kdrift, 1e-8);

    let init = PhaseState::new(0.0, FourVector::new(0.0, 0.1, 0.2, 0.3), FourVector::new(1.25, 0.5, -0.5, 0.5));
    let same = match (
        integrate(&Quadratic::default(), init, 1.0, 1e-2, Method::Rk4),
        covariant_integrate(&Minkowski, &IdentityChart, &CovariantModel::free(1.0), init, 1.0, 1e-2),
    ) {
        (Ok(a), Ok(b)) => max_state_difference(&a.samples, &b.samples),
        _ => f64::INFINITY,
    };
    r.le("covariant_flat_agrees", "covariant form reduces to the tetrad form in Minkowski space", same, 1e-10);

    let (geo_comm, geo_force) = match integrate(&Quadratic::default(), init, 2.0, 1e-2, Method::Rk4) {
        Ok(t) => (
            t.comm_norm.iter().fold(0.0f64, |m, c| m.max(*c)),
            t.dm_ds.iter().fold(0.0f64, |m, c| m.max(*c)),
        ),
        Err(_) => inf,
    };
    r.le("geodesic_commutator", "[p̸, ṗ̸] vanishes along geodesics", geo_comm, 1e-12);
    r.le("geodesic_force", "four-force norm dm/ds vanishes on geodesics", geo_force, 1e-12);

    let one = C64::new(1.0, 0.0);
    let mut synth: f64 = 0.0;
    for k in 0..200 {
        let s = 0.01 * k as f64;
        let p = FourVector::new((1.0 + s * s).sqrt() + 1.0, s, 0.5, -0.2);
        let gs = (s).sin() + 2.0;
        synth = synth.max(operator_commutator(&rep, &p, &(p * gs), one, one));
    }
    r.le("parallel_force_commutator", "[p̸, ṗ̸] vanishes when ṗ = g(s) p", synth, 1e-12);

    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let init = PhaseState::new(0.0, FourVector(proj.position(0.0)), proj.momentum(0.0));
    let min_comm = match integrate(&ProjectileModel { m0: 1.0, g: 1.0 }, init, 2.0, 1e-2, Method::Rk4) {
        Ok(t) => t
            .samples
            .iter()
            .zip(&t.pdot)
            .filter(|(s, _)| s.s > 0.1)
            .fold(f64::INFINITY, |m, (s, q)| m.min(normalized_commutator(&rep, &s.p, q))),
        Err(_) => f64::NAN,
    };
    r.ge("projectile_commutator", "[p̸, ṗ̸] ≠ 0 under a non-parallel force (scale-normalized)", min_comm, 1e-3);
    r.finish(Suite::Dynamics)
}

pub fn statmech_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut r = Recorder::new(opts);
    let base = EnsembleConfig { n: opts.samples, m0: 1.0, temperature: 2.0, kb: 1.0, seed: opts.seed };
    let mut variances = Vec::new();
    for t in [1.0, 2.0, 4.0] {
        let cfg = EnsembleConfig { temperature: t, ..base };
        match sample_mb(&cfg) {
            Ok(s) => {
                let m = moment_report(&s, &cfg);
                if t == 2.0 {
                    r.le("mb_variance", "per-axis velocity variance σ² = k_B T/(2m) (standard errors)", m.z_variance, 3.0);
                    r.le("mb_mean", "velocity mean zero (standard errors)", m.z_mean, 4.0);
                    r.le("mb_kurtosis", "Gaussian excess kurtosis (standard errors)", m.z_kurtosis, 3.0);
                }
                variances.push(m.variance.iter().sum::<f64>() / 3.0);
            }
            Err(_) => variances.push(f64::NAN),
        }
    }
    let ratio_err = [(1, 2.0), (2, 4.0)]
        .iter()
        .fold(0.0f64, |m, &(i, want)| m.max((variances[i] / variances[0] / want - 1.0).abs()));
    r.le("variance_vs_temperature", "T is proportional to the population variance", ratio_err, 0.02);

    let (mut be, mut fd, mut mb): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (levels, n) in [(2usize, 2usize), (3, 4), (5, 3), (6, 6), (4, 2)] {
        let energies: Vec<f64> = (0..levels).map(|l| 0.37 * l as f64 + 0.1 * (l * l) as f64).collect();
        let beta = 0.8;
        match (
            partition_enumerate(&energies, n, beta, Statistics::BoseEinstein),
            partition_enumerate(&energies, n, beta, Statistics::FermiDirac),
            partition_enumerate(&energies, n, beta, Statistics::MaxwellBoltzmann),
        ) {
            (Ok(b), Ok(f), Ok(m)) => {
                be = be.max((b.states.len() as f64 - binomial(n + levels - 1, n)).abs());
                fd = fd.max((f.states.len() as f64 - binomial(levels, n)).abs());
                let z1: f64 = energies.iter().map(|e| (-beta * e).exp()).sum();
                mb = mb.max((m.z - z1.powi(n as i32)).abs() / z1.powi(n as i32));
            }
            _ => be = f64::INFINITY,
        }
    }
    r.le("bose_count", "Bose–Einstein state count C(n+L−1, n)", be, 0.0);
    r.le("fermi_count", "Fermi–Dirac state count C(L, n)", fd, 0.0);
    r.le("boltzmann_factorizes", "distinguishable partition sum equals Z₁ⁿ", mb, 1e-12);

    let theta = 2.5;
    let n = 100_000;
    let est = synthetic_arrivals(theta, n, opts.seed)
        .and_then(|t| exp_arrival_estimator(&t))
        .unwrap_or(f64::NAN);
    r.le("arrival_rate", "θ̂ = n/(t_n − t₀) recovers the rate (standard errors)", (est - theta).abs() / (theta / (n as f64).sqrt()), 3.0);

    let gauss = |x: &[f64; 3], _t: f64| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
    let (c0, unit, stationary) = match (
        slice_normalize(&gauss, 0.0, &Grid3::cube(6.0, 61)),
        slice_normalize(&gauss, 1.0, &Grid3::cube(6.0, 61)),
    ) {
        (Ok(a), Ok(b)) => (
            (a.constant - std::f64::consts::PI.powf(1.5)).abs(),
            (a.integral() - 1.0).abs(),
            (a.constant - b.constant).abs(),
        ),
        _ => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    r.le("slice_constant", "Gaussian slice normalization π^{3/2}", c0, 1e-6);
    r.le("slice_unit_mass", "normalized slice integrates to 1", unit, 1e-8);
    r.le("slice_stationary", "constant k gives identical slices at different t", stationary, 1e-10);

    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let init = PhaseState::new(0.0, FourVector(proj.position(0.0)), proj.momentum(0.0));
    let (shell, chain) = match integrate(&ProjectileModel { m0: 1.0, g: 1.0 }, init, 2.0, 1e-3, Method::Rk4) {
        Ok(t) => {
            let rep = eigen_solution_check_trajectory(0.5, 1.0, &t);
            (rep.psi_variation, rep.chain_rule_residual)
        }
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    r.le("eigen_constant_on_shell", "ψ = A e^{(k/2)p·p} is constant when p·p is", shell, 1e-8);
    r.le("eigen_chain_rule_projectile", "dψ/ds = kψ (ṗ·p) along the projectile", chain, 1e-6);
    let osc = integrate(
        &CustomModel::harmonic(1.0),
        PhaseState::new(0.0, FourVector::new(0.0, 1.0, 0.0, 0.0), FourVector::ZERO),
        3.0,
        1e-3,
        Method::Rk4,
    );
    let chain = osc
        .map(|t| eigen_solution_check(0.5, 1.0, &t.samples, &t.pdot).chain_rule_residual)
        .unwrap_or(f64::INFINITY);
    r.le("eigen_chain_rule_varying", "dψ/ds = kψ (ṗ·p) where p·p varies", chain, 1e-6);
    r.finish(Suite::Statmech)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions { samples: 100_000, ..Default::default() }
    }

    #[test]
    fn suites_pass_by_default() {
        for s in Suite::ALL {
            let r = run_suite(s, &small());
            let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
            assert!(r.passed, "{s:?}: {failed:#?}");
        }
    }

    #[test]
    fn coarse_step_fails_projectile() {
        let opts = VerifyOptions { step: 0.5, ..small() };
        let r = dynamics_suite(&opts);
        assert!(!r.passed);
        assert!(!r.checks.iter().find(|c| c.name == "projectile_position").unwrap().passed);
    }

    #[test]
    fn tolerance_override() {
        let mut opts = small();
        opts.tolerances.insert("anticommutators".into(), -1.0);
        let r = clifford_suite(&opts);
        let c = r.checks.iter().find(|c| c.name == "anticommutators").unwrap();
        assert_eq!(c.tolerance, -1.0);
        assert!(!c.passed);
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse("all").unwrap().len(), 6);
        assert_eq!(Suite::parse("hj").unwrap(), vec![Suite::Hj]);
        assert!(Suite::parse("nope").is_none());
    }
}
