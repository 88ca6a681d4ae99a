//! Ideal-gas statistics built on the exponential eigen-solution
//! `ψ = A e^{(k/2) p·p}`: Maxwell–Boltzmann velocity sampling, per-slice
//! normalization, occupation-number enumeration and the exponential
//! arrival-time estimator.

use crate::clifford::FourVector;
use crate::dynamics::{PhaseState, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Particles per independent random substream.
pub const CHUNK: usize = 4096;
/// Upper bound on levels and on particles for brute-force enumeration.
pub const ENUM_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("density is not integrable on the grid (boundary mass fraction {fraction:e})")]
    NotIntegrable { fraction: f64 },
    #[error("enumeration too large ({levels} levels, {particles} particles; limit {limit})")]
    TooLarge { levels: usize, particles: usize, limit: usize },
    #[error("arrival data are degenerate: {0}")]
    DegenerateData(String),
}

fn default_kb() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n: usize,
    pub m0: f64,
    pub temperature: f64,
    #[serde(default = "default_kb")]
    pub kb: f64,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), StatError> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(StatError::InvalidConfig(format!("temperature must be positive, got {}", self.temperature)));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(StatError::InvalidConfig(format!("m0 must be positive, got {}", self.m0)));
        }
        if !(self.kb > 0.0 && self.kb.is_finite()) {
            return Err(StatError::InvalidConfig(format!("kb must be positive, got {}", self.kb)));
        }
        Ok(())
    }

    /// `k = 1/(k_B T)`
    pub fn k(&self) -> f64 {
        1.0 / (self.kb * self.temperature)
    }

    /// Per-axis variance of `|ψ|²`: `σ² = k_B T / (2m₀)`.
    pub fn sigma2(&self) -> f64 {
        self.kb * self.temperature / (2.0 * self.m0)
    }
}

/// `ψ = exp(−(m₀/2)|v|²/(k_B T))`, unnormalized, peak value 1.
pub fn mb_density(cfg: &EnsembleConfig, v: &[f64; 3]) -> f64 {
    let v2: f64 = v.iter().map(|c| c * c).sum();
    (-0.5 * cfg.m0 * v2 / (cfg.kb * cfg.temperature)).exp()
}

/// `|ψ|²` normalized to unit mass: a centred Gaussian with variance `σ²` per axis.
pub fn mb_density_normalized(cfg: &EnsembleConfig, v: &[f64; 3]) -> f64 {
    let s2 = cfg.sigma2();
    let v2: f64 = v.iter().map(|c| c * c).sum();
    (2.0 * std::f64::consts::PI * s2).powf(-1.5) * (-v2 / (2.0 * s2)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocitySample {
    pub v: Vec<[f64; 3]>,
    /// `ε = m₀|v|²/2`
    pub eps: Vec<f64>,
}

/// Draws `n` velocities from `|ψ|²`. Chunk `c` of [`CHUNK`] particles uses
/// ChaCha8 seeded with `seed` on stream `c`, so output is independent of the
/// thread count.
pub fn sample_mb(cfg: &EnsembleConfig) -> Result<VelocitySample, StatError> {
    cfg.validate()?;
    let sigma = cfg.sigma2().sqrt();
    let mut v = vec![[0.0; 3]; cfg.n];
    v.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(c as u64);
        for vi in chunk.iter_mut() {
            for comp in vi.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *comp = sigma * z;
            }
        }
    });
    let eps = v.iter().map(|vi| 0.5 * cfg.m0 * vi.iter().map(|c| c * c).sum::<f64>()).collect();
    Ok(VelocitySample { v, eps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub expected_variance: f64,
    pub mean: [f64; 3],
    pub variance: [f64; 3],
    pub excess_kurtosis: [f64; 3],
    /// Standard errors for a Gaussian population.
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_kurtosis: f64,
    /// Largest `|estimate − expected| / SE` over axes, per statistic.
    pub z_mean: f64,
    pub z_variance: f64,
    pub z_kurtosis: f64,
}

impl MomentReport {
    /// Every statistic within `n_se` standard errors.
    pub fn within(&self, n_se: f64) -> bool {
        self.z_mean < n_se && self.z_variance < n_se && self.z_kurtosis < n_se
    }
}

/// Per-axis moments of a sample against the `|ψ|²` Gaussian.
pub fn moment_report(sample: &VelocitySample, cfg: &EnsembleConfig) -> MomentReport {
    let n = sample.v.len();
    let nf = n.max(2) as f64;
    let s2 = cfg.sigma2();
    let mut mean = [0.0; 3];
    let mut var = [0.0; 3];
    let mut kurt = [0.0; 3];
    for a in 0..3 {
        let m = sample.v.iter().map(|v| v[a]).sum::<f64>() / nf;
        let (m2, m4) = sample.v.iter().fold((0.0, 0.0), |(s2, s4), v| {
            let d = v[a] - m;
            (s2 + d * d, s4 + d * d * d * d)
        });
        mean[a] = m;
        var[a] = m2 / nf;
        kurt[a] = if m2 > 0.0 { (m4 / nf) / (var[a] * var[a]) - 3.0 } else { 0.0 };
    }
    let se_mean = (s2 / nf).sqrt();
    let se_variance = s2 * (2.0 / (nf - 1.0)).sqrt();
    let se_kurtosis = (24.0 / nf).sqrt();
    let zmax = |vals: &[f64; 3], target: f64, se: f64| vals.iter().fold(0.0f64, |m, v| m.max((v - target).abs() / se));
    MomentReport {
        n,
        expected_variance: s2,
        mean,
        variance: var,
        excess_kurtosis: kurt,
        se_mean,
        se_variance,
        se_kurtosis,
        z_mean: zmax(&mean, 0.0, se_mean),
        z_variance: zmax(&var, s2, se_variance),
        z_kurtosis: zmax(&kurt, 0.0, se_kurtosis),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub predicted: Vec<f64>,
    /// Samples beyond the last edge.
    pub overflow: u64,
}

/// Maxwell speed CDF for per-axis variance `σ²`.
fn maxwell_cdf(v: f64, sigma: f64) -> f64 {
    let x = v / sigma;
    libm::erf(x / std::f64::consts::SQRT_2) - (2.0 / std::f64::consts::PI).sqrt() * x * (-0.5 * x * x).exp()
}

/// Speed histogram on `[0, 5σ]` with Maxwell-predicted counts.
pub fn speed_histogram(sample: &VelocitySample, cfg: &EnsembleConfig, bins: usize) -> Histogram {
    let sigma = cfg.sigma2().sqrt();
    let top = 5.0 * sigma;
    let bins = bins.max(1);
    let edges: Vec<f64> = (0..=bins).map(|k| top * k as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    for v in &sample.v {
        let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let k = if top > 0.0 { (speed / top * bins as f64) as usize } else { bins };
        if k < bins {
            counts[k] += 1;
        } else {
            overflow += 1;
        }
    }
    let n = sample.v.len() as f64;
    let predicted = edges
        .windows(2)
        .map(|w| if sigma > 0.0 { n * (maxwell_cdf(w[1], sigma) - maxwell_cdf(w[0], sigma)) } else { 0.0 })
        .collect();
    Histogram { edges, counts, predicted, overflow }
}

// ---------------------------------------------------------------------------
// Slice normalization

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Points per axis, including both ends.
    pub n: usize,
}

impl Grid3 {
    pub fn cube(half: f64, n: usize) -> Self {
        Self { lo: [-half; 3], hi: [half; 3], n }
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / (self.n - 1) as f64
    }

    fn weight(&self, axis: usize, i: usize) -> f64 {
        let h = (self.hi[axis] - self.lo[axis]) / (self.n - 1) as f64;
        if i == 0 || i + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceNormalization {
    pub t: f64,
    /// `∫ψ² d³x` over the grid.
    pub constant: f64,
    /// Trapezoid mass in the outermost layer of grid points, over the total.
    pub boundary_fraction: f64,
    pub grid: Grid3,
    /// Normalized density at the grid points, axis 0 slowest.
    pub density: Vec<f64>,
}

impl SliceNormalization {
    /// Trapezoid integral of the normalized density (1 up to rounding).
    pub fn integral(&self) -> f64 {
        let n = self.grid.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let w = self.grid.weight(0, i) * self.grid.weight(1, j) * self.grid.weight(2, k);
                    s += w * self.density[(i * n + j) * n + k];
                }
            }
        }
        s
    }
}

/// Max boundary mass fraction accepted by [`slice_normalize`].
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Normalizes `ψ²(·, t)` on the grid with the composite trapezoid rule.
pub fn slice_normalize(psi_sq: &(dyn Fn(&[f64; 3], f64) -> f64 + Sync), t: f64, grid: &Grid3) -> Result<SliceNormalization, StatError> {
    let n = grid.n;
    if n < 3 {
        return Err(StatError::InvalidConfig("grid needs at least 3 points per axis".into()));
    }
    let vals: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            psi_sq(&[grid.coord(0, i), grid.coord(1, j), grid.coord(2, k)], t)
        })
        .collect();
    let (mut total, mut edge) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w = grid.weight(0, i) * grid.weight(1, j) * grid.weight(2, k);
                let m = w * vals[(i * n + j) * n + k];
                total += m;
                if [i, j, k].iter().any(|&q| q == 0 || q + 1 == n) {
                    edge += m.abs();
                }
            }
        }
    }
    let fraction = if total > 0.0 { edge / total } else { f64::INFINITY };
    if !(fraction <= BOUNDARY_TOL) || !total.is_finite() {
        return Err(StatError::NotIntegrable { fraction });
    }
    Ok(SliceNormalization {
        t,
        constant: total,
        boundary_fraction: fraction,
        grid: *grid,
        density: vals.into_iter().map(|v| v / total).collect(),
    })
}

// ---------------------------------------------------------------------------
// Occupation numbers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistics {
    #[serde(rename = "BE")]
    BoseEinstein,
    #[serde(rename = "FD")]
    FermiDirac,
    #[serde(rename = "MB")]
    MaxwellBoltzmann,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyState {
    pub occupations: Vec<u32>,
    pub energy: f64,
    /// Multiplicity times the Boltzmann factor.
    pub weight: f64,
    pub probability: f64,
}

impl OccupancyState {
    /// `2;0;1`-style label.
    pub fn label(&self) -> String {
        self.occupations.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionTable {
    pub statistics: Statistics,
    pub states: Vec<OccupancyState>,
    pub z: f64,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn compositions(n: u32, parts: usize, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        if n <= max_part {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    for first in (0..=n.min(max_part)).rev() {
        prefix.push(first);
        compositions(n - first, parts - 1, max_part, prefix, out);
        prefix.pop();
    }
}

/// All occupation vectors with `Σn_l = n`, weighted by `e^{−βΣn_lε_l}` (times
/// the multinomial multiplicity for distinguishable particles).
pub fn partition_enumerate(levels: &[f64], n: usize, beta: f64, stats: Statistics) -> Result<PartitionTable, StatError> {
    if levels.len() > ENUM_LIMIT || n > ENUM_LIMIT {
        return Err(StatError::TooLarge { levels: levels.len(), particles: n, limit: ENUM_LIMIT });
    }
    if levels.is_empty() {
        return Err(StatError::InvalidConfig("no energy levels".into()));
    }
    let max_part = if stats == Statistics::FermiDirac { 1 } else { n as u32 };
    let mut occs = Vec::new();
    compositions(n as u32, levels.len(), max_part, &mut Vec::new(), &mut occs);
    let mut states: Vec<OccupancyState> = occs
        .into_iter()
        .map(|occ| {
            let energy: f64 = occ.iter().zip(levels).map(|(&k, e)| f64::from(k) * e).sum();
            let mult = match stats {
                Statistics::MaxwellBoltzmann => factorial(n as u32) / occ.iter().map(|&k| factorial(k)).product::<f64>(),
                _ => 1.0,
            };
            OccupancyState { occupations: occ, energy, weight: mult * (-beta * energy).exp(), probability: 0.0 }
        })
        .collect();
    let z: f64 = states.iter().map(|s| s.weight).sum();
    for s in &mut states {
        s.probability = s.weight / z;
    }
    Ok(PartitionTable { statistics: stats, states, z })
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

// ---------------------------------------------------------------------------
// Arrival times

/// `θ̂ = n / (t_n − t_0)` for strictly increasing detection times.
pub fn exp_arrival_estimator(times: &[f64]) -> Result<f64, StatError> {
    if times.len() < 2 {
        return Err(StatError::DegenerateData("need at least two detection times".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(StatError::DegenerateData("non-finite detection time".into()));
    }
    let span = times[times.len() - 1] - times[0];
    if span == 0.0 {
        return Err(StatError::DegenerateData("t_n equals t_0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StatError::DegenerateData("detection times are not strictly increasing".into()));
    }
    Ok((times.len() - 1) as f64 / span)
}

/// `n` exponential gaps of rate `theta` accumulated from `t = 0`.
pub fn synthetic_arrivals(theta: f64, n: usize, seed: u64) -> Result<Vec<f64>, StatError> {
    let dist = Exp::new(theta).map_err(|e| StatError::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(t);
    for _ in 0..n {
        let gap: f64 = dist.sample(&mut rng);
        t += gap;
        out.push(t);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Eigen-solution along trajectories

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSolutionReport {
    pub k: f64,
    /// `max |dψ/dH − kψ| / max(1, |kψ|)` with `H = ½p·p`.
    pub eigen_residual: f64,
    /// `max |dψ/ds − kψ(ṗ·p)|` against central differences.
    pub chain_rule_residual: f64,
    /// The same with the opposite sign, `dψ/ds = −kψ(ṗ·p)`.
    pub opposite_sign_residual: f64,
    /// Which sign the chain rule selects.
    pub sign_normalization: String,
    /// `max |p·p − p₀·p₀|`
    pub pp_drift: f64,
    /// `max |ψ − ψ₀|`
    pub psi_variation: f64,
}

/// `ψ = A e^{(k/2) p·p}`
pub fn eigen_psi(k: f64, amplitude: f64, p: &FourVector) -> f64 {
    amplitude * (0.5 * k * p.norm2()).exp()
}

/// Checks `ψ = A e^{(k/2)p·p}` along samples with known `ṗ`.
pub fn eigen_solution_check(k: f64, amplitude: f64, samples: &[PhaseState], pdot: &[FourVector]) -> EigenSolutionReport {
    let psi: Vec<f64> = samples.iter().map(|s| eigen_psi(k, amplitude, &s.p)).collect();
    let mut eigen_residual: f64 = 0.0;
    for s in samples {
        let hval = 0.5 * s.p.norm2();
        let f = |h: f64| amplitude * (k * h).exp();
        let dh = 1e-6 * hval.abs().max(1.0);
        let d = (f(hval + dh) - f(hval - dh)) / (2.0 * dh);
        let want = k * f(hval);
        eigen_residual = eigen_residual.max((d - want).abs() / want.abs().max(1.0));
    }
    let (mut plus, mut minus): (f64, f64) = (0.0, 0.0);
    for i in 1..samples.len().saturating_sub(1) {
        let fd = (psi[i + 1] - psi[i - 1]) / (samples[i + 1].s - samples[i - 1].s);
        let rate = k * psi[i] * pdot[i].dot(&samples[i].p);
        plus = plus.max((fd - rate).abs());
        minus = minus.max((fd + rate).abs());
    }
    let pp0 = samples.first().map(|s| s.p.norm2()).unwrap_or(0.0);
    let pp_drift = samples.iter().fold(0.0f64, |m, s| m.max((s.p.norm2() - pp0).abs()));
    let psi0 = psi.first().copied().unwrap_or(0.0);
    let psi_variation = psi.iter().fold(0.0f64, |m, v| m.max((v - psi0).abs()));
    EigenSolutionReport {
        k,
        eigen_residual,
        chain_rule_residual: plus,
        opposite_sign_residual: minus,
        sign_normalization: "chain rule: dpsi/ds = +k psi (pdot . p)".into(),
        pp_drift,
        psi_variation,
    }
}

pub fn eigen_solution_check_trajectory(k: f64, amplitude: f64, traj: &Trajectory) -> EigenSolutionReport {
    eigen_solution_check(k, amplitude, &traj.samples, &traj.pdot)
}
