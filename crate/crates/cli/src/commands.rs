use hjdirac::clifford::{build_gamma_rep, FourVector};
use hjdirac::dynamics::{
    covariant_integrate, integrate, operator_commutator, straightness_residual, CovariantModel, CustomModel,
    ForceDiagnostic, FreeParticle, HamiltonianModel, PhaseState, ProjectileModel, Quadratic,
};
use hjdirac::hamilton_jacobi::projectile_field;
use hjdirac::clifford::C64;
use hjdirac::stat_mech::{
    moment_report, partition_enumerate, sample_mb, speed_histogram, EnsembleConfig, MomentReport, PartitionTable,
};
use hjdirac::verify::{check_names, run_suite, Suite, SuiteReport, VerifyOptions};
use serde::Serialize;
use std::path::Path;

use crate::config::{ModelName, RunConfig, SCHEMA_VERSION};
use crate::output::{csv_bytes, json_bytes, prepare_dir, write_atomic};
use crate::{CliError, Format};

pub const TRAJECTORY_HEADER: [&str; 12] = ["s", "x0", "x1", "x2", "x3", "p0", "p1", "p2", "p3", "H", "dm_ds", "comm_norm"];
pub const SAMPLES_HEADER: [&str; 5] = ["index", "vx", "vy", "vz", "eps"];
pub const HISTOGRAM_HEADER: [&str; 4] = ["speed_lo", "speed_hi", "count", "predicted"];
pub const OCCUPANCY_HEADER: [&str; 3] = ["state", "energy", "probability"];

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: u32,
    command: &'static str,
    suite: &'a str,
    passed: bool,
    config: &'a RunConfig,
    suites: &'a [SuiteReport],
}

pub fn verify(cfg: &RunConfig, suite: &str, out: Option<&Path>, format: Format) -> Result<bool, CliError> {
    let suites = Suite::parse(suite).ok_or_else(|| {
        CliError::Usage(format!("unknown suite '{suite}'; expected clifford, geometry, hj, dirac, dynamics, statmech or all"))
    })?;
    if !(cfg.verify.step > 0.0 && cfg.verify.step.is_finite()) || cfg.verify.samples < 2 {
        return Err(CliError::Usage("verify.step must be positive and verify.samples at least 2".into()));
    }
    let opts = VerifyOptions {
        seed: cfg.seed,
        step: cfg.verify.step,
        samples: cfg.verify.samples,
        tolerances: cfg.tolerances.clone(),
    };
    let reports: Vec<SuiteReport> = suites.iter().map(|s| run_suite(*s, &opts)).collect();
    let names = check_names(&reports);
    if let Some(bad) = cfg.tolerances.keys().find(|k| !names.contains(k)) {
        return Err(CliError::Usage(format!("tolerance override names no check in this run: '{bad}'")));
    }
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        for c in &r.checks {
            let op = match c.comparison {
                hjdirac::verify::Comparison::Le => "<=",
                hjdirac::verify::Comparison::Ge => ">=",
            };
            eprintln!(
                "{} {}/{}: {:e} {op} {:e}",
                if c.passed { "PASS" } else { "FAIL" },
                r.suite.name(),
                c.name,
                c.residual,
                c.tolerance
            );
        }
    }
    let report = VerifyReport { schema_version: SCHEMA_VERSION, command: "verify", suite, passed, config: cfg, suites: &reports };
    let json = json_bytes(&report)?;
    match out {
        None => print!("{}", String::from_utf8_lossy(&json)),
        Some(dir) => {
            prepare_dir(dir)?;
            match format {
                Format::Json => {
                    write_atomic(dir, "verify_report.json", &json)?;
                }
                Format::Csv => {
                    let rows = reports.iter().flat_map(|r| {
                        r.checks.iter().map(move |c| {
                            (r.suite.name(), &c.name, &c.anchor, c.residual, c.tolerance, c.comparison, c.passed)
                        })
                    });
                    let bytes = csv_bytes(&["suite", "name", "anchor", "residual", "tolerance", "comparison", "passed"], rows)?;
                    write_atomic(dir, "verify_report.csv", &bytes)?;
                }
            }
        }
    }
    Ok(passed)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryRow {
    pub s: f64,
    pub x: [f64; 4],
    pub p: [f64; 4],
    #[serde(rename = "H")]
    pub h: f64,
    pub dm_ds: f64,
    pub comm_norm: f64,
}

impl TrajectoryRow {
    fn flat(&self) -> [f64; 12] {
        let [x0, x1, x2, x3] = self.x;
        let [p0, p1, p2, p3] = self.p;
        [self.s, x0, x1, x2, x3, p0, p1, p2, p3, self.h, self.dm_ds, self.comm_norm]
    }
}

#[derive(Debug, Default, Serialize)]
struct SimulateDiagnostics {
    samples: usize,
    energy_drift: Option<f64>,
    max_comm_norm: f64,
    max_dm_ds: f64,
    /// Projectile with default launch only: `max |y − y_closed|`, `max |x − x_closed|`.
    closed_form_max_dy: Option<f64>,
    closed_form_max_position: Option<f64>,
    /// Covariant runs only.
    straightness_residual: Option<f64>,
    k_drift: Option<f64>,
}

#[derive(Serialize)]
struct SimulateSidecar<'a> {
    schema_version: u32,
    command: &'static str,
    model: String,
    columns: [&'static str; 12],
    conventions: &'static str,
    config: &'a RunConfig,
    diagnostics: SimulateDiagnostics,
}

const TETRAD_CONVENTION: &str =
    "dx^a/ds = eta^{ab} dH/dp^b, dp^a/ds = -eta^{ab} dH/dx^b + f^a with eta = diag(+1,-1,-1,-1)";
const COVARIANT_CONVENTION: &str =
    "chart coordinates; dx^mu/ds = p^mu/m0, dp^mu/ds = -Gamma^mu_{nu lambda} dx^nu/ds p^lambda; H column is 1/2 g_{mu nu} p^mu p^nu; dm_ds and comm_norm use Cartesian momenta differenced along the run";

pub fn simulate(cfg: &RunConfig, out: &Path, format: Format) -> Result<(), CliError> {
    let sim = &cfg.simulate;
    if !(sim.m0 > 0.0 && sim.m0.is_finite()) {
        return Err(CliError::Usage("simulate.m0 must be positive".into()));
    }
    if !(sim.step > 0.0 && sim.step.is_finite() && sim.s_end.is_finite()) {
        return Err(CliError::Usage("simulate.step must be positive and simulate.s_end finite".into()));
    }
    let m0 = sim.m0;
    let proj = projectile_field(m0, sim.ux, sim.uy, sim.g);
    let initial = match (sim.initial, sim.model) {
        (Some(i), _) => PhaseState::new(0.0, FourVector(i.x), FourVector(i.p)),
        (None, ModelName::Projectile) => PhaseState::new(0.0, FourVector(proj.position(0.0)), proj.momentum(0.0)),
        (None, ModelName::Harmonic) => PhaseState::new(0.0, FourVector::new(0.0, 1.0, 0.0, 0.0), FourVector::ZERO),
        (None, ModelName::Covariant) => {
            let v: f64 = 0.5;
            let gamma = 1.0 / (1.0 - v * v).sqrt();
            PhaseState::new(0.0, FourVector::new(0.0, 1.0, 0.0, 0.0), FourVector::new(gamma, 0.0, gamma * v, 0.0) * m0)
        }
        (None, _) => PhaseState::new(0.0, FourVector::ZERO, FourVector::new(1.25, 0.75, 0.0, 0.0) * m0),
    };
    if !initial.is_finite() {
        return Err(CliError::Usage("simulate.initial must be finite".into()));
    }

    let mut diag = SimulateDiagnostics::default();
    let (model_name, rows, conventions) = if sim.model == ModelName::Covariant {
        let metric = sim.metric.build().map_err(|e| CliError::Usage(e.to_string()))?;
        let chart = sim.chart.build().map_err(|e| CliError::Usage(e.to_string()))?;
        let t = covariant_integrate(metric.as_ref(), chart.as_ref(), &CovariantModel::free(m0), initial, sim.s_end, sim.step)
            .map_err(|e| CliError::Failure(format!("integration failed: {e}")))?;
        let rows = covariant_rows(chart.as_ref(), &t.samples, &t.k)?;
        let dir = chart
            .vector_to_cartesian(&initial.x.0, &initial.p.0)
            .map_err(|e| CliError::Failure(e.to_string()))?;
        diag.straightness_residual = Some(straightness_residual(&t.cartesian, &chart.to_cartesian(&initial.x.0), &dir));
        diag.k_drift = Some(t.k_drift);
        (format!("covariant-{}", t.chart), rows, COVARIANT_CONVENTION)
    } else {
        let model: Box<dyn HamiltonianModel> = match sim.model {
            ModelName::Projectile => Box::new(ProjectileModel { m0, g: sim.g }),
            ModelName::Free => Box::new(FreeParticle { m0 }),
            ModelName::Quadratic => Box::new(Quadratic { m0 }),
            ModelName::Harmonic => Box::new(CustomModel::harmonic(sim.omega)),
            ModelName::Covariant => unreachable!(),
        };
        let t = integrate(model.as_ref(), initial, sim.s_end, sim.step, sim.method)
            .map_err(|e| CliError::Failure(format!("integration failed: {e}")))?;
        if sim.model == ModelName::Projectile && sim.initial.is_none() {
            let (mut dy, mut dx): (f64, f64) = (0.0, 0.0);
            for st in &t.samples {
                let exact = proj.position(st.s);
                dy = dy.max((st.x.0[2] - exact[2]).abs());
                dx = dx.max((st.x - FourVector(exact)).max_abs());
            }
            diag.closed_form_max_dy = Some(dy);
            diag.closed_form_max_position = Some(dx);
        }
        diag.energy_drift = Some(t.energy_drift);
        let rows: Vec<TrajectoryRow> = (0..t.len())
            .map(|i| TrajectoryRow {
                s: t.samples[i].s,
                x: t.samples[i].x.0,
                p: t.samples[i].p.0,
                h: t.h[i],
                dm_ds: t.dm_ds[i],
                comm_norm: t.comm_norm[i],
            })
            .collect();
        (t.model.clone(), rows, TETRAD_CONVENTION)
    };
    diag.samples = rows.len();
    diag.max_comm_norm = rows.iter().fold(0.0, |m, r| m.max(r.comm_norm));
    diag.max_dm_ds = rows.iter().fold(0.0, |m, r| m.max(r.dm_ds));

    prepare_dir(out)?;
    match format {
        Format::Csv => {
            let bytes = csv_bytes(&TRAJECTORY_HEADER, rows.iter().map(|r| r.flat()))?;
            write_atomic(out, "trajectory.csv", &bytes)?;
        }
        Format::Json => {
            write_atomic(out, "trajectory.json", &json_bytes(&rows)?)?;
        }
    }
    let sidecar = SimulateSidecar {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        model: model_name,
        columns: TRAJECTORY_HEADER,
        conventions,
        config: cfg,
        diagnostics: diag,
    };
    write_atomic(out, "trajectory.meta.json", &json_bytes(&sidecar)?)?;
    Ok(())
}

fn covariant_rows(
    chart: &dyn hjdirac::geometry::CoordinateChart,
    samples: &[PhaseState],
    k: &[f64],
) -> Result<Vec<TrajectoryRow>, CliError> {
    let rep = build_gamma_rep();
    let pc: Vec<FourVector> = samples
        .iter()
        .map(|s| chart.vector_to_cartesian(&s.x.0, &s.p.0).map(FourVector))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let n = samples.len();
    let one = C64::new(1.0, 0.0);
    Ok((0..n)
        .map(|i| {
            let pdot = if n < 2 {
                FourVector::ZERO
            } else {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (pc[b] - pc[a]) * (1.0 / (samples[b].s - samples[a].s))
            };
            TrajectoryRow {
                s: samples[i].s,
                x: samples[i].x.0,
                p: samples[i].p.0,
                h: k[i],
                dm_ds: ForceDiagnostic::from_force(pdot).dm_ds,
                comm_norm: operator_commutator(&rep, &pc[i], &pdot, one, one),
            }
        })
        .collect())
}

#[derive(Serialize)]
struct EnsembleReport<'a> {
    schema_version: u32,
    command: &'static str,
    passed: bool,
    max_standard_errors: f64,
    config: &'a RunConfig,
    moments: MomentReport,
    histogram_overflow: u64,
    occupancy: Option<OccupancySummary>,
}

#[derive(Serialize)]
struct OccupancySummary {
    statistics: hjdirac::stat_mech::Statistics,
    states: usize,
    z: f64,
}

const MOMENT_SE_LIMIT: f64 = 4.0;

pub fn ensemble(cfg: &RunConfig, out: &Path, format: Format) -> Result<bool, CliError> {
    let e = &cfg.ensemble;
    let ec = EnsembleConfig { n: e.n, m0: e.m0, temperature: e.temperature, kb: e.kb, seed: cfg.seed };
    ec.validate().map_err(|err| CliError::Usage(err.to_string()))?;
    if e.n < 2 || e.bins == 0 {
        return Err(CliError::Usage("ensemble.n must be at least 2 and ensemble.bins positive".into()));
    }
    let table: Option<PartitionTable> = match &e.occupancy {
        Some(o) => Some(
            partition_enumerate(&o.levels, o.particles, o.beta, o.statistics).map_err(|err| CliError::Usage(err.to_string()))?,
        ),
        None => None,
    };
    let sample = sample_mb(&ec).map_err(|err| CliError::Failure(err.to_string()))?;
    let moments = moment_report(&sample, &ec);
    let hist = speed_histogram(&sample, &ec, e.bins);
    let passed = moments.within(MOMENT_SE_LIMIT);

    prepare_dir(out)?;
    let hist_rows: Vec<_> = (0..hist.counts.len())
        .map(|i| (hist.edges[i], hist.edges[i + 1], hist.counts[i], hist.predicted[i]))
        .collect();
    let occ_rows: Option<Vec<_>> =
        table.as_ref().map(|t| t.states.iter().map(|s| (s.label(), s.energy, s.probability)).collect());
    match format {
        Format::Csv => {
            let rows = sample.v.iter().zip(&sample.eps).enumerate().map(|(i, (v, eps))| (i, v[0], v[1], v[2], *eps));
            write_atomic(out, "samples.csv", &csv_bytes(&SAMPLES_HEADER, rows)?)?;
            write_atomic(out, "histogram.csv", &csv_bytes(&HISTOGRAM_HEADER, &hist_rows)?)?;
            if let Some(rows) = &occ_rows {
                write_atomic(out, "occupancy.csv", &csv_bytes(&OCCUPANCY_HEADER, rows)?)?;
            }
        }
        Format::Json => {
            write_atomic(out, "samples.json", &json_bytes(&sample)?)?;
            write_atomic(out, "histogram.json", &json_bytes(&hist)?)?;
            if let Some(t) = &table {
                write_atomic(out, "occupancy.json", &json_bytes(t)?)?;
            }
        }
    }
    let report = EnsembleReport {
        schema_version: SCHEMA_VERSION,
        command: "ensemble",
        passed,
        max_standard_errors: MOMENT_SE_LIMIT,
        config: cfg,
        histogram_overflow: hist.overflow,
        occupancy: table.map(|t| OccupancySummary { statistics: t.statistics, states: t.states.len(), z: t.z }),
        moments,
    };
    write_atomic(out, "moments.json", &json_bytes(&report)?)?;
    Ok(passed)
}
