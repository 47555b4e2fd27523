use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::analysis::{default_window, fit_decay_exponent, FitOutcome};
use crate::energy::{convexity_audit, energy_report};
use crate::error::{Error, Result};
use crate::geodesic::{exact_deviation, far_field_samples, hessian_sup, solve_epsilon_geodesic, BoundaryData, PathGrid};
use crate::toric::{intersection_report, IntersectionReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    fn at_most(value: f64, threshold: f64) -> Self {
        Self {
            pass: value <= threshold,
            value,
            threshold,
        }
    }

    fn at_least(value: f64, threshold: f64) -> Self {
        Self {
            pass: value >= threshold,
            value,
            threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_id: String,
    pub scenario_hash: String,
    pub input: serde_json::Value,
    /// Paths relative to the scenario directory.
    pub artifacts: BTreeMap<String, String>,
    pub checks: BTreeMap<String, Check>,
    pub metrics: BTreeMap<String, f64>,
    pub status: RunStatus,
}

impl RunManifest {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn passed(&self) -> bool {
        self.completed() && self.checks.values().all(|c| c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub use_cache: bool,
}

#[derive(Debug, thiserror::Error)]
#[error("scenario `{id}`: {source}")]
pub struct ScenarioError {
    pub id: String,
    #[source]
    pub source: Error,
}

impl ScenarioError {
    pub fn is_validation(&self) -> bool {
        self.source.is_validation()
    }
}

pub fn scenario_dir(s: &Scenario, opts: &RunOptions) -> PathBuf {
    s.output_dir.clone().unwrap_or_else(|| opts.out.clone()).join(&s.id)
}

/// Solve, run the requested analyses and write artifacts into
/// `<out>/<id>/`. A previous completed run with the same content hash is
/// reused unless caching is disabled.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> std::result::Result<RunManifest, ScenarioError> {
    run_with_grid(s, opts).map(|(m, _)| m)
}

pub(crate) fn run_with_grid(
    s: &Scenario,
    opts: &RunOptions,
) -> std::result::Result<(RunManifest, PathGrid), ScenarioError> {
    let wrap = |source| ScenarioError { id: s.id.clone(), source };
    s.validate().map_err(wrap)?;
    let dir = scenario_dir(s, opts);
    let hash = s.content_hash();
    if opts.use_cache {
        if let Some(hit) = cached(s, &dir, &hash) {
            return Ok(hit);
        }
    }
    fs::create_dir_all(&dir).map_err(|e| wrap(e.into()))?;
    let mut m = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        scenario_id: s.id.clone(),
        scenario_hash: hash,
        input: serde_json::to_value(s).expect("scenario serializes"),
        artifacts: BTreeMap::new(),
        checks: BTreeMap::new(),
        metrics: BTreeMap::new(),
        status: RunStatus::Completed,
    };
    let outcome = execute(s, &dir, &mut m);
    if let Err(e) = &outcome {
        m.status = RunStatus::Failed { error: e.to_string() };
    }
    write_json(&dir.join("manifest.json"), &m).map_err(wrap)?;
    outcome.map(|g| (m, g)).map_err(wrap)
}

fn cached(s: &Scenario, dir: &Path, hash: &str) -> Option<(RunManifest, PathGrid)> {
    let text = fs::read_to_string(dir.join("manifest.json")).ok()?;
    let m: RunManifest = serde_json::from_str(&text).ok()?;
    if m.scenario_hash != hash || !m.completed() || m.tool_version != TOOL_VERSION {
        return None;
    }
    if !m.artifacts.values().all(|p| dir.join(p).is_file()) {
        return None;
    }
    let c = &s.config;
    let mut g = PathGrid::new(c.grid, c.background().ok()?, c.psi0.clone(), c.psi1.clone(), c.epsilon).ok()?;
    g.read_phi_csv(fs::File::open(dir.join("grid.csv")).ok()?).ok()?;
    Some((m, g))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn artifact(m: &mut RunManifest, dir: &Path, name: &str, file: &str) -> PathBuf {
    m.artifacts.insert(name.to_string(), file.to_string());
    dir.join(file)
}

fn execute(s: &Scenario, dir: &Path, m: &mut RunManifest) -> Result<PathGrid> {
    let c = &s.config;
    let tol = &c.tolerances;
    let bg = c.background()?;
    let (grid, report) = solve_epsilon_geodesic(&bg, &c.psi0, &c.psi1, &c.solver_config())?;

    let path = artifact(m, dir, "grid", "grid.csv");
    grid.write_csv(fs::File::create(path)?)?;
    let path = artifact(m, dir, "solver_report", "solver_report.json");
    write_json(&path, &report)?;

    m.checks.insert("converged".into(), Check::at_most(report.log_residual, report.newton_tol));
    m.metrics.insert("residual".into(), report.residual);
    m.metrics.insert("hessian_sup".into(), hessian_sup(&grid));
    m.metrics.insert("truncation_estimate".into(), report.truncation_estimate);
    let iterations: usize = report.stages.iter().map(|st| st.iterations).sum();
    m.metrics.insert("newton_iterations".into(), iterations as f64);
    if s.analyses.c0_check {
        m.checks.insert("c0".into(), Check::at_least(report.c0.min_slack(), -tol.c0));
    }
    if c.psi0 == BoundaryData::Zero && c.psi1 == BoundaryData::Zero {
        m.checks.insert("exact".into(), Check::at_most(exact_deviation(&grid, c.epsilon), tol.exact));
    }

    if s.analyses.decay {
        let j = (c.grid.n_t - 1) / 2;
        let samples = far_field_samples(&grid, c.epsilon, j);
        let r_max = (0.5 * c.grid.rho_max).exp();
        let outcome = fit_decay_exponent(&samples, default_window(r_max))?;
        let gamma = report.boundary_decay.iter().flatten().map(|e| -e).reduce(f64::min);
        let outcome = match (outcome, gamma) {
            (FitOutcome::Fit(f), Some(g)) => {
                let f = f.with_prediction(-g);
                m.checks.insert("decay".into(), Check::at_most(f.exponent, -g + tol.decay_margin));
                FitOutcome::Fit(f)
            }
            (o, _) => o,
        };
        let path = artifact(m, dir, "decay", "decay.json");
        write_json(&path, &outcome)?;
    }

    if s.analyses.energy {
        let rep = energy_report(&grid, c.epsilon)?;
        let path = artifact(m, dir, "energy", "energy.json");
        write_json(&path, &rep)?;
        let path = artifact(m, dir, "energy_csv", "energy.csv");
        rep.write_csv(fs::File::create(path)?)?;
        m.checks.insert("identity".into(), Check::at_most(rep.identity_defect, tol.identity));
        m.checks.insert("energy_fd".into(), Check::at_most(rep.fd_mismatch, tol.fd));
        let audit = convexity_audit(std::slice::from_ref(&grid), tol.convexity)?;
        let worst = audit.rows.iter().map(|r| r.min_d2k_dt2).fold(f64::INFINITY, f64::min);
        m.checks.insert("convexity".into(), Check::at_least(worst, -tol.convexity));
    }

    if s.analyses.intersections {
        let rep = intersection_report(c.n, c.k, c.n <= 3)?;
        let path = artifact(m, dir, "intersections", "intersections.json");
        write_json(&path, &rep)?;
        let sound = rep.certificate.opposite_signs == (c.k != c.n);
        m.checks.insert("certificate".into(), Check::at_least(f64::from(u8::from(sound)), 1.0));
        if rep.oracle.is_some() {
            m.checks.insert("oracle".into(), Check::at_most(oracle_mismatch(&rep), tol.oracle));
        }
    }
    Ok(grid)
}

/// Largest relative gap between calibrated oracle values and the exact table.
pub fn oracle_mismatch(rep: &IntersectionReport) -> f64 {
    let Some(o) = &rep.oracle else { return 0.0 };
    let pairs = [
        (o.power.value, rep.numbers.d0_power),
        (o.power_fiber.value, rep.numbers.d0_power_fiber),
        (o.restricted_zero.value, rep.numbers.d0_power),
    ];
    pairs
        .iter()
        .map(|&(v, e)| (o.calibration * v - e as f64).abs() / (e as f64).abs().max(1.0))
        .fold(0.0, f64::max)
}
