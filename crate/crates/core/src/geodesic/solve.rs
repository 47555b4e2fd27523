use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::boundary::BoundaryData;
use super::checks::{c0_bound_check, C0Check};
use super::config::{SolverConfig, UpsilonMode};
use super::grid::{time_profile, PathGrid};
use super::residual::{log_system, relative_residual_sup, PositivityMargins};
use crate::error::{Error, Result};
use crate::geometry::RadialProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub s: f64,
    pub iterations: usize,
    /// Sup-norm of the log residual after each iteration, starting value first.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub epsilon: f64,
    pub upsilon_mode: UpsilonMode,
    /// Sup-norm of the log-form residual on the returned grid.
    pub log_residual: f64,
    /// `sup |G|/(υ·(u′)^{n−1}u″)`, recomputed independently of the Newton path.
    pub residual: f64,
    pub newton_tol: f64,
    pub stages: Vec<StageReport>,
    pub c0: C0Check,
    pub positivity: PositivityMargins,
    /// `max_t |φ(ρ, t) − c(t)|` on the last unknown column before ρ_max.
    pub truncation_estimate: f64,
    /// Fitted decay exponents of `ψ₀`, `ψ₁` (None when identically constant).
    pub boundary_decay: [Option<f64>; 2],
    /// Smallest `C` with `C^{−1}ε ≤ υ ≤ Cε` over the grid.
    pub upsilon_constant: f64,
    /// Not serialized, so reports of identical runs are byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.log_residual <= self.newton_tol
    }
}

/// Solve the reduced ε-geodesic equation between `psi0` and `psi1` over
/// `background`, following the continuity schedule of `config`.
pub fn solve_epsilon_geodesic(
    background: &RadialProfile,
    psi0: &BoundaryData,
    psi1: &BoundaryData,
    config: &SolverConfig,
) -> Result<(PathGrid, SolverReport)> {
    let start = Instant::now();
    config.validate()?;
    let stages = config.stages()?;
    let spec = config.grid;
    let decay = [
        psi0.check_decay(spec.rho_min, spec.rho_max, config.decay_gamma)?,
        psi1.check_decay(spec.rho_min, spec.rho_max, config.decay_gamma)?,
    ];
    let mut grid = PathGrid::new(spec, background.clone(), psi0.clone(), psi1.clone(), 1.0)?;
    check_endpoint_metrics(&grid)?;
    let mode = config.upsilon_mode;

    let mut reports = Vec::with_capacity(stages.len());
    let mut prev_s = 1.0;
    for (stage, &s) in stages.iter().enumerate() {
        if stage > 0 {
            warm_start(&mut grid, prev_s, s, mode);
        }
        grid.epsilon = s;
        let report = newton(&mut grid, s, stage, config)?;
        reports.push(report);
        prev_s = s;
    }

    let sys = log_system(&grid, config.epsilon, mode, false)?;
    let log_residual = sup(&sys.residual);
    let residual = relative_residual_sup(&grid, config.epsilon, mode)?;
    let c0 = c0_bound_check(&grid, config.c0_tol);
    let i_last = spec.n_rho - 2;
    let truncation_estimate = (0..spec.n_t)
        .map(|j| (grid.at(i_last, j) - time_profile(config.epsilon, grid.t[j])).abs())
        .fold(0.0, f64::max);
    let upsilon_constant = upsilon_constant(&grid, config.epsilon, mode);
    let report = SolverReport {
        epsilon: config.epsilon,
        upsilon_mode: mode,
        log_residual,
        residual,
        newton_tol: config.newton_tol,
        stages: reports,
        c0,
        positivity: sys.margins,
        truncation_estimate,
        boundary_decay: decay,
        upsilon_constant,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((grid, report))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Both endpoint metrics `u + ψ₀`, `u + ψ₁` must be positive on the grid, and
/// so must the time-fiber form of the initial guess.
fn check_endpoint_metrics(grid: &PathGrid) -> Result<()> {
    for (i, ([u1, u2, ..], (a, b))) in grid
        .u_nodes
        .iter()
        .zip(grid.psi0_nodes.iter().zip(&grid.psi1_nodes))
        .enumerate()
    {
        for (which, p) in [("ψ₀", a), ("ψ₁", b)] {
            if !(u1 + p[1] > 0.0 && u2 + p[2] > 0.0) {
                return Err(Error::BoundaryInconsistency(format!(
                    "metric of {which} is not positive at ρ = {}",
                    grid.rho[i]
                )));
            }
        }
    }
    Ok(())
}

/// Pick the admissible candidate with the smallest residual for stage `s`.
fn warm_start(grid: &mut PathGrid, prev: f64, s: f64, mode: UpsilonMode) {
    let base = grid.phi.clone();
    let spec = grid.spec;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for candidate in 0..3 {
        for j in 0..spec.n_t {
            let t = grid.t[j];
            for i in 0..spec.n_rho {
                let k = spec.node(i, j);
                grid.phi[k] = match candidate {
                    0 => base[k] * s / prev,
                    1 => base[k] + time_profile(s - prev, t),
                    _ => base[k],
                };
            }
        }
        grid.set_outer_boundary(s);
        if let Ok(sys) = log_system(grid, s, mode, false) {
            let r = l2(&sys.residual);
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                best = Some((r, grid.phi.clone()));
            }
        }
    }
    match best {
        Some((_, phi)) => grid.phi = phi,
        None => {
            grid.phi = base;
            grid.set_outer_boundary(s);
        }
    }
}

fn newton(grid: &mut PathGrid, s: f64, stage: usize, config: &SolverConfig) -> Result<StageReport> {
    let mode = config.upsilon_mode;
    let mut sys = log_system(grid, s, mode, true).map_err(|e| match e {
        Error::Positivity { .. } => Error::PositivityLoss { stage, s },
        e => e,
    })?;
    let mut history = vec![sup(&sys.residual)];
    for iter in 0..config.max_iters {
        let res = *history.last().unwrap();
        if res <= config.newton_tol {
            return Ok(StageReport {
                s,
                iterations: iter,
                history,
            });
        }
        let mut jac = sys.jacobian.take().expect("assembled with jacobian");
        jac.factor()?;
        let mut step: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
        jac.solve(&mut step);

        let x0 = grid.unknown_values();
        let merit = l2(&sys.residual);
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut positive_seen = false;
        for _ in 0..=config.max_backtracks {
            let trial: Vec<f64> = x0.iter().zip(&step).map(|(x, d)| x + alpha * d).collect();
            grid.set_unknown_values(&trial);
            match log_system(grid, s, mode, true) {
                Ok(next) => {
                    positive_seen = true;
                    if l2(&next.residual) <= (1.0 - 1e-4 * alpha) * merit {
                        accepted = Some(next);
                        break;
                    }
                }
                Err(Error::Positivity { .. }) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(next) => {
                sys = next;
                history.push(sup(&sys.residual));
            }
            None => {
                grid.set_unknown_values(&x0);
                return Err(if positive_seen {
                    Error::NonConvergence { stage, s, history }
                } else {
                    Error::PositivityLoss { stage, s }
                });
            }
        }
    }
    let res = *history.last().unwrap();
    if res <= config.newton_tol {
        let iterations = history.len() - 1;
        Ok(StageReport { s, iterations, history })
    } else {
        Err(Error::NonConvergence { stage, s, history })
    }
}

fn upsilon_constant(grid: &PathGrid, eps: f64, mode: UpsilonMode) -> f64 {
    let spec = grid.spec;
    let mut c: f64 = 1.0;
    for j in 1..spec.n_t - 1 {
        for i in 0..spec.n_rho - 1 {
            let u = mode.value(grid, eps, i, j);
            c = c.max(u / eps).max(eps / u);
        }
    }
    c
}
