use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, PathGrid};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonMode {
    /// `υ = s`.
    #[default]
    Constant,
    /// `υ = s((1−χ(s))f + χ(s))` with `f` the volume ratio of the reference
    /// metric against the path metric at `φ = 0`.
    ProfileWeighted,
}

/// Smoothstep cutoff: 0 on [0, ⅓], 1 on [⅔, 1].
pub fn chi(s: f64) -> f64 {
    let x = ((s - 1.0 / 3.0) * 3.0).clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

impl UpsilonMode {
    /// υ at node `(i, j)` for stage parameter `s`.
    pub fn value(self, grid: &PathGrid, s: f64, i: usize, j: usize) -> f64 {
        match self {
            UpsilonMode::Constant => s,
            UpsilonMode::ProfileWeighted => {
                let c = chi(s);
                s * ((1.0 - c) * volume_ratio(grid, i, j) + c)
            }
        }
    }

    /// Right-hand side density at node `(i, j)`. Profile-weighted mode
    /// measures `υ` against the path volume `(u′)^{n−1}u″ / f`, so the linear
    /// path solves the `s = 1` equation exactly.
    pub fn rhs(self, grid: &PathGrid, s: f64, i: usize, j: usize) -> f64 {
        let reference = super::residual::reference_density(grid, i);
        match self {
            UpsilonMode::Constant => s * reference,
            UpsilonMode::ProfileWeighted => self.value(grid, s, i, j) * reference / volume_ratio(grid, i, j),
        }
    }
}

/// `(u′)^{n−1}u″ / [(w″ − (ψ₁′−ψ₀′)²)(w′)^{n−1}]` for `w = u + (1−t)ψ₀ + tψ₁`.
pub fn volume_ratio(grid: &PathGrid, i: usize, j: usize) -> f64 {
    let n = grid.background.n as i32;
    let [u1, u2, ..] = grid.u_nodes[i];
    let [_, l1, l2] = grid.psi_lin(i, j);
    let v = grid.psi_diff_prime(i);
    let w1 = u1 + l1;
    let w2 = u2 + l2;
    u1.powi(n - 1) * u2 / ((w2 - v * v) * w1.powi(n - 1))
}

fn default_tol() -> f64 {
    1e-10
}
fn default_iters() -> usize {
    60
}
fn default_backtracks() -> usize {
    40
}
fn default_gamma() -> f64 {
    1.0
}
fn default_c0_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub upsilon_mode: UpsilonMode,
    /// Stage values from 1 down to `epsilon`; geometric with ratio ½ if omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    pub grid: GridSpec,
    /// Sup-norm tolerance on the log-form residual.
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    /// Maximum halvings of the Newton step.
    #[serde(default = "default_backtracks")]
    pub max_backtracks: usize,
    /// Required decay exponent of the boundary data in r.
    #[serde(default = "default_gamma")]
    pub decay_gamma: f64,
    #[serde(default = "default_c0_tol")]
    pub c0_tol: f64,
}

impl SolverConfig {
    pub fn new(epsilon: f64, grid: GridSpec) -> Self {
        Self {
            epsilon,
            upsilon_mode: UpsilonMode::Constant,
            schedule: None,
            grid,
            newton_tol: default_tol(),
            max_iters: default_iters(),
            max_backtracks: default_backtracks(),
            decay_gamma: default_gamma(),
            c0_tol: default_c0_tol(),
        }
    }

    pub fn stages(&self) -> Result<Vec<f64>> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(invalid("epsilon", format!("must lie in (0, 1], got {eps}")));
        }
        let stages = match &self.schedule {
            Some(s) => s.clone(),
            None => {
                let mut v = vec![1.0];
                let mut s = 0.5;
                while s > eps * (1.0 + 1e-12) {
                    v.push(s);
                    s *= 0.5;
                }
                if *v.last().unwrap() != eps {
                    v.push(eps);
                }
                v
            }
        };
        if stages.first() != Some(&1.0) {
            return Err(invalid("schedule", "must start at 1"));
        }
        if stages.last() != Some(&eps) {
            return Err(invalid("schedule", format!("must end at epsilon = {eps}")));
        }
        if stages.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("schedule", "must be strictly decreasing"));
        }
        Ok(stages)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.stages()?;
        if !(self.newton_tol > 0.0) {
            return Err(invalid("newton_tol", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec {
            n_rho: 9,
            n_t: 9,
            rho_min: 0.0,
            rho_max: 4.0,
        }
    }

    #[test]
    fn default_schedule_is_geometric() {
        assert_eq!(SolverConfig::new(0.1, grid()).stages().unwrap(), vec![1.0, 0.5, 0.25, 0.125, 0.1]);
        assert_eq!(SolverConfig::new(0.25, grid()).stages().unwrap(), vec![1.0, 0.5, 0.25]);
        assert_eq!(SolverConfig::new(1.0, grid()).stages().unwrap(), vec![1.0]);
    }

    #[test]
    fn rejects_bad_schedules() {
        let mut c = SolverConfig::new(0.25, grid());
        c.schedule = Some(vec![1.0, 0.25, 0.5, 0.25]);
        assert!(c.stages().is_err());
        c.schedule = Some(vec![0.5, 0.25]);
        assert!(c.stages().is_err());
        assert!(SolverConfig::new(0.0, grid()).stages().is_err());
    }

    #[test]
    fn chi_is_a_smoothstep() {
        assert_eq!(chi(0.2), 0.0);
        assert_eq!(chi(0.8), 1.0);
        assert!((chi(0.5) - 0.5).abs() < 1e-15);
    }
}
