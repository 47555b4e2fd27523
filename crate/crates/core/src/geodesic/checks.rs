//! A-posteriori checks on solved paths.

use serde::{Deserialize, Serialize};

use super::grid::{time_profile, PathGrid};
use crate::error::Result;

/// Sandwich `0 ≤ φ̃ ≤ 2t(1−t)` with `φ̃ = φ − t(t−1)/2`, the potential
/// measured from the unit-speed time profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Check {
    pub pass: bool,
    /// `min φ̃` over interior time rows (both slacks vanish at t = 0, 1).
    pub lower_slack: f64,
    /// `min (2t(1−t) − φ̃)` over interior time rows.
    pub upper_slack: f64,
    pub violations: usize,
    /// Node `(i, j)` where the smaller slack is attained.
    pub worst_node: (usize, usize),
}

impl C0Check {
    pub fn min_slack(&self) -> f64 {
        self.lower_slack.min(self.upper_slack)
    }
}

pub fn shifted(grid: &PathGrid, i: usize, j: usize) -> f64 {
    grid.at(i, j) - time_profile(1.0, grid.t[j])
}

pub fn c0_bound_check(grid: &PathGrid, tol: f64) -> C0Check {
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut worst = (0, 0);
    let mut worst_slack = f64::INFINITY;
    let mut violations = 0;
    for j in 1..grid.spec.n_t - 1 {
        let t = grid.t[j];
        let h = 2.0 * t * (1.0 - t);
        for i in 0..grid.spec.n_rho {
            let v = shifted(grid, i, j);
            let (lo, up) = (v, h - v);
            lower = lower.min(lo);
            upper = upper.min(up);
            let m = lo.min(up);
            if m < worst_slack {
                worst_slack = m;
                worst = (i, j);
            }
            if m < -tol {
                violations += 1;
            }
        }
    }
    C0Check {
        pass: violations == 0,
        lower_slack: lower,
        upper_slack: upper,
        violations,
        worst_node: worst,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCheck {
    pub pass: bool,
    /// `max (φ_A − φ_B)` over interior time rows; the ordering holds when this is ≤ tol.
    pub worst_excess: f64,
    pub worst_node: (usize, usize),
    pub tol: f64,
}

/// Ordering `φ_A ≤ φ_B + tol` for `ε_A ≥ ε_B` on identical discretizations.
/// Arguments are swapped internally if `a` has the smaller ε.
pub fn comparison_check(a: &PathGrid, b: &PathGrid, tol: f64) -> Result<ComparisonCheck> {
    a.same_discretization(b)?;
    let (hi, lo) = if a.epsilon >= b.epsilon { (a, b) } else { (b, a) };
    let mut worst = f64::NEG_INFINITY;
    let mut node = (0, 0);
    for j in 1..hi.spec.n_t - 1 {
        for i in 0..hi.spec.n_rho {
            let d = hi.at(i, j) - lo.at(i, j);
            if d > worst {
                worst = d;
                node = (i, j);
            }
        }
    }
    Ok(ComparisonCheck {
        pass: worst <= tol,
        worst_excess: worst,
        worst_node: node,
        tol,
    })
}

/// Largest discrete second derivative of `Φ − u = (1−t)ψ₀ + tψ₁ + φ` in
/// (ρ, t), Euclidean entries, over unknown nodes away from ρ_min.
pub fn raw_hessian_sup(grid: &PathGrid) -> f64 {
    let s = grid.spec;
    let (hr, ht) = (s.h_rho(), s.h_t());
    let f = |i: usize, j: usize| grid.at(i, j) + grid.psi_lin(i, j)[0];
    let mut m: f64 = 0.0;
    for j in 1..s.n_t - 1 {
        for i in 1..s.n_rho - 1 {
            let c = f(i, j);
            let rr = (f(i + 1, j) - 2.0 * c + f(i - 1, j)) / (hr * hr);
            let tt = (f(i, j + 1) - 2.0 * c + f(i, j - 1)) / (ht * ht);
            let rt = (f(i + 1, j + 1) - f(i - 1, j + 1) - f(i + 1, j - 1) + f(i - 1, j - 1)) / (4.0 * hr * ht);
            m = m.max(rr.abs()).max(tt.abs()).max(rt.abs());
        }
    }
    m
}

/// Largest eigenvalue of the Hessian of Φ measured against
/// `Θ = u + (1−t)ψ₀ + tψ₁ + t(t−1)/2`, over unknown nodes away from ρ_min.
///
/// At each node this is the larger of the base ratio `w′/Θ′` and the top
/// generalized eigenvalue of the (ρ, t) block `[[w″, ∂_ρẇ], [∂_ρẇ, φ̈]]`
/// against `[[Θ″, ψ₁′−ψ₀′], [ψ₁′−ψ₀′, 1]]`.
pub fn hessian_sup(grid: &PathGrid) -> f64 {
    let s = grid.spec;
    let (hr, ht) = (s.h_rho(), s.h_t());
    let mut m: f64 = 0.0;
    for j in 1..s.n_t - 1 {
        for i in 1..s.n_rho - 1 {
            let c = grid.at(i, j);
            let d_r = (grid.at(i + 1, j) - grid.at(i - 1, j)) / (2.0 * hr);
            let d_rr = (grid.at(i + 1, j) - 2.0 * c + grid.at(i - 1, j)) / (hr * hr);
            let d_tt = (grid.at(i, j + 1) - 2.0 * c + grid.at(i, j - 1)) / (ht * ht);
            let d_rt = (grid.at(i + 1, j + 1) - grid.at(i - 1, j + 1) - grid.at(i + 1, j - 1)
                + grid.at(i - 1, j - 1))
                / (4.0 * hr * ht);
            let [u1, u2, ..] = grid.u_nodes[i];
            let [_, l1, l2] = grid.psi_lin(i, j);
            let q = grid.psi_diff_prime(i);
            let (t1, t2) = (u1 + l1, u2 + l2);
            let (h11, h12, h22) = (t2 + d_rr, q + d_rt, d_tt);
            // det(H − λΘ) = 0 with Θ = [[t2, q], [q, 1]].
            let a = t2 - q * q;
            let b = -(h11 + h22 * t2 - 2.0 * h12 * q);
            let cc = h11 * h22 - h12 * h12;
            let disc = (b * b - 4.0 * a * cc).max(0.0);
            let lam = (-b + disc.sqrt()) / (2.0 * a);
            m = m.max(lam).max((t1 + d_r) / t1);
        }
    }
    m
}

/// `sup |φ − s·t(t−1)/2|` over all nodes.
pub fn exact_deviation(grid: &PathGrid, s: f64) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..grid.spec.n_t {
        let c = time_profile(s, grid.t[j]);
        for i in 0..grid.spec.n_rho {
            m = m.max((grid.at(i, j) - c).abs());
        }
    }
    m
}

/// `|φ(ρ, t_j) − s·t_j(t_j−1)/2|` against `r = e^{ρ/2}` along one time row.
pub fn far_field_samples(grid: &PathGrid, s: f64, j: usize) -> Vec<(f64, f64)> {
    let c = time_profile(s, grid.t[j]);
    (0..grid.spec.n_rho)
        .map(|i| ((0.5 * grid.rho[i]).exp(), (grid.at(i, j) - c).abs()))
        .collect()
}
