//! The reduced ε-geodesic operator.
//!
//! With `w = u + (1−t)ψ₀ + tψ₁ + φ` the equation at stage `s` reads
//! `(φ̈·w″ − (∂_ρẇ)²)(w′)^{n−1} = υ·(u′)^{n−1}u″`. Newton works on its
//! logarithm; [`reduced_residual`] evaluates the polynomial form on its own
//! stencil code so the two can certify each other.

use serde::{Deserialize, Serialize};

use super::config::UpsilonMode;
use super::grid::PathGrid;
use crate::banded::BandMatrix;
use crate::error::{Error, Result};

/// `(u′)^{n−1}u″` at ρ node `i`.
pub fn reference_density(grid: &PathGrid, i: usize) -> f64 {
    let [u1, u2, ..] = grid.u_nodes[i];
    u1.powi(grid.background.n as i32 - 1) * u2
}

/// `G[φ]` on the unknown nodes, in solver ordering.
pub fn reduced_residual(grid: &PathGrid, epsilon: f64, mode: UpsilonMode) -> Result<Vec<f64>> {
    let s = grid.spec;
    let n = grid.background.n as i32;
    let (hr, ht) = (s.h_rho(), s.h_t());
    // Mirror across ρ_min for the Neumann condition.
    let val = |i: isize, j: usize| grid.at(i.unsigned_abs(), j);
    let mut out = vec![0.0; s.unknowns()];
    for j in 1..s.n_t - 1 {
        for i in 0..s.n_rho - 1 {
            let ii = i as isize;
            let c = val(ii, j);
            let d_r = (val(ii + 1, j) - val(ii - 1, j)) / (2.0 * hr);
            let d_rr = (val(ii + 1, j) - 2.0 * c + val(ii - 1, j)) / (hr * hr);
            let d_tt = (val(ii, j + 1) - 2.0 * c + val(ii, j - 1)) / (ht * ht);
            let d_rt = (val(ii + 1, j + 1) - val(ii - 1, j + 1) - val(ii + 1, j - 1) + val(ii - 1, j - 1))
                / (4.0 * hr * ht);
            let [u1, u2, ..] = grid.u_nodes[i];
            let [_, l1, l2] = grid.psi_lin(i, j);
            let w1 = u1 + l1 + d_r;
            let w2 = u2 + l2 + d_rr;
            let v1 = grid.psi_diff_prime(i) + d_rt;
            for (what, value) in [("w'", w1), ("w''", w2)] {
                if !(value > 0.0) {
                    return Err(Error::Positivity { i, j, what, value });
                }
            }
            let det = d_tt * w2 - v1 * v1;
            let rhs = mode.rhs(grid, epsilon, i, j);
            out[s.unknown(i, j)] = det * w1.powi(n - 1) - rhs;
        }
    }
    Ok(out)
}

/// `sup |G| / (υ·(u′)^{n−1}u″)`: the residual relative to the right-hand side.
pub fn relative_residual_sup(grid: &PathGrid, epsilon: f64, mode: UpsilonMode) -> Result<f64> {
    let g = reduced_residual(grid, epsilon, mode)?;
    let s = grid.spec;
    let mut sup: f64 = 0.0;
    for j in 1..s.n_t - 1 {
        for i in 0..s.n_rho - 1 {
            let rhs = mode.rhs(grid, epsilon, i, j);
            sup = sup.max((g[s.unknown(i, j)] / rhs).abs());
        }
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityMargins {
    pub min_w_prime: f64,
    pub min_w_second: f64,
    /// Smallest `φ̈·w″ − (∂_ρẇ)²`.
    pub min_time_fiber: f64,
}

/// Log-form residual and its Jacobian at stage `s`.
pub(crate) struct LogSystem {
    pub residual: Vec<f64>,
    pub jacobian: Option<BandMatrix>,
    pub margins: PositivityMargins,
}

/// Weights of the ρ-stencils at row `i`: (offset, d/dρ weight, d²/dρ² weight).
/// Row 0 folds the mirror node into its neighbour.
fn rho_stencil(i: usize, hr: f64) -> [(isize, f64, f64); 3] {
    let h2 = hr * hr;
    if i == 0 {
        [(-1, 0.0, 0.0), (0, 0.0, -2.0 / h2), (1, 0.0, 2.0 / h2)]
    } else {
        [
            (-1, -0.5 / hr, 1.0 / h2),
            (0, 0.0, -2.0 / h2),
            (1, 0.5 / hr, 1.0 / h2),
        ]
    }
}

pub(crate) fn log_system(grid: &PathGrid, s: f64, mode: UpsilonMode, jacobian: bool) -> Result<LogSystem> {
    let spec = grid.spec;
    let n = grid.background.n as f64;
    let (hr, ht) = (spec.h_rho(), spec.h_t());
    let nr = spec.n_rho;
    let mut residual = vec![0.0; spec.unknowns()];
    let band = nr;
    let mut jac = jacobian.then(|| BandMatrix::zeros(spec.unknowns(), band, band));
    let mut margins = PositivityMargins {
        min_w_prime: f64::INFINITY,
        min_w_second: f64::INFINITY,
        min_time_fiber: f64::INFINITY,
    };
    for j in 1..spec.n_t - 1 {
        for i in 0..nr - 1 {
            let st = rho_stencil(i, hr);
            let col = |off: isize| (i as isize + off) as usize;
            let mut d_r = 0.0;
            let mut d_rr = 0.0;
            for &(off, a, b) in &st {
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                let v = grid.at(col(off), j);
                d_r += a * v;
                d_rr += b * v;
            }
            let c = grid.at(i, j);
            let d_tt = (grid.at(i, j + 1) - 2.0 * c + grid.at(i, j - 1)) / (ht * ht);
            let d_rt = if i == 0 {
                0.0
            } else {
                (grid.at(i + 1, j + 1) - grid.at(i - 1, j + 1) - grid.at(i + 1, j - 1) + grid.at(i - 1, j - 1))
                    / (4.0 * hr * ht)
            };
            let [u1, u2, ..] = grid.u_nodes[i];
            let [_, l1, l2] = grid.psi_lin(i, j);
            let w1 = u1 + l1 + d_r;
            let w2 = u2 + l2 + d_rr;
            let v1 = grid.psi_diff_prime(i) + d_rt;
            let det = d_tt * w2 - v1 * v1;
            margins.min_w_prime = margins.min_w_prime.min(w1);
            margins.min_w_second = margins.min_w_second.min(w2);
            margins.min_time_fiber = margins.min_time_fiber.min(det);
            for (what, value) in [("w'", w1), ("w''", w2), ("time-fiber determinant", det)] {
                if !(value > 0.0) {
                    return Err(Error::Positivity { i, j, what, value });
                }
            }
            let rhs = mode.rhs(grid, s, i, j);
            let row = spec.unknown(i, j);
            residual[row] = det.ln() + (n - 1.0) * w1.ln() - rhs.ln();

            if let Some(m) = jac.as_mut() {
                let p_tt = w2 / det;
                let p_rr = d_tt / det;
                let p_rt = -2.0 * v1 / det;
                let p_r = (n - 1.0) / w1;
                let mut put = |ii: usize, jj: usize, v: f64| {
                    if ii < nr - 1 && jj >= 1 && jj < spec.n_t - 1 && v != 0.0 {
                        m.add(row, spec.unknown(ii, jj), v);
                    }
                };
                for &(off, a, b) in &st {
                    put(col(off).min(nr), j, p_r * a + p_rr * b);
                }
                put(i, j, -2.0 * p_tt / (ht * ht));
                put(i, j - 1, p_tt / (ht * ht));
                put(i, j + 1, p_tt / (ht * ht));
                if i > 0 {
                    let q = p_rt / (4.0 * hr * ht);
                    put(i + 1, j + 1, q);
                    put(i - 1, j - 1, q);
                    put(i + 1, j - 1, -q);
                    put(i - 1, j + 1, -q);
                }
            }
        }
    }
    Ok(LogSystem {
        residual,
        jacobian: jac,
        margins,
    })
}
