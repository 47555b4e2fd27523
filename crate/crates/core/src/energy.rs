//! Mabuchi K-energy along radial paths.
//!
//! All integrals are over ρ with the measure `dV = (w′)^{n−1}w″ dρ`; the
//! volume of the link `S^{2n−1}/Z_k` is a common factor and is dropped. With
//! `P = (w′)^{n−1}` and `F_w = log(P w″) − nρ`, the scalar curvature (Kähler
//! trace) satisfies `R·P w″ = −(P F_w′)′`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{relative_residual_sup, PathGrid, UpsilonMode};
use crate::geometry::{ricci_sign_scan, RicciSign, Witness};
use crate::quadrature::{mirrored_derivative, sbp_derivative, simpson, trapezoid_weights, Parity};

/// Largest relative equation residual for which the on-shell identity is used.
pub const CERTIFICATE_TOL: f64 = 1e-8;

/// Fields of one time slice on the ρ nodes.
struct Slice {
    w1: Vec<f64>,
    w2: Vec<f64>,
    p: Vec<f64>,
    vol: Vec<f64>,
    /// `ẇ = ψ₁ − ψ₀ + φ̇`.
    v: Vec<f64>,
}

fn rho_derivatives(grid: &PathGrid, j: usize) -> (Vec<f64>, Vec<f64>) {
    let s = grid.spec;
    let n = s.n_rho;
    let h = s.h_rho();
    let f = |i: usize| grid.at(i, j);
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    // Mirror symmetry at ρ_min, one-sided second order at ρ_max.
    d2[0] = 2.0 * (f(1) - f(0)) / (h * h);
    for i in 1..n - 1 {
        d1[i] = (f(i + 1) - f(i - 1)) / (2.0 * h);
        d2[i] = (f(i + 1) - 2.0 * f(i) + f(i - 1)) / (h * h);
    }
    let m = n - 1;
    d1[m] = (3.0 * f(m) - 4.0 * f(m - 1) + f(m - 2)) / (2.0 * h);
    d2[m] = (2.0 * f(m) - 5.0 * f(m - 1) + 4.0 * f(m - 2) - f(m - 3)) / (h * h);
    (d1, d2)
}

fn time_derivative(grid: &PathGrid, i: usize, j: usize) -> f64 {
    let nt = grid.spec.n_t;
    let ht = grid.spec.h_t();
    let f = |j: usize| grid.at(i, j);
    if j == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * ht)
    } else if j == nt - 1 {
        (3.0 * f(j) - 4.0 * f(j - 1) + f(j - 2)) / (2.0 * ht)
    } else {
        (f(j + 1) - f(j - 1)) / (2.0 * ht)
    }
}

fn slice(grid: &PathGrid, j: usize) -> Result<Slice> {
    let n = grid.background.n as i32;
    let (d1, d2) = rho_derivatives(grid, j);
    let count = grid.spec.n_rho;
    let mut out = Slice {
        w1: Vec::with_capacity(count),
        w2: Vec::with_capacity(count),
        p: Vec::with_capacity(count),
        vol: Vec::with_capacity(count),
        v: Vec::with_capacity(count),
    };
    for i in 0..count {
        let [u1, u2, ..] = grid.u_nodes[i];
        let [_, l1, l2] = grid.psi_lin(i, j);
        let w1 = u1 + l1 + d1[i];
        let w2 = u2 + l2 + d2[i];
        for (what, value) in [("w'", w1), ("w''", w2)] {
            if !(value > 0.0) {
                return Err(Error::Positivity { i, j, what, value });
            }
        }
        let p = w1.powi(n - 1);
        out.w1.push(w1);
        out.w2.push(w2);
        out.p.push(p);
        out.vol.push(p * w2);
        out.v.push(grid.psi_diff(i) + time_derivative(grid, i, j));
    }
    Ok(out)
}

fn even(values: &[f64], h: f64) -> Vec<f64> {
    mirrored_derivative(values, h, Parity::Even)
}

fn odd(values: &[f64], h: f64) -> Vec<f64> {
    mirrored_derivative(values, h, Parity::Odd)
}

/// `−R·V` on the ρ nodes. The ρ_min node is a reflection plane, as in the
/// solver's Neumann condition; scalar fields are even across it.
fn neg_scalar_density(grid: &PathGrid, sl: &Slice) -> Vec<f64> {
    let h = grid.spec.h_rho();
    let n = grid.background.n as f64;
    let fw: Vec<f64> = sl.vol.iter().zip(&grid.rho).map(|(v, r)| v.ln() - n * r).collect();
    let dfw = even(&fw, h);
    let flux: Vec<f64> = sl.p.iter().zip(&dfw).map(|(p, d)| p * d).collect();
    odd(&flux, h)
}

fn dot_h(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// `dK/dt` at time node `j` on the summation-by-parts discretization shared
/// with [`k_energy_second_derivative`].
pub fn k_energy_first_variation_sbp(grid: &PathGrid, j: usize) -> Result<f64> {
    let sl = slice(grid, j)?;
    let h = trapezoid_weights(grid.spec.n_rho, grid.spec.h_rho());
    Ok(dot_h(&h, &sl.v, &neg_scalar_density(grid, &sl)))
}

/// `dK/dt = −∫ ẇ R(ω_φ) dV` at time node `j`, with the scalar curvature
/// evaluated pointwise from analytic background and boundary-data derivatives
/// (finite differences only for φ), integrated by composite Simpson.
pub fn k_energy_first_variation(grid: &PathGrid, j: usize) -> Result<f64> {
    let s = grid.spec;
    let n = grid.background.n as f64;
    let h = s.h_rho();
    let sl = slice(grid, j)?;
    let (_, d2) = rho_derivatives(grid, j);
    // φ‴ and φ⁗ from differences of φ″.
    let d3 = sbp_derivative(&d2, h);
    let mut d4 = vec![0.0; s.n_rho];
    for i in 1..s.n_rho - 1 {
        d4[i] = (d2[i + 1] - 2.0 * d2[i] + d2[i - 1]) / (h * h);
    }
    d4[0] = 2.0 * (d2[1] - d2[0]) / (h * h);
    d4[s.n_rho - 1] = d4[s.n_rho - 2];
    let t = grid.t[j];
    let integrand: Vec<f64> = (0..s.n_rho)
        .map(|i| {
            let rho = grid.rho[i];
            let [_, _, u3, u4] = grid.u_nodes[i];
            let a = grid.psi0.derivatives(rho, s.rho_min);
            let b = grid.psi1.derivatives(rho, s.rho_min);
            let l3 = (1.0 - t) * a[3] + t * b[3];
            let l4 = (1.0 - t) * a[4] + t * b[4];
            let (w1, w2) = (sl.w1[i], sl.w2[i]);
            let w3 = u3 + l3 + d3[i];
            let w4 = u4 + l4 + d4[i];
            let f1 = (n - 1.0) * w2 / w1 + w3 / w2 - n;
            let f2 = (n - 1.0) * (w3 / w1 - w2 * w2 / (w1 * w1)) + w4 / w2 - w3 * w3 / (w2 * w2);
            let dp = (n - 1.0) * w1.powf(n - 2.0) * w2;
            // −ẇ·R·V = ẇ·(P F′)′
            sl.v[i] * (dp * f1 + sl.p[i] * f2)
        })
        .collect();
    Ok(simpson(&integrand, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub t: f64,
    /// `∫|𝒟ẇ|² dV`.
    pub lich: f64,
    /// `−∫ f·tr_{ω_φ}Ric(ω) dV`.
    pub ricci: f64,
    /// `∫|∇f|²/f dV`.
    pub grad: f64,
    /// Boundary term `f P (log f)′` at ρ_max.
    pub flux: f64,
    /// `∫|𝒟ẇ|² dV − ∫ f R(ω_φ) dV` with `f = ε ωⁿ/ω_φⁿ`.
    pub total: f64,
}

impl Decomposition {
    /// `total − (lich + ricci + grad)`.
    pub fn defect(&self) -> f64 {
        self.total - (self.lich + self.ricci + self.grad)
    }
}

fn decomposition(grid: &PathGrid, j: usize, epsilon: f64) -> Result<Decomposition> {
    let h = grid.spec.h_rho();
    let n = grid.background.n as f64;
    let wts = trapezoid_weights(grid.spec.n_rho, h);
    let sl = slice(grid, j)?;
    let refd: Vec<f64> = (0..grid.spec.n_rho)
        .map(|i| crate::geodesic::reference_density(grid, i))
        .collect();
    let f: Vec<f64> = refd.iter().zip(&sl.vol).map(|(r, v)| epsilon * r / v).collect();

    let dv = even(&sl.v, h);
    let hv: Vec<f64> = dv.iter().zip(&sl.w2).map(|(d, w)| d / w).collect();
    let dh = odd(&hv, h);
    let lich = dot_h(&wts, &dh, &dh.iter().zip(&sl.vol).map(|(d, v)| d * v).collect::<Vec<_>>());

    let fu: Vec<f64> = refd.iter().zip(&grid.rho).map(|(r, rho)| r.ln() - n * rho).collect();
    let dfu = even(&fu, h);
    let pu: Vec<f64> = sl.p.iter().zip(&dfu).map(|(p, d)| p * d).collect();
    let ricci = dot_h(&wts, &f, &odd(&pu, h));

    let logf: Vec<f64> = f.iter().map(|x| x.ln()).collect();
    let dlogf = even(&logf, h);
    let df = even(&f, h);
    let pl: Vec<f64> = sl.p.iter().zip(&dlogf).map(|(p, d)| p * d).collect();
    let grad = dot_h(&wts, &df, &pl);
    // Only the outer end contributes; the reflection plane carries no flux.
    let m = f.len() - 1;
    let flux = f[m] * pl[m];

    let total = lich + dot_h(&wts, &f, &neg_scalar_density(grid, &sl));
    Ok(Decomposition {
        t: grid.t[j],
        lich,
        ricci,
        grad,
        flux,
        total,
    })
}

/// Second derivative of the K-energy at time node `j` of a solved path, split
/// into its three terms. Refuses grids that do not solve the equation at
/// `epsilon` (the split substitutes the equation).
pub fn k_energy_second_derivative(grid: &PathGrid, j: usize, epsilon: f64) -> Result<Decomposition> {
    let res = relative_residual_sup(grid, epsilon, UpsilonMode::Constant)?;
    if !(res <= CERTIFICATE_TOL) {
        return Err(Error::Hypothesis(format!(
            "grid does not solve the equation at ε = {epsilon} (relative residual {res:.2e})"
        )));
    }
    decomposition(grid, j, epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub epsilon: f64,
    pub t_samples: Vec<f64>,
    /// K relative to t = 0, by trapezoid integration of `dk_dt`.
    pub k_values: Vec<f64>,
    pub dk_dt: Vec<f64>,
    /// Formula route; `None` at t = 0, 1.
    pub d2k_dt2_formula: Vec<Option<f64>>,
    /// Centered second difference of `k_values`; `None` at t = 0, 1.
    pub d2k_dt2_fd: Vec<Option<f64>>,
    pub decomposition: Vec<Option<Decomposition>>,
    /// Largest `|defect|/(|lich| + |ricci| + |grad|)` over interior t.
    pub identity_defect: f64,
    /// Largest `|formula − fd|/|formula|` over interior t.
    pub fd_mismatch: f64,
    pub min_d2k_dt2: f64,
}

/// Energy along a solved path: first variation at every time node and the
/// decomposed second variation at interior nodes.
pub fn energy_report(grid: &PathGrid, epsilon: f64) -> Result<EnergyReport> {
    let n = grid.background.n as f64;
    let gamma = 2.0 * n - 4.0;
    for psi in [&grid.psi0, &grid.psi1] {
        psi.check_decay(grid.spec.rho_min, grid.spec.rho_max, gamma)?;
    }
    let nt = grid.spec.n_t;
    let ht = grid.spec.h_t();
    let dk = (0..nt)
        .map(|j| k_energy_first_variation_sbp(grid, j))
        .collect::<Result<Vec<_>>>()?;
    let mut k = vec![0.0; nt];
    for j in 1..nt {
        k[j] = k[j - 1] + 0.5 * ht * (dk[j - 1] + dk[j]);
    }
    let mut formula = vec![None; nt];
    let mut fd = vec![None; nt];
    let mut parts = vec![None; nt];
    let mut identity_defect: f64 = 0.0;
    let mut fd_mismatch: f64 = 0.0;
    let mut min_d2k = f64::INFINITY;
    for j in 1..nt - 1 {
        let d = k_energy_second_derivative(grid, j, epsilon)?;
        let second = (k[j + 1] - 2.0 * k[j] + k[j - 1]) / (ht * ht);
        let scale = d.lich.abs() + d.ricci.abs() + d.grad.abs();
        if scale > 0.0 {
            identity_defect = identity_defect.max(d.defect().abs() / scale);
        }
        if d.total != 0.0 {
            fd_mismatch = fd_mismatch.max(((d.total - second) / d.total).abs());
        }
        min_d2k = min_d2k.min(d.total);
        formula[j] = Some(d.total);
        fd[j] = Some(second);
        parts[j] = Some(d);
    }
    Ok(EnergyReport {
        epsilon,
        t_samples: grid.t.clone(),
        k_values: k,
        dk_dt: dk,
        d2k_dt2_formula: formula,
        d2k_dt2_fd: fd,
        decomposition: parts,
        identity_defect,
        fd_mismatch,
        min_d2k_dt2: min_d2k,
    })
}

impl EnergyReport {
    /// Rows `t, K, dK, d2K_formula, d2K_fd, lich, ricci, grad`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "K", "dK", "d2K_formula", "d2K_fd", "lich", "ricci", "grad"])?;
        for j in 0..self.t_samples.len() {
            let d = self.decomposition[j];
            w.serialize((
                self.t_samples[j],
                self.k_values[j],
                self.dk_dt[j],
                self.d2k_dt2_formula[j],
                self.d2k_dt2_fd[j],
                d.map(|d| d.lich),
                d.map(|d| d.ricci),
                d.map(|d| d.grad),
            ))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityRow {
    pub epsilon: f64,
    pub min_d2k_dt2: f64,
    pub at_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityAudit {
    pub pass: bool,
    pub tol: f64,
    pub rows: Vec<ConvexityRow>,
}

/// Check `d²K/dt² ≥ −tol` along every path of an ε-sweep. The background must
/// have `Ric ≤ 0` on the grid's range; otherwise the audit refuses with the
/// positive witness.
pub fn convexity_audit(grids: &[PathGrid], tol: f64) -> Result<ConvexityAudit> {
    let first = grids
        .first()
        .ok_or_else(|| crate::error::invalid("grids", "empty sweep"))?;
    for g in &grids[1..] {
        first.same_discretization(g)?;
    }
    let bg = &first.background;
    let taus: Vec<f64> = first.u_nodes.iter().map(|u| u[0]).filter(|t| *t >= bg.lo()).collect();
    let scan = ricci_sign_scan(bg, &taus, 1e-8)?;
    if matches!(scan.class, RicciSign::PositiveSemidefinite | RicciSign::Mixed) {
        let w: Witness = scan.positive.expect("positive class has a witness");
        return Err(Error::Hypothesis(format!(
            "background Ricci form is {:?}: eigenvalue {:.3e} in the {} direction at τ = {}",
            scan.class, w.eigenvalue, w.direction, w.tau
        )));
    }
    let mut rows = Vec::with_capacity(grids.len());
    for g in grids {
        let mut best = (f64::INFINITY, 0.0);
        for j in 1..g.spec.n_t - 1 {
            let d = k_energy_second_derivative(g, j, g.epsilon)?;
            if d.total < best.0 {
                best = (d.total, g.t[j]);
            }
        }
        rows.push(ConvexityRow {
            epsilon: g.epsilon,
            min_d2k_dt2: best.0,
            at_t: best.1,
        });
    }
    Ok(ConvexityAudit {
        pass: rows.iter().all(|r| r.min_d2k_dt2 >= -tol),
        tol,
        rows,
    })
}
