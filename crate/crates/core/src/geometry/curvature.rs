//! Curvature of Calabi-ansatz metrics.
//!
//! With `F(ρ) = (n−1) log u′ + log u″ − nρ` the Ricci form is `−i∂∂̄F`, whose
//! eigenvalues (in the same Euclidean frame as the metric) are `−F′e^{−ρ}`
//! on the base directions and `−F″e^{−ρ}` on the fiber direction. Scalar
//! curvature is the Riemannian one, twice the Kähler trace.

use serde::{Deserialize, Serialize};

use super::profile::{RadialProfile, Shape};
use crate::error::{invalid, Result};

/// The scalar-flat LeBrun metric on O(−k) → CP¹ with zero section at `tau_min`:
/// `φ(τ) = τ + A + B/τ`, `A = (k−2)·tau_min`, `B = (1−k)·tau_min²`.
pub fn lebrun_profile(k: usize, tau_min: f64) -> Result<RadialProfile> {
    lebrun_profile_n(2, k, tau_min)
}

/// As [`lebrun_profile`] but rejects `n ≠ 2` explicitly.
pub fn lebrun_profile_n(n: usize, k: usize, tau_min: f64) -> Result<RadialProfile> {
    if n != 2 {
        return Err(invalid("n", format!("LeBrun closed form exists only for n = 2, got {n}")));
    }
    if k < 1 {
        return Err(invalid("k", "must be ≥ 1"));
    }
    if !(tau_min > 0.0) {
        return Err(invalid("tau_min", format!("must be > 0, got {tau_min}")));
    }
    let k = k as f64;
    let a = (k - 2.0) * tau_min;
    let b = (1.0 - k) * tau_min * tau_min;
    RadialProfile::new(2, k as usize, tau_min, 1e6 * tau_min.max(1.0), Shape::Laurent { a, b })
}

/// `(F′, F″)` as derivatives in ρ, through the chain rule `d/dρ = φ d/dτ`.
fn f_derivatives(n: f64, tau: f64, phi: [f64; 3]) -> (f64, f64) {
    let [p, dp, ddp] = phi;
    let f1 = (n - 1.0) * p / tau + dp - n;
    let f2 = p * ((n - 1.0) * (tau * dp - p) / (tau * tau) + ddp);
    (f1, f2)
}

/// Metric eigenvalues `(τe^{−ρ}, φ(τ)e^{−ρ})`.
pub fn metric_eigenvalues(p: &RadialProfile, tau: f64) -> Result<(f64, f64)> {
    p.check_domain(tau)?;
    let e = (-p.rho(tau)).exp();
    Ok((tau * e, p.phi(tau)[0] * e))
}

/// Ricci eigenvalues `(ric_base, ric_fiber)`; `ric_base` has multiplicity n−1.
pub fn ricci_eigenvalues(p: &RadialProfile, tau: f64) -> Result<(f64, f64)> {
    p.check_domain(tau)?;
    let e = (-p.rho(tau)).exp();
    let (f1, f2) = f_derivatives(p.n as f64, tau, p.phi(tau));
    Ok((-f1 * e, -f2 * e))
}

/// Riemannian scalar curvature, evaluated from the closed expression
/// `R = −2[(n−1)(n−2)φ/τ² + 2(n−1)φ′/τ − n(n−1)/τ + φ″]`.
pub fn scalar_curvature(p: &RadialProfile, tau: f64) -> Result<f64> {
    p.check_domain(tau)?;
    let n = p.n as f64;
    let [ph, dph, ddph] = p.phi(tau);
    Ok(-2.0 * ((n - 1.0) * ((n - 2.0) * (ph / tau - 1.0) + 2.0 * (dph - 1.0)) / tau + ddph))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub tau: f64,
    pub rho: f64,
    pub r: f64,
    pub lambda_base: f64,
    pub lambda_fiber: f64,
    pub ric_base: f64,
    pub ric_fiber: f64,
    pub scal: f64,
}

impl CurvatureSample {
    pub fn at(p: &RadialProfile, tau: f64) -> Result<Self> {
        let rho = p.rho(tau);
        let (lambda_base, lambda_fiber) = metric_eigenvalues(p, tau)?;
        let (ric_base, ric_fiber) = ricci_eigenvalues(p, tau)?;
        Ok(Self {
            tau,
            rho,
            r: (0.5 * rho).exp(),
            lambda_base,
            lambda_fiber,
            ric_base,
            ric_fiber,
            scal: scalar_curvature(p, tau)?,
        })
    }

    /// Scalar curvature recomputed as the trace of the Ricci eigenvalues.
    pub fn trace_scal(&self, n: usize) -> f64 {
        2.0 * ((n as f64 - 1.0) * self.ric_base / self.lambda_base + self.ric_fiber / self.lambda_fiber)
    }
}

/// Sample curvature along a τ grid.
pub fn curvature_scan(p: &RadialProfile, taus: &[f64]) -> Result<Vec<CurvatureSample>> {
    taus.iter().map(|&t| CurvatureSample::at(p, t)).collect()
}

pub fn write_scan_csv<W: std::io::Write>(out: W, samples: &[CurvatureSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RicciSign {
    PositiveSemidefinite,
    NegativeSemidefinite,
    Mixed,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub tau: f64,
    /// `"base"` or `"fiber"`.
    pub direction: &'static str,
    /// Eigenvalue of the Ricci endomorphism `g⁻¹Ric` in that direction.
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignScan {
    pub class: RicciSign,
    pub positive: Option<Witness>,
    pub negative: Option<Witness>,
    /// Largest |eigenvalue| seen over the grid.
    pub max_abs: f64,
    pub tolerance: f64,
}

/// Classify the sign of the Ricci form over a τ grid. Eigenvalues are those of
/// `g⁻¹Ric`, so signs agree with the Ricci form and magnitudes are frame-free.
/// Anything with |λ| ≤ `tol` counts as zero.
pub fn ricci_sign_scan(p: &RadialProfile, taus: &[f64], tol: f64) -> Result<SignScan> {
    let mut positive: Option<Witness> = None;
    let mut negative: Option<Witness> = None;
    let mut max_abs: f64 = 0.0;
    for &tau in taus {
        let (lb, lf) = metric_eigenvalues(p, tau)?;
        let (rb, rf) = ricci_eigenvalues(p, tau)?;
        for (direction, eig) in [("base", rb / lb), ("fiber", rf / lf)] {
            max_abs = max_abs.max(eig.abs());
            let w = Witness {
                tau,
                direction,
                eigenvalue: eig,
            };
            if eig > tol && positive.is_none_or(|p| eig > p.eigenvalue) {
                positive = Some(w);
            }
            if eig < -tol && negative.is_none_or(|n| eig < n.eigenvalue) {
                negative = Some(w);
            }
        }
    }
    let class = match (positive.is_some(), negative.is_some()) {
        (true, true) => RicciSign::Mixed,
        (true, false) => RicciSign::PositiveSemidefinite,
        (false, true) => RicciSign::NegativeSemidefinite,
        (false, false) => RicciSign::Zero,
    };
    Ok(SignScan {
        class,
        positive,
        negative,
        max_abs,
        tolerance: tol,
    })
}

/// Log-spaced τ grid on `[tau_min·(1+rel_gap) (or gap for the cone), tau_hi]`.
pub fn default_tau_grid(p: &RadialProfile, tau_hi: f64, count: usize) -> Vec<f64> {
    let lo = if p.tau_min > 0.0 {
        (p.tau_min * (1.0 + 1e-3)).max(p.lo())
    } else {
        1e-3
    };
    crate::quadrature::log_space(lo, tau_hi, count)
}
