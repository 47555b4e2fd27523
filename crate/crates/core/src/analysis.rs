//! Decay-exponent fits, weighted sup-norms and the ADM mass of radial profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadialProfile;

/// Minimum number of radii a decay fit uses.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Fits with a larger RMS residual (in log space) are rejected.
pub const MAX_FIT_RMS: f64 = 0.1;
/// Magnitudes at or below this are treated as numerically zero.
pub const DEFAULT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub r_lo: f64,
    pub r_hi: f64,
    /// Slope of `log|value|` against `log r`.
    pub exponent: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub samples_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
    /// `predicted − exponent`; positive when the data decays faster than predicted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl DecayFit {
    pub fn with_prediction(mut self, predicted: f64) -> Self {
        self.predicted = Some(predicted);
        self.margin = Some(predicted - self.exponent);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitOutcome {
    Fit(DecayFit),
    /// Every value in the window is numerically zero; there is no exponent.
    BelowFloor { r_lo: f64, r_hi: f64, floor: f64 },
}

impl FitOutcome {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            FitOutcome::Fit(f) => Some(f.exponent),
            FitOutcome::BelowFloor { .. } => None,
        }
    }

    pub fn fit(self) -> Option<DecayFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::BelowFloor { .. } => None,
        }
    }
}

/// Default fitting window `[r_max/8, r_max/2]`.
pub fn default_window(r_max: f64) -> (f64, f64) {
    (r_max / 8.0, r_max / 2.0)
}

/// Least-squares slope of `log|value|` versus `log r` over the window.
pub fn fit_decay_exponent(samples: &[(f64, f64)], window: (f64, f64)) -> Result<FitOutcome> {
    fit_decay_exponent_with_floor(samples, window, DEFAULT_FLOOR)
}

pub fn fit_decay_exponent_with_floor(
    samples: &[(f64, f64)],
    window: (f64, f64),
    floor: f64,
) -> Result<FitOutcome> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::DegenerateFit(format!("window [{lo}, {hi}] is empty or non-positive")));
    }
    if let Some(&(r, _)) = samples.iter().find(|(r, _)| !(*r > 0.0)) {
        return Err(Error::DegenerateFit(format!("radius {r} is not positive")));
    }
    let in_window: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(r, _)| *r >= lo && *r <= hi)
        .collect();
    let usable: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|(_, v)| v.abs() > floor && v.is_finite())
        .map(|&(r, v)| (r.ln(), v.abs().ln()))
        .collect();
    if usable.is_empty() && !in_window.is_empty() {
        return Ok(FitOutcome::BelowFloor {
            r_lo: lo,
            r_hi: hi,
            floor,
        });
    }
    if usable.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateFit(format!(
            "{} usable radii in [{lo}, {hi}], need {MIN_FIT_SAMPLES}",
            usable.len()
        )));
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all radii coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    if rms >= MAX_FIT_RMS {
        return Err(Error::DegenerateFit(format!(
            "log-space RMS residual {rms:.3} ≥ {MAX_FIT_RMS}; data is not a power law on the window"
        )));
    }
    Ok(FitOutcome::Fit(DecayFit {
        r_lo: lo,
        r_hi: hi,
        exponent: slope,
        intercept,
        rms_residual: rms,
        samples_used: usable.len(),
        predicted: None,
        margin: None,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub value: f64,
    /// Radius where the supremum is attained.
    pub at_r: f64,
}

/// `sup |f|·r^{−s}` over the samples.
pub fn weighted_norm(radii: &[f64], values: &[f64], s: f64) -> WeightedNorm {
    radii
        .iter()
        .zip(values)
        .map(|(&r, &v)| WeightedNorm {
            value: v.abs() * r.powf(-s),
            at_r: r,
        })
        .fold(
            WeightedNorm {
                value: 0.0,
                at_r: f64::NAN,
            },
            |best, c| if c.value > best.value || best.at_r.is_nan() { c } else { best },
        )
}

/// Metric deviations `(|λ_base − 1|, |λ_fiber − 1|)` sampled against r on a τ grid.
pub fn metric_deviation_samples(p: &RadialProfile, taus: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    taus.iter()
        .map(|&tau| {
            let rho = p.rho(tau);
            let e = (-rho).exp();
            let phi = p.phi(tau)[0];
            // τe^{−ρ} − 1 without cancellation: e^{−ρ}(τ − e^{ρ}).
            let base = (tau * e - 1.0).abs();
            let fiber = (phi * e - 1.0).abs();
            Ok(((0.5 * rho).exp(), base, fiber))
        })
        .collect()
}

/// Flux density `r^{2n−1} x̂ⁱ(∂ⱼgᵢⱼ − ∂ᵢgⱼⱼ)` at τ for the metric
/// `λ_base·(1 − P) + λ_fiber·P`, P the projection onto span{x, Jx}.
fn mass_flux(p: &RadialProfile, tau: f64) -> f64 {
    let n = p.n as f64;
    let rho = p.rho(tau);
    let e = (-rho).exp();
    let r = (0.5 * rho).exp();
    let [phi, dphi, _] = p.phi(tau);
    let mu = (phi - tau) * e;
    // d/dr = (2φ/r) d/dτ
    let dr = 2.0 * phi / r;
    let dlb = dr * e * (phi - tau) / phi;
    let dlf = dr * e * (dphi - 1.0);
    let dmu = dlf - dlb;
    r.powf(2.0 * n - 1.0) * (-(2.0 * n - 1.0) * dlb - dmu + (2.0 * n - 2.0) * mu / r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub mass: f64,
    pub at_outer: f64,
    pub at_inner: f64,
    pub r_outer: f64,
    pub decay_exponent: Option<f64>,
}

/// ADM mass `m = lim ∮(∂ⱼgᵢⱼ − ∂ᵢgⱼⱼ)νⁱ / (2(2n−1)·|S^{2n−1}|)` over the
/// quotient sphere `S^{2n−1}/Z_k`, Richardson-extrapolated from two radii
/// a factor two apart assuming an `O(r^{−2})` correction.
pub fn adm_mass(p: &RadialProfile) -> Result<MassReport> {
    let tau_outer = if p.hi().is_finite() {
        p.hi()
    } else {
        1e4 * p.tau_min.max(1.0)
    };
    let taus = crate::quadrature::log_space(tau_outer / 256.0, tau_outer, 40);
    let dev = metric_deviation_samples(p, &taus)?;
    let r_max = dev.last().unwrap().0;
    let window = (r_max / 16.0, r_max);
    let required = -(p.n as f64 - 1.0);
    let mut worst: Option<f64> = None;
    for series in [
        dev.iter().map(|d| (d.0, d.1)).collect::<Vec<_>>(),
        dev.iter().map(|d| (d.0, d.2)).collect::<Vec<_>>(),
    ] {
        if let Some(e) = fit_decay_exponent(&series, window)?.exponent() {
            worst = Some(worst.map_or(e, |w: f64| w.max(e)));
        }
    }
    if let Some(e) = worst {
        if e > required + 1e-6 {
            return Err(Error::InsufficientDecay {
                fitted: e,
                required,
            });
        }
    }
    let norm = 2.0 * (2.0 * p.n as f64 - 1.0) * p.k as f64;
    let outer = mass_flux(p, tau_outer) / norm;
    let rho_outer = p.rho(tau_outer);
    // r halves when ρ drops by 2 log 2.
    let tau_inner = p.tau_of_rho(rho_outer - 2.0 * std::f64::consts::LN_2)?;
    let inner = mass_flux(p, tau_inner) / norm;
    Ok(MassReport {
        mass: (4.0 * outer - inner) / 3.0,
        at_outer: outer,
        at_inner: inner,
        r_outer: (0.5 * rho_outer).exp(),
        decay_exponent: worst,
    })
}
