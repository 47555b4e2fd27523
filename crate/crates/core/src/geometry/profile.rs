//! Momentum profiles of U(n)-invariant Kähler metrics on O(−k) → CP^{n−1}.
//!
//! A radial potential `u(ρ)`, `ρ = log|z|²`, is encoded by its momentum
//! coordinate `τ = u′(ρ)` and the profile `φ(τ) = u″(ρ)`. The Calabi
//! variable is recovered as `ρ(τ) = ∫ dτ/φ(τ)`; the metric has eigenvalues
//! `τ e^{−ρ}` (multiplicity n−1) and `φ(τ) e^{−ρ}` in Euclidean coordinates.

use serde::{Deserialize, Serialize};

use super::interp::MonotoneCubic;
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;

/// Default distance kept from the zero section in curvature queries.
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Closed-form or sampled profile `τ ↦ φ(τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `φ(τ) = τ + a + b/τ`.
    Laurent { a: f64, b: f64 },
    /// `φ(τ) = τ + amplitude·e^{−rate·τ}`.
    Exponential { amplitude: f64, rate: f64 },
    /// `φ(τ) = Σ cᵢ τⁱ`; used for compact models such as Fubini–Study.
    Polynomial { coeffs: Vec<f64> },
    /// `base + amplitude·β((τ − center)/width)` with β the standard C^∞ bump.
    Bumped {
        base: Box<Shape>,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Samples(MonotoneCubic),
}

impl Shape {
    /// `[φ, φ′, φ″]` at `tau`.
    pub fn eval(&self, tau: f64) -> [f64; 3] {
        match self {
            Shape::Laurent { a, b } => [
                tau + a + b / tau,
                1.0 - b / (tau * tau),
                2.0 * b / (tau * tau * tau),
            ],
            Shape::Exponential { amplitude, rate } => {
                let e = amplitude * (-rate * tau).exp();
                [tau + e, 1.0 - rate * e, rate * rate * e]
            }
            Shape::Polynomial { coeffs } => {
                let mut out = [0.0; 3];
                for c in coeffs.iter().rev() {
                    out[2] = out[2] * tau + 2.0 * out[1];
                    out[1] = out[1] * tau + out[0];
                    out[0] = out[0] * tau + c;
                }
                out
            }
            Shape::Bumped {
                base,
                amplitude,
                center,
                width,
            } => {
                let [p, dp, ddp] = base.eval(tau);
                let [b, db, ddb] = bump((tau - center) / width);
                [
                    p + amplitude * b,
                    dp + amplitude * db / width,
                    ddp + amplitude * ddb / (width * width),
                ]
            }
            Shape::Samples(c) => c.eval(tau),
        }
    }

    fn phi(&self, tau: f64) -> f64 {
        self.eval(tau)[0]
    }
}

/// Standard bump `exp(−1/(1−x²))` on |x| < 1 with two derivatives.
fn bump(x: f64) -> [f64; 3] {
    if x.abs() >= 1.0 {
        return [0.0; 3];
    }
    let q = 1.0 - x * x;
    let g1 = -2.0 * x / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
    let b = (-1.0 / q).exp();
    [b, g1 * b, (g2 + g1 * g1) * b]
}

/// How the integration constant of `ρ(τ)` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `ρ(τ) − log τ → 0` as τ → ∞ (closed-form profiles).
    Infinity,
    /// `ρ(τ_ref) = log τ_ref`.
    OuterEnd(f64),
}

/// A U(n)-invariant Kähler metric in the Calabi ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: usize,
    pub k: usize,
    pub tau_min: f64,
    /// Outer end of the profile's domain; also the anchor for numerically
    /// integrated `ρ(τ)`.
    pub tau_max: f64,
    pub shape: Shape,
    pub anchor: Anchor,
    /// Curvature queries need `τ ≥ tau_min + delta`.
    pub delta: f64,
}

impl RadialProfile {
    /// Validating constructor.
    pub fn new(n: usize, k: usize, tau_min: f64, tau_max: f64, shape: Shape) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("complex dimension must be ≥ 2, got {n}")));
        }
        if k < 1 {
            return Err(invalid("k", "line-bundle twist must be ≥ 1, got 0"));
        }
        if !(tau_min >= 0.0) || !tau_min.is_finite() {
            return Err(invalid("tau_min", format!("must be ≥ 0, got {tau_min}")));
        }
        if !(tau_max > tau_min) {
            return Err(invalid("tau_max", format!("must exceed tau_min, got {tau_max}")));
        }
        let anchor = match &shape {
            Shape::Laurent { a, b } if laurent_roots(*a, *b).is_some() => Anchor::Infinity,
            Shape::Bumped { base, .. } if base_anchor(base) => Anchor::Infinity,
            _ => Anchor::OuterEnd(tau_max),
        };
        let p = Self {
            n,
            k,
            tau_min,
            tau_max,
            shape,
            anchor,
            delta: DEFAULT_DELTA,
        };
        p.validate()?;
        Ok(p)
    }

    /// Construct without checking the ALE and compactification invariants.
    /// Meant for compact comparison models (e.g. Fubini–Study).
    pub fn unchecked(n: usize, k: usize, tau_min: f64, tau_max: f64, shape: Shape) -> Self {
        Self {
            n,
            k,
            tau_min,
            tau_max,
            shape,
            anchor: Anchor::OuterEnd(tau_max),
            delta: DEFAULT_DELTA,
        }
    }

    /// The flat profile `φ(τ) = τ` (potential `u = e^ρ`) on `C^n/Z_k`.
    pub fn flat(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, 0.0, 1e6, Shape::Laurent { a: 0.0, b: 0.0 })
    }

    fn validate(&self) -> Result<()> {
        let lo = self.lo();
        let [phi_min, dphi_min, _] = self.shape.eval(self.tau_min.max(f64::MIN_POSITIVE));
        let closed = !matches!(self.shape, Shape::Samples(_));
        if self.tau_min > 0.0 {
            let scale = self.tau_min.max(1.0);
            if phi_min.abs() > 1e-9 * scale {
                return Err(invalid(
                    "profile",
                    format!("φ(tau_min) = {phi_min:e} must vanish at the zero section"),
                ));
            }
            if closed && (dphi_min - self.k as f64).abs() > 1e-8 * scale {
                return Err(invalid(
                    "profile",
                    format!("φ′(tau_min) = {dphi_min} must equal k = {}", self.k),
                ));
            }
        }
        let hi = if closed { self.tau_max.max(1e4 * lo.max(1.0)) } else { self.tau_max };
        let probe = crate::quadrature::log_space(lo, hi, 400);
        if let Some(t) = probe.iter().find(|&&t| !(self.shape.phi(t) > 0.0)) {
            return Err(invalid("profile", format!("φ(τ) ≤ 0 at τ = {t}")));
        }
        if closed {
            let far = 1e8 * lo.max(1.0);
            let ratio = self.shape.phi(far) / far;
            if (ratio - 1.0).abs() > 1e-3 {
                return Err(invalid("profile", format!("φ(τ)/τ → {ratio}, not 1")));
            }
        }
        Ok(())
    }

    /// Smallest admissible τ for curvature queries.
    pub fn lo(&self) -> f64 {
        if self.tau_min > 0.0 {
            self.tau_min + self.delta
        } else {
            self.delta
        }
    }

    /// Largest admissible τ (unbounded for closed forms).
    pub fn hi(&self) -> f64 {
        match self.shape {
            Shape::Samples(_) => self.tau_max,
            _ => f64::INFINITY,
        }
    }

    pub fn check_domain(&self, tau: f64) -> Result<()> {
        if tau >= self.lo() && tau <= self.hi() && tau.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                tau,
                lo: self.lo(),
                hi: self.hi(),
            })
        }
    }

    /// `[φ, φ′, φ″]`.
    pub fn phi(&self, tau: f64) -> [f64; 3] {
        self.shape.eval(tau)
    }

    /// Calabi variable `ρ(τ)`.
    pub fn rho(&self, tau: f64) -> f64 {
        rho_of(&self.shape, self.tau_min, tau, self.anchor)
    }

    /// Inverse of [`Self::rho`].
    pub fn tau_of_rho(&self, rho: f64) -> Result<f64> {
        if let Shape::Laurent { a, b } = self.shape {
            if a == 0.0 && b == 0.0 && self.anchor == Anchor::Infinity {
                return Ok(rho.exp());
            }
        }
        let mut lo = self.lo();
        if self.rho(lo) > rho {
            return Err(Error::OutOfDomain {
                tau: f64::NAN,
                lo,
                hi: self.hi(),
            });
        }
        let mut hi = (rho.exp()).max(2.0 * lo);
        while self.rho(hi) < rho {
            hi *= 2.0;
            if hi > self.hi() || !hi.is_finite() {
                return Err(Error::OutOfDomain {
                    tau: hi,
                    lo,
                    hi: self.hi(),
                });
            }
        }
        let mut tau = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.rho(tau) - rho;
            if f > 0.0 {
                hi = tau;
            } else {
                lo = tau;
            }
            let step = f * self.phi(tau)[0];
            if f == 0.0 || step.abs() <= 1e-15 * tau || hi - lo <= 1e-15 * hi {
                break;
            }
            let newton = tau - step;
            tau = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Ok(tau)
    }

    /// Derivatives `[u′, u″, u‴, u⁗]` of the potential with respect to ρ at `rho`.
    pub fn potential_derivatives(&self, rho: f64) -> Result<[f64; 4]> {
        let tau = self.tau_of_rho(rho)?;
        let [p, dp, ddp] = self.phi(tau);
        Ok([tau, p, p * dp, p * (dp * dp + p * ddp)])
    }
}

fn base_anchor(shape: &Shape) -> bool {
    match shape {
        Shape::Laurent { a, b } => laurent_roots(*a, *b).is_some(),
        Shape::Bumped { base, .. } => base_anchor(base),
        _ => false,
    }
}

/// Real roots `(r₁ ≥ r₂)` of `τ² + aτ + b`, when `ρ(τ)` has a closed form.
fn laurent_roots(a: f64, b: f64) -> Option<(f64, f64)> {
    let disc = a * a - 4.0 * b;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((0.5 * (-a + s), 0.5 * (-a - s)))
}

fn rho_of(shape: &Shape, tau_min: f64, tau: f64, anchor: Anchor) -> f64 {
    match (shape, anchor) {
        (Shape::Laurent { a, b }, Anchor::Infinity) => {
            let (r1, r2) = laurent_roots(*a, *b).expect("anchor at infinity needs real roots");
            if r1 == r2 {
                if r1 == 0.0 {
                    tau.ln()
                } else {
                    (tau - r1).ln() - r1 / (tau - r1)
                }
            } else {
                let alpha = r1 / (r1 - r2);
                let beta = 1.0 - alpha;
                let mut v = alpha * (tau - r1).ln();
                if beta != 0.0 {
                    v += beta * (tau - r2).ln();
                }
                v
            }
        }
        (
            Shape::Bumped {
                base,
                center,
                width,
                ..
            },
            Anchor::Infinity,
        ) => {
            let lo = (center - width).max(tau);
            let hi = center + width;
            let mut v = rho_of(base, tau_min, tau, anchor);
            if hi > lo {
                let gl = GaussLegendre::new(24);
                v += gl.composite(lo, hi, 16, |s| 1.0 / base.phi(s) - 1.0 / shape.phi(s));
            }
            v
        }
        (_, Anchor::OuterEnd(tau_ref)) => tau_ref.ln() - integrate_inverse(shape, tau_min, tau, tau_ref),
        (_, Anchor::Infinity) => unreachable!("numeric profiles are anchored at their outer end"),
    }
}

/// `∫_a^b dτ/φ(τ)`, signed, with panels refined geometrically towards `tau_min`.
fn integrate_inverse(shape: &Shape, tau_min: f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate_inverse(shape, tau_min, b, a);
    }
    let gl = GaussLegendre::new(20);
    let d0 = a - tau_min;
    let d1 = b - tau_min;
    let panels = ((d1 / d0).log2().ceil() as usize).clamp(1, 400) * 2;
    let ratio = (d1 / d0).powf(1.0 / panels as f64);
    let mut total = 0.0;
    let mut lo = a;
    for p in 1..=panels {
        let hi = if p == panels { b } else { tau_min + d0 * ratio.powi(p as i32) };
        total += gl.integrate(lo, hi, |s| 1.0 / shape.phi(s));
        lo = hi;
    }
    total
}
