//! Divisor arithmetic on the compactification M_k = P(O(−k) ⊕ O) of O(−k),
//! the opposite-sign certificate for the Ricci form, and a quadrature oracle
//! over the explicit Poincaré-dual representatives.
//!
//! Divisor classes are written in the basis `D₀` (zero section) and `D_f`
//! (fibre over a hyperplane), with `D_∞ = D₀ + k·D_f`. Restricting to
//! `D₀ ≅ CP^{n−1}` gives `D₀|_{D₀} = −kH`, `D_f|_{D₀} = H`, so
//! `D₀^a·D_f^{n−a} = (−k)^{a−1}` for `a ≥ 1` and `D_f^n = 0`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divisor {
    Zero,
    Fiber,
    Infinity,
}

impl Divisor {
    /// Coefficients in the basis `(D₀, D_f)`.
    pub fn coefficients(self, k: i128) -> (i128, i128) {
        match self {
            Divisor::Zero => (1, 0),
            Divisor::Fiber => (0, 1),
            Divisor::Infinity => (1, k),
        }
    }
}

fn overflow() -> Error {
    invalid("n", "intersection number overflows 128-bit arithmetic")
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid("n", format!("need n ≥ 2, got {n}")));
    }
    if k < 1 {
        return Err(invalid("k", "need k ≥ 1"));
    }
    Ok(())
}

fn checked_pow(base: i128, e: usize) -> Result<i128> {
    base.checked_pow(e as u32).ok_or_else(overflow)
}

/// Exact intersection number of `n` divisors on `M_k` (complex dimension `n`).
pub fn wedge(n: usize, k: usize, divisors: &[Divisor]) -> Result<i128> {
    check_nk(n, k)?;
    if divisors.len() != n {
        return Err(invalid("divisors", format!("need {n} divisors, got {}", divisors.len())));
    }
    let k = k as i128;
    // poly[a] = coefficient of D₀^a D_f^{deg−a}.
    let mut poly = vec![1i128];
    for d in divisors {
        let (c0, cf) = d.coefficients(k);
        let mut next = vec![0i128; poly.len() + 1];
        for (a, &c) in poly.iter().enumerate() {
            let add0 = c.checked_mul(c0).ok_or_else(overflow)?;
            let addf = c.checked_mul(cf).ok_or_else(overflow)?;
            next[a + 1] = next[a + 1].checked_add(add0).ok_or_else(overflow)?;
            next[a] = next[a].checked_add(addf).ok_or_else(overflow)?;
        }
        poly = next;
    }
    let mut total = 0i128;
    for (a, &c) in poly.iter().enumerate().skip(1) {
        let m = checked_pow(-k, a - 1)?.checked_mul(c).ok_or_else(overflow)?;
        total = total.checked_add(m).ok_or_else(overflow)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionNumbers {
    pub n: usize,
    pub k: usize,
    /// `D₀^n = ∫_{D₀} ρ₀^{n−1}`.
    pub d0_power: i128,
    /// `D₀^{n−1}·D_f = ∫ ρ₀^{n−1}∧ρ_f`.
    pub d0_power_fiber: i128,
    /// `D₀^{n−1}·D_∞`.
    pub d0_power_infinity: i128,
    /// `D_f^n`.
    pub fiber_power: i128,
    /// `D₀·D₀`, `D₀·D_f`, `D_f·D_f`, `D₀·D_∞` for surfaces.
    pub surface: Option<[i128; 4]>,
}

pub fn intersection_numbers(n: usize, k: usize) -> Result<IntersectionNumbers> {
    use Divisor::*;
    check_nk(n, k)?;
    let with_last = |last: Divisor| {
        let mut v = vec![Zero; n - 1];
        v.push(last);
        wedge(n, k, &v)
    };
    let surface = if n == 2 {
        Some([
            wedge(2, k, &[Zero, Zero])?,
            wedge(2, k, &[Zero, Fiber])?,
            wedge(2, k, &[Fiber, Fiber])?,
            wedge(2, k, &[Zero, Infinity])?,
        ])
    } else {
        None
    };
    Ok(IntersectionNumbers {
        n,
        k,
        d0_power: with_last(Zero)?,
        d0_power_fiber: with_last(Fiber)?,
        d0_power_infinity: with_last(Infinity)?,
        fiber_power: wedge(n, k, &vec![Fiber; n])?,
        surface,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// `∫_{D₀} ρ^{n−1}` for the Ricci class `−(n−k)/k·[D₀]`.
    pub d0_ricci: Rational,
    /// `∫_{D_f} ρ^{n−1}`.
    pub df_ricci: Rational,
    pub opposite_signs: bool,
    /// `df_ricci / d0_ricci`; absent when both vanish.
    pub ratio: Option<Rational>,
}

/// The two restricted Ricci integrals of any ALE Kähler metric on O(−k).
/// They have opposite signs exactly when `k ≠ n`, which rules out a
/// semidefinite Ricci form.
pub fn mixed_type_certificate(n: usize, k: usize) -> Result<Certificate> {
    check_nk(n, k)?;
    let nums = intersection_numbers(n, k)?;
    // (−(n−k)/k)^{n−1} times the intersection numbers, kept over a common denominator.
    let num = checked_pow(k as i128 - n as i128, n - 1)?;
    let den = checked_pow(k as i128, n - 1)?;
    let scale = |x: i128| num.checked_mul(x).map(|m| Rational::new(m, den)).ok_or_else(overflow);
    let d0 = scale(nums.d0_power)?;
    let df = scale(nums.d0_power_fiber)?;
    let zero = Rational::from_integer(0);
    let opposite = (d0 > zero && df < zero) || (d0 < zero && df > zero);
    let ratio = if d0 == zero { None } else { Some(df / d0) };
    Ok(Certificate {
        d0_ricci: d0,
        df_ricci: df,
        opposite_signs: opposite,
        ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleIntegral {
    /// `∫_{M_k} ρ₀^n`.
    Power,
    /// `∫_{M_k} ρ₀^{n−1}∧ρ_f`.
    PowerFiber,
    /// `∫_{D₀} ρ₀^{n−1}`.
    RestrictedZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// Difference between the last two quadrature refinements.
    pub error: f64,
}

const ORACLE_RTOL: f64 = 5e-3;

/// `[φ_a, φ_aa, φ_ab, φ_bb]` of the representative potential of `d` on the
/// chart U₀, with `a = log Σ|u₀ʲ|²`, `b = log|u₀|²`, written through
/// `p = X/(1+X)` (`X = eᵃ`) and `s = L/(1+L)` (`L = (1+X)^k eᵇ`).
///
/// Potentials (form = `i∂∂̄(potential)/(2π)`):
/// `D_∞: log(L+1)`, `D_f: log(1+X)`, `D₀: log(L+1) − k·log(1+X)` (the
/// pluriharmonic `−log|u₀|²` dropped).
fn potential_derivatives(d: Divisor, k: f64, p: f64, s: f64) -> [f64; 4] {
    let (pq, sq) = (p * (1.0 - p), s * (1.0 - s));
    match d {
        Divisor::Fiber => [p, pq, 0.0, 0.0],
        Divisor::Infinity => [k * p * s, k * k * p * p * sq + k * s * pq, k * p * sq, sq],
        Divisor::Zero => [
            -k * p * (1.0 - s),
            k * k * p * p * sq - k * pq * (1.0 - s),
            k * p * sq,
            sq,
        ],
    }
}

/// Density of `∫ (i∂∂̄φ₁/2π)∧…∧(i∂∂̄φ_n/2π)` in `(p, s)`. After integrating
/// the torus and the U(n−1) orbits, a top wedge of invariant forms reduces
/// to `n(n−1)·Σ` of the mixed discriminant of the (a, b) Hessians times the
/// remaining `φ_a` factors, against `da db = dp ds/(p(1−p)s(1−s))`.
fn mixed_density(divisors: &[Divisor], k: f64, p: f64, s: f64) -> f64 {
    let d: Vec<[f64; 4]> = divisors.iter().map(|&x| potential_derivatives(x, k, p, s)).collect();
    let n = d.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let disc = d[i][1] * d[j][3] + d[j][1] * d[i][3] - 2.0 * d[i][2] * d[j][2];
            let rest: f64 = (0..n).filter(|&l| l != i && l != j).map(|l| d[l][0]).product();
            sum += disc * rest;
        }
    }
    sum / (p * (1.0 - p) * s * (1.0 - s))
}

fn refine(mut integrate: impl FnMut(usize) -> f64) -> Result<OracleValue> {
    let mut order = 4;
    let mut prev = integrate(order);
    loop {
        order *= 2;
        let next = integrate(order);
        let err = (next - prev).abs();
        if err <= 1e-12 * (1.0 + next.abs()) || (order >= 256 && err <= ORACLE_RTOL * next.abs()) {
            return Ok(OracleValue { value: next, error: err });
        }
        if order >= 256 {
            return Err(Error::Quadrature { estimate: err });
        }
        prev = next;
    }
}

/// Quadrature value of a top wedge of representatives over the chart U₀
/// (dense in M_k), in the `1/(2π)` normalization.
pub fn wedge_integral_oracle(n: usize, k: usize, divisors: &[Divisor]) -> Result<OracleValue> {
    check_nk(n, k)?;
    if !(2..=3).contains(&n) {
        return Err(invalid("n", "the oracle is limited to n ∈ {2, 3}"));
    }
    if divisors.len() != n {
        return Err(invalid("divisors", format!("need {n} divisors, got {}", divisors.len())));
    }
    let kf = k as f64;
    refine(|order| {
        let gl = GaussLegendre::new(order);
        gl.integrate(0.0, 1.0, |p| gl.integrate(0.0, 1.0, |s| mixed_density(divisors, kf, p, s)))
    })
}

/// Oracle for `which`; multiply by [`calibration`] to compare with the
/// exact table.
pub fn representative_integral_oracle(n: usize, k: usize, which: OracleIntegral) -> Result<OracleValue> {
    use Divisor::*;
    match which {
        OracleIntegral::Power => wedge_integral_oracle(n, k, &vec![Zero; n]),
        OracleIntegral::PowerFiber => {
            let mut v = vec![Zero; n - 1];
            v.push(Fiber);
            wedge_integral_oracle(n, k, &v)
        }
        OracleIntegral::RestrictedZero => {
            check_nk(n, k)?;
            if !(2..=3).contains(&n) {
                return Err(invalid("n", "the oracle is limited to n ∈ {2, 3}"));
            }
            // On D₀ the potential is −k·log(1+X); over C^{n−1} the top power
            // reduces to (n−1)∫ φ_a^{n−2} φ_aa da.
            let kf = k as f64;
            let m = (n - 1) as i32;
            refine(|order| {
                GaussLegendre::new(order).integrate(0.0, 1.0, |p| {
                    let (fa, faa) = (-kf * p, -kf * p * (1.0 - p));
                    m as f64 * fa.powi(m - 1) * faa / (p * (1.0 - p))
                })
            })
        }
    }
}

/// Ratio of the exact `D₀·D₀` on M₁ (n = 2) to its oracle value; applied
/// unchanged to every other case.
pub fn calibration() -> Result<f64> {
    let exact = wedge(2, 1, &[Divisor::Zero, Divisor::Zero])? as f64;
    Ok(exact / representative_integral_oracle(2, 1, OracleIntegral::Power)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleColumns {
    pub calibration: f64,
    pub power: OracleValue,
    pub power_fiber: OracleValue,
    pub restricted_zero: OracleValue,
    /// Oracle of `ρ₀^{n−1}∧ρ_∞` minus `oracle(ρ₀^n) + k·oracle(ρ₀^{n−1}∧ρ_f)`.
    pub linearity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub n: usize,
    pub k: usize,
    pub numbers: IntersectionNumbers,
    pub d0_power: i128,
    pub d0_ricci: Rational,
    pub df_ricci: Rational,
    pub certificate: Certificate,
    pub oracle: Option<OracleColumns>,
}

pub fn intersection_report(n: usize, k: usize, with_oracle: bool) -> Result<IntersectionReport> {
    let numbers = intersection_numbers(n, k)?;
    let certificate = mixed_type_certificate(n, k)?;
    let oracle = if with_oracle {
        let power = representative_integral_oracle(n, k, OracleIntegral::Power)?;
        let power_fiber = representative_integral_oracle(n, k, OracleIntegral::PowerFiber)?;
        let restricted_zero = representative_integral_oracle(n, k, OracleIntegral::RestrictedZero)?;
        let mut v = vec![Divisor::Zero; n - 1];
        v.push(Divisor::Infinity);
        let inf = wedge_integral_oracle(n, k, &v)?;
        Some(OracleColumns {
            calibration: calibration()?,
            power,
            power_fiber,
            restricted_zero,
            linearity_defect: inf.value - (power.value + k as f64 * power_fiber.value),
        })
    } else {
        None
    };
    Ok(IntersectionReport {
        n,
        k,
        d0_power: numbers.d0_power,
        d0_ricci: certificate.d0_ricci,
        df_ricci: certificate.df_ricci,
        numbers,
        certificate,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Divisor::*;

    #[test]
    fn surface_table() {
        for k in 1..=4 {
            let t = intersection_numbers(2, k).unwrap().surface.unwrap();
            assert_eq!(t, [-(k as i128), 1, 0, 0]);
        }
    }

    #[test]
    fn listed_values() {
        assert_eq!(intersection_numbers(2, 3).unwrap().d0_power, -3);
        assert_eq!(intersection_numbers(3, 1).unwrap().d0_power, 1);
        assert_eq!(intersection_numbers(2, 2).unwrap().d0_power_fiber, 1);
        assert_eq!(intersection_numbers(4, 2).unwrap().d0_power_fiber, 4);
    }

    #[test]
    fn certificate_examples() {
        let c = mixed_type_certificate(2, 1).unwrap();
        assert_eq!((c.d0_ricci, c.df_ricci), (Rational::from_integer(1), Rational::from_integer(-1)));
        let c = mixed_type_certificate(2, 2).unwrap();
        assert_eq!(c.d0_ricci, Rational::from_integer(0));
        assert!(!c.opposite_signs && c.ratio.is_none());
        let c = mixed_type_certificate(3, 1).unwrap();
        assert!(c.opposite_signs);
        assert_eq!(c.ratio, Some(Rational::from_integer(-1)));
    }

    #[test]
    fn invalid_input() {
        assert!(intersection_numbers(1, 1).is_err());
        assert!(intersection_numbers(2, 0).is_err());
        assert!(representative_integral_oracle(4, 1, OracleIntegral::Power).is_err());
        assert!(wedge(60, 60, &[Zero; 60]).is_err());
    }

    #[test]
    fn oracle_reproduces_table() {
        let cal = calibration().unwrap();
        assert!((cal - 1.0).abs() < 1e-10, "{cal}");
        for n in 2..=3 {
            for k in 1..=3 {
                let exact = intersection_numbers(n, k).unwrap();
                for (which, want) in [
                    (OracleIntegral::Power, exact.d0_power),
                    (OracleIntegral::PowerFiber, exact.d0_power_fiber),
                    (OracleIntegral::RestrictedZero, exact.d0_power),
                ] {
                    let got = representative_integral_oracle(n, k, which).unwrap();
                    let scaled = cal * got.value;
                    assert!((scaled - want as f64).abs() <= 1e-2 * (want as f64).abs(), "{n} {k} {which:?} {scaled}");
                }
            }
        }
    }

    #[test]
    fn oracle_every_wedge() {
        for n in 2..=3 {
            for k in 1..=3 {
                let all = [Zero, Fiber, Infinity];
                let mut idx = vec![0usize; n];
                loop {
                    let ds: Vec<Divisor> = idx.iter().map(|&i| all[i]).collect();
                    let exact = wedge(n, k, &ds).unwrap() as f64;
                    let got = wedge_integral_oracle(n, k, &ds).unwrap().value;
                    assert!((got - exact).abs() < 1e-9 * (1.0 + exact.abs()), "{ds:?} {got} {exact}");
                    let mut c = 0;
                    while c < n && idx[c] == 2 {
                        idx[c] = 0;
                        c += 1;
                    }
                    if c == n {
                        break;
                    }
                    idx[c] += 1;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn certificate_soundness(n in 2usize..8, k in 1usize..8) {
            let c = mixed_type_certificate(n, k).unwrap();
            prop_assert_eq!(c.opposite_signs, k != n);
            if k != n {
                prop_assert_eq!(c.ratio, Some(Rational::new(-1, k as i128)));
                prop_assert_eq!(c.d0_ricci, Rational::from_integer((n as i128 - k as i128).pow(n as u32 - 1)));
            }
        }

        #[test]
        fn infinity_is_zero_plus_k_fibers(n in 2usize..7, k in 1usize..6, pick in proptest::collection::vec(0usize..3, 7)) {
            let all = [Zero, Fiber, Infinity];
            let mut ds: Vec<Divisor> = pick[..n - 1].iter().map(|&i| all[i]).collect();
            let base = ds.clone();
            ds.push(Infinity);
            let mut a = base.clone();
            a.push(Zero);
            let mut b = base;
            b.push(Fiber);
            let lhs = wedge(n, k, &ds).unwrap();
            prop_assert_eq!(lhs, wedge(n, k, &a).unwrap() + k as i128 * wedge(n, k, &b).unwrap());
        }
    }
}
