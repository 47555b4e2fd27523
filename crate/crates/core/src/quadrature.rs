//! Small quadrature toolkit shared by the geometry, energy and toric modules.

use std::f64::consts::PI;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Simpson on uniformly spaced samples; needs an odd sample count.
/// With an even count the last interval falls back to the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let m = if n % 2 == 1 { n } else { n - 1 };
            let mut s = values[0] + values[m - 1];
            for (i, v) in values[1..m - 1].iter().enumerate() {
                s += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * h / 3.0;
            if m < n {
                total += 0.5 * h * (values[n - 2] + values[n - 1]);
            }
            total
        }
    }
}

/// Trapezoid weights `h·diag(½, 1, …, 1, ½)`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// First-derivative operator that is summation-by-parts with respect to
/// [`trapezoid_weights`]: `Σ wᵢ aᵢ (Db)ᵢ + Σ wᵢ (Da)ᵢ bᵢ = a_N b_N − a_0 b_0`.
pub fn sbp_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (values[1] - values[0]) / h;
    d[n - 1] = (values[n - 1] - values[n - 2]) / h;
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d
}

/// Symmetry of a field under reflection through the first node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// As [`sbp_derivative`], but the first node is a reflection plane: the field
/// is extended evenly or oddly past it. Together with [`trapezoid_weights`]
/// this gives `Σ wᵢ aᵢ (Db)ᵢ + Σ wᵢ (Da)ᵢ bᵢ = a_N b_N` for an even `a` and an
/// odd `b` (which vanishes at the first node).
pub fn mirrored_derivative(values: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    let mut d = sbp_derivative(values, h);
    if values.len() >= 2 {
        d[0] = match parity {
            Parity::Even => 0.0,
            // The mirror image of values[1] is −values[1].
            Parity::Odd => values[1] / h,
        };
    }
    d
}

/// Logarithmically spaced points between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let h = 0.1;
        let v: Vec<f64> = (0..11).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn sbp_property_holds_exactly() {
        let h = 0.3;
        let a: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..9).map(|i| (i as f64 * 0.2).exp()).collect();
        let w = trapezoid_weights(9, h);
        let (da, db) = (sbp_derivative(&a, h), sbp_derivative(&b, h));
        let lhs: f64 = (0..9).map(|i| w[i] * (a[i] * db[i] + da[i] * b[i])).sum();
        assert!((lhs - (a[8] * b[8] - a[0] * b[0])).abs() < 1e-13);
    }

    #[test]
    fn mirrored_summation_by_parts() {
        let h = 0.25;
        let w = trapezoid_weights(9, h);
        let a: Vec<f64> = (0..9).map(|i| (i as f64 * h).cos() + 0.1 * (i * i) as f64).collect();
        let a_even = a.clone();
        let b_even: Vec<f64> = (0..9).map(|i| (i as f64 * h).powi(2).exp()).collect();
        // An odd field: derivative of an even one.
        let b = mirrored_derivative(&b_even, h, Parity::Even);
        assert_eq!(b[0], 0.0);
        let da = mirrored_derivative(&a_even, h, Parity::Even);
        let db = mirrored_derivative(&b, h, Parity::Odd);
        let lhs: f64 = (0..9).map(|i| w[i] * (a[i] * db[i] + da[i] * b[i])).sum();
        assert!((lhs - a[8] * b[8]).abs() < 1e-12, "{lhs}");
    }
}
