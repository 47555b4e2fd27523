//! Banded LU factorization with partial pivoting.
//!
//! Row `i` stores columns `i − kl ..= i + ku + kl`; the extra `kl` columns on
//! the right hold fill-in from row swaps.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: Vec::new(),
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Accumulate `v` into entry `(i, j)`; `j` must lie within the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// `y = A x` (before factorization).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization.
    pub fn factor(&mut self) -> Result<()> {
        let n = self.n;
        self.pivots = vec![0; n];
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            self.pivots[k] = p;
            let right = (k + self.ku + self.kl).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last {
                let sr = self.slot(r, k);
                let m = self.data[sr] / pivot;
                if m == 0.0 {
                    continue;
                }
                self.data[sr] = m;
                for j in k + 1..=right {
                    let v = self.data[self.slot(k, j)];
                    if v != 0.0 {
                        let s = self.slot(r, j);
                        self.data[s] -= m * v;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solve `A x = b` after [`Self::factor`].
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "factor() first");
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + self.kl).min(n - 1);
            for r in k + 1..=last {
                b[r] -= self.data[self.slot(r, k)] * b[k];
            }
        }
        for k in (0..n).rev() {
            let right = (k + self.ku + self.kl).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=right {
                s -= self.data[self.slot(k, j)] * b[j];
            }
            b[k] = s / self.data[self.slot(k, k)];
        }
    }
}
