//! Tensor grid in (ρ, t) carrying the relative potential of a path.

use serde::{Deserialize, Serialize};

use super::boundary::BoundaryData;
use crate::error::{invalid, Error, Result};
use crate::geometry::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_rho: usize,
    pub n_t: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_rho < 4 {
            return Err(invalid("grid.n_rho", format!("need ≥ 4 nodes, got {}", self.n_rho)));
        }
        if self.n_t < 3 {
            return Err(invalid("grid.n_t", format!("need ≥ 3 nodes, got {}", self.n_t)));
        }
        if !(self.rho_max > self.rho_min) || !self.rho_min.is_finite() || !self.rho_max.is_finite() {
            return Err(invalid(
                "grid.rho_max",
                format!("need rho_min < rho_max, got [{}, {}]", self.rho_min, self.rho_max),
            ));
        }
        Ok(())
    }

    pub fn h_rho(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.n_rho - 1) as f64
    }

    pub fn h_t(&self) -> f64 {
        1.0 / (self.n_t - 1) as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        if i == self.n_rho - 1 {
            self.rho_max
        } else {
            self.rho_min + i as f64 * self.h_rho()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.h_t()
    }

    /// Unknowns: every node except the Dirichlet rows t = 0, 1 and column ρ_max.
    pub fn unknowns(&self) -> usize {
        (self.n_rho - 1) * (self.n_t - 2)
    }

    /// Unknown index of interior node `(i, j)`.
    #[inline]
    pub fn unknown(&self, i: usize, j: usize) -> usize {
        (j - 1) * (self.n_rho - 1) + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.n_rho + i
    }

    /// Same spec with both mesh widths halved.
    pub fn refined(&self) -> Self {
        Self {
            n_rho: 2 * self.n_rho - 1,
            n_t: 2 * self.n_t - 1,
            ..*self
        }
    }
}

/// Far-field time profile `c(t) = s·t(t−1)/2`.
pub fn time_profile(s: f64, t: f64) -> f64 {
    0.5 * s * t * (t - 1.0)
}

/// Discretized path `Φ = u + (1−t)ψ₀ + tψ₁ + φ`; `phi` holds the relative
/// potential φ on all nodes, row-major in t.
#[derive(Debug, Clone)]
pub struct PathGrid {
    pub spec: GridSpec,
    pub rho: Vec<f64>,
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi0: BoundaryData,
    pub psi1: BoundaryData,
    /// `[ψ₀, ψ₀′, ψ₀″]` at each ρ node.
    pub psi0_nodes: Vec<[f64; 3]>,
    pub psi1_nodes: Vec<[f64; 3]>,
    /// `[u′, u″, u‴, u⁗]` of the background at each ρ node.
    pub u_nodes: Vec<[f64; 4]>,
    pub background: RadialProfile,
    /// Right-hand-side parameter the values were produced for.
    pub epsilon: f64,
}

impl PathGrid {
    /// Grid holding the exact zero-data solution `φ = s·t(t−1)/2`.
    pub fn new(
        spec: GridSpec,
        background: RadialProfile,
        psi0: BoundaryData,
        psi1: BoundaryData,
        s: f64,
    ) -> Result<Self> {
        spec.validate()?;
        let rho: Vec<f64> = (0..spec.n_rho).map(|i| spec.rho(i)).collect();
        let t: Vec<f64> = (0..spec.n_t).map(|j| spec.t(j)).collect();
        let u_nodes = rho
            .iter()
            .map(|&r| background.potential_derivatives(r))
            .collect::<Result<Vec<_>>>()?;
        let psi0_nodes = rho.iter().map(|&r| psi0.eval(r, spec.rho_min)).collect();
        let psi1_nodes = rho.iter().map(|&r| psi1.eval(r, spec.rho_min)).collect();
        let mut g = Self {
            spec,
            rho,
            t,
            phi: vec![0.0; spec.n_rho * spec.n_t],
            psi0,
            psi1,
            psi0_nodes,
            psi1_nodes,
            u_nodes,
            background,
            epsilon: s,
        };
        g.fill_time_profile(s);
        Ok(g)
    }

    pub fn fill_time_profile(&mut self, s: f64) {
        for j in 0..self.spec.n_t {
            let c = time_profile(s, self.t[j]);
            for i in 0..self.spec.n_rho {
                let k = self.spec.node(i, j);
                self.phi[k] = c;
            }
        }
        self.epsilon = s;
    }

    /// Reset the Dirichlet column at ρ_max to the far-field profile for `s`.
    pub fn set_outer_boundary(&mut self, s: f64) {
        let i = self.spec.n_rho - 1;
        for j in 0..self.spec.n_t {
            let k = self.spec.node(i, j);
            self.phi[k] = time_profile(s, self.t[j]);
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.phi[self.spec.node(i, j)]
    }

    /// Interior unknowns in solver ordering.
    pub fn unknown_values(&self) -> Vec<f64> {
        let s = &self.spec;
        let mut out = vec![0.0; s.unknowns()];
        for j in 1..s.n_t - 1 {
            for i in 0..s.n_rho - 1 {
                out[s.unknown(i, j)] = self.at(i, j);
            }
        }
        out
    }

    pub fn set_unknown_values(&mut self, x: &[f64]) {
        let s = self.spec;
        for j in 1..s.n_t - 1 {
            for i in 0..s.n_rho - 1 {
                self.phi[s.node(i, j)] = x[s.unknown(i, j)];
            }
        }
    }

    /// `(1−t)ψ₀ + tψ₁` and its ρ-derivatives at node `(i, j)`.
    pub fn psi_lin(&self, i: usize, j: usize) -> [f64; 3] {
        let t = self.t[j];
        let (a, b) = (self.psi0_nodes[i], self.psi1_nodes[i]);
        [
            (1.0 - t) * a[0] + t * b[0],
            (1.0 - t) * a[1] + t * b[1],
            (1.0 - t) * a[2] + t * b[2],
        ]
    }

    /// `ψ₁′ − ψ₀′` at ρ node `i`.
    pub fn psi_diff_prime(&self, i: usize) -> f64 {
        self.psi1_nodes[i][1] - self.psi0_nodes[i][1]
    }

    /// `ψ₁ − ψ₀` at ρ node `i`.
    pub fn psi_diff(&self, i: usize) -> f64 {
        self.psi1_nodes[i][0] - self.psi0_nodes[i][0]
    }

    pub fn same_discretization(&self, other: &PathGrid) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Mismatch(format!("grid specs differ: {:?} vs {:?}", self.spec, other.spec)));
        }
        if self.psi0 != other.psi0 || self.psi1 != other.psi1 {
            return Err(Error::Mismatch("boundary data differ".into()));
        }
        if self.background != other.background {
            return Err(Error::Mismatch("background profiles differ".into()));
        }
        Ok(())
    }

    /// Write `rho,t,phi` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rho", "t", "phi"])?;
        for j in 0..self.spec.n_t {
            for i in 0..self.spec.n_rho {
                w.serialize((self.rho[i], self.t[j], self.at(i, j)))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Replace `phi` with values read from a `rho,t,phi` CSV on the same grid.
    pub fn read_phi_csv<R: std::io::Read>(&mut self, input: R) -> Result<()> {
        let mut r = csv::Reader::from_reader(input);
        let mut count = 0;
        for rec in r.deserialize() {
            let (rho, t, phi): (f64, f64, f64) = rec?;
            let i = ((rho - self.spec.rho_min) / self.spec.h_rho()).round() as isize;
            let j = (t / self.spec.h_t()).round() as isize;
            if i < 0 || j < 0 || i as usize >= self.spec.n_rho || j as usize >= self.spec.n_t {
                return Err(Error::Mismatch(format!("node (ρ={rho}, t={t}) is not on the grid")));
            }
            let (i, j) = (i as usize, j as usize);
            if (self.rho[i] - rho).abs() > 1e-9 * (1.0 + rho.abs()) || (self.t[j] - t).abs() > 1e-9 {
                return Err(Error::Mismatch(format!("node (ρ={rho}, t={t}) is not on the grid")));
            }
            let k = self.spec.node(i, j);
            self.phi[k] = phi;
            count += 1;
        }
        if count != self.phi.len() {
            return Err(Error::Mismatch(format!(
                "CSV has {count} rows, grid has {} nodes",
                self.phi.len()
            )));
        }
        Ok(())
    }
}
