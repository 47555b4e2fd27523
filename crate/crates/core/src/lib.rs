//! Numerical laboratory for ε-geodesics between U(n)-invariant ALE Kähler
//! potentials on O(−k) → CP^{n−1}: curvature of Calabi-ansatz metrics, a
//! damped-Newton solver for the reduced ε-geodesic equation, Mabuchi
//! K-energy along the solutions, toric intersection numbers on the
//! compactification, and decay/mass diagnostics.

pub mod analysis;
pub mod banded;
pub mod energy;
pub mod error;
pub mod geodesic;
pub mod geometry;
pub mod quadrature;
pub mod runner;
pub mod toric;

pub use error::{Error, Result};
