//! Symmetry-reduced ε-geodesics between radial potentials.

mod boundary;
mod checks;
mod config;
mod grid;
mod residual;
mod solve;

pub use boundary::BoundaryData;
pub use checks::{
    c0_bound_check, comparison_check, exact_deviation, far_field_samples, hessian_sup, raw_hessian_sup, shifted, C0Check,
    ComparisonCheck,
};
pub use config::{chi, volume_ratio, SolverConfig, UpsilonMode};
pub use grid::{time_profile, GridSpec, PathGrid};
pub use residual::{reduced_residual, reference_density, relative_residual_sup, PositivityMargins};
pub use solve::{solve_epsilon_geodesic, SolverReport, StageReport};

#[cfg(test)]
mod tests;
