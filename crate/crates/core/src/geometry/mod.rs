//! Curvature engine for U(n)-invariant Kähler metrics in the Calabi ansatz.

pub mod curvature;
pub mod doc;
pub mod interp;
pub mod profile;

pub use curvature::{
    curvature_scan, default_tau_grid, lebrun_profile, lebrun_profile_n, metric_eigenvalues,
    ricci_eigenvalues, ricci_sign_scan, scalar_curvature, write_scan_csv, CurvatureSample, RicciSign,
    SignScan, Witness,
};
pub use interp::MonotoneCubic;
pub use doc::{LaurentParams, ProfileDoc, ProfileForm};
pub use profile::{Anchor, RadialProfile, Shape, DEFAULT_DELTA};
