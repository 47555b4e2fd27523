use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::geodesic::{BoundaryData, GridSpec, SolverConfig, UpsilonMode};
use crate::geometry::{lebrun_profile_n, ProfileDoc, ProfileForm, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// LeBrun's scalar-flat profile for `(n, k, tau_min)`.
    #[default]
    Lebrun,
    /// The flat cone `C^n/Z_k`; `tau_min` is ignored.
    Flat,
    /// Monotone cubic through `samples`.
    Samples,
}

fn d_newton() -> f64 {
    1e-10
}
fn d_c0() -> f64 {
    1e-10
}
fn d_iters() -> usize {
    60
}
fn d_backtracks() -> usize {
    40
}
fn d_gamma() -> f64 {
    1.0
}
fn d_exact() -> f64 {
    1e-8
}
fn d_convexity() -> f64 {
    1e-6
}
fn d_identity() -> f64 {
    1e-10
}
fn d_fd() -> f64 {
    1e-2
}
fn d_decay_margin() -> f64 {
    0.3
}
fn d_oracle() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "d_newton")]
    pub newton: f64,
    #[serde(default = "d_iters")]
    pub max_iters: usize,
    #[serde(default = "d_backtracks")]
    pub max_backtracks: usize,
    #[serde(default = "d_gamma")]
    pub decay_gamma: f64,
    #[serde(default = "d_c0")]
    pub c0: f64,
    /// Sup distance from `ε·t(t−1)/2` accepted for zero boundary data.
    #[serde(default = "d_exact")]
    pub exact: f64,
    #[serde(default = "d_convexity")]
    pub convexity: f64,
    #[serde(default = "d_identity")]
    pub identity: f64,
    /// Relative formula/finite-difference mismatch of `d²K/dt²`.
    #[serde(default = "d_fd")]
    pub fd: f64,
    /// Allowed excess of the fitted far-field slope over `−γ`.
    #[serde(default = "d_decay_margin")]
    pub decay_margin: f64,
    #[serde(default = "d_oracle")]
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

/// Inputs of one ε-geodesic solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicConfig {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub tau_min: f64,
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
    pub psi0: BoundaryData,
    pub psi1: BoundaryData,
    pub epsilon: f64,
    #[serde(default)]
    pub upsilon_mode: UpsilonMode,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl GeodesicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", format!("need n ≥ 2, got {}", self.n)));
        }
        if self.k < 1 {
            return Err(invalid("k", "need k ≥ 1, got 0"));
        }
        if self.profile == ProfileKind::Lebrun && !(self.tau_min > 0.0) {
            return Err(invalid("tau_min", format!("must be positive, got {}", self.tau_min)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(invalid("epsilon", format!("must lie in (0, 1], got {}", self.epsilon)));
        }
        self.grid.validate()?;
        self.solver_config().validate()
    }

    pub fn background(&self) -> Result<RadialProfile> {
        match self.profile {
            ProfileKind::Lebrun => lebrun_profile_n(self.n, self.k, self.tau_min),
            ProfileKind::Flat => RadialProfile::flat(self.n, self.k),
            ProfileKind::Samples => ProfileDoc {
                n: self.n,
                k: self.k,
                tau_min: self.tau_min,
                form: ProfileForm::Samples,
                params: None,
                samples: self.samples.clone(),
            }
            .to_profile(),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let t = &self.tolerances;
        SolverConfig {
            epsilon: self.epsilon,
            upsilon_mode: self.upsilon_mode,
            schedule: self.schedule.clone(),
            grid: self.grid,
            newton_tol: t.newton,
            max_iters: t.max_iters,
            max_backtracks: t.max_backtracks,
            decay_gamma: t.decay_gamma,
            c0_tol: t.c0,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analyses {
    #[serde(default = "yes")]
    pub c0_check: bool,
    #[serde(default)]
    pub decay: bool,
    #[serde(default)]
    pub energy: bool,
    #[serde(default)]
    pub intersections: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Self {
            c0_check: true,
            decay: false,
            energy: false,
            intersections: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    #[serde(flatten)]
    pub config: GeodesicConfig,
    #[serde(default)]
    pub analyses: Analyses,
    /// Overrides the run's output root for this scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id == "." || self.id == ".." {
            return Err(invalid("id", format!("{:?} is not usable as a directory name", self.id)));
        }
        self.config.validate()
    }

    /// SHA-256 of the canonical JSON of everything that affects the results
    /// (the output location is excluded). Object keys are emitted sorted, so
    /// the hash does not depend on key order in the input.
    pub fn content_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("scenario serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output_dir");
        }
        digest(&v)
    }

    /// Hash with `id`, `epsilon` and `schedule` removed; scenarios sharing it
    /// form an ε-sweep.
    pub fn sweep_key(&self) -> String {
        let mut v = serde_json::to_value(self).expect("scenario serializes");
        if let Some(m) = v.as_object_mut() {
            for key in ["output_dir", "id", "epsilon", "schedule"] {
                m.remove(key);
            }
        }
        digest(&v)
    }
}

fn digest(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Parse either a single scenario object or an array of them.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    Ok(match v {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(serde_json::from_value)
            .collect::<std::result::Result<_, _>>()?,
        other => vec![serde_json::from_value(other)?],
    })
}
