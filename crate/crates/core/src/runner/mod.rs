//! Scenario files, cached runs with manifests, and parallel batches.

mod batch;
mod run;
mod scenario;

pub use batch::{batch, write_summary, BatchSummary, RowStatus, SummaryRow, SweepRow};
pub use run::{oracle_mismatch, run_scenario, scenario_dir, Check, RunManifest, RunOptions, RunStatus, ScenarioError, TOOL_VERSION};
pub use scenario::{parse_scenarios, Analyses, GeodesicConfig, ProfileKind, Scenario, Tolerances};
