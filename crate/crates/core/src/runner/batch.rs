use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_with_grid, RunManifest, RunOptions};
use super::scenario::Scenario;
use crate::error::{invalid, Result};
use crate::geodesic::{comparison_check, PathGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    CheckFailed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub id: String,
    pub status: RowStatus,
    pub checks_passed: usize,
    pub checks_total: usize,
    /// Failed check names or the error message.
    pub detail: String,
}

/// Uniformity probe over an ε-sweep: every `hessian_sup` within a factor
/// `2` of the median, plus ordering between consecutive ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub key: String,
    pub members: Vec<String>,
    pub epsilons: Vec<f64>,
    pub hessian_min: f64,
    pub hessian_median: f64,
    pub hessian_max: f64,
    pub uniform: bool,
    /// Largest `φ_{ε_a} − φ_{ε_b}` over consecutive pairs `ε_a > ε_b`.
    pub comparison_excess: f64,
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub rows: Vec<SummaryRow>,
    pub sweeps: Vec<SweepRow>,
    pub failures: usize,
}

impl BatchSummary {
    pub fn all_passed(&self) -> bool {
        self.failures == 0 && self.sweeps.iter().all(|s| s.uniform && s.ordered)
    }

    /// One CSV: scenario rows first, then sweep rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "id", "status", "checks_passed", "checks_total", "value", "detail"])?;
        for r in &self.rows {
            let status = serde_json::to_value(r.status)?;
            w.write_record([
                "scenario",
                &r.id,
                status.as_str().unwrap_or_default(),
                &r.checks_passed.to_string(),
                &r.checks_total.to_string(),
                "",
                &r.detail,
            ])?;
        }
        for s in &self.sweeps {
            let pass = if s.uniform && s.ordered { "pass" } else { "check_failed" };
            let ratio = (s.hessian_max / s.hessian_median).max(s.hessian_median / s.hessian_min);
            w.write_record([
                "sweep",
                &s.members.join(";"),
                pass,
                &(usize::from(s.uniform) + usize::from(s.ordered)).to_string(),
                "2",
                &ratio.to_string(),
                &format!("comparison_excess={}", s.comparison_excess),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

const SWEEP_RATIO: f64 = 2.0;
const COMPARISON_TOL: f64 = 1e-10;

/// Run scenarios in parallel. Rows are ordered by id regardless of
/// completion order; a failing scenario only marks its own row.
pub fn batch(scenarios: &[Scenario], opts: &RunOptions) -> Result<BatchSummary> {
    let mut seen = BTreeSet::new();
    for s in scenarios {
        if !seen.insert(s.id.as_str()) {
            return Err(invalid("id", format!("duplicate scenario id {:?}", s.id)));
        }
    }
    let mut order: Vec<&Scenario> = scenarios.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let results: Vec<_> = order.par_iter().map(|s| run_with_grid(s, opts)).collect();

    let mut rows = Vec::with_capacity(order.len());
    let mut groups: BTreeMap<String, Vec<(f64, String, f64, PathGrid)>> = BTreeMap::new();
    for (s, res) in order.iter().zip(results) {
        rows.push(match &res {
            Ok((m, _)) => row(m),
            Err(e) => SummaryRow {
                id: s.id.clone(),
                status: RowStatus::Failed,
                checks_passed: 0,
                checks_total: 0,
                detail: e.source.to_string(),
            },
        });
        if let Ok((m, g)) = res {
            let h = m.metrics.get("hessian_sup").copied().unwrap_or(f64::NAN);
            groups
                .entry(s.sweep_key())
                .or_default()
                .push((s.config.epsilon, s.id.clone(), h, g));
        }
    }
    let mut sweeps = Vec::new();
    for (key, mut members) in groups {
        if members.len() < 2 {
            continue;
        }
        members.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        sweeps.push(sweep_row(&key, &members)?);
    }
    let failures = rows.iter().filter(|r| r.status != RowStatus::Pass).count();
    Ok(BatchSummary { rows, sweeps, failures })
}

fn row(m: &RunManifest) -> SummaryRow {
    let failed: Vec<&str> = m
        .checks
        .iter()
        .filter(|(_, c)| !c.pass)
        .map(|(k, _)| k.as_str())
        .collect();
    SummaryRow {
        id: m.scenario_id.clone(),
        status: if failed.is_empty() {
            RowStatus::Pass
        } else {
            RowStatus::CheckFailed
        },
        checks_passed: m.checks.len() - failed.len(),
        checks_total: m.checks.len(),
        detail: failed.join(";"),
    }
}

fn sweep_row(key: &str, members: &[(f64, String, f64, PathGrid)]) -> Result<SweepRow> {
    let mut h: Vec<f64> = members.iter().map(|m| m.2).collect();
    h.sort_by(f64::total_cmp);
    let mid = h.len() / 2;
    let median = if h.len() % 2 == 1 {
        h[mid]
    } else {
        0.5 * (h[mid - 1] + h[mid])
    };
    let (lo, hi) = (h[0], h[h.len() - 1]);
    let mut excess = f64::NEG_INFINITY;
    for pair in members.windows(2) {
        excess = excess.max(comparison_check(&pair[0].3, &pair[1].3, COMPARISON_TOL)?.worst_excess);
    }
    Ok(SweepRow {
        key: key[..16].to_string(),
        members: members.iter().map(|m| m.1.clone()).collect(),
        epsilons: members.iter().map(|m| m.0).collect(),
        hessian_min: lo,
        hessian_median: median,
        hessian_max: hi,
        uniform: hi <= SWEEP_RATIO * median && lo >= median / SWEEP_RATIO,
        comparison_excess: excess,
        ordered: excess <= COMPARISON_TOL,
    })
}

/// Write `summary.csv` and `summary.json` under `out`.
pub fn write_summary(summary: &BatchSummary, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    summary.write_csv(std::fs::File::create(out.join("summary.csv"))?)?;
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(out.join("summary.json"), text)?;
    Ok(())
}
