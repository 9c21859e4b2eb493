//! Campaign reports: named empirical-vs-analytic rows with pass flags, a
//! config echo, and the seed ledger needed to reproduce the run bit for bit.
//!
//! A report is plain data. Every pass flag is recomputable from the row it
//! sits in (`pass` iff `abs_error <= tolerance`), so a report file can be
//! audited without rerunning anything.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Version tag of the trial-seed derivation scheme recorded in reports.
pub const SEED_DERIVATION_RULE: &str = "splitmix64-per-trial-v1";

/// One comparison: an empirical quantity against its analytic target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub empirical: f64,
    pub analytic: f64,
    pub abs_error: f64,
    /// Monte Carlo standard error of `empirical` where meaningful, 0 for
    /// deterministic quantities.
    pub std_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(
        name: impl Into<String>,
        empirical: f64,
        analytic: f64,
        std_error: f64,
        tolerance: f64,
    ) -> ReportRow {
        let abs_error = (empirical - analytic).abs();
        ReportRow {
            name: name.into(),
            empirical,
            analytic,
            abs_error,
            std_error,
            tolerance,
            pass: abs_error <= tolerance,
        }
    }
}

/// Where the randomness came from: the master seed plus the version of the
/// rule deriving per-trial seeds from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedLedger {
    pub master_seed: u64,
    pub derivation: String,
}

/// Everything one campaign produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub runtime_ms: u64,
    pub seed_ledger: SeedLedger,
}

impl Report {
    pub fn new(config: ExperimentConfig, rows: Vec<ReportRow>, runtime_ms: u64) -> Report {
        let seed_ledger = SeedLedger {
            master_seed: config.master_seed,
            derivation: SEED_DERIVATION_RULE.to_string(),
        };
        Report {
            config,
            rows,
            runtime_ms,
            seed_ledger,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Checks the internal consistency of every row: the recorded error and
    /// pass flag must match what (empirical, analytic, tolerance) imply.
    pub fn verify_row_flags(&self) -> bool {
        self.rows.iter().all(|r| {
            r.abs_error == (r.empirical - r.analytic).abs()
                && r.pass == (r.abs_error <= r.tolerance)
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// The rows as a CSV table (header + one line per row).
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("name,empirical,analytic,abs_error,std_error,tolerance,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.name, r.empirical, r.analytic, r.abs_error, r.std_error, r.tolerance, r.pass
            ));
        }
        out
    }

    pub fn write_rows_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.rows_csv())?;
        Ok(())
    }

    /// Human-readable fixed-width table for terminal output.
    pub fn render_text(&self) -> String {
        let name_width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let mut out = format!(
            "experiment: {}  (n={}, delta={}, p={}, trials={}, seed={})\n",
            self.config.experiment,
            self.config.params.n,
            self.config.params.delta,
            self.config.params.p,
            self.config.trials,
            self.config.master_seed,
        );
        out.push_str(&format!(
            "{:<name_width$}  {:>14}  {:>14}  {:>12}  {:>12}  {:>12}  {}\n",
            "name", "empirical", "analytic", "abs_error", "std_error", "tolerance", "status"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<name_width$}  {:>14.6}  {:>14.6}  {:>12.3e}  {:>12.3e}  {:>12.3e}  {}\n",
                r.name,
                r.empirical,
                r.analytic,
                r.abs_error,
                r.std_error,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "{} of {} rows pass ({} ms)\n",
            self.rows.iter().filter(|r| r.pass).count(),
            self.rows.len(),
            self.runtime_ms
        ));
        out
    }
}

/// A 2D count histogram as a CSV matrix: the header row carries the second
/// coordinate's bin centers, each following line one first-coordinate bin.
pub fn histogram_matrix_csv(x_centers: &[f64], y_centers: &[f64], counts: &[Vec<u64>]) -> Result<String> {
    if counts.len() != x_centers.len()
        || counts.iter().any(|row| row.len() != y_centers.len())
    {
        return Err(Error::invalid(
            "histogram dimensions do not match the axis labels",
        ));
    }
    let mut out = String::from("x\\y");
    for y in y_centers {
        out.push_str(&format!(",{y}"));
    }
    out.push('\n');
    for (x, row) in x_centers.iter().zip(counts) {
        out.push_str(&x.to_string());
        for c in row {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    Ok(out)
}
