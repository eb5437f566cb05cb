//! Plot-ready CSV files and the run manifest.
//!
//! `trajectories.csv` has columns `t, xbar_1, ybar_1, zbar_1, xbar_2, ...`;
//! `weights.csv` has `t, w_1_1, w_1_2, ..., w_K_K`. Groups are numbered
//! from 1. Numbers are written as `{:.16e}`, which round-trips every `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbode::{EquilibriumSolution, RefinementReport};
use crate::model::RunConfig;
use crate::montecarlo::CostEstimate;
use crate::nash::DeviationReport;

pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const NASH_REPORT_FILE: &str = "nash_report.json";
pub const MC_SUMMARY_FILE: &str = "mc_summary.csv";

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn to_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn trajectories_csv(solution: &EquilibriumSolution) -> Result<Vec<u8>> {
    if solution.is_empty() {
        return Err(Error::EmptySolution);
    }
    let t = &solution.trajectories;
    let kk = t.k();
    let mut header = vec!["t".to_string()];
    for k in 1..=kk {
        header.extend([format!("xbar_{k}"), format!("ybar_{k}"), format!("zbar_{k}")]);
    }
    let rows = (0..t.grid.n_nodes()).map(|i| {
        let mut r = vec![fmt_num(t.grid.time(i))];
        for k in 0..kk {
            r.extend([fmt_num(t.xbar[k][i]), fmt_num(t.ybar[k][i]), fmt_num(t.zbar[k][i])]);
        }
        r
    });
    to_csv(header, rows)
}

pub fn weights_csv(solution: &EquilibriumSolution) -> Result<Vec<u8>> {
    if solution.is_empty() {
        return Err(Error::EmptySolution);
    }
    let w = &solution.weights;
    let kk = w.k();
    let mut header = vec!["t".to_string()];
    for k in 1..=kk {
        for l in 1..=kk {
            header.push(format!("w_{k}_{l}"));
        }
    }
    let rows = (0..w.grid.n_nodes()).map(|i| {
        let mut r = vec![fmt_num(w.grid.time(i))];
        for k in 0..kk {
            for l in 0..kk {
                r.push(fmt_num(w.w[k][l][i]));
            }
        }
        r
    });
    to_csv(header, rows)
}

/// Write `trajectories.csv` and `weights.csv` into `dir`. Both files are
/// rendered before anything is written, so a failure leaves no partial
/// output.
pub fn emit_csv(solution: &EquilibriumSolution, dir: &Path) -> Result<Vec<PathBuf>> {
    let traj = trajectories_csv(solution)?;
    let weights = weights_csv(solution)?;
    fs::create_dir_all(dir)?;
    let out = vec![dir.join(TRAJECTORIES_FILE), dir.join(WEIGHTS_FILE)];
    fs::write(&out[0], traj)?;
    fs::write(&out[1], weights)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSettings {
    pub paths: usize,
    pub seed: u64,
    pub rng: String,
}

/// Everything needed to reproduce a run, plus its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub software_version: String,
    pub preset: Option<String>,
    pub config: RunConfig,
    pub n_steps: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: Option<f64>,
    pub wall_time_seconds: f64,
    pub weights_in_unit_interval: bool,
    pub verify_nash: bool,
    pub monte_carlo: Option<MonteCarloSettings>,
    pub refinement: Option<RefinementReport>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub relative_tolerance: f64,
    pub groups: Vec<DeviationReport>,
    pub passed: bool,
}

/// `group, paths, seed, estimate, std_error, analytic_total`; `std_error` is
/// empty when undefined.
pub fn mc_summary_csv(estimates: &[CostEstimate], analytic: &[f64], seed: u64) -> Result<Vec<u8>> {
    let header = ["group", "paths", "seed", "estimate", "std_error", "analytic_total"]
        .map(String::from)
        .to_vec();
    let rows = estimates.iter().zip(analytic).map(|(e, a)| {
        vec![
            (e.group + 1).to_string(),
            e.paths.to_string(),
            seed.to_string(),
            fmt_num(e.mean),
            e.std_error.map(fmt_num).unwrap_or_default(),
            fmt_num(*a),
        ]
    });
    to_csv(header, rows)
}
