use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::{CascadeConfig, Mode};
use super::run::CascadeRun;
use super::sachs::SachsDiagnostics;
use super::table::Family;

pub const IDENTICALLY_ZERO: &str = "identically-zero";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Fitted `α` in `|X| ~ r^{-α}`; `None` when absent or below the floor.
    pub measured: Option<f64>,
    pub expected: Option<f64>,
    pub pass: bool,
    pub class: String,
    /// RMS log-log fit residual.
    pub residual: Option<f64>,
}

/// Boundedness of one weighted slot group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub stage: String,
    pub weight: i32,
    pub eigenvalue: f64,
    pub sup_norm: f64,
    /// Log-log slope of the group norm over the fit window.
    pub tail_slope: Option<f64>,
    pub bounded: bool,
    /// Relative distance from the constrained subspace at `r_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub mode: Mode,
    pub d: usize,
    pub nu: u32,
    pub seed: u64,
    pub components: IndexMap<String, ComponentReport>,
    pub sachs: SachsDiagnostics,
    pub bounded_states: bool,
    /// Every stage matrix had eigenvalues with nonpositive real part.
    pub preconditions_ok: bool,
    pub all_pass: bool,
    pub states: IndexMap<String, StateReport>,
    pub config: CascadeConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl ExponentReport {
    pub fn component(&self, f: Family) -> &ComponentReport {
        &self.components[f.key()]
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable list of everything that did not pass.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, c) in &self.components {
            if !c.pass {
                out.push(format!(
                    "{k}: measured {} < expected {} - {}",
                    c.measured.map_or("none".into(), |v| format!("{v:.3}")),
                    c.expected.map_or("none".into(), |v| format!("{v}")),
                    self.config.exponent_tol
                ));
            }
        }
        for (k, s) in &self.states {
            if !s.bounded {
                out.push(format!("{k}: unbounded (tail slope {:?})", s.tail_slope));
            }
        }
        if !self.preconditions_ok {
            out.push("a stage matrix has an eigenvalue with positive real part".into());
        }
        out
    }
}

/// Writes `stage_<key>.csv`, `sachs.csv` and `exponents.csv` into `dir`.
pub fn write_csv(run: &CascadeRun, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in &run.stages {
        let path = dir.join(format!("stage_{}.csv", s.layout.stage.key()));
        s.trajectory.write_csv_with_header(
            BufWriter::new(File::create(&path)?),
            Some(&s.layout.component_names()),
        )?;
        written.push(path);
    }

    let path = dir.join("sachs.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    w.write_record(["r", "deviation_norm", "residual_norm"])?;
    for ((r, dev), res) in run
        .sachs
        .radii()
        .iter()
        .zip(run.sachs.deviation_norms())
        .zip(run.sachs.residual_norms())
    {
        w.write_record([format!("{r:e}"), format!("{dev:e}"), format!("{res:e}")])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("exponents.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    w.write_record([
        "component",
        "measured",
        "expected",
        "pass",
        "class",
        "residual",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
    for (k, c) in &run.report.components {
        w.write_record([
            k.clone(),
            opt(c.measured),
            opt(c.expected),
            c.pass.to_string(),
            c.class.clone(),
            opt(c.residual),
        ])?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}
