use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use tsi_chain::model::ModelParams;
use tsi_chain::observables::MetricsRecord;
use tsi_chain::Error;

/// Metric columns shared by grid.csv and line.csv.
pub const METRIC_COLUMNS: [&str; 6] = ["mz", "c_l1_scaled", "ssp", "ee_half", "conc_nn", "conc_nnn"];

/// One row of grid.csv / line.csv. Unselected metrics and every metric of a
/// failed point serialize as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub alpha: f64,
    pub h: f64,
    pub n_sites: usize,
    pub phase: Option<&'static str>,
    pub mz: Option<f64>,
    pub c_l1_scaled: Option<f64>,
    pub ssp: Option<f64>,
    pub ee_half: Option<f64>,
    pub conc_nn: Option<f64>,
    pub conc_nnn: Option<f64>,
}

impl GridRow {
    pub fn new(params: &ModelParams, outcome: &Result<MetricsRecord, Error>) -> Self {
        match outcome {
            Ok(r) => GridRow {
                alpha: r.alpha,
                h: r.h,
                n_sites: r.n_sites,
                phase: r.phase.map(|p| p.phase.name()),
                mz: Some(r.mz),
                c_l1_scaled: r.c_l1_scaled,
                ssp: r.ssp,
                ee_half: r.ee_half,
                conc_nn: r.conc_nn,
                conc_nnn: r.conc_nnn,
            },
            Err(_) => GridRow {
                alpha: params.alpha,
                h: params.h,
                n_sites: params.n_sites,
                phase: None,
                mz: None,
                c_l1_scaled: None,
                ssp: None,
                ee_half: None,
                conc_nn: None,
                conc_nnn: None,
            },
        }
    }
}

/// Failed point, listed in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub alpha: f64,
    pub h: f64,
    pub n_sites: usize,
    pub error: String,
}

impl PointFailure {
    pub fn new(p: &ModelParams, e: &Error) -> Self {
        PointFailure {
            alpha: p.alpha,
            h: p.h,
            n_sites: p.n_sites,
            error: e.to_string(),
        }
    }
}

/// Collects the paths written during a run.
#[derive(Debug, Default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// A csv file with an explicit header, for schemas with a variable tail.
    pub fn csv_records(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
