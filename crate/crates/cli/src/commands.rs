use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use tsi_chain::analysis::{
    candidate_fits, central_charge, detect_transitions, level_crossings, local_minima, Provenance, ScalingFit,
    SweepAxis, SweepPoint, SweepResult, Transition,
};
use tsi_chain::model::{critical_fields, ModelParams};
use tsi_chain::observables::evaluate_point;
use tsi_chain::oracle::{compare_point, ComparisonOutcome, ComparisonRow, Deltas};

use crate::config::{CommandKind, RunConfig};
use crate::output::{num, GridRow, Outputs, PointFailure, METRIC_COLUMNS};
use crate::svg::heatmap;

/// How a command ended, beyond I/O and configuration errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NumericalFailure,
    OracleMismatch,
}

pub fn run(cfg: &RunConfig) -> Result<Status> {
    let started = Instant::now();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("building worker pool")?;
    let mut out = Outputs::new(&cfg.out)?;
    let (status, failures) = pool.install(|| match cfg.command {
        CommandKind::Sweep => cmd_sweep(cfg, &mut out),
        CommandKind::Line => cmd_line(cfg, &mut out, timestamp),
        CommandKind::Scaling => cmd_scaling(cfg, &mut out),
        CommandKind::Oracle => cmd_oracle(cfg, &mut out),
        CommandKind::Critical => cmd_critical(cfg, &mut out),
    })?;
    let manifest = Manifest {
        command: cfg.command,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: timestamp,
        wall_time_s: started.elapsed().as_secs_f64(),
        config: cfg,
        outputs: out.written.clone(),
        failures,
    };
    out.json("manifest.json", &manifest)?;
    Ok(status)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: CommandKind,
    version: &'static str,
    timestamp_unix: u64,
    wall_time_s: f64,
    config: &'a RunConfig,
    outputs: Vec<String>,
    failures: Vec<PointFailure>,
}

fn template(cfg: &RunConfig, alpha: f64, h: f64, n: usize) -> Result<ModelParams> {
    Ok(ModelParams::new(alpha, h, n)?.with_sea(cfg.sea))
}

/// Evaluates the points on the worker pool; results keep the input order.
fn evaluate(cfg: &RunConfig, points: Vec<ModelParams>) -> Vec<SweepPoint> {
    let mode = cfg.ssp_mode();
    points
        .into_par_iter()
        .map(|params| SweepPoint {
            params,
            outcome: evaluate_point(&params, cfg.metrics, mode),
        })
        .collect()
}

fn failures_of(points: &[SweepPoint]) -> Vec<PointFailure> {
    points
        .iter()
        .filter_map(|p| p.outcome.as_ref().err().map(|e| PointFailure::new(&p.params, e)))
        .collect()
}

fn status_of(failures: &[PointFailure]) -> Status {
    if failures.is_empty() {
        Status::Ok
    } else {
        Status::NumericalFailure
    }
}

fn metric_value(row: &GridRow, name: &str) -> Option<f64> {
    match name {
        "mz" => row.mz,
        "c_l1_scaled" => row.c_l1_scaled,
        "ssp" => row.ssp,
        "ee_half" => row.ee_half,
        "conc_nn" => row.conc_nn,
        "conc_nnn" => row.conc_nnn,
        _ => None,
    }
}

fn cmd_sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<(Status, Vec<PointFailure>)> {
    let (alphas, fields) = (cfg.alpha.values(), cfg.h.values());
    let axis = SweepAxis::Grid {
        alphas: alphas.clone(),
        fields: fields.clone(),
    };
    let points = evaluate(cfg, axis.points(&template(cfg, alphas[0], fields[0], cfg.n_sites[0])?)?);
    let rows: Vec<GridRow> = points.iter().map(|p| GridRow::new(&p.params, &p.outcome)).collect();
    if cfg.formats.csv {
        out.csv("grid.csv", &rows)?;
    }
    if cfg.formats.json {
        out.json("grid.json", &rows)?;
    }
    if cfg.formats.svg {
        let maps = [
            (cfg.metrics.c_l1, "c_l1_scaled"),
            (cfg.metrics.ssp, "ssp"),
            (cfg.metrics.ee, "ee_half"),
            (cfg.metrics.concurrence, "conc_nn"),
        ];
        for (_, name) in maps.iter().filter(|(on, _)| *on) {
            let values: Vec<Option<f64>> = rows.iter().map(|r| metric_value(r, name)).collect();
            let title = format!("{name}, N = {}", cfg.n_sites[0]);
            out.text(&format!("{name}.svg"), &heatmap(&title, &alphas, &fields, &values))?;
        }
    }
    let failures = failures_of(&points);
    Ok((status_of(&failures), failures))
}

#[derive(Serialize)]
struct LineSeries {
    n_sites: usize,
    transitions: BTreeMap<&'static str, Vec<TransitionOut>>,
    minima: BTreeMap<&'static str, Vec<f64>>,
    ssp_unit_crossings: Vec<f64>,
    errors: BTreeMap<&'static str, String>,
}

#[derive(Serialize)]
struct TransitionOut {
    location: f64,
    uncertainty: f64,
    strength: f64,
}

impl From<&Transition> for TransitionOut {
    fn from(t: &Transition) -> Self {
        TransitionOut {
            location: t.location,
            uncertainty: t.uncertainty,
            strength: t.strength,
        }
    }
}

#[derive(Serialize)]
struct LineReport {
    axis: &'static str,
    series: Vec<LineSeries>,
}

fn cmd_line(cfg: &RunConfig, out: &mut Outputs, timestamp: u64) -> Result<(Status, Vec<PointFailure>)> {
    let along_alpha = cfg.alpha.len() > 1;
    let coords = if along_alpha {
        cfg.alpha.values()
    } else {
        cfg.h.values()
    };
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut failures = Vec::new();
    for &n in &cfg.n_sites {
        let (a0, h0) = (cfg.alpha.values()[0], cfg.h.values()[0]);
        let t = template(cfg, a0, h0, n)?;
        let axis = if along_alpha {
            SweepAxis::Alpha(coords.clone())
        } else {
            SweepAxis::Field(coords.clone())
        };
        let points = evaluate(cfg, axis.points(&t)?);
        failures.extend(failures_of(&points));
        let result = SweepResult {
            axis,
            points,
            provenance: Provenance::new(t, timestamp.to_string()),
        };
        let series_rows: Vec<GridRow> = result
            .points
            .iter()
            .map(|p| GridRow::new(&p.params, &p.outcome))
            .collect();
        let mut s = LineSeries {
            n_sites: n,
            transitions: BTreeMap::new(),
            minima: BTreeMap::new(),
            ssp_unit_crossings: Vec::new(),
            errors: BTreeMap::new(),
        };
        for name in METRIC_COLUMNS {
            let ys: Option<Vec<f64>> = series_rows.iter().map(|r| metric_value(r, name)).collect();
            let Some(ys) = ys else {
                continue;
            };
            match detect_transitions(&result, name) {
                Ok(ts) => {
                    s.transitions.insert(name, ts.iter().map(TransitionOut::from).collect());
                }
                Err(e) => {
                    s.errors.insert(name, e.to_string());
                }
            }
            s.minima.insert(name, local_minima(&coords, &ys));
            if name == "ssp" {
                s.ssp_unit_crossings = level_crossings(&coords, &ys, 1.0);
            }
        }
        series.push(s);
        rows.extend(series_rows);
    }
    if cfg.formats.csv {
        out.csv("line.csv", &rows)?;
    }
    if cfg.formats.json {
        out.json("line.json", &rows)?;
    }
    let report = LineReport {
        axis: if along_alpha { "alpha" } else { "h" },
        series,
    };
    out.json("detected-transitions.json", &report)?;
    Ok((status_of(&failures), failures))
}

#[derive(Serialize)]
struct ScalingRow {
    n_sites: usize,
    alpha: f64,
    h: f64,
    phase: Option<&'static str>,
    mz: Option<f64>,
    c_l1: Option<f64>,
    c_l1_scaled: Option<f64>,
    ssp: Option<f64>,
    ee_half: Option<f64>,
    conc_nn: Option<f64>,
    conc_nnn: Option<f64>,
}

#[derive(Serialize)]
struct FitOut {
    model: &'static str,
    a: f64,
    b: f64,
    rms_residual: f64,
}

impl From<&ScalingFit> for FitOut {
    fn from(f: &ScalingFit) -> Self {
        FitOut {
            model: f.model.name(),
            a: f.a,
            b: f.b,
            rms_residual: f.rms_residual,
        }
    }
}

#[derive(Serialize)]
struct MetricFits {
    best: FitOut,
    candidates: Vec<FitOut>,
}

#[derive(Serialize)]
struct CentralChargeOut {
    n_sites: usize,
    c: Option<f64>,
    c_bits: Option<f64>,
    slope: Option<f64>,
    intercept: Option<f64>,
    rms_residual: Option<f64>,
    block_min: Option<usize>,
    block_max: Option<usize>,
    error: Option<String>,
}

#[derive(Serialize)]
struct FitsReport {
    alpha: f64,
    h: f64,
    n_sites: Vec<usize>,
    fits: BTreeMap<&'static str, MetricFits>,
    errors: BTreeMap<&'static str, String>,
    central_charge: Vec<CentralChargeOut>,
}

fn cmd_scaling(cfg: &RunConfig, out: &mut Outputs) -> Result<(Status, Vec<PointFailure>)> {
    let (alpha, h) = (cfg.alpha.values()[0], cfg.h.values()[0]);
    let t = template(cfg, alpha, h, cfg.n_sites[0])?;
    let points = evaluate(cfg, SweepAxis::Sites(cfg.n_sites.clone()).points(&t)?);
    let failures = failures_of(&points);
    let rows: Vec<ScalingRow> = points
        .iter()
        .map(|p| {
            let g = GridRow::new(&p.params, &p.outcome);
            ScalingRow {
                n_sites: g.n_sites,
                alpha: g.alpha,
                h: g.h,
                phase: g.phase,
                mz: g.mz,
                c_l1: g.c_l1_scaled.map(|c| c * g.n_sites as f64),
                c_l1_scaled: g.c_l1_scaled,
                ssp: g.ssp,
                ee_half: g.ee_half,
                conc_nn: g.conc_nn,
                conc_nnn: g.conc_nnn,
            }
        })
        .collect();
    if cfg.formats.csv {
        out.csv("scaling.csv", &rows)?;
    }
    let xs: Vec<f64> = cfg.n_sites.iter().map(|&n| n as f64).collect();
    type Column = (&'static str, fn(&ScalingRow) -> Option<f64>);
    let columns: [Column; 6] = [
        ("c_l1", |r| r.c_l1),
        ("c_l1_scaled", |r| r.c_l1_scaled),
        ("ssp", |r| r.ssp),
        ("ee_half", |r| r.ee_half),
        ("conc_nn", |r| r.conc_nn),
        ("conc_nnn", |r| r.conc_nnn),
    ];
    let mut fits = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for (name, get) in columns {
        let Some(ys) = rows.iter().map(get).collect::<Option<Vec<f64>>>() else {
            continue;
        };
        match candidate_fits(&xs, &ys) {
            Ok(c) => {
                let best = c
                    .iter()
                    .min_by(|a, b| a.rms_residual.total_cmp(&b.rms_residual))
                    .expect("three candidates");
                fits.insert(
                    name,
                    MetricFits {
                        best: best.into(),
                        candidates: c.iter().map(FitOut::from).collect(),
                    },
                );
            }
            Err(e) => {
                errors.insert(name, e.to_string());
            }
        }
    }
    let mut charges = Vec::new();
    if cfg.metrics.ee {
        let results: Vec<_> = cfg
            .n_sites
            .par_iter()
            .map(|&n| {
                let ls = cfg.blocks.lengths(n);
                (n, template(cfg, alpha, h, n).and_then(|p| Ok(central_charge(&p, &ls)?)))
            })
            .collect();
        for (n, r) in results {
            charges.push(match r {
                Ok(f) => CentralChargeOut {
                    n_sites: n,
                    c: Some(f.c),
                    c_bits: Some(f.c_bits),
                    slope: Some(f.fit.a),
                    intercept: Some(f.fit.b),
                    rms_residual: Some(f.fit.rms_residual),
                    block_min: f.blocks.first().copied(),
                    block_max: f.blocks.last().copied(),
                    error: None,
                },
                Err(e) => CentralChargeOut {
                    n_sites: n,
                    c: None,
                    c_bits: None,
                    slope: None,
                    intercept: None,
                    rms_residual: None,
                    block_min: None,
                    block_max: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    out.json(
        "fits.json",
        &FitsReport {
            alpha,
            h,
            n_sites: cfg.n_sites.clone(),
            fits,
            errors,
            central_charge: charges,
        },
    )?;
    Ok((status_of(&failures), failures))
}

fn compare_record(row: &ComparisonRow) -> Vec<String> {
    let p = &row.params;
    let mut rec = vec![num(p.alpha), num(p.h), p.n_sites.to_string(), num(row.tolerance)];
    match &row.outcome {
        ComparisonOutcome::Compared { deltas, pass } => {
            rec.push("compared".into());
            rec.extend(deltas.values().iter().map(|v| num(*v)));
            rec.push(num(deltas.max()));
            rec.push(pass.to_string());
        }
        ComparisonOutcome::SkippedDegenerate => {
            rec.push("skipped: degenerate".into());
            rec.extend(std::iter::repeat_n(String::new(), Deltas::NAMES.len() + 1));
            rec.push(String::new());
        }
        ComparisonOutcome::Failed(e) => {
            rec.push(format!("failed: {e}"));
            rec.extend(std::iter::repeat_n(String::new(), Deltas::NAMES.len() + 1));
            rec.push("false".into());
        }
    }
    rec
}

fn cmd_oracle(cfg: &RunConfig, out: &mut Outputs) -> Result<(Status, Vec<PointFailure>)> {
    let mut params = Vec::new();
    for &n in &cfg.n_sites {
        for &a in &cfg.alpha.values() {
            for &h in &cfg.h.values() {
                params.push(template(cfg, a, h, n)?);
            }
        }
    }
    let rows: Vec<ComparisonRow> = params.par_iter().map(compare_point).collect();
    let mut header = vec!["alpha", "h", "n_sites", "tolerance", "status"];
    let delta_cols: Vec<String> = Deltas::NAMES.iter().map(|n| format!("d_{n}")).collect();
    header.extend(delta_cols.iter().map(String::as_str));
    header.extend(["max_delta", "pass"]);
    let records: Vec<Vec<String>> = rows.iter().map(compare_record).collect();
    out.csv_records("compare.csv", &header, &records)?;
    let failures: Vec<PointFailure> = rows
        .iter()
        .filter_map(|r| match &r.outcome {
            ComparisonOutcome::Failed(e) => Some(PointFailure::new(&r.params, e)),
            _ => None,
        })
        .collect();
    let mismatch = rows
        .iter()
        .any(|r| matches!(r.outcome, ComparisonOutcome::Compared { pass: false, .. }));
    let status = if mismatch {
        Status::OracleMismatch
    } else {
        status_of(&failures)
    };
    Ok((status, failures))
}

fn cmd_critical(cfg: &RunConfig, out: &mut Outputs) -> Result<(Status, Vec<PointFailure>)> {
    let alphas = cfg.alpha.values();
    let results: Vec<_> = alphas.par_iter().map(|&a| critical_fields(a)).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (&a, r) in alphas.iter().zip(results) {
        match r {
            Ok(fields) => {
                let joined: Vec<String> = fields.iter().map(|f| num(*f)).collect();
                records.push(vec![num(a), fields.len().to_string(), joined.join(";")]);
            }
            Err(e) => {
                let p = ModelParams {
                    alpha: a,
                    ..template(cfg, 0.0, 0.0, cfg.n_sites[0])?
                };
                failures.push(PointFailure::new(&p, &e));
                records.push(vec![num(a), String::new(), String::new()]);
            }
        }
    }
    out.csv_records("critical.csv", &["alpha", "count", "fields"], &records)?;
    Ok((status_of(&failures), failures))
}
