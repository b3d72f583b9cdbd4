use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tsi_chain::analysis::linspace;
use tsi_chain::model::SeaPrescription;
use tsi_chain::observables::{MetricSelection, SspMode};
use tsi_chain::oracle::MAX_ED_SITES;

#[derive(Debug, Parser)]
#[command(
    name = "tsi-chain",
    version,
    about = "XX chain with three-spin interaction: sweeps, scaling fits, ED comparison"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Alpha x h grid of metrics (grid.csv, heatmaps)
    Sweep(Flags),
    /// One-dimensional sweep with transition detection (line.csv)
    Line(Flags),
    /// Metrics against system size with scaling fits (scaling.csv, fits.json)
    Scaling(Flags),
    /// Free-fermion pipeline against exact diagonalization (compare.csv)
    Oracle(Flags),
    /// Critical fields along alpha (critical.csv)
    Critical(Flags),
}

impl Command {
    pub fn kind(&self) -> (CommandKind, &Flags) {
        match self {
            Command::Sweep(f) => (CommandKind::Sweep, f),
            Command::Line(f) => (CommandKind::Line, f),
            Command::Scaling(f) => (CommandKind::Scaling, f),
            Command::Oracle(f) => (CommandKind::Oracle, f),
            Command::Critical(f) => (CommandKind::Critical, f),
        }
    }
}

/// Flags shared by every subcommand. Values given here override the
/// `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Scalar, comma list, or lo:hi:steps
    #[arg(long)]
    pub alpha: Option<String>,
    /// Scalar, comma list, or lo:hi:steps
    #[arg(long = "h")]
    pub h: Option<String>,
    /// Chain length, or comma list of lengths
    #[arg(long)]
    pub n: Option<String>,
    /// Comma list of c_l1, ssp, ee, conc (or all)
    #[arg(long)]
    pub metrics: Option<String>,
    /// Truncate the squeezing sums at this distance (tail bound enforced)
    #[arg(long = "ssp-radius")]
    pub ssp_radius: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<String>,
    /// Comma list of csv, json, svg
    #[arg(long)]
    pub formats: Option<String>,
    /// Worker threads
    #[arg(long)]
    pub workers: Option<String>,
    /// Fermi sea: parity-projected or single-grid
    #[arg(long)]
    pub sea: Option<String>,
    /// Entropy block lengths for central-charge fits, lo:hi[:stride]
    #[arg(long)]
    pub blocks: Option<String>,
    /// Plain key=value file with the same keys as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: [&str; 10] = [
    "alpha",
    "h",
    "n",
    "metrics",
    "ssp-radius",
    "out",
    "formats",
    "workers",
    "sea",
    "blocks",
];

impl Flags {
    fn get(&self, key: &str) -> Option<&String> {
        match key {
            "alpha" => self.alpha.as_ref(),
            "h" => self.h.as_ref(),
            "n" => self.n.as_ref(),
            "metrics" => self.metrics.as_ref(),
            "ssp-radius" => self.ssp_radius.as_ref(),
            "out" => self.out.as_ref(),
            "formats" => self.formats.as_ref(),
            "workers" => self.workers.as_ref(),
            "sea" => self.sea.as_ref(),
            "blocks" => self.blocks.as_ref(),
            _ => None,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key = value", path.display(), i + 1))?;
        let key = k.trim().replace('_', "-");
        ensure!(
            KEYS.contains(&key.as_str()),
            "{}:{}: unknown key {key:?}",
            path.display(),
            i + 1
        );
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Sweep,
    Line,
    Scaling,
    Oracle,
    Critical,
}

/// A scalar, an explicit list, or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Values(Vec<f64>),
    Range { lo: f64, hi: f64, steps: usize },
}

impl ValueSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            ensure!(parts.len() == 3, "range {s:?} must be lo:hi:steps");
            let lo: f64 = parts[0]
                .trim()
                .parse()
                .with_context(|| format!("bad range start in {s:?}"))?;
            let hi: f64 = parts[1]
                .trim()
                .parse()
                .with_context(|| format!("bad range end in {s:?}"))?;
            let steps: usize = parts[2]
                .trim()
                .parse()
                .with_context(|| format!("bad step count in {s:?}"))?;
            linspace(lo, hi, steps)?;
            return Ok(ValueSpec::Range { lo, hi, steps });
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
            .collect::<Result<Vec<_>>>()?;
        ensure!(values.iter().all(|v| v.is_finite()), "non-finite value in {s:?}");
        ensure!(
            values.windows(2).all(|w| w[0] < w[1]),
            "list {s:?} must be strictly increasing"
        );
        Ok(ValueSpec::Values(values))
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ValueSpec::Values(v) => v.clone(),
            ValueSpec::Range { lo, hi, steps } => linspace(*lo, *hi, *steps).expect("validated range"),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ValueSpec::Values(v) => v.len(),
            ValueSpec::Range { steps, .. } => *steps,
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            ValueSpec::Values(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    fn parse(s: &str) -> Result<Self> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for name in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match name {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => bail!("unknown format {other:?}; expected csv, json, svg"),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Blocks {
    pub lo: usize,
    pub hi: usize,
    pub stride: usize,
}

impl Blocks {
    fn parse(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse().with_context(|| format!("bad block spec {s:?}")))
            .collect::<Result<_>>()?;
        let b = match parts[..] {
            [lo, hi] => Blocks { lo, hi, stride: 1 },
            [lo, hi, stride] => Blocks { lo, hi, stride },
            _ => bail!("blocks {s:?} must be lo:hi or lo:hi:stride"),
        };
        ensure!(
            b.lo >= 1 && b.lo <= b.hi && b.stride >= 1,
            "blocks {s:?} need 1 <= lo <= hi and stride >= 1"
        );
        Ok(b)
    }

    /// Block lengths up to `N/2`.
    pub fn lengths(&self, n_sites: usize) -> Vec<usize> {
        (self.lo..=self.hi.min(n_sites / 2)).step_by(self.stride).collect()
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub alpha: ValueSpec,
    pub h: ValueSpec,
    pub n_sites: Vec<usize>,
    #[serde(serialize_with = "ser_metrics")]
    pub metrics: MetricSelection,
    pub ssp_radius: Option<usize>,
    pub out: PathBuf,
    pub formats: Formats,
    pub workers: usize,
    #[serde(serialize_with = "ser_sea")]
    pub sea: SeaPrescription,
    pub blocks: Blocks,
}

fn ser_metrics<S: serde::Serializer>(m: &MetricSelection, s: S) -> std::result::Result<S::Ok, S::Error> {
    let on = [m.c_l1, m.ssp, m.ee, m.concurrence];
    let names: Vec<&str> = MetricSelection::NAMES
        .iter()
        .zip(on)
        .filter(|(_, b)| *b)
        .map(|(n, _)| *n)
        .collect();
    s.collect_seq(names)
}

fn ser_sea<S: serde::Serializer>(sea: &SeaPrescription, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(sea.name())
}

fn defaults(kind: CommandKind, flags: &BTreeMap<String, String>) -> BTreeMap<&'static str, String> {
    let mut d = BTreeMap::new();
    let (alpha, h, n) = match kind {
        CommandKind::Sweep => ("0:3:31", "0:2:21", "200"),
        CommandKind::Line => {
            let h_range = flags.get("h").is_some_and(|v| v.contains(':') || v.contains(','));
            if h_range {
                ("0", "0:2:201", "1000")
            } else {
                ("0:3:301", "0", "1000")
            }
        }
        CommandKind::Scaling => ("1", "0", "64,96,128,192,256"),
        CommandKind::Oracle => ("0,0.5,2", "0,0.3,0.8", "12"),
        CommandKind::Critical => ("0:3:31", "0", "200"),
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    for (k, v) in [
        ("alpha", alpha.to_string()),
        ("h", h.to_string()),
        ("n", n.to_string()),
        ("metrics", "all".to_string()),
        ("out", "out".to_string()),
        ("formats", "csv,json,svg".to_string()),
        ("workers", workers.to_string()),
        ("sea", SeaPrescription::default().name().to_string()),
        ("blocks", "25:100000".to_string()),
    ] {
        d.insert(k, v);
    }
    d
}

impl RunConfig {
    pub fn resolve(kind: CommandKind, flags: &Flags) -> Result<Self> {
        let mut merged = match &flags.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        for key in KEYS {
            if let Some(v) = flags.get(key) {
                merged.insert(key.to_string(), v.clone());
            }
        }
        let defaults = defaults(kind, &merged);
        let get = |key: &str| -> Option<String> { merged.get(key).cloned().or_else(|| defaults.get(key).cloned()) };
        let req = |key: &str| get(key).with_context(|| format!("missing {key}"));

        let alpha = ValueSpec::parse(&req("alpha")?).context("--alpha")?;
        let h = ValueSpec::parse(&req("h")?).context("--h")?;
        let n_sites = req("n")?
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .with_context(|| format!("bad chain length {v:?}"))
            })
            .collect::<Result<Vec<_>>>()
            .context("--n")?;
        ensure!(n_sites.iter().all(|&n| n >= 3), "--n: every chain length must be >= 3");
        ensure!(
            n_sites.windows(2).all(|w| w[0] < w[1]),
            "--n: lengths must be strictly increasing"
        );
        let metrics = MetricSelection::parse(&req("metrics")?).context("--metrics")?;
        let ssp_radius = get("ssp-radius")
            .map(|v| v.trim().parse::<usize>().context("--ssp-radius"))
            .transpose()?;
        ensure!(ssp_radius.is_none_or(|r| r >= 2), "--ssp-radius must be >= 2");
        let workers: usize = req("workers")?.trim().parse().context("--workers")?;
        ensure!(workers >= 1, "--workers must be >= 1");
        let sea: SeaPrescription = req("sea")?.parse().context("--sea")?;
        let cfg = RunConfig {
            command: kind,
            alpha,
            h,
            n_sites,
            metrics,
            ssp_radius,
            out: PathBuf::from(req("out")?),
            formats: Formats::parse(&req("formats")?).context("--formats")?,
            workers,
            sea,
            blocks: Blocks::parse(&req("blocks")?).context("--blocks")?,
        };
        cfg.check_shape()?;
        Ok(cfg)
    }

    fn check_shape(&self) -> Result<()> {
        match self.command {
            CommandKind::Sweep => {
                ensure!(self.n_sites.len() == 1, "sweep takes a single chain length");
            }
            CommandKind::Line => {
                let ranges = [self.alpha.len() > 1, self.h.len() > 1];
                ensure!(
                    ranges.iter().filter(|r| **r).count() == 1,
                    "line needs exactly one of --alpha / --h to be a range"
                );
                ensure!(
                    self.alpha.len().max(self.h.len()) >= 2,
                    "line needs at least two points"
                );
            }
            CommandKind::Scaling => {
                ensure!(self.n_sites.len() >= 5, "scaling needs at least five chain lengths");
                ensure!(
                    self.alpha.scalar().is_some() && self.h.scalar().is_some(),
                    "scaling takes scalar --alpha and --h"
                );
            }
            CommandKind::Oracle => {
                if let Some(&n) = self.n_sites.iter().find(|&&n| n > MAX_ED_SITES) {
                    bail!("oracle is limited to n <= {MAX_ED_SITES}, got {n}");
                }
            }
            CommandKind::Critical => {}
        }
        Ok(())
    }

    pub fn ssp_mode(&self) -> SspMode {
        self.ssp_radius.map_or(SspMode::Exact, SspMode::Truncated)
    }
}
