//! Parameter sweeps, transition detection on metric curves and finite-size
//! scaling fits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
use core::fmt;

use crate::correlators::build_table;
use crate::model::{classify_phase, fermi_sea, ModelParams, Phase};
use crate::observables::{entanglement_entropy, evaluate_point, MetricSelection, MetricsRecord, SspMode};
use crate::{Error, Result};

/// Minimum number of points for [`detect_transitions`].
pub const MIN_SWEEP_POINTS: usize = 10;
/// A derivative peak must exceed this multiple of the median `|derivative|`.
pub const PEAK_FACTOR: f64 = 5.0;
/// Minimum number of sizes for [`scaling_fit`].
pub const MIN_FIT_POINTS: usize = 5;
/// Blocks shorter than this are dropped from central-charge fits.
pub const MIN_BLOCK: usize = 25;

/// What varies across a sweep. Grids are traversed alpha-major.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Alpha(Vec<f64>),
    Field(Vec<f64>),
    Sites(Vec<usize>),
    Grid { alphas: Vec<f64>, fields: Vec<f64> },
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || steps < 2 {
        return Err(Error::InvalidParams(format!(
            "range {lo}:{hi} with {steps} steps needs lo <= hi and steps >= 2"
        )));
    }
    let d = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + d * i as f64 })
        .collect())
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Alpha(_) => "alpha",
            SweepAxis::Field(_) => "h",
            SweepAxis::Sites(_) => "n_sites",
            SweepAxis::Grid { .. } => "alpha,h",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Alpha(v) | SweepAxis::Field(v) => v.len(),
            SweepAxis::Sites(v) => v.len(),
            SweepAxis::Grid { alphas, fields } => alphas.len() * fields.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of every point along a 1-D axis.
    pub fn coordinates(&self) -> Option<Vec<f64>> {
        match self {
            SweepAxis::Alpha(v) | SweepAxis::Field(v) => Some(v.clone()),
            SweepAxis::Sites(v) => Some(v.iter().map(|&n| n as f64).collect()),
            SweepAxis::Grid { .. } => None,
        }
    }

    /// Parameter points in sweep order.
    pub fn points(&self, template: &ModelParams) -> Result<Vec<ModelParams>> {
        if self.is_empty() {
            return Err(Error::InvalidParams("empty sweep axis".into()));
        }
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        let ok = match self {
            SweepAxis::Alpha(v) | SweepAxis::Field(v) => sorted(v),
            SweepAxis::Sites(v) => v.windows(2).all(|w| w[0] < w[1]),
            SweepAxis::Grid { alphas, fields } => sorted(alphas) && sorted(fields),
        };
        if !ok {
            return Err(Error::InvalidParams("sweep values must be strictly increasing".into()));
        }
        match self {
            SweepAxis::Alpha(v) => v.iter().map(|&a| template.with_alpha(a)).collect(),
            SweepAxis::Field(v) => v.iter().map(|&h| template.with_field(h)).collect(),
            SweepAxis::Sites(v) => v.iter().map(|&n| template.with_sites(n)).collect(),
            SweepAxis::Grid { alphas, fields } => alphas
                .iter()
                .flat_map(|&a| fields.iter().map(move |&h| (a, h)))
                .map(|(a, h)| template.with_alpha(a)?.with_field(h))
                .collect(),
        }
    }
}

/// Where a sweep came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub template: ModelParams,
    pub timestamp: String,
    pub version: &'static str,
}

impl Provenance {
    pub fn new(template: ModelParams, timestamp: impl Into<String>) -> Self {
        Provenance {
            template,
            timestamp: timestamp.into(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub params: ModelParams,
    pub outcome: Result<MetricsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn records(&self) -> impl Iterator<Item = &MetricsRecord> {
        self.points.iter().filter_map(|p| p.outcome.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&ModelParams, &Error)> {
        self.points
            .iter()
            .filter_map(|p| p.outcome.as_ref().err().map(|e| (&p.params, e)))
    }
}

/// Evaluates every point of `axis` in order. Failing points are recorded,
/// not propagated.
pub fn sweep(
    template: &ModelParams,
    axis: SweepAxis,
    selection: MetricSelection,
    ssp: SspMode,
    timestamp: impl Into<String>,
) -> Result<SweepResult> {
    let points = axis
        .points(template)?
        .into_iter()
        .map(|params| SweepPoint {
            params,
            outcome: evaluate_point(&params, selection, ssp),
        })
        .collect();
    Ok(SweepResult {
        axis,
        points,
        provenance: Provenance::new(*template, timestamp),
    })
}

/// A detected transition at `location +- uncertainty`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub location: f64,
    pub uncertainty: f64,
    /// Peak `|derivative|` over the median `|derivative|` (the mean when
    /// the median vanishes).
    pub strength: f64,
}

/// Local maxima of the centered finite difference of `metric` along a 1-D
/// sweep that exceed [`PEAK_FACTOR`] times the median `|derivative|`, or
/// the mean when the median is zero.
pub fn detect_transitions(result: &SweepResult, metric: &str) -> Result<Vec<Transition>> {
    let xs = result
        .axis
        .coordinates()
        .ok_or_else(|| Error::Refused("transition detection needs a 1-D sweep".into()))?;
    let ys = result
        .points
        .iter()
        .map(|p| match &p.outcome {
            Ok(r) => r
                .metric(metric)
                .ok_or_else(|| Error::Refused(format!("metric {metric:?} missing at {}", p.params.alpha))),
            Err(e) => Err(e.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    detect_in_curve(&xs, &ys)
}

/// [`detect_transitions`] on a bare curve.
pub fn detect_in_curve(xs: &[f64], ys: &[f64]) -> Result<Vec<Transition>> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams(
            "curve coordinates and values differ in length".into(),
        ));
    }
    if xs.len() < MIN_SWEEP_POINTS {
        return Err(Error::Refused(format!(
            "{} points are too coarse; need at least {MIN_SWEEP_POINTS}",
            xs.len()
        )));
    }
    if !xs.windows(2).all(|w| w[0] < w[1]) || ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidParams(
            "curve needs increasing x and finite values".into(),
        ));
    }
    let n = xs.len();
    let d: Vec<f64> = (1..n - 1)
        .map(|i| ((ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1])).abs())
        .collect();
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    // a curve that is flat over most of the sweep has a zero median
    let scale = if median > 0.0 {
        median
    } else {
        d.iter().sum::<f64>() / m as f64
    };
    let threshold = PEAK_FACTOR * scale;
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < m {
        // a run of equal values counts as one maximum
        let mut j = i;
        while j + 2 < m && d[j + 1] == d[i] {
            j += 1;
        }
        if d[i] > threshold && d[i] > d[i - 1] && d[i] > d[j + 1] {
            let (a, b) = (xs[i + 1], xs[j + 1]);
            let spacing = 0.5 * (xs[j + 2] - xs[i]);
            let mut location = 0.5 * (a + b);
            if i == j {
                // vertex of the parabola through the peak and its neighbours
                let curv = d[i - 1] - 2.0 * d[i] + d[i + 1];
                if curv < 0.0 {
                    let shift = 0.5 * (d[i - 1] - d[i + 1]) / curv;
                    location = a + shift.clamp(-0.5, 0.5) * spacing;
                }
            }
            out.push(Transition {
                location,
                uncertainty: 0.5 * (b - a) + 0.5 * spacing,
                strength: d[i] / scale,
            });
        }
        i = j + 1;
    }
    Ok(out)
}

/// Interior points lower than both neighbours, refined by a parabola
/// through the three samples.
pub fn local_minima(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        if ys[i] < ys[i - 1] && ys[i] < ys[i + 1] {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            let (s0, s1) = ((ys[i] - ys[i - 1]) / h0, (ys[i + 1] - ys[i]) / h1);
            let curv = (s1 - s0) / (0.5 * (h0 + h1));
            let x = 0.5 * (xs[i - 1] + xs[i]) - s0 / curv;
            out.push(x.clamp(xs[i - 1], xs[i + 1]));
        }
    }
    out
}

/// Linearly interpolated points where the curve crosses `level`.
pub fn level_crossings(xs: &[f64], ys: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let (a, b) = (ys[i] - level, ys[i + 1] - level);
        if a == 0.0 {
            out.push(xs[i]);
        } else if a * b < 0.0 {
            out.push(xs[i] + (xs[i + 1] - xs[i]) * a / (a - b));
        }
    }
    if let (Some(&x), Some(&y)) = (xs.last(), ys.last()) {
        if y == level {
            out.push(x);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalingModel {
    /// `a x + b`
    Linear,
    /// `a sqrt(x) + b`
    Sqrt,
    /// `a ln(x) + b`
    Log,
}

impl ScalingModel {
    pub const ALL: [ScalingModel; 3] = [ScalingModel::Linear, ScalingModel::Sqrt, ScalingModel::Log];

    pub fn name(self) -> &'static str {
        match self {
            ScalingModel::Linear => "linear",
            ScalingModel::Sqrt => "sqrt",
            ScalingModel::Log => "log",
        }
    }

    pub fn transform(self, x: f64) -> f64 {
        match self {
            ScalingModel::Linear => x,
            ScalingModel::Sqrt => libm::sqrt(x),
            ScalingModel::Log => libm::log(x),
        }
    }
}

impl fmt::Display for ScalingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub a: f64,
    pub b: f64,
    pub rms_residual: f64,
    /// Central charge `3a` for entropy fits.
    pub derived_constant: Option<f64>,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * self.model.transform(x) + self.b
    }
}

/// Least-squares line through `(u, y)`.
fn line_fit(u: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let suu: f64 = u.iter().map(|x| (x - mu) * (x - mu)).sum();
    if suu.is_nan() || suu <= 1e-300 {
        return Err(Error::InvalidParams("degenerate abscissae".into()));
    }
    let suy: f64 = u.iter().zip(ys).map(|(x, y)| (x - mu) * (y - my)).sum();
    let a = suy / suu;
    let b = my - a * mu;
    let ss: f64 = u
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - a * x - b;
            r * r
        })
        .sum();
    Ok((a, b, libm::sqrt(ss / n)))
}

/// Fits `model` to `(xs, ys)`.
pub fn fit_model(model: ScalingModel, xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParams("fit needs matching xs and ys".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let u: Vec<f64> = xs.iter().map(|&x| model.transform(x)).collect();
    let (a, b, rms) = line_fit(&u, ys)?;
    Ok(ScalingFit {
        model,
        a,
        b,
        rms_residual: rms,
        derived_constant: None,
    })
}

/// All three candidate fits, in [`ScalingModel::ALL`] order.
pub fn candidate_fits(xs: &[f64], ys: &[f64]) -> Result<[ScalingFit; 3]> {
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParams(format!(
            "scaling fit needs at least {MIN_FIT_POINTS} sizes, got {}",
            xs.len()
        )));
    }
    if !xs.windows(2).all(|w| w[0] < w[1]) || xs[0] <= 0.0 {
        return Err(Error::InvalidParams(
            "sizes must be positive and strictly increasing".into(),
        ));
    }
    Ok([
        fit_model(ScalingModel::Linear, xs, ys)?,
        fit_model(ScalingModel::Sqrt, xs, ys)?,
        fit_model(ScalingModel::Log, xs, ys)?,
    ])
}

/// The candidate with the smallest rms residual.
pub fn scaling_fit(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    let fits = candidate_fits(xs, ys)?;
    Ok(fits
        .into_iter()
        .min_by(|a, b| a.rms_residual.total_cmp(&b.rms_residual))
        .expect("three candidates"))
}

/// `ln((N/pi) sin(pi l / N))`, the conformal distance of a block on a ring.
pub fn chord_log(l: usize, n_sites: usize) -> f64 {
    let n = n_sites as f64;
    libm::log(n / PI * libm::sin(PI * l as f64 / n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralChargeFit {
    /// Log fit of `S(l)` against the chord length; `derived_constant = c`.
    pub fit: ScalingFit,
    /// Central charge with entropy in nats.
    pub c: f64,
    /// `c / ln 2`, entropy in bits against a natural log of the length.
    pub c_bits: f64,
    pub blocks: Vec<usize>,
    pub entropies: Vec<f64>,
}

/// Fits `S(l) = (c/3) ln[(N/pi) sin(pi l/N)] + b` over the blocks in `ls`
/// with `MIN_BLOCK <= l <= N/2`.
pub fn central_charge(params: &ModelParams, ls: &[usize]) -> Result<CentralChargeFit> {
    if matches!(classify_phase(params), Ok(l) if l.phase == Phase::Pm) {
        return Err(Error::Refused(
            "gapped polarized phase: the entropy saturates, no conformal fit".into(),
        ));
    }
    let n = params.n_sites;
    if let Some(&l) = ls.iter().find(|&&l| l > n / 2) {
        return Err(Error::OutOfRange {
            what: "block length",
            value: l as i64,
            min: 1,
            max: (n / 2) as i64,
        });
    }
    let blocks: Vec<usize> = ls.iter().copied().filter(|&l| l >= MIN_BLOCK).collect();
    if blocks.len() < MIN_FIT_POINTS || !blocks.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParams(format!(
            "need at least {MIN_FIT_POINTS} increasing block lengths >= {MIN_BLOCK}"
        )));
    }
    let table = build_table(&fermi_sea(params)?);
    let entropies = blocks
        .iter()
        .map(|&l| entanglement_entropy(&table, l))
        .collect::<Result<Vec<_>>>()?;
    let u: Vec<f64> = blocks.iter().map(|&l| chord_log(l, n)).collect();
    let (a, b, rms) = line_fit(&u, &entropies)?;
    let c = 3.0 * a;
    Ok(CentralChargeFit {
        fit: ScalingFit {
            model: ScalingModel::Log,
            a,
            b,
            rms_residual: rms,
            derived_constant: Some(c),
        },
        c,
        c_bits: c / LN_2,
        blocks,
        entropies,
    })
}
