//! Quantum-information metrics of the ground state: l1-norm of coherence,
//! Kitagawa-Ueda spin squeezing, block entanglement entropy and two-site
//! concurrence, all evaluated from the fermion correlation functions.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlators::{build_table, zz_correlator, ContractionTable};
use crate::model::{classify_phase, fermi_sea, ModelParams, PhaseLabel};
use crate::pfaffian::transverse_correlators;
use crate::{Error, Result};

/// Largest admissible truncation tail in [`spin_squeezing`].
pub const TAIL_BOUND_LIMIT: f64 = 1e-6;
/// Correlation-matrix eigenvalues may leave `[0, 1]` by this much before the
/// entropy evaluation fails.
pub const EIGEN_CLAMP_TOL: f64 = 1e-8;
const CORRELATOR_BOUND: f64 = 0.25 + 1e-9;
const RDM_NEGATIVE_TOL: f64 = 1e-9;

/// Spin correlators `G^{ab}_n = <S^a_1 S^b_{n+1}>` for `n = 1..=max_range`,
/// stored at index `n - 1`, plus the magnetization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinCorrelators {
    pub max_range: usize,
    pub mz: f64,
    pub gxx: Vec<f64>,
    pub gyy: Vec<f64>,
    pub gxy: Vec<f64>,
    pub gyx: Vec<f64>,
    pub gzz: Vec<f64>,
}

pub fn spin_correlators(table: &ContractionTable, max_range: usize) -> Result<SpinCorrelators> {
    let t = transverse_correlators(table, max_range)?;
    let gzz = (1..=max_range)
        .map(|r| zz_correlator(table, r))
        .collect::<Result<Vec<_>>>()?;
    let c = SpinCorrelators {
        max_range,
        mz: table.mz(),
        gxx: t.xx,
        gyy: t.yy,
        gxy: t.xy,
        gyx: t.yx,
        gzz,
    };
    for (name, v) in [
        ("xx", &c.gxx),
        ("yy", &c.gyy),
        ("xy", &c.gxy),
        ("yx", &c.gyx),
        ("zz", &c.gzz),
    ] {
        if let Some((i, g)) = v
            .iter()
            .enumerate()
            .find(|(_, g)| !g.is_finite() || g.abs() > CORRELATOR_BOUND)
        {
            return Err(Error::Numerical(format!(
                "G^{name}_{} = {g} violates |G| <= 1/4",
                i + 1
            )));
        }
    }
    Ok(c)
}

/// How many distances enter the squeezing sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SspMode {
    /// All distances `1..=N-1`.
    Exact,
    /// Distances `1..=R`, accepted only if the tail bound holds.
    Truncated(usize),
}

/// Upper estimate of the omitted tail, `(N - 1 - R) * 4 max(|G^xx_R|, |G^yy_R|)`.
pub fn ssp_tail_bound(correls: &SpinCorrelators, n_sites: usize) -> f64 {
    let r = correls.max_range;
    if r + 1 >= n_sites {
        return 0.0;
    }
    let last = correls.gxx[r - 1].abs().max(correls.gyy[r - 1].abs());
    (n_sites - 1 - r) as f64 * 4.0 * last
}

/// `xi^2 = 1 + 2 S_+ - 2 sqrt(S_-^2 + S_m^2)` with
/// `S_+ = sum (G^xx + G^yy)`, `S_- = sum (G^xx - G^yy)`, `S_m = sum (G^xy + G^yx)`
/// over the available distances. When they stop short of `N - 1` the
/// truncation must satisfy [`TAIL_BOUND_LIMIT`].
pub fn spin_squeezing(correls: &SpinCorrelators, n_sites: usize) -> Result<f64> {
    if correls.max_range >= n_sites {
        return Err(Error::InvalidParams(format!(
            "correlator range {} exceeds N - 1 = {}",
            correls.max_range,
            n_sites - 1
        )));
    }
    let bound = ssp_tail_bound(correls, n_sites);
    if bound >= TAIL_BOUND_LIMIT {
        return Err(Error::TailBound {
            radius: correls.max_range,
            bound,
            limit: TAIL_BOUND_LIMIT,
        });
    }
    let (mut plus, mut minus, mut mixed) = (0.0, 0.0, 0.0);
    for i in 0..correls.max_range {
        plus += correls.gxx[i] + correls.gyy[i];
        minus += correls.gxx[i] - correls.gyy[i];
        mixed += correls.gxy[i] + correls.gyx[i];
    }
    let xi = 1.0 + 2.0 * plus - 2.0 * libm::hypot(minus, mixed);
    if xi.is_nan() || xi <= 0.0 {
        return Err(Error::Numerical(format!("squeezing parameter {xi} is not positive")));
    }
    Ok(xi)
}

/// Wineland parameter `xi_R^2 = xi_s^2 (N/2)^2 / <J_z>^2 = xi_s^2 / (4 m_z^2)`.
pub fn wineland_ssp(correls: &SpinCorrelators, n_sites: usize) -> Result<f64> {
    if correls.mz.abs() <= 1e-9 {
        return Err(Error::Refused(
            "Wineland parameter undefined for vanishing magnetization".into(),
        ));
    }
    let xi = spin_squeezing(correls, n_sites)?;
    Ok(xi / (4.0 * correls.mz * correls.mz))
}

/// `(1/N) sum_{m != n} |<c_m^dag c_n>| = (2/N) sum_{d=1}^{N-1} (N - d) |f(d)|`.
pub fn l1_coherence_scaled(table: &ContractionTable) -> f64 {
    let n = table.n_sites;
    let sum: f64 = (1..n).map(|d| (n - d) as f64 * table.f[d].norm()).sum();
    2.0 * sum / n as f64
}

/// Correlation matrix `<c_m^dag c_n>` of the first `l` sites.
pub fn block_correlation_matrix(table: &ContractionTable, l: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(l, l, |m, n| {
        let r = n as i64 - m as i64;
        if r >= 0 {
            table.f[r as usize]
        } else {
            table.f[(-r) as usize].conj()
        }
    })
}

fn binary_entropy(nu: f64) -> f64 {
    let mut s = 0.0;
    if nu > 0.0 {
        s -= nu * libm::log(nu);
    }
    if nu < 1.0 {
        s -= (1.0 - nu) * libm::log(1.0 - nu);
    }
    s
}

/// Von Neumann entropy (nats) of a block of `l` contiguous sites.
pub fn entanglement_entropy(table: &ContractionTable, l: usize) -> Result<f64> {
    let n = table.n_sites;
    if l == 0 || l >= n {
        return Err(Error::OutOfRange {
            what: "block length",
            value: l as i64,
            min: 1,
            max: n as i64 - 1,
        });
    }
    let evs = block_correlation_matrix(table, l).symmetric_eigenvalues();
    let mut s = 0.0;
    for &nu in evs.iter() {
        if !(-EIGEN_CLAMP_TOL..=1.0 + EIGEN_CLAMP_TOL).contains(&nu) {
            return Err(Error::Numerical(format!("correlation eigenvalue {nu} outside [0, 1]")));
        }
        s += binary_entropy(nu.clamp(0.0, 1.0));
    }
    Ok(s)
}

pub fn nats_to_bits(s: f64) -> f64 {
    s / LN_2
}

/// Two-site reduced density matrix in the basis `|uu>, |ud>, |du>, |dd>`;
/// the only off-diagonal entry is `z = <ud|rho|du>^* = <S^+_1 S^-_2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTwoSite {
    /// `<uu|rho|uu>`
    pub x_plus: f64,
    /// `<dd|rho|dd>`
    pub x_minus: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    pub z: Complex64,
}

pub fn two_site_rdm(correls: &SpinCorrelators, r: usize) -> Result<ReducedTwoSite> {
    if r == 0 || r > correls.max_range {
        return Err(Error::OutOfRange {
            what: "rdm distance",
            value: r as i64,
            min: 1,
            max: correls.max_range as i64,
        });
    }
    let i = r - 1;
    let (mz, gzz) = (correls.mz, correls.gzz[i]);
    let mut diag = [0.25 + mz + gzz, 0.25 - mz + gzz, 0.25 - gzz, 0.25 - gzz];
    for d in diag.iter_mut() {
        if *d < -RDM_NEGATIVE_TOL {
            return Err(Error::Numerical(format!("negative rdm population {d}")));
        }
        *d = d.max(0.0);
    }
    let trace: f64 = diag.iter().sum();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical(format!("rdm trace {trace}")));
    }
    Ok(ReducedTwoSite {
        x_plus: diag[0],
        x_minus: diag[1],
        y_plus: diag[2],
        y_minus: diag[3],
        z: Complex64::new(correls.gxx[i] + correls.gyy[i], correls.gyx[i] - correls.gxy[i]),
    })
}

/// `max(0, 2 (|z| - sqrt(x+ x-)))`, clamped to `[0, 1]`.
pub fn concurrence(rdm: &ReducedTwoSite) -> f64 {
    let c = 2.0 * (rdm.z.norm() - libm::sqrt(rdm.x_plus * rdm.x_minus));
    c.clamp(0.0, 1.0)
}

/// Which metrics [`evaluate_point`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetricSelection {
    pub c_l1: bool,
    pub ssp: bool,
    pub ee: bool,
    pub concurrence: bool,
}

impl MetricSelection {
    pub const NAMES: [&'static str; 4] = ["c_l1", "ssp", "ee", "conc"];

    pub fn all() -> Self {
        MetricSelection {
            c_l1: true,
            ssp: true,
            ee: true,
            concurrence: true,
        }
    }

    pub fn none() -> Self {
        MetricSelection {
            c_l1: false,
            ssp: false,
            ee: false,
            concurrence: false,
        }
    }

    /// Parses a comma-separated list of [`Self::NAMES`] (or `all`).
    pub fn parse(list: &str) -> Result<Self> {
        let mut sel = Self::none();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "all" => sel = Self::all(),
                "c_l1" | "l1" => sel.c_l1 = true,
                "ssp" => sel.ssp = true,
                "ee" => sel.ee = true,
                "conc" | "concurrence" => sel.concurrence = true,
                other => {
                    return Err(Error::InvalidParams(format!(
                        "unknown metric {other:?}; expected one of {:?}",
                        Self::NAMES
                    )))
                }
            }
        }
        Ok(sel)
    }
}

/// Metric vector of one `(alpha, h, N)` point. Unselected metrics are `None`;
/// `phase` is `None` on a critical line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub alpha: f64,
    pub h: f64,
    pub n_sites: usize,
    pub phase: Option<PhaseLabel>,
    pub mz: f64,
    pub c_l1_scaled: Option<f64>,
    pub ssp: Option<f64>,
    pub ee_half: Option<f64>,
    pub conc_nn: Option<f64>,
    pub conc_nnn: Option<f64>,
}

impl MetricsRecord {
    /// Looks a metric up by its column name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "mz" => Some(self.mz),
            "c_l1" | "c_l1_scaled" => self.c_l1_scaled,
            "ssp" => self.ssp,
            "ee" | "ee_half" => self.ee_half,
            "conc_nn" => self.conc_nn,
            "conc_nnn" => self.conc_nnn,
            _ => None,
        }
    }
}

/// Computes the selected metrics at one parameter point.
pub fn evaluate_point(params: &ModelParams, selection: MetricSelection, ssp: SspMode) -> Result<MetricsRecord> {
    let n = params.n_sites;
    let table = build_table(&fermi_sea(params)?);
    let mut rec = MetricsRecord {
        alpha: params.alpha,
        h: params.h,
        n_sites: n,
        phase: classify_phase(params).ok(),
        mz: table.mz(),
        c_l1_scaled: None,
        ssp: None,
        ee_half: None,
        conc_nn: None,
        conc_nnn: None,
    };
    if selection.c_l1 {
        rec.c_l1_scaled = Some(l1_coherence_scaled(&table));
    }
    let mut correls = None;
    if selection.ssp {
        let range = match ssp {
            SspMode::Exact => n - 1,
            SspMode::Truncated(r) => r.clamp(2.min(n - 1), n - 1),
        };
        let c = spin_correlators(&table, range)?;
        rec.ssp = Some(spin_squeezing(&c, n)?);
        correls = Some(c);
    }
    if selection.ee {
        rec.ee_half = Some(entanglement_entropy(&table, n / 2)?);
    }
    if selection.concurrence {
        let c = match correls {
            Some(c) => c,
            None => spin_correlators(&table, 2)?,
        };
        rec.conc_nn = Some(concurrence(&two_site_rdm(&c, 1)?));
        rec.conc_nnn = Some(concurrence(&two_site_rdm(&c, 2)?));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FermiSea, Phase, SeaPrescription};
    use core::f64::consts::PI;

    fn table(alpha: f64, h: f64, n: usize) -> ContractionTable {
        build_table(&fermi_sea(&ModelParams::new(alpha, h, n).unwrap()).unwrap())
    }

    fn point(alpha: f64, h: f64, n: usize) -> MetricsRecord {
        let p = ModelParams::new(alpha, h, n).unwrap();
        evaluate_point(&p, MetricSelection::all(), SspMode::Exact).unwrap()
    }

    #[test]
    fn polarized_point_is_trivial() {
        let rec = point(0.7, 1.9, 40);
        assert_eq!(rec.phase.unwrap().phase, Phase::Pm);
        assert!(rec.c_l1_scaled.unwrap() < 1e-9);
        assert!(rec.ee_half.unwrap() < 1e-9);
        assert!((rec.ssp.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(rec.conc_nn, Some(0.0));
        assert_eq!(rec.conc_nnn, Some(0.0));
        assert_eq!(rec.mz, 0.5);
    }

    #[test]
    fn l1_brute_force() {
        let t = table(2.0, 0.3, 30);
        let mut sum = 0.0;
        for m in 0..30i64 {
            for n in 0..30i64 {
                if m != n {
                    sum += t.two_point(n - m).unwrap().norm();
                }
            }
        }
        assert!((l1_coherence_scaled(&t) - sum / 30.0).abs() < 1e-12);
        assert!(l1_coherence_scaled(&table(0.0, 3.0, 30)) < 1e-14);
    }

    #[test]
    fn l1_plateau_in_first_liquid() {
        let a = l1_coherence_scaled(&table(0.3, 0.0, 500));
        let b = l1_coherence_scaled(&table(0.7, 0.0, 500));
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn entropy_examples() {
        assert!(entanglement_entropy(&table(0.0, 2.0, 20), 10).unwrap() < 1e-12);
        let s1 = entanglement_entropy(&table(0.0, 0.0, 20), 1).unwrap();
        assert!((s1 - LN_2).abs() < 1e-12);
        assert!((nats_to_bits(s1) - 1.0).abs() < 1e-12);
        assert!(entanglement_entropy(&table(0.0, 0.0, 20), 0).is_err());
        assert!(entanglement_entropy(&table(0.0, 0.0, 20), 20).is_err());
    }

    #[test]
    fn entropy_complementarity() {
        for &(a, h) in &[(0.5, 0.3), (2.0, 0.3), (2.0, 0.0)] {
            let t = table(a, h, 30);
            for l in [1, 4, 11] {
                let s = entanglement_entropy(&t, l).unwrap();
                let c = entanglement_entropy(&t, 30 - l).unwrap();
                assert!((s - c).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn xx_entropy_slope() {
        let t = table(0.0, 0.0, 400);
        // chord length removes the finite-ring bending
        let chord = |l: usize| libm::log((400.0 / PI) * libm::sin(PI * l as f64 / 400.0));
        let xs: Vec<f64> = (25..=200).step_by(25).map(chord).collect();
        let ys: Vec<f64> = (25..=200)
            .step_by(25)
            .map(|l| entanglement_entropy(&t, l).unwrap())
            .collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        assert!((sxy / sxx - 1.0 / 3.0).abs() < 0.03);
    }

    #[test]
    fn squeezing_of_polarized_state() {
        let c = spin_correlators(&table(0.0, 2.0, 12), 11).unwrap();
        assert!((spin_squeezing(&c, 12).unwrap() - 1.0).abs() < 1e-12);
        assert!((wineland_ssp(&c, 12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_squeezing_needs_tail_bound() {
        let t = table(0.5, 0.3, 60);
        let c = spin_correlators(&t, 10).unwrap();
        assert!(matches!(spin_squeezing(&c, 60), Err(Error::TailBound { .. })));
        // polarized: the tail vanishes and truncation is exact
        let pm = spin_correlators(&table(0.5, 1.5, 60), 5).unwrap();
        assert!((spin_squeezing(&pm, 60).unwrap() - 1.0).abs() < 1e-12);
        let rec = evaluate_point(
            &ModelParams::new(0.5, 0.3, 60).unwrap(),
            MetricSelection::parse("ssp").unwrap(),
            SspMode::Truncated(10),
        );
        assert!(matches!(rec, Err(Error::TailBound { .. })));
    }

    #[test]
    fn squeezing_is_reflection_invariant() {
        let p = ModelParams::new(2.0, 0.45, 26).unwrap();
        let sea = fermi_sea(&p).unwrap();
        let mirrored = FermiSea {
            occupied: sea.occupied.iter().map(|k| -k).collect(),
            occupied_index: sea.occupied_index.iter().map(|nu| -nu).collect(),
            ..sea.clone()
        };
        let a = spin_squeezing(&spin_correlators(&build_table(&sea), 25).unwrap(), 26).unwrap();
        let b = spin_squeezing(&spin_correlators(&build_table(&mirrored), 25).unwrap(), 26).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn number_conservation_identities() {
        let c = spin_correlators(&table(2.0, 0.3, 30), 29).unwrap();
        for i in 0..29 {
            assert!((c.gxx[i] - c.gyy[i]).abs() < 1e-10);
            assert!((c.gxy[i] + c.gyx[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_grid_even_particle_number_cancels_squeezing() {
        // periodic grid with an even particle number has the wrong string
        // parity, making G_{N-n} = -G_n and xi^2 = 1 identically
        let n = 42;
        let (p, sea) = (0..100)
            .map(|i| {
                let p = ModelParams::new(2.0, 0.01 * i as f64, n)
                    .unwrap()
                    .with_sea(SeaPrescription::SingleGrid);
                let sea = fermi_sea(&p).unwrap();
                (p, sea)
            })
            .find(|(_, s)| s.particle_count() % 2 == 0 && s.particle_count() > 0)
            .unwrap();
        let c = spin_correlators(&build_table(&sea), n - 1).unwrap();
        assert!((spin_squeezing(&c, n).unwrap() - 1.0).abs() < 1e-10);
        let parity = spin_correlators(&table(2.0, p.h, n), n - 1).unwrap();
        assert!((spin_squeezing(&parity, n).unwrap() - 1.0).abs() > 0.01);
    }

    #[test]
    fn rdm_examples() {
        let pm = spin_correlators(&table(0.0, 2.0, 12), 2).unwrap();
        let r = two_site_rdm(&pm, 1).unwrap();
        assert!((r.x_plus - 1.0).abs() < 1e-14);
        assert!(r.x_minus.abs() < 1e-14 && r.y_plus.abs() < 1e-14 && r.z.norm() < 1e-14);
        assert_eq!(concurrence(&r), 0.0);
        let xx = spin_correlators(&table(0.0, 0.0, 40), 3).unwrap();
        for n in 1..=3 {
            assert!(two_site_rdm(&xx, n).unwrap().z.im.abs() < 1e-12);
        }
        assert!(two_site_rdm(&xx, 4).is_err());
    }

    #[test]
    fn concurrence_depends_on_modulus_only() {
        let c = spin_correlators(&table(2.0, 0.3, 30), 2).unwrap();
        let r = two_site_rdm(&c, 1).unwrap();
        let mut flipped = c.clone();
        for i in 0..2 {
            flipped.gxy[i] = c.gyx[i];
            flipped.gyx[i] = c.gxy[i];
        }
        let f = two_site_rdm(&flipped, 1).unwrap();
        assert!((f.z - r.z.conj()).norm() < 1e-15);
        assert_eq!(concurrence(&f), concurrence(&r));
    }

    #[test]
    fn wineland_bounds_squeezing() {
        for &(a, h) in &[(0.5, 0.5), (2.0, 0.8), (0.2, 0.9)] {
            let c = spin_correlators(&table(a, h, 20), 19).unwrap();
            let xi = spin_squeezing(&c, 20).unwrap();
            assert!(wineland_ssp(&c, 20).unwrap() >= xi);
        }
        let half = spin_correlators(&table(0.0, 0.0, 20), 19).unwrap();
        assert!(wineland_ssp(&half, 20).is_err());
    }

    #[test]
    fn selection_parsing() {
        assert_eq!(MetricSelection::parse("all").unwrap(), MetricSelection::all());
        let s = MetricSelection::parse("ssp, ee").unwrap();
        assert!(s.ssp && s.ee && !s.c_l1 && !s.concurrence);
        assert!(MetricSelection::parse("qfi").is_err());
        let rec = evaluate_point(&ModelParams::new(0.5, 0.2, 20).unwrap(), s, SspMode::Exact).unwrap();
        assert!(rec.c_l1_scaled.is_none() && rec.conc_nn.is_none());
        assert!(rec.ssp.is_some() && rec.ee_half.is_some());
    }

    #[test]
    fn xx_concurrence_value() {
        // nearest-neighbour XX chain: |z| = 1/pi, x+ = x- = 1/4 - 1/pi^2
        let z = 1.0 / PI;
        let x = 0.25 - 1.0 / (PI * PI);
        let want = 2.0 * (z - x);
        let rec_nn = evaluate_point(
            &ModelParams::new(0.0, 0.0, 2000).unwrap(),
            MetricSelection::parse("conc").unwrap(),
            SspMode::Exact,
        )
        .unwrap();
        assert!((rec_nn.conc_nn.unwrap() - want).abs() < 1e-3);
    }
}
