//! Couplings, momentum grids, the single-particle dispersion, the ground-state
//! Fermi sea, phase classification and critical fields.
//!
//! After the Jordan-Wigner transformation the chain is a quadratic fermion
//! model with dispersion `eps(k) = -J (h + cos k - (alpha/2) sin 2k)`. The
//! spin Hamiltonian is
//!
//! ```text
//! H = -J sum_n [ Sx_n Sx_{n+1} + Sy_n Sy_{n+1}
//!               + alpha (Sx_n Sz_{n+1} Sy_{n+2} - Sy_n Sz_{n+1} Sx_{n+2})
//!               + h Sz_n ]
//! ```
//!
//! on a ring of `n_sites` spins, which differs from the fermion energy by the
//! constant `J h / 2` per site.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;

use crate::{Error, Result};

/// Modes with `|eps| <= ZERO_MODE_TOL` count as zero-energy ties and stay empty.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// Number of initial samples used to bracket roots over one period.
pub const ROOT_SAMPLES: usize = 4096;

const ROOT_TOL: f64 = 1e-12;
const TANGENT_VALUE_TOL: f64 = 1e-9;
const TANGENT_SLOPE_TOL: f64 = 1e-7;
const FIELD_DEDUP_TOL: f64 = 1e-9;
const ENERGY_TIE_TOL: f64 = 1e-10;

/// How the Jordan-Wigner boundary condition is treated when filling modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SeaPrescription {
    /// Odd fermion numbers fill the periodic grid, even numbers the
    /// antiperiodic one; the lowest-energy particle number wins. This is the
    /// exact ground state of the spin ring.
    #[default]
    ParityProjected,
    /// Fill every negative-energy mode of the periodic grid, ignoring the
    /// parity-dependent boundary bond.
    SingleGrid,
}

impl SeaPrescription {
    pub fn name(self) -> &'static str {
        match self {
            SeaPrescription::ParityProjected => "parity-projected",
            SeaPrescription::SingleGrid => "single-grid",
        }
    }
}

impl core::str::FromStr for SeaPrescription {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parity-projected" | "parity" => Ok(SeaPrescription::ParityProjected),
            "single-grid" | "single" => Ok(SeaPrescription::SingleGrid),
            other => Err(Error::InvalidParams(format!(
                "unknown sea prescription {other:?} (expected parity-projected or single-grid)"
            ))),
        }
    }
}

/// Couplings and chain length. `j` is the exchange energy unit (1 unless set
/// otherwise), `alpha` the three-spin ratio, `h` the field in units of `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub j: f64,
    pub alpha: f64,
    pub h: f64,
    pub n_sites: usize,
    pub sea: SeaPrescription,
}

impl ModelParams {
    pub fn new(alpha: f64, h: f64, n_sites: usize) -> Result<Self> {
        let p = ModelParams {
            j: 1.0,
            alpha,
            h,
            n_sites,
            sea: SeaPrescription::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sea(mut self, sea: SeaPrescription) -> Self {
        self.sea = sea;
        self
    }

    pub fn with_field(mut self, h: f64) -> Result<Self> {
        self.h = h;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sites(mut self, n_sites: usize) -> Result<Self> {
        self.n_sites = n_sites;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::InvalidParams(format!("j must be positive, got {}", self.j)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !self.h.is_finite() {
            return Err(Error::InvalidParams(format!("h must be finite, got {}", self.h)));
        }
        check_sites(self.n_sites)
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 3 {
        return Err(Error::InvalidParams(format!("n_sites must be >= 3, got {n_sites}")));
    }
    Ok(())
}

/// Boundary condition of the fermion modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// `k = 2 pi m / N`
    Periodic,
    /// `k = (2m + 1) pi / N`
    Antiperiodic,
}

/// Allowed momenta in `(-pi, pi]`, sorted ascending.
///
/// Each momentum is also stored as an integer `half_index` with
/// `k = pi * half_index / N`, which lets phases `e^{-ikr}` be looked up
/// exactly from a table of size `2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub k_values: Vec<f64>,
    pub half_index: Vec<i64>,
}

/// `k = pi * nu / n`, with `nu = n` mapped to exactly `pi`.
pub fn momentum(nu: i64, n_sites: usize) -> f64 {
    if nu == n_sites as i64 {
        PI
    } else {
        PI * nu as f64 / n_sites as f64
    }
}

/// The periodic grid `k = 2 pi m / N`.
pub fn build_grid(n_sites: usize) -> Result<MomentumGrid> {
    build_grid_with(n_sites, Boundary::Periodic)
}

pub fn build_grid_with(n_sites: usize, boundary: Boundary) -> Result<MomentumGrid> {
    check_sites(n_sites)?;
    let n = n_sites as i64;
    let parity = match boundary {
        Boundary::Periodic => 0,
        Boundary::Antiperiodic => 1,
    };
    let half_index: Vec<i64> = (-n + 1..=n).filter(|nu| nu.rem_euclid(2) == parity).collect();
    debug_assert_eq!(half_index.len(), n_sites);
    let k_values = half_index.iter().map(|&nu| momentum(nu, n_sites)).collect();
    Ok(MomentumGrid {
        n_sites,
        boundary,
        k_values,
        half_index,
    })
}

/// Single-particle energy `-J (h + cos k - (alpha/2) sin 2k)`.
pub fn dispersion(params: &ModelParams, k: f64) -> f64 {
    -params.j * (params.h + libm::cos(k) - 0.5 * params.alpha * libm::sin(2.0 * k))
}

fn dispersion_slope(params: &ModelParams, k: f64) -> f64 {
    params.j * (libm::sin(k) + params.alpha * libm::cos(2.0 * k))
}

/// The ground-state set of occupied momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiSea {
    pub n_sites: usize,
    pub prescription: SeaPrescription,
    /// Grid the occupied momenta belong to.
    pub boundary: Boundary,
    /// Occupied momenta, ascending.
    pub occupied: Vec<f64>,
    /// Occupied momenta as `pi * nu / N` half-indices, same order.
    pub occupied_index: Vec<i64>,
    pub filling: f64,
    /// `(1/N) sum_occupied eps_k`
    pub energy_per_site: f64,
    /// Another filling has the same energy within tolerance (zero modes or
    /// a partially filled degenerate shell).
    pub degenerate: bool,
}

impl FermiSea {
    pub fn particle_count(&self) -> usize {
        self.occupied.len()
    }
}

struct Mode {
    nu: i64,
    eps: f64,
}

fn sorted_modes(params: &ModelParams, grid: &MomentumGrid) -> Vec<Mode> {
    let mut modes: Vec<Mode> = grid
        .half_index
        .iter()
        .zip(&grid.k_values)
        .map(|(&nu, &k)| Mode {
            nu,
            eps: dispersion(params, k),
        })
        .collect();
    modes.sort_by(|a, b| a.eps.total_cmp(&b.eps).then(a.nu.cmp(&b.nu)));
    modes
}

fn make_sea(params: &ModelParams, boundary: Boundary, mut nus: Vec<i64>, degenerate: bool) -> FermiSea {
    let n = params.n_sites;
    nus.sort_unstable();
    let occupied: Vec<f64> = nus.iter().map(|&nu| momentum(nu, n)).collect();
    let energy: f64 = occupied.iter().map(|&k| dispersion(params, k)).sum();
    FermiSea {
        n_sites: n,
        prescription: params.sea,
        boundary,
        filling: occupied.len() as f64 / n as f64,
        energy_per_site: energy / n as f64,
        occupied,
        occupied_index: nus,
        degenerate,
    }
}

/// Ground-state Fermi sea under `params.sea`.
pub fn fermi_sea(params: &ModelParams) -> Result<FermiSea> {
    params.validate()?;
    match params.sea {
        SeaPrescription::SingleGrid => {
            let grid = build_grid(params.n_sites)?;
            let mut nus = Vec::new();
            let mut degenerate = false;
            for (&nu, &k) in grid.half_index.iter().zip(&grid.k_values) {
                let e = dispersion(params, k);
                if e < -ZERO_MODE_TOL {
                    nus.push(nu);
                } else if e <= ZERO_MODE_TOL {
                    degenerate = true;
                }
            }
            Ok(make_sea(params, Boundary::Periodic, nus, degenerate))
        }
        SeaPrescription::ParityProjected => parity_projected(params),
    }
}

fn parity_projected(params: &ModelParams) -> Result<FermiSea> {
    let n = params.n_sites;
    let periodic = sorted_modes(params, &build_grid_with(n, Boundary::Periodic)?);
    let antiperiodic = sorted_modes(params, &build_grid_with(n, Boundary::Antiperiodic)?);
    let mut pre_p = Vec::with_capacity(n + 1);
    let mut pre_a = Vec::with_capacity(n + 1);
    let (mut sp, mut sa) = (0.0, 0.0);
    pre_p.push(0.0);
    pre_a.push(0.0);
    for i in 0..n {
        sp += periodic[i].eps;
        sa += antiperiodic[i].eps;
        pre_p.push(sp);
        pre_a.push(sa);
    }
    let energy = |nf: usize| if nf % 2 == 1 { pre_p[nf] } else { pre_a[nf] };

    let mut best = 0usize;
    for nf in 1..=n {
        if energy(nf) < energy(best) - ENERGY_TIE_TOL {
            best = nf;
        }
    }
    let e_best = energy(best);
    let mut degenerate = (0..=n).any(|nf| nf != best && (energy(nf) - e_best).abs() <= ENERGY_TIE_TOL);
    let modes = if best % 2 == 1 { &periodic } else { &antiperiodic };
    if best > 0 && best < n && (modes[best].eps - modes[best - 1].eps).abs() <= ZERO_MODE_TOL {
        degenerate = true;
    }
    let boundary = if best % 2 == 1 {
        Boundary::Periodic
    } else {
        Boundary::Antiperiodic
    };
    let nus = modes[..best].iter().map(|m| m.nu).collect();
    Ok(make_sea(params, boundary, nus, degenerate))
}

/// `(1/N) sum_occupied eps_k`, the fermion energy per site.
pub fn ground_energy_per_site(params: &ModelParams) -> Result<f64> {
    Ok(fermi_sea(params)?.energy_per_site)
}

/// Energy per site of the spin Hamiltonian: the fermion energy plus `J h / 2`.
pub fn spin_energy_per_site(params: &ModelParams) -> Result<f64> {
    Ok(ground_energy_per_site(params)? + 0.5 * params.j * params.h)
}

/// `<S^z> = filling - 1/2`.
pub fn magnetization_z(params: &ModelParams) -> Result<f64> {
    Ok(fermi_sea(params)?.filling - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Gapped, fully polarized.
    Pm,
    /// Gapless, two Fermi points.
    SlI,
    /// Gapless, four Fermi points.
    SlII,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Pm => "PM",
            Phase::SlI => "SL-I",
            Phase::SlII => "SL-II",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub fermi_point_count: u8,
}

/// Roots of a `2 pi`-periodic function on `(-pi, pi]`, bracketed on
/// `ROOT_SAMPLES` cells and refined by bisection. Roots of even multiplicity
/// are not detected.
fn periodic_roots(f: impl Fn(f64) -> f64) -> Vec<f64> {
    let step = 2.0 * PI / ROOT_SAMPLES as f64;
    let mut roots = Vec::new();
    let mut a = -PI + 0.5 * step;
    let mut fa = f(a);
    for i in 0..ROOT_SAMPLES {
        let b = -PI + (i as f64 + 1.5) * step;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    for r in roots.iter_mut() {
        if *r > PI {
            *r -= 2.0 * PI;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn g(alpha: f64, k: f64) -> f64 {
    -libm::cos(k) + 0.5 * alpha * libm::sin(2.0 * k)
}

fn g_prime(alpha: f64, k: f64) -> f64 {
    libm::sin(k) + alpha * libm::cos(2.0 * k)
}

/// Counts Fermi points of the continuous dispersion and maps 0/2/4 to
/// PM/SL-I/SL-II. Fails with [`Error::CriticalPoint`] when the dispersion
/// touches zero tangentially.
pub fn classify_phase(params: &ModelParams) -> Result<PhaseLabel> {
    params.validate()?;
    let extrema = periodic_roots(|k| g_prime(params.alpha, k));
    for &k in &extrema {
        if dispersion(params, k).abs() < TANGENT_VALUE_TOL * params.j {
            return Err(Error::CriticalPoint { k });
        }
    }
    // eps is monotone between consecutive extrema, so each cell holds at most
    // one Fermi point.
    let mut count = 0u8;
    for (i, &a) in extrema.iter().enumerate() {
        let b = if i + 1 < extrema.len() {
            extrema[i + 1]
        } else {
            extrema[0] + 2.0 * PI
        };
        let ea = dispersion(params, a);
        let eb = dispersion(params, b);
        if (ea < 0.0) != (eb < 0.0) {
            let root = bisect(&|k| dispersion(params, k), a, b, ea);
            if dispersion_slope(params, root).abs() < TANGENT_SLOPE_TOL * params.j {
                let k = if root > PI { root - 2.0 * PI } else { root };
                return Err(Error::CriticalPoint { k });
            }
            count += 1;
        }
    }
    let phase = match count {
        0 => Phase::Pm,
        2 => Phase::SlI,
        4 => Phase::SlII,
        other => return Err(Error::Numerical(format!("dispersion has {other} Fermi points"))),
    };
    Ok(PhaseLabel {
        phase,
        fermi_point_count: count,
    })
}

/// Fields at which the Fermi-point count changes: the non-negative values of
/// `g(k) = -cos k + (alpha/2) sin 2k` at its local extrema, ascending.
pub fn critical_fields(alpha: f64) -> Result<Vec<f64>> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let mut fields: Vec<f64> = periodic_roots(|k| g_prime(alpha, k))
        .into_iter()
        .map(|k| g(alpha, k))
        .filter(|&v| v >= -ROOT_TOL)
        .map(|v| v.max(0.0))
        .collect();
    fields.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    fields.dedup_by(|a, b| (*a - *b).abs() < FIELD_DEDUP_TOL);
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    fn params(alpha: f64, h: f64, n: usize) -> ModelParams {
        ModelParams::new(alpha, h, n).unwrap()
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(&params(0.0, 0.0, 4), 0.0), -1.0);
        assert_eq!(dispersion(&params(0.0, 2.0, 4), PI), -1.0);
        assert!(dispersion(&params(1.0, 0.0, 4), PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dispersion_even_part() {
        let p = params(1.7, 0.4, 5);
        for i in 0..50 {
            let k = -PI + 0.1257 * i as f64;
            let lhs = dispersion(&p, k) + dispersion(&p, -k);
            assert!((lhs + 2.0 * (0.4 + libm::cos(k))).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.0, 0.0, 2).is_err());
        assert!(ModelParams::new(-0.1, 0.0, 5).is_err());
        assert!(ModelParams::new(0.0, f64::NAN, 5).is_err());
        let mut p = params(0.0, 0.0, 5);
        p.j = 0.0;
        assert!(p.validate().is_err());
        assert!(build_grid(2).is_err());
    }

    #[test]
    fn grid_even_and_odd() {
        let g4 = build_grid(4).unwrap();
        assert_eq!(g4.k_values, vec![-PI / 2.0, 0.0, PI / 2.0, PI]);
        let g3 = build_grid(3).unwrap();
        let want = [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0];
        for (a, b) in g3.k_values.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let g5 = build_grid(5).unwrap();
        assert_eq!(g5.k_values.len(), 5);
        assert_eq!(g5.k_values[2], 0.0);
        for i in 0..5 {
            assert_eq!(g5.k_values[i], -g5.k_values[4 - i]);
        }
    }

    #[test]
    fn grids_are_sorted_distinct_and_in_range() {
        for n in 3..40 {
            for b in [Boundary::Periodic, Boundary::Antiperiodic] {
                let g = build_grid_with(n, b).unwrap();
                assert_eq!(g.k_values.len(), n);
                assert!(g.k_values.windows(2).all(|w| w[0] < w[1]));
                assert!(g.k_values.iter().all(|&k| k > -PI && k <= PI));
                for &nu in &g.half_index {
                    let odd = nu.rem_euclid(2) == 1;
                    assert_eq!(odd, b == Boundary::Antiperiodic);
                }
            }
        }
    }

    #[test]
    fn polarized_sea_is_full() {
        for sea in [SeaPrescription::SingleGrid, SeaPrescription::ParityProjected] {
            let p = params(0.0, 2.0, 100).with_sea(sea);
            let s = fermi_sea(&p).unwrap();
            assert_eq!(s.occupied.len(), 100);
            assert_eq!(s.filling, 1.0);
            assert!((s.energy_per_site + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn half_filled_xx_sea() {
        // zero modes at k = +-pi/2 stay empty on the single grid
        let single = fermi_sea(&params(0.0, 0.0, 100).with_sea(SeaPrescription::SingleGrid)).unwrap();
        assert_eq!(single.occupied.len(), 49);
        assert!(single.degenerate);
        let parity = fermi_sea(&params(0.0, 0.0, 100)).unwrap();
        assert_eq!(parity.filling, 0.5);
        assert_eq!(parity.boundary, Boundary::Antiperiodic);
    }

    #[test]
    fn single_grid_sea_is_negative_modes() {
        for &(a, h) in &[(0.3, 0.2), (2.0, 0.0), (2.0, 0.7), (1.2, -0.4)] {
            let p = params(a, h, 37).with_sea(SeaPrescription::SingleGrid);
            let s = fermi_sea(&p).unwrap();
            let g = build_grid(37).unwrap();
            let want: Vec<f64> = g
                .k_values
                .iter()
                .copied()
                .filter(|&k| dispersion(&p, k) < 0.0)
                .collect();
            assert_eq!(s.occupied, want);
        }
    }

    #[test]
    fn four_fermi_points_on_the_grid() {
        let p = params(2.0, 0.0, 1000);
        let g = build_grid(1000).unwrap();
        let signs: Vec<bool> = g.k_values.iter().map(|&k| dispersion(&p, k) < 0.0).collect();
        let changes = (0..signs.len())
            .filter(|&i| signs[i] != signs[(i + 1) % signs.len()])
            .count();
        assert_eq!(changes, 4);
    }

    #[test]
    fn parity_sea_parity_matches_grid() {
        for &(a, h) in &[(0.0, 0.0), (0.5, 0.3), (2.0, 0.3), (2.0, 0.8), (1.0, 0.0)] {
            for n in [8, 9, 12, 13, 50] {
                let s = fermi_sea(&params(a, h, n)).unwrap();
                let odd = s.particle_count() % 2 == 1;
                assert_eq!(odd, s.boundary == Boundary::Periodic);
            }
        }
    }

    #[test]
    fn parity_sea_minimizes_over_particle_numbers() {
        // brute force over every subset of a small ring
        for &(a, h) in &[(0.5, 0.3), (2.0, 0.3), (2.0, 0.8), (0.0, 0.45)] {
            let n = 7;
            let p = params(a, h, n);
            let s = fermi_sea(&p).unwrap();
            let mut best = f64::INFINITY;
            for b in [Boundary::Periodic, Boundary::Antiperiodic] {
                let g = build_grid_with(n, b).unwrap();
                for mask in 0u32..(1 << n) {
                    let odd = mask.count_ones() % 2 == 1;
                    if odd != (b == Boundary::Periodic) {
                        continue;
                    }
                    let e: f64 = (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| dispersion(&p, g.k_values[i]))
                        .sum();
                    best = best.min(e);
                }
            }
            assert!((s.energy_per_site * n as f64 - best).abs() < 1e-12);
        }
    }

    #[test]
    fn xx_ground_energy_limit() {
        let e = ground_energy_per_site(&params(0.0, 0.0, 2000)).unwrap();
        assert!((e + 1.0 / PI).abs() < 1e-3);
        for n in [3, 10, 57] {
            let e = ground_energy_per_site(&params(0.0, 2.0, n)).unwrap();
            assert!((e + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn magnetization_examples() {
        assert_eq!(magnetization_z(&params(0.0, 2.0, 40)).unwrap(), 0.5);
        assert_eq!(magnetization_z(&params(0.0, 0.0, 40)).unwrap(), 0.0);
        let single = params(0.0, 0.0, 42).with_sea(SeaPrescription::SingleGrid);
        assert_eq!(magnetization_z(&single).unwrap(), 0.0);
    }

    #[test]
    fn energy_and_filling_monotone_in_field() {
        for a in [0.0, 0.5, 2.0] {
            let mut last_e = f64::INFINITY;
            let mut last_f = -1.0;
            for i in 0..60 {
                let h = -0.5 + 0.05 * i as f64;
                let p = params(a, h, 31).with_sea(SeaPrescription::SingleGrid);
                let s = fermi_sea(&p).unwrap();
                assert!(s.energy_per_site <= last_e + 1e-12);
                assert!(s.filling >= last_f);
                last_e = s.energy_per_site;
                last_f = s.filling;
            }
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_phase(&params(0.5, 0.0, 10)).unwrap().phase, Phase::SlI);
        assert_eq!(classify_phase(&params(2.0, 0.0, 10)).unwrap().phase, Phase::SlII);
        let pm = classify_phase(&params(0.0, 1.5, 10)).unwrap();
        assert_eq!(pm.phase, Phase::Pm);
        assert_eq!(pm.fermi_point_count, 0);
        assert_eq!(classify_phase(&params(2.0, 0.0, 10)).unwrap().fermi_point_count, 4);
    }

    #[test]
    fn classify_rejects_critical_points() {
        assert!(matches!(
            classify_phase(&params(1.0, 0.0, 10)),
            Err(Error::CriticalPoint { .. })
        ));
        assert!(matches!(
            classify_phase(&params(0.0, 1.0, 10)),
            Err(Error::CriticalPoint { .. })
        ));
    }

    fn brute_extrema(alpha: f64) -> Vec<f64> {
        // dense scan for local extrema of g, refined by a parabola fit
        let m = 1_000_000;
        let step = 2.0 * PI / m as f64;
        let val = |i: i64| g(alpha, -PI + step * i as f64);
        let mut out = Vec::new();
        for i in 0..m as i64 {
            let (a, b, c) = (val(i - 1), val(i), val(i + 1));
            if (b > a && b >= c) || (b < a && b <= c) {
                let denom = a - 2.0 * b + c;
                let t = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
                out.push(b - 0.25 * (a - c) * t);
            }
        }
        out.retain(|&v| v >= 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        out
    }

    #[test]
    fn critical_fields_free_limit() {
        assert_eq!(critical_fields(0.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn critical_fields_match_dense_scan() {
        for alpha in [0.5, 1.5, 2.0, 3.0] {
            let fast = critical_fields(alpha).unwrap();
            let slow = brute_extrema(alpha);
            assert_eq!(fast.len(), slow.len(), "alpha={alpha}");
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-6, "alpha={alpha}: {a} vs {b}");
            }
        }
        let two = critical_fields(2.0).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two[0] < two[1]);
    }

    #[test]
    fn critical_fields_at_two_closed_form() {
        // g'(k) = 0 with alpha = 2 gives sin k = (1 +- sqrt 33) / 8
        let want: Vec<f64> = [(1.0 + libm::sqrt(33.0)) / 8.0, (1.0 - libm::sqrt(33.0)) / 8.0]
            .iter()
            .flat_map(|&s: &f64| {
                let k = libm::asin(s);
                [k, PI - k]
            })
            .map(|k| g(2.0, k))
            .filter(|&v| v >= 0.0)
            .collect();
        let mut want = want;
        want.sort_by(f64::total_cmp);
        let got = critical_fields(2.0).unwrap();
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn lowest_field_closes_at_alpha_one() {
        let mut last = f64::INFINITY;
        for eps in [0.2, 0.05, 0.01, 0.001] {
            let f = critical_fields(1.0 + eps).unwrap();
            assert!(f[0] < last);
            last = f[0];
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn phase_changes_only_at_critical_fields() {
        for alpha in [0.4, 2.0, 2.7] {
            let fields = critical_fields(alpha).unwrap();
            let mut last_count = u8::MAX;
            let mut last_h = 0.0;
            for i in 0..400 {
                let h = 0.00537 + 0.0071 * i as f64;
                let label = match classify_phase(&params(alpha, h, 10)) {
                    Ok(l) => l,
                    Err(_) => continue,
                };
                if last_count != u8::MAX && label.fermi_point_count != last_count {
                    assert!(label.fermi_point_count < last_count);
                    assert!(fields.iter().any(|&f| f > last_h && f <= h));
                }
                last_count = label.fermi_point_count;
                last_h = h;
            }
        }
    }
}
