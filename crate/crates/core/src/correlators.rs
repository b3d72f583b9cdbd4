//! Fermion two-point function `f(r) = <c_n^dag c_{n+r}>` and the Majorana
//! contractions built from it.
//!
//! With `A_n = c_n^dag + c_n` and `B_n = c_n^dag - c_n`, the ground state
//! only has normal (`c^dag c`) correlations, so every contraction follows from
//! `f`:
//!
//! ```text
//! <A_n A_m> =  d - i S(m-n)      <A_n B_m> =  d - C(m-n)
//! <B_n B_m> = -d + i S(m-n)      <B_n A_m> = -d + C(m-n)
//! ```
//!
//! where `C(r) = 2 Re f(r)`, `S(r) = -2 Im f(r)` and `d` is the Kronecker delta.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::model::FermiSea;
use crate::{Error, Result};

/// Cached `f(r)` for `r` in `0..N`, with the derived cosine and sine sums.
/// Negative separations use `f(-r) = conj f(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionTable {
    pub n_sites: usize,
    pub f: Vec<Complex64>,
    /// `(2/N) sum_occupied cos(k r)`
    pub cos_sum: Vec<f64>,
    /// `(2/N) sum_occupied sin(k r)`
    pub sin_sum: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Majorana {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContractionKind {
    AA,
    BB,
    AB,
    BA,
}

impl ContractionKind {
    pub fn of(left: Majorana, right: Majorana) -> Self {
        match (left, right) {
            (Majorana::A, Majorana::A) => ContractionKind::AA,
            (Majorana::B, Majorana::B) => ContractionKind::BB,
            (Majorana::A, Majorana::B) => ContractionKind::AB,
            (Majorana::B, Majorana::A) => ContractionKind::BA,
        }
    }
}

impl fmt::Display for ContractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ContractionKind::AA => "AA",
            ContractionKind::BB => "BB",
            ContractionKind::AB => "AB",
            ContractionKind::BA => "BA",
        };
        f.write_str(s)
    }
}

/// Evaluates `f(r) = (1/N) sum_{k in sea} e^{-ikr}` by direct summation.
///
/// Phases come from a table of `cos(pi j / N)`, `sin(pi j / N)` indexed by
/// `nu * r mod 2N`, so every `e^{-ikr}` is the correctly rounded value of an
/// exact grid angle.
pub fn build_table(sea: &FermiSea) -> ContractionTable {
    let n = sea.n_sites;
    let period = 2 * n as i64;
    // angles above pi mirror those below, so +-k phases are exact conjugates
    let mut cos_tab = vec![0.0; 2 * n];
    let mut sin_tab = vec![0.0; 2 * n];
    for j in 0..=n {
        let x = PI * j as f64 / n as f64;
        cos_tab[j] = libm::cos(x);
        sin_tab[j] = if j == n { 0.0 } else { libm::sin(x) };
        if j > 0 && j < n {
            cos_tab[2 * n - j] = cos_tab[j];
            sin_tab[2 * n - j] = -sin_tab[j];
        }
    }
    let inv_n = 1.0 / n as f64;
    let mut f = Vec::with_capacity(n);
    for r in 0..n as i64 {
        let (mut re, mut im) = (0.0, 0.0);
        for &nu in &sea.occupied_index {
            let j = (nu * r).rem_euclid(period) as usize;
            re += cos_tab[j];
            im -= sin_tab[j];
        }
        f.push(Complex64::new(re * inv_n, im * inv_n));
    }
    let cos_sum = f.iter().map(|z| 2.0 * z.re).collect();
    let sin_sum = f.iter().map(|z| -2.0 * z.im).collect();
    ContractionTable {
        n_sites: n,
        f,
        cos_sum,
        sin_sum,
    }
}

impl ContractionTable {
    fn check(&self, r: i64) -> Result<usize> {
        let max = self.n_sites as i64 - 1;
        if r.abs() > max {
            return Err(Error::OutOfRange {
                what: "separation",
                value: r,
                min: -max,
                max,
            });
        }
        Ok(r.unsigned_abs() as usize)
    }

    pub fn filling(&self) -> f64 {
        self.f[0].re
    }

    pub fn mz(&self) -> f64 {
        self.f[0].re - 0.5
    }

    /// `f(r)` for `|r| <= N - 1`.
    pub fn two_point(&self, r: i64) -> Result<Complex64> {
        let a = self.check(r)?;
        Ok(if r >= 0 { self.f[a] } else { self.f[a].conj() })
    }

    /// `<X_n Y_{n+r}>` for the Majorana pair given by `kind`.
    pub fn contraction(&self, kind: ContractionKind, r: i64) -> Result<Complex64> {
        self.check(r)?;
        Ok(self.contraction_unchecked(kind, r))
    }

    pub(crate) fn contraction_unchecked(&self, kind: ContractionKind, r: i64) -> Complex64 {
        let a = r.unsigned_abs() as usize;
        let delta = if r == 0 { 1.0 } else { 0.0 };
        let sin = if r >= 0 { self.sin_sum[a] } else { -self.sin_sum[a] };
        let cos = self.cos_sum[a];
        match kind {
            ContractionKind::AA => Complex64::new(delta, -sin),
            ContractionKind::BB => Complex64::new(-delta, sin),
            ContractionKind::AB => Complex64::new(delta - cos, 0.0),
            ContractionKind::BA => Complex64::new(-delta + cos, 0.0),
        }
    }
}

/// `<S^z_n S^z_{n+r}> = m_z^2 - |f(r)|^2` for `1 <= r <= N - 1`.
pub fn zz_correlator(table: &ContractionTable, r: usize) -> Result<f64> {
    if r == 0 || r >= table.n_sites {
        return Err(Error::OutOfRange {
            what: "zz separation",
            value: r as i64,
            min: 1,
            max: table.n_sites as i64 - 1,
        });
    }
    let mz = table.mz();
    Ok(mz * mz - table.f[r].norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fermi_sea, ModelParams, SeaPrescription};
    use nalgebra::DMatrix;

    fn table(alpha: f64, h: f64, n: usize) -> ContractionTable {
        build_table(&fermi_sea(&ModelParams::new(alpha, h, n).unwrap()).unwrap())
    }

    fn direct_f(sea: &FermiSea, r: i64) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for &k in &sea.occupied {
            let x = k * r as f64;
            z += Complex64::new(libm::cos(x), -libm::sin(x));
        }
        z / sea.n_sites as f64
    }

    #[test]
    fn table_matches_direct_sum() {
        for &(a, h, n) in &[(0.0, 0.0, 50), (2.0, 0.3, 61), (0.5, 0.7, 40), (1.3, 0.2, 33)] {
            for sea in [SeaPrescription::ParityProjected, SeaPrescription::SingleGrid] {
                let p = ModelParams::new(a, h, n).unwrap().with_sea(sea);
                let s = fermi_sea(&p).unwrap();
                let t = build_table(&s);
                for r in 0..n as i64 {
                    assert!((t.f[r as usize] - direct_f(&s, r)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn polarized_table_is_delta() {
        let t = table(0.3, 2.5, 30);
        assert_eq!(t.f[0].re, 1.0);
        for r in 1..30 {
            assert!(t.f[r].norm() < 1e-14);
        }
    }

    #[test]
    fn empty_sea_table_is_zero() {
        let t = table(0.0, -3.0, 30);
        assert!(t.f.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn xx_nearest_neighbour_limit() {
        let t = table(0.0, 0.0, 2000);
        assert!((t.f[1].re - 1.0 / PI).abs() < 1e-3);
        let ab = t.contraction(ContractionKind::AB, 1).unwrap();
        assert!((ab.re + 2.0 / PI).abs() < 2e-3);
    }

    #[test]
    fn contraction_examples() {
        let t = table(0.8, 0.25, 24);
        let fill = t.filling();
        assert_eq!(t.contraction(ContractionKind::AA, 0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(
            t.contraction(ContractionKind::BB, 0).unwrap(),
            Complex64::new(-1.0, 0.0)
        );
        let ab0 = t.contraction(ContractionKind::AB, 0).unwrap();
        assert!((ab0.re - (1.0 - 2.0 * fill)).abs() < 1e-14);
        assert!(t.contraction(ContractionKind::AB, 24).is_err());
        assert!(t.contraction(ContractionKind::AB, -23).is_ok());
    }

    #[test]
    fn symmetric_sea_has_no_sine_part() {
        for h in [0.0, 0.3, 0.9] {
            let t = table(0.0, h, 40);
            for r in 0..40i64 {
                assert!(t.f[r as usize].im.abs() < 1e-15);
                let aa = t.contraction(ContractionKind::AA, r).unwrap();
                let want = if r == 0 { 1.0 } else { 0.0 };
                assert!((aa - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn contraction_antisymmetry() {
        let t = table(2.0, 0.3, 21);
        for r in 1..21i64 {
            for kind in [ContractionKind::AA, ContractionKind::BB] {
                let a = t.contraction(kind, r).unwrap();
                let b = t.contraction(kind, -r).unwrap();
                assert!((a + b).norm() < 1e-15);
            }
            let ba = t.contraction(ContractionKind::BA, r).unwrap();
            let ab = t.contraction(ContractionKind::AB, -r).unwrap();
            assert!((ba + ab).norm() < 1e-15);
        }
    }

    #[test]
    fn correlation_matrix_is_a_projector_spectrum() {
        for &(a, h) in &[(0.5, 0.3), (2.0, 0.3), (2.0, 0.0)] {
            let n = 16;
            let t = table(a, h, n);
            let m = DMatrix::from_fn(n, n, |i, j| t.two_point(j as i64 - i as i64).unwrap());
            assert!((&m - m.adjoint()).norm() < 1e-14);
            let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
            let count = fermi_sea(&ModelParams::new(a, h, n).unwrap()).unwrap().particle_count();
            assert!((trace - count as f64).abs() < 1e-12);
            for ev in m.symmetric_eigenvalues().iter() {
                assert!(*ev > -1e-12 && *ev < 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn zz_examples() {
        let pm = table(0.0, 2.0, 20);
        assert!((zz_correlator(&pm, 1).unwrap() - 0.25).abs() < 1e-14);
        let xx = table(0.0, 0.0, 2000);
        let v = zz_correlator(&xx, 1).unwrap();
        assert!((v + 1.0 / (PI * PI)).abs() < 1e-3);
        assert!(zz_correlator(&xx, 0).is_err());
    }
}
