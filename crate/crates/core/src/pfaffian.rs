//! Skew-symmetric Pfaffians and the Majorana strings behind the transverse
//! spin correlators.
//!
//! `G^{ab}_n = <S^a_1 S^b_{n+1}>` with `a, b` in `{x, y}` equals a prefactor
//! times the Pfaffian of the `2n x 2n` contraction matrix of a string of
//! Majorana operators. The strings for `xx` and `yy` at distance `n` are
//! prefixes of one longer string, and `xy`, `yx` differ from them only in the
//! last operator. [`transverse_correlators`] exploits this and obtains every
//! distance `1..=R` from a single Schur-complement sweep in `O(R^3)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlators::{ContractionKind, ContractionTable, Majorana};
use crate::{Error, Result};

/// Relative size below which a pivot column counts as zero.
pub const PIVOT_ZERO_TOL: f64 = 1e-13;

/// A pair pivot smaller than this fraction of its rows' scale is replaced by a
/// larger block pivot in the nested sweep.
const PAIR_PIVOT_RATIO: f64 = 0.1;
/// A block pivot is taken at the first size whose LU pivots all exceed this
/// fraction of the block rows' scale; failing that, the best-conditioned
/// block is used if its ratio exceeds [`BLOCK_PIVOT_FLOOR`].
const BLOCK_PIVOT_RATIO: f64 = 1e-2;
const BLOCK_PIVOT_FLOOR: f64 = 1e-8;
const MAX_BLOCK_PAIRS: usize = 12;
const PANEL_PAIRS: usize = 16;
const IMAG_TOL: f64 = 1e-8;

/// Even-dimensional complex skew-symmetric matrix holding its strict upper
/// triangle row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    upper: Vec<Complex64>,
}

impl SkewMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim < 2 || dim % 2 == 1 {
            return Err(Error::OddDimension(dim));
        }
        Ok(SkewMatrix {
            dim,
            upper: vec![Complex64::new(0.0, 0.0); dim * (dim - 1) / 2],
        })
    }

    /// Builds the matrix from its entries `(i, j)` with `i < j`.
    pub fn from_upper(dim: usize, mut entry: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in i + 1..dim {
                let idx = m.index(i, j);
                m.upper[idx] = entry(i, j);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match i.cmp(&j) {
            core::cmp::Ordering::Less => self.upper[self.index(i, j)],
            core::cmp::Ordering::Greater => -self.upper[self.index(j, i)],
            core::cmp::Ordering::Equal => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets `A[i][j] = v` and `A[j][i] = -v`.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i != j, "diagonal of a skew matrix is fixed at zero");
        if i < j {
            let idx = self.index(i, j);
            self.upper[idx] = v;
        } else {
            let idx = self.index(j, i);
            self.upper[idx] = -v;
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// `P^T A P` for the permutation sending row `i` of the result to row
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.dim);
        Self::from_upper(self.dim, |i, j| self.get(perm[i], perm[j]))
    }
}

/// Pfaffian by Parlett-Reid elimination with partial pivoting.
///
/// Returns exactly zero when the largest available pivot falls below
/// [`PIVOT_ZERO_TOL`] times the max-norm of the matrix.
pub fn pfaffian(a: &SkewMatrix) -> Result<Complex64> {
    if a.upper.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let n = a.dim;
    let mut dense = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = a.get(i, j);
            dense[i * n + j] = v;
            dense[j * n + i] = -v;
        }
    }
    Ok(pfaffian_dense(&mut dense, n))
}

/// Parlett-Reid on a full row-major antisymmetric matrix, destroyed in place.
fn pfaffian_dense(a: &mut [Complex64], n: usize) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return zero;
    }
    let tol = PIVOT_ZERO_TOL * scale;
    let mut pf = Complex64::new(1.0, 0.0);
    let mut tau = vec![zero; n];
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        let mut best = a[kp * n + k].norm();
        for i in k + 2..n {
            let v = a[i * n + k].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for c in 0..n {
                a.swap((k + 1) * n + c, kp * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k + 1, r * n + kp);
            }
            pf = -pf;
        }
        if best < tol {
            return zero;
        }
        let piv = a[k * n + k + 1];
        pf *= piv;
        if k + 2 < n {
            let inv = piv.inv();
            for j in k + 2..n {
                tau[j] = a[k * n + j] * inv;
            }
            for i in k + 2..n {
                let ci = a[i * n + k + 1];
                for j in k + 2..n {
                    let cj = a[j * n + k + 1];
                    a[i * n + j] += tau[i] * cj - ci * tau[j];
                }
            }
        }
    }
    pf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StringKind {
    XX,
    YY,
    XY,
    YX,
}

impl StringKind {
    pub const ALL: [StringKind; 4] = [StringKind::XX, StringKind::YY, StringKind::XY, StringKind::YX];

    pub fn name(self) -> &'static str {
        match self {
            StringKind::XX => "xx",
            StringKind::YY => "yy",
            StringKind::XY => "xy",
            StringKind::YX => "yx",
        }
    }

    /// Operator at site 1 and operator repeated on each interior site.
    fn first(self) -> Majorana {
        match self {
            StringKind::XX | StringKind::XY => Majorana::B,
            StringKind::YY | StringKind::YX => Majorana::A,
        }
    }

    fn last(self) -> Majorana {
        match self {
            StringKind::XX | StringKind::YX => Majorana::A,
            StringKind::YY | StringKind::XY => Majorana::B,
        }
    }

    /// `D` in `G_n = D * Pf`.
    pub fn prefactor(self, n: usize) -> Complex64 {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        match self {
            StringKind::XX => Complex64::new(0.25, 0.0),
            StringKind::YY => Complex64::new(0.25 * sign, 0.0),
            StringKind::XY => Complex64::new(0.0, -0.25),
            StringKind::YX => Complex64::new(0.0, 0.25 * sign),
        }
    }
}

impl fmt::Display for StringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn other(m: Majorana) -> Majorana {
    match m {
        Majorana::A => Majorana::B,
        Majorana::B => Majorana::A,
    }
}

/// Ordered Majorana operators whose product gives `G^{kind}_n`; sites are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorString {
    pub kind: StringKind,
    pub n: usize,
    pub sequence: Vec<(usize, Majorana)>,
}

impl OperatorString {
    pub fn new(kind: StringKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange {
                what: "string distance",
                value: 0,
                min: 1,
                max: i64::MAX,
            });
        }
        let first = kind.first();
        let mut sequence = Vec::with_capacity(2 * n);
        sequence.push((1, first));
        for site in 2..=n {
            sequence.push((site, other(first)));
            sequence.push((site, first));
        }
        sequence.push((n + 1, kind.last()));
        Ok(OperatorString { kind, n, sequence })
    }
}

fn check_distance(table: &ContractionTable, n: usize) -> Result<()> {
    if n == 0 || n >= table.n_sites {
        return Err(Error::OutOfRange {
            what: "distance",
            value: n as i64,
            min: 1,
            max: table.n_sites as i64 - 1,
        });
    }
    Ok(())
}

fn entry(table: &ContractionTable, a: (usize, Majorana), b: (usize, Majorana)) -> Complex64 {
    let r = b.0 as i64 - a.0 as i64;
    table.contraction_unchecked(ContractionKind::of(a.1, b.1), r)
}

/// Contraction matrix `<phi_i phi_j>` of the string for `G^{kind}_n`.
pub fn assemble(kind: StringKind, n: usize, table: &ContractionTable) -> Result<SkewMatrix> {
    check_distance(table, n)?;
    let s = OperatorString::new(kind, n)?;
    SkewMatrix::from_upper(2 * n, |i, j| entry(table, s.sequence[i], s.sequence[j]))
}

fn real_part(kind: StringKind, n: usize, z: Complex64) -> Result<f64> {
    if z.im.abs() >= IMAG_TOL {
        return Err(Error::ImaginaryCorrelator {
            kind: kind.name(),
            n,
            imag: z.im,
        });
    }
    Ok(z.re)
}

/// `G^{kind}_n` from the Pfaffian of the assembled string matrix.
pub fn spin_correlator(kind: StringKind, n: usize, table: &ContractionTable) -> Result<f64> {
    let pf = pfaffian(&assemble(kind, n, table)?)?;
    real_part(kind, n, kind.prefactor(n) * pf)
}

/// Transverse correlators for distances `1..=max_range`, index `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseCorrelators {
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub xy: Vec<f64>,
    pub yx: Vec<f64>,
}

/// All `G^{xx,yy,xy,yx}_n` for `n = 1..=max_range` from two nested sweeps.
pub fn transverse_correlators(table: &ContractionTable, max_range: usize) -> Result<TransverseCorrelators> {
    check_distance(table, max_range)?;
    let (pxx, pxy) = nested_pfaffians(table, Majorana::B, max_range)?;
    let (pyy, pyx) = nested_pfaffians(table, Majorana::A, max_range)?;
    let mut out = TransverseCorrelators {
        xx: Vec::with_capacity(max_range),
        yy: Vec::with_capacity(max_range),
        xy: Vec::with_capacity(max_range),
        yx: Vec::with_capacity(max_range),
    };
    for n in 1..=max_range {
        let i = n - 1;
        out.xx
            .push(real_part(StringKind::XX, n, StringKind::XX.prefactor(n) * pxx[i])?);
        out.yy
            .push(real_part(StringKind::YY, n, StringKind::YY.prefactor(n) * pyy[i])?);
        out.xy
            .push(real_part(StringKind::XY, n, StringKind::XY.prefactor(n) * pxy[i])?);
        out.yx
            .push(real_part(StringKind::YX, n, StringKind::YX.prefactor(n) * pyx[i])?);
    }
    Ok(out)
}

/// For the string `[F_1, O_2, F_2, ..., O_{R+1}, F_{R+1}]` (`F = first`,
/// `O` the other Majorana) returns, for `n = 1..=R`, the Pfaffian of the
/// leading `2n` operators and of the leading `2n - 1` operators plus the one
/// at position `2n`.
///
/// The leading pairs are eliminated one at a time through Schur complements,
/// `Pf(M) = Pf(A) Pf(C + B^T A^{-1} B)`. A pair pivot that is small relative
/// to its rows is merged with the following pairs into a block pivot, and the
/// intermediate Pfaffians inside the block are evaluated with pivoting.
pub(crate) fn nested_pfaffians(
    table: &ContractionTable,
    first: Majorana,
    max_range: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let zero = Complex64::new(0.0, 0.0);
    let len = 2 * max_range + 1;
    let mut seq = Vec::with_capacity(len);
    seq.push((1usize, first));
    for site in 2..=max_range + 1 {
        seq.push((site, other(first)));
        seq.push((site, first));
    }
    let mut w = Schur::new(len);
    let mut scale = 0.0f64;
    for i in 0..len {
        for j in i + 1..len {
            let v = entry(table, seq[i], seq[j]);
            scale = scale.max(v.norm());
            w.set_upper(i, j, v);
        }
    }
    if !scale.is_finite() {
        return Err(Error::NonFinite);
    }

    let mut prefix = Vec::with_capacity(max_range);
    let mut border = Vec::with_capacity(max_range);
    let mut pf = Complex64::new(1.0, 0.0);
    let mut m = 0;
    while m < max_range {
        let s = 2 * m;
        w.materialize_row(s);
        if w.row_norm(s, s) <= PIVOT_ZERO_TOL * scale {
            // every remaining sub-Pfaffian contains this zero row
            prefix.resize(max_range, zero);
            border.resize(max_range, zero);
            break;
        }
        w.materialize_row(s + 1);
        let p = w.get(s, s + 1);
        let rho = w.row_norm(s, s).max(w.row_norm(s + 1, s));
        if p.norm() >= PAIR_PIVOT_RATIO * rho {
            border.push(pf * w.get(s, s + 2));
            pf *= p;
            prefix.push(pf);
            if m + 1 < max_range {
                w.defer_pair(s);
                if w.pending.len() >= PANEL_PAIRS {
                    w.flush(s + 2);
                }
            }
            m += 1;
            continue;
        }
        w.flush(s + 2);
        let remaining = max_range - m;
        match w.find_block(s, remaining) {
            Some((b, inv)) => {
                for j in 1..=b {
                    prefix.push(pf * w.sub_pfaffian(s, 2 * j, None));
                    border.push(pf * w.sub_pfaffian(s, 2 * j - 1, Some(s + 2 * j)));
                }
                pf = prefix[m + b - 1];
                if m + b < max_range {
                    w.eliminate_block(s, 2 * b, &inv);
                }
                m += b;
            }
            None => {
                for j in 1..=remaining {
                    prefix.push(pf * w.sub_pfaffian(s, 2 * j, None));
                    border.push(pf * w.sub_pfaffian(s, 2 * j - 1, Some(s + 2 * j)));
                }
                m = max_range;
            }
        }
    }
    Ok((prefix, border))
}

/// Eliminated pair whose rank-2 update has not been applied yet: the inverse
/// pivot and the two pivot rows (full width, meaningful past the pair), with
/// real and imaginary parts stored apart.
struct PairUpdate {
    inv: Complex64,
    r0: Split,
    r1: Split,
}

struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }
}

/// Upper triangle of the running Schur complement, row-major, with real and
/// imaginary parts in separate arrays so the update loops vectorize. Pair
/// updates are queued and applied to the trailing rows in panels, so the
/// matrix is streamed once per panel instead of once per pair.
struct Schur {
    len: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    pending: Vec<PairUpdate>,
}

impl Schur {
    fn new(len: usize) -> Self {
        Schur {
            len,
            re: vec![0.0; len * len],
            im: vec![0.0; len * len],
            pending: Vec::new(),
        }
    }

    fn upper(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.len + j;
        Complex64::new(self.re[k], self.im[k])
    }

    fn set_upper(&mut self, i: usize, j: usize, v: Complex64) {
        let k = i * self.len + j;
        self.re[k] = v.re;
        self.im[k] = v.im;
    }

    fn get(&self, i: usize, j: usize) -> Complex64 {
        match i.cmp(&j) {
            core::cmp::Ordering::Less => self.upper(i, j),
            core::cmp::Ordering::Greater => -self.upper(j, i),
            core::cmp::Ordering::Equal => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest magnitude in row `i` over the active columns `>= start`.
    fn row_norm(&self, i: usize, start: usize) -> f64 {
        let mut m = 0.0f64;
        for c in start..self.len {
            if c != i {
                m = m.max(self.get(i, c).norm());
            }
        }
        m
    }

    /// Applies the queued updates to row `i` only, two at a time.
    fn materialize_row(&mut self, i: usize) {
        let len = self.len;
        let lo = i * len + i + 1;
        let hi = i * len + len;
        let n = hi - lo;
        let wr = &mut self.re[lo..hi];
        let wi = &mut self.im[lo..hi];
        let coeffs = |u: &PairUpdate| {
            let c1 = u.inv * u.r1.get(i);
            let c0 = u.inv * u.r0.get(i);
            (c1.re, c1.im, c0.re, c0.im)
        };
        fn cut(v: &[f64], from: usize, n: usize) -> &[f64] {
            &v[from..from + n]
        }
        let tail = |v| cut(v, i + 1, n);
        let mut chunks = self.pending.chunks_exact(2);
        for pair in &mut chunks {
            let (u, v) = (&pair[0], &pair[1]);
            let (a1r, a1i, a0r, a0i) = coeffs(u);
            let (b1r, b1i, b0r, b0i) = coeffs(v);
            let (u0r, u0i, u1r, u1i) = (tail(&u.r0.re), tail(&u.r0.im), tail(&u.r1.re), tail(&u.r1.im));
            let (v0r, v0i, v1r, v1i) = (tail(&v.r0.re), tail(&v.r0.im), tail(&v.r1.re), tail(&v.r1.im));
            for j in 0..n {
                wr[j] += a1r * u0r[j] - a1i * u0i[j] - a0r * u1r[j] + a0i * u1i[j] + b1r * v0r[j]
                    - b1i * v0i[j]
                    - b0r * v1r[j]
                    + b0i * v1i[j];
                wi[j] += a1r * u0i[j] + a1i * u0r[j] - a0r * u1i[j] - a0i * u1r[j] + b1r * v0i[j] + b1i * v0r[j]
                    - b0r * v1i[j]
                    - b0i * v1r[j];
            }
        }
        for u in chunks.remainder() {
            let (a1r, a1i, a0r, a0i) = coeffs(u);
            let (u0r, u0i, u1r, u1i) = (tail(&u.r0.re), tail(&u.r0.im), tail(&u.r1.re), tail(&u.r1.im));
            for j in 0..n {
                wr[j] += a1r * u0r[j] - a1i * u0i[j] - a0r * u1r[j] + a0i * u1i[j];
                wi[j] += a1r * u0i[j] + a1i * u0r[j] - a0r * u1i[j] - a0i * u1r[j];
            }
        }
    }

    fn row_tail(&self, i: usize, from: usize) -> Split {
        let len = self.len;
        let mut re = vec![0.0; len];
        let mut im = vec![0.0; len];
        re[from..].copy_from_slice(&self.re[i * len + from..i * len + len]);
        im[from..].copy_from_slice(&self.im[i * len + from..i * len + len]);
        Split { re, im }
    }

    /// Queues the elimination of the pair at `s`, whose rows must be current.
    fn defer_pair(&mut self, s: usize) {
        let r0 = self.row_tail(s, s + 2);
        let r1 = self.row_tail(s + 1, s + 2);
        let inv = self.upper(s, s + 1).inv();
        self.pending.push(PairUpdate { inv, r0, r1 });
    }

    /// Applies the queued updates to every row from `from` on.
    fn flush(&mut self, from: usize) {
        if self.pending.is_empty() {
            return;
        }
        for i in from..self.len {
            self.materialize_row(i);
        }
        self.pending.clear();
    }

    fn block(&self, s: usize, size: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(size, size, |i, j| self.get(s + i, s + j))
    }

    /// Smallest block of `b >= 2` pairs starting at `s` whose LU pivots are
    /// all at least `BLOCK_PIVOT_RATIO` times the block rows' scale, else the
    /// best-conditioned block above `BLOCK_PIVOT_FLOOR`. Returns the pair
    /// count and the block inverse.
    fn find_block(&self, s: usize, remaining: usize) -> Option<(usize, DMatrix<Complex64>)> {
        let max_b = remaining.min(MAX_BLOCK_PAIRS);
        let mut best: Option<(f64, usize, DMatrix<Complex64>)> = None;
        for b in 2..=max_b {
            let size = 2 * b;
            let rho = (s..s + size).map(|i| self.row_norm(i, s)).fold(0.0, f64::max);
            let lu = self.block(s, size).lu();
            let u = lu.u();
            let min_pivot = (0..size).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
            let ratio = min_pivot / rho;
            if ratio.is_nan() || ratio < BLOCK_PIVOT_FLOOR || best.as_ref().is_some_and(|(r, _, _)| *r >= ratio) {
                continue;
            }
            if let Some(inv) = lu.try_inverse() {
                if ratio >= BLOCK_PIVOT_RATIO {
                    return Some((b, inv));
                }
                best = Some((ratio, b, inv));
            }
        }
        best.map(|(_, b, inv)| (b, inv))
    }

    /// Pfaffian of the active submatrix on indices `s..s + lead` plus `extra`.
    fn sub_pfaffian(&self, s: usize, lead: usize, extra: Option<usize>) -> Complex64 {
        let mut idx: Vec<usize> = (s..s + lead).collect();
        idx.extend(extra);
        let n = idx.len();
        let mut dense = vec![Complex64::new(0.0, 0.0); n * n];
        for a in 0..n {
            for b in 0..n {
                dense[a * n + b] = self.get(idx[a], idx[b]);
            }
        }
        pfaffian_dense(&mut dense, n)
    }

    /// `C += X^T A^{-1} X` for the leading block `A` of `size` rows at `s`.
    fn eliminate_block(&mut self, s: usize, size: usize, inv: &DMatrix<Complex64>) {
        let lo = s + size;
        let rest = self.len - lo;
        let x = DMatrix::from_fn(size, rest, |a, c| self.upper(s + a, lo + c));
        let y = inv * &x;
        for ii in 0..rest {
            for jj in ii + 1..rest {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..size {
                    acc += x[(a, ii)] * y[(a, jj)];
                }
                let v = self.upper(lo + ii, lo + jj) + acc;
                self.set_upper(lo + ii, lo + jj, v);
            }
        }
    }
}
